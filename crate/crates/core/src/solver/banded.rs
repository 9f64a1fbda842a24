//! Banded symmetric positive-definite solves, used for the lowest state of
//! field-perturbed Hamiltonians (one channel, or two interleaved radial
//! channels coupled by the field).

use crate::error::{Error, Result};
use crate::quad::KahanSum;

/// Lower band storage: `lower[k][i]` holds A[i + k][i].
#[derive(Debug, Clone)]
pub struct SymBanded {
    n: usize,
    lower: Vec<Vec<f64>>,
}

impl SymBanded {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let lower = (0..=bandwidth).map(|k| vec![0.0; n.saturating_sub(k)]).collect();
        Self { n, lower }
    }

    pub fn bandwidth(&self) -> usize {
        self.lower.len() - 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.lower[r - c][c] = v;
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        if k > self.bandwidth() {
            0.0
        } else {
            self.lower[k][c]
        }
    }

    /// Cholesky factor of (A − shift·I); fails if that is not positive definite.
    pub fn cholesky(&self, shift: f64) -> Result<BandedCholesky> {
        let bw = self.bandwidth();
        let n = self.n;
        // l[i*(bw+1) + k] = L[i][i-k]
        let mut l = vec![0.0; n * (bw + 1)];
        let at = |l: &Vec<f64>, i: usize, j: usize| l[i * (bw + 1) + (i - j)];
        for j in 0..n {
            let k0 = j.saturating_sub(bw);
            let mut s = self.get(j, j) - shift;
            for k in k0..j {
                let v = at(&l, j, k);
                s -= v * v;
            }
            if !(s > 0.0) {
                return Err(Error::Domain(format!(
                    "shifted operator not positive definite at row {j} (shift {shift})"
                )));
            }
            let d = s.sqrt();
            l[j * (bw + 1)] = d;
            for i in (j + 1)..(j + bw + 1).min(n) {
                let mut s = self.get(i, j);
                for k in i.saturating_sub(bw)..j {
                    s -= at(&l, i, k) * at(&l, j, k);
                }
                l[i * (bw + 1) + (i - j)] = s / d;
            }
        }
        Ok(BandedCholesky { n, bw, l })
    }
}

pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * (self.bw + 1) + (i - j)]
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, mut b: Vec<f64>) -> Vec<f64> {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.at(i, k) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..(i + self.bw + 1).min(n) {
                s -= self.at(k, i) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
        b
    }
}

/// Finite-difference Hamiltonian with one or two channels on a shared grid:
/// each channel carries its own potential, and `coupling` links channel 0
/// and channel 1 at equal nodes.
#[derive(Debug, Clone)]
pub struct ChannelOperator {
    pub kinetic: f64,
    pub potentials: Vec<Vec<f64>>,
    pub coupling: Option<Vec<f64>>,
}

impl ChannelOperator {
    pub fn nodes(&self) -> usize {
        self.potentials[0].len()
    }

    pub fn channels(&self) -> usize {
        self.potentials.len()
    }

    /// Interleaved banded matrix: index = node·channels + channel.
    pub fn to_banded(&self) -> SymBanded {
        let c = self.channels();
        let n = self.nodes();
        let t = self.kinetic;
        let mut a = SymBanded::zeros(n * c, c);
        for ch in 0..c {
            for i in 0..n {
                let idx = i * c + ch;
                a.set(idx, idx, 2.0 * t + self.potentials[ch][i]);
                if i + 1 < n {
                    a.set(idx + c, idx, -t);
                }
            }
        }
        if let Some(w) = &self.coupling {
            for (i, wi) in w.iter().enumerate() {
                a.set(i * c + 1, i * c, *wi);
            }
        }
        a
    }

    /// Rayleigh quotient in difference form, t·Σ(ψᵢ₊₁ − ψᵢ)² + Σ Vᵢψᵢ², which
    /// avoids the cancellation of the 2t diagonal against the off-diagonals.
    pub fn energy(&self, psi: &[f64]) -> f64 {
        self.energy_with_scale(psi).0
    }

    /// Energy together with the sum of magnitudes of its terms, the scale
    /// of its rounding error.
    fn energy_with_scale(&self, psi: &[f64]) -> (f64, f64) {
        let c = self.channels();
        let n = self.nodes();
        let mut num = KahanSum::new();
        let mut den = KahanSum::new();
        let mut mag = 0.0;
        for ch in 0..c {
            let comp = |i: usize| psi[i * c + ch];
            let mut prev = 0.0;
            for i in 0..n {
                let v = comp(i);
                let kin = self.kinetic * (v - prev) * (v - prev);
                let pot = self.potentials[ch][i] * v * v;
                mag += kin + pot.abs();
                num.add(kin);
                num.add(pot);
                den.add(v * v);
                prev = v;
            }
            num.add(self.kinetic * prev * prev);
        }
        if let Some(w) = &self.coupling {
            for (i, wi) in w.iter().enumerate() {
                let cpl = 2.0 * wi * psi[i * c] * psi[i * c + 1];
                mag += cpl.abs();
                num.add(cpl);
            }
        }
        let den = den.value();
        (num.value() / den, mag / den)
    }

    /// Lowest eigenpair by shifted inverse iteration; `shift` must lie below
    /// the lowest eigenvalue. `guess` seeds the iteration.
    pub fn lowest_state(&self, shift: f64, guess: Vec<f64>) -> Result<(f64, Vec<f64>)> {
        let chol = self.to_banded().cholesky(shift)?;
        let mut v = guess;
        super::tridiag::normalize_l2(&mut v);
        let mut energy = self.energy(&v);
        for it in 0..500 {
            v = chol.solve(v);
            super::tridiag::normalize_l2(&mut v);
            let (e, mag) = self.energy_with_scale(&v);
            let done = (e - energy).abs() <= 16.0 * f64::EPSILON * mag.max(f64::MIN_POSITIVE);
            energy = e;
            if done && it >= 2 {
                super::tridiag::fix_sign(&mut v);
                return Ok((energy, v));
            }
        }
        Err(Error::NoConvergence {
            iterations: 500,
            detail: format!("inverse iteration for the lowest state stalled near {energy}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_banded_system() {
        let n = 25;
        let mut a = SymBanded::zeros(n, 2);
        for i in 0..n {
            a.set(i, i, 6.0 + i as f64 * 0.1);
            if i + 1 < n {
                a.set(i + 1, i, -1.5);
            }
            if i + 2 < n {
                a.set(i + 2, i, 0.7);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sqrt()).collect();
        let b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a.get(i, j) * x[j]).sum()).collect();
        let got = a.cholesky(0.0).unwrap().solve(b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-12);
        }
        assert!(a.cholesky(100.0).is_err());
    }

    #[test]
    fn lowest_state_of_free_chain() {
        let n = 99;
        let op = ChannelOperator {
            kinetic: 1.0,
            potentials: vec![vec![0.0; n]],
            coupling: None,
        };
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n + 1) as f64).cos();
        let (e, v) = op.lowest_state(-0.01, vec![1.0; n]).unwrap();
        assert!((e - exact).abs() < 1e-15);
        assert!(v.iter().all(|x| *x > 0.0));
    }

    #[test]
    fn decoupled_channels_pick_the_lower() {
        let n = 50;
        let op = ChannelOperator {
            kinetic: 1.0,
            potentials: vec![vec![0.5; n], vec![0.0; n]],
            coupling: Some(vec![0.0; n]),
        };
        let (e, v) = op.lowest_state(-0.1, vec![1.0; 2 * n]).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n + 1) as f64).cos();
        assert!((e - exact).abs() < 1e-13);
        let ch0: f64 = (0..n).map(|i| v[2 * i].powi(2)).sum();
        assert!(ch0 < 1e-20);
    }
}
