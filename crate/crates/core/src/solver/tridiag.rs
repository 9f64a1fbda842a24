//! Symmetric tridiagonal matrices: Sturm-sequence bisection, inverse
//! iteration and pivoted LU solves.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// Off-diagonal, `diag.len() - 1` entries.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::domain("tridiagonal shape mismatch"));
        }
        if diag.iter().chain(off.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("tridiagonal matrix has non-finite entries"));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * v[i + 1];
            }
            out[i] = s;
        }
        out
    }

    /// Gershgorin interval enclosing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `x` (Sturm count).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE * self.off.iter().fold(1.0_f64, |m, b| m.max(b * b));
        let mut count = 0;
        let mut d = self.diag[0] - x;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let b = self.off[i - 1];
            d = self.diag[i] - x - b * b / d;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// k-th smallest eigenvalue (0-based) by bisection, bracketed below by
    /// `floor` when a lower eigenvalue is already known.
    pub fn eigenvalue_from(&self, k: usize, floor: Option<f64>) -> Result<f64> {
        if k >= self.len() {
            return Err(Error::domain(format!(
                "eigenvalue index {k} out of range for a {}x{} matrix",
                self.len(),
                self.len()
            )));
        }
        let (g_lo, g_hi) = self.gershgorin();
        let slack = 2.0 * f64::EPSILON * self.norm_bound() + f64::MIN_POSITIVE;
        let mut lo = floor.map_or(g_lo, |f| f.max(g_lo)) - slack;
        let mut hi = g_hi + slack;
        for _ in 0..4096 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                return Ok(mid);
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(Error::NoConvergence {
            iterations: 4096,
            detail: format!("bisection for eigenvalue {k} stalled in [{lo}, {hi}]"),
        })
    }

    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        self.eigenvalue_from(k, None)
    }

    /// Lowest `k` eigenvalues, ascending.
    pub fn lowest_eigenvalues(&self, k: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(k);
        let mut floor = None;
        for i in 0..k {
            let v = self.eigenvalue_from(i, floor)?;
            floor = Some(v);
            out.push(v);
        }
        Ok(out)
    }

    /// The `k` lowest eigenvalues, ascending. Large requests use implicit
    /// QL on the whole matrix; small ones use bisection.
    pub fn smallest(&self, k: usize) -> Result<Vec<f64>> {
        if k > self.len() {
            return Err(Error::domain(format!(
                "{k} eigenvalues requested from a {}x{} matrix",
                self.len(),
                self.len()
            )));
        }
        if k * 8 > self.len() {
            let mut all = self.all_eigenvalues()?;
            all.truncate(k);
            Ok(all)
        } else {
            self.lowest_eigenvalues(k)
        }
    }

    /// All eigenvalues, ascending, by the implicit QL iteration with
    /// Wilkinson shifts.
    pub fn all_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.len();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        for l in 0..n {
            let mut iterations = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iterations += 1;
                if iterations > 60 {
                    return Err(Error::NoConvergence {
                        iterations,
                        detail: format!("QL iteration stalled on eigenvalue {l}"),
                    });
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut underflow = false;
                for i in (l..m).rev() {
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if underflow {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Unit eigenvector for the eigenvalue `lambda` by inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let lu = TriLu::factor(self, lambda, true);
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.754_877_666).sin()).collect();
        for _ in 0..4 {
            v = lu.solve(v);
            normalize_l2(&mut v);
        }
        fix_sign(&mut v);
        v
    }

    /// Solve (T − shift·I) x = rhs with partial pivoting.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.len() {
            return Err(Error::domain("right-hand side length mismatch"));
        }
        let lu = TriLu::factor(self, shift, false);
        if lu.singular {
            return Err(Error::Degenerate(format!(
                "shifted tridiagonal system is singular at shift {shift}"
            )));
        }
        Ok(lu.solve(rhs.to_vec()))
    }
}

pub(crate) fn normalize_l2(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Make the largest-magnitude component positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let (mut best, mut idx) = (0.0, 0);
    for (i, x) in v.iter().enumerate() {
        // ties resolved toward the lowest index for determinism
        if x.abs() > best * (1.0 + 1e-9) {
            best = x.abs();
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// LU factorization of a shifted tridiagonal matrix with partial pivoting.
struct TriLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
    singular: bool,
}

impl TriLu {
    fn factor(t: &SymTridiagonal, shift: f64, perturb_zero_pivots: bool) -> Self {
        let n = t.len();
        let mut dl = t.off.clone();
        let mut d: Vec<f64> = t.diag.iter().map(|a| a - shift).collect();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                } else {
                    dl[i] = 0.0;
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        let scale = t.norm_bound();
        let tiny = f64::EPSILON * scale;
        let mut singular = false;
        for p in d.iter_mut() {
            if p.abs() < f64::MIN_POSITIVE * 1e3 || (perturb_zero_pivots && p.abs() < tiny) {
                if perturb_zero_pivots {
                    *p = if *p < 0.0 { -tiny } else { tiny };
                } else {
                    singular = true;
                }
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
            singular,
        }
    }

    fn solve(&self, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        b
    }
}
