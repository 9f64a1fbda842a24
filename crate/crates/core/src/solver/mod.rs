//! Grid-based engine: finite-difference eigenpairs and three independent
//! polarizability oracles (sum over states, finite field, Dalgarno–Lewis),
//! together with the numeric variance, the TRK sum and the two bounds.
//!
//! States on a grid are normalized with the quadrature weight h, so that
//! h·Σψᵢ² = 1. Separable N-dimensional models are solved along one axis.

pub mod banded;
pub mod grid;
pub mod tridiag;

use rayon::prelude::*;
use serde::Serialize;

pub use grid::{auto_grid, discretize_hamiltonian, Channel, Grid, Grid1D, Hamiltonian, RadialGrid};

use crate::error::{Error, Result};
use crate::models::{characteristic_length_analytic, dipole_gap_analytic, ModelSpec};
use crate::policy::NumericPolicy;
use crate::quad::KahanSum;
use crate::types::{CharacteristicLength, ParticleParams};
use banded::ChannelOperator;
use tridiag::SymTridiagonal;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Lowest eigenpairs of a discretized Hamiltonian.
#[derive(Debug, Clone, Serialize)]
pub struct EigenSolution {
    pub energies: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub coords: Vec<f64>,
    pub spacing: f64,
    pub channel: Channel,
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Quadrature overlap h·Σψᵢψⱼ.
    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        self.spacing * dot(&self.states[i], &self.states[j])
    }

    /// Largest density on the nodes next to the outer walls.
    pub fn boundary_density(&self, i: usize) -> f64 {
        let s = &self.states[i];
        let last = s[s.len() - 1].powi(2);
        match self.channel {
            Channel::Line => last.max(s[0].powi(2)),
            Channel::Radial { .. } => last,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).collect::<KahanSum>().value()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Eigenvalue k and its unit (l2) eigenvector.
fn eigenpair(t: &SymTridiagonal, k: usize) -> Result<(f64, Vec<f64>)> {
    let e = t.eigenvalue(k)?;
    Ok((e, t.eigenvector(e)))
}

/// The `k` lowest eigenpairs of `op`.
pub fn eigensolve(op: &Hamiltonian, k: usize) -> Result<EigenSolution> {
    if k == 0 || k > op.len() {
        return Err(Error::domain(format!(
            "requested {k} eigenpairs from a grid with {} unknowns",
            op.len()
        )));
    }
    let t = op.tridiagonal();
    let energies = t.smallest(k)?;
    let scale = op.spacing.sqrt().recip();
    let states = energies
        .par_iter()
        .map(|&e| t.eigenvector(e).into_iter().map(|v| v * scale).collect())
        .collect();
    Ok(EigenSolution {
        energies,
        states,
        coords: op.coords.clone(),
        spacing: op.spacing,
        channel: op.channel,
    })
}

/// Per-axis numeric L of state `state`; radial solutions give ⟨r²⟩/3 on
/// each of three axes.
pub fn variance_numeric(sol: &EigenSolution, state: usize) -> Result<CharacteristicLength> {
    let psi = sol
        .states
        .get(state)
        .ok_or_else(|| Error::domain(format!("state {state} not in the solution")))?;
    let h = sol.spacing;
    match sol.channel {
        Channel::Line => {
            let var = line_variance(&sol.coords, psi, h);
            CharacteristicLength::new(vec![var.sqrt()])
        }
        Channel::Radial { .. } => {
            let var = radial_variance(&sol.coords, psi, h);
            CharacteristicLength::isotropic(var.sqrt(), 3)
        }
    }
}

fn line_variance(x: &[f64], psi: &[f64], weight: f64) -> f64 {
    let c = 0.5 * (x[0] + x[x.len() - 1]);
    let mut m1 = KahanSum::new();
    let mut m2 = KahanSum::new();
    for (xi, p) in x.iter().zip(psi) {
        let d = xi - c;
        m1.add(weight * d * p * p);
        m2.add(weight * d * d * p * p);
    }
    m2.value() - m1.value().powi(2)
}

fn radial_variance(r: &[f64], u: &[f64], weight: f64) -> f64 {
    r.iter()
        .zip(u)
        .map(|(r, u)| weight * r * r * u * u)
        .collect::<KahanSum>()
        .value()
        / 3.0
}

// ---------------------------------------------------------------------------
// Dipole transitions

/// One dipole transition out of the reference state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Excitation {
    /// E_m − E_n.
    pub energy: f64,
    /// Per-axis dipole matrix element ⟨ψ_n|x|ψ_m⟩.
    pub dipole: f64,
}

/// Dipole transitions out of one reference state, in ascending order of the
/// final-state energy.
#[derive(Debug, Clone, Serialize)]
pub struct Transitions {
    pub energy: f64,
    /// Per-axis variance of the reference state.
    pub variance: f64,
    /// ħ²/(2μ).
    pub kinetic: f64,
    pub excitations: Vec<Excitation>,
    /// Every final state available on the grid is included.
    pub complete: bool,
}

impl Transitions {
    /// Transitions within a one-dimensional solution.
    pub fn from_solution(sol: &EigenSolution, state: usize, particle: &ParticleParams) -> Result<Self> {
        if sol.channel != Channel::Line {
            return Err(Error::domain(
                "radial solutions couple to the l = 1 channel; use Transitions::radial",
            ));
        }
        if state >= sol.len() {
            return Err(Error::domain(format!("state {state} not in the solution")));
        }
        let h = sol.spacing;
        let c = 0.5 * (sol.coords[0] + sol.coords[sol.coords.len() - 1]);
        let weighted: Vec<f64> = sol
            .coords
            .iter()
            .zip(&sol.states[state])
            .map(|(x, p)| h * (x - c) * p)
            .collect();
        let excitations = (0..sol.len())
            .filter(|&m| m != state)
            .map(|m| Excitation {
                energy: sol.energies[m] - sol.energies[state],
                dipole: dot(&weighted, &sol.states[m]),
            })
            .collect();
        Ok(Self {
            energy: sol.energies[state],
            variance: line_variance(&sol.coords, &sol.states[state], h),
            kinetic: particle.kinetic_coefficient(),
            excitations,
            complete: sol.len() == sol.coords.len(),
        })
    }

    /// Transitions from the lowest state of an l = 0 solution into the
    /// states of an l = 1 solution on the same grid.
    pub fn radial(s_wave: &EigenSolution, p_wave: &EigenSolution, particle: &ParticleParams) -> Result<Self> {
        if s_wave.channel != (Channel::Radial { l: 0 }) || p_wave.channel != (Channel::Radial { l: 1 }) {
            return Err(Error::domain("radial transitions need an l = 0 and an l = 1 solution"));
        }
        if s_wave.coords.len() != p_wave.coords.len() || s_wave.spacing != p_wave.spacing {
            return Err(Error::domain("radial solutions live on different grids"));
        }
        let h = s_wave.spacing;
        let weighted: Vec<f64> = s_wave
            .coords
            .iter()
            .zip(&s_wave.states[0])
            .map(|(r, u)| h * r * u / SQRT3)
            .collect();
        let excitations = (0..p_wave.len())
            .map(|m| Excitation {
                energy: p_wave.energies[m] - s_wave.energies[0],
                dipole: dot(&weighted, &p_wave.states[m]),
            })
            .collect();
        Ok(Self {
            energy: s_wave.energies[0],
            variance: radial_variance(&s_wave.coords, &s_wave.states[0], h),
            kinetic: particle.kinetic_coefficient(),
            excitations,
            complete: p_wave.len() == p_wave.coords.len(),
        })
    }

    /// Transitions of the model's selected state on `grid`, computed one
    /// eigenpair at a time without storing the states. `count` limits the
    /// number of final states; `None` takes all of them.
    pub fn on_grid(spec: &ModelSpec, grid: &Grid, count: Option<usize>) -> Result<Self> {
        let kinetic = spec.particle.kinetic_coefficient();
        match grid {
            Grid::Line(_) => {
                let ham = discretize_hamiltonian(spec, grid)?;
                let t = ham.tridiagonal();
                let k = state_offset(spec)?;
                let n = ham.len();
                let total = count.map_or(n, |c| (c + 1).min(n)).max(k + 1);
                if k >= n {
                    return Err(Error::domain(format!("state {k} beyond the {n} grid states")));
                }
                let energies = t.smallest(total)?;
                let e0 = energies[k];
                let psi = t.eigenvector(e0);
                let c = 0.5 * (ham.walls.0 + ham.walls.1);
                let weighted: Vec<f64> = ham.coords.iter().zip(&psi).map(|(x, p)| (x - c) * p).collect();
                let excitations = (0..total)
                    .into_par_iter()
                    .filter(|&m| m != k)
                    .map(|m| Excitation {
                        energy: energies[m] - e0,
                        dipole: dot(&weighted, &t.eigenvector(energies[m])),
                    })
                    .collect();
                Ok(Self {
                    energy: e0,
                    variance: line_variance(&ham.coords, &psi, 1.0),
                    kinetic,
                    excitations,
                    complete: total == n,
                })
            }
            Grid::Radial(g) => {
                let h0 = discretize_hamiltonian(spec, &Grid::Radial(g.with_channel(0)))?;
                let h1 = discretize_hamiltonian(spec, &Grid::Radial(g.with_channel(1)))?;
                let (t0, t1) = (h0.tridiagonal(), h1.tridiagonal());
                let n = h1.len();
                let total = count.map_or(n, |c| c.min(n));
                let (e0, u0) = eigenpair(&t0, 0)?;
                let weighted: Vec<f64> = h0.coords.iter().zip(&u0).map(|(r, u)| r * u / SQRT3).collect();
                let energies = t1.smallest(total)?;
                let excitations = energies
                    .par_iter()
                    .map(|&e| Excitation {
                        energy: e - e0,
                        dipole: dot(&weighted, &t1.eigenvector(e)),
                    })
                    .collect();
                Ok(Self {
                    energy: e0,
                    variance: radial_variance(&h0.coords, &u0, 1.0),
                    kinetic,
                    excitations,
                    complete: total == n,
                })
            }
        }
    }

    /// Lowest excitation with a non-vanishing dipole.
    pub fn first_allowed(&self) -> Option<&Excitation> {
        let floor = 1e-10 * self.variance;
        self.excitations
            .iter()
            .find(|x| x.energy > 0.0 && x.dipole * x.dipole > floor)
    }
}

/// Index of the model's selected state among the grid eigenstates.
fn state_offset(spec: &ModelSpec) -> Result<usize> {
    let state = spec.state_descriptor();
    spec.check_state(&state)?;
    Ok((state.n - spec.ground_index()) as usize)
}

/// Truncated sum over states with a bound on the omitted remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumOverStates {
    pub alpha: f64,
    /// Upper bound on the omitted terms, from the leftover variance and the
    /// leftover TRK strength.
    pub tail_bound: f64,
    pub terms: usize,
}

/// 2q²·Σ_{m ≤ n_max} |x_mn|²/(E_m − E_n) over the first `n_max` transitions.
pub fn alpha_sum_over_states(tr: &Transitions, charge: f64, n_max: usize) -> Result<SumOverStates> {
    if n_max > tr.excitations.len() {
        return Err(Error::domain(format!(
            "{n_max} terms requested, {} transitions available",
            tr.excitations.len()
        )));
    }
    let scale = tr.excitations.iter().fold(0.0_f64, |m, x| m.max(x.energy.abs()));
    let mut alpha = KahanSum::new();
    let mut strength = KahanSum::new();
    let mut weight = KahanSum::new();
    for x in &tr.excitations[..n_max] {
        let d2 = x.dipole * x.dipole;
        if x.energy.abs() <= 1e-12 * scale && d2 > 1e-10 * tr.variance {
            return Err(Error::Degenerate(format!(
                "dipole-coupled state degenerate with the reference state (gap {:e})",
                x.energy
            )));
        }
        if d2 == 0.0 {
            continue;
        }
        alpha.add(d2 / x.energy);
        strength.add(d2);
        weight.add(x.energy * d2);
    }
    let rest = &tr.excitations[n_max..];
    let tail_bound = if rest.is_empty() && tr.complete {
        0.0
    } else if rest.iter().any(|x| x.energy <= 0.0) {
        f64::INFINITY
    } else {
        let next = rest
            .first()
            .map_or_else(|| tr.excitations.last().map_or(0.0, |x| x.energy), |x| x.energy);
        if next > 0.0 {
            let s_var = (tr.variance - strength.value()).max(0.0);
            let r_trk = (1.0 - weight.value() / tr.kinetic).max(0.0);
            (s_var / next).min(tr.kinetic * r_trk / (next * next))
        } else {
            f64::INFINITY
        }
    };
    let q2 = 2.0 * charge * charge;
    Ok(SumOverStates {
        alpha: q2 * alpha.value(),
        tail_bound: q2 * tail_bound,
        terms: n_max,
    })
}

/// TRK partial sums (2μ/ħ²)·Σ (E_m − E_n)|x_mn|².
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrkSum {
    pub total: f64,
    pub partial_sums: Vec<f64>,
}

pub fn trk_check(tr: &Transitions, n_max: Option<usize>) -> TrkSum {
    let n = n_max.unwrap_or(tr.excitations.len()).min(tr.excitations.len());
    let mut acc = KahanSum::new();
    let partial_sums: Vec<f64> = tr.excitations[..n]
        .iter()
        .map(|x| {
            acc.add(x.energy * x.dipole * x.dipole / tr.kinetic);
            acc.value()
        })
        .collect();
    TrkSum {
        total: acc.value(),
        partial_sums,
    }
}

/// α^U = 2q²L²/ΔE for a given variance L² and gap ΔE.
pub fn unsold_bound(variance: f64, gap: f64, charge: f64) -> Result<f64> {
    if !(gap > 0.0) {
        return Err(Error::Degenerate(format!("non-positive excitation gap {gap}")));
    }
    Ok(2.0 * charge * charge * variance / gap)
}

/// Unsöld estimate with the grid's first dipole-allowed gap.
pub fn unsold_alpha(tr: &Transitions, charge: f64) -> Result<f64> {
    let gap = tr
        .first_allowed()
        .ok_or_else(|| Error::Degenerate("no dipole-allowed excitation above the reference state".into()))?
        .energy;
    if gap <= 1e-12 * tr.energy.abs().max(tr.kinetic / tr.variance) {
        return Err(Error::Degenerate(format!("first dipole-allowed gap {gap:e} vanishes")));
    }
    unsold_bound(tr.variance, gap, charge)
}

/// α^K = 4μq²L⁴/ħ², averaged over axes.
pub fn kirkwood_alpha(particle: &ParticleParams, length: &CharacteristicLength) -> f64 {
    let n = length.axes.len() as f64;
    particle.law_prefactor() * length.axes.iter().map(|l| l.powi(4)).sum::<f64>() / n
}

// ---------------------------------------------------------------------------
// Dalgarno–Lewis

/// Linear-response solution for one state on one grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearResponse {
    pub alpha: f64,
    pub energy: f64,
    /// Per-axis variance of the state.
    pub variance: f64,
    /// Normwise backward error of the linear solve.
    pub residual: f64,
    /// Density at the nodes next to the outer walls (0 for hard-wall models).
    pub boundary_density: f64,
}

/// α = 2q²⟨ψ|(x − ⟨x⟩)|f⟩ with (H − E)f = (x − ⟨x⟩)ψ solved in the
/// complement of ψ. Central potentials solve in the l = 1 channel with
/// source r·u₀ and pick up the angular factor 1/3.
pub fn alpha_dalgarno_lewis(spec: &ModelSpec, grid: &Grid) -> Result<LinearResponse> {
    let q2 = spec.particle.charge.powi(2);
    let confined = spec.is_confined();
    match grid {
        Grid::Line(_) => {
            let ham = discretize_hamiltonian(spec, grid)?;
            let t = ham.tridiagonal();
            let k = state_offset(spec)?;
            if k >= ham.len() {
                return Err(Error::domain(format!("state {k} beyond the grid states")));
            }
            let (_, psi) = eigenpair(&t, k)?;
            let energy = ham.as_channel_operator().energy(&psi);
            let c = 0.5 * (ham.walls.0 + ham.walls.1);
            let d: Vec<f64> = ham.coords.iter().map(|x| x - c).collect();
            let mean = d.iter().zip(&psi).map(|(d, p)| d * p * p).collect::<KahanSum>().value();
            let mut src: Vec<f64> = d.iter().zip(&psi).map(|(d, p)| (d - mean) * p).collect();
            deflate(&mut src, &psi);
            let mut f = solve_near_singular(&t, energy, &src)?;
            deflate(&mut f, &psi);
            let residual = backward_error(&t, energy, &f, &src, Some(&psi));
            let variance = d.iter().zip(&psi).map(|(d, p)| d * d * p * p).sum::<f64>() - mean * mean;
            Ok(LinearResponse {
                alpha: 2.0 * q2 * dot(&src, &f),
                energy,
                variance,
                residual,
                boundary_density: if confined {
                    0.0
                } else {
                    edge_density(&psi, ham.spacing, true)
                },
            })
        }
        Grid::Radial(g) => {
            if !spec.is_ground() {
                return Err(Error::NotImplemented("excited states of central potentials".into()));
            }
            let h0 = discretize_hamiltonian(spec, &Grid::Radial(g.with_channel(0)))?;
            let h1 = discretize_hamiltonian(spec, &Grid::Radial(g.with_channel(1)))?;
            let (t0, t1) = (h0.tridiagonal(), h1.tridiagonal());
            let (_, u0) = eigenpair(&t0, 0)?;
            let energy = h0.as_channel_operator().energy(&u0);
            let src: Vec<f64> = h0.coords.iter().zip(&u0).map(|(r, u)| r * u).collect();
            let f = t1.solve_shifted(energy, &src)?;
            let residual = backward_error(&t1, energy, &f, &src, None);
            Ok(LinearResponse {
                alpha: 2.0 * q2 * dot(&src, &f) / 3.0,
                energy,
                variance: radial_variance(&h0.coords, &u0, 1.0),
                residual,
                boundary_density: if confined {
                    0.0
                } else {
                    edge_density(&u0, h0.spacing, false)
                },
            })
        }
    }
}

/// Remove the component of `v` along the unit vector `u`.
fn deflate(v: &mut [f64], u: &[f64]) {
    let c = dot(v, u);
    v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
}

/// Solve (T − e)x = b where e sits on an eigenvalue and b is orthogonal to
/// its eigenvector; an exactly zero pivot is avoided by nudging the shift.
fn solve_near_singular(t: &SymTridiagonal, e: f64, b: &[f64]) -> Result<Vec<f64>> {
    match t.solve_shifted(e, b) {
        Err(Error::Degenerate(_)) => {
            let (lo, hi) = t.gershgorin();
            let nudge = 16.0 * f64::EPSILON * lo.abs().max(hi.abs());
            t.solve_shifted(e + nudge, b)
        }
        other => other,
    }
}

fn backward_error(t: &SymTridiagonal, e: f64, x: &[f64], b: &[f64], deflated: Option<&[f64]>) -> f64 {
    let mut r: Vec<f64> = t
        .mul(x)
        .iter()
        .zip(x)
        .zip(b)
        .map(|((tx, x), b)| tx - e * x - b)
        .collect();
    if let Some(u) = deflated {
        deflate(&mut r, u);
    }
    let (lo, hi) = t.gershgorin();
    let scale = (lo.abs().max(hi.abs()) + e.abs()) * norm(x) + norm(b);
    norm(&r) / scale
}

/// Density h⁻¹ψ² of a unit vector at the outermost interior node(s).
fn edge_density(psi: &[f64], h: f64, both_ends: bool) -> f64 {
    let last = psi[psi.len() - 1].powi(2);
    let first = if both_ends { psi[0].powi(2) } else { 0.0 };
    last.max(first) / h
}

// ---------------------------------------------------------------------------
// Finite field

/// Curvature of the ground-state energy in a uniform field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldResponse {
    pub alpha: f64,
    /// Field amplitude actually used (after any halving).
    pub field: f64,
    /// Three-point estimate at `field`.
    pub alpha_full_step: f64,
    /// Three-point estimate at `field`/2, when Richardson is applied.
    pub alpha_half_step: Option<f64>,
    pub halvings: u32,
}

const MAX_FIELD_HALVINGS: u32 = 8;

/// α = −[E(ℰ) − 2E(0) + E(−ℰ)]/ℰ² for the ground state, with the potential
/// term −qℰx (one channel) or the l = 0/l = 1 coupling −qℰr/√3 (radial).
/// With `richardson` the estimates at ℰ and ℰ/2 are combined to cancel the
/// ℰ² error. The field is halved when it pulls the state against the domain
/// edge; after repeated halvings this becomes an unstable-field error.
pub fn alpha_finite_field(spec: &ModelSpec, grid: &Grid, field: f64, richardson: bool) -> Result<FieldResponse> {
    if !(field > 0.0 && field.is_finite()) {
        return Err(Error::domain(format!("field amplitude must be positive, got {field}")));
    }
    if !spec.is_ground() {
        return Err(Error::NotImplemented("finite-field response of excited states".into()));
    }
    let setup = FieldSetup::new(spec, grid)?;
    let mut field = field;
    let mut last_detail = String::new();
    for halvings in 0..=MAX_FIELD_HALVINGS {
        match setup.curvature(field).and_then(|full| {
            if richardson {
                let half = setup.curvature(0.5 * field)?;
                Ok((full, Some(half)))
            } else {
                Ok((full, None))
            }
        }) {
            Ok((full, half)) => {
                let alpha = half.map_or(full, |h| (4.0 * h - full) / 3.0);
                return Ok(FieldResponse {
                    alpha,
                    field,
                    alpha_full_step: full,
                    alpha_half_step: half,
                    halvings,
                });
            }
            Err(Error::UnstableField { detail, .. }) => {
                last_detail = detail;
                field *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::UnstableField {
        field,
        detail: format!("state still ionized after {MAX_FIELD_HALVINGS} halvings: {last_detail}"),
    })
}

struct FieldSetup {
    base: ChannelOperator,
    /// Dipole coordinate per node: x − centre, or r/√3 for the coupling.
    dipole: Vec<f64>,
    radial: bool,
    charge: f64,
    guess: Vec<f64>,
    energy: f64,
    gap: f64,
    variance: f64,
    edge_probability: f64,
    check_ionization: bool,
}

impl FieldSetup {
    fn new(spec: &ModelSpec, grid: &Grid) -> Result<Self> {
        let charge = spec.particle.charge;
        let (base, dipole, radial, guess, lambda, gap) = match grid {
            Grid::Line(_) => {
                let ham = discretize_hamiltonian(spec, grid)?;
                let t = ham.tridiagonal();
                let (e0, psi) = eigenpair(&t, 0)?;
                let gap = t.eigenvalue_from(1, Some(e0))? - e0;
                let c = 0.5 * (ham.walls.0 + ham.walls.1);
                let dipole = ham.coords.iter().map(|x| x - c).collect();
                (ham.as_channel_operator(), dipole, false, psi, e0, gap)
            }
            Grid::Radial(g) => {
                let h0 = discretize_hamiltonian(spec, &Grid::Radial(g.with_channel(0)))?;
                let h1 = discretize_hamiltonian(spec, &Grid::Radial(g.with_channel(1)))?;
                let (t0, t1) = (h0.tridiagonal(), h1.tridiagonal());
                let (e0, u0) = eigenpair(&t0, 0)?;
                let gap = t0.eigenvalue_from(1, Some(e0))?.min(t1.eigenvalue(0)?) - e0;
                let op = ChannelOperator {
                    kinetic: h0.kinetic,
                    potentials: vec![h0.potential.clone(), h1.potential.clone()],
                    coupling: Some(vec![0.0; h0.len()]),
                };
                let guess = u0.iter().flat_map(|u| [*u, 0.0]).collect();
                let dipole = h0.coords.iter().map(|r| r / SQRT3).collect();
                (op, dipole, true, guess, e0, gap)
            }
        };
        if !(gap > 0.0) {
            return Err(Error::Degenerate(format!("ground state gap {gap:e} on the grid")));
        }
        let mut setup = Self {
            base,
            dipole,
            radial,
            charge,
            guess,
            energy: lambda,
            gap,
            variance: 0.0,
            edge_probability: 0.0,
            check_ionization: !spec.is_confined(),
        };
        let (e, v) = setup.lowest(&setup.base, lambda, 0.0)?;
        setup.energy = e;
        setup.edge_probability = setup.edge_probability_of(&v);
        setup.variance = if radial {
            v.chunks(2).zip(&setup.dipole).map(|(u, d)| d * d * u[0] * u[0]).sum()
        } else {
            let m1: f64 = v.iter().zip(&setup.dipole).map(|(p, d)| d * p * p).sum();
            v.iter().zip(&setup.dipole).map(|(p, d)| d * d * p * p).sum::<f64>() - m1 * m1
        };
        setup.guess = v;
        Ok(setup)
    }

    fn perturbed(&self, field: f64) -> ChannelOperator {
        let mut op = self.base.clone();
        let w = self.dipole.iter().map(|d| -self.charge * field * d);
        if self.radial {
            op.coupling = Some(w.collect());
        } else {
            op.potentials[0].iter_mut().zip(w).for_each(|(v, w)| *v += w);
        }
        op
    }

    /// Lowest state of `op`, with the inverse-iteration shift placed below
    /// the expected (field-lowered) energy.
    fn lowest(&self, op: &ChannelOperator, reference: f64, field: f64) -> Result<(f64, Vec<f64>)> {
        let lowering = 2.0 * (self.charge * field).powi(2) * self.variance / self.gap;
        let mut delta = 0.05 * self.gap + lowering;
        for _ in 0..40 {
            match op.lowest_state(reference - delta, self.guess.clone()) {
                Err(Error::Domain(_)) => delta *= 2.0,
                other => return other,
            }
        }
        Err(Error::NoConvergence {
            iterations: 40,
            detail: "no shift below the spectrum found for the field-perturbed operator".into(),
        })
    }

    fn edge_probability_of(&self, v: &[f64]) -> f64 {
        let stride = if self.radial { 2 } else { 1 };
        let nodes = v.len() / stride;
        let zone = (nodes / 10).max(1);
        let weight = |i: usize| (0..stride).map(|c| v[i * stride + c].powi(2)).sum::<f64>();
        let outer: f64 = (nodes - zone..nodes).map(weight).sum();
        if self.radial {
            outer
        } else {
            outer + (0..zone).map(weight).sum::<f64>()
        }
    }

    fn energy_at(&self, field: f64) -> Result<f64> {
        let op = self.perturbed(field);
        let (e, v) = self.lowest(&op, self.energy, field)?;
        if self.check_ionization {
            let p = self.edge_probability_of(&v);
            if p > (1e3 * self.edge_probability).max(1e-10) || e < self.energy - 0.5 * self.gap {
                return Err(Error::UnstableField {
                    field,
                    detail: format!("edge probability {p:e}, energy shift {:e}", e - self.energy),
                });
            }
        }
        Ok(e)
    }

    fn curvature(&self, field: f64) -> Result<f64> {
        let plus = self.energy_at(field)?;
        let minus = self.energy_at(-field)?;
        let second = (plus - self.energy) + (minus - self.energy);
        Ok(-second / (field * field))
    }
}

// ---------------------------------------------------------------------------
// Policy-level estimates

/// A quantity on the base grid, on the grid refined by three, and the
/// Richardson combination (9·fine − coarse)/8.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolated {
    pub value: f64,
    pub coarse: f64,
    pub refined: Option<f64>,
}

impl Extrapolated {
    fn new(coarse: f64, refined: Option<f64>) -> Self {
        let value = refined.map_or(coarse, |f| (9.0 * f - coarse) / 8.0);
        Self { value, coarse, refined }
    }
}

/// Result of an oracle run under a numeric policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub alpha: Extrapolated,
    /// Per-axis variance, where the oracle provides one.
    pub variance: Option<Extrapolated>,
    pub points: usize,
    pub warnings: Vec<String>,
}

fn refined_grid(grid: &Grid, policy: &NumericPolicy) -> Option<Grid> {
    let fine = grid.refined(3);
    (policy.richardson_grid && fine.points() <= policy.max_points).then_some(fine)
}

fn check_boundary(warnings: &mut Vec<String>, density: f64, policy: &NumericPolicy) {
    if density > policy.boundary_density_tol {
        warnings.push(format!(
            "boundary density {density:.3e} exceeds {:.1e}: domain may be too small",
            policy.boundary_density_tol
        ));
    }
}

/// Dalgarno–Lewis α and variance with grid extrapolation.
pub fn dalgarno_lewis_estimate(spec: &ModelSpec, policy: &NumericPolicy) -> Result<Estimate> {
    policy.validate()?;
    let grid = auto_grid(spec, policy, policy.grid_points)?;
    let coarse = alpha_dalgarno_lewis(spec, &grid)?;
    let fine = refined_grid(&grid, policy)
        .map(|g| alpha_dalgarno_lewis(spec, &g))
        .transpose()?;
    let mut warnings = Vec::new();
    for r in std::iter::once(&coarse).chain(fine.as_ref()) {
        if r.residual > policy.residual_tol {
            warnings.push(format!("linear-response residual {:.3e} above tolerance", r.residual));
        }
    }
    check_boundary(&mut warnings, coarse.boundary_density, policy);
    if policy.richardson_grid && fine.is_none() {
        warnings.push("grid refinement skipped: max_points reached".into());
    }
    Ok(Estimate {
        alpha: Extrapolated::new(coarse.alpha, fine.map(|r| r.alpha)),
        variance: Some(Extrapolated::new(coarse.variance, fine.map(|r| r.variance))),
        points: grid.points(),
        warnings,
    })
}

/// Field amplitude for a model: `policy.field` times the natural field
/// ΔE/(|q|L), at which the field energy across L equals the dipole gap.
pub fn field_for(spec: &ModelSpec, policy: &NumericPolicy) -> Result<f64> {
    let gap = dipole_gap_analytic(spec)?;
    let length = characteristic_length_analytic(spec, &spec.state_descriptor())?.scalar();
    Ok(policy.field * gap / (spec.particle.charge.abs() * length))
}

/// Finite-field α with field and grid extrapolation.
pub fn finite_field_estimate(spec: &ModelSpec, policy: &NumericPolicy) -> Result<Estimate> {
    policy.validate()?;
    let field = field_for(spec, policy)?;
    let grid = auto_grid(spec, policy, policy.grid_points)?;
    let coarse = alpha_finite_field(spec, &grid, field, policy.richardson_field)?;
    let fine = refined_grid(&grid, policy)
        .map(|g| alpha_finite_field(spec, &g, field, policy.richardson_field))
        .transpose()?;
    let mut warnings = Vec::new();
    for r in std::iter::once(&coarse).chain(fine.as_ref()) {
        if r.halvings > 0 {
            warnings.push(format!("field halved {} times to {:.3e}", r.halvings, r.field));
        }
    }
    Ok(Estimate {
        alpha: Extrapolated::new(coarse.alpha, fine.map(|r| r.alpha)),
        variance: None,
        points: grid.points(),
        warnings,
    })
}

/// TRK sum over the lowest `terms` transitions, with grid extrapolation.
/// Only sensible when those transitions already exhaust the sum rule, as
/// for the oscillator.
pub fn trk_estimate(spec: &ModelSpec, policy: &NumericPolicy, terms: usize) -> Result<Extrapolated> {
    policy.validate()?;
    let grid = auto_grid(spec, policy, policy.grid_points)?;
    let sum = |g: &Grid| -> Result<f64> {
        let tr = Transitions::on_grid(spec, g, Some(terms))?;
        Ok(trk_check(&tr, Some(terms)).total)
    };
    let coarse = sum(&grid)?;
    let fine = refined_grid(&grid, policy).map(|g| sum(&g)).transpose()?;
    Ok(Extrapolated::new(coarse, fine))
}

/// Spectral quantities from the full set of grid states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub grid: Grid,
    pub sum_over_states: SumOverStates,
    /// Linear-response α on the same grid, the reference for the sum.
    pub alpha_same_grid: Option<f64>,
    pub trk: f64,
    pub transitions: usize,
    /// Unsöld estimate with the grid's first dipole-allowed gap.
    pub unsold_grid: Option<f64>,
    pub warnings: Vec<String>,
}

/// Grid for full-spectrum work: about `spectrum_points` nodes. A narrow
/// square well in a wide domain is then resolved by fewer cells.
pub fn spectral_grid(spec: &ModelSpec, policy: &NumericPolicy) -> Result<Grid> {
    let cap = policy.spectrum_points + policy.spectrum_points / 2;
    let mut local = policy.clone();
    loop {
        let grid = auto_grid(spec, &local, policy.spectrum_points)?;
        if grid.points() <= cap || local.min_cells_per_well <= 1 {
            return Ok(grid);
        }
        local.min_cells_per_well /= 2;
    }
}

pub fn spectral_summary(spec: &ModelSpec, policy: &NumericPolicy) -> Result<SpectralSummary> {
    policy.validate()?;
    let grid = spectral_grid(spec, policy)?;
    let tr = Transitions::on_grid(spec, &grid, None)?;
    let sos = alpha_sum_over_states(&tr, spec.particle.charge, tr.excitations.len())?;
    let trk = trk_check(&tr, None).total;
    let mut warnings = Vec::new();
    if (trk - 1.0).abs() > 1e-3 {
        warnings.push(format!("TRK sum {trk:.6} on the spectral grid"));
    }
    let alpha_same_grid = match alpha_dalgarno_lewis(spec, &grid) {
        Ok(lr) => Some(lr.alpha),
        Err(e) => {
            warnings.push(format!("no same-grid linear response: {e}"));
            None
        }
    };
    let unsold_grid = if spec.is_ground() {
        unsold_alpha(&tr, spec.particle.charge).ok()
    } else {
        None
    };
    Ok(SpectralSummary {
        grid,
        sum_over_states: sos,
        alpha_same_grid,
        trk,
        transitions: tr.excitations.len(),
        unsold_grid,
        warnings,
    })
}

/// Numeric per-axis L of the model's state, extrapolated over the grid.
pub fn length_estimate(spec: &ModelSpec, policy: &NumericPolicy) -> Result<CharacteristicLength> {
    let est = dalgarno_lewis_estimate(spec, policy)?;
    let var = est.variance.map_or(est.alpha.coarse, |v| v.value);
    CharacteristicLength::isotropic(var.sqrt(), spec.spatial_dim())
}
