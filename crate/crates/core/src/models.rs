//! Analytic model systems: densities, characteristic lengths, spectra and
//! closed-form polarizabilities.
//!
//! Conventions:
//! - `Piab` is a hypercube [0, A]^N with hard walls; the state index n ≥ 1
//!   is applied along every axis, so the ground state is n = 1.
//! - `Qdo` is the isotropic oscillator V = ½μω²r²; index n ≥ 0 on every axis.
//! - `DeltaWell` is parametrized by the decay constant κ of its single bound
//!   state e^{−κ|x|}. The potential strength g of V = −g·δ(x) follows as
//!   g = ħ²κ/μ.
//! - `SquareWell` has depth V₀ on |x| < A and zero outside (A is the
//!   half-width).
//! - `SphericalBox` is a hard sphere of radius R.
//! - `Hydrogen` is V = −Z·q²/r, with Bohr radius a = ħ²/(μZq²).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::types::{CharacteristicLength, ParticleParams};

/// The potential family and its length/strength parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    Piab { dim: usize, width: f64 },
    SphericalBox { radius: f64 },
    DeltaWell { kappa: f64 },
    SquareWell { half_width: f64, depth: f64 },
    Qdo { dim: usize, omega: f64 },
    Hydrogen { z: f64 },
}

/// One model system, the particle it binds and the state of interest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDoc", into = "ModelDoc")]
pub struct ModelSpec {
    pub potential: Potential,
    pub particle: ParticleParams,
    /// State index; `None` selects the ground state.
    pub state: Option<u32>,
}

/// Quantum numbers of a bound state. One-dimensional and separable models
/// only use `n`; central potentials use (n, l, m).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDescriptor {
    pub n: u32,
    pub l: u32,
    pub m: i32,
}

impl StateDescriptor {
    pub fn index(n: u32) -> Self {
        Self { n, l: 0, m: 0 }
    }
}

/// Bound-state energies in ascending order. Degenerate levels appear once.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    /// Fewer bound levels exist than were requested.
    pub truncated: bool,
}

/// Depth V₀ = 100ħ²/(2μA²) of the reference square well of half-width A.
pub fn reference_square_well_depth(half_width: f64, particle: &ParticleParams) -> f64 {
    100.0 * particle.kinetic_coefficient() / (half_width * half_width)
}

impl ModelSpec {
    fn with(potential: Potential) -> Self {
        Self {
            potential,
            particle: ParticleParams::default(),
            state: None,
        }
    }

    pub fn piab(dim: usize, width: f64) -> Self {
        Self::with(Potential::Piab { dim, width })
    }

    pub fn spherical_box(radius: f64) -> Self {
        Self::with(Potential::SphericalBox { radius })
    }

    pub fn delta_well(kappa: f64) -> Self {
        Self::with(Potential::DeltaWell { kappa })
    }

    pub fn square_well(half_width: f64, depth: f64) -> Self {
        Self::with(Potential::SquareWell { half_width, depth })
    }

    /// Square well whose depth is `scale` times the reference depth.
    pub fn square_well_scaled(half_width: f64, scale: f64) -> Self {
        let depth = scale * reference_square_well_depth(half_width, &ParticleParams::default());
        Self::square_well(half_width, depth)
    }

    pub fn qdo(dim: usize, omega: f64) -> Self {
        Self::with(Potential::Qdo { dim, omega })
    }

    pub fn hydrogen(z: f64) -> Self {
        Self::with(Potential::Hydrogen { z })
    }

    pub fn with_particle(mut self, particle: ParticleParams) -> Self {
        self.particle = particle;
        self
    }

    pub fn with_state(mut self, n: u32) -> Self {
        self.state = Some(n);
        self
    }

    pub fn family(&self) -> &'static str {
        match self.potential {
            Potential::Piab { .. } => "piab",
            Potential::SphericalBox { .. } => "spherical_box",
            Potential::DeltaWell { .. } => "delta_well",
            Potential::SquareWell { .. } => "square_well",
            Potential::Qdo { .. } => "qdo",
            Potential::Hydrogen { .. } => "hydrogen",
        }
    }

    /// Number of spatial dimensions of the model.
    pub fn spatial_dim(&self) -> usize {
        match self.potential {
            Potential::Piab { dim, .. } | Potential::Qdo { dim, .. } => dim,
            Potential::DeltaWell { .. } | Potential::SquareWell { .. } => 1,
            Potential::SphericalBox { .. } | Potential::Hydrogen { .. } => 3,
        }
    }

    /// Central potentials solved through the radial equation.
    pub fn is_radial(&self) -> bool {
        matches!(
            self.potential,
            Potential::SphericalBox { .. } | Potential::Hydrogen { .. }
        )
    }

    /// Hard-wall models whose domain is fixed by the potential itself.
    pub fn is_confined(&self) -> bool {
        matches!(self.potential, Potential::Piab { .. } | Potential::SphericalBox { .. })
    }

    pub fn ground_index(&self) -> u32 {
        match self.potential {
            Potential::Piab { .. } | Potential::SphericalBox { .. } | Potential::Hydrogen { .. } => 1,
            _ => 0,
        }
    }

    pub fn state_descriptor(&self) -> StateDescriptor {
        let n = self.state.unwrap_or_else(|| self.ground_index());
        StateDescriptor::index(n)
    }

    pub fn is_ground(&self) -> bool {
        self.state_descriptor().n == self.ground_index()
    }

    pub fn validate(&self) -> Result<()> {
        self.particle.validate()?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be positive, got {v}")))
            }
        };
        match self.potential {
            Potential::Piab { dim, width } => {
                positive("box width", width)?;
                if dim == 0 {
                    return Err(Error::domain("dimension must be at least 1"));
                }
            }
            Potential::SphericalBox { radius } => positive("radius", radius)?,
            Potential::DeltaWell { kappa } => positive("kappa", kappa)?,
            Potential::SquareWell { half_width, depth } => {
                positive("well half-width", half_width)?;
                positive("well depth", depth)?;
            }
            Potential::Qdo { dim, omega } => {
                positive("omega", omega)?;
                if dim == 0 {
                    return Err(Error::domain("dimension must be at least 1"));
                }
            }
            Potential::Hydrogen { z } => {
                if !(z >= 1.0 && z.is_finite()) {
                    return Err(Error::domain(format!("nuclear charge must be >= 1, got {z}")));
                }
            }
        }
        self.check_state(&self.state_descriptor())
    }

    pub fn check_state(&self, state: &StateDescriptor) -> Result<()> {
        let ok = match self.potential {
            Potential::Piab { .. } => state.n >= 1,
            Potential::Qdo { .. } => true,
            Potential::DeltaWell { .. } | Potential::SquareWell { .. } => state.n == 0,
            Potential::SphericalBox { .. } | Potential::Hydrogen { .. } => state.n == 1 && state.l == 0 && state.m == 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "state (n={}, l={}, m={}) is not available for {}",
                state.n,
                state.l,
                state.m,
                self.family()
            )))
        }
    }
}

// ---------------------------------------------------------------------------
// JSON document form

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    #[serde(flatten)]
    potential: PotentialDoc,
    #[serde(default)]
    particle: ParticleParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    state: Option<u32>,
}

fn one_dim() -> usize {
    1
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
enum PotentialDoc {
    Piab {
        #[serde(default = "one_dim")]
        dim: usize,
        #[serde(alias = "A")]
        width: f64,
    },
    SphericalBox {
        #[serde(alias = "R")]
        radius: f64,
    },
    DeltaWell {
        kappa: f64,
    },
    SquareWell {
        #[serde(alias = "A")]
        half_width: f64,
        #[serde(default, alias = "V0", skip_serializing_if = "Option::is_none")]
        depth: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depth_scale: Option<f64>,
    },
    Qdo {
        #[serde(default = "one_dim")]
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k0: Option<f64>,
    },
    Hydrogen {
        #[serde(rename = "Z", alias = "z")]
        z: f64,
    },
}

impl TryFrom<ModelDoc> for ModelSpec {
    type Error = Error;

    fn try_from(doc: ModelDoc) -> Result<Self> {
        let p = doc.particle;
        let potential = match doc.potential {
            PotentialDoc::Piab { dim, width } => Potential::Piab { dim, width },
            PotentialDoc::SphericalBox { radius } => Potential::SphericalBox { radius },
            PotentialDoc::DeltaWell { kappa } => Potential::DeltaWell { kappa },
            PotentialDoc::SquareWell {
                half_width,
                depth,
                depth_scale,
            } => {
                let depth = match (depth, depth_scale) {
                    (Some(d), None) => d,
                    (None, Some(s)) => s * reference_square_well_depth(half_width, &p),
                    _ => return Err(Error::domain("square_well needs exactly one of depth, depth_scale")),
                };
                Potential::SquareWell { half_width, depth }
            }
            PotentialDoc::Qdo { dim, omega, k0 } => {
                let omega = match (omega, k0) {
                    (Some(w), None) => w,
                    (None, Some(k)) => (k / p.mass).sqrt(),
                    _ => return Err(Error::domain("qdo needs exactly one of omega, k0")),
                };
                Potential::Qdo { dim, omega }
            }
            PotentialDoc::Hydrogen { z } => Potential::Hydrogen { z },
        };
        let spec = ModelSpec {
            potential,
            particle: p,
            state: doc.state,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<ModelSpec> for ModelDoc {
    fn from(spec: ModelSpec) -> Self {
        let potential = match spec.potential {
            Potential::Piab { dim, width } => PotentialDoc::Piab { dim, width },
            Potential::SphericalBox { radius } => PotentialDoc::SphericalBox { radius },
            Potential::DeltaWell { kappa } => PotentialDoc::DeltaWell { kappa },
            Potential::SquareWell { half_width, depth } => PotentialDoc::SquareWell {
                half_width,
                depth: Some(depth),
                depth_scale: None,
            },
            Potential::Qdo { dim, omega } => PotentialDoc::Qdo {
                dim,
                omega: Some(omega),
                k0: None,
            },
            Potential::Hydrogen { z } => PotentialDoc::Hydrogen { z },
        };
        ModelDoc {
            potential,
            particle: spec.particle,
            state: spec.state,
        }
    }
}

// ---------------------------------------------------------------------------
// Closed-form pieces

/// Normalized Hermite function φₙ(ξ), orthonormal in ξ.
pub(crate) fn hermite_function(n: u32, xi: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    for k in 0..n {
        let k = k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * xi * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Bound state of the finite square well in closed form.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SquareWellState {
    /// Interior wavenumber.
    pub k: f64,
    /// Exterior decay constant.
    pub kappa: f64,
    /// Normalization of cos(kx) inside.
    pub norm: f64,
    pub half_width: f64,
}

impl SquareWellState {
    fn density(&self, x: f64) -> f64 {
        let a = self.half_width;
        let amp = if x.abs() <= a {
            (self.k * x).cos()
        } else {
            (self.k * a).cos() * (-self.kappa * (x.abs() - a)).exp()
        };
        self.norm * self.norm * amp * amp
    }

    fn variance(&self) -> f64 {
        let (a, k, kp) = (self.half_width, self.k, self.kappa);
        let inner = a.powi(3) / 6.0
            + (a * a / (4.0 * k) - 1.0 / (8.0 * k.powi(3))) * (2.0 * k * a).sin()
            + a * (2.0 * k * a).cos() / (4.0 * k * k);
        let outer = a * a / (2.0 * kp) + a / (2.0 * kp * kp) + 1.0 / (4.0 * kp.powi(3));
        self.norm * self.norm * 2.0 * (inner + (k * a).cos().powi(2) * outer)
    }
}

/// All bound even/odd states of a square well, ascending; roots of the
/// transcendental matching conditions bracketed and bisected.
pub(crate) fn square_well_states(half_width: f64, depth: f64, particle: &ParticleParams) -> Vec<(f64, bool)> {
    let a = half_width;
    let z0 = a * (2.0 * particle.mass * depth).sqrt() / particle.hbar;
    let mut roots = Vec::new();
    let mut j = 0u32;
    loop {
        let base = j as f64 * PI;
        if base >= z0 {
            break;
        }
        // even branch on (jπ, jπ + π/2)
        let hi = (base + 0.5 * PI).min(z0);
        if let Some(z) = bisect(|z| z * z.tan() - (z0 * z0 - z * z).max(0.0).sqrt(), base, hi) {
            roots.push((z, true));
        }
        let lo = base + 0.5 * PI;
        if lo < z0 {
            let hi = (base + PI).min(z0);
            if let Some(z) = bisect(|z| -z / z.tan() - (z0 * z0 - z * z).max(0.0).sqrt(), lo, hi) {
                roots.push((z, false));
            }
        }
        j += 1;
    }
    roots
        .into_iter()
        .map(|(z, even)| {
            let e = particle.hbar * particle.hbar * z * z / (2.0 * particle.mass * a * a) - depth;
            (e, even)
        })
        .collect()
}

fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Option<f64> {
    // open interval: nudge off the poles and the branch end points
    let span = hi - lo;
    let (mut a, mut b) = (lo + 1e-15 * span.max(1.0), hi - 1e-15 * span.max(1.0));
    if b <= a {
        return None;
    }
    let (mut fa, fb) = (f(a), f(b));
    if !(fa < 0.0 && fb > 0.0) {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || (b - a) <= 1e-15 * m.abs() {
            break;
        }
        let fm = f(m);
        if fm < 0.0 {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let _ = fa;
    Some(0.5 * (a + b))
}

pub(crate) fn square_well_ground(half_width: f64, depth: f64, particle: &ParticleParams) -> SquareWellState {
    let (energy, _) = square_well_states(half_width, depth, particle)[0];
    let a = half_width;
    let two_m = 2.0 * particle.mass / (particle.hbar * particle.hbar);
    let k = (two_m * (energy + depth)).sqrt();
    let kappa = (-two_m * energy).sqrt();
    let norm = 1.0 / (a + (2.0 * k * a).sin() / (2.0 * k) + (k * a).cos().powi(2) / kappa).sqrt();
    SquareWellState {
        k,
        kappa,
        norm,
        half_width: a,
    }
}

/// Spherical Bessel function jₗ(x) by upward recurrence (stable for x > l).
pub(crate) fn spherical_bessel(l: u32, x: f64) -> f64 {
    let j0 = x.sin() / x;
    if l == 0 {
        return j0;
    }
    let mut prev = j0;
    let mut cur = x.sin() / (x * x) - x.cos() / x;
    for k in 1..l {
        let next = (2 * k + 1) as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// First `count` positive zeros of jₗ.
pub(crate) fn spherical_bessel_zeros(l: u32, count: usize) -> Vec<f64> {
    let mut zeros = Vec::with_capacity(count);
    let step = 0.05;
    let mut x = l as f64 + 1.0;
    let mut fx = spherical_bessel(l, x);
    while zeros.len() < count {
        let x2 = x + step;
        let f2 = spherical_bessel(l, x2);
        if fx == 0.0 {
            zeros.push(x);
        } else if fx * f2 < 0.0 {
            let (mut a, mut b, mut fa) = (x, x2, fx);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = spherical_bessel(l, m);
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            zeros.push(0.5 * (a + b));
        }
        x = x2;
        fx = f2;
    }
    zeros
}

/// Exact polarizability of PIAB state n along one axis, by summing the
/// dipole series with closed-form matrix elements
/// x_nm = −8A·nm / (π²(n² − m²)²) for n + m odd.
pub(crate) fn piab_alpha_series(n: u32, width: f64, particle: &ParticleParams) -> f64 {
    let n = n as f64;
    let mut sum = quad::KahanSum::new();
    let n_odd = (n as u64) % 2 == 1;
    let mut m: u64 = if n_odd { 2 } else { 1 };
    let m_max = n as u64 + 40_000;
    while m <= m_max {
        let mf = m as f64;
        let d = mf * mf - n * n;
        sum.add(n * n * mf * mf / d.powi(5));
        m += 2;
    }
    let pref = 256.0 * particle.mass * particle.charge * particle.charge * width.powi(4)
        / (PI.powi(6) * particle.hbar * particle.hbar);
    pref * sum.value()
}

fn hydrogen_radius(z: f64, p: &ParticleParams) -> f64 {
    p.hbar * p.hbar / (p.mass * z * p.charge * p.charge)
}

// ---------------------------------------------------------------------------
// Operations

/// Probability density |ψ|² at `point` (length = spatial dimension).
/// Points outside a hard-wall domain give 0.
pub fn density(spec: &ModelSpec, state: &StateDescriptor, point: &[f64]) -> Result<f64> {
    spec.validate()?;
    spec.check_state(state)?;
    if point.len() != spec.spatial_dim() {
        return Err(Error::domain(format!(
            "{} is {}-dimensional, got a {}-component point",
            spec.family(),
            spec.spatial_dim(),
            point.len()
        )));
    }
    let p = &spec.particle;
    let r = || point.iter().map(|x| x * x).sum::<f64>().sqrt();
    let value = match spec.potential {
        Potential::Piab { width, .. } => point
            .iter()
            .map(|&x| {
                if (0.0..=width).contains(&x) {
                    2.0 / width * (state.n as f64 * PI * x / width).sin().powi(2)
                } else {
                    0.0
                }
            })
            .product(),
        Potential::Qdo { omega, .. } => {
            let s = (p.mass * omega / p.hbar).sqrt();
            point
                .iter()
                .map(|&x| s * hermite_function(state.n, s * x).powi(2))
                .product()
        }
        Potential::DeltaWell { kappa } => kappa * (-2.0 * kappa * point[0].abs()).exp(),
        Potential::SquareWell { half_width, depth } => square_well_ground(half_width, depth, p).density(point[0]),
        Potential::SphericalBox { radius } => {
            let r = r();
            if r > radius {
                0.0
            } else if r == 0.0 {
                PI / (2.0 * radius.powi(3))
            } else {
                (PI * r / radius).sin().powi(2) / (2.0 * PI * radius * r * r)
            }
        }
        Potential::Hydrogen { z } => {
            let a = hydrogen_radius(z, p);
            (-2.0 * r() / a).exp() / (PI * a.powi(3))
        }
    };
    Ok(value)
}

/// Closed-form per-axis L of a state.
pub fn characteristic_length_analytic(spec: &ModelSpec, state: &StateDescriptor) -> Result<CharacteristicLength> {
    spec.validate()?;
    spec.check_state(state)?;
    let p = &spec.particle;
    let dim = spec.spatial_dim();
    let l2 = match spec.potential {
        Potential::Piab { width, .. } => {
            let n = state.n as f64;
            width * width * (1.0 / 12.0 - 1.0 / (2.0 * PI * PI * n * n))
        }
        Potential::Qdo { omega, .. } => (2 * state.n + 1) as f64 * p.hbar / (2.0 * p.mass * omega),
        Potential::DeltaWell { kappa } => 1.0 / (2.0 * kappa * kappa),
        Potential::SquareWell { half_width, depth } => square_well_ground(half_width, depth, p).variance(),
        Potential::SphericalBox { radius } => radius * radius * (1.0 / 9.0 - 1.0 / (6.0 * PI * PI)),
        Potential::Hydrogen { z } => hydrogen_radius(z, p).powi(2),
    };
    CharacteristicLength::isotropic(l2.sqrt(), dim)
}

/// Closed-form (or exactly summed) per-axis polarizability of a state.
pub fn exact_alpha_analytic(spec: &ModelSpec, state: &StateDescriptor) -> Result<f64> {
    spec.validate()?;
    spec.check_state(state)?;
    let p = &spec.particle;
    let q2 = p.charge * p.charge;
    match spec.potential {
        Potential::Qdo { omega, .. } => Ok(q2 / (p.mass * omega * omega)),
        Potential::Hydrogen { z } => {
            let a = hydrogen_radius(z, p);
            Ok(4.5 * p.mass * q2 * a.powi(4) / (p.hbar * p.hbar))
        }
        Potential::DeltaWell { kappa } => Ok(1.25 * p.mass * q2 / (p.hbar * p.hbar * kappa.powi(4))),
        Potential::Piab { width, .. } => Ok(piab_alpha_series(state.n, width, p)),
        Potential::SquareWell { .. } | Potential::SphericalBox { .. } => {
            Err(Error::NotImplemented(format!("closed-form alpha of {}", spec.family())))
        }
    }
}

/// Lowest `count` distinct bound-state energies.
pub fn spectrum_analytic(spec: &ModelSpec, count: usize) -> Result<Spectrum> {
    spec.validate()?;
    if count == 0 {
        return Err(Error::domain("count must be at least 1"));
    }
    let p = &spec.particle;
    let kin = p.kinetic_coefficient();
    let energies: Vec<f64> = match spec.potential {
        Potential::Piab { dim, width } => {
            let unit = kin * PI * PI / (width * width);
            piab_levels(dim, count).into_iter().map(|s| unit * s as f64).collect()
        }
        Potential::Qdo { dim, omega } => (0..count)
            .map(|k| p.hbar * omega * (k as f64 + 0.5 * dim as f64))
            .collect(),
        Potential::DeltaWell { kappa } => vec![-kin * kappa * kappa],
        Potential::SquareWell { half_width, depth } => square_well_states(half_width, depth, p)
            .into_iter()
            .map(|(e, _)| e)
            .collect(),
        Potential::SphericalBox { radius } => {
            let mut levels: Vec<f64> = (0..count as u32)
                .flat_map(|l| spherical_bessel_zeros(l, count))
                .map(|x| kin * x * x / (radius * radius))
                .collect();
            levels.sort_by(f64::total_cmp);
            levels
        }
        Potential::Hydrogen { z } => {
            let ry = p.mass * z * z * p.charge.powi(4) / (2.0 * p.hbar * p.hbar);
            (1..=count).map(|n| -ry / (n * n) as f64).collect()
        }
    };
    let truncated = energies.len() < count;
    Ok(Spectrum {
        energies: energies.into_iter().take(count).collect(),
        truncated,
    })
}

/// Distinct values of Σ nᵢ² (nᵢ ≥ 1) over `dim` axes, ascending, first `count`.
fn piab_levels(dim: usize, count: usize) -> Vec<u64> {
    fn collect(dim: usize, budget: u64, acc: u64, out: &mut Vec<u64>) {
        if dim == 0 {
            out.push(acc);
            return;
        }
        let mut n = 1u64;
        while acc + n * n + (dim as u64 - 1) <= budget {
            collect(dim - 1, budget, acc + n * n, out);
            n += 1;
        }
    }
    let mut budget = dim as u64 + 3;
    loop {
        let mut out = Vec::new();
        collect(dim, budget, 0, &mut out);
        out.sort_unstable();
        out.dedup();
        if out.len() >= count {
            out.truncate(count);
            return out;
        }
        budget *= 2;
    }
}

/// Energy of the lowest dipole-allowed excitation out of the ground state.
/// For states with a single bound level this is the continuum threshold.
pub fn dipole_gap_analytic(spec: &ModelSpec) -> Result<f64> {
    spec.validate()?;
    if !spec.is_ground() {
        return Err(Error::NotImplemented("dipole gap of an excited state".into()));
    }
    let p = &spec.particle;
    let kin = p.kinetic_coefficient();
    Ok(match spec.potential {
        Potential::Piab { width, .. } => 3.0 * kin * PI * PI / (width * width),
        Potential::Qdo { omega, .. } => p.hbar * omega,
        Potential::DeltaWell { kappa } => kin * kappa * kappa,
        Potential::SquareWell { half_width, depth } => {
            let states = square_well_states(half_width, depth, p);
            match states.get(1) {
                Some((e1, _)) => e1 - states[0].0,
                None => -states[0].0,
            }
        }
        Potential::SphericalBox { radius } => {
            let x11 = spherical_bessel_zeros(1, 1)[0];
            kin * (x11 * x11 - PI * PI) / (radius * radius)
        }
        Potential::Hydrogen { z } => {
            let ry = p.mass * z * z * p.charge.powi(4) / (2.0 * p.hbar * p.hbar);
            0.75 * ry
        }
    })
}
