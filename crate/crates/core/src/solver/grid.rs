//! Uniform grids and the finite-difference Hamiltonian built on them.

use serde::{Deserialize, Serialize};

use super::banded::ChannelOperator;
use super::tridiag::SymTridiagonal;
use crate::error::{Error, Result};
use crate::models::{characteristic_length_analytic, ModelSpec, Potential};
use crate::policy::NumericPolicy;

pub const MIN_POINTS: usize = 64;

/// Uniform grid on [a, b] with hard walls at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl Grid1D {
    pub fn new(lower: f64, upper: f64, points: usize) -> Result<Self> {
        if points < MIN_POINTS {
            return Err(Error::domain(format!(
                "grid needs at least {MIN_POINTS} points, got {points}"
            )));
        }
        if !(upper > lower) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::domain(format!("empty grid interval [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper, points })
    }

    pub fn symmetric(half_width: f64, points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, points)
    }

    pub fn spacing(&self) -> f64 {
        (self.upper - self.lower) / (self.points - 1) as f64
    }

    /// Interior node coordinates (the wall nodes carry ψ = 0).
    pub fn interior(&self) -> Vec<f64> {
        let h = self.spacing();
        (1..self.points - 1).map(|i| self.lower + i as f64 * h).collect()
    }
}

/// Uniform radial grid on [0, r_max] for the reduced function u(r) = r·R(r)
/// in angular channel `l`; u vanishes at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub points: usize,
    pub l: u32,
}

impl RadialGrid {
    pub fn new(r_max: f64, points: usize, l: u32) -> Result<Self> {
        if points < MIN_POINTS {
            return Err(Error::domain(format!(
                "grid needs at least {MIN_POINTS} points, got {points}"
            )));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::domain(format!("r_max must be positive, got {r_max}")));
        }
        Ok(Self { r_max, points, l })
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / (self.points - 1) as f64
    }

    pub fn with_channel(self, l: u32) -> Self {
        Self { l, ..self }
    }

    pub fn interior(&self) -> Vec<f64> {
        let h = self.spacing();
        (1..self.points - 1).map(|i| i as f64 * h).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grid {
    Line(Grid1D),
    Radial(RadialGrid),
}

impl Grid {
    pub fn points(&self) -> usize {
        match self {
            Grid::Line(g) => g.points,
            Grid::Radial(g) => g.points,
        }
    }

    pub fn spacing(&self) -> f64 {
        match self {
            Grid::Line(g) => g.spacing(),
            Grid::Radial(g) => g.spacing(),
        }
    }

    /// Same domain with the spacing divided by `factor`; wall and node
    /// alignment is preserved for odd factors.
    pub fn refined(&self, factor: usize) -> Self {
        match *self {
            Grid::Line(g) => Grid::Line(Grid1D {
                points: factor * (g.points - 1) + 1,
                ..g
            }),
            Grid::Radial(g) => Grid::Radial(RadialGrid {
                points: factor * (g.points - 1) + 1,
                ..g
            }),
        }
    }

    pub fn with_points(&self, points: usize) -> Result<Self> {
        match *self {
            Grid::Line(g) => Ok(Grid::Line(Grid1D::new(g.lower, g.upper, points)?)),
            Grid::Radial(g) => Ok(Grid::Radial(RadialGrid::new(g.r_max, points, g.l)?)),
        }
    }
}

/// Whether a discretization is a Cartesian line or a radial channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Channel {
    Line,
    Radial { l: u32 },
}

/// −ħ²/(2μ)·d²/dx² + V on the interior nodes of a grid.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub coords: Vec<f64>,
    pub spacing: f64,
    /// Off-diagonal magnitude t = ħ²/(2μh²).
    pub kinetic: f64,
    /// Potential on each node, centrifugal term included.
    pub potential: Vec<f64>,
    pub channel: Channel,
    /// Lowest and highest coordinates (walls).
    pub walls: (f64, f64),
}

impl Hamiltonian {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn tridiagonal(&self) -> SymTridiagonal {
        let t = self.kinetic;
        let diag = self.potential.iter().map(|v| 2.0 * t + v).collect();
        SymTridiagonal {
            diag,
            off: vec![-t; self.len() - 1],
        }
    }

    pub fn as_channel_operator(&self) -> ChannelOperator {
        ChannelOperator {
            kinetic: self.kinetic,
            potentials: vec![self.potential.clone()],
            coupling: None,
        }
    }

    /// Quadrature inner product ⟨a|w|b⟩ with weight h on interior nodes.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.spacing * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }
}

/// Build the finite-difference Hamiltonian of `spec` on `grid`.
///
/// Hard-wall models require the grid to coincide with the box. The delta
/// well needs a node at x = 0, where it becomes a single-site well of depth
/// 2t·sinh(κh): that keeps the discrete bound state exactly e^{−κ|x|}.
/// Square-well walls are cell-averaged.
pub fn discretize_hamiltonian(spec: &ModelSpec, grid: &Grid) -> Result<Hamiltonian> {
    spec.validate()?;
    let p = spec.particle;
    let h = grid.spacing();
    let t = p.kinetic_coefficient() / (h * h);
    match (spec.potential, grid) {
        (Potential::Piab { width, .. }, Grid::Line(g)) => {
            if (g.lower).abs() > 1e-12 * width || (g.upper - width).abs() > 1e-12 * width {
                return Err(Error::domain(format!(
                    "box of width {width} needs the grid [0, {width}]"
                )));
            }
            line(g, t, |_| 0.0)
        }
        (Potential::Qdo { omega, .. }, Grid::Line(g)) => {
            let k = p.mass * omega * omega;
            line(g, t, |x| 0.5 * k * x * x)
        }
        (Potential::DeltaWell { kappa }, Grid::Line(g)) => {
            let centre = -g.lower / h;
            let idx = centre.round();
            if (centre - idx).abs() > 1e-6 || idx < 1.0 || idx as usize >= g.points - 1 {
                return Err(Error::domain("delta well needs an interior grid node at x = 0"));
            }
            let mut ham = line(g, t, |_| 0.0)?;
            ham.potential[idx as usize - 1] = -2.0 * t * (kappa * h).sinh();
            Ok(ham)
        }
        (Potential::SquareWell { half_width, depth }, Grid::Line(g)) => {
            let a = half_width;
            line(g, t, |x| {
                let lo = (x - 0.5 * h).max(-a);
                let hi = (x + 0.5 * h).min(a);
                let frac = ((hi - lo) / h).clamp(0.0, 1.0);
                // snap rounding residue when a wall sits on a cell edge
                let frac = if frac < 1e-9 {
                    0.0
                } else if frac > 1.0 - 1e-9 {
                    1.0
                } else {
                    frac
                };
                -depth * frac
            })
        }
        (Potential::SphericalBox { radius }, Grid::Radial(g)) => {
            if (g.r_max - radius).abs() > 1e-12 * radius {
                return Err(Error::domain(format!(
                    "sphere of radius {radius} needs r_max = {radius}"
                )));
            }
            radial(g, t, &p, |_| 0.0)
        }
        (Potential::Hydrogen { z }, Grid::Radial(g)) => {
            let zq2 = z * p.charge * p.charge;
            radial(g, t, &p, |r| -zq2 / r)
        }
        _ => Err(Error::domain(format!(
            "{} cannot be discretized on a {} grid",
            spec.family(),
            match grid {
                Grid::Line(_) => "line",
                Grid::Radial(_) => "radial",
            }
        ))),
    }
}

fn line(g: &Grid1D, t: f64, v: impl Fn(f64) -> f64) -> Result<Hamiltonian> {
    let coords = g.interior();
    let potential = coords.iter().map(|&x| v(x)).collect();
    Ok(Hamiltonian {
        coords,
        spacing: g.spacing(),
        kinetic: t,
        potential,
        channel: Channel::Line,
        walls: (g.lower, g.upper),
    })
}

fn radial(g: &RadialGrid, t: f64, p: &crate::types::ParticleParams, v: impl Fn(f64) -> f64) -> Result<Hamiltonian> {
    let coords = g.interior();
    let ll = (g.l * (g.l + 1)) as f64 * p.kinetic_coefficient();
    let potential = coords.iter().map(|&r| v(r) + ll / (r * r)).collect();
    Ok(Hamiltonian {
        coords,
        spacing: g.spacing(),
        kinetic: t,
        potential,
        channel: Channel::Radial { l: g.l },
        walls: (0.0, g.r_max),
    })
}

/// Default grid for a model: the box itself for hard walls, otherwise a
/// domain of many characteristic lengths. `points` is the base size.
pub fn auto_grid(spec: &ModelSpec, policy: &NumericPolicy, points: usize) -> Result<Grid> {
    spec.validate()?;
    let odd = |m: usize| if m.is_multiple_of(2) { m + 1 } else { m };
    let length = || -> Result<f64> { Ok(characteristic_length_analytic(spec, &spec.state_descriptor())?.scalar()) };
    let grid = match spec.potential {
        Potential::Piab { width, .. } => Grid::Line(Grid1D::new(0.0, width, points)?),
        Potential::Qdo { .. } => {
            let w = policy.gaussian_domain_lengths * length()?;
            Grid::Line(Grid1D::symmetric(w, odd(points))?)
        }
        Potential::DeltaWell { .. } => {
            let w = policy.open_domain_lengths * length()?;
            Grid::Line(Grid1D::symmetric(w, odd(points))?)
        }
        Potential::SquareWell { half_width: a, .. } => {
            // walls sit halfway between nodes, so every cell is fully inside
            // or outside the well
            let w_target = a + policy.open_domain_lengths * length()?;
            let h_target = (2.0 * w_target / (odd(points) - 1) as f64).min(2.0 * a / policy.min_cells_per_well as f64);
            let j = (a / h_target - 0.5).ceil().max(0.0);
            let h = a / (j + 0.5);
            let half_cells = (w_target / h).ceil() as usize;
            let m = 2 * half_cells + 1;
            if m > policy.max_points {
                return Err(Error::domain(format!(
                    "square well needs {m} grid points, above max_points = {}",
                    policy.max_points
                )));
            }
            Grid::Line(Grid1D::symmetric(half_cells as f64 * h, m)?)
        }
        Potential::SphericalBox { radius } => Grid::Radial(RadialGrid::new(radius, points, 0)?),
        Potential::Hydrogen { .. } => {
            let r_max = policy.open_domain_lengths * length()?;
            Grid::Radial(RadialGrid::new(r_max, points, 0)?)
        }
    };
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(0.0, 1.0, 10).is_err());
        assert!(Grid1D::new(1.0, 1.0, 100).is_err());
        assert!(RadialGrid::new(-1.0, 100, 0).is_err());
        let g = Grid1D::new(0.0, 1.0, 101).unwrap();
        assert!((g.spacing() - 0.01).abs() < 1e-15);
        assert_eq!(g.interior().len(), 99);
    }

    #[test]
    fn refinement_keeps_nodes() {
        let g = Grid::Line(Grid1D::symmetric(5.0, 101).unwrap());
        let r = g.refined(3);
        assert_eq!(r.points(), 301);
        assert!((3.0 * r.spacing() - g.spacing()).abs() < 1e-15);
    }

    #[test]
    fn square_well_walls_between_nodes() {
        let spec = ModelSpec::square_well_scaled(1.0, 1.0);
        let policy = NumericPolicy::default();
        let g = auto_grid(&spec, &policy, 4001).unwrap();
        let h = g.spacing();
        let offset = 1.0 / h - 0.5;
        assert!((offset - offset.round()).abs() < 1e-9);
        let ham = discretize_hamiltonian(&spec, &g).unwrap();
        let depth = match spec.potential {
            Potential::SquareWell { depth, .. } => depth,
            _ => unreachable!(),
        };
        assert!(ham
            .potential
            .iter()
            .all(|v| *v == 0.0 || (*v + depth).abs() < 1e-9 * depth));
        // refinement by three keeps the alignment
        let h3 = g.refined(3).spacing();
        let offset = 1.0 / h3 - 0.5;
        assert!((offset - offset.round()).abs() < 1e-9);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let box_spec = ModelSpec::piab(1, 1.0);
        let g = Grid::Line(Grid1D::new(0.0, 2.0, 100).unwrap());
        assert!(discretize_hamiltonian(&box_spec, &g).is_err());
        let h = ModelSpec::hydrogen(1.0);
        assert!(discretize_hamiltonian(&h, &g).is_err());
        let d = ModelSpec::delta_well(1.0);
        let even = Grid::Line(Grid1D::symmetric(10.0, 100).unwrap());
        assert!(discretize_hamiltonian(&d, &even).is_err());
    }
}
