//! Numeric policy: grid sizes, domain rules, field amplitude and tolerances.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every knob that controls discretization and convergence checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericPolicy {
    /// Points (including the two wall nodes) of the base grid.
    pub grid_points: usize,
    /// Points of the grid used for full-spectrum work (sum over states, TRK).
    pub spectrum_points: usize,
    /// Upper bound on any grid size chosen automatically.
    pub max_points: usize,
    /// Half-width of open domains, in units of the analytic L, for
    /// exponentially decaying states.
    pub open_domain_lengths: f64,
    /// Same, for Gaussian (oscillator) states.
    pub gaussian_domain_lengths: f64,
    /// Minimum number of grid cells across a square well.
    pub min_cells_per_well: usize,
    /// Finite-field amplitude in units of the model's natural field
    /// ΔE/(|q|L), ΔE being the first dipole-allowed gap.
    pub field: f64,
    /// Combine ℰ and ℰ/2 to cancel the quartic term.
    pub richardson_field: bool,
    /// Combine h and h/3 to cancel the O(h²) discretization error.
    pub richardson_grid: bool,
    /// Boundary density above which a domain counts as too small.
    pub boundary_density_tol: f64,
    /// Relative residual above which a linear solve is flagged.
    pub residual_tol: f64,
    /// Compute sum-over-states and TRK sums in reports.
    pub spectral_checks: bool,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            grid_points: 4001,
            spectrum_points: 2001,
            max_points: 2_000_001,
            open_domain_lengths: 40.0,
            gaussian_domain_lengths: 12.0,
            min_cells_per_well: 20,
            field: 1e-3,
            richardson_field: true,
            richardson_grid: true,
            boundary_density_tol: 1e-12,
            residual_tol: 1e-10,
            spectral_checks: true,
        }
    }
}

impl NumericPolicy {
    /// Halved grids for quick runs.
    pub fn fast() -> Self {
        let d = Self::default();
        Self {
            grid_points: d.grid_points / 2 + 1,
            spectrum_points: d.spectrum_points / 2 + 1,
            ..d
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 64 || self.spectrum_points < 64 {
            return Err(Error::domain("grids need at least 64 points"));
        }
        if self.max_points < self.grid_points {
            return Err(Error::domain("max_points is below grid_points"));
        }
        if !(self.field > 0.0) {
            return Err(Error::domain("field amplitude must be positive"));
        }
        if self.min_cells_per_well == 0 {
            return Err(Error::domain("min_cells_per_well must be at least 1"));
        }
        if !(self.boundary_density_tol >= 0.0 && self.residual_tol >= 0.0) {
            return Err(Error::domain("tolerances must be non-negative"));
        }
        if !(self.open_domain_lengths > 1.0 && self.gaussian_domain_lengths > 1.0) {
            return Err(Error::domain("domain factors must exceed one length"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_keeps_defaults() {
        let p = NumericPolicy::from_json(r#"{"field": 0.002}"#).unwrap();
        assert_eq!(p.field, 0.002);
        assert_eq!(p.grid_points, NumericPolicy::default().grid_points);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(NumericPolicy::from_json(r#"{"grid_points": 10}"#).is_err());
        assert!(NumericPolicy::from_json(r#"{"field": 0.0}"#).is_err());
        assert!(NumericPolicy::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn fast_policy_is_valid() {
        NumericPolicy::fast().validate().unwrap();
    }
}
