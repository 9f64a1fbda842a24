//! The scaling law as executable checks: extract C from α and L, compare
//! the Kirkwood and Unsöld bounds, sweep model parameters and fit power
//! laws of log α against log L.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    characteristic_length_analytic, dipole_gap_analytic, exact_alpha_analytic, reference_square_well_depth, ModelSpec,
    Potential,
};
use crate::policy::NumericPolicy;
use crate::solver::{self, unsold_bound};
use crate::types::c_from_alpha;

/// Relative slack allowed when checking α^K ≤ α ≤ α^U, so that the exact
/// equalities of the oscillator survive rounding.
pub const BOUND_SLACK: f64 = 1e-9;

/// Source of the α used for C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    Analytic,
    DalgarnoLewis,
    FiniteField,
}

impl fmt::Display for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Oracle::Analytic => "analytic",
            Oracle::DalgarnoLewis => "dalgarno_lewis",
            Oracle::FiniteField => "finite_field",
        })
    }
}

/// α from each method that ran.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MethodAlphas {
    pub analytic: Option<f64>,
    pub dalgarno_lewis: Option<f64>,
    pub finite_field: Option<f64>,
    pub sum_over_states: Option<f64>,
    pub sum_over_states_tail: Option<f64>,
    /// Linear-response α on the sum-over-states grid.
    pub sum_over_states_reference: Option<f64>,
}

/// Everything the law says about one model state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub model: ModelSpec,
    pub family: String,
    pub state: u32,
    pub oracle: Oracle,
    /// Per-axis α from the best available oracle.
    pub alpha: f64,
    pub alphas: MethodAlphas,
    /// Per-axis characteristic length (closed form).
    pub length: f64,
    /// Same, from the grid variance.
    pub length_numeric: Option<f64>,
    pub c: f64,
    pub c_kirkwood: f64,
    pub c_unsold: Option<f64>,
    pub alpha_kirkwood: f64,
    pub alpha_unsold: Option<f64>,
    pub trk: Option<f64>,
    pub kirkwood_bound_holds: Option<bool>,
    pub unsold_bound_holds: Option<bool>,
    /// C − 1.
    pub delta_c: f64,
    /// Effective excitation energy 2q²L²/α.
    pub effective_gap: f64,
    pub warnings: Vec<String>,
}

/// Compute every field of the report for `spec`.
pub fn build_report(spec: &ModelSpec, policy: &NumericPolicy) -> Result<ScalingReport> {
    spec.validate()?;
    policy.validate()?;
    let p = spec.particle;
    let state = spec.state_descriptor();
    let length = characteristic_length_analytic(spec, &state)?.scalar();
    let mut alphas = MethodAlphas::default();
    let mut warnings = Vec::new();

    match exact_alpha_analytic(spec, &state) {
        Ok(a) => alphas.analytic = Some(a),
        Err(Error::NotImplemented(_)) => {}
        Err(e) => return Err(e),
    }

    let mut length_numeric = None;
    match solver::dalgarno_lewis_estimate(spec, policy) {
        Ok(est) => {
            alphas.dalgarno_lewis = Some(est.alpha.value);
            length_numeric = est.variance.map(|v| v.value.sqrt());
            warnings.extend(est.warnings.into_iter().map(|w| format!("dalgarno_lewis: {w}")));
        }
        Err(e) if alphas.analytic.is_some() => warnings.push(format!("dalgarno_lewis failed: {e}")),
        Err(e) => return Err(e),
    }

    if spec.is_ground() {
        match solver::finite_field_estimate(spec, policy) {
            Ok(est) => {
                alphas.finite_field = Some(est.alpha.value);
                warnings.extend(est.warnings.into_iter().map(|w| format!("finite_field: {w}")));
            }
            Err(e) if alphas.analytic.is_some() || alphas.dalgarno_lewis.is_some() => {
                warnings.push(format!("finite_field failed: {e}"))
            }
            Err(e) => return Err(e),
        }
    }

    let mut trk = None;
    if policy.spectral_checks {
        match solver::spectral_summary(spec, policy) {
            Ok(s) => {
                alphas.sum_over_states = Some(s.sum_over_states.alpha);
                alphas.sum_over_states_tail = Some(s.sum_over_states.tail_bound);
                alphas.sum_over_states_reference = s.alpha_same_grid;
                trk = Some(s.trk);
                warnings.extend(s.warnings.into_iter().map(|w| format!("spectral: {w}")));
            }
            Err(e) => warnings.push(format!("spectral checks failed: {e}")),
        }
    }

    let (oracle, alpha) = if let Some(a) = alphas.analytic {
        (Oracle::Analytic, a)
    } else if let Some(a) = alphas.dalgarno_lewis {
        (Oracle::DalgarnoLewis, a)
    } else if let Some(a) = alphas.finite_field {
        (Oracle::FiniteField, a)
    } else {
        return Err(Error::NotImplemented(format!("no oracle covers {}", spec.family())));
    };

    let c = c_from_alpha(alpha, length, &p)?;
    let alpha_kirkwood = p.law_prefactor() * length.powi(4);
    let (alpha_unsold, c_unsold, k_holds, u_holds) = if spec.is_ground() {
        let gap = dipole_gap_analytic(spec)?;
        let au = unsold_bound(length * length, gap, p.charge)?;
        let slack = BOUND_SLACK * alpha.abs();
        (
            Some(au),
            Some(c_from_alpha(au, length, &p)?),
            Some(alpha_kirkwood <= alpha + slack),
            Some(alpha <= au + slack),
        )
    } else {
        (None, None, None, None)
    };

    Ok(ScalingReport {
        model: *spec,
        family: spec.family().to_string(),
        state: state.n,
        oracle,
        alpha,
        alphas,
        length,
        length_numeric,
        c,
        c_kirkwood: 1.0,
        c_unsold,
        alpha_kirkwood,
        alpha_unsold,
        trk,
        kirkwood_bound_holds: k_holds,
        unsold_bound_holds: u_holds,
        delta_c: c - 1.0,
        effective_gap: 2.0 * p.charge * p.charge * length * length / alpha,
        warnings,
    })
}

// ---------------------------------------------------------------------------
// Sweeps

/// A model parameter that a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Box width (PIAB) or well half-width (square well, at fixed
    /// dimensionless depth).
    Width,
    Radius,
    Kappa,
    Depth,
    /// Square-well depth in units of 100ħ²/(2μA²).
    DepthScale,
    Omega,
    /// Oscillator stiffness μω².
    K0,
    Z,
    Mass,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Width => "A",
            SweepParam::Radius => "R",
            SweepParam::Kappa => "kappa",
            SweepParam::Depth => "V0",
            SweepParam::DepthScale => "V0scale",
            SweepParam::Omega => "omega",
            SweepParam::K0 => "k0",
            SweepParam::Z => "Z",
            SweepParam::Mass => "mass",
        }
    }

    /// `spec` with this parameter set to `value`, validated.
    pub fn apply(&self, spec: &ModelSpec, value: f64) -> Result<ModelSpec> {
        let out = self.assign(spec, value)?;
        out.validate()?;
        Ok(out)
    }

    fn assign(&self, spec: &ModelSpec, value: f64) -> Result<ModelSpec> {
        let mut out = *spec;
        let mismatch = || Error::domain(format!("parameter {} does not apply to {}", self.name(), spec.family()));
        match (self, &mut out.potential) {
            (SweepParam::Width, Potential::Piab { width, .. }) => *width = value,
            (SweepParam::Width, Potential::SquareWell { half_width, depth }) => {
                // keep V₀A² and so the number of bound states
                *depth *= (*half_width / value).powi(2);
                *half_width = value
            }
            (SweepParam::Radius, Potential::SphericalBox { radius }) => *radius = value,
            (SweepParam::Kappa, Potential::DeltaWell { kappa }) => *kappa = value,
            (SweepParam::Depth, Potential::SquareWell { depth, .. }) => *depth = value,
            (SweepParam::DepthScale, Potential::SquareWell { half_width, depth }) => {
                *depth = value * reference_square_well_depth(*half_width, &spec.particle)
            }
            (SweepParam::Omega, Potential::Qdo { omega, .. }) => *omega = value,
            (SweepParam::K0, Potential::Qdo { omega, .. }) => *omega = (value / spec.particle.mass).sqrt(),
            (SweepParam::Z, Potential::Hydrogen { z }) => *z = value,
            (SweepParam::Mass, _) => out.particle.mass = value,
            _ => return Err(mismatch()),
        }
        Ok(out)
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "A" | "width" | "half_width" => SweepParam::Width,
            "R" | "radius" => SweepParam::Radius,
            "kappa" => SweepParam::Kappa,
            "V0" | "depth" => SweepParam::Depth,
            "V0scale" | "depth_scale" => SweepParam::DepthScale,
            "omega" => SweepParam::Omega,
            "k0" => SweepParam::K0,
            "Z" | "z" => SweepParam::Z,
            "mass" | "mu" => SweepParam::Mass,
            other => return Err(Error::Parse(format!("unknown sweep parameter '{other}'"))),
        })
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: Option<ScalingReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub parameter: SweepParam,
    pub points: Vec<SweepPoint>,
    /// Some point failed; the others are still reported.
    pub partial: bool,
    /// max C − min C over the successful points.
    pub c_spread: f64,
}

impl SweepResult {
    pub fn reports(&self) -> impl Iterator<Item = &ScalingReport> {
        self.points.iter().filter_map(|p| p.report.as_ref())
    }
}

/// Reports for `spec` with `param` set to each of `values` (strictly
/// monotone, at least three). Points run in parallel; output order follows
/// `values`.
pub fn sweep_parameter(
    spec: &ModelSpec,
    param: SweepParam,
    values: &[f64],
    policy: &NumericPolicy,
) -> Result<SweepResult> {
    if values.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "a sweep needs at least 3 values, got {}",
            values.len()
        )));
    }
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::domain("sweep values must be strictly monotone"));
    }
    param.assign(spec, values[0])?;
    let points: Vec<SweepPoint> = values
        .par_iter()
        .map(
            |&value| match param.apply(spec, value).and_then(|s| build_report(&s, policy)) {
                Ok(r) => SweepPoint {
                    value,
                    report: Some(r),
                    error: None,
                },
                Err(e) => SweepPoint {
                    value,
                    report: None,
                    error: Some(e.to_string()),
                },
            },
        )
        .collect();
    let partial = points.iter().any(|p| p.report.is_none());
    let cs: Vec<f64> = points.iter().filter_map(|p| p.report.as_ref().map(|r| r.c)).collect();
    let c_spread = if cs.is_empty() {
        f64::NAN
    } else {
        cs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - cs.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    Ok(SweepResult {
        parameter: param,
        points,
        partial,
        c_spread,
    })
}

/// `count` values from `from` to `to`, evenly spaced or log-spaced.
pub fn parameter_range(from: f64, to: f64, count: usize, log: bool) -> Result<Vec<f64>> {
    if count < 3 {
        return Err(Error::InsufficientData(format!(
            "a sweep needs at least 3 values, got {count}"
        )));
    }
    if !(from.is_finite() && to.is_finite()) || from == to {
        return Err(Error::domain("sweep range needs two distinct finite end points"));
    }
    if log && !(from > 0.0 && to > 0.0) {
        return Err(Error::domain("log spacing needs positive end points"));
    }
    let n = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            let t = i as f64 / n;
            if i == count - 1 {
                to
            } else if log {
                (from.ln() + t * (to.ln() - from.ln())).exp()
            } else {
                from + t * (to - from)
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Excited states

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExcitedPoint {
    pub n: u32,
    pub length: f64,
    /// Signed per-axis α; excited states of a box can have α < 0.
    pub alpha: f64,
    pub c: f64,
}

/// (n, L, α, C) for each state in `states` of a box or oscillator. Box
/// polarizabilities come from the linear-response solver.
pub fn excited_state_curve(spec: &ModelSpec, states: &[u32], policy: &NumericPolicy) -> Result<Vec<ExcitedPoint>> {
    if !matches!(spec.potential, Potential::Piab { .. } | Potential::Qdo { .. }) {
        return Err(Error::domain(format!(
            "excited-state curves are available for piab and qdo, not {}",
            spec.family()
        )));
    }
    states
        .par_iter()
        .map(|&n| {
            let s = spec.with_state(n);
            s.validate()?;
            let st = s.state_descriptor();
            let length = characteristic_length_analytic(&s, &st)?.scalar();
            let alpha = match s.potential {
                Potential::Qdo { .. } => exact_alpha_analytic(&s, &st)?,
                _ => {
                    let grid_states = policy.grid_points - 2;
                    if (n as usize) > grid_states / 4 {
                        return Err(Error::domain(format!(
                            "state {n} is not resolved by a {}-point grid (truncation)",
                            policy.grid_points
                        )));
                    }
                    solver::dalgarno_lewis_estimate(&s, policy)?.alpha.value
                }
            };
            Ok(ExcitedPoint {
                n,
                length,
                alpha,
                c: c_from_alpha(alpha, length, &s.particle)?,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Power-law fits

/// Least-squares fit of log |α| = log K + e·log L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    /// Exponent was fitted rather than fixed.
    pub free: bool,
    pub log_prefactor: f64,
    /// Root-mean-square residual of log α.
    pub residual: f64,
    pub points: usize,
}

/// Fit (L, α) pairs with a fixed exponent, or a free one when `exponent`
/// is `None`.
pub fn power_fit(points: &[(f64, f64)], exponent: Option<f64>) -> Result<PowerFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "a power-law fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|(l, _)| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::domain("power-law fits need positive L"));
    }
    // excited states may have α < 0; a common sign is fitted through |α|
    let positive = points.iter().all(|(_, a)| *a > 0.0);
    let negative = points.iter().all(|(_, a)| *a < 0.0);
    if !(positive || negative) || points.iter().any(|(_, a)| !a.is_finite()) {
        return Err(Error::domain("power-law fits need finite alpha of one sign"));
    }
    let xs: Vec<f64> = points.iter().map(|(l, _)| l.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, a)| a.abs().ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let e = match exponent {
        Some(e) => e,
        None => {
            let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            if sxx == 0.0 {
                return Err(Error::Degenerate("all points share the same L".into()));
            }
            xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx
        }
    };
    let b = my - e * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - b - e * x).powi(2)).sum();
    Ok(PowerFit {
        exponent: e,
        free: exponent.is_none(),
        log_prefactor: b,
        residual: (ss / n).sqrt(),
        points: points.len(),
    })
}

/// Fit reports from one model family with exponent `exponent` (or free).
pub fn legacy_power_fit(reports: &[ScalingReport], exponent: Option<f64>) -> Result<PowerFit> {
    if let Some(first) = reports.first() {
        if reports.iter().any(|r| r.family != first.family) {
            return Err(Error::domain("power-law fits need reports from a single model family"));
        }
    }
    let pts: Vec<(f64, f64)> = reports.iter().map(|r| (r.length, r.alpha)).collect();
    power_fit(&pts, exponent)
}

/// Fits with the three legacy exponents 3, 4, 7 and a free exponent.
pub fn legacy_comparison(reports: &[ScalingReport]) -> Result<Vec<PowerFit>> {
    [Some(3.0), Some(4.0), Some(7.0), None]
        .into_iter()
        .map(|e| legacy_power_fit(reports, e))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> NumericPolicy {
        NumericPolicy {
            spectral_checks: false,
            ..NumericPolicy::default()
        }
    }

    #[test]
    fn oscillator_report_is_exact() {
        let r = build_report(&ModelSpec::qdo(1, 1.0), &NumericPolicy::default()).unwrap();
        assert_eq!(r.oracle, Oracle::Analytic);
        assert!((r.c - 1.0).abs() < 1e-12);
        assert!((r.c_unsold.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.kirkwood_bound_holds, Some(true));
        assert_eq!(r.unsold_bound_holds, Some(true));
        assert!((r.trk.unwrap() - 1.0).abs() < 1e-3);
        assert!((r.alphas.finite_field.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hydrogen_unsold_constant() {
        let r = build_report(&ModelSpec::hydrogen(1.0), &quick()).unwrap();
        assert!((r.c - 1.125).abs() < 1e-12);
        assert!((r.c_unsold.unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!((r.alpha_unsold.unwrap() - 16.0 / 3.0).abs() < 1e-12);
        assert!((r.effective_gap - 2.0 / 4.5).abs() < 1e-12);
    }

    #[test]
    fn square_well_uses_linear_response() {
        let r = build_report(&ModelSpec::square_well_scaled(1.0, 1.0), &quick()).unwrap();
        assert_eq!(r.oracle, Oracle::DalgarnoLewis);
        assert!(r.c > 1.023 && r.c < 1.028, "{}", r.c);
    }

    #[test]
    fn sweep_validation() {
        let spec = ModelSpec::piab(1, 1.0);
        let p = quick();
        assert!(matches!(
            sweep_parameter(&spec, SweepParam::Width, &[1.0, 2.0], &p),
            Err(Error::InsufficientData(_))
        ));
        assert!(sweep_parameter(&spec, SweepParam::Width, &[1.0, 3.0, 2.0], &p).is_err());
        assert!(sweep_parameter(&spec, SweepParam::Z, &[1.0, 2.0, 3.0], &p).is_err());
        let s = sweep_parameter(&spec, SweepParam::Width, &[0.5, 1.0, 2.0, 4.0], &p).unwrap();
        assert!(!s.partial);
        assert!(s.c_spread < 1e-10);
    }

    #[test]
    fn failing_point_marks_sweep_partial() {
        let spec = ModelSpec::hydrogen(1.0);
        // Z below 1 is rejected by validation
        let s = sweep_parameter(&spec, SweepParam::Z, &[0.5, 1.0, 2.0], &quick()).unwrap();
        assert!(s.partial);
        assert!(s.points[0].error.is_some());
        assert_eq!(s.reports().count(), 2);
    }

    #[test]
    fn ranges() {
        let r = parameter_range(0.5, 4.0, 4, false).unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(r[3], 4.0);
        let r = parameter_range(0.01, 100.0, 5, true).unwrap();
        assert!((r[2] - 1.0).abs() < 1e-12);
        assert!(parameter_range(1.0, 2.0, 1, false).is_err());
        assert!(parameter_range(-1.0, 2.0, 3, true).is_err());
    }

    #[test]
    fn oscillator_excited_states() {
        let pts = excited_state_curve(&ModelSpec::qdo(1, 1.0), &[0, 1, 2], &quick()).unwrap();
        for p in pts {
            let expect = 1.0 / ((2 * p.n + 1) as f64).powi(2);
            assert!((p.c - expect).abs() < 1e-12);
        }
        assert!(excited_state_curve(&ModelSpec::hydrogen(1.0), &[1], &quick()).is_err());
    }

    #[test]
    fn fit_recovers_exponent() {
        let pts: Vec<(f64, f64)> = [0.5, 1.0, 2.0, 3.0]
            .iter()
            .map(|l: &f64| (*l, 1.7 * l.powi(4)))
            .collect();
        let free = power_fit(&pts, None).unwrap();
        assert!((free.exponent - 4.0).abs() < 1e-12);
        assert!(power_fit(&pts, Some(4.0)).unwrap().residual < 1e-12);
        assert!(power_fit(&pts, Some(3.0)).unwrap().residual > 0.1);
        assert!(matches!(power_fit(&pts[..2], None), Err(Error::InsufficientData(_))));
    }
}
