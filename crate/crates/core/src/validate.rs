//! Self-check suite: oracle agreement, bounds, sum rules and the known C
//! values of the model zoo.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::models::ModelSpec;
use crate::policy::NumericPolicy;
use crate::scaling::{build_report, ScalingReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub passed: bool,
    pub value: f64,
    pub target: f64,
    /// Allowed deviation after scaling; for range checks the half-width.
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// The ground-state zoo, one representative per family.
pub fn zoo() -> Vec<ModelSpec> {
    vec![
        ModelSpec::qdo(1, 1.0),
        ModelSpec::hydrogen(1.0),
        ModelSpec::delta_well(1.0),
        ModelSpec::piab(1, 1.0),
        ModelSpec::spherical_box(1.0),
        ModelSpec::square_well_scaled(1.0, 1.0),
    ]
}

struct Builder {
    scale: f64,
    checks: Vec<Check>,
}

impl Builder {
    fn close(&mut self, id: &str, value: f64, target: f64, rel_tol: f64) {
        let tolerance = rel_tol * self.scale * target.abs().max(f64::MIN_POSITIVE);
        self.checks.push(Check {
            id: id.into(),
            passed: (value - target).abs() <= tolerance,
            value,
            target,
            tolerance,
            detail: format!("|{value} - {target}| <= {tolerance:e}"),
        });
    }

    fn within(&mut self, id: &str, value: f64, lo: f64, hi: f64) {
        self.checks.push(Check {
            id: id.into(),
            passed: value > lo && value < hi,
            value,
            target: 0.5 * (lo + hi),
            tolerance: 0.5 * (hi - lo),
            detail: format!("{lo} < {value} < {hi}"),
        });
    }

    fn holds(&mut self, id: &str, ok: bool, value: f64, detail: String) {
        self.checks.push(Check {
            id: id.into(),
            passed: ok,
            value,
            target: f64::NAN,
            tolerance: 0.0,
            detail,
        });
    }

    fn failed(&mut self, id: &str, detail: String) {
        self.holds(id, false, f64::NAN, detail);
    }
}

/// Run every check. `tol_scale` multiplies all relative tolerances; zero
/// demands exact agreement and so fails.
pub fn run_validation(policy: &NumericPolicy, tol_scale: f64) -> Result<ValidationReport> {
    policy.validate()?;
    let specs = zoo();
    let reports: Vec<(ModelSpec, Result<ScalingReport>)> =
        specs.par_iter().map(|s| (*s, build_report(s, policy))).collect();
    let mut b = Builder {
        scale: tol_scale.max(0.0),
        checks: Vec::new(),
    };
    let mut c_of = std::collections::HashMap::new();
    for (spec, rep) in reports {
        let fam = spec.family();
        let r = match rep {
            Ok(r) => r,
            Err(e) => {
                b.failed(&format!("{fam}.report"), e.to_string());
                continue;
            }
        };
        c_of.insert(fam, r.c);
        match fam {
            "qdo" => {
                b.close("qdo.c", r.c, 1.0, 1e-6);
                b.close("qdo.c_unsold", r.c_unsold.unwrap_or(f64::NAN), 1.0, 1e-6);
            }
            "hydrogen" => {
                b.close("hydrogen.c", r.c, 1.125, 1e-3 / 1.125);
                b.close("hydrogen.c_unsold", r.c_unsold.unwrap_or(f64::NAN), 4.0 / 3.0, 1e-6);
            }
            "delta_well" => b.close("delta_well.c", r.c, 1.25, 2e-3 / 1.25),
            _ => b.within(&format!("{fam}.c"), r.c, 1.023, 1.028),
        }
        for (name, v) in [
            ("dalgarno_lewis", r.alphas.dalgarno_lewis),
            ("finite_field", r.alphas.finite_field),
        ] {
            if let Some(v) = v {
                b.close(&format!("{fam}.{name}"), v, r.alpha, 1e-3);
            }
        }
        // the sum is compared on its own grid, where both are exact
        // evaluations of the same discrete problem
        if let (Some(sos), Some(reference)) = (r.alphas.sum_over_states, r.alphas.sum_over_states_reference) {
            let tail = r.alphas.sum_over_states_tail.unwrap_or(0.0);
            let tol = (1e-3 * b.scale * reference).max(tail * b.scale.min(1.0));
            b.holds(
                &format!("{fam}.sum_over_states"),
                (sos - reference).abs() <= tol,
                sos,
                format!("|{sos} - {reference}| <= max(1e-3 alpha, tail {tail:e})"),
            );
        }
        if let Some(t) = r.trk {
            b.close(&format!("{fam}.trk"), t, 1.0, 1e-3);
        }
        b.holds(
            &format!("{fam}.kirkwood_bound"),
            r.kirkwood_bound_holds == Some(true),
            r.alpha_kirkwood,
            format!("{} <= {}", r.alpha_kirkwood, r.alpha),
        );
        b.holds(
            &format!("{fam}.unsold_bound"),
            r.unsold_bound_holds == Some(true),
            r.alpha_unsold.unwrap_or(f64::NAN),
            match r.alpha_unsold {
                Some(u) => format!("{} <= {u}", r.alpha),
                None => "no Unsöld estimate".into(),
            },
        );
    }
    if let (Some(h), Some(d)) = (c_of.get("hydrogen"), c_of.get("delta_well")) {
        let target = (d - 1.0) / 2.0;
        b.close(
            "hierarchy.hydrogen_vs_delta",
            h - 1.0,
            target,
            1e-3 / target.abs().max(1e-300),
        );
    }
    let passed = b.checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        checks: b.checks,
        passed,
    })
}
