//! Shared inputs for the solver benchmarks in `benches/`.

use polar4::solver::{auto_grid, Grid};
use polar4::{ModelSpec, NumericPolicy};

/// One model per family with its grid at `points` nodes.
pub fn cases(points: usize) -> Vec<(&'static str, ModelSpec, Grid)> {
    let policy = NumericPolicy::default();
    [
        ("qdo", ModelSpec::qdo(1, 1.0)),
        ("hydrogen", ModelSpec::hydrogen(1.0)),
        ("delta_well", ModelSpec::delta_well(1.0)),
        ("piab", ModelSpec::piab(1, 1.0)),
        ("spherical_box", ModelSpec::spherical_box(1.0)),
        ("square_well", ModelSpec::square_well_scaled(1.0, 1.0)),
    ]
    .into_iter()
    .map(|(name, spec)| {
        (
            name,
            spec,
            auto_grid(&spec, &policy, points).expect("valid bench model"),
        )
    })
    .collect()
}
