//! Shared fixtures for the kernel benchmarks.

use linform_core::{parse_equation_spec, Field, GroupFunction, LinearEquation, PointSet, Space};

pub fn equation(spec: &str) -> LinearEquation {
    parse_equation_spec(spec).expect("fixture equation parses")
}

pub fn space(q: u64, n: usize) -> Space {
    Space::new(Field::of_order(q).expect("fixture field"), n).expect("fixture space")
}

/// Deterministic real function with values in [0, 1].
pub fn function(space: &Space) -> GroupFunction {
    let values: Vec<f64> = (0..space.size())
        .map(|i| ((i as f64 * 0.618_033_988_75).fract() + 0.25).fract())
        .collect();
    GroupFunction::from_real(space.clone(), &values).expect("fixture function")
}

/// Every third point.
pub fn set(space: &Space) -> PointSet {
    let members: Vec<usize> = (0..space.size()).step_by(3).collect();
    PointSet::from_indices(space.clone(), &members).expect("fixture set")
}
