//! Parameter sets shared by the criterion benchmarks.

use milstein_core::ModelParams;

/// The eight `(λ, ε, σ)` triples of the path-slope figures: four blowing up,
/// four stable in the almost-sure sense.
pub const FIGURE_TRIPLES: [(f64, f64, f64); 8] = [
    (7.0, 2.0, 4.0),
    (8.0, 2.0, 4.0),
    (30.0, 6.0, 8.0),
    (2.0, -10.0, 8.0),
    (0.2, 3.5, 4.0),
    (6.0, 0.5, 4.0),
    (6.0, 0.5, 8.0),
    (0.5, 4.0, 8.0),
];

pub fn figure_params() -> Vec<ModelParams> {
    FIGURE_TRIPLES
        .iter()
        .map(|&(l, e, s)| ModelParams::new(l, e, s).expect("finite parameters"))
        .collect()
}
