//! Shared fixtures for the benchmarks.

use crossing_core::model::SystemSpec;
use crossing_core::presets::Preset;

/// Semiclassical parameters the kernels are timed at.
pub const H_VALUES: [f64; 2] = [1e-2, 1e-3];

/// The tangential preset at `mu_2 = 0.05`.
pub fn tangent_spec(h: f64) -> SystemSpec {
    Preset::TangentM2.spec(h, None).expect("preset builds")
}
