use std::f64::consts::PI;

use crate::units::{GAMMA_E, HBAR, MU0_OVER_4PI};

/// Radius at which the dipolar coupling, taken as an angular frequency
/// `(μ0/4π) γe² ħ / r³`, equals `1/T2`.
pub fn coherence_radius(t2: f64) -> f64 {
    (MU0_OVER_4PI * GAMMA_E * GAMMA_E * HBAR * t2).cbrt()
}

/// `(4π/3) r³`.
pub fn coherence_volume(t2: f64) -> f64 {
    4.0 / 3.0 * PI * coherence_radius(t2).powi(3)
}

/// Reach along the chain axis for a chain of `layers` dark spins beyond
/// the central one, each sitting at the edge of the previous sphere.
pub fn chain_axis_reach(layers: usize, t2: f64) -> f64 {
    (layers + 1) as f64 * coherence_radius(t2)
}

/// Union of the `layers + 1` coherence spheres, approximated as
/// `(2/3) V0` per sphere.
pub fn chain_detection_volume(layers: usize, t2: f64) -> f64 {
    (layers + 1) as f64 * 2.0 / 3.0 * coherence_volume(t2)
}
