//! Physical constants and the single place where Hz become rad/s.
//!
//! Every frequency in the public data model is stored in Hz. Angular
//! frequencies only appear inside the propagation engine, and they are
//! produced exclusively through [`angular`].

use std::f64::consts::TAU;

/// Free-electron gyromagnetic ratio (rad s^-1 T^-1).
pub const GAMMA_E: f64 = 1.760_859_630_23e11;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permeability over 4π (T m A^-1).
pub const MU0_OVER_4PI: f64 = 1.000_000_000_55e-7;

/// One gauss in tesla.
pub const GAUSS: f64 = 1e-4;

/// Hz -> rad/s.
#[inline]
pub fn angular(hz: f64) -> f64 {
    TAU * hz
}

/// rad/s -> Hz.
#[inline]
pub fn hertz(rad_per_s: f64) -> f64 {
    rad_per_s / TAU
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        assert!((hertz(angular(67e3)) - 67e3).abs() < 1e-9);
    }

    #[test]
    fn free_electron_at_363_gauss() {
        // ~1017 MHz, the band the dark-spin lines are searched around
        let f = hertz(GAMMA_E * 363.0 * GAUSS);
        assert!((f - 1.0173e9).abs() < 1e6, "{f}");
    }
}
