use std::f64::consts::PI;

/// Constant `c` in `d_min = c / T2`, pinned to 10 kHz at T2 = 50 μs.
pub const DMIN_FLOOR: f64 = 0.5;

/// Ideal SEDOR-Ramsey signal `cos(2π d T)`.
pub fn sedor_ramsey_model(d_hz: f64, t: f64) -> f64 {
    (2.0 * PI * d_hz * t).cos()
}

/// `z→z` element of a finite π pulse at Rabi `Ω0` and detuning `Δω` (both rad/s):
/// `(Δω² + Ω0² cos(π sqrt(Δω²+Ω0²)/Ω0)) / (Δω²+Ω0²)`.
pub fn recoupling_factor(delta_omega: f64, omega0: f64) -> f64 {
    let w2 = delta_omega * delta_omega + omega0 * omega0;
    (delta_omega * delta_omega + omega0 * omega0 * (PI * w2.sqrt() / omega0).cos()) / w2
}

/// SEDOR-ESR signal `cos²(ω_d T/2) + A sin²(ω_d T/2)`.
pub fn sedor_esr_model(d_hz: f64, t: f64, delta_omega: f64, omega0: f64) -> f64 {
    let half = PI * d_hz * t;
    half.cos().powi(2) + recoupling_factor(delta_omega, omega0) * half.sin().powi(2)
}

/// Weakest coupling resolvable within the probe's coherence time:
/// `snr_floor / T2` (Hz). [`DMIN_FLOOR`] is the calibrated default.
pub fn dmin_from_t2(t2: f64, snr_floor: f64) -> f64 {
    snr_floor / t2
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ramsey_points() {
        assert_eq!(sedor_ramsey_model(67e3, 0.0), 1.0);
        assert!((sedor_ramsey_model(67e3, 1.0 / (2.0 * 67e3)) + 1.0).abs() < 1e-15);
        assert!(sedor_ramsey_model(20e3, 1.0 / (4.0 * 20e3)).abs() < 1e-15);
    }

    #[test]
    fn recoupling_points() {
        assert!((recoupling_factor(0.0, 1.0) + 1.0).abs() < 1e-15);
        // frozen from a 30-digit evaluation
        assert!((recoupling_factor(1.0, 1.0) - 0.366_872_328_979_292_3).abs() < 1e-14);
        assert!((recoupling_factor(10.0, 1.0) - 0.999_878_706_847_627_6).abs() < 1e-14);
        assert!((recoupling_factor(0.5, 1.0) + 0.545_625_939_050_582_1).abs() < 1e-14);
        assert!((recoupling_factor(1e4, 1.0) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn esr_at_optimal_time_is_recoupling_factor() {
        let d = 67e3;
        let w = 2.0 * PI * 0.5e6;
        let v = sedor_esr_model(d, 1.0 / (2.0 * d), w, w);
        assert!((v - recoupling_factor(w, w)).abs() < 1e-14);
    }

    #[test]
    fn dmin() {
        assert!((dmin_from_t2(50e-6, DMIN_FLOOR) - 10e3).abs() < 1e-9);
        assert!((dmin_from_t2(100e-6, DMIN_FLOOR) - 5e3).abs() < 1e-9);
        assert!((dmin_from_t2(25e-6, DMIN_FLOOR) - 20e3).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn esr_reduces_to_ramsey(d in 0.0f64..2e5, t in 0.0f64..1e-4, w0 in 1e5f64..1e8) {
            prop_assert!((sedor_esr_model(d, t, 0.0, w0) - sedor_ramsey_model(d, t)).abs() < 1e-12);
        }

        #[test]
        fn recoupling_even_and_bounded(dw in -1e9f64..1e9, w0 in 1e4f64..1e8) {
            let a = recoupling_factor(dw, w0);
            prop_assert!((-1.0..=1.0).contains(&a));
            prop_assert_eq!(a, recoupling_factor(-dw, w0));
        }
    }
}
