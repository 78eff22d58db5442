use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::SignalTrace;

/// Which accumulated time a decay channel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    /// Free precession inside an echo, against T2.
    Echo,
    /// Time under spin lock, against T1ρ.
    Lock,
    /// Time under laser illumination, against the optically induced T1.
    Laser,
}

/// Shrinks the contrast `y - asymptote` by `exp(-t/τ)`, with `t` the
/// per-point exposure of `kind`.
pub fn apply_decay_envelope(trace: &SignalTrace, kind: DecayKind, timescale: f64) -> Result<SignalTrace> {
    if !(timescale > 0.0) {
        return Err(Error::InvalidArgument(format!("decay timescale must be positive, got {timescale}")));
    }
    if trace.exposures.len() != trace.ordinate.len() {
        return Err(Error::InvalidTrace(format!("trace carries no {kind:?} exposure metadata")));
    }
    let mut out = trace.clone();
    for (y, e) in out.ordinate.iter_mut().zip(&trace.exposures) {
        *y = trace.asymptote + (*y - trace.asymptote) * (-e.get(kind) / timescale).exp();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{Exposure, SweepParameter};

    fn trace() -> SignalTrace {
        let t: Vec<f64> = (0..5).map(|k| k as f64 * 1e-5).collect();
        let mut tr = SignalTrace::new(SweepParameter::EchoTime, t.clone(), vec![1.0; 5]).unwrap();
        tr.exposures = t.iter().map(|&t| Exposure { echo: t, lock: 2e-5, laser: 0.0 }).collect();
        tr
    }

    #[test]
    fn echo_envelope() {
        let out = apply_decay_envelope(&trace(), DecayKind::Echo, 5e-5).unwrap();
        for (t, y) in out.abscissa.iter().zip(&out.ordinate) {
            assert!((y - (-t / 5e-5).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn lock_envelope_is_constant_here() {
        let out = apply_decay_envelope(&trace(), DecayKind::Lock, 1e-4).unwrap();
        assert!(out.ordinate.iter().all(|y| (y - (-0.2f64).exp()).abs() < 1e-15));
    }

    #[test]
    fn missing_metadata() {
        let mut tr = trace();
        tr.exposures.clear();
        assert!(matches!(apply_decay_envelope(&tr, DecayKind::Laser, 1.0), Err(Error::InvalidTrace(_))));
    }

    #[test]
    fn decays_toward_asymptote() {
        let mut tr = trace();
        tr.asymptote = 0.5;
        let out = apply_decay_envelope(&tr, DecayKind::Echo, 1e-9).unwrap();
        assert!((out.ordinate[4] - 0.5).abs() < 1e-12);
        assert_eq!(out.ordinate[0], 1.0);
    }
}
