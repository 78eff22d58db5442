use super::{bare_larmor_hz, NuclearManifold, SpinDef};
use crate::error::{Error, Result};

/// Angle-dependent ESR line splitting of an axially symmetric hyperfine
/// tensor: `sqrt(A⊥² sin²θ + A∥² cos²θ)`.
pub fn hyperfine_splitting(a_perp: f64, a_par: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    (a_perp * a_perp * s * s + a_par * a_par * c * c).sqrt()
}

/// Electron line of `spin` in nuclear manifold `manifold` (Hz):
/// `γB0/2π + m_I A_s(θ)`.
pub fn resonance_frequency(spin: &SpinDef, b0_tesla: f64, manifold: NuclearManifold) -> Result<f64> {
    let m = manifold.fixed().ok_or_else(|| Error::UnresolvedManifold(spin.label.clone()))?;
    if !(b0_tesla > 0.0) {
        return Err(Error::InvalidArgument(format!("B0 must be positive, got {b0_tesla}")));
    }
    Ok(bare_larmor_hz(spin, b0_tesla) + m.m_i() * spin.splitting_hz())
}

/// True when `candidate` exceeds every splitting the reference tensor can
/// produce at any field orientation, by more than `uncertainty`.
pub fn defects_distinct(candidate: f64, a_perp: f64, a_par: f64, uncertainty: f64) -> bool {
    candidate - a_perp.max(a_par) > uncertainty.abs()
}
