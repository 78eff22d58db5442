use crate::error::{Error, Result};
use crate::network::{Manifold, Observable, SpinNetwork};
use crate::ops::{conjugate, embed, hermitian_eigenvalues, identity, is_hermitian, pauli, propagator, Axis, Op, C64};

/// Density matrix over an ordered subset of spins.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    matrix: Op,
    spin_order: Vec<String>,
    /// Rotating-frame frequency of each spin (Hz).
    frame_hz: Vec<f64>,
}

impl DensityState {
    /// Wraps a matrix after checking Hermiticity, unit trace and positivity.
    pub fn new(matrix: Op, spin_order: Vec<String>, frame_hz: Vec<f64>) -> Result<Self> {
        let dim = 1usize << spin_order.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        if frame_hz.len() != spin_order.len() {
            return Err(Error::DimensionMismatch { expected: spin_order.len(), got: frame_hz.len() });
        }
        if !is_hermitian(&matrix, 1e-10) {
            return Err(Error::InvalidArgument("density matrix is not Hermitian".into()));
        }
        if (matrix.trace() - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::InvalidArgument("density matrix trace is not 1".into()));
        }
        if hermitian_eigenvalues(&matrix).first().is_some_and(|&e| e < -1e-10) {
            return Err(Error::InvalidArgument("density matrix is not positive semidefinite".into()));
        }
        Ok(Self { matrix, spin_order, frame_hz })
    }

    pub(crate) fn from_parts_unchecked(matrix: Op, spin_order: Vec<String>, frame_hz: Vec<f64>) -> Self {
        Self { matrix, spin_order, frame_hz }
    }

    pub fn matrix(&self) -> &Op {
        &self.matrix
    }

    pub fn spin_order(&self) -> &[String] {
        &self.spin_order
    }

    pub fn frame_hz(&self) -> &[f64] {
        &self.frame_hz
    }

    pub fn n_spins(&self) -> usize {
        self.spin_order.len()
    }

    pub fn site(&self, label: &str) -> Result<usize> {
        self.spin_order.iter().position(|s| s == label).ok_or_else(|| Error::UnknownSpin(label.to_string()))
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub(crate) fn with_matrix(&self, matrix: Op) -> Self {
        Self { matrix, spin_order: self.spin_order.clone(), frame_hz: self.frame_hz.clone() }
    }

    pub(crate) fn transform(&self, u: &Op) -> Self {
        self.with_matrix(conjugate(u, &self.matrix))
    }
}

/// `(I + σz)/2` on `polarized`, `I/2` on every other spin of `subset`.
/// Frames follow each spin's configured line; unpolarized spins use the
/// midpoint of their two lines.
pub fn initial_state(network: &SpinNetwork, subset: &[&str], polarized: &str) -> Result<DensityState> {
    let mut frames = Vec::with_capacity(subset.len());
    for label in subset {
        let f = match network.transition_frequency(label, None) {
            Ok(f) => f,
            Err(Error::UnresolvedManifold(_)) => {
                0.5 * Manifold::BOTH.iter().map(|&m| network.transition_frequency(label, Some(m))).sum::<Result<f64>>()?
            }
            Err(e) => return Err(e),
        };
        frames.push(f);
    }
    initial_state_with_frames(network, subset, polarized, frames)
}

pub(crate) fn initial_state_with_frames(
    network: &SpinNetwork,
    subset: &[&str],
    polarized: &str,
    frames: Vec<f64>,
) -> Result<DensityState> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("empty spin subset".into()));
    }
    for label in subset {
        network.index_of(label)?;
    }
    let site = subset.iter().position(|s| *s == polarized).ok_or_else(|| Error::UnknownSpin(polarized.to_string()))?;
    let n = subset.len();
    let dim = 1 << n;
    let rho = (identity(dim) + embed(&pauli(Axis::Z), site, n)) * C64::new(1.0 / dim as f64, 0.0);
    Ok(DensityState::from_parts_unchecked(rho, subset.iter().map(|s| s.to_string()).collect(), frames))
}

/// `ρ -> U ρ U†` with `U = exp(-i H t)`; `H` in rad/s.
pub fn evolve_free(state: &DensityState, h: &Op, t: f64) -> Result<DensityState> {
    let dim = state.matrix.nrows();
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: h.nrows() });
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("evolution time must be non-negative, got {t}")));
    }
    let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if !is_hermitian(h, 1e-12 * scale) {
        return Err(Error::InvalidArgument("Hamiltonian is not Hermitian".into()));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    Ok(state.transform(&propagator(h, t)))
}

/// `Tr(O ρ)`.
pub fn expectation(state: &DensityState, obs: &Observable) -> Result<f64> {
    let op = obs.operator(&state.spin_order)?;
    let v = (op * &state.matrix).trace();
    if v.im.abs() > 1e-10 {
        return Err(Error::ComplexExpectation(v.im));
    }
    Ok(v.re)
}
