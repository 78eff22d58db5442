use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Optical readout of the central spin: fluorescence
/// `F = 1 - c (1 - ⟨σz⟩)/2` plus Gaussian shot noise of width `noise_sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutModel {
    contrast: f64,
    noise_sigma: f64,
}

impl ReadoutModel {
    pub fn new(contrast: f64, noise_sigma: f64) -> Result<Self> {
        if !(contrast > 0.0 && contrast <= 1.0) {
            return Err(Error::InvalidArgument(format!("contrast must lie in (0, 1], got {contrast}")));
        }
        if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("noise sigma must be finite and non-negative, got {noise_sigma}")));
        }
        Ok(Self { contrast, noise_sigma })
    }

    pub fn contrast(&self) -> f64 {
        self.contrast
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn fluorescence(&self, sigma_z: f64) -> f64 {
        1.0 - self.contrast * (1.0 - sigma_z) / 2.0
    }

    /// Inverse of [`fluorescence`](Self::fluorescence).
    pub fn sigma_z(&self, fluorescence: f64) -> f64 {
        1.0 - 2.0 * (1.0 - fluorescence) / self.contrast
    }
}

/// Noisy fluorescence for one point.
pub fn nv_readout_map<R: Rng + ?Sized>(sigma_z: f64, model: &ReadoutModel, rng: &mut R) -> f64 {
    let f = model.fluorescence(sigma_z);
    if model.noise_sigma == 0.0 {
        return f;
    }
    f + Normal::new(0.0, model.noise_sigma).expect("validated sigma").sample(rng)
}
