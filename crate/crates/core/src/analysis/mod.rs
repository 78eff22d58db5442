//! Fitting, spectral estimation and readout renormalization.

mod fit;
pub mod lsq;
mod spam;
mod spectrum;

pub use fit::{
    baseline_offset_hhcp, fit_cosine, fit_decaying_cosine, fit_exp_decay, fit_fft_peak, fit_lorentzian, fit_lorentzian_lines,
    fit_trace, iswap_fidelity_from_calibration, FitFlag, FitModel, FitResult, NOISE_FLOOR,
};
pub use spam::{spam_map, spam_unmap};
pub use spectrum::{extract_peak, periodogram, PeakEstimate, Spectrum, SECONDARY_FRACTION, ZERO_PAD};
