//! Closed-form signals, chain scaling laws and detection geometry.

mod geometry;
mod scaling;
mod signals;

pub use geometry::{chain_axis_reach, chain_detection_volume, coherence_radius, coherence_volume};
pub use scaling::{chain_coherence, chain_coherence_hhcp, chain_coherence_sedor, max_layer, ChainBudget, ChainModel, MAX_LAYER_SCAN};
pub use signals::{dmin_from_t2, recoupling_factor, sedor_esr_model, sedor_ramsey_model, DMIN_FLOOR};
