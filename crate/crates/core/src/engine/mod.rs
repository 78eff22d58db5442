//! Density-matrix propagation: free evolution, pulses, Hartmann-Hahn
//! exchange, optical reset and readout.

mod envelope;
mod propagate;
mod pulse;
mod readout;
mod state;

pub use envelope::{apply_decay_envelope, DecayKind};
pub use propagate::{apply_rotation, apply_spin_lock_pair, average_over_manifolds, manifold_assignments, Engine};
pub use pulse::{Drive, PulseAxis, PulseElement, Rotation, SpinLock, DEFAULT_LOCK_RABI_HZ};
pub use readout::{nv_readout_map, ReadoutModel};
pub use state::{evolve_free, expectation, initial_state, DensityState};
