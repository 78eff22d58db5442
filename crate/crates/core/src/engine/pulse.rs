use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Manifold;

/// Default Rabi frequency of the Hartmann-Hahn lock (Hz).
pub const DEFAULT_LOCK_RABI_HZ: f64 = 0.5e6;

/// Which line a microwave tone addresses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    /// Follows the spin's current line, whatever manifold it is in.
    #[default]
    Resonant,
    /// Fixed on the line of one nuclear manifold.
    Line(Manifold),
    /// Fixed absolute frequency (Hz).
    Frequency(f64),
}

/// Pulse phase in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseAxis {
    X,
    Y,
    MinusX,
    MinusY,
    Phase(f64),
}

impl PulseAxis {
    pub fn radians(self) -> f64 {
        match self {
            PulseAxis::X => 0.0,
            PulseAxis::Y => FRAC_PI_2,
            PulseAxis::MinusX => PI,
            PulseAxis::MinusY => -FRAC_PI_2,
            PulseAxis::Phase(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub spin: String,
    pub axis: PulseAxis,
    pub angle: f64,
    #[serde(default)]
    pub drive: Drive,
    /// Finite pulses need a Rabi frequency; ideal ones ignore it.
    #[serde(default)]
    pub rabi_hz: Option<f64>,
    #[serde(default)]
    pub ideal: bool,
    /// Overrides the detuning derived from `drive` (Hz).
    #[serde(default)]
    pub detuning_override_hz: Option<f64>,
}

impl Rotation {
    pub fn ideal(spin: &str, axis: PulseAxis, angle: f64) -> Self {
        Self { spin: spin.into(), axis, angle, drive: Drive::Resonant, rabi_hz: None, ideal: true, detuning_override_hz: None }
    }

    pub fn finite(spin: &str, axis: PulseAxis, angle: f64, drive: Drive, rabi_hz: f64) -> Self {
        Self { spin: spin.into(), axis, angle, drive, rabi_hz: Some(rabi_hz), ideal: false, detuning_override_hz: None }
    }

    /// Pulse duration in seconds (zero for ideal pulses).
    pub fn duration(&self) -> Result<f64> {
        if self.ideal {
            return Ok(0.0);
        }
        match self.rabi_hz {
            Some(r) if r > 0.0 && r.is_finite() => Ok(self.angle.abs() / (2.0 * PI * r)),
            _ => Err(Error::InvalidPulse(format!("finite pulse on `{}` needs a positive Rabi frequency", self.spin))),
        }
    }
}

/// Hartmann-Hahn exchange between two spins locked at a common Rabi
/// frequency, bracketed by the π/2 pulses that map z into the lock axis and
/// back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinLock {
    pub spins: [String; 2],
    pub duration: f64,
    #[serde(default)]
    pub drives: [Drive; 2],
    #[serde(default = "default_lock_rabi")]
    pub rabi_hz: f64,
    /// Phase of each closing π/2 pulse; `None` is `-y`, which returns the
    /// lock axis to `+z`.
    #[serde(default)]
    pub closing_phase: [Option<f64>; 2],
}

fn default_lock_rabi() -> f64 {
    DEFAULT_LOCK_RABI_HZ
}

impl SpinLock {
    pub fn new(a: &str, b: &str, duration: f64) -> Self {
        Self {
            spins: [a.into(), b.into()],
            duration,
            drives: [Drive::Resonant; 2],
            rabi_hz: DEFAULT_LOCK_RABI_HZ,
            closing_phase: [None; 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PulseElement {
    Rotation(Rotation),
    FreeEvolution { duration: f64 },
    SpinLockPair(SpinLock),
    /// Repolarizes the optical spin to `+z` and leaves the rest untouched.
    Laser { duration: f64 },
    /// Marks the spin whose `σz` is reported.
    ProjectiveReadout { spin: String },
}

impl PulseElement {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPulse(m));
        match self {
            PulseElement::Rotation(r) => {
                if !r.angle.is_finite() {
                    return bad(format!("non-finite angle on `{}`", r.spin));
                }
                r.duration().map(|_| ())
            }
            PulseElement::FreeEvolution { duration } | PulseElement::Laser { duration } => {
                if !(*duration >= 0.0) || !duration.is_finite() {
                    return bad(format!("duration must be finite and non-negative, got {duration}"));
                }
                Ok(())
            }
            PulseElement::SpinLockPair(l) => {
                if l.spins[0] == l.spins[1] {
                    return bad(format!("spin lock pairs `{}` with itself", l.spins[0]));
                }
                if !(l.duration >= 0.0) || !l.duration.is_finite() {
                    return bad(format!("lock duration must be finite and non-negative, got {}", l.duration));
                }
                if !(l.rabi_hz > 0.0) {
                    return bad("lock Rabi frequency must be positive".into());
                }
                Ok(())
            }
            PulseElement::ProjectiveReadout { .. } => Ok(()),
        }
    }
}
