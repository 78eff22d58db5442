use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::DecayKind;
use crate::error::{Error, Result};

/// Largest |ordinate| accepted in a signal trace.
pub const ORDINATE_LIMIT: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    EchoTime,
    Frequency,
    LockDuration,
    PulseLength,
    Phase,
    LaserTime,
}

impl SweepParameter {
    pub fn unit(self) -> &'static str {
        match self {
            SweepParameter::Frequency => "Hz",
            SweepParameter::Phase => "rad",
            _ => "s",
        }
    }

    pub fn is_time(self) -> bool {
        self.unit() == "s"
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::EchoTime => "echo_time",
            SweepParameter::Frequency => "frequency",
            SweepParameter::LockDuration => "lock_duration",
            SweepParameter::PulseLength => "pulse_length",
            SweepParameter::Phase => "phase",
            SweepParameter::LaserTime => "laser_time",
        }
    }
}

/// Time a point spent in each decay channel (s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Exposure {
    pub echo: f64,
    pub lock: f64,
    pub laser: f64,
}

impl Exposure {
    pub fn get(&self, kind: DecayKind) -> f64 {
        match kind {
            DecayKind::Echo => self.echo,
            DecayKind::Lock => self.lock,
            DecayKind::Laser => self.laser,
        }
    }
}

/// What the ordinate measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `⟨σz⟩` of the optical spin.
    #[default]
    CentralSigmaZ,
    /// Probe `⟨σz⟩` recovered through the calibrated readout map.
    ProbeSigmaZ,
    /// Signal divided by its off-resonance plateau.
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalTrace {
    pub parameter: SweepParameter,
    pub abscissa: Vec<f64>,
    pub ordinate: Vec<f64>,
    /// Empty when unknown, otherwise one entry per point.
    #[serde(default)]
    pub exposures: Vec<Exposure>,
    #[serde(default)]
    pub quantity: Quantity,
    /// Value the signal relaxes to under decoherence.
    #[serde(default)]
    pub asymptote: f64,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

impl SignalTrace {
    pub fn new(parameter: SweepParameter, abscissa: Vec<f64>, ordinate: Vec<f64>) -> Result<Self> {
        let t = Self {
            parameter,
            abscissa,
            ordinate,
            exposures: Vec::new(),
            quantity: Quantity::default(),
            asymptote: 0.0,
            meta: BTreeMap::new(),
        };
        t.check_shape()?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    pub fn unit(&self) -> &'static str {
        self.parameter.unit()
    }

    pub fn check_shape(&self) -> Result<()> {
        if self.abscissa.len() != self.ordinate.len() {
            return Err(Error::InvalidTrace(format!(
                "{} abscissa values but {} ordinate values",
                self.abscissa.len(),
                self.ordinate.len()
            )));
        }
        if !self.exposures.is_empty() && self.exposures.len() != self.abscissa.len() {
            return Err(Error::InvalidTrace("exposure metadata length differs from trace length".into()));
        }
        if self.abscissa.iter().chain(&self.ordinate).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTrace("non-finite value".into()));
        }
        Ok(())
    }

    /// Shape check plus the bound on |ordinate|.
    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        if let Some(y) = self.ordinate.iter().find(|y| y.abs() > ORDINATE_LIMIT) {
            return Err(Error::InvalidTrace(format!("ordinate {y} outside ±{ORDINATE_LIMIT}")));
        }
        Ok(())
    }

    /// Keeps only points whose index passes `keep`.
    pub fn retain_points(&mut self, keep: impl Fn(usize, f64) -> bool) {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i, self.abscissa[i])).collect();
        self.abscissa = idx.iter().map(|&i| self.abscissa[i]).collect();
        self.ordinate = idx.iter().map(|&i| self.ordinate[i]).collect();
        if !self.exposures.is_empty() {
            self.exposures = idx.iter().map(|&i| self.exposures[i]).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_errors() {
        assert!(SignalTrace::new(SweepParameter::Phase, vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(SignalTrace::new(SweepParameter::Phase, vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn ordinate_bound() {
        let t = SignalTrace::new(SweepParameter::Phase, vec![0.0, 1.0], vec![0.0, 1.3]).unwrap();
        assert!(t.validate().is_err());
    }

    #[test]
    fn retain_keeps_metadata_aligned() {
        let mut t = SignalTrace::new(SweepParameter::EchoTime, vec![1e-7, 2e-7, 4e-7], vec![0.1, 0.2, 0.3]).unwrap();
        t.exposures = vec![Exposure { echo: 1.0, ..Default::default() }, Exposure::default(), Exposure { echo: 3.0, ..Default::default() }];
        t.retain_points(|_, x| x >= 3e-7 || x < 1.5e-7);
        assert_eq!(t.ordinate, vec![0.1, 0.3]);
        assert_eq!(t.exposures[1].echo, 3.0);
    }
}
