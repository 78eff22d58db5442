use serde::{Deserialize, Serialize};

use super::trace::SweepParameter;
use crate::analysis::FitModel;
use crate::engine::{Drive, DEFAULT_LOCK_RABI_HZ};
use crate::error::{Error, Result};
use crate::network::{Manifold, Role, SpinNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SpinEcho,
    SedorEsr,
    SedorRamsey,
    HhcpTransfer,
    RabiChain,
    SpamCalibration,
    LaserDepolarization,
}

impl ExperimentKind {
    pub fn parameter(self) -> SweepParameter {
        match self {
            ExperimentKind::SpinEcho | ExperimentKind::SedorRamsey => SweepParameter::EchoTime,
            ExperimentKind::SedorEsr => SweepParameter::Frequency,
            ExperimentKind::HhcpTransfer => SweepParameter::LockDuration,
            ExperimentKind::RabiChain => SweepParameter::PulseLength,
            ExperimentKind::SpamCalibration => SweepParameter::Phase,
            ExperimentKind::LaserDepolarization => SweepParameter::LaserTime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValues {
    Values { values: Vec<f64> },
    Linspace { linspace: Linspace },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    /// Defaults to the kind's natural parameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<SweepParameter>,
    #[serde(flatten)]
    pub grid: SweepValues,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        match &self.grid {
            SweepValues::Values { values } => values.clone(),
            SweepValues::Linspace { linspace: l } => match l.points {
                0 => Vec::new(),
                1 => vec![l.start],
                n => (0..n).map(|k| l.start + (l.stop - l.start) * k as f64 / (n - 1) as f64).collect(),
            },
        }
    }

    pub fn linspace(start: f64, stop: f64, points: usize) -> Self {
        Self { parameter: None, grid: SweepValues::Linspace { linspace: Linspace { start, stop, points } } }
    }
}

fn default_rabi() -> f64 {
    0.5e6
}

fn default_lock_rabi() -> f64 {
    DEFAULT_LOCK_RABI_HZ
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixed {
    /// Echo time of a SEDOR-ESR sweep (s).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recoupling_time: Option<f64>,
    /// Rabi frequency of pulses on the target (Hz).
    #[serde(default = "default_rabi")]
    pub target_rabi_hz: f64,
    /// Finite probe pulses at this Rabi frequency; ideal when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_rabi_hz: Option<f64>,
    /// Treat the recoupling pulse as instantaneous and detuning-free.
    #[serde(default)]
    pub ideal_target_pulse: bool,
    #[serde(default = "default_lock_rabi")]
    pub lock_rabi_hz: f64,
}

impl Default for Fixed {
    fn default() -> Self {
        Self {
            recoupling_time: None,
            target_rabi_hz: default_rabi(),
            probe_rabi_hz: None,
            ideal_target_pulse: false,
            lock_rabi_hz: default_lock_rabi(),
        }
    }
}

fn one() -> f64 {
    1.0
}

/// Phenomenological gate and readout errors: each hop of the readout route
/// scales the signal by `iswap_fidelity`, and `readout_offset` is added to
/// the central-spin signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlErrors {
    #[serde(default = "one")]
    pub iswap_fidelity: f64,
    #[serde(default)]
    pub readout_offset: f64,
}

impl Default for ControlErrors {
    fn default() -> Self {
        Self { iswap_fidelity: 1.0, readout_offset: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpamSetting {
    /// Run the phase-sweep calibration on the first hop and map through it.
    #[default]
    Calibrate,
    Fixed { b0: f64, a0: f64 },
    /// Report the central-spin signal unmapped.
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct AnalysisSpec {
    #[serde(default)]
    pub fits: Vec<FitModel>,
    /// Write the periodogram alongside the trace.
    #[serde(default)]
    pub spectrum: bool,
    /// File stem of the periodogram; `<name>-spectrum` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum_name: Option<String>,
    #[serde(default)]
    pub fix_b0_zero: bool,
    /// Pin the decaying-cosine frequency to the periodogram peak.
    #[serde(default)]
    pub fix_d0_from_fft: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    pub probe: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub sweep: Sweep,
    #[serde(default)]
    pub fixed: Fixed,
    /// Spins from the probe to the optical spin; may be omitted when the
    /// probe is the optical spin.
    #[serde(default)]
    pub readout_route: Vec<String>,
    /// Hyperfine spins driven on both lines at once.
    #[serde(default)]
    pub drive_both_hyperfine: Vec<String>,
    /// Line addressed on other unpolarized hyperfine spins.
    #[serde(default = "default_line")]
    pub target_line: Manifold,
    #[serde(default)]
    pub control_errors: ControlErrors,
    #[serde(default)]
    pub spam: SpamSetting,
    #[serde(default = "yes")]
    pub decoherence: bool,
    /// Plateau division for SEDOR-ESR, unit start for HHCP; on by default
    /// for those kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_correction: Option<bool>,
    #[serde(default)]
    pub mask_sub_300ns: bool,
    /// Simulate these spins instead of the minimal set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<String>>,
    #[serde(default)]
    pub analysis: AnalysisSpec,
}

fn default_line() -> Manifold {
    Manifold::Down
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Minimal spec with defaults everywhere else.
    pub fn new(name: &str, kind: ExperimentKind, probe: &str, target: Option<&str>, sweep: Sweep) -> Self {
        Self {
            name: name.into(),
            kind,
            probe: probe.into(),
            target: target.map(Into::into),
            sweep,
            fixed: Fixed::default(),
            readout_route: Vec::new(),
            drive_both_hyperfine: Vec::new(),
            target_line: Manifold::Down,
            control_errors: ControlErrors::default(),
            spam: SpamSetting::default(),
            decoherence: true,
            baseline_correction: None,
            mask_sub_300ns: false,
            subset: None,
            analysis: AnalysisSpec::default(),
        }
    }

    pub fn parameter(&self) -> SweepParameter {
        self.sweep.parameter.unwrap_or(self.kind.parameter())
    }

    pub fn baseline_enabled(&self) -> bool {
        self.baseline_correction
            .unwrap_or(matches!(self.kind, ExperimentKind::SedorEsr | ExperimentKind::HhcpTransfer))
    }

    /// The readout route with the optical-probe shorthand expanded.
    pub fn route(&self, network: &SpinNetwork) -> Result<Vec<String>> {
        if self.readout_route.is_empty() {
            if network.spin(&self.probe)?.role == Role::OpticalCentral {
                return Ok(vec![self.probe.clone()]);
            }
            return Err(Error::InvalidExperiment(format!("{}: a dark probe needs a readout_route", self.name)));
        }
        Ok(self.readout_route.clone())
    }

    /// Spins receiving the recoupling pulse.
    pub fn targets(&self, network: &SpinNetwork) -> Vec<String> {
        match &self.target {
            Some(t) => vec![t.clone()],
            None if self.kind == ExperimentKind::SedorEsr => network
                .spins()
                .iter()
                .filter(|s| s.role == Role::Dark && s.label != self.probe)
                .filter(|s| self.subset.as_ref().is_none_or(|sub| sub.contains(&s.label)))
                .map(|s| s.label.clone())
                .collect(),
            None => Vec::new(),
        }
    }

    /// Simulated spins in network order.
    pub fn simulated_subset(&self, network: &SpinNetwork) -> Result<Vec<String>> {
        let mut need = self.route(network)?;
        need.push(self.probe.clone());
        need.extend(self.targets(network));
        if let Some(sub) = &self.subset {
            for s in &need {
                if !sub.contains(s) {
                    return Err(Error::InvalidExperiment(format!("{}: subset omits required spin `{s}`", self.name)));
                }
            }
            need = sub.clone();
        }
        for s in &need {
            network.index_of(s)?;
        }
        Ok(network.spins().iter().filter(|s| need.contains(&s.label)).map(|s| s.label.clone()).collect())
    }

    /// Drive used on `label`: both lines for listed or polarized spins,
    /// otherwise the configured line.
    pub fn drive_for(&self, network: &SpinNetwork, label: &str) -> Result<Drive> {
        let s = network.spin(label)?;
        if s.role == Role::OpticalCentral || !s.has_hyperfine() || self.drive_both_hyperfine.iter().any(|d| d == label) {
            return Ok(Drive::Resonant);
        }
        Ok(match s.nuclear_manifold.fixed() {
            Some(m) => Drive::Line(m),
            None => Drive::Line(self.target_line),
        })
    }

    pub fn validate(&self, network: &SpinNetwork) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidExperiment(format!("{}: {m}", self.name)));
        network.index_of(&self.probe)?;
        if let Some(t) = &self.target {
            network.index_of(t)?;
            if *t == self.probe {
                return bad("target equals probe".into());
            }
        }
        if let Some(p) = self.sweep.parameter {
            if p != self.kind.parameter() {
                return bad(format!("{:?} sweeps {:?}, not {:?}", self.kind, self.kind.parameter(), p));
            }
        }
        let values = self.sweep.values();
        if values.is_empty() {
            return bad("empty sweep".into());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return bad("non-finite sweep value".into());
        }
        let up = values.windows(2).all(|w| w[1] > w[0]);
        let down = values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return bad("sweep values must be strictly monotone".into());
        }
        if self.parameter().is_time() && values.iter().any(|&v| v < 0.0) {
            return bad("negative time in sweep".into());
        }
        let route = self.route(network)?;
        if route.first() != Some(&self.probe) {
            return bad("readout_route must start at the probe".into());
        }
        if route.last() != Some(&network.central().label) {
            return bad("readout_route must end at the optical spin".into());
        }
        for (k, s) in route.iter().enumerate() {
            network.index_of(s)?;
            if route[..k].contains(s) {
                return bad(format!("readout_route visits `{s}` twice"));
            }
        }
        for w in route.windows(2) {
            if network.coupling(&w[0], &w[1])? == 0.0 {
                return Err(Error::MissingCoupling(w[0].clone(), w[1].clone()));
            }
        }
        for s in &self.drive_both_hyperfine {
            network.index_of(s)?;
        }
        let eta = self.control_errors.iswap_fidelity;
        if !(eta > 0.0 && eta <= 1.0) || !self.control_errors.readout_offset.is_finite() {
            return bad("iswap_fidelity must lie in (0, 1] and readout_offset be finite".into());
        }
        if let SpamSetting::Fixed { a0, .. } = self.spam {
            if !(a0.abs() >= 1e-6) {
                return bad("fixed SPAM amplitude too small".into());
            }
        }
        for (name, v) in [("target_rabi_hz", self.fixed.target_rabi_hz), ("lock_rabi_hz", self.fixed.lock_rabi_hz)] {
            if !(v > 0.0) {
                return bad(format!("{name} must be positive"));
            }
        }
        if let Some(r) = self.fixed.probe_rabi_hz {
            if !(r > 0.0) {
                return bad("probe_rabi_hz must be positive".into());
            }
        }
        match self.kind {
            ExperimentKind::SedorEsr => {
                if !self.fixed.recoupling_time.is_some_and(|t| t > 0.0) {
                    return bad("sedor_esr needs a positive fixed.recoupling_time".into());
                }
                if self.targets(network).is_empty() {
                    return bad("no spin to recouple".into());
                }
            }
            ExperimentKind::SedorRamsey | ExperimentKind::HhcpTransfer => {
                if self.target.is_none() {
                    return bad(format!("{:?} needs a target", self.kind));
                }
            }
            ExperimentKind::RabiChain | ExperimentKind::LaserDepolarization => {
                if route.len() < 2 {
                    return bad("the driven spin must be a dark spin reached through the route".into());
                }
                if self.kind == ExperimentKind::LaserDepolarization && network.spin(&self.probe)?.coherence.t1_laser.is_none() {
                    return Err(Error::MissingBudget { spin: self.probe.clone(), budget: "t1_laser" });
                }
            }
            ExperimentKind::SpamCalibration => {
                if route.len() != 2 {
                    return bad("spam_calibration runs on a single hop to the optical spin".into());
                }
            }
            ExperimentKind::SpinEcho => {}
        }
        self.simulated_subset(network)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_forms() {
        let a: Sweep = serde_json::from_str(r#"{"values": [1, 2, 3]}"#).unwrap();
        assert_eq!(a.values(), vec![1.0, 2.0, 3.0]);
        let b: Sweep = serde_json::from_str(r#"{"parameter": "phase", "linspace": {"start": 0, "stop": 1, "points": 5}}"#).unwrap();
        assert_eq!(b.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(b.parameter, Some(SweepParameter::Phase));
    }

    #[test]
    fn spec_defaults() {
        let s: ExperimentSpec = serde_json::from_str(
            r#"{"name": "e", "kind": "spin_echo", "probe": "NV", "sweep": {"values": [0, 1e-6]}}"#,
        )
        .unwrap();
        assert!(s.decoherence);
        assert_eq!(s.spam, SpamSetting::Calibrate);
        assert_eq!(s.fixed.target_rabi_hz, 0.5e6);
        assert_eq!(s.control_errors.iswap_fidelity, 1.0);
        let back: ExperimentSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn spam_setting_forms() {
        let f: SpamSetting = serde_json::from_str(r#"{"fixed": {"b0": 0.016, "a0": -0.35}}"#).unwrap();
        assert_eq!(f, SpamSetting::Fixed { b0: 0.016, a0: -0.35 });
        let o: SpamSetting = serde_json::from_str(r#""off""#).unwrap();
        assert_eq!(o, SpamSetting::Off);
    }
}
