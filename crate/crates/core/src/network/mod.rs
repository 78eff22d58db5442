//! Spin network data model and rotating-frame Hamiltonians.
//!
//! A network is one optically readable central spin plus any number of dark
//! electron spins, each optionally carrying an I = 1/2 nucleus whose
//! hyperfine shift is treated as a classical label on the electron line.

mod hamiltonian;
mod hyperfine;

pub use hamiltonian::{build_static_hamiltonian, build_static_hamiltonian_in, Observable, Product};
pub use hyperfine::{defects_distinct, hyperfine_splitting, resonance_frequency};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{angular, GAMMA_E};

/// Minimum ratio between the Zeeman frequency and the strongest dipolar
/// coupling for the secular (ZZ-only) Hamiltonian to be accepted.
pub const SECULAR_RATIO: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    Up,
    Down,
}

impl Manifold {
    pub const BOTH: [Manifold; 2] = [Manifold::Down, Manifold::Up];

    /// Nuclear projection m_I.
    pub fn m_i(self) -> f64 {
        match self {
            Manifold::Up => 0.5,
            Manifold::Down => -0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NuclearManifold {
    Up,
    Down,
    /// Signals are averaged over both manifolds with equal weight.
    #[default]
    Unpolarized,
}

impl NuclearManifold {
    pub fn fixed(self) -> Option<Manifold> {
        match self {
            NuclearManifold::Up => Some(Manifold::Up),
            NuclearManifold::Down => Some(Manifold::Down),
            NuclearManifold::Unpolarized => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    OpticalCentral,
    Dark,
}

/// Measured line positions in the instrument frequency axis (Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinePair {
    pub down: f64,
    pub up: f64,
}

impl LinePair {
    pub fn get(&self, m: Manifold) -> f64 {
        match m {
            Manifold::Up => self.up,
            Manifold::Down => self.down,
        }
    }
}

/// Coherence budget of one spin. All times in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Coherence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_laser: Option<f64>,
}

impl Coherence {
    fn entries(&self) -> [(&'static str, Option<f64>); 4] {
        [("t2", self.t2), ("t1_rho", self.t1_rho), ("t1", self.t1), ("t1_laser", self.t1_laser)]
    }
}

fn default_gamma() -> f64 {
    GAMMA_E
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinDef {
    pub label: String,
    pub role: Role,
    /// Gyromagnetic ratio in rad s^-1 T^-1.
    #[serde(default = "default_gamma")]
    pub gamma_e: f64,
    #[serde(default)]
    pub hyperfine_a_perp_hz: f64,
    #[serde(default)]
    pub hyperfine_a_par_hz: f64,
    /// Polar angle between the field and the hyperfine principal axis.
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub nuclear_manifold: NuclearManifold,
    /// When present these replace the computed line positions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_lines_hz: Option<LinePair>,
    #[serde(default)]
    pub coherence: Coherence,
}

impl SpinDef {
    pub fn has_hyperfine(&self) -> bool {
        self.hyperfine_a_perp_hz > 0.0 || self.hyperfine_a_par_hz > 0.0 || self.observed_lines_hz.is_some()
    }

    pub fn splitting_hz(&self) -> f64 {
        hyperfine_splitting(self.hyperfine_a_perp_hz, self.hyperfine_a_par_hz, self.theta)
    }

    /// Manifolds this spin may occupy during a simulation run.
    pub fn manifolds(&self) -> Vec<Option<Manifold>> {
        if !self.has_hyperfine() {
            return vec![None];
        }
        match self.nuclear_manifold.fixed() {
            Some(m) => vec![Some(m)],
            None => Manifold::BOTH.iter().map(|&m| Some(m)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub a: String,
    pub b: String,
    pub d_hz: f64,
}

/// The on-disk layout; [`SpinNetwork`] is built from it after validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkFile {
    pub b0_tesla: f64,
    pub spins: Vec<SpinDef>,
    #[serde(default)]
    pub couplings: Vec<Coupling>,
}

/// A validated, immutable spin network.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinNetwork {
    b0: f64,
    spins: Vec<SpinDef>,
    couplings: BTreeMap<(usize, usize), f64>,
}

impl SpinNetwork {
    pub fn new(b0_tesla: f64, spins: Vec<SpinDef>, couplings: Vec<Coupling>) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidNetwork(m));
        if !(b0_tesla > 0.0) {
            return invalid(format!("B0 must be positive, got {b0_tesla}"));
        }
        let centrals = spins.iter().filter(|s| s.role == Role::OpticalCentral).count();
        if centrals != 1 {
            return invalid(format!("exactly one optical_central spin required, found {centrals}"));
        }
        for (k, s) in spins.iter().enumerate() {
            if spins[..k].iter().any(|o| o.label == s.label) {
                return invalid(format!("duplicate spin label `{}`", s.label));
            }
            if s.hyperfine_a_perp_hz < 0.0 || s.hyperfine_a_par_hz < 0.0 {
                return invalid(format!("spin `{}`: hyperfine components must be non-negative", s.label));
            }
            if !s.gamma_e.is_finite() || s.gamma_e == 0.0 {
                return invalid(format!("spin `{}`: gamma_e must be finite and non-zero", s.label));
            }
            for (name, t) in s.coherence.entries() {
                if let Some(t) = t {
                    if !(t > 0.0) {
                        return invalid(format!("spin `{}`: {name} must be strictly positive", s.label));
                    }
                }
            }
        }
        let index = |label: &str| spins.iter().position(|s| s.label == label);
        let mut map = BTreeMap::new();
        for c in &couplings {
            let (Some(i), Some(j)) = (index(&c.a), index(&c.b)) else {
                return invalid(format!("coupling {}-{} names an unknown spin", c.a, c.b));
            };
            if i == j {
                return invalid(format!("self-coupling on `{}`", c.a));
            }
            if !c.d_hz.is_finite() {
                return invalid(format!("coupling {}-{} is not finite", c.a, c.b));
            }
            let key = (i.min(j), i.max(j));
            if map.insert(key, c.d_hz).is_some() {
                return invalid(format!("coupling {}-{} listed twice", c.a, c.b));
            }
        }
        let max_d = map.values().fold(0.0f64, |m, d| m.max(d.abs()));
        for s in &spins {
            let zeeman = (s.gamma_e * b0_tesla).abs();
            if zeeman < SECULAR_RATIO * angular(max_d) {
                return invalid(format!(
                    "secular approximation violated for `{}`: |γB0| = {zeeman:.3e} rad/s vs max coupling {max_d:.3e} Hz",
                    s.label
                ));
            }
        }
        Ok(Self { b0: b0_tesla, spins, couplings: map })
    }

    pub fn from_file_model(file: NetworkFile) -> Result<Self> {
        Self::new(file.b0_tesla, file.spins, file.couplings)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file_model(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_file_model(&self) -> NetworkFile {
        NetworkFile {
            b0_tesla: self.b0,
            spins: self.spins.clone(),
            couplings: self
                .couplings
                .iter()
                .map(|(&(i, j), &d)| Coupling { a: self.spins[i].label.clone(), b: self.spins[j].label.clone(), d_hz: d })
                .collect(),
        }
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn spins(&self) -> &[SpinDef] {
        &self.spins
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.spins
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownSpin(label.to_string()))
    }

    pub fn spin(&self, label: &str) -> Result<&SpinDef> {
        Ok(&self.spins[self.index_of(label)?])
    }

    pub fn central(&self) -> &SpinDef {
        self.spins.iter().find(|s| s.role == Role::OpticalCentral).expect("validated")
    }

    /// Coupling in Hz; 0 when the pair is absent.
    pub fn coupling(&self, a: &str, b: &str) -> Result<f64> {
        let (i, j) = (self.index_of(a)?, self.index_of(b)?);
        Ok(self.couplings.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0))
    }

    /// Transition frequency of `label` in manifold `m` (Hz). Observed lines
    /// take precedence; spins without hyperfine structure ignore `m`.
    pub fn transition_frequency(&self, label: &str, m: Option<Manifold>) -> Result<f64> {
        let s = self.spin(label)?;
        if !s.has_hyperfine() {
            return Ok(bare_larmor_hz(s, self.b0));
        }
        let m = match m.or(s.nuclear_manifold.fixed()) {
            Some(m) => m,
            None => return Err(Error::UnresolvedManifold(label.to_string())),
        };
        match s.observed_lines_hz {
            Some(lines) => Ok(lines.get(m)),
            None => resonance_frequency(s, self.b0, m.into()),
        }
    }

    /// Every line of every dark spin, both manifolds; used for plateau estimation.
    pub fn dark_lines(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for s in self.spins.iter().filter(|s| s.role == Role::Dark) {
            if s.has_hyperfine() {
                for m in Manifold::BOTH {
                    out.extend(self.transition_frequency(&s.label, Some(m)).ok());
                }
            } else {
                out.push(bare_larmor_hz(s, self.b0));
            }
        }
        out
    }
}

impl From<Manifold> for NuclearManifold {
    fn from(m: Manifold) -> Self {
        match m {
            Manifold::Up => NuclearManifold::Up,
            Manifold::Down => NuclearManifold::Down,
        }
    }
}

pub(crate) fn bare_larmor_hz(s: &SpinDef, b0: f64) -> f64 {
    crate::units::hertz((s.gamma_e * b0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn spin(label: &str, role: Role) -> SpinDef {
        SpinDef {
            label: label.into(),
            role,
            gamma_e: GAMMA_E,
            hyperfine_a_perp_hz: 0.0,
            hyperfine_a_par_hz: 0.0,
            theta: 0.0,
            nuclear_manifold: NuclearManifold::Unpolarized,
            observed_lines_hz: None,
            coherence: Coherence::default(),
        }
    }

    fn pair(d: f64) -> Result<SpinNetwork> {
        SpinNetwork::new(
            0.0363,
            vec![spin("NV", Role::OpticalCentral), spin("X", Role::Dark)],
            vec![Coupling { a: "NV".into(), b: "X".into(), d_hz: d }],
        )
    }

    #[test]
    fn coupling_is_symmetric() {
        let net = pair(67e3).unwrap();
        assert_eq!(net.coupling("NV", "X").unwrap(), 67e3);
        assert_eq!(net.coupling("X", "NV").unwrap(), 67e3);
    }

    #[test]
    fn rejects_two_centrals() {
        let r = SpinNetwork::new(0.0363, vec![spin("A", Role::OpticalCentral), spin("B", Role::OpticalCentral)], vec![]);
        assert!(matches!(r, Err(Error::InvalidNetwork(_))));
    }

    #[test]
    fn rejects_self_and_duplicate_coupling() {
        let spins = vec![spin("NV", Role::OpticalCentral), spin("X", Role::Dark)];
        let selfc = vec![Coupling { a: "X".into(), b: "X".into(), d_hz: 1.0 }];
        assert!(SpinNetwork::new(0.0363, spins.clone(), selfc).is_err());
        let dup = vec![
            Coupling { a: "X".into(), b: "NV".into(), d_hz: 1.0 },
            Coupling { a: "NV".into(), b: "X".into(), d_hz: 1.0 },
        ];
        assert!(SpinNetwork::new(0.0363, spins, dup).is_err());
    }

    #[test]
    fn rejects_nonpositive_coherence() {
        let mut x = spin("X", Role::Dark);
        x.coherence.t2 = Some(0.0);
        assert!(SpinNetwork::new(0.0363, vec![spin("NV", Role::OpticalCentral), x], vec![]).is_err());
    }

    #[test]
    fn secular_guard() {
        // γB0/2π ≈ 1.017 GHz, so the limit is ≈ 10.17 MHz of coupling
        assert!(pair(10.0e6).is_ok());
        assert!(matches!(pair(10.5e6), Err(Error::InvalidNetwork(m)) if m.contains("secular")));
    }

    #[test]
    fn unpolarized_needs_manifold() {
        let mut x = spin("X", Role::Dark);
        x.hyperfine_a_par_hz = 10e6;
        x.hyperfine_a_perp_hz = 10e6;
        let net = SpinNetwork::new(0.0363, vec![spin("NV", Role::OpticalCentral), x], vec![]).unwrap();
        assert!(matches!(net.transition_frequency("X", None), Err(Error::UnresolvedManifold(_))));
        let up = net.transition_frequency("X", Some(Manifold::Up)).unwrap();
        let down = net.transition_frequency("X", Some(Manifold::Down)).unwrap();
        assert!((up - down - 10e6).abs() < 1e-3);
    }
}
