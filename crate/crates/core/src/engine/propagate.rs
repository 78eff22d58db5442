use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use super::pulse::{Drive, PulseElement, Rotation, SpinLock};
use super::state::{expectation, initial_state_with_frames, DensityState};
use crate::error::{Error, Result};
use crate::network::{build_static_hamiltonian_in, Manifold, Observable, SpinNetwork};
use crate::ops::{embed, embed_pair, pauli, propagator, rotation, Axis, Op, C64};
use crate::units::angular;

/// Applies pulse elements for one assignment of nuclear manifolds.
///
/// Between pulses each spin sits in the frame of its own current line, so
/// free evolution carries only the dipolar terms.
#[derive(Debug, Clone)]
pub struct Engine<'a> {
    network: &'a SpinNetwork,
    manifolds: BTreeMap<String, Manifold>,
}

impl<'a> Engine<'a> {
    pub fn new(network: &'a SpinNetwork) -> Self {
        Self { network, manifolds: BTreeMap::new() }
    }

    pub fn with_manifolds(network: &'a SpinNetwork, manifolds: BTreeMap<String, Manifold>) -> Self {
        Self { network, manifolds }
    }

    pub fn network(&self) -> &SpinNetwork {
        self.network
    }

    fn manifold(&self, label: &str) -> Option<Manifold> {
        self.manifolds.get(label).copied()
    }

    /// Current line of `label` (Hz).
    pub fn line_hz(&self, label: &str) -> Result<f64> {
        self.network.transition_frequency(label, self.manifold(label))
    }

    /// Offset of the spin's current line from the drive (Hz).
    pub fn detuning_hz(&self, label: &str, drive: Drive) -> Result<f64> {
        match drive {
            Drive::Resonant => Ok(0.0),
            Drive::Line(m) => Ok(self.line_hz(label)? - self.network.transition_frequency(label, Some(m))?),
            Drive::Frequency(f) => Ok(self.line_hz(label)? - f),
        }
    }

    pub fn initial_state(&self, subset: &[&str], polarized: &str) -> Result<DensityState> {
        let frames = subset.iter().map(|l| self.line_hz(l)).collect::<Result<Vec<_>>>()?;
        initial_state_with_frames(self.network, subset, polarized, frames)
    }

    /// Dipolar Hamiltonian of the register in the resonant frames.
    pub fn free_hamiltonian(&self, state: &DensityState) -> Result<Op> {
        let order: Vec<&str> = state.spin_order().iter().map(String::as_str).collect();
        let manifolds: Vec<Option<Manifold>> = order.iter().map(|l| self.manifold(l)).collect();
        let frames = order.iter().map(|l| self.line_hz(l)).collect::<Result<Vec<_>>>()?;
        build_static_hamiltonian_in(self.network, &order, &frames, &manifolds)
    }

    pub fn evolve(&self, state: &DensityState, duration: f64) -> Result<DensityState> {
        if duration == 0.0 {
            return Ok(state.clone());
        }
        super::state::evolve_free(state, &self.free_hamiltonian(state)?, duration)
    }

    /// Single-spin rotation. Finite pulses evolve under
    /// `½(Ω σ_φ + Δ σz)` for `angle / Ω`; couplings are neglected for the
    /// pulse length. Ideal pulses ignore detuning.
    pub fn apply_rotation(&self, state: &DensityState, r: &Rotation) -> Result<DensityState> {
        PulseElement::Rotation(r.clone()).validate()?;
        let site = state.site(&r.spin)?;
        let phi = r.axis.radians();
        let u = if r.ideal {
            rotation([phi.cos(), phi.sin(), 0.0], r.angle)
        } else {
            let omega = angular(r.rabi_hz.expect("validated"));
            let delta = angular(match r.detuning_override_hz {
                Some(d) => d,
                None => self.detuning_hz(&r.spin, r.drive)?,
            });
            let w = omega.hypot(delta);
            let t = r.duration()?;
            rotation([omega * phi.cos(), omega * phi.sin(), delta], w * t)
        };
        Ok(state.transform(&embed(&u, site, state.n_spins())))
    }

    /// Hartmann-Hahn block. A spin whose drive misses its current line by
    /// more than the lock Rabi frequency is not locked; the exchange only
    /// runs when both are.
    pub fn apply_spin_lock_pair(&self, state: &DensityState, lock: &SpinLock) -> Result<DensityState> {
        PulseElement::SpinLockPair(lock.clone()).validate()?;
        let n = state.n_spins();
        let sites = [state.site(&lock.spins[0])?, state.site(&lock.spins[1])?];
        let mut locked = [false; 2];
        for k in 0..2 {
            locked[k] = self.detuning_hz(&lock.spins[k], lock.drives[k])?.abs() <= lock.rabi_hz;
        }
        let mut s = state.clone();
        for k in 0..2 {
            if locked[k] {
                s = s.transform(&embed(&rotation([0.0, 1.0, 0.0], FRAC_PI_2), sites[k], n));
            }
        }
        if locked[0] && locked[1] && lock.duration > 0.0 {
            let d = self.network.coupling(&lock.spins[0], &lock.spins[1])?;
            // flip-flop about the lock axis (x): σyσy + σzσz
            let h = (embed_pair(&pauli(Axis::Y), sites[0], &pauli(Axis::Y), sites[1], n)
                + embed_pair(&pauli(Axis::Z), sites[0], &pauli(Axis::Z), sites[1], n))
                * C64::new(angular(d) / 4.0, 0.0);
            s = s.transform(&propagator(&h, lock.duration));
        }
        for k in 0..2 {
            if locked[k] {
                let phi = lock.closing_phase[k].unwrap_or(-FRAC_PI_2);
                s = s.transform(&embed(&rotation([phi.cos(), phi.sin(), 0.0], FRAC_PI_2), sites[k], n));
            }
        }
        Ok(s)
    }

    /// Resets the optical spin to `+z`, keeping the reduced state of the rest.
    pub fn apply_laser(&self, state: &DensityState) -> Result<DensityState> {
        let central = &self.network.central().label;
        let site = state.site(central)?;
        let n = state.n_spins();
        let bit = 1usize << (n - site - 1);
        let dim = 1usize << n;
        let mut out = Op::zeros(dim, dim);
        let rho = state.matrix();
        for r in (0..dim).filter(|r| r & bit == 0) {
            for c in (0..dim).filter(|c| c & bit == 0) {
                out[(r, c)] = rho[(r, c)] + rho[(r | bit, c | bit)];
            }
        }
        Ok(state.with_matrix(out))
    }

    pub fn apply(&self, state: &DensityState, element: &PulseElement) -> Result<DensityState> {
        element.validate()?;
        match element {
            PulseElement::Rotation(r) => self.apply_rotation(state, r),
            PulseElement::FreeEvolution { duration } => self.evolve(state, *duration),
            PulseElement::SpinLockPair(l) => self.apply_spin_lock_pair(state, l),
            PulseElement::Laser { .. } => self.apply_laser(state),
            PulseElement::ProjectiveReadout { spin } => {
                state.site(spin)?;
                Ok(state.clone())
            }
        }
    }

    pub fn run(&self, state: &DensityState, program: &[PulseElement]) -> Result<DensityState> {
        let mut s = state.clone();
        for el in program {
            s = self.apply(&s, el)?;
        }
        Ok(s)
    }

    /// Runs `program` from the polarized initial state and returns `⟨σz⟩`
    /// of the last `ProjectiveReadout` spin (the polarized spin if none).
    pub fn simulate(&self, subset: &[&str], polarized: &str, program: &[PulseElement]) -> Result<f64> {
        let out = self.run(&self.initial_state(subset, polarized)?, program)?;
        let readout = program
            .iter()
            .rev()
            .find_map(|e| match e {
                PulseElement::ProjectiveReadout { spin } => Some(spin.as_str()),
                _ => None,
            })
            .unwrap_or(polarized);
        expectation(&out, &Observable::single(readout, Axis::Z))
    }
}

/// Every combination of manifolds for the unpolarized hyperfine spins in
/// `subset`, each with equal weight.
pub fn manifold_assignments(network: &SpinNetwork, subset: &[&str]) -> Result<Vec<BTreeMap<String, Manifold>>> {
    let mut out = vec![BTreeMap::new()];
    for label in subset {
        let spin = network.spin(label)?;
        let options = spin.manifolds();
        if options.len() < 2 {
            continue;
        }
        out = out
            .into_iter()
            .flat_map(|base| {
                options.iter().map(move |m| {
                    let mut next = base.clone();
                    next.insert(label.to_string(), m.expect("hyperfine spins list explicit manifolds"));
                    next
                })
            })
            .collect();
    }
    Ok(out)
}

/// Equal-weight average of `f` over [`manifold_assignments`].
pub fn average_over_manifolds<F>(network: &SpinNetwork, subset: &[&str], f: F) -> Result<f64>
where
    F: Fn(&Engine) -> Result<f64>,
{
    let combos = manifold_assignments(network, subset)?;
    let mut acc = 0.0;
    for m in &combos {
        acc += f(&Engine::with_manifolds(network, m.clone()))?;
    }
    Ok(acc / combos.len() as f64)
}

/// Rotation with the spins in their configured manifolds.
pub fn apply_rotation(state: &DensityState, r: &Rotation, network: &SpinNetwork) -> Result<DensityState> {
    Engine::new(network).apply_rotation(state, r)
}

/// Resonant Hartmann-Hahn exchange between `a` and `b` for `duration` seconds.
pub fn apply_spin_lock_pair(state: &DensityState, a: &str, b: &str, duration: f64, network: &SpinNetwork) -> Result<DensityState> {
    if network.coupling(a, b)? == 0.0 {
        return Err(Error::MissingCoupling(a.into(), b.into()));
    }
    Engine::new(network).apply_spin_lock_pair(state, &SpinLock::new(a, b, duration))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::pulse::PulseAxis;
    use crate::engine::state::initial_state;
    use crate::network::{Coherence, Coupling, LinePair, NuclearManifold, Role, SpinDef};
    use crate::ops::is_hermitian;
    use crate::units::GAMMA_E;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn spin(label: &str, role: Role) -> SpinDef {
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

    fn chain() -> SpinNetwork {
        let mut x = spin("X", Role::Dark);
        x.observed_lines_hz = Some(LinePair { down: 47.0e6, up: 73.5e6 });
        SpinNetwork::new(
            0.0363,
            vec![spin("NV", Role::OpticalCentral), x, spin("Y", Role::Dark)],
            vec![
                Coupling { a: "NV".into(), b: "X".into(), d_hz: 67e3 },
                Coupling { a: "X".into(), b: "Y".into(), d_hz: 20e3 },
            ],
        )
        .unwrap()
    }

    fn sz(state: &DensityState, s: &str) -> f64 {
        expectation(state, &Observable::single(s, Axis::Z)).unwrap()
    }

    #[test]
    fn pi_pulse_flips_probe() {
        let net = chain();
        let rho = initial_state(&net, &["NV"], "NV").unwrap();
        let out = apply_rotation(&rho, &Rotation::ideal("NV", PulseAxis::X, PI), &net).unwrap();
        assert!((sz(&out, "NV") + 1.0).abs() < 1e-12);
    }

    #[test]
    fn finite_pulse_with_detuning_equal_to_rabi() {
        // z→z element of a rotation about the 45° tilted axis: (1 + cos(√2 π))/2
        let net = chain();
        let rho = initial_state(&net, &["NV"], "NV").unwrap();
        let mut r = Rotation::finite("NV", PulseAxis::X, PI, Drive::Resonant, 0.5e6);
        r.detuning_override_hz = Some(0.5e6);
        let out = Engine::new(&net).apply_rotation(&rho, &r).unwrap();
        assert!((sz(&out, "NV") - 0.366_872_328_979_29).abs() < 1e-12);
    }

    #[test]
    fn lock_transfers_polarization_at_half_period() {
        let net = chain();
        let rho = initial_state(&net, &["NV", "Y"], "NV").unwrap();
        // NV-Y is uncoupled
        assert!(matches!(apply_spin_lock_pair(&rho, "NV", "Y", 1e-6, &net), Err(Error::MissingCoupling(..))));
        let e = Engine::with_manifolds(&net, [("X".to_string(), Manifold::Down)].into());
        let rho = e.initial_state(&["NV", "X"], "NV").unwrap();
        let d = 67e3;
        for k in 0..12 {
            let l = k as f64 * 1.3e-6;
            let out = e.apply_spin_lock_pair(&rho, &SpinLock::new("NV", "X", l)).unwrap();
            let want_x = 0.5 * (1.0 - (2.0 * PI * d * l).cos());
            assert!((sz(&out, "X") - want_x).abs() < 1e-10, "L={l}");
            assert!((sz(&out, "NV") + sz(&out, "X") - 1.0).abs() < 1e-10);
        }
        let full = e.apply_spin_lock_pair(&rho, &SpinLock::new("NV", "X", 1.0 / (2.0 * d))).unwrap();
        assert!((sz(&full, "X") - 1.0).abs() < 1e-10);
    }

    #[test]
    fn off_resonant_partner_blocks_exchange() {
        let net = chain();
        let e = Engine::with_manifolds(&net, [("X".to_string(), Manifold::Up)].into());
        let rho = e.initial_state(&["NV", "X"], "NV").unwrap();
        let mut lock = SpinLock::new("NV", "X", 1.0 / (2.0 * 67e3));
        lock.drives[1] = Drive::Line(Manifold::Down);
        let out = e.apply_spin_lock_pair(&rho, &lock).unwrap();
        assert!((sz(&out, "NV") - 1.0).abs() < 1e-12);
        assert!(sz(&out, "X").abs() < 1e-12);
    }

    #[test]
    fn laser_resets_only_the_optical_spin() {
        let net = chain();
        let e = Engine::with_manifolds(&net, [("X".to_string(), Manifold::Down)].into());
        let rho = e.initial_state(&["NV", "X"], "NV").unwrap();
        let moved = e.apply_spin_lock_pair(&rho, &SpinLock::new("NV", "X", 1.0 / (2.0 * 67e3))).unwrap();
        assert!((sz(&moved, "NV") + 0.0).abs() < 1e-10);
        let lit = e.apply_laser(&moved).unwrap();
        assert!((sz(&lit, "NV") - 1.0).abs() < 1e-12);
        assert!((sz(&lit, "X") - 1.0).abs() < 1e-10);
        assert!((lit.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn assignments_enumerate_unpolarized_spins() {
        let net = chain();
        assert_eq!(manifold_assignments(&net, &["NV", "X"]).unwrap().len(), 2);
        assert_eq!(manifold_assignments(&net, &["NV", "Y"]).unwrap().len(), 1);
    }

    proptest! {
        #[test]
        fn pulses_preserve_trace_and_hermiticity(angle in -7.0f64..7.0, phase in -4.0f64..4.0, det in -2e6f64..2e6, l in 0.0f64..2e-5) {
            let net = chain();
            let e = Engine::with_manifolds(&net, [("X".to_string(), Manifold::Down)].into());
            let rho = e.initial_state(&["NV", "X", "Y"], "NV").unwrap();
            let mut r = Rotation::finite("X", PulseAxis::Phase(phase), angle, Drive::Resonant, 0.5e6);
            r.detuning_override_hz = Some(det);
            let mut s = e.apply_rotation(&rho, &r).unwrap();
            s = e.apply_spin_lock_pair(&s, &SpinLock::new("NV", "X", l)).unwrap();
            s = e.evolve(&s, l).unwrap();
            prop_assert!((s.matrix().trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
            prop_assert!(is_hermitian(s.matrix(), 1e-10));
            prop_assert!((s.purity() - rho.purity()).abs() < 1e-10);
        }
    }
}
