use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};

use super::spec::{ExperimentKind, ExperimentSpec};
use super::trace::Exposure;
use crate::engine::{Drive, PulseAxis, PulseElement, Rotation, SpinLock};
use crate::error::Result;
use crate::network::SpinNetwork;

/// Closing phase of the dark spin in the first initialization hop, relative
/// to which the calibration phase is swept.
pub const INIT_CLOSING_PHASE: f64 = FRAC_PI_2;

/// One sweep point ready for the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledPoint {
    pub program: Vec<PulseElement>,
    pub exposure: Exposure,
    /// Route iSWAPs, initialization plus readout.
    pub hops: usize,
    /// Every spin held under spin lock at some point.
    pub locked: BTreeSet<String>,
}

struct Builder<'a> {
    net: &'a SpinNetwork,
    spec: &'a ExperimentSpec,
    point: CompiledPoint,
}

impl<'a> Builder<'a> {
    fn push(&mut self, e: PulseElement) {
        self.point.program.push(e);
    }

    fn lock(&mut self, a: &str, b: &str, duration: f64, closing_b: Option<f64>) -> Result<()> {
        let mut l = SpinLock::new(a, b, duration);
        l.drives = [self.spec.drive_for(self.net, a)?, self.spec.drive_for(self.net, b)?];
        l.rabi_hz = self.spec.fixed.lock_rabi_hz;
        l.closing_phase[1] = closing_b;
        self.point.exposure.lock += duration;
        self.point.locked.insert(a.into());
        self.point.locked.insert(b.into());
        self.push(PulseElement::SpinLockPair(l));
        Ok(())
    }

    fn hop(&mut self, from: &str, to: &str, closing_to: Option<f64>) -> Result<()> {
        let d = self.net.coupling(from, to)?;
        self.point.hops += 1;
        self.lock(from, to, 1.0 / (2.0 * d.abs()), closing_to)
    }

    /// Moves the optical spin's polarization out to the probe.
    fn initialize(&mut self, route: &[String], phase: f64) -> Result<()> {
        for h in (1..route.len()).rev() {
            let closing = (h == route.len() - 1).then_some(INIT_CLOSING_PHASE + phase);
            self.hop(&route[h], &route[h - 1], closing)?;
        }
        Ok(())
    }

    fn read_out(&mut self, route: &[String]) -> Result<()> {
        for w in route.windows(2) {
            self.hop(&w[0], &w[1], None)?;
        }
        self.push(PulseElement::ProjectiveReadout { spin: self.net.central().label.clone() });
        Ok(())
    }

    fn probe_pulse(&self, axis: PulseAxis, angle: f64) -> Result<PulseElement> {
        let probe = &self.spec.probe;
        Ok(PulseElement::Rotation(match self.spec.fixed.probe_rabi_hz {
            Some(r) => Rotation::finite(probe, axis, angle, self.spec.drive_for(self.net, probe)?, r),
            None => Rotation::ideal(probe, axis, angle),
        }))
    }

    fn target_pulse(&self, target: &str, drive: Drive) -> PulseElement {
        let f = &self.spec.fixed;
        if f.ideal_target_pulse {
            PulseElement::Rotation(Rotation::ideal(target, PulseAxis::X, PI))
        } else {
            PulseElement::Rotation(Rotation::finite(target, PulseAxis::X, PI, drive, f.target_rabi_hz))
        }
    }

    /// Hahn echo on the probe of total free time `t`, with `recouple`
    /// applied together with the refocusing pulse.
    fn echo(&mut self, t: f64, recouple: Vec<PulseElement>) -> Result<()> {
        self.push(self.probe_pulse(PulseAxis::Y, FRAC_PI_2)?);
        self.push(PulseElement::FreeEvolution { duration: t / 2.0 });
        self.push(self.probe_pulse(PulseAxis::X, PI)?);
        for p in recouple {
            self.push(p);
        }
        self.push(PulseElement::FreeEvolution { duration: t / 2.0 });
        self.push(self.probe_pulse(PulseAxis::MinusY, FRAC_PI_2)?);
        self.point.exposure.echo += t;
        Ok(())
    }
}

/// Pulse program for one sweep value. The spec is assumed validated.
pub fn compile_point(network: &SpinNetwork, spec: &ExperimentSpec, value: f64) -> Result<CompiledPoint> {
    let route = spec.route(network)?;
    let mut b = Builder {
        net: network,
        spec,
        point: CompiledPoint { program: Vec::new(), exposure: Exposure::default(), hops: 0, locked: BTreeSet::new() },
    };
    let calibration_phase = if spec.kind == ExperimentKind::SpamCalibration { value } else { 0.0 };
    b.initialize(&route, calibration_phase)?;
    match spec.kind {
        ExperimentKind::SpinEcho => b.echo(value, Vec::new())?,
        ExperimentKind::SedorEsr => {
            let pulses = spec.targets(network).iter().map(|t| b.target_pulse(t, Drive::Frequency(value))).collect();
            b.echo(spec.fixed.recoupling_time.expect("validated"), pulses)?;
        }
        ExperimentKind::SedorRamsey => {
            let t = spec.target.as_deref().expect("validated");
            let pulse = b.target_pulse(t, spec.drive_for(network, t)?);
            b.echo(value, vec![pulse])?;
        }
        ExperimentKind::HhcpTransfer => {
            let t = spec.target.as_deref().expect("validated");
            b.lock(&spec.probe, t, value, None)?;
        }
        ExperimentKind::RabiChain => {
            let f = &spec.fixed;
            let drive = spec.drive_for(network, &spec.probe)?;
            let angle = 2.0 * PI * f.target_rabi_hz * value;
            b.push(PulseElement::Rotation(Rotation::finite(&spec.probe, PulseAxis::X, angle, drive, f.target_rabi_hz)));
        }
        ExperimentKind::SpamCalibration => {}
        ExperimentKind::LaserDepolarization => {
            b.push(PulseElement::Laser { duration: value });
            b.point.exposure.laser += value;
        }
    }
    b.read_out(&route)?;
    Ok(b.point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::spec::Sweep;

    fn net() -> SpinNetwork {
        SpinNetwork::from_json(include_str!("../../../../networks/nv-x-y.json")).unwrap()
    }

    #[test]
    fn chain_lock_exposure_is_four_hops() {
        let n = net();
        let mut s = ExperimentSpec::new("rabi", ExperimentKind::RabiChain, "Y", None, Sweep::linspace(0.0, 4e-6, 5));
        s.readout_route = vec!["Y".into(), "X".into(), "NV".into()];
        let p = compile_point(&n, &s, 1e-6).unwrap();
        let want = 2.0 * (1.0 / (2.0 * 67e3) + 1.0 / (2.0 * 20e3));
        assert_eq!(p.exposure.lock, want);
        assert_eq!(p.hops, 4);
        assert_eq!(p.exposure.echo, 0.0);
    }

    #[test]
    fn echo_program_shape() {
        let n = net();
        let s = ExperimentSpec::new("e", ExperimentKind::SedorRamsey, "NV", Some("X"), Sweep::linspace(0.0, 1e-5, 3));
        let p = compile_point(&n, &s, 1e-5).unwrap();
        assert_eq!(p.hops, 0);
        assert_eq!(p.exposure.echo, 1e-5);
        let rotations = p.program.iter().filter(|e| matches!(e, PulseElement::Rotation(_))).count();
        assert_eq!(rotations, 4);
    }
}
