use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::compile::{compile_point, CompiledPoint};
use super::spec::{AnalysisSpec, ExperimentKind, ExperimentSpec, SpamSetting, Sweep};
use super::trace::{Quantity, SignalTrace};
use crate::analysis::{baseline_offset_hhcp, fit_cosine, spam_map};
use crate::engine::{apply_decay_envelope, average_over_manifolds, nv_readout_map, DecayKind, ReadoutModel};
use crate::error::{Error, Result};
use crate::network::SpinNetwork;

/// Points below this are dropped when masking short times.
pub const SHORT_TIME_MASK: f64 = 300e-9;
/// Fraction of points, farthest from any known line, that define the
/// SEDOR-ESR plateau.
pub const PLATEAU_FRACTION: f64 = 0.2;
/// Phase window and density of the readout calibration.
pub const CALIBRATION_SPAN: f64 = 3.0 * PI;
pub const CALIBRATION_POINTS: usize = 61;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunOptions {
    pub seed: u64,
    /// Gaussian readout noise in units of the central-spin `⟨σz⟩`.
    pub noise_sigma: f64,
    pub mask_sub_300ns: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trace: SignalTrace,
    /// `(b0, A0)` used to map into the probe frame.
    pub spam: Option<(f64, f64)>,
    pub calibration: Option<SignalTrace>,
}

fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn ideal_points(network: &SpinNetwork, spec: &ExperimentSpec, values: &[f64]) -> Result<Vec<(f64, CompiledPoint)>> {
    let subset = spec.simulated_subset(network)?;
    let subset: Vec<&str> = subset.iter().map(String::as_str).collect();
    let central = network.central().label.as_str();
    values
        .par_iter()
        .map(|&v| {
            let point = compile_point(network, spec, v)?;
            let y = average_over_manifolds(network, &subset, |e| e.simulate(&subset, central, &point.program))?;
            Ok((y, point))
        })
        .collect()
}

/// Phase-sweep calibration on the first hop of `spec`'s route.
pub fn calibration_spec(network: &SpinNetwork, spec: &ExperimentSpec) -> Result<ExperimentSpec> {
    let route = spec.route(network)?;
    if route.len() < 2 {
        return Err(Error::InvalidExperiment(format!("{}: no hop to calibrate", spec.name)));
    }
    let first = route[route.len() - 2].clone();
    let mut cal = ExperimentSpec::new(
        &format!("{}/spam", spec.name),
        ExperimentKind::SpamCalibration,
        &first,
        None,
        Sweep::linspace(0.0, CALIBRATION_SPAN, CALIBRATION_POINTS),
    );
    cal.readout_route = vec![first, network.central().label.clone()];
    cal.fixed = spec.fixed.clone();
    cal.drive_both_hyperfine = spec.drive_both_hyperfine.clone();
    cal.target_line = spec.target_line;
    cal.control_errors = spec.control_errors;
    cal.decoherence = spec.decoherence;
    cal.spam = SpamSetting::Off;
    cal.analysis = AnalysisSpec::default();
    Ok(cal)
}

/// Noise-free `(b0, A0)` of the first hop: the two calibration extremes.
fn ideal_frame(network: &SpinNetwork, spec: &ExperimentSpec) -> Result<(f64, f64)> {
    let cal = calibration_spec(network, spec)?;
    let pts = ideal_points(network, &cal, &[0.0, PI])?;
    let (v0, vpi) = (pts[0].0, pts[1].0);
    Ok((0.5 * (v0 + vpi), 0.5 * (v0 - vpi)))
}

fn min_budget<'a>(network: &SpinNetwork, spins: impl Iterator<Item = &'a String>, pick: fn(&crate::network::Coherence) -> Option<f64>) -> Option<f64> {
    spins
        .filter_map(|s| network.spin(s).ok().and_then(|d| pick(&d.coherence)))
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))))
}

/// Central-spin signal with decoherence, control errors and noise.
fn central_signal(network: &SpinNetwork, spec: &ExperimentSpec, opts: &RunOptions) -> Result<SignalTrace> {
    let values = spec.sweep.values();
    let pts = ideal_points(network, spec, &values)?;
    let hops = pts.first().map_or(0, |p| p.1.hops);
    let (b0, a0) = if hops > 0 { ideal_frame(network, spec)? } else { (0.0, 1.0) };
    // decay acts on the probe-frame signal, whose relaxed value is 0
    let x: Vec<f64> = pts.iter().map(|(v, _)| (v - b0) / a0).collect();
    let mut tr = SignalTrace::new(spec.parameter(), values, x)?;
    tr.exposures = pts.iter().map(|p| p.1.exposure).collect();
    if spec.decoherence {
        let probe = network.spin(&spec.probe)?;
        if tr.exposures.iter().any(|e| e.echo > 0.0) {
            if let Some(t2) = probe.coherence.t2 {
                tr = apply_decay_envelope(&tr, DecayKind::Echo, t2)?;
            }
        }
        let locked: Vec<String> = pts.iter().flat_map(|p| p.1.locked.iter().cloned()).collect();
        if tr.exposures.iter().any(|e| e.lock > 0.0) {
            if let Some(t) = min_budget(network, locked.iter(), |c| c.t1_rho) {
                tr = apply_decay_envelope(&tr, DecayKind::Lock, t)?;
            }
        }
        if tr.exposures.iter().any(|e| e.laser > 0.0) {
            let t = probe
                .coherence
                .t1_laser
                .ok_or_else(|| Error::MissingBudget { spin: probe.label.clone(), budget: "t1_laser" })?;
            tr = apply_decay_envelope(&tr, DecayKind::Laser, t)?;
        }
    }
    let errs = spec.control_errors;
    let gain = errs.iswap_fidelity.powi(hops as i32);
    for y in tr.ordinate.iter_mut() {
        *y = errs.readout_offset + gain * (b0 + a0 * *y);
    }
    tr.asymptote = errs.readout_offset + gain * b0;
    tr.quantity = Quantity::CentralSigmaZ;
    if opts.noise_sigma > 0.0 {
        let model = ReadoutModel::new(1.0, opts.noise_sigma / 2.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ fnv1a(&spec.name));
        for y in tr.ordinate.iter_mut() {
            *y = model.sigma_z(nv_readout_map(*y, &model, &mut rng));
        }
    }
    tr.meta.insert("hops".into(), hops.to_string());
    Ok(tr)
}

/// Divides by the median of the points farthest from every known line.
pub fn plateau_normalize(network: &SpinNetwork, trace: &SignalTrace) -> Result<SignalTrace> {
    let lines = network.dark_lines();
    let mut dist: Vec<(f64, f64)> = trace
        .abscissa
        .iter()
        .zip(&trace.ordinate)
        .map(|(&f, &y)| (lines.iter().map(|l| (f - l).abs()).fold(f64::INFINITY, f64::min), y))
        .collect();
    dist.sort_by(|a, b| b.0.total_cmp(&a.0));
    let take = ((dist.len() as f64 * PLATEAU_FRACTION).ceil() as usize).max(1);
    let mut ys: Vec<f64> = dist[..take].iter().map(|p| p.1).collect();
    ys.sort_by(f64::total_cmp);
    let plateau = if take % 2 == 1 { ys[take / 2] } else { 0.5 * (ys[take / 2 - 1] + ys[take / 2]) };
    if !(plateau.abs() > 1e-9) {
        return Err(Error::InvalidTrace("off-resonance plateau is zero; cannot normalize".into()));
    }
    let mut out = trace.clone();
    out.ordinate.iter_mut().for_each(|y| *y /= plateau);
    out.asymptote /= plateau;
    out.quantity = Quantity::Normalized;
    out.meta.insert("plateau".into(), format!("{plateau:.12e}"));
    Ok(out)
}

/// Compiles, propagates and post-processes one experiment.
pub fn run_experiment(network: &SpinNetwork, spec: &ExperimentSpec, opts: &RunOptions) -> Result<RunOutput> {
    spec.validate(network)?;
    let mut trace = central_signal(network, spec, opts)?;
    let hops: usize = trace.meta["hops"].parse().expect("written above");
    let mut spam = None;
    let mut calibration = None;
    if hops > 0 && spec.kind != ExperimentKind::SpamCalibration {
        let ab = match spec.spam {
            SpamSetting::Calibrate => {
                let cal_spec = calibration_spec(network, spec)?;
                let cal = central_signal(network, &cal_spec, opts)?;
                let fit = fit_cosine(&cal)?;
                calibration = Some(cal);
                Some((fit.param("b0")?, fit.param("a0")?))
            }
            SpamSetting::Fixed { b0, a0 } => Some((b0, a0)),
            SpamSetting::Off => None,
        };
        if let Some((b0, a0)) = ab {
            trace = spam_map(&trace, b0, a0)?;
            spam = Some((b0, a0));
        }
    }
    if spec.baseline_enabled() {
        match spec.kind {
            ExperimentKind::SedorEsr => trace = plateau_normalize(network, &trace)?,
            ExperimentKind::HhcpTransfer => {
                let offset = baseline_offset_hhcp(&fit_cosine(&trace)?)?;
                trace.ordinate.iter_mut().for_each(|y| *y -= offset);
                trace.asymptote -= offset;
                trace.meta.insert("baseline_offset".into(), format!("{offset:.12e}"));
            }
            _ => {}
        }
    }
    if (opts.mask_sub_300ns || spec.mask_sub_300ns) && spec.parameter().is_time() {
        trace.retain_points(|_, x| x >= SHORT_TIME_MASK);
    }
    trace.meta.insert("experiment".into(), spec.name.clone());
    trace.meta.insert("spec".into(), serde_json::to_string(spec)?);
    trace.validate()?;
    Ok(RunOutput { trace, spam, calibration })
}

macro_rules! runner {
    ($(#[$doc:meta])* $name:ident, $kind:ident) => {
        $(#[$doc])*
        pub fn $name(network: &SpinNetwork, spec: &ExperimentSpec, opts: &RunOptions) -> Result<SignalTrace> {
            if spec.kind != ExperimentKind::$kind {
                return Err(Error::InvalidExperiment(format!(
                    "{}: expected a {:?} spec, got {:?}",
                    spec.name,
                    ExperimentKind::$kind,
                    spec.kind
                )));
            }
            Ok(run_experiment(network, spec, opts)?.trace)
        }
    };
}

runner!(
    /// Hahn echo on the probe, swept over total free time.
    run_spin_echo, SpinEcho
);
runner!(
    /// Echo on the probe with a recoupling pulse of swept frequency.
    run_sedor_esr, SedorEsr
);
runner!(
    /// Echo on the probe with a resonant recoupling pulse, swept over time.
    run_sedor_ramsey, SedorRamsey
);
runner!(
    /// Hartmann-Hahn exchange between probe and target, swept over lock time.
    run_hhcp_transfer, HhcpTransfer
);
runner!(
    /// Rabi drive on a spin reached through the chain, swept over pulse length.
    run_rabi_chain, RabiChain
);
runner!(
    /// Closing-phase sweep of the first hop.
    run_spam_calibration, SpamCalibration
);
runner!(
    /// Chain-initialized polarization under laser illumination.
    run_laser_depolarization, LaserDepolarization
);
