use std::f64::consts::PI;

use spinreg::analysis::{fit_cosine, fit_exp_decay};
use spinreg::analytic::{recoupling_factor, sedor_esr_model};
use spinreg::network::SpinNetwork;
use spinreg::sequence::*;
use spinreg::units::angular;

fn net() -> SpinNetwork {
    SpinNetwork::from_json(include_str!("../../../networks/nv-x-y.json")).unwrap()
}

fn quiet(mut s: ExperimentSpec) -> ExperimentSpec {
    s.decoherence = false;
    s
}

fn opts() -> RunOptions {
    RunOptions::default()
}

fn route(r: &[&str]) -> Vec<String> {
    r.iter().map(|s| s.to_string()).collect()
}

#[test]
fn nv_echo_envelope() {
    let s = ExperimentSpec::new("echo", ExperimentKind::SpinEcho, "NV", None, Sweep::linspace(0.0, 100e-6, 11));
    let tr = run_spin_echo(&net(), &s, &opts()).unwrap();
    assert_eq!(tr.ordinate[0], 1.0);
    assert!((tr.ordinate[5] - (-1.0f64).exp()).abs() < 1e-12);
    let tr = run_spin_echo(&net(), &quiet(s), &opts()).unwrap();
    assert!(tr.ordinate.iter().all(|y| (y - 1.0).abs() < 1e-12));
}

#[test]
fn echo_refocuses_unpulsed_partner() {
    let mut s = quiet(ExperimentSpec::new("echo", ExperimentKind::SpinEcho, "NV", None, Sweep::linspace(0.0, 40e-6, 9)));
    s.subset = Some(route(&["NV", "X"]));
    let tr = run_spin_echo(&net(), &s, &opts()).unwrap();
    assert!(tr.ordinate.iter().all(|y| (y - 1.0).abs() < 1e-10));
}

#[test]
fn ramsey_matches_closed_form() {
    let mut s = quiet(ExperimentSpec::new("r", ExperimentKind::SedorRamsey, "NV", Some("X"), Sweep::linspace(0.0, 60e-6, 50)));
    s.drive_both_hyperfine = route(&["X"]);
    let tr = run_sedor_ramsey(&net(), &s, &opts()).unwrap();
    for (t, y) in tr.abscissa.iter().zip(&tr.ordinate) {
        assert!((y - (2.0 * PI * 67e3 * t).cos()).abs() < 1e-8, "T={t}");
    }
    // one line of an unpolarized target: half the contrast, plus a small
    // off-resonant tip of the other manifold, of order (0.5/26.5)^2
    s.drive_both_hyperfine.clear();
    let tr = run_sedor_ramsey(&net(), &s, &opts()).unwrap();
    for (t, y) in tr.abscissa.iter().zip(&tr.ordinate) {
        assert!((y - 0.5 * (1.0 + (2.0 * PI * 67e3 * t).cos())).abs() < 4e-4);
    }
}

#[test]
fn three_spin_register_agrees_with_two() {
    let mut s = quiet(ExperimentSpec::new("r", ExperimentKind::SedorRamsey, "NV", Some("X"), Sweep::linspace(0.0, 60e-6, 13)));
    let two = run_sedor_ramsey(&net(), &s, &opts()).unwrap();
    s.subset = Some(route(&["NV", "X", "Y"]));
    let three = run_sedor_ramsey(&net(), &s, &opts()).unwrap();
    for (a, b) in two.ordinate.iter().zip(&three.ordinate) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn esr_matches_closed_form() {
    let n = net();
    let d = 67e3;
    let t = 1.0 / (2.0 * d);
    let mut s = quiet(ExperimentSpec::new("esr", ExperimentKind::SedorEsr, "NV", Some("X"), Sweep::linspace(45e6, 49e6, 41)));
    s.fixed.recoupling_time = Some(t);
    s.baseline_correction = Some(false);
    let tr = run_sedor_esr(&n, &s, &opts()).unwrap();
    let w0 = angular(0.5e6);
    for (f, y) in tr.abscissa.iter().zip(&tr.ordinate) {
        let want = 0.5 * (sedor_esr_model(d, t, angular(47.0e6 - f), w0) + sedor_esr_model(d, t, angular(73.5e6 - f), w0));
        assert!((y - want).abs() < 1e-6, "f={f}");
    }
    let at_line = tr.ordinate[20];
    assert!((at_line - 0.5 * (-1.0 + recoupling_factor(angular(26.5e6), w0))).abs() < 1e-6);
}

#[test]
fn esr_null_for_uncoupled_target() {
    let mut s = quiet(ExperimentSpec::new("null", ExperimentKind::SedorEsr, "NV", Some("Y"), Sweep::linspace(42e6, 80e6, 77)));
    s.fixed.recoupling_time = Some(50e-6);
    s.baseline_correction = Some(false);
    let tr = run_sedor_esr(&net(), &s, &opts()).unwrap();
    assert!(tr.ordinate.iter().all(|y| (y - 1.0).abs() < 1e-10));
}

#[test]
fn calibration_amplitudes() {
    let mut s = quiet(ExperimentSpec::new("cal", ExperimentKind::SpamCalibration, "X", None, Sweep::linspace(0.0, 3.0 * PI, 61)));
    s.readout_route = route(&["X", "NV"]);
    s.drive_both_hyperfine = route(&["X"]);
    let tr = run_spam_calibration(&net(), &s, &opts()).unwrap();
    for (p, y) in tr.abscissa.iter().zip(&tr.ordinate) {
        assert!((y + p.cos()).abs() < 1e-10);
    }
    s.drive_both_hyperfine.clear();
    let tr = run_spam_calibration(&net(), &s, &opts()).unwrap();
    let f = fit_cosine(&tr).unwrap();
    assert!((f.params["b0"] - 0.5).abs() < 1e-8 && (f.params["a0"] + 0.5).abs() < 1e-8);
    s.drive_both_hyperfine = route(&["X"]);
    s.control_errors = ControlErrors { iswap_fidelity: 0.35f64.sqrt(), readout_offset: 0.016 };
    let f = fit_cosine(&run_spam_calibration(&net(), &s, &opts()).unwrap()).unwrap();
    assert!((f.params["b0"] - 0.016).abs() < 1e-8);
    assert!((f.params["a0"] + 0.35).abs() < 1e-8);
}

#[test]
fn dark_probe_echo_maps_to_unity() {
    for both in [true, false] {
        let mut s = quiet(ExperimentSpec::new("xecho", ExperimentKind::SpinEcho, "X", None, Sweep::linspace(0.0, 20e-6, 5)));
        s.readout_route = route(&["X", "NV"]);
        if both {
            s.drive_both_hyperfine = route(&["X"]);
        }
        let out = run_experiment(&net(), &s, &opts()).unwrap();
        assert!(out.trace.ordinate.iter().all(|y| (y - 1.0).abs() < 1e-8), "{:?}", out.trace.ordinate);
        assert_eq!(out.trace.quantity, Quantity::ProbeSigmaZ);
    }
}

#[test]
fn hhcp_transfer_profile() {
    let mut s = quiet(ExperimentSpec::new("hh", ExperimentKind::HhcpTransfer, "X", Some("Y"), Sweep::linspace(0.0, 100e-6, 101)));
    s.readout_route = route(&["X", "NV"]);
    s.drive_both_hyperfine = route(&["X", "Y"]);
    let tr = run_hhcp_transfer(&net(), &s, &opts()).unwrap();
    for (l, y) in tr.abscissa.iter().zip(&tr.ordinate) {
        assert!((y - 0.5 * (1.0 + (2.0 * PI * 20e3 * l).cos())).abs() < 1e-6, "L={l}");
    }
    let kmin = (0..tr.len()).min_by(|&a, &b| tr.ordinate[a].total_cmp(&tr.ordinate[b])).unwrap();
    assert!((tr.abscissa[kmin] - 25e-6).abs() < 1e-9 || (tr.abscissa[kmin] - 75e-6).abs() < 1e-9);
}

#[test]
fn rabi_chain_two_oscillations() {
    let mut s = quiet(ExperimentSpec::new("rabi", ExperimentKind::RabiChain, "Y", None, Sweep::linspace(0.0, 4e-6, 81)));
    s.readout_route = route(&["Y", "X", "NV"]);
    s.drive_both_hyperfine = route(&["X", "Y"]);
    let tr = run_rabi_chain(&net(), &s, &opts()).unwrap();
    for (t, y) in tr.abscissa.iter().zip(&tr.ordinate) {
        assert!((y - (2.0 * PI * 0.5e6 * t).cos()).abs() < 1e-8, "t={t}");
    }
}

#[test]
fn laser_depolarization_decay() {
    let mut s = ExperimentSpec::new("laser", ExperimentKind::LaserDepolarization, "Y", None, Sweep::linspace(0.0, 480e-6, 41));
    s.readout_route = route(&["Y", "X", "NV"]);
    s.drive_both_hyperfine = route(&["X", "Y"]);
    let tr = run_laser_depolarization(&net(), &s, &opts()).unwrap();
    let f = fit_exp_decay(&tr, true).unwrap();
    assert!((f.params["t"] / 120e-6 - 1.0).abs() < 1e-6);
    let k120 = 10;
    assert!((tr.ordinate[k120] / tr.ordinate[0] - (-1.0f64).exp()).abs() < 1e-9);
}

#[test]
fn noise_is_seeded() {
    let s = ExperimentSpec::new("echo", ExperimentKind::SpinEcho, "NV", None, Sweep::linspace(0.0, 100e-6, 11));
    let o = RunOptions { seed: 4, noise_sigma: 0.02, mask_sub_300ns: false };
    let a = run_spin_echo(&net(), &s, &o).unwrap();
    let b = run_spin_echo(&net(), &s, &o).unwrap();
    assert_eq!(a, b);
    let c = run_spin_echo(&net(), &s, &RunOptions { seed: 5, ..o }).unwrap();
    assert_ne!(a.ordinate, c.ordinate);
}

#[test]
fn short_time_mask() {
    let s = ExperimentSpec::new("echo", ExperimentKind::SpinEcho, "NV", None, Sweep::linspace(0.0, 1e-6, 11));
    let o = RunOptions { mask_sub_300ns: true, ..opts() };
    let tr = run_spin_echo(&net(), &s, &o).unwrap();
    assert_eq!(tr.len(), 8);
    assert!(tr.abscissa[0] >= 300e-9 - 1e-18);
}

#[test]
fn validation_errors() {
    let n = net();
    let mut s = ExperimentSpec::new("x", ExperimentKind::SpinEcho, "X", None, Sweep::linspace(0.0, 1e-6, 3));
    assert!(run_experiment(&n, &s, &opts()).is_err());
    s.readout_route = route(&["X", "Y", "NV"]);
    assert!(matches!(run_experiment(&n, &s, &opts()), Err(spinreg::Error::MissingCoupling(..))));
    let bad = ExperimentSpec::new("y", ExperimentKind::SpinEcho, "NV", None, Sweep { parameter: None, grid: SweepValues::Values { values: vec![0.0, 2.0, 1.0] } });
    assert!(run_experiment(&n, &bad, &opts()).is_err());
    let wrong = ExperimentSpec::new("z", ExperimentKind::SedorRamsey, "NV", Some("X"), Sweep::linspace(0.0, 1e-6, 3));
    assert!(run_spin_echo(&n, &wrong, &opts()).is_err());
}
