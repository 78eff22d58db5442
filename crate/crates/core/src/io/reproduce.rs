use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::manifest::RunManifest;
use super::simulate::{simulate, Artifacts};
use crate::analysis::{
    fit_cosine, fit_decaying_cosine, fit_exp_decay, fit_fft_peak, fit_lorentzian, FitModel,
};
use crate::analytic::{
    chain_axis_reach, chain_coherence_hhcp, chain_coherence_sedor, coherence_radius, max_layer, sedor_esr_model, ChainBudget,
    ChainModel,
};
use crate::error::{Error, Result};
use crate::network::{defects_distinct, hyperfine_splitting, SpinNetwork};
use crate::sequence::{
    run_experiment, ExperimentKind, ExperimentSpec, RunOptions, SignalTrace, Sweep, SweepParameter,
};
use crate::units::angular;

pub const NETWORK_JSON: &str = include_str!("../../../../networks/nv-x-y.json");
pub const FIG2_MANIFEST: &str = include_str!("../../../../repro/fig2.json");
pub const FIG3_MANIFEST: &str = include_str!("../../../../repro/fig3.json");

/// Shipped experiment files, by file stem.
pub const EXPERIMENTS: [(&str, &str); 11] = [
    ("fig2b", include_str!("../../../../experiments/fig2b.json")),
    ("fig2b-null", include_str!("../../../../experiments/fig2b-null.json")),
    ("fig2c", include_str!("../../../../experiments/fig2c.json")),
    ("fig2c-echo", include_str!("../../../../experiments/fig2c-echo.json")),
    ("fig2e", include_str!("../../../../experiments/fig2e.json")),
    ("fig2f", include_str!("../../../../experiments/fig2f.json")),
    ("fig3a", include_str!("../../../../experiments/fig3a.json")),
    ("fig3b", include_str!("../../../../experiments/fig3b.json")),
    ("fig3c", include_str!("../../../../experiments/fig3c.json")),
    ("spam-calibration", include_str!("../../../../experiments/spam-calibration.json")),
    ("spam-optimized", include_str!("../../../../experiments/spam-optimized.json")),
];

// Tolerances of the report rows.
const ORACLE_TOL: f64 = 1e-8;
const ESR_TOL: f64 = 1e-6;
const RADIUS_REF: f64 = 23e-9;
const RADIUS_REL_TOL: f64 = 0.2;
const LASER_REL_TOL: f64 = 0.05;
const RABI_CYCLES_TOL: f64 = 0.05;
const COVERAGE_MIN: f64 = 0.95;
const ROBUST_TRIALS: usize = 100;
const ROBUST_SIGMA: f64 = 0.02;
const DOMINANCE_BUDGETS: usize = 100;

pub fn shipped_network() -> SpinNetwork {
    SpinNetwork::from_json(NETWORK_JSON).expect("shipped network is valid")
}

pub fn shipped_experiment(stem: &str) -> Result<ExperimentSpec> {
    let (_, text) = EXPERIMENTS
        .iter()
        .find(|e| e.0 == stem)
        .ok_or_else(|| Error::InvalidArgument(format!("no shipped experiment `{stem}`")))?;
    ExperimentSpec::from_json(text)
}

/// One comparison line of the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub criterion: u8,
    pub quantity: String,
    pub expected: String,
    pub value: String,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub checks: Vec<Check>,
    pub markdown: String,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Pass/fail per criterion number, ascending.
    pub fn criteria(&self) -> Vec<(u8, bool)> {
        let mut out: Vec<(u8, bool)> = Vec::new();
        for c in &self.checks {
            match out.iter_mut().find(|o| o.0 == c.criterion) {
                Some(o) => o.1 &= c.passed,
                None => out.push((c.criterion, c.passed)),
            }
        }
        out.sort();
        out
    }
}

struct Rows(Vec<Check>);

impl Rows {
    fn add(&mut self, criterion: u8, quantity: &str, expected: impl Into<String>, value: impl Into<String>, passed: bool) {
        self.0.push(Check { criterion, quantity: quantity.into(), expected: expected.into(), value: value.into(), passed });
    }
}

fn khz(v: f64) -> String {
    format!("{:.2} kHz", v / 1e3)
}

fn mhz(v: f64) -> String {
    format!("{:.3} MHz", v / 1e6)
}

fn us(v: f64) -> String {
    format!("{:.2} us", v * 1e6)
}

/// Runs one shipped manifest with `seed` and renders its artifacts.
pub fn run_shipped_manifest(network: &SpinNetwork, manifest_json: &str, seed: u64, output_dir: &str) -> Result<Artifacts> {
    let mut m: RunManifest = serde_json::from_str(manifest_json)?;
    m.seed = seed;
    m.output_dir = output_dir.into();
    m.network_file = "networks/nv-x-y.json".into();
    let mut specs = Vec::new();
    for f in m.experiment_files.iter_mut() {
        let stem = f.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        specs.push(shipped_experiment(&stem)?);
        *f = format!("experiments/{stem}.json").into();
    }
    simulate(network, &specs, &m)
}

fn oracle_rows(rows: &mut Rows, net: &SpinNetwork) -> Result<()> {
    let d = 67e3;
    let mut s = ExperimentSpec::new("oracle", ExperimentKind::SedorRamsey, "NV", Some("X"), Sweep::linspace(0.0, 60e-6, 50));
    s.fixed.ideal_target_pulse = true;
    s.decoherence = false;
    let tr = run_experiment(net, &s, &RunOptions::default())?.trace;
    let err = tr.abscissa.iter().zip(&tr.ordinate).map(|(t, y)| (y - (2.0 * PI * d * t).cos()).abs()).fold(0.0, f64::max);
    rows.add(1, "SEDOR-Ramsey vs cos(2 pi d T), max deviation", "0", format!("{err:.2e}"), err < ORACLE_TOL);

    let w0 = 0.5e6;
    let t = 1.0 / (2.0 * d);
    let mut s = ExperimentSpec::new(
        "esr",
        ExperimentKind::SedorEsr,
        "NV",
        Some("X"),
        Sweep::linspace(47.0e6 - 4.0 * w0, 47.0e6 + 4.0 * w0, 81),
    );
    s.fixed.recoupling_time = Some(t);
    s.decoherence = false;
    s.baseline_correction = Some(false);
    s.subset = Some(vec!["NV".into(), "X".into()]);
    let tr = run_experiment(net, &s, &RunOptions::default())?.trace;
    let err = tr
        .abscissa
        .iter()
        .zip(&tr.ordinate)
        .map(|(f, y)| {
            let want = 0.5
                * (sedor_esr_model(d, t, angular(47.0e6 - f), angular(w0))
                    + sedor_esr_model(d, t, angular(73.5e6 - f), angular(w0)));
            (y - want).abs()
        })
        .fold(0.0, f64::max);
    rows.add(2, "SEDOR-ESR vs closed form over +-4 Omega0, max deviation", "0", format!("{err:.2e}"), err < ESR_TOL);

    let grid: Vec<f64> = (1..=16).map(|k| k as f64 / 8.0 * t).collect();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for &tt in &grid {
        let mut s = s.clone();
        s.fixed.recoupling_time = Some(tt);
        s.sweep = Sweep { parameter: None, grid: crate::sequence::SweepValues::Values { values: vec![47.0e6] } };
        let y = run_experiment(net, &s, &RunOptions::default())?.trace.ordinate[0];
        if 1.0 - y > best.0 + 1e-12 {
            best = (1.0 - y, tt);
        }
    }
    rows.add(2, "recoupling time of maximal ESR contrast", us(t), us(best.1), (best.1 - t).abs() < 1e-12);
    Ok(())
}

fn fig2_rows(rows: &mut Rows, fig2: &Artifacts) {
    let s = &fig2.summary;
    for (probe, expected) in [("NV", 47.0e6), ("NV", 73.5e6), ("X", 44.0e6), ("X", 77.5e6)] {
        let found = s
            .lines
            .iter()
            .filter(|l| l.probe == probe && l.experiment != "fig2b-null")
            .min_by(|a, b| (a.center_hz - expected).abs().total_cmp(&(b.center_hz - expected).abs()));
        let quantity = format!("line seen by {probe} near {}", mhz(expected));
        match found {
            Some(l) => rows.add(
                3,
                &quantity,
                mhz(expected),
                format!("{} +- {}", mhz(l.center_hz), mhz(l.half_width_hz)),
                (l.center_hz - expected).abs() <= l.half_width_hz,
            ),
            None => rows.add(3, &quantity, mhz(expected), "not found", false),
        }
    }
    for (probe, target, expected) in [("NV", "X", 67e3), ("X", "Y", 20e3)] {
        let quantity = format!("coupling d({probe},{target}) from SEDOR-Ramsey FFT");
        match s.couplings.iter().find(|c| c.probe == probe && c.target == target && c.experiment.starts_with("fig2")) {
            Some(c) => rows.add(
                3,
                &quantity,
                khz(expected),
                format!("{} +- {}", khz(c.d_hz), khz(c.sigma_hz)),
                (c.d_hz - expected).abs() <= c.sigma_hz,
            ),
            None => rows.add(3, &quantity, khz(expected), "no peak", false),
        }
    }
    let null_lines = s.lines.iter().filter(|l| l.experiment == "fig2b-null").count();
    rows.add(3, "lines at the Y frequencies seen by NV (T = T2)", "none", format!("{null_lines}"), null_lines == 0);
}

fn fig3_rows(rows: &mut Rows, net: &SpinNetwork, fig3: &Artifacts) -> Result<()> {
    let Some((hh, hh_run)) = fig3.experiment("fig3a") else {
        return Err(Error::InvalidArgument("fig3a missing from the fig3 manifest".into()));
    };
    let tr = &hh_run.trace;
    let kmin = (0..tr.len()).min_by(|&a, &b| tr.ordinate[a].total_cmp(&tr.ordinate[b])).unwrap_or(0);
    let step = tr.abscissa.get(1).copied().unwrap_or(0.0) - tr.abscissa[0];
    let lmin = tr.abscissa[kmin];
    rows.add(4, "HHCP(X,Y) trace minimum", us(25e-6), us(lmin), (lmin - 25e-6).abs() <= 2.0 * step + 1e-12);
    match &hh.peak {
        Some(p) => rows.add(
            4,
            "HHCP(X,Y) FFT peak",
            khz(20e3),
            format!("{} +- {}", khz(p.d0), khz(p.delta_d)),
            (p.d0 - 20e3).abs() <= p.delta_d,
        ),
        None => rows.add(4, "HHCP(X,Y) FFT peak", khz(20e3), "no peak", false),
    }
    match fig3.experiment("fig3b").and_then(|e| e.0.fits.iter().find(|f| f.model == FitModel::Cosine)) {
        Some(f) => {
            let cycles = f.params["d0"] * 4e-6;
            rows.add(4, "Rabi(Y) cycles over 4 us", "2", format!("{cycles:.3}"), (cycles - 2.0).abs() <= RABI_CYCLES_TOL);
        }
        None => rows.add(4, "Rabi(Y) cycles over 4 us", "2", "no fit", false),
    }
    let laser = shipped_experiment("fig3c")?;
    let tr = run_experiment(net, &laser, &RunOptions::default())?.trace;
    let t = fit_exp_decay(&tr, true)?.param("t")?;
    rows.add(4, "Y laser depolarization time (noiseless)", us(120e-6), us(t), (t / 120e-6 - 1.0).abs() <= LASER_REL_TOL);
    for (stem, expected, tol) in [("spam-calibration", -0.35, 0.03), ("spam-optimized", -0.74, 0.05)] {
        if let Some(f) = fig3.experiment(stem).and_then(|e| e.0.fits.first()) {
            let a0 = f.params["a0"];
            rows.add(4, &format!("calibration amplitude A0 ({stem})"), format!("{expected:.2}"), format!("{a0:.3}"), (a0 - expected).abs() <= tol);
        }
    }
    Ok(())
}

fn reference_budget(eta: f64) -> ChainBudget {
    ChainBudget { t_gate: 10e-6, t1_rho: 100e-6, t1: f64::INFINITY, t2: 50e-6, eta, threshold: 0.1 }
}

fn scaling_rows(rows: &mut Rows, seed: u64) {
    for (eta, expected) in [(1.0, 11), (0.86, 4)] {
        let n = max_layer(&reference_budget(eta), ChainModel::Hhcp);
        rows.add(5, &format!("max_layer, eta = {eta}"), expected.to_string(), n.to_string(), n == expected);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_d011);
    let mut violations = 0;
    for _ in 0..DOMINANCE_BUDGETS {
        let t2 = 10f64.powf(rng.random_range(-5.0..-3.0));
        let b = ChainBudget {
            t_gate: 10f64.powf(rng.random_range(-6.5..-4.5)),
            t1_rho: t2 * (1.0 + rng.random_range(0.0..20.0)),
            t1: if rng.random_bool(0.3) { f64::INFINITY } else { 10f64.powf(rng.random_range(-4.0..0.0)) },
            t2,
            eta: 1.0,
            threshold: 0.1,
        };
        if (1..=20).any(|n| chain_coherence_hhcp(&b, n) < chain_coherence_sedor(&b, n)) {
            violations += 1;
        }
    }
    rows.add(6, "budgets where HHCP chain loses to SEDOR (T1rho >= T2, eta = 1)", "0", format!("{violations} of {DOMINANCE_BUDGETS}"), violations == 0);
}

fn hyperfine_rows(rows: &mut Rows) {
    let distinct = defects_distinct(33.5e6, 17.2e6, 29.4e6, 0.3e6);
    rows.add(7, "Y splitting 33.5 MHz outside the X tensor range", "distinct", if distinct { "distinct" } else { "overlap" }, distinct);
    let a0 = hyperfine_splitting(17.2e6, 29.4e6, 0.0);
    let a90 = hyperfine_splitting(17.2e6, 29.4e6, FRAC_PI_2);
    rows.add(7, "A_s(0)", mhz(29.4e6), mhz(a0), a0 == 29.4e6);
    rows.add(7, "A_s(pi/2)", mhz(17.2e6), mhz(a90), a90 == 17.2e6);
}

fn geometry_rows(rows: &mut Rows) {
    let r = coherence_radius(50e-6);
    rows.add(
        8,
        "coherence radius at T2 = 50 us",
        "23 nm",
        format!("{:.2} nm", r * 1e9),
        (r / RADIUS_REF - 1.0).abs() <= RADIUS_REL_TOL,
    );
    let ratio = chain_axis_reach(2, 50e-6) / chain_axis_reach(1, 50e-6);
    let reach = 46.0 * ratio;
    rows.add(8, "axis reach with a second layer, from 46 nm", "69 nm", format!("{reach:.6} nm"), reach == 69.0);
    let cube = coherence_radius(8.0 * 50e-6) / r;
    rows.add(8, "radius ratio for 8x T2", "2", format!("{cube:.15}"), (cube - 2.0).abs() < 1e-12);
}

fn noisy(x: Vec<f64>, clean: impl Fn(f64) -> f64, param: SweepParameter, rng: &mut ChaCha8Rng) -> SignalTrace {
    let n = Normal::new(0.0, ROBUST_SIGMA).expect("positive sigma");
    let y = x.iter().map(|&v| clean(v) + n.sample(rng)).collect();
    SignalTrace::new(param, x, y).expect("same lengths")
}

fn within(f: &crate::analysis::FitResult, name: &str, truth: f64) -> bool {
    match (f.params.get(name), f.uncertainties.get(name)) {
        (Some(v), Some(s)) => (v - truth).abs() <= 3.0 * s,
        _ => false,
    }
}

/// Fraction of seeded noisy trials whose fit lands within 3 sigma of the
/// truth, per model family.
pub fn fit_coverage(seed: u64) -> Vec<(FitModel, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf17_c0de);
    let lin = |a: f64, b: f64, n: usize| Sweep::linspace(a, b, n).values();
    let mut out = Vec::new();
    let mut tally = |model: FitModel, ok: usize| out.push((model, ok as f64 / ROBUST_TRIALS as f64));

    let mut ok = 0;
    for _ in 0..ROBUST_TRIALS {
        let tr = noisy(lin(44e6, 50e6, 121), |f| 1.0 - 0.5 * 0.09e12 / ((f - 47e6).powi(2) + 0.09e12), SweepParameter::Frequency, &mut rng);
        ok += fit_lorentzian(&tr).is_ok_and(|f| within(&f, "center", 47e6) && within(&f, "gamma", 0.6e6)) as usize;
    }
    tally(FitModel::Lorentzian, ok);

    let mut ok = 0;
    for _ in 0..ROBUST_TRIALS {
        let tr = noisy(
            lin(0.0, 60e-6, 121),
            |t| 0.5 * (1.0 + (2.0 * PI * 67e3 * t).cos()) * (-t / 50e-6).exp(),
            SweepParameter::EchoTime,
            &mut rng,
        );
        ok += fit_decaying_cosine(&tr, None).is_ok_and(|f| within(&f, "d0", 67e3) && within(&f, "tau0", 50e-6)) as usize;
    }
    tally(FitModel::DecayingCosine, ok);

    let mut ok = 0;
    for _ in 0..ROBUST_TRIALS {
        let tr = noisy(lin(0.0, 150e-6, 31), |t| 0.05 + 0.95 * (-t / 50e-6).exp(), SweepParameter::EchoTime, &mut rng);
        ok += fit_exp_decay(&tr, false).is_ok_and(|f| within(&f, "t", 50e-6)) as usize;
    }
    tally(FitModel::ExpDecay, ok);

    let mut ok = 0;
    for _ in 0..ROBUST_TRIALS {
        let tr = noisy(lin(0.0, 100e-6, 101), |l| 0.5 + 0.5 * (2.0 * PI * 20e3 * l).cos(), SweepParameter::LockDuration, &mut rng);
        ok += fit_cosine(&tr).is_ok_and(|f| within(&f, "d0", 20e3) && within(&f, "a0", 0.5)) as usize;
    }
    tally(FitModel::Cosine, ok);

    let mut ok = 0;
    for _ in 0..ROBUST_TRIALS {
        let tr = noisy(lin(0.0, 150e-6, 121), |t| 0.5 * (1.0 + (2.0 * PI * 20e3 * t).cos()), SweepParameter::EchoTime, &mut rng);
        ok += fit_fft_peak(&tr).is_ok_and(|f| within(&f, "d0", 20e3)) as usize;
    }
    tally(FitModel::FftPeakLorentzian, ok);
    out
}

fn robustness_rows(rows: &mut Rows, seed: u64) {
    for (model, frac) in fit_coverage(seed) {
        rows.add(
            9,
            &format!("{model:?} recovery within 3 sigma, sigma_noise = {ROBUST_SIGMA}"),
            format!(">= {:.0}%", COVERAGE_MIN * 100.0),
            format!("{:.0}%", frac * 100.0),
            frac >= COVERAGE_MIN,
        );
    }
}

fn render(checks: &[Check], seed: u64, fig2: &Artifacts) -> String {
    let mut md = String::new();
    let _ = writeln!(md, "# Reproduction report\n");
    let _ = writeln!(md, "Generated by {} with seed {seed}.\n", fig2.summary.generator);
    let _ = writeln!(md, "| # | quantity | expected | reproduced | result |");
    let _ = writeln!(md, "|---|---|---|---|---|");
    for c in checks {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} |",
            c.criterion,
            c.quantity,
            c.expected,
            c.value,
            if c.passed { "pass" } else { "FAIL" }
        );
    }
    md
}

/// Runs both figure pipelines, the calculators and the fit robustness
/// study. Nothing is written.
pub fn reproduce(seed: u64) -> Result<(Report, Artifacts, Artifacts)> {
    let net = shipped_network();
    let fig2 = run_shipped_manifest(&net, FIG2_MANIFEST, seed, "fig2")?;
    let fig3 = run_shipped_manifest(&net, FIG3_MANIFEST, seed, "fig3")?;
    let mut rows = Rows(Vec::new());
    oracle_rows(&mut rows, &net)?;
    fig2_rows(&mut rows, &fig2);
    fig3_rows(&mut rows, &net, &fig3)?;
    scaling_rows(&mut rows, seed);
    hyperfine_rows(&mut rows);
    geometry_rows(&mut rows);
    robustness_rows(&mut rows, seed);
    let again2 = run_shipped_manifest(&net, FIG2_MANIFEST, seed, "fig2")?;
    let again3 = run_shipped_manifest(&net, FIG3_MANIFEST, seed, "fig3")?;
    let stable = again2.files == fig2.files && again3.files == fig3.files;
    rows.add(10, "output bytes identical across two runs", "identical", if stable { "identical" } else { "differ" }, stable);
    let markdown = render(&rows.0, seed, &fig2);
    Ok((Report { checks: rows.0, markdown }, fig2, fig3))
}

/// Writes `report.md` plus the `fig2/` and `fig3/` outputs under `out`.
pub fn cmd_reproduce_paper(seed: u64, out: &Path) -> Result<Report> {
    let (report, fig2, fig3) = reproduce(seed)?;
    fig2.write_to(&out.join("fig2"))?;
    fig3.write_to(&out.join("fig3"))?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("report.md"), &report.markdown)?;
    Ok(report)
}
