use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::RunManifest;
use super::tables::{write_spectrum_csv, write_trace_csv};
use crate::analysis::{
    extract_peak, fit_decaying_cosine, fit_exp_decay, fit_lorentzian_lines, fit_trace, periodogram, FitModel, FitResult,
    PeakEstimate, Spectrum,
};
use crate::error::{Error, Result};
use crate::network::SpinNetwork;
use crate::sequence::{run_experiment, ExperimentKind, ExperimentSpec, RunOptions, RunOutput};

/// Version of the summary JSON layout.
pub const SUMMARY_SCHEMA: u32 = 1;
/// Lorentzian line search: at most this many lines, each at least this
/// fraction of the deepest.
pub const MAX_LINES: usize = 4;
pub const MIN_LINE_DEPTH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub kind: ExperimentKind,
    pub csv: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum_csv: Option<String>,
    /// `[b0, A0]` of the readout map, when one was applied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spam: Option<[f64; 2]>,
    pub fits: Vec<FitResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fit_errors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak: Option<PeakEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingEstimate {
    pub probe: String,
    pub target: String,
    pub d_hz: f64,
    /// Spectral half width.
    pub sigma_hz: f64,
    pub experiment: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineEstimate {
    pub probe: String,
    pub center_hz: f64,
    pub half_width_hz: f64,
    pub experiment: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema: u32,
    pub generator: String,
    pub manifest: RunManifest,
    pub experiments: Vec<ExperimentSummary>,
    pub couplings: Vec<CouplingEstimate>,
    pub lines: Vec<LineEstimate>,
}

/// Everything a run produces, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub summary: RunSummary,
    pub runs: Vec<RunOutput>,
    /// `(file name, contents)` in write order, summary last.
    pub files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|f| f.0 == name).map(|f| f.1.as_slice())
    }

    pub fn experiment(&self, name: &str) -> Option<(&ExperimentSummary, &RunOutput)> {
        let k = self.summary.experiments.iter().position(|e| e.name == name)?;
        Some((&self.summary.experiments[k], &self.runs[k]))
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}

fn generator() -> String {
    format!("spinreg {}", env!("CARGO_PKG_VERSION"))
}

fn provenance(manifest: &str, spec: &ExperimentSpec, what: &str) -> Result<String> {
    Ok(format!(
        "{}\nmanifest {manifest}\nexperiment {} ({what})\nspec {}",
        generator(),
        spec.name,
        serde_json::to_string(spec)?
    ))
}

fn analyze(spec: &ExperimentSpec, run: &RunOutput) -> (ExperimentSummary, Option<Spectrum>) {
    let tr = &run.trace;
    let a = &spec.analysis;
    let mut s = ExperimentSummary {
        name: spec.name.clone(),
        kind: spec.kind,
        csv: format!("{}.csv", spec.name),
        spectrum_csv: None,
        spam: run.spam.map(|(b, a)| [b, a]),
        fits: Vec::new(),
        fit_errors: Vec::new(),
        peak: None,
    };
    let mut spectrum = None;
    if a.spectrum || a.fix_d0_from_fft || a.fits.contains(&FitModel::FftPeakLorentzian) {
        match periodogram(tr) {
            Ok(sp) => {
                match extract_peak(&sp) {
                    Ok(pk) => s.peak = Some(pk),
                    Err(e) => s.fit_errors.push(format!("spectrum: {e}")),
                }
                if a.spectrum {
                    let stem = a.spectrum_name.clone().unwrap_or_else(|| format!("{}-spectrum", spec.name));
                    s.spectrum_csv = Some(format!("{stem}.csv"));
                    spectrum = Some(sp);
                }
            }
            Err(e) => s.fit_errors.push(format!("spectrum: {e}")),
        }
    }
    for &model in &a.fits {
        let fitted = match model {
            FitModel::Lorentzian => fit_lorentzian_lines(tr, MAX_LINES, MIN_LINE_DEPTH),
            FitModel::DecayingCosine => {
                let d0 = if a.fix_d0_from_fft { s.peak.as_ref().map(|p| p.d0) } else { None };
                fit_decaying_cosine(tr, d0).map(|f| vec![f])
            }
            FitModel::ExpDecay => fit_exp_decay(tr, a.fix_b0_zero).map(|f| vec![f]),
            m => fit_trace(m, tr).map(|f| vec![f]),
        };
        match fitted {
            Ok(f) => s.fits.extend(f),
            Err(e) => s.fit_errors.push(format!("{model:?}: {e}")),
        }
    }
    (s, spectrum)
}

fn extract(specs: &[ExperimentSpec], exps: &[ExperimentSummary]) -> (Vec<CouplingEstimate>, Vec<LineEstimate>) {
    let mut couplings = Vec::new();
    let mut lines = Vec::new();
    for (spec, e) in specs.iter().zip(exps) {
        match spec.kind {
            ExperimentKind::SedorRamsey | ExperimentKind::HhcpTransfer => {
                if let (Some(pk), Some(t)) = (&e.peak, &spec.target) {
                    couplings.push(CouplingEstimate {
                        probe: spec.probe.clone(),
                        target: t.clone(),
                        d_hz: pk.d0,
                        sigma_hz: pk.delta_d,
                        experiment: spec.name.clone(),
                    });
                }
            }
            ExperimentKind::SedorEsr => {
                for f in e.fits.iter().filter(|f| f.model == FitModel::Lorentzian) {
                    lines.push(LineEstimate {
                        probe: spec.probe.clone(),
                        center_hz: f.params["center"],
                        half_width_hz: f.params["gamma"].abs() / 2.0,
                        experiment: spec.name.clone(),
                    });
                }
            }
            _ => {}
        }
    }
    (couplings, lines)
}

/// Runs `specs` (in parallel) and renders every output file in memory.
pub fn simulate(network: &SpinNetwork, specs: &[ExperimentSpec], manifest: &RunManifest) -> Result<Artifacts> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("experiment list is empty".into()));
    }
    let mut names = BTreeSet::new();
    for s in specs {
        if !names.insert(s.name.as_str()) {
            return Err(Error::InvalidArgument(format!("duplicate experiment name `{}`", s.name)));
        }
    }
    let opts: RunOptions = manifest.options();
    let runs: Vec<RunOutput> = specs.par_iter().map(|s| run_experiment(network, s, &opts)).collect::<Result<_>>()?;
    let echo = serde_json::to_string(manifest)?;
    let mut files = Vec::new();
    let mut exps = Vec::new();
    for (spec, run) in specs.iter().zip(&runs) {
        let (summary, spectrum) = analyze(spec, run);
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &run.trace, &provenance(&echo, spec, "trace")?)?;
        files.push((summary.csv.clone(), buf));
        if let (Some(sp), Some(name)) = (&spectrum, &summary.spectrum_csv) {
            let mut buf = Vec::new();
            write_spectrum_csv(&mut buf, sp, &provenance(&echo, spec, "periodogram")?)?;
            files.push((name.clone(), buf));
        }
        exps.push(summary);
    }
    let (couplings, lines) = extract(specs, &exps);
    let summary = RunSummary {
        schema: SUMMARY_SCHEMA,
        generator: generator(),
        manifest: manifest.clone(),
        experiments: exps,
        couplings,
        lines,
    };
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    files.push(("summary.json".into(), json));
    Ok(Artifacts { summary, runs, files })
}

/// Loads a manifest's inputs, runs them and writes the outputs.
pub fn cmd_simulate(manifest: &RunManifest) -> Result<RunSummary> {
    manifest.validate()?;
    let network = manifest.load_network()?;
    let specs = manifest.load_experiments(&network)?;
    let out = simulate(&network, &specs, manifest)?;
    out.write_to(&manifest.output_dir)?;
    Ok(out.summary)
}
