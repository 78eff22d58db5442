use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lsq::{levenberg_marquardt, linear_lsq, Solution};
use super::spectrum::{extract_peak, periodogram};
use crate::error::{Error, Result};
use crate::sequence::SignalTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Lorentzian,
    DecayingCosine,
    ExpDecay,
    Cosine,
    FftPeakLorentzian,
}

impl FitModel {
    pub fn parse(name: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(name.replace('-', "_")))
            .map_err(|_| Error::InvalidArgument(format!("unknown fit model `{name}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitFlag {
    /// No feature above the noise; amplitude-type parameters are meaningless.
    NoPeak,
    /// A decay time is not constrained by the sweep window.
    UnboundedTimescale,
    /// Other spectral peaks above half the dominant power.
    SecondaryPeaks(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: BTreeMap<String, f64>,
    pub uncertainties: BTreeMap<String, f64>,
    pub residual_norm: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<FitFlag>,
}

impl FitResult {
    fn new(model: FitModel) -> Self {
        Self { model, params: BTreeMap::new(), uncertainties: BTreeMap::new(), residual_norm: 0.0, flags: Vec::new() }
    }

    fn set(&mut self, name: &str, value: f64, sigma: f64) {
        self.params.insert(name.into(), value);
        self.uncertainties.insert(name.into(), sigma.abs());
    }

    pub fn param(&self, name: &str) -> Result<f64> {
        self.params.get(name).copied().ok_or_else(|| Error::Fit(format!("{:?} fit has no `{name}`", self.model)))
    }

    pub fn sigma(&self, name: &str) -> Result<f64> {
        self.uncertainties.get(name).copied().ok_or_else(|| Error::Fit(format!("{:?} fit has no `{name}`", self.model)))
    }

    pub fn has_flag(&self, f: &FitFlag) -> bool {
        self.flags.iter().any(|g| std::mem::discriminant(g) == std::mem::discriminant(f))
    }
}

fn usable(trace: &SignalTrace, min_points: usize) -> Result<()> {
    trace.check_shape()?;
    if trace.len() < min_points {
        return Err(Error::Fit(format!("need at least {min_points} points, got {}", trace.len())));
    }
    Ok(())
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn is_flat(y: &[f64]) -> bool {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let rms = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
    rms <= 1e-12 * (1.0 + mean.abs())
}

fn time_scale(x: &[f64]) -> f64 {
    let s = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// `b0 + A0 (γ/2)² / ((x - center)² + (γ/2)²)`. The center uncertainty is
/// reported as γ/2.
pub fn fit_lorentzian(trace: &SignalTrace) -> Result<FitResult> {
    usable(trace, 5)?;
    let (x, y) = (&trace.abscissa, &trace.ordinate);
    let (xmin, xmax) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if xmax > xmin { xmax - xmin } else { 1.0 };
    let xc = 0.5 * (xmin + xmax);
    let b0 = median(y);
    let k = (0..y.len()).max_by(|&a, &b| (y[a] - b0).abs().total_cmp(&(y[b] - b0).abs())).expect("non-empty");
    let a0 = y[k] - b0;
    let mut res = FitResult::new(FitModel::Lorentzian);
    if a0.abs() <= 1e-9 * (1.0 + b0.abs()) {
        res.set("b0", b0, 0.0);
        res.set("a0", 0.0, 0.0);
        res.set("center", xc, span / 2.0);
        res.set("gamma", span, span);
        res.residual_norm = y.iter().map(|v| (v - b0).powi(2)).sum::<f64>().sqrt();
        res.flags.push(FitFlag::NoPeak);
        return Ok(res);
    }
    // order points by abscissa for the width walk
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let pos = idx.iter().position(|&i| i == k).expect("present");
    let (mut l, mut r) = (pos, pos);
    while l > 0 && (y[idx[l - 1]] - b0).abs() >= a0.abs() / 2.0 {
        l -= 1;
    }
    while r + 1 < idx.len() && (y[idx[r + 1]] - b0).abs() >= a0.abs() / 2.0 {
        r += 1;
    }
    let step = span / (x.len() - 1) as f64;
    let fwhm = (x[idx[r]] - x[idx[l]]).max(2.0 * step);
    let u: Vec<f64> = x.iter().map(|v| (v - xc) / span).collect();
    let model = |u: f64, p: &[f64]| {
        let h = 0.5 * p[3];
        p[0] + p[1] * h * h / ((u - p[2]).powi(2) + h * h)
    };
    let ys = y.iter().map(|v| v.abs()).fold(0.0f64, f64::max).max(a0.abs());
    let sol = levenberg_marquardt(
        model,
        &u,
        y,
        &[b0, a0, (x[k] - xc) / span, fwhm / span],
        &[-10.0 * ys, -10.0 * ys, -1.5, 1e-6],
        &[10.0 * ys, 10.0 * ys, 1.5, 10.0],
    )?;
    let p = &sol.params;
    let gamma = p[3] * span;
    res.set("b0", p[0], sol.sigma(0));
    res.set("a0", p[1], sol.sigma(1));
    res.set("center", xc + p[2] * span, gamma / 2.0);
    res.set("gamma", gamma, sol.sigma(3) * span);
    res.residual_norm = sol.residual_norm;
    if p[1].abs() < 2.0 * sol.sigma(1) {
        res.flags.push(FitFlag::NoPeak);
    }
    Ok(res)
}

/// Line candidates must stand this many robust standard deviations clear
/// of the median.
pub const NOISE_FLOOR: f64 = 6.0;

/// Fits up to `max_lines` separated dips or peaks, strongest first, each on
/// a window around its extremum. Features shallower than `min_depth` times
/// the strongest are ignored. Results are sorted by center.
pub fn fit_lorentzian_lines(trace: &SignalTrace, max_lines: usize, min_depth: f64) -> Result<Vec<FitResult>> {
    usable(trace, 5)?;
    let n = trace.len();
    let y = &trace.ordinate;
    let base = median(y);
    // robust noise scale; features inside NOISE_FLOOR of it are not lines
    let mad = median(&y.iter().map(|v| (v - base).abs()).collect::<Vec<_>>());
    let floor_abs = NOISE_FLOOR * 1.4826 * mad;
    let mut masked = vec![false; n];
    let mut out = Vec::new();
    let mut first_depth = None;
    while out.len() < max_lines {
        let Some(k) = (0..n).filter(|&i| !masked[i]).max_by(|&a, &b| (y[a] - base).abs().total_cmp(&(y[b] - base).abs()))
        else {
            break;
        };
        let depth = (y[k] - base).abs();
        let floor = *first_depth.get_or_insert(depth);
        if depth <= 1e-9 || depth < min_depth * floor || depth < floor_abs {
            break;
        }
        let (mut l, mut r) = (k, k);
        while l > 0 && (y[l - 1] - base).abs() > 0.1 * depth {
            l -= 1;
        }
        while r + 1 < n && (y[r + 1] - base).abs() > 0.1 * depth {
            r += 1;
        }
        let w = (r - l).max(4);
        let (wl, wr) = (l.saturating_sub(w), (r + w).min(n - 1));
        let mut sub = trace.clone();
        sub.retain_points(|i, _| i >= wl && i <= wr);
        sub.exposures.clear();
        for m in masked.iter_mut().take(wr + 1).skip(wl) {
            *m = true;
        }
        // a window that will not fit is not a line
        if let Ok(fit) = fit_lorentzian(&sub) {
            if !fit.has_flag(&FitFlag::NoPeak) {
                out.push(fit);
            }
        }
    }
    out.sort_by(|a, b| a.params["center"].total_cmp(&b.params["center"]));
    Ok(out)
}

fn decaying_cosine(u: f64, d: f64, tau: f64) -> f64 {
    0.5 * (1.0 + (2.0 * PI * d * u).cos()) * (-u / tau).exp()
}

/// Start-frequency grid step, in cycles per sweep window. The refinement
/// converges from anywhere within about half a cycle.
const GRID_STEP: f64 = 0.1;

fn grid_tau() -> Vec<f64> {
    (0..40).map(|k| 10f64.powf(-1.5 + 4.0 * k as f64 / 39.0)).collect()
}

/// `½(1 + cos(2π d0 t)) exp(-t/τ0)`; `fixed_d0` pins the frequency (Hz).
pub fn fit_decaying_cosine(trace: &SignalTrace, fixed_d0: Option<f64>) -> Result<FitResult> {
    usable(trace, 5)?;
    let s = time_scale(&trace.abscissa);
    let u: Vec<f64> = trace.abscissa.iter().map(|v| v / s).collect();
    let y = &trace.ordinate;
    let cost = |d: f64, tau: f64| u.iter().zip(y).map(|(&u, &y)| (y - decaying_cosine(u, d, tau)).powi(2)).sum::<f64>();
    let nyq = 0.5 * trace.len() as f64;
    let mut res = FitResult::new(FitModel::DecayingCosine);
    let (sol, d_sigma) = if let Some(d0) = fixed_d0 {
        let du = d0 * s;
        let tau0 = grid_tau().into_iter().min_by(|a, b| cost(du, *a).total_cmp(&cost(du, *b))).expect("grid");
        let sol = levenberg_marquardt(|u, p| decaying_cosine(u, du, p[0]), &u, y, &[tau0], &[1e-3], &[1e6])?;
        let params = vec![du, sol.params[0]];
        let mut cov = nalgebra::DMatrix::zeros(2, 2);
        cov[(1, 1)] = sol.covariance[(0, 0)];
        (Solution { params, covariance: cov, ..sol }, 0.0)
    } else {
        let mut best = (f64::INFINITY, 0.0, 1.0);
        let taus: Vec<f64> = grid_tau().into_iter().step_by(2).collect();
        let decays: Vec<Vec<f64>> = taus.iter().map(|t| u.iter().map(|u| (-u / t).exp()).collect()).collect();
        let mut du = GRID_STEP;
        while du <= nyq {
            let osc: Vec<f64> = u.iter().map(|u| 0.5 * (1.0 + (2.0 * PI * du * u).cos())).collect();
            for (&tau, e) in taus.iter().zip(&decays) {
                let c: f64 = y.iter().zip(&osc).zip(e).map(|((y, o), e)| (y - o * e).powi(2)).sum();
                if c < best.0 {
                    best = (c, du, tau);
                }
            }
            du += GRID_STEP;
        }
        let sol = levenberg_marquardt(
            |u, p| decaying_cosine(u, p[0], p[1]),
            &u,
            y,
            &[best.1, best.2],
            &[0.0, 1e-3],
            &[nyq, 1e6],
        )?;
        let ds = sol.sigma(0);
        (sol, ds)
    };
    let p = &sol.params;
    res.set("d0", p[0] / s, d_sigma / s);
    res.set("tau0", p[1] * s, sol.sigma(1) * s);
    res.residual_norm = sol.residual_norm;
    if p[1] > 1e3 || !(sol.sigma(1) < p[1]) {
        res.flags.push(FitFlag::UnboundedTimescale);
    }
    Ok(res)
}

/// `b0 + A0 exp(-t/T)`; with `fix_b0_zero` the offset is pinned to 0.
pub fn fit_exp_decay(trace: &SignalTrace, fix_b0_zero: bool) -> Result<FitResult> {
    usable(trace, 4)?;
    let s = time_scale(&trace.abscissa);
    let u: Vec<f64> = trace.abscissa.iter().map(|v| v / s).collect();
    let y = &trace.ordinate;
    let mut res = FitResult::new(FitModel::ExpDecay);
    if !fix_b0_zero && is_flat(y) {
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        res.set("b0", mean, 0.0);
        res.set("a0", 0.0, 0.0);
        res.set("t", f64::INFINITY, f64::INFINITY);
        res.flags.push(FitFlag::UnboundedTimescale);
        return Ok(res);
    }
    // linear solve at each trial T for the amplitude(s)
    let mut best = (f64::INFINITY, vec![0.0, 0.0], 1.0);
    for t in grid_tau() {
        let e: Vec<f64> = u.iter().map(|u| (-u / t).exp()).collect();
        let cols = if fix_b0_zero { vec![e] } else { vec![vec![1.0; u.len()], e] };
        if let Some((c, rss)) = linear_lsq(&cols, y) {
            if rss < best.0 {
                best = (rss, c, t);
            }
        }
    }
    let ys = y.iter().map(|v| v.abs()).fold(0.0f64, f64::max).max(1e-12);
    let sol;
    if fix_b0_zero {
        sol = levenberg_marquardt(|u, p| p[0] * (-u / p[1]).exp(), &u, y, &[best.1[0], best.2], &[-10.0 * ys, 1e-3], &[10.0 * ys, 1e6])?;
        res.set("b0", 0.0, 0.0);
        res.set("a0", sol.params[0], sol.sigma(0));
        res.set("t", sol.params[1] * s, sol.sigma(1) * s);
    } else {
        sol = levenberg_marquardt(
            |u, p| p[0] + p[1] * (-u / p[2]).exp(),
            &u,
            y,
            &[best.1[0], best.1[1], best.2],
            &[-10.0 * ys, -10.0 * ys, 1e-3],
            &[10.0 * ys, 10.0 * ys, 1e6],
        )?;
        res.set("b0", sol.params[0], sol.sigma(0));
        res.set("a0", sol.params[1], sol.sigma(1));
        res.set("t", sol.params[2] * s, sol.sigma(2) * s);
    }
    res.residual_norm = sol.residual_norm;
    let (t, ts) = (res.params["t"] / s, res.uncertainties["t"] / s);
    let (a, asig) = (res.params["a0"], res.uncertainties["a0"]);
    if t > 1e3 || !(ts < t) || a.abs() < 2.0 * asig {
        res.flags.push(FitFlag::UnboundedTimescale);
    }
    Ok(res)
}

/// Fewest cycles per sweep window tried as a cosine start frequency.
pub const MIN_COSINE_CYCLES: f64 = 0.75;

/// `b0 + A0 cos(2π d0 t)`.
pub fn fit_cosine(trace: &SignalTrace) -> Result<FitResult> {
    usable(trace, 4)?;
    let s = time_scale(&trace.abscissa);
    let u: Vec<f64> = trace.abscissa.iter().map(|v| v / s).collect();
    let y = &trace.ordinate;
    let nyq = 0.5 * trace.len() as f64;
    let mut best = (f64::INFINITY, vec![0.0, 0.0], 1.0);
    // below most of a cycle per window a cosine is just a trend
    let span = u.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) - u.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let mut du = MIN_COSINE_CYCLES / span.max(1e-12);
    while du <= nyq {
        let c: Vec<f64> = u.iter().map(|u| (2.0 * PI * du * u).cos()).collect();
        if let Some((coef, rss)) = linear_lsq(&[vec![1.0; u.len()], c], y) {
            if rss < best.0 {
                best = (rss, coef, du);
            }
        }
        du += GRID_STEP;
    }
    let ys = y.iter().map(|v| v.abs()).fold(0.0f64, f64::max).max(1e-12);
    let sol = levenberg_marquardt(
        |u, p| p[0] + p[1] * (2.0 * PI * p[2] * u).cos(),
        &u,
        y,
        &[best.1[0], best.1[1], best.2],
        &[-10.0 * ys, -10.0 * ys, 0.0],
        &[10.0 * ys, 10.0 * ys, nyq],
    )?;
    let mut res = FitResult::new(FitModel::Cosine);
    res.set("b0", sol.params[0], sol.sigma(0));
    res.set("a0", sol.params[1], sol.sigma(1));
    res.set("d0", sol.params[2] / s, sol.sigma(2) / s);
    res.residual_norm = sol.residual_norm;
    Ok(res)
}

/// Periodogram peak as a fit: `d0` with uncertainty `Δd`.
pub fn fit_fft_peak(trace: &SignalTrace) -> Result<FitResult> {
    let pk = extract_peak(&periodogram(trace)?)?;
    let mut res = FitResult::new(FitModel::FftPeakLorentzian);
    res.set("d0", pk.d0, pk.delta_d);
    res.set("delta_d", pk.delta_d, 0.0);
    if !pk.secondary.is_empty() {
        res.flags.push(FitFlag::SecondaryPeaks(pk.secondary));
    }
    Ok(res)
}

/// Dispatch by model; `exp_decay` leaves the offset free.
pub fn fit_trace(model: FitModel, trace: &SignalTrace) -> Result<FitResult> {
    match model {
        FitModel::Lorentzian => fit_lorentzian(trace),
        FitModel::DecayingCosine => fit_decaying_cosine(trace, None),
        FitModel::ExpDecay => fit_exp_decay(trace, false),
        FitModel::Cosine => fit_cosine(trace),
        FitModel::FftPeakLorentzian => fit_fft_peak(trace),
    }
}

/// Offset that makes a cosine fit equal 1 at zero lock time: `b0 + A0 - 1`.
pub fn baseline_offset_hhcp(fit: &FitResult) -> Result<f64> {
    if fit.model != FitModel::Cosine {
        return Err(Error::Fit(format!("baseline offset needs a cosine fit, got {:?}", fit.model)));
    }
    Ok(fit.param("b0")? + fit.param("a0")? - 1.0)
}

/// Per-gate fidelity from a round-trip amplitude: `sqrt(amplitude)`.
pub fn iswap_fidelity_from_calibration(amplitude: f64) -> Result<f64> {
    if !(amplitude > 0.0 && amplitude <= 1.0) {
        return Err(Error::InvalidArgument(format!("round-trip amplitude must lie in (0, 1], got {amplitude}")));
    }
    Ok(amplitude.sqrt())
}
