use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::lsq::levenberg_marquardt;
use crate::error::{Error, Result};
use crate::sequence::SignalTrace;

/// Zero-padding factor applied before the transform.
pub const ZERO_PAD: usize = 4;
/// Secondary maxima above this fraction of the dominant peak are reported.
pub const SECONDARY_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Ascending, from zero to Nyquist (cycles per abscissa unit).
    pub frequencies: Vec<f64>,
    /// Normalized to a maximum of 1; all zero for a constant input.
    pub power: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakEstimate {
    pub d0: f64,
    /// Half width of the fitted Lorentzian.
    pub delta_d: f64,
    pub secondary: Vec<f64>,
}

fn uniform_step(x: &[f64]) -> Result<f64> {
    if x.len() < 4 {
        return Err(Error::InvalidTrace("periodogram needs at least 4 points".into()));
    }
    let dx = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    if !(dx > 0.0) {
        return Err(Error::InvalidTrace("abscissa must increase".into()));
    }
    if x.windows(2).any(|w| ((w[1] - w[0]) - dx).abs() > 1e-6 * dx) {
        return Err(Error::InvalidTrace("periodogram needs uniform sampling".into()));
    }
    Ok(dx)
}

/// Mean-subtracted, zero-padded, rectangular-window power spectrum.
pub fn periodogram(trace: &SignalTrace) -> Result<Spectrum> {
    trace.check_shape()?;
    let dx = uniform_step(&trace.abscissa)?;
    let n = trace.len();
    let mean = trace.ordinate.iter().sum::<f64>() / n as f64;
    let total = n * ZERO_PAD;
    let mut buf: Vec<Complex<f64>> = trace.ordinate.iter().map(|y| Complex::new(y - mean, 0.0)).collect();
    buf.resize(total, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(total).process(&mut buf);
    let half = total / 2;
    let frequencies: Vec<f64> = (0..=half).map(|k| k as f64 / (total as f64 * dx)).collect();
    let mut power: Vec<f64> = buf[..=half].iter().map(|z| z.norm_sqr()).collect();
    let rms = (trace.ordinate.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let max = power.iter().copied().fold(0.0, f64::max);
    if rms <= 1e-12 * (1.0 + mean.abs()) || max == 0.0 {
        power.iter_mut().for_each(|p| *p = 0.0);
    } else {
        power.iter_mut().for_each(|p| *p /= max);
    }
    Ok(Spectrum { frequencies, power })
}

fn local_maxima(power: &[f64], from: usize) -> Vec<usize> {
    (from.max(1)..power.len())
        .filter(|&k| power[k] >= power[k - 1] && (k + 1 == power.len() || power[k] > power[k + 1]))
        .collect()
}

/// Dominant peak with a Lorentzian `Δd² / ((f - d0)² + Δd²)` fitted to its
/// lobe. The lobe that descends from zero frequency, and anything below
/// one cycle per window, is skipped so slow envelopes do not mask the
/// oscillation.
pub fn extract_peak(spectrum: &Spectrum) -> Result<PeakEstimate> {
    let p = &spectrum.power;
    let f = &spectrum.frequencies;
    if p.len() < 3 || p.iter().all(|&v| v == 0.0) {
        return Err(Error::NoPeak);
    }
    let mut start = 1;
    while start + 1 < p.len() && p[start + 1] < p[start] {
        start += 1;
    }
    // nothing below one cycle per window is resolvable; with zero padding
    // that is bin ZERO_PAD
    let start = start.max(ZERO_PAD.min(p.len() - 1));
    let maxima = local_maxima(p, start);
    let &k0 = maxima
        .iter()
        .max_by(|&&a, &&b| p[a].total_cmp(&p[b]))
        .ok_or(Error::NoPeak)?;
    let top = p[k0];
    if top <= 0.0 {
        return Err(Error::NoPeak);
    }
    // lobe edges: walk down to the neighbouring minima
    let (mut lo, mut hi) = (k0, k0);
    while lo > 1 && p[lo - 1] < p[lo] {
        lo -= 1;
    }
    while hi + 1 < p.len() && p[hi + 1] < p[hi] {
        hi += 1;
    }
    // fit within the half-power part of the lobe, at least 5 bins
    let (mut a, mut b) = (k0, k0);
    while a > lo && p[a - 1] >= 0.5 * top {
        a -= 1;
    }
    while b < hi && p[b + 1] >= 0.5 * top {
        b += 1;
    }
    while b - a + 1 < 5 && (a > lo || b < hi) {
        a = a.saturating_sub(1).max(lo);
        b = (b + 1).min(hi);
    }
    let df = f[1] - f[0];
    let xs: Vec<f64> = (a..=b).map(|k| (f[k] - f[k0]) / df).collect();
    let ys: Vec<f64> = (a..=b).map(|k| p[k] / top).collect();
    let half_guess = (((b - a) as f64) / 2.0).max(1.0);
    let lor = |x: f64, q: &[f64]| top_lorentz(x, q[0], q[1]);
    let (d0, delta_d) = match levenberg_marquardt(lor, &xs, &ys, &[0.0, half_guess], &[-2.0, 1e-3], &[2.0, 1e3]) {
        Ok(s) => (f[k0] + s.params[0] * df, s.params[1] * df),
        Err(_) => (f[k0], half_guess * df),
    };
    let secondary = maxima
        .iter()
        .filter(|&&k| (k < lo || k > hi) && p[k] > SECONDARY_FRACTION * top)
        .map(|&k| f[k])
        .collect();
    Ok(PeakEstimate { d0, delta_d, secondary })
}

fn top_lorentz(x: f64, x0: f64, w: f64) -> f64 {
    w * w / ((x - x0).powi(2) + w * w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::SweepParameter;
    use std::f64::consts::PI;

    fn tone(freqs: &[f64], n: usize, span: f64) -> SignalTrace {
        let t: Vec<f64> = (0..n).map(|k| k as f64 * span / (n - 1) as f64).collect();
        let y = t.iter().map(|&t| freqs.iter().map(|f| (2.0 * PI * f * t).cos()).sum()).collect();
        SignalTrace::new(SweepParameter::EchoTime, t, y).unwrap()
    }

    #[test]
    fn single_tone_within_one_bin() {
        let s = periodogram(&tone(&[67e3], 100, 60e-6)).unwrap();
        let bin = s.frequencies[1];
        let pk = extract_peak(&s).unwrap();
        assert!((pk.d0 - 67e3).abs() <= bin, "{} vs bin {}", pk.d0, bin);
        assert!(pk.secondary.is_empty());
        assert!(s.power.iter().all(|&p| (0.0..=1.0).contains(&p)));
        assert!(s.frequencies.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn two_tones_flag_secondary() {
        let pk = extract_peak(&periodogram(&tone(&[20e3, 35e3], 200, 200e-6)).unwrap()).unwrap();
        assert_eq!(pk.secondary.len(), 1);
        let other = if (pk.d0 - 20e3).abs() < 2e3 { 35e3 } else { 20e3 };
        assert!((pk.secondary[0] - other).abs() < 2e3);
    }

    #[test]
    fn dc_has_no_peak() {
        let t: Vec<f64> = (0..64).map(|k| k as f64).collect();
        let tr = SignalTrace::new(SweepParameter::EchoTime, t, vec![0.7; 64]).unwrap();
        assert!(matches!(extract_peak(&periodogram(&tr).unwrap()), Err(Error::NoPeak)));
    }

    #[test]
    fn non_uniform_rejected() {
        let tr = SignalTrace::new(SweepParameter::EchoTime, vec![0.0, 1.0, 2.0, 4.0, 5.0], vec![0.0; 5]).unwrap();
        assert!(periodogram(&tr).is_err());
    }

    #[test]
    fn decaying_envelope_does_not_mask_oscillation() {
        let n = 121;
        let t: Vec<f64> = (0..n).map(|k| k as f64 * 0.5e-6).collect();
        let y = t.iter().map(|&t| 0.5 * (1.0 + (2.0 * PI * 67e3 * t).cos()) * (-t / 50e-6).exp()).collect();
        let tr = SignalTrace::new(SweepParameter::EchoTime, t, y).unwrap();
        let pk = extract_peak(&periodogram(&tr).unwrap()).unwrap();
        assert!((pk.d0 - 67e3).abs() < pk.delta_d, "{pk:?}");
    }
}
