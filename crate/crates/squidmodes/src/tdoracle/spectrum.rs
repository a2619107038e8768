//! Spectral estimation for chain probe series: Hann-windowed FFT, parabolic
//! peak interpolation, golden-section refinement and least-squares component
//! fitting.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Minimum series length for spectral estimation.
pub const MIN_SAMPLES: usize = 1 << 14;

/// One located spectral line.
#[derive(Debug, Clone, Copy)]
pub struct SpectralPeak {
    /// Frequency (Hz).
    pub frequency: f64,
    /// Complex amplitude c with x(t) ~ Re[c e^{i 2 pi f t}]; a pure cosine of
    /// amplitude A gives c = A.
    pub amplitude: C64,
}

/// Peaks of a probe series with carrier-referenced ratios.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Peaks sorted by frequency.
    pub peaks: Vec<SpectralPeak>,
    /// Index of the strongest peak.
    pub carrier: usize,
    /// Signed amplitude ratio of each peak against the carrier.
    pub ratios: Vec<f64>,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let x = std::f64::consts::TAU * i as f64 / (n as f64 - 1.0);
            0.5 * (1.0 - x.cos())
        })
        .collect()
}

/// Projection of the windowed series onto e^{-i 2 pi f t}, normalized so a
/// pure cosine of amplitude A at frequency f returns A (up to window
/// leakage).
pub fn windowed_projection(series: &[f64], sample_dt: f64, window: &[f64], f: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    let mut wsum = 0.0;
    let w_ang = -std::f64::consts::TAU * f * sample_dt;
    // incremental phasor avoids n trig calls
    let rot = C64::from_polar(1.0, w_ang);
    let mut phase = C64::new(1.0, 0.0);
    for (i, &x) in series.iter().enumerate() {
        acc += phase * (x * window[i]);
        wsum += window[i];
        phase *= rot;
        if i % 4096 == 4095 {
            // renormalize the phasor against drift
            phase /= phase.norm();
        }
    }
    acc * (2.0 / wsum)
}

fn refine_frequency(series: &[f64], sample_dt: f64, window: &[f64], f0: f64, span: f64) -> f64 {
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (f0 - span, f0 + span);
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = -windowed_projection(series, sample_dt, window, c).norm();
    let mut fd = -windowed_projection(series, sample_dt, window, d).norm();
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = -windowed_projection(series, sample_dt, window, c).norm();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = -windowed_projection(series, sample_dt, window, d).norm();
        }
        if (b - a).abs() < 1e-10 * f0.abs().max(1.0) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Windowed FFT spectrum with interpolated peaks.
///
/// Local maxima above `rel_threshold` of the strongest bin are located by
/// quadratic interpolation of the log magnitude and refined by maximizing the
/// windowed projection; complex amplitudes are the projections at the refined
/// frequencies.
pub fn spectrum(series: &[f64], sample_dt: f64, rel_threshold: f64) -> Result<SpectrumReport> {
    if series.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            got: series.len(),
            required: MIN_SAMPLES,
        });
    }
    let n = series.len();
    let window = hann(n);
    let mut buf: Vec<C64> = series
        .iter()
        .zip(window.iter())
        .map(|(&x, &w)| C64::new(x * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let mags: Vec<f64> = buf[..half].iter().map(|z| z.norm()).collect();
    let max_mag = mags.iter().cloned().fold(0.0f64, f64::max);
    if max_mag == 0.0 {
        return Ok(SpectrumReport {
            peaks: Vec::new(),
            carrier: 0,
            ratios: Vec::new(),
        });
    }
    let bin_hz = 1.0 / (n as f64 * sample_dt);
    let mut peaks = Vec::new();
    for k in 2..half - 2 {
        let m = mags[k];
        if m < rel_threshold * max_mag {
            continue;
        }
        if !(m > mags[k - 1] && m >= mags[k + 1] && m > mags[k - 2] && m >= mags[k + 2]) {
            continue;
        }
        // parabolic interpolation on the log magnitude
        let (la, lb, lc) = (mags[k - 1].ln(), m.ln(), mags[k + 1].ln());
        let denom = la - 2.0 * lb + lc;
        let delta = if denom.abs() > 1e-300 {
            (0.5 * (la - lc) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let f_est = (k as f64 + delta) * bin_hz;
        let f = refine_frequency(series, sample_dt, &window, f_est, 1.5 * bin_hz);
        let amp = windowed_projection(series, sample_dt, &window, f);
        peaks.push(SpectralPeak {
            frequency: f,
            amplitude: amp,
        });
    }
    peaks.sort_by(|a, b| a.frequency.partial_cmp(&b.frequency).unwrap());
    let carrier = peaks
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.amplitude.norm().partial_cmp(&b.1.amplitude.norm()).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let ratios = if peaks.is_empty() {
        Vec::new()
    } else {
        let c0 = peaks[carrier].amplitude;
        peaks
            .iter()
            .map(|p| (p.amplitude / c0).re)
            .collect()
    };
    Ok(SpectrumReport {
        peaks,
        carrier,
        ratios,
    })
}

/// The strongest peak within ±`half_window` Hz of `f_guess`.
pub fn peak_near(
    series: &[f64],
    sample_dt: f64,
    f_guess: f64,
    half_window: f64,
) -> Result<SpectralPeak> {
    if series.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            got: series.len(),
            required: MIN_SAMPLES,
        });
    }
    let n = series.len();
    let window = hann(n);
    let mut buf: Vec<C64> = series
        .iter()
        .zip(window.iter())
        .map(|(&x, &w)| C64::new(x * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bin_hz = 1.0 / (n as f64 * sample_dt);
    let half = n / 2;
    let lo = (((f_guess - half_window) / bin_hz).floor().max(1.0)) as usize;
    let hi = ((((f_guess + half_window) / bin_hz).ceil()) as usize).min(half - 2);
    if lo >= hi {
        return Err(Error::InsufficientSamples {
            got: 0,
            required: 1,
        });
    }
    let k = (lo..=hi)
        .max_by(|&a, &b| buf[a].norm().partial_cmp(&buf[b].norm()).unwrap())
        .unwrap();
    let f = refine_frequency(series, sample_dt, &window, k as f64 * bin_hz, 1.5 * bin_hz);
    let amp = windowed_projection(series, sample_dt, &window, f);
    Ok(SpectralPeak {
        frequency: f,
        amplitude: amp,
    })
}

/// Least-squares fit of cos/sin pairs at fixed frequencies; returns one
/// complex amplitude per frequency with x(t) = sum Re[c_j e^{i 2 pi f_j t}].
pub fn fit_components(series: &[f64], sample_dt: f64, freqs: &[f64]) -> Vec<C64> {
    let m = 2 * freqs.len();
    let n = series.len();
    // normal equations on the cos/sin design matrix
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    for &f in freqs {
        let w = std::f64::consts::TAU * f;
        let mut c = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 * sample_dt;
            c.push((w * t).cos());
            s.push((w * t).sin());
        }
        cols.push(c);
        cols.push(s);
    }
    let mut ata = vec![vec![0.0f64; m]; m];
    let mut atb = vec![0.0f64; m];
    for i in 0..m {
        for j in i..m {
            let dot: f64 = cols[i].iter().zip(cols[j].iter()).map(|(a, b)| a * b).sum();
            ata[i][j] = dot;
            ata[j][i] = dot;
        }
        atb[i] = cols[i].iter().zip(series.iter()).map(|(a, b)| a * b).sum();
    }
    // gaussian elimination with partial pivoting
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&a, &b| ata[a][col].abs().partial_cmp(&ata[b][col].abs()).unwrap())
            .unwrap();
        ata.swap(col, piv);
        atb.swap(col, piv);
        let d = ata[col][col];
        for r in (col + 1)..m {
            let factor = ata[r][col] / d;
            for c in col..m {
                ata[r][c] -= factor * ata[col][c];
            }
            atb[r] -= factor * atb[col];
        }
    }
    let mut x = vec![0.0f64; m];
    for r in (0..m).rev() {
        let mut acc = atb[r];
        for c in (r + 1)..m {
            acc -= ata[r][c] * x[c];
        }
        x[r] = acc / ata[r][r];
    }
    // p cos + q sin = Re[(p - i q) e^{i w t}]
    freqs
        .iter()
        .enumerate()
        .map(|(j, _)| C64::new(x[2 * j], -x[2 * j + 1]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn tone(n: usize, fs: f64, f: f64, amp: f64, phase: f64) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (TAU * f * i as f64 / fs + phase).cos())
            .collect()
    }

    #[test]
    fn single_tone_frequency_within_bound() {
        let fs = 50e9;
        let f1 = 7.34321e9;
        let x = tone(1 << 14, fs, f1, 1.0, 0.3);
        let rep = spectrum(&x, 1.0 / fs, 1e-4).unwrap();
        assert_eq!(rep.peaks.len(), 1);
        let err = (rep.peaks[0].frequency - f1).abs() / f1;
        assert!(err < 5e-4, "relative error {err}");
        assert_relative_eq!(rep.peaks[0].amplitude.norm(), 1.0, max_relative = 1e-3);
    }

    #[test]
    fn two_tone_ratio_recovered() {
        let fs = 50e9;
        let f1 = 7.34321e9;
        let n = 1 << 14;
        let mut x = tone(n, fs, f1, 1.0, 0.0);
        let weak = tone(n, fs, f1 - 2.0e9, 0.02, 0.0);
        for (a, b) in x.iter_mut().zip(weak.iter()) {
            *a += b;
        }
        let rep = spectrum(&x, 1.0 / fs, 1e-4).unwrap();
        assert_eq!(rep.peaks.len(), 2);
        assert_eq!(rep.carrier, 1);
        let ratio = rep.ratios[0];
        assert!(
            (ratio - 0.02).abs() / 0.02 < 0.02,
            "ratio {ratio} off by more than 2%"
        );
        // peaks sorted, ratio magnitudes bounded by 1
        assert!(rep.peaks[0].frequency < rep.peaks[1].frequency);
        assert!(rep.ratios.iter().all(|r| r.abs() <= 1.0 + 1e-9));
    }

    #[test]
    fn signed_ratio_by_least_squares() {
        let fs = 50e9;
        let f1 = 7.3e9;
        let f2 = 5.3e9;
        let n = 1 << 14;
        let mut x = tone(n, fs, f1, 1.0, 0.0);
        let flipped = tone(n, fs, f2, 0.03, std::f64::consts::PI);
        for (a, b) in x.iter_mut().zip(flipped.iter()) {
            *a += b;
        }
        let c = fit_components(&x, 1.0 / fs, &[f1, f2]);
        assert_relative_eq!(c[0].re, 1.0, max_relative = 1e-6);
        assert_relative_eq!(c[1].re, -0.03, max_relative = 1e-4);
    }

    #[test]
    fn short_series_rejected() {
        let x = vec![0.0; 100];
        assert!(matches!(
            spectrum(&x, 1e-10, 1e-4),
            Err(Error::InsufficientSamples { .. })
        ));
    }
}
