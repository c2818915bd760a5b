//! 80-band log-mel (Fbank) features over one-sided power spectra.

use ndarray::{Array2, Array3};

use super::{SpectrogramStack, NUM_BINS, SAMPLE_RATE};
use crate::error::Result;

/// Number of triangular mel filters.
pub const NUM_MEL_BANDS: usize = 80;
/// Power floor applied before the natural log.
pub const LOG_FLOOR: f64 = 1e-10;

/// Log-mel features, shape `(channels, frames, 80)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FbankMatrix {
    values: Array3<f64>,
}

impl FbankMatrix {
    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }

    pub fn num_channels(&self) -> usize {
        self.values.dim().0
    }

    pub fn num_frames(&self) -> usize {
        self.values.dim().1
    }

    pub fn num_bands(&self) -> usize {
        self.values.dim().2
    }

    pub fn into_values(self) -> Array3<f64> {
        self.values
    }
}

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular mel filter weights, shape `(NUM_MEL_BANDS, NUM_BINS)`.
///
/// Filters span 0-8000 Hz on the HTK mel scale with unit peak; no area
/// normalization, so a filter's response to white noise is proportional to
/// its bandwidth.
pub fn mel_filterbank() -> Array2<f64> {
    let f_max = SAMPLE_RATE as f64 / 2.0;
    let mel_max = hz_to_mel(f_max);
    // band edges: NUM_MEL_BANDS + 2 points evenly spaced in mel
    let edges: Vec<f64> = (0..NUM_MEL_BANDS + 2)
        .map(|i| mel_to_hz(mel_max * i as f64 / (NUM_MEL_BANDS + 1) as f64))
        .collect();
    let bin_hz = SAMPLE_RATE as f64 / super::FFT_SIZE as f64;

    let mut weights = Array2::zeros((NUM_MEL_BANDS, NUM_BINS));
    for k in 0..NUM_MEL_BANDS {
        let (lo, mid, hi) = (edges[k], edges[k + 1], edges[k + 2]);
        for bin in 0..NUM_BINS {
            let f = bin as f64 * bin_hz;
            if f > lo && f < hi {
                weights[[k, bin]] = if f <= mid {
                    (f - lo) / (mid - lo)
                } else {
                    (hi - f) / (hi - mid)
                };
            }
        }
    }
    weights
}

/// Log-mel features of every channel in the stack.
pub fn fbank(spec: &SpectrogramStack) -> Result<FbankMatrix> {
    let weights = mel_filterbank();
    let (n_ch, n_frames, _) = spec.frames().dim();
    let mut values = Array3::zeros((n_ch, n_frames, NUM_MEL_BANDS));
    let mut power = vec![0.0f64; NUM_BINS];
    for ch in 0..n_ch {
        for t in 0..n_frames {
            for (f, p) in power.iter_mut().enumerate() {
                *p = spec.frames()[[ch, t, f]].norm_sqr();
            }
            for k in 0..NUM_MEL_BANDS {
                let mut acc = 0.0;
                for f in 0..NUM_BINS {
                    acc += weights[[k, f]] * power[f];
                }
                values[[ch, t, k]] = acc.max(LOG_FLOOR).ln();
            }
        }
    }
    Ok(FbankMatrix { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{stft, MultichannelAudio, FRAME_LEN};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn filterbank_edges_match_closed_form() {
        // spot-check the mel grid against direct evaluation
        let mel_max = hz_to_mel(8000.0);
        assert!((mel_max - 2840.0230467).abs() < 1e-3);
        let mid_hz = mel_to_hz(mel_max / 2.0);
        assert!((hz_to_mel(mid_hz) - mel_max / 2.0).abs() < 1e-9);
        let weights = mel_filterbank();
        assert_eq!(weights.dim(), (NUM_MEL_BANDS, NUM_BINS));
        // every filter must touch at least one bin
        for k in 0..NUM_MEL_BANDS {
            assert!(weights.row(k).sum() > 0.0, "filter {k} is empty");
        }
    }

    #[test]
    fn zeros_hit_the_log_floor() {
        let audio = MultichannelAudio::zeros(FRAME_LEN * 4, 2, 16000);
        let fb = fbank(&stft(&audio).unwrap()).unwrap();
        for v in fb.values() {
            assert_eq!(*v, LOG_FLOOR.ln());
        }
    }

    #[test]
    fn white_noise_tracks_filter_bandwidth() {
        // E|X_k|^2 for windowed white noise is sigma^2 * sum(w^2) at every
        // bin, so each filter's mean output should be rowsum * that value.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let sigma = 0.5f64;
        let noise: Vec<f64> = (0..160_000)
            .map(|_| {
                // sum of 12 uniforms: near-gaussian, variance sigma^2
                let s: f64 = (0..12).map(|_| rng.gen_range(-0.5..0.5)).sum();
                s * sigma
            })
            .collect();
        let audio = MultichannelAudio::from_mono(noise, 16000).unwrap();
        let fb = fbank(&stft(&audio).unwrap()).unwrap();
        let window = crate::dsp::stft::hann_periodic(FRAME_LEN);
        let wsq: f64 = window.iter().map(|w| w * w).sum();
        let expected_bin_power = sigma * sigma * wsq;
        let weights = mel_filterbank();
        for k in 0..NUM_MEL_BANDS {
            let expected = weights.row(k).sum() * expected_bin_power;
            let mean: f64 = (0..fb.num_frames())
                .map(|t| fb.values()[[0, t, k]].exp())
                .sum::<f64>()
                / fb.num_frames() as f64;
            let rel = (mean - expected).abs() / expected;
            assert!(rel < 0.2, "filter {k}: rel {rel}");
        }
    }

    #[test]
    fn gain_shifts_log_output_additively() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sig: Vec<f64> = (0..FRAME_LEN * 8).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let a = MultichannelAudio::from_mono(sig.clone(), 16000).unwrap();
        let b = MultichannelAudio::from_mono(sig.iter().map(|v| v * 10.0).collect(), 16000)
            .unwrap();
        let fa = fbank(&stft(&a).unwrap()).unwrap();
        let fb = fbank(&stft(&b).unwrap()).unwrap();
        let shift = 100.0f64.ln();
        for (x, y) in fa.values().iter().zip(fb.values().iter()) {
            if *x > LOG_FLOOR.ln() + 1.0 {
                assert!((y - x - shift).abs() < 1e-9);
            }
        }
    }
}
