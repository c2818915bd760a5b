//! STFT analysis and weighted overlap-add synthesis.
//!
//! Analysis uses a periodic Hann window; synthesis applies the window again
//! and divides by the accumulated squared window, which reconstructs the
//! input exactly (up to rounding) everywhere at least one frame overlaps
//! another. Frames start at sample 0 with no pre-padding, so the transform
//! is causal and a frame is complete 40 ms after its first sample.

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{MultichannelAudio, FFT_SIZE, FRAME_LEN, HOP, NUM_BINS};
use crate::error::{Error, Result};

/// Complex STFT frames for every channel: shape `(channels, frames, bins)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramStack {
    frames: Array3<Complex64>,
    frame_len: usize,
    hop: usize,
    fft_size: usize,
    sample_rate: u32,
}

impl SpectrogramStack {
    pub fn new(frames: Array3<Complex64>, sample_rate: u32) -> Result<Self> {
        if frames.dim().2 != NUM_BINS {
            return Err(Error::ShapeMismatch {
                expected: format!("{NUM_BINS} bins"),
                got: format!("{} bins", frames.dim().2),
            });
        }
        Ok(Self {
            frames,
            frame_len: FRAME_LEN,
            hop: HOP,
            fft_size: FFT_SIZE,
            sample_rate,
        })
    }

    pub fn frames(&self) -> &Array3<Complex64> {
        &self.frames
    }

    pub fn frames_mut(&mut self) -> &mut Array3<Complex64> {
        &mut self.frames
    }

    pub fn num_channels(&self) -> usize {
        self.frames.dim().0
    }

    pub fn num_frames(&self) -> usize {
        self.frames.dim().1
    }

    pub fn num_bins(&self) -> usize {
        self.frames.dim().2
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// One channel's TF plane as a `(frames, bins)` matrix.
    pub fn channel_plane(&self, channel: usize) -> Array2<Complex64> {
        self.frames
            .index_axis(ndarray::Axis(0), channel)
            .to_owned()
    }
}

/// Periodic Hann window of length `n`.
pub(crate) fn hann_periodic(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()))
        .collect()
}

/// Forward transform of every channel into one-sided complex spectra.
///
/// The input must hold at least one full frame (640 samples).
pub fn stft(audio: &MultichannelAudio) -> Result<SpectrogramStack> {
    let len = audio.num_samples();
    if len < FRAME_LEN {
        return Err(Error::AudioTooShort {
            len,
            min: FRAME_LEN,
        });
    }
    let n_frames = super::num_frames(len);
    let n_ch = audio.num_channels();
    let window = hann_periodic(FRAME_LEN);

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(FFT_SIZE);
    let mut buf = vec![Complex64::default(); FFT_SIZE];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    let mut frames = Array3::zeros((n_ch, n_frames, NUM_BINS));
    for ch in 0..n_ch {
        let samples = audio.channel(ch);
        for t in 0..n_frames {
            let start = t * HOP;
            for (i, b) in buf.iter_mut().enumerate() {
                *b = if i < FRAME_LEN {
                    Complex64::new(samples[start + i] * window[i], 0.0)
                } else {
                    Complex64::default()
                };
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for f in 0..NUM_BINS {
                frames[[ch, t, f]] = buf[f];
            }
        }
    }
    SpectrogramStack::new(frames, audio.sample_rate())
}

/// Inverse transform by weighted overlap-add, trimmed or zero-padded to
/// `out_len` samples.
pub fn istft(spec: &SpectrogramStack, out_len: usize) -> Result<MultichannelAudio> {
    if spec.num_bins() != NUM_BINS {
        return Err(Error::ShapeMismatch {
            expected: format!("{NUM_BINS} bins"),
            got: format!("{} bins", spec.num_bins()),
        });
    }
    let n_ch = spec.num_channels();
    let n_frames = spec.num_frames();
    let window = hann_periodic(FRAME_LEN);

    let mut planner = FftPlanner::<f64>::new();
    let ifft = planner.plan_fft_inverse(FFT_SIZE);
    let mut buf = vec![Complex64::default(); FFT_SIZE];
    let mut scratch = vec![Complex64::default(); ifft.get_inplace_scratch_len()];

    let span = if n_frames == 0 {
        0
    } else {
        (n_frames - 1) * HOP + FRAME_LEN
    };
    let mut out = Array2::zeros((out_len, n_ch));
    let mut acc = vec![0.0f64; span];
    let mut wsum = vec![0.0f64; span];

    for ch in 0..n_ch {
        acc.iter_mut().for_each(|v| *v = 0.0);
        wsum.iter_mut().for_each(|v| *v = 0.0);
        for t in 0..n_frames {
            // rebuild the full Hermitian spectrum from the one-sided half
            for f in 0..NUM_BINS {
                buf[f] = spec.frames()[[ch, t, f]];
            }
            for f in NUM_BINS..FFT_SIZE {
                buf[f] = spec.frames()[[ch, t, FFT_SIZE - f]].conj();
            }
            ifft.process_with_scratch(&mut buf, &mut scratch);
            let start = t * HOP;
            for i in 0..FRAME_LEN {
                let v = buf[i].re / FFT_SIZE as f64;
                acc[start + i] += v * window[i];
                wsum[start + i] += window[i] * window[i];
            }
        }
        for n in 0..span.min(out_len) {
            if wsum[n] >= super::WSUM_FLOOR {
                out[[n, ch]] = acc[n] / wsum[n];
            }
        }
    }
    MultichannelAudio::new(out, spec.sample_rate())
}
