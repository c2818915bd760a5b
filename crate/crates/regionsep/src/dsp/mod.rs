//! Framing, STFT/iSTFT and log-mel features.
//!
//! All pipelines in the crate run at 16 kHz with 40 ms frames and 20 ms
//! hops (640/320 samples), zero-padded to a 1024-point FFT. Those constants
//! are fixed here rather than threaded through every call site.

mod fbank;
mod stft;
pub mod tensor;
pub mod wav;

pub use fbank::{fbank, mel_filterbank, FbankMatrix, LOG_FLOOR, NUM_MEL_BANDS};
pub use stft::{istft, stft, SpectrogramStack};

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// Sample rate every paper-protocol pipeline runs at.
pub const SAMPLE_RATE: u32 = 16000;
/// Analysis frame length in samples (40 ms at 16 kHz).
pub const FRAME_LEN: usize = 640;
/// Frame hop in samples (20 ms at 16 kHz).
pub const HOP: usize = 320;
/// FFT size; frames are zero-padded from `FRAME_LEN` up to this.
pub const FFT_SIZE: usize = 1024;
/// One-sided spectrum size.
pub const NUM_BINS: usize = FFT_SIZE / 2 + 1;

/// Overlap-add synthesis mutes samples whose accumulated squared-window
/// support falls below this. Interior samples of a Hann/50% stream sit in
/// [0.5, 1.0]; only the outer part of the first and last half-frame is
/// affected, and reconstruction is undefined there regardless. Without the
/// floor, masked spectra would be amplified by the vanishing window tails.
pub(crate) const WSUM_FLOOR: f64 = 0.499;

/// The periodic Hann analysis window at the module frame length.
pub(crate) fn hann_window() -> Vec<f64> {
    stft::hann_periodic(FRAME_LEN)
}

/// Number of full analysis frames for a signal of `len` samples.
pub fn num_frames(len: usize) -> usize {
    if len < FRAME_LEN {
        0
    } else {
        1 + (len - FRAME_LEN) / HOP
    }
}

/// A sample-rate-tagged block of multichannel audio, shape `(samples, channels)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelAudio {
    samples: Array2<f64>,
    sample_rate: u32,
}

impl MultichannelAudio {
    /// Wrap a `(samples, channels)` matrix. Every value must be finite.
    pub fn new(samples: Array2<f64>, sample_rate: u32) -> Result<Self> {
        if samples.ncols() == 0 {
            return Err(Error::InvalidAudio("zero channels".into()));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidAudio("zero sample rate".into()));
        }
        if !samples.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidAudio("non-finite sample".into()));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn zeros(num_samples: usize, num_channels: usize, sample_rate: u32) -> Self {
        Self {
            samples: Array2::zeros((num_samples, num_channels)),
            sample_rate,
        }
    }

    /// Build from per-channel sample vectors, which must share a length.
    pub fn from_channels(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidAudio("zero channels".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::InvalidAudio("channel length mismatch".into()));
        }
        let mut samples = Array2::zeros((len, channels.len()));
        for (m, ch) in channels.iter().enumerate() {
            for (t, &v) in ch.iter().enumerate() {
                samples[[t, m]] = v;
            }
        }
        Self::new(samples, sample_rate)
    }

    /// Single-channel convenience constructor.
    pub fn from_mono(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        let n = samples.len();
        Self::new(
            Array2::from_shape_vec((n, 1), samples)
                .expect("shape matches by construction"),
            sample_rate,
        )
    }

    pub fn samples(&self) -> &Array2<f64> {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut Array2<f64> {
        &mut self.samples
    }

    pub fn into_samples(self) -> Array2<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn num_channels(&self) -> usize {
        self.samples.ncols()
    }

    pub fn channel(&self, index: usize) -> ArrayView1<'_, f64> {
        self.samples.column(index)
    }

    pub fn channel_vec(&self, index: usize) -> Vec<f64> {
        self.samples.column(index).to_vec()
    }

    /// Sum of squares over one channel.
    pub fn channel_energy(&self, index: usize) -> f64 {
        self.samples.column(index).iter().map(|v| v * v).sum()
    }

    /// Extend or truncate to `len` samples, zero-filling new tail samples.
    pub fn resized(&self, len: usize) -> Self {
        let mut out = Array2::zeros((len, self.num_channels()));
        let copy = len.min(self.num_samples());
        out.slice_mut(ndarray::s![..copy, ..])
            .assign(&self.samples.slice(ndarray::s![..copy, ..]));
        Self {
            samples: out,
            sample_rate: self.sample_rate,
        }
    }

    /// Elementwise sum of two equally-shaped blocks.
    pub fn add(&mut self, other: &Self) -> Result<()> {
        if self.samples.dim() != other.samples.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?}", self.samples.dim()),
                got: format!("{:?}", other.samples.dim()),
            });
        }
        self.samples += &other.samples;
        Ok(())
    }

    /// Multiply every sample by `gain`.
    pub fn scale(&mut self, gain: f64) {
        self.samples.mapv_inplace(|v| v * gain);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_count_formula() {
        // 1 s at 16 kHz: 1 + (16000 - 640) / 320 = 49 frames
        assert_eq!(num_frames(16000), 49);
        assert_eq!(num_frames(640), 1);
        assert_eq!(num_frames(639), 0);
        assert_eq!(num_frames(640 + 319), 1);
        assert_eq!(num_frames(640 + 320), 2);
    }

    #[test]
    fn audio_validation() {
        assert!(MultichannelAudio::from_mono(vec![0.0, f64::NAN], SAMPLE_RATE).is_err());
        assert!(MultichannelAudio::from_channels(
            vec![vec![0.0; 10], vec![0.0; 9]],
            SAMPLE_RATE
        )
        .is_err());
        let a = MultichannelAudio::from_channels(
            vec![vec![1.0; 10], vec![2.0; 10]],
            SAMPLE_RATE,
        )
        .unwrap();
        assert_eq!(a.num_samples(), 10);
        assert_eq!(a.num_channels(), 2);
        assert_eq!(a.channel(1)[0], 2.0);
    }
}
