//! The improved delay-and-sum feature bank.
//!
//! Alignment shifts every channel toward a steering azimuth by an integer
//! number of samples. From the aligned set the bank derives:
//!
//! * the full mean across channels (the classic DAS beam),
//! * per-pair averages `(y_i + y_j) / 2`, which are two-channel beams,
//! * per-pair differences `y_i - y_j`, which cancel the aligned target and
//!   leave interference.
//!
//! Stacked as `[aligned..., sum, avgs..., diffs...]` and transformed to
//! log-mel, the all-pairs bank has `M^2 + 1` channels.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::dsp::{fbank, stft, FbankMatrix, MultichannelAudio};
use crate::error::{Error, Result};
use crate::geometry::{compute_delays, ArrayGeometry, SteeringDelays, DEFAULT_STEER_DISTANCE};

/// Ordered list of distinct microphone pairs `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairList {
    pairs: Vec<(usize, usize)>,
}

impl PairList {
    pub fn new(pairs: Vec<(usize, usize)>, num_mics: usize) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(i, j) in &pairs {
            if i >= j {
                return Err(Error::InvalidPairs(format!(
                    "pair ({i}, {j}) must be ordered i < j"
                )));
            }
            if j >= num_mics {
                return Err(Error::InvalidPairs(format!(
                    "pair ({i}, {j}) out of range for {num_mics} microphones"
                )));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidPairs(format!("duplicate pair ({i}, {j})")));
            }
        }
        Ok(Self { pairs })
    }

    /// All `M(M-1)/2` pairs in lexicographic order.
    pub fn all(num_mics: usize) -> Self {
        let mut pairs = Vec::new();
        for i in 0..num_mics {
            for j in (i + 1)..num_mics {
                pairs.push((i, j));
            }
        }
        Self { pairs }
    }

    /// Symmetric positional pairs `(i, M-1-i)` for an even channel count:
    /// `(0,7), (1,6), (2,5), (3,4)` at M = 8.
    pub fn symmetric(num_mics: usize) -> Result<Self> {
        if num_mics < 2 || num_mics % 2 != 0 {
            return Err(Error::InvalidPairs(format!(
                "symmetric pairs need an even microphone count, got {num_mics}"
            )));
        }
        let pairs = (0..num_mics / 2).map(|i| (i, num_mics - 1 - i)).collect();
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Which pairs feed the feature bank.
#[derive(Debug, Clone, PartialEq)]
pub enum PairSelection {
    /// Every distinct pair; the bank has `M^2 + 1` channels.
    AllPairs,
    /// An explicit subset, e.g. the four symmetric pairs of a linear array.
    Subset(PairList),
}

impl PairSelection {
    pub fn resolve(&self, num_mics: usize) -> Result<PairList> {
        match self {
            PairSelection::AllPairs => Ok(PairList::all(num_mics)),
            PairSelection::Subset(list) => {
                // re-validate against this channel count
                PairList::new(list.pairs().to_vec(), num_mics)
            }
        }
    }
}

/// Channel signals after integer-sample alignment, shape `(samples, channels)`.
#[derive(Debug, Clone)]
pub struct AlignedSignals {
    signals: Array2<f64>,
    delays: SteeringDelays,
    sample_rate: u32,
}

impl AlignedSignals {
    pub fn signals(&self) -> &Array2<f64> {
        &self.signals
    }

    pub fn delays(&self) -> &SteeringDelays {
        &self.delays
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_samples(&self) -> usize {
        self.signals.nrows()
    }

    pub fn num_channels(&self) -> usize {
        self.signals.ncols()
    }

    pub fn channel(&self, index: usize) -> ndarray::ArrayView1<'_, f64> {
        self.signals.column(index)
    }
}

/// The full pre-Fbank signal set: aligned channels, the mean beam, pair
/// averages and pair differences, in that fixed order.
#[derive(Debug, Clone)]
pub struct DasSignalSet {
    pub aligned: Array2<f64>,
    pub full_sum: Array1<f64>,
    pub pair_avgs: Array2<f64>,
    pub pair_diffs: Array2<f64>,
    pub pair_list: PairList,
    pub sample_rate: u32,
}

impl DasSignalSet {
    /// `M + 1 + 2P`; equals `M^2 + 1` when all pairs are used.
    pub fn num_channels(&self) -> usize {
        self.aligned.ncols() + 1 + 2 * self.pair_list.len()
    }

    /// Stack every derived signal into one multichannel block, ordered
    /// `[aligned by mic index, full sum, pair averages, pair differences]`.
    pub fn to_multichannel(&self) -> MultichannelAudio {
        let t = self.aligned.nrows();
        let m = self.aligned.ncols();
        let p = self.pair_list.len();
        let mut out = Array2::zeros((t, m + 1 + 2 * p));
        out.slice_mut(ndarray::s![.., ..m]).assign(&self.aligned);
        out.column_mut(m).assign(&self.full_sum);
        out.slice_mut(ndarray::s![.., m + 1..m + 1 + p])
            .assign(&self.pair_avgs);
        out.slice_mut(ndarray::s![.., m + 1 + p..])
            .assign(&self.pair_diffs);
        MultichannelAudio::new(out, self.sample_rate).expect("derived signals are finite")
    }
}

/// Log-mel features over the full DAS signal set.
#[derive(Debug, Clone)]
pub struct DasFeatures {
    pub fbank: FbankMatrix,
    pub pair_list: PairList,
}

/// Shift every channel by its steering delay, zero-filling the edges.
///
/// A positive shift delays the channel (prepends zeros and drops the tail);
/// a negative one advances it. Length is preserved.
pub fn shift_align(audio: &MultichannelAudio, delays: &SteeringDelays) -> Result<AlignedSignals> {
    if delays.num_channels() != audio.num_channels() {
        return Err(Error::ChannelMismatch {
            expected: audio.num_channels(),
            got: delays.num_channels(),
        });
    }
    let t = audio.num_samples();
    for &s in delays.shifts() {
        if s.unsigned_abs() as usize >= t {
            return Err(Error::ShiftTooLarge { shift: s, len: t });
        }
    }
    let mut signals = Array2::zeros((t, audio.num_channels()));
    for (ch, &shift) in delays.shifts().iter().enumerate() {
        let src = audio.channel(ch);
        let mut dst = signals.column_mut(ch);
        if shift >= 0 {
            let s = shift as usize;
            for n in s..t {
                dst[n] = src[n - s];
            }
        } else {
            let s = (-shift) as usize;
            for n in 0..t - s {
                dst[n] = src[n + s];
            }
        }
    }
    Ok(AlignedSignals {
        signals,
        delays: delays.clone(),
        sample_rate: audio.sample_rate(),
    })
}

/// The "sum" half of delay-and-sum: the mean of the aligned channels,
/// which keeps the output on the input scale.
pub fn das_sum(aligned: &AlignedSignals) -> Array1<f64> {
    let m = aligned.num_channels() as f64;
    aligned.signals().sum_axis(ndarray::Axis(1)) / m
}

/// Per-pair averages `(y_i + y_j) / 2`, one output channel per pair.
pub fn pairwise_avg(aligned: &AlignedSignals, pairs: &PairList) -> Result<Array2<f64>> {
    let checked = PairList::new(pairs.pairs().to_vec(), aligned.num_channels())?;
    let t = aligned.num_samples();
    let mut out = Array2::zeros((t, checked.len()));
    for (k, &(i, j)) in checked.pairs().iter().enumerate() {
        let a = aligned.channel(i);
        let b = aligned.channel(j);
        let mut col = out.column_mut(k);
        for n in 0..t {
            col[n] = 0.5 * (a[n] + b[n]);
        }
    }
    Ok(out)
}

/// Per-pair differences `y_i - y_j` (no 1/2 factor), which cancel whatever
/// the alignment made identical across channels.
pub fn pairwise_diff(aligned: &AlignedSignals, pairs: &PairList) -> Result<Array2<f64>> {
    let checked = PairList::new(pairs.pairs().to_vec(), aligned.num_channels())?;
    let t = aligned.num_samples();
    let mut out = Array2::zeros((t, checked.len()));
    for (k, &(i, j)) in checked.pairs().iter().enumerate() {
        let a = aligned.channel(i);
        let b = aligned.channel(j);
        let mut col = out.column_mut(k);
        for n in 0..t {
            col[n] = a[n] - b[n];
        }
    }
    Ok(out)
}

/// Build the full signal set for one steering angle.
pub fn das_signal_set(
    audio: &MultichannelAudio,
    geom: &ArrayGeometry,
    angle_deg: f64,
    selection: &PairSelection,
) -> Result<DasSignalSet> {
    if audio.num_channels() != geom.num_mics() {
        return Err(Error::ChannelMismatch {
            expected: geom.num_mics(),
            got: audio.num_channels(),
        });
    }
    let delays = compute_delays(
        geom,
        angle_deg,
        audio.sample_rate(),
        DEFAULT_STEER_DISTANCE,
    )?;
    let aligned = shift_align(audio, &delays)?;
    let pair_list = selection.resolve(geom.num_mics())?;
    let full_sum = das_sum(&aligned);
    let pair_avgs = pairwise_avg(&aligned, &pair_list)?;
    let pair_diffs = pairwise_diff(&aligned, &pair_list)?;
    Ok(DasSignalSet {
        aligned: aligned.signals,
        full_sum,
        pair_avgs,
        pair_diffs,
        pair_list,
        sample_rate: audio.sample_rate(),
    })
}

/// The DAS feature bank: log-mel over the stacked signal set.
pub fn assemble_das_features(
    audio: &MultichannelAudio,
    geom: &ArrayGeometry,
    angle_deg: f64,
    selection: &PairSelection,
) -> Result<DasFeatures> {
    let set = das_signal_set(audio, geom, angle_deg, selection)?;
    let stacked = set.to_multichannel();
    let spec = stft(&stacked)?;
    Ok(DasFeatures {
        fbank: fbank(&spec)?,
        pair_list: set.pair_list,
    })
}
