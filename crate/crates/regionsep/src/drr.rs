//! Direct-to-reverberant distance cues from aligned channel pairs.
//!
//! For a pair of aligned spectra the gain `G = |Yj| / (|Yi| + eps)` scales
//! `Yi` so its magnitude matches `Yj`; their difference energy
//! `R = |Yj - Yi*G|^2` collects reverberation, misaligned interference and
//! noise, and `D = |Yj|^2 - R` is the energy the pair agrees on, i.e. the
//! aligned direct sound. `D + R == |Yj|^2` holds by construction.

use ndarray::{Array2, Array3};
use num_complex::Complex64;

use crate::das::{AlignedSignals, PairList};
use crate::dsp::{stft, MultichannelAudio};
use crate::error::{Error, Result};

/// Numerical-stability floor for the gain denominator and the log ratio.
pub const DRR_EPSILON: f64 = 1e-8;
/// Ratio-mode output clamp in dB.
pub const RATIO_CLAMP_DB: f64 = 40.0;

/// Output arrangement of the pair features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrrMode {
    /// Emit direct and residual energies side by side (2P channels).
    Cat,
    /// Emit `10 log10(D / R)` clamped to +-40 dB (P channels).
    Ratio,
}

impl DrrMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DrrMode::Cat => "cat",
            DrrMode::Ratio => "ratio",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cat" => Ok(DrrMode::Cat),
            "ratio" => Ok(DrrMode::Ratio),
            other => Err(Error::Config(format!("unknown drr mode '{other}'"))),
        }
    }
}

/// Per-pair direct and residual energies at STFT resolution, plus the mode
/// used when the tensor is emitted.
#[derive(Debug, Clone)]
pub struct DrrPairFeatures {
    direct: Array3<f64>,
    residual: Array3<f64>,
    mode: DrrMode,
    pair_list: PairList,
}

impl DrrPairFeatures {
    /// Raw direct energy `D`, shape `(pairs, frames, bins)`. May be negative.
    pub fn direct(&self) -> &Array3<f64> {
        &self.direct
    }

    /// Raw residual energy `R`, same shape, always nonnegative.
    pub fn residual(&self) -> &Array3<f64> {
        &self.residual
    }

    pub fn mode(&self) -> DrrMode {
        self.mode
    }

    pub fn pair_list(&self) -> &PairList {
        &self.pair_list
    }

    pub fn num_pairs(&self) -> usize {
        self.direct.dim().0
    }

    pub fn num_frames(&self) -> usize {
        self.direct.dim().1
    }

    pub fn num_bins(&self) -> usize {
        self.direct.dim().2
    }

    /// The mode-dependent output tensor: `[D; R]` stacked along the channel
    /// axis in cat mode (D channels first), the clamped dB ratio in ratio
    /// mode. Negative `D` is preserved in cat mode and floored only inside
    /// the ratio log.
    pub fn emit(&self) -> Array3<f64> {
        let (p, t, f) = self.direct.dim();
        match self.mode {
            DrrMode::Cat => {
                let mut out = Array3::zeros((2 * p, t, f));
                out.slice_mut(ndarray::s![..p, .., ..]).assign(&self.direct);
                out.slice_mut(ndarray::s![p.., .., ..]).assign(&self.residual);
                out
            }
            DrrMode::Ratio => {
                let mut out = Array3::zeros((p, t, f));
                for k in 0..p {
                    for ti in 0..t {
                        for fi in 0..f {
                            let d = self.direct[[k, ti, fi]].max(DRR_EPSILON);
                            let r = self.residual[[k, ti, fi]].max(DRR_EPSILON);
                            out[[k, ti, fi]] = (10.0 * (d / r).log10())
                                .clamp(-RATIO_CLAMP_DB, RATIO_CLAMP_DB);
                        }
                    }
                }
                out
            }
        }
    }
}

fn check_same_shape<T, U>(a: &Array2<T>, b: &Array2<U>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", a.dim()),
            got: format!("{:?}", b.dim()),
        });
    }
    Ok(())
}

/// Gain of `Yi` with respect to `Yj`: `G = |Yj| / (|Yi| + eps)`.
pub fn drr_gain(yi: &Array2<Complex64>, yj: &Array2<Complex64>) -> Result<Array2<f64>> {
    check_same_shape(yi, yj)?;
    Ok(ndarray::Zip::from(yi)
        .and(yj)
        .map_collect(|a, b| b.norm() / (a.norm() + DRR_EPSILON)))
}

/// Amplitude compensation `Yi_g = Yi * G`; phase of `Yi` is preserved.
pub fn compensate(yi: &Array2<Complex64>, gain: &Array2<f64>) -> Result<Array2<Complex64>> {
    check_same_shape(yi, gain)?;
    Ok(ndarray::Zip::from(yi)
        .and(gain)
        .map_collect(|a, g| a * *g))
}

/// Residual energy `R = |Yj - Yi_g|^2`.
pub fn residual_energy(
    yj: &Array2<Complex64>,
    yig: &Array2<Complex64>,
) -> Result<Array2<f64>> {
    check_same_shape(yj, yig)?;
    Ok(ndarray::Zip::from(yj)
        .and(yig)
        .map_collect(|b, g| (b - g).norm_sqr()))
}

/// Direct energy `D = |Yj|^2 - R`; stored as-is, so it can be negative when
/// compensation overshoots.
pub fn direct_energy(yj: &Array2<Complex64>, residual: &Array2<f64>) -> Result<Array2<f64>> {
    check_same_shape(yj, residual)?;
    Ok(ndarray::Zip::from(yj)
        .and(residual)
        .map_collect(|b, r| b.norm_sqr() - r))
}

/// Full pair-feature extraction over the aligned channels.
pub fn drr_features(
    aligned: &AlignedSignals,
    pairs: &PairList,
    mode: DrrMode,
) -> Result<DrrPairFeatures> {
    let checked = PairList::new(pairs.pairs().to_vec(), aligned.num_channels())?;
    let stacked = MultichannelAudio::new(aligned.signals().clone(), aligned.sample_rate())?;
    let spec = stft(&stacked)?;
    let planes: Vec<Array2<Complex64>> = (0..aligned.num_channels())
        .map(|ch| spec.channel_plane(ch))
        .collect();
    let (t, f) = planes[0].dim();
    let mut direct = Array3::zeros((checked.len(), t, f));
    let mut residual = Array3::zeros((checked.len(), t, f));
    for (k, &(i, j)) in checked.pairs().iter().enumerate() {
        let gain = drr_gain(&planes[i], &planes[j])?;
        let yig = compensate(&planes[i], &gain)?;
        let r = residual_energy(&planes[j], &yig)?;
        let d = direct_energy(&planes[j], &r)?;
        direct
            .index_axis_mut(ndarray::Axis(0), k)
            .assign(&d);
        residual
            .index_axis_mut(ndarray::Axis(0), k)
            .assign(&r);
    }
    Ok(DrrPairFeatures {
        direct,
        residual,
        mode,
        pair_list: checked,
    })
}
