//! Mask-based separation: oracle and file-loaded mask sources, offline mask
//! application, and a streaming driver.
//!
//! Separation always happens in the beamformed domain: the mixture is
//! aligned toward the region's central angle and averaged into `y_s`, a
//! time-frequency mask is applied to `STFT(y_s)`, and the estimate is
//! `iSTFT(m * STFT(y_s))`. The oracle mask is a magnitude ratio computed
//! from the scene's ground-truth images in that same domain, so it upper
//! bounds exactly the pipeline a trained estimator would sit in.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::das::{das_sum, shift_align};
use crate::dsp::tensor::{read_tensor2, write_tensor, TensorSidecar};
use crate::dsp::{istft, num_frames, stft, MultichannelAudio, FFT_SIZE, FRAME_LEN, HOP, NUM_BINS};
use crate::error::{Error, Result};
use crate::geometry::{
    compute_delays_default, in_region_folded, ArrayGeometry, Region, SteeringDelays,
};
use crate::roomsim::SceneTruth;

/// Numerical floor in the oracle mask denominator.
pub const ORACLE_EPSILON: f64 = 1e-8;

/// A time-frequency mask over `(frames, bins)`, every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TFMask {
    values: Array2<f64>,
}

impl TFMask {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if !values.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)) {
            return Err(Error::InvalidMask(
                "mask values must be finite and within [0, 1]".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn ones(frames: usize, bins: usize) -> Self {
        Self {
            values: Array2::from_elem((frames, bins), 1.0),
        }
    }

    pub fn zeros(frames: usize, bins: usize) -> Self {
        Self {
            values: Array2::zeros((frames, bins)),
        }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn num_frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_bins(&self) -> usize {
        self.values.ncols()
    }

    /// Store as a tensor file pair with `"kind": "mask"`.
    pub fn write(&self, stem: impl AsRef<Path>) -> Result<()> {
        let sidecar = TensorSidecar::new(vec![self.num_frames(), self.num_bins()], "mask");
        write_tensor(stem, &self.values.clone().into_dyn(), &sidecar)
    }

    /// Load from a tensor file pair, validating range and rank.
    pub fn read(stem: impl AsRef<Path>) -> Result<Self> {
        let (values, _) = read_tensor2(stem)?;
        Self::new(values)
    }
}

/// Where masks come from. The oracle stands in for a trained estimator and
/// file loading lets externally computed masks drive the same pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskSource {
    Oracle,
    Passthrough,
    FromFile(PathBuf),
}

impl MaskSource {
    /// Parse `oracle`, `passthrough` or `file:<stem>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(MaskSource::Oracle),
            "passthrough" => Ok(MaskSource::Passthrough),
            other => match other.strip_prefix("file:") {
                Some(path) => Ok(MaskSource::FromFile(PathBuf::from(path))),
                None => Err(Error::Config(format!(
                    "unknown mask source '{other}' (expected oracle, passthrough or file:<stem>)"
                ))),
            },
        }
    }

    /// Produce the mask for one scene and steering region.
    pub fn resolve(&self, truth: &SceneTruth, region: &Region, angle_deg: f64) -> Result<TFMask> {
        let frames = num_frames(truth.mixture.num_samples());
        match self {
            MaskSource::Oracle => oracle_mask(truth, region, angle_deg),
            MaskSource::Passthrough => Ok(TFMask::ones(frames, NUM_BINS)),
            MaskSource::FromFile(stem) => {
                let mask = TFMask::read(stem)?;
                if mask.num_frames() != frames || mask.num_bins() != NUM_BINS {
                    return Err(Error::ShapeMismatch {
                        expected: format!("({frames}, {NUM_BINS}) mask"),
                        got: format!("({}, {})", mask.num_frames(), mask.num_bins()),
                    });
                }
                Ok(mask)
            }
        }
    }
}

/// Delay-and-sum the audio toward `angle_deg`: the `y_s` signal.
pub fn beamform(
    audio: &MultichannelAudio,
    geom: &ArrayGeometry,
    angle_deg: f64,
) -> Result<Vec<f64>> {
    let delays = compute_delays_default(geom, angle_deg, audio.sample_rate())?;
    let aligned = shift_align(audio, &delays)?;
    Ok(das_sum(&aligned).to_vec())
}

/// Sum the images of every source whose position falls inside `region`
/// (folded across a linear array's axis) and beamform the result: the
/// reference signal separation is judged against. `None` when the scene has
/// no such source.
pub fn target_reference(
    truth: &SceneTruth,
    region: &Region,
    angle_deg: f64,
) -> Result<Option<Vec<f64>>> {
    let meta = &truth.metadata;
    let mut sum: Option<MultichannelAudio> = None;
    for src in &meta.sources {
        let Some(img_idx) = src.image_index else {
            continue;
        };
        let inside = in_region_folded(
            region,
            [src.position[0], src.position[1]],
            &meta.pose,
            &meta.geometry,
        );
        if inside {
            match sum.as_mut() {
                Some(acc) => acc.add(&truth.source_images[img_idx])?,
                None => sum = Some(truth.source_images[img_idx].clone()),
            }
        }
    }
    match sum {
        Some(audio) => Ok(Some(beamform(&audio, &meta.geometry, angle_deg)?)),
        None => Ok(None),
    }
}

/// Ideal-ratio oracle mask in the beamformed domain.
///
/// Sources are split into target and non-target by folded region
/// membership: a linear array cannot distinguish a source from its mirror
/// image across the microphone line, so the oracle must not either. With
/// `S_t` and `S_nt` the spectra of the beamformed target and non-target
/// sums, the mask is `|S_t| / (|S_t| + |S_nt| + eps)`.
pub fn oracle_mask(truth: &SceneTruth, region: &Region, angle_deg: f64) -> Result<TFMask> {
    let meta = &truth.metadata;
    if truth.source_images.is_empty() && truth.noise_image.is_none() {
        return Err(Error::InvalidScene(
            "oracle mask needs per-source ground truth images".into(),
        ));
    }
    let n = truth.mixture.num_samples();
    let m = truth.mixture.num_channels();
    let mut target = MultichannelAudio::zeros(n, m, truth.mixture.sample_rate());
    let mut non_target = MultichannelAudio::zeros(n, m, truth.mixture.sample_rate());
    for src in &meta.sources {
        let Some(img_idx) = src.image_index else {
            continue;
        };
        let inside = in_region_folded(
            region,
            [src.position[0], src.position[1]],
            &meta.pose,
            &meta.geometry,
        );
        if inside {
            target.add(&truth.source_images[img_idx])?;
        } else {
            non_target.add(&truth.source_images[img_idx])?;
        }
    }
    if let Some(noise) = &truth.noise_image {
        non_target.add(noise)?;
    }

    let spec_of = |audio: &MultichannelAudio| -> Result<Array2<Complex64>> {
        let ys = beamform(audio, &meta.geometry, angle_deg)?;
        let mono = MultichannelAudio::from_mono(ys, audio.sample_rate())?;
        Ok(stft(&mono)?.channel_plane(0))
    };
    let s_t = spec_of(&target)?;
    let s_nt = spec_of(&non_target)?;
    let values = ndarray::Zip::from(&s_t).and(&s_nt).map_collect(|t, nt| {
        let num = t.norm();
        (num / (num + nt.norm() + ORACLE_EPSILON)).clamp(0.0, 1.0)
    });
    TFMask::new(values)
}

/// Steer, mask and reconstruct: `iSTFT(m * STFT(y_s))`, length-matched to
/// the input.
pub fn apply_mask(
    audio: &MultichannelAudio,
    geom: &ArrayGeometry,
    angle_deg: f64,
    mask: &TFMask,
) -> Result<Vec<f64>> {
    let ys = beamform(audio, geom, angle_deg)?;
    let mono = MultichannelAudio::from_mono(ys, audio.sample_rate())?;
    let mut spec = stft(&mono)?;
    if mask.num_frames() != spec.num_frames() || mask.num_bins() != spec.num_bins() {
        return Err(Error::ShapeMismatch {
            expected: format!("({}, {}) mask", spec.num_frames(), spec.num_bins()),
            got: format!("({}, {})", mask.num_frames(), mask.num_bins()),
        });
    }
    for t in 0..spec.num_frames() {
        for f in 0..spec.num_bins() {
            let m = mask.values()[[t, f]];
            spec.frames_mut()[[0, t, f]] *= m;
        }
    }
    let out = istft(&spec, audio.num_samples())?;
    Ok(out.channel_vec(0))
}

/// Separate one scene toward one region: beamform, resolve the mask and
/// apply it. Passthrough returns the beamformed mixture itself.
pub fn separate(truth: &SceneTruth, region: &Region, mask_source: &MaskSource) -> Result<Vec<f64>> {
    let angle = region.central_angle();
    match mask_source {
        MaskSource::Passthrough => beamform(&truth.mixture, &truth.metadata.geometry, angle),
        other => {
            let mask = other.resolve(truth, region, angle)?;
            apply_mask(&truth.mixture, &truth.metadata.geometry, angle, &mask)
        }
    }
}

/// Mask schedule for a streaming session.
#[derive(Debug, Clone)]
pub enum StreamingMask {
    /// All-ones mask; the stream reproduces `y_s` through the transform.
    Passthrough,
    /// A precomputed mask matrix consumed one row per frame.
    Precomputed(TFMask),
}

impl StreamingMask {
    fn row(&self, frame: usize) -> Result<Option<&Array2<f64>>> {
        match self {
            StreamingMask::Passthrough => Ok(None),
            StreamingMask::Precomputed(mask) => {
                if frame >= mask.num_frames() {
                    Err(Error::Streaming(format!(
                        "stream reached frame {frame} but the mask has only {} frames",
                        mask.num_frames()
                    )))
                } else {
                    Ok(Some(mask.values()))
                }
            }
        }
    }
}

/// Streaming separation driver.
///
/// Input arrives as 320-sample hops per channel; one 320-sample output hop
/// is emitted per input hop after a fixed algorithmic delay of one hop
/// (20 ms) plus however many hops the negative steering shifts require as
/// lookahead. Emitted samples are bit-identical to the offline
/// [`apply_mask`] output over the same data; [`StreamSeparator::flush`]
/// emits the remaining tail when the stream ends.
pub struct StreamSeparator {
    delays: SteeringDelays,
    mask: StreamingMask,
    num_channels: usize,
    /// lookahead in samples required by negative shifts
    advance: usize,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    inputs: Vec<Vec<f64>>,
    beam: Vec<f64>,
    acc: Vec<f64>,
    wsum: Vec<f64>,
    frames_done: usize,
    hops_emitted: usize,
    received: usize,
}

impl StreamSeparator {
    pub fn new(delays: SteeringDelays, mask: StreamingMask) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let advance = delays
            .shifts()
            .iter()
            .map(|s| (-s).max(0))
            .max()
            .unwrap_or(0) as usize;
        Self {
            num_channels: delays.num_channels(),
            advance,
            window: crate::dsp::hann_window(),
            fft: planner.plan_fft_forward(FFT_SIZE),
            ifft: planner.plan_fft_inverse(FFT_SIZE),
            inputs: vec![Vec::new(); delays.num_channels()],
            beam: Vec::new(),
            acc: Vec::new(),
            wsum: Vec::new(),
            frames_done: 0,
            hops_emitted: 0,
            received: 0,
            delays,
            mask,
        }
    }

    pub fn hop_size(&self) -> usize {
        HOP
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    /// Total emission latency in hops: one hop of framing plus the
    /// shift-buffer lookahead.
    pub fn latency_hops(&self) -> usize {
        1 + self.advance.div_ceil(HOP)
    }

    /// Feed one 320 x channels hop; returns any output hops that became
    /// final.
    pub fn push_hop(&mut self, hop: &Array2<f64>) -> Result<Vec<Vec<f64>>> {
        if hop.ncols() != self.num_channels {
            return Err(Error::ChannelMismatch {
                expected: self.num_channels,
                got: hop.ncols(),
            });
        }
        if hop.nrows() != HOP {
            return Err(Error::Streaming(format!(
                "hops must be {HOP} samples, got {}",
                hop.nrows()
            )));
        }
        for ch in 0..self.num_channels {
            self.inputs[ch].extend(hop.column(ch).iter());
        }
        self.received += HOP;
        self.advance_pipeline(false)?;
        self.collect_ready(false)
    }

    /// End of stream: process the remaining signal as the offline transform
    /// would and emit everything not yet emitted.
    pub fn flush(&mut self) -> Result<Vec<f64>> {
        self.advance_pipeline(true)?;
        let hops = self.collect_ready(true)?;
        Ok(hops.into_iter().flatten().collect())
    }

    /// Extend the beamformed signal and process every complete frame.
    fn advance_pipeline(&mut self, at_end: bool) -> Result<()> {
        // beam[n] is computable once every channel has sample n - shift;
        // at end-of-stream missing samples are zero, as in offline alignment
        let computable = if at_end {
            self.received
        } else {
            self.received.saturating_sub(self.advance)
        };
        let m = self.num_channels as f64;
        for n in self.beam.len()..computable {
            let mut acc = 0.0;
            for ch in 0..self.num_channels {
                let shift = self.delays.shifts()[ch];
                let idx = n as i64 - shift;
                if idx >= 0 && (idx as usize) < self.inputs[ch].len() {
                    acc += self.inputs[ch][idx as usize];
                }
            }
            self.beam.push(acc / m);
        }

        let mut buf = vec![Complex64::default(); FFT_SIZE];
        let mut scratch = vec![
            Complex64::default();
            self.fft
                .get_inplace_scratch_len()
                .max(self.ifft.get_inplace_scratch_len())
        ];
        while (self.frames_done * HOP + FRAME_LEN) <= self.beam.len() {
            let t = self.frames_done;
            let start = t * HOP;
            for (i, b) in buf.iter_mut().enumerate() {
                *b = if i < FRAME_LEN {
                    Complex64::new(self.beam[start + i] * self.window[i], 0.0)
                } else {
                    Complex64::default()
                };
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            if let Some(mask) = self.mask.row(t)? {
                for f in 0..NUM_BINS {
                    buf[f] *= mask[[t, f]];
                }
            }
            for f in NUM_BINS..FFT_SIZE {
                buf[f] = buf[FFT_SIZE - f].conj();
            }
            self.ifft.process_with_scratch(&mut buf, &mut scratch);
            let needed = start + FRAME_LEN;
            if self.acc.len() < needed {
                self.acc.resize(needed, 0.0);
                self.wsum.resize(needed, 0.0);
            }
            for i in 0..FRAME_LEN {
                let v = buf[i].re / FFT_SIZE as f64;
                self.acc[start + i] += v * self.window[i];
                self.wsum[start + i] += self.window[i] * self.window[i];
            }
            self.frames_done += 1;
        }
        Ok(())
    }

    fn collect_ready(&mut self, at_end: bool) -> Result<Vec<Vec<f64>>> {
        // after frame t no sample before (t+1) * HOP can change, so hops up
        // to frames_done are final; at end-of-stream everything is
        let final_samples = if at_end {
            self.received
        } else {
            self.frames_done * HOP
        };
        let mut out = Vec::new();
        while self.hops_emitted * HOP < final_samples {
            let start = self.hops_emitted * HOP;
            let end = (start + HOP).min(final_samples);
            let mut hop = Vec::with_capacity(end - start);
            for n in start..end {
                let v = if n < self.wsum.len() && self.wsum[n] >= crate::dsp::WSUM_FLOOR {
                    self.acc[n] / self.wsum[n]
                } else {
                    0.0
                };
                hop.push(v);
            }
            self.hops_emitted += 1;
            out.push(hop);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::SAMPLE_RATE;
    use crate::geometry::{ArrayPose, Region};
    use crate::roomsim::{
        synthesize_scene, RoomSpec, SceneSpec, SourcePlacement, SourceRole, SourceSignal,
        SourceSpec,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn test_scene(with_target: bool, with_interf: bool, seed: u64) -> SceneTruth {
        let mut sources = Vec::new();
        if with_target {
            sources.push(SourceSpec::new(
                SourceRole::Target,
                SourceSignal::SpeechLike,
                SourcePlacement::Sampled,
            ));
        }
        if with_interf {
            sources.push(SourceSpec::new(
                SourceRole::InterfB,
                SourceSignal::SpeechLike,
                SourcePlacement::Sampled,
            ));
        }
        sources.push(SourceSpec::new(
            SourceRole::PointNoise,
            SourceSignal::WhiteNoise,
            SourcePlacement::Sampled,
        ));
        let spec = SceneSpec {
            room: RoomSpec::new([6.0, 5.0, 3.0], 0.25).unwrap(),
            geometry: crate::geometry::ArrayGeometry::paper_linear8(),
            pose: ArrayPose::new([3.0, 1.0, 1.5], 0.0),
            regions: vec![Region::new(70.0, 80.0, 1.8).unwrap()],
            sources,
            duration_s: 0.7,
            source_z: 1.5,
            seed,
        };
        synthesize_scene(&spec).unwrap()
    }

    #[test]
    fn mask_validation() {
        assert!(TFMask::new(Array2::from_elem((2, 2), 1.5)).is_err());
        assert!(TFMask::new(Array2::from_elem((2, 2), -0.1)).is_err());
        assert!(TFMask::new(Array2::from_elem((2, 2), f64::NAN)).is_err());
        assert!(TFMask::new(Array2::from_elem((2, 2), 0.5)).is_ok());
    }

    #[test]
    fn mask_source_parsing() {
        assert_eq!(MaskSource::parse("oracle").unwrap(), MaskSource::Oracle);
        assert_eq!(
            MaskSource::parse("passthrough").unwrap(),
            MaskSource::Passthrough
        );
        assert_eq!(
            MaskSource::parse("file:/tmp/m").unwrap(),
            MaskSource::FromFile(PathBuf::from("/tmp/m"))
        );
        assert!(MaskSource::parse("dprnn").is_err());
    }

    #[test]
    fn oracle_mask_extremes() {
        let region = Region::new(70.0, 80.0, 1.8).unwrap();
        // target only (no interference): mask ~ 1 where energy lives
        let truth = test_scene(true, false, 5);
        let solo = SceneTruth {
            noise_image: None,
            mixture: truth.source_images[0].clone(),
            source_images: truth.source_images.clone(),
            metadata: {
                let mut m = truth.metadata.clone();
                m.sources.retain(|s| s.role == SourceRole::Target);
                m
            },
        };
        let mask = oracle_mask(&solo, &region, 75.0).unwrap();
        let spec = stft(
            &MultichannelAudio::from_mono(
                beamform(&solo.mixture, &solo.metadata.geometry, 75.0).unwrap(),
                SAMPLE_RATE,
            )
            .unwrap(),
        )
        .unwrap();
        let mut strong = 0usize;
        for t in 0..mask.num_frames() {
            for f in 0..mask.num_bins() {
                if spec.frames()[[0, t, f]].norm() > 1e-3 {
                    strong += 1;
                    assert!(mask.values()[[t, f]] > 0.999, "weak mask on strong bin");
                }
            }
        }
        assert!(strong > 100);

        // target-free: mask ~ 0 everywhere
        let truth = test_scene(false, true, 6);
        let mask = oracle_mask(&truth, &region, 75.0).unwrap();
        assert!(mask.values().iter().all(|v| *v < 1e-3));
    }

    #[test]
    fn oracle_mask_is_half_for_equal_magnitudes() {
        // two sources with identical images, one counted in region and one
        // out: every bin sees equal magnitudes, so the mask is 1/2
        let truth = test_scene(true, true, 7);
        let img = truth.source_images[0].clone();
        let mut meta = truth.metadata.clone();
        meta.sources.truncate(2);
        meta.sources[0].image_index = Some(0);
        meta.sources[1].image_index = Some(1);
        let mut mixture = img.clone();
        mixture.add(&img).unwrap();
        let doubled = SceneTruth {
            mixture,
            source_images: vec![img.clone(), img],
            noise_image: None,
            metadata: meta,
        };
        let region = Region::new(70.0, 80.0, 1.8).unwrap();
        let mask = oracle_mask(&doubled, &region, 75.0).unwrap();
        let spec = stft(
            &MultichannelAudio::from_mono(
                beamform(&doubled.source_images[0], &doubled.metadata.geometry, 75.0).unwrap(),
                SAMPLE_RATE,
            )
            .unwrap(),
        )
        .unwrap();
        for t in 0..mask.num_frames() {
            for f in 0..mask.num_bins() {
                if spec.frames()[[0, t, f]].norm() > 1e-3 {
                    assert!((mask.values()[[t, f]] - 0.5).abs() < 1e-4);
                }
            }
        }
    }

    #[test]
    fn ones_mask_reproduces_the_beam() {
        let truth = test_scene(true, true, 8);
        let geom = &truth.metadata.geometry;
        let ys = beamform(&truth.mixture, geom, 75.0).unwrap();
        let frames = num_frames(truth.mixture.num_samples());
        let out = apply_mask(&truth.mixture, geom, 75.0, &TFMask::ones(frames, NUM_BINS)).unwrap();
        assert_eq!(out.len(), ys.len());
        let lo = HOP;
        let hi = ys.len() - FRAME_LEN;
        let num: f64 = (lo..hi).map(|i| (out[i] - ys[i]).powi(2)).sum();
        let den: f64 = (lo..hi).map(|i| ys[i] * ys[i]).sum();
        assert!((num / den).sqrt() < 1e-6);

        let zero_out =
            apply_mask(&truth.mixture, geom, 75.0, &TFMask::zeros(frames, NUM_BINS)).unwrap();
        assert!(zero_out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn mask_shape_mismatch_is_rejected() {
        let truth = test_scene(true, false, 9);
        let bad = TFMask::ones(3, NUM_BINS);
        assert!(matches!(
            apply_mask(&truth.mixture, &truth.metadata.geometry, 75.0, &bad),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn masked_output_never_gains_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let truth = test_scene(true, true, 10);
        let geom = &truth.metadata.geometry;
        let ys = beamform(&truth.mixture, geom, 75.0).unwrap();
        let e_in: f64 = ys.iter().map(|v| v * v).sum();
        let frames = num_frames(truth.mixture.num_samples());
        for _ in 0..5 {
            let mask = TFMask::new(Array2::from_shape_fn((frames, NUM_BINS), |_| {
                rng.gen_range(0.0..=1.0)
            }))
            .unwrap();
            let out = apply_mask(&truth.mixture, geom, 75.0, &mask).unwrap();
            let e_out: f64 = out.iter().map(|v| v * v).sum();
            assert!(e_out <= e_in * (1.0 + 1e-6), "{e_out} > {e_in}");
        }
    }

    #[test]
    fn mask_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("mask");
        let mask = TFMask::new(Array2::from_shape_fn((5, NUM_BINS), |(t, f)| {
            ((t + f) % 7) as f64 / 10.0
        }))
        .unwrap();
        mask.write(&stem).unwrap();
        let back = TFMask::read(&stem).unwrap();
        assert_eq!(back.num_frames(), 5);
        for (a, b) in mask.values().iter().zip(back.values().iter()) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    fn run_streaming(truth: &SceneTruth, mask: StreamingMask, angle: f64) -> (Vec<f64>, usize) {
        let delays = compute_delays_default(&truth.metadata.geometry, angle, SAMPLE_RATE).unwrap();
        let mut sep = StreamSeparator::new(delays, mask);
        let t = truth.mixture.num_samples();
        let full_hops = t / HOP;
        let mut out = Vec::new();
        let mut hops_before_first = None;
        for k in 0..full_hops {
            let hop = truth
                .mixture
                .samples()
                .slice(ndarray::s![k * HOP..(k + 1) * HOP, ..])
                .to_owned();
            let emitted = sep.push_hop(&hop).unwrap();
            if hops_before_first.is_none() && !emitted.is_empty() {
                hops_before_first = Some(k + 1);
            }
            for h in emitted {
                out.extend(h);
            }
        }
        out.extend(sep.flush().unwrap());
        (out, hops_before_first.unwrap_or(usize::MAX))
    }

    #[test]
    fn streaming_matches_offline_bit_for_bit() {
        let truth = test_scene(true, true, 11);
        let region = Region::new(70.0, 80.0, 1.8).unwrap();
        let angle = region.central_angle();
        let mask = oracle_mask(&truth, &region, angle).unwrap();
        let offline = apply_mask(&truth.mixture, &truth.metadata.geometry, angle, &mask).unwrap();
        let (streamed, consumed) = run_streaming(&truth, StreamingMask::Precomputed(mask), angle);
        // the stream only saw whole hops
        let n = (truth.mixture.num_samples() / HOP) * HOP;
        assert_eq!(streamed.len(), n);
        for (i, (s, o)) in streamed.iter().zip(offline.iter()).take(n).enumerate() {
            assert!((s - o).abs() < 1e-12, "sample {i}: {s} vs {o}");
        }
        assert!(consumed <= 2, "consumed {consumed} hops before output");
    }

    #[test]
    fn streaming_passthrough_reproduces_the_beam() {
        let truth = test_scene(true, false, 12);
        let (streamed, _) = run_streaming(&truth, StreamingMask::Passthrough, 75.0);
        let ys = beamform(&truth.mixture, &truth.metadata.geometry, 75.0).unwrap();
        let lo = HOP;
        let hi = streamed.len() - FRAME_LEN;
        let num: f64 = (lo..hi).map(|i| (streamed[i] - ys[i]).powi(2)).sum();
        let den: f64 = (lo..hi).map(|i| ys[i] * ys[i]).sum();
        assert!((num / den).sqrt() < 1e-6);
    }

    #[test]
    fn streaming_rejects_bad_hops() {
        let delays = compute_delays_default(
            &crate::geometry::ArrayGeometry::paper_linear8(),
            75.0,
            SAMPLE_RATE,
        )
        .unwrap();
        let mut sep = StreamSeparator::new(delays, StreamingMask::Passthrough);
        let bad = Array2::zeros((HOP, 4));
        assert!(matches!(
            sep.push_hop(&bad),
            Err(Error::ChannelMismatch { .. })
        ));
        let ok = Array2::zeros((HOP, 8));
        sep.push_hop(&ok).unwrap();
        let wrong_len = Array2::zeros((100, 8));
        assert!(sep.push_hop(&wrong_len).is_err());
    }
}
