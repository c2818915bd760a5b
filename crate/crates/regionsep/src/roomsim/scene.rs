//! Scene specification and synthesis.
//!
//! A scene is a room, an array pose, target regions and a list of sources
//! with taxonomy roles. Synthesis convolves each dry source with its
//! image-source RIRs, scales interferers and noise to the requested SIR/SNR
//! against the reference source, and sums everything; the mixture equals
//! the sum of the emitted per-source images exactly.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::wav::{read_wav, write_wav_f32};
use crate::dsp::{MultichannelAudio, SAMPLE_RATE};
use crate::error::{Error, Result};
use crate::geometry::{in_region, in_region_folded, ArrayGeometry, ArrayPose, Region};

use super::sample::{sample_position, PlacementContext, PlacementRule};
use super::{fft_convolve, simulate_rir, RoomSpec};

/// Interferer SIR is sampled from this range when unspecified, dB.
pub const SIR_RANGE_DB: (f64, f64) = (-5.0, 5.0);
/// Noise SNR is sampled from this range when unspecified, dB.
pub const SNR_RANGE_DB: (f64, f64) = (5.0, 20.0);

/// Taxonomy role of a source within the scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceRole {
    /// The one in-region source being extracted.
    Target,
    /// Same azimuth range, outside distance.
    InterfA,
    /// Within distance, outside azimuth range.
    InterfB,
    /// Outside both azimuth range and distance.
    InterfC,
    /// Background point noise, placed anywhere.
    PointNoise,
    /// Unconstrained placement; used by analysis sweeps.
    Probe,
}

impl SourceRole {
    pub fn is_noise(&self) -> bool {
        matches!(self, SourceRole::PointNoise)
    }
}

/// Dry signal a source emits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SourceSignal {
    /// Stationary Gaussian noise.
    WhiteNoise,
    /// Noise with a slow random envelope and a random spectral tilt; a
    /// stand-in for speech with realistic on/off structure.
    SpeechLike,
    /// A pure tone.
    Tone { freq_hz: f64 },
    /// First channel of a 16 kHz WAV file, padded or truncated to the
    /// scene duration.
    Wav { path: std::path::PathBuf },
}

/// Where a source sits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourcePlacement {
    Explicit([f64; 3]),
    Sampled,
}

/// One source in a scene description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub role: SourceRole,
    pub signal: SourceSignal,
    pub placement: SourcePlacement,
    /// SIR (interferers) or SNR (noise) in dB against the reference source;
    /// sampled when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_db: Option<f64>,
    /// Which region a `Target` or `InterfA` placement refers to.
    #[serde(default)]
    pub region_index: usize,
}

impl SourceSpec {
    pub fn new(role: SourceRole, signal: SourceSignal, placement: SourcePlacement) -> Self {
        Self {
            role,
            signal,
            placement,
            level_db: None,
            region_index: 0,
        }
    }
}

fn default_duration() -> f64 {
    2.0
}

fn default_source_z() -> f64 {
    1.5
}

/// Declarative scene description; synthesis is deterministic in this value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub room: RoomSpec,
    pub geometry: ArrayGeometry,
    pub pose: ArrayPose,
    pub regions: Vec<Region>,
    pub sources: Vec<SourceSpec>,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    #[serde(default = "default_source_z")]
    pub source_z: f64,
    pub seed: u64,
}

/// Resolved facts about one synthesized source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceMeta {
    pub role: SourceRole,
    pub position: [f64; 3],
    /// Azimuth in the array frame, degrees.
    pub azimuth_deg: f64,
    pub distance_m: f64,
    /// The SIR/SNR this source was scaled to; `None` for the reference.
    pub level_db: Option<f64>,
    pub gain: f64,
    /// Geometric membership per region.
    pub in_region: Vec<bool>,
    /// Membership folded across the array axis (what delays can resolve).
    pub in_region_folded: Vec<bool>,
    /// Index into `SceneTruth::source_images`; `None` for noise sources.
    pub image_index: Option<usize>,
}

/// Everything known about a synthesized scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneMetadata {
    pub seed: u64,
    pub sample_rate: u32,
    pub num_samples: usize,
    pub room: RoomSpec,
    pub geometry: ArrayGeometry,
    pub pose: ArrayPose,
    pub regions: Vec<Region>,
    pub sources: Vec<SourceMeta>,
}

/// The synthesized scene: the mixture, the per-source images that sum to
/// it, and the resolved metadata.
#[derive(Debug, Clone)]
pub struct SceneTruth {
    pub mixture: MultichannelAudio,
    pub source_images: Vec<MultichannelAudio>,
    pub noise_image: Option<MultichannelAudio>,
    pub metadata: SceneMetadata,
}

impl SceneTruth {
    /// Number of sources whose geometric position passes `in_region` for
    /// any region.
    pub fn num_targets(&self) -> usize {
        self.metadata
            .sources
            .iter()
            .filter(|s| !s.role.is_noise() && s.in_region.iter().any(|b| *b))
            .count()
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

fn normalize_rms(signal: &mut [f64], target_rms: f64) {
    let rms = (signal.iter().map(|v| v * v).sum::<f64>() / signal.len() as f64).sqrt();
    if rms > 0.0 {
        let g = target_rms / rms;
        signal.iter_mut().for_each(|v| *v *= g);
    }
}

fn one_pole_lowpass(signal: &mut [f64], cutoff_hz: f64, sr: f64) {
    let a = (-2.0 * PI * cutoff_hz / sr).exp();
    let mut state = 0.0;
    for v in signal.iter_mut() {
        state = a * state + (1.0 - a) * *v;
        *v = state;
    }
}

fn generate_signal(signal: &SourceSignal, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let sr = SAMPLE_RATE as f64;
    let mut out = match signal {
        SourceSignal::WhiteNoise => (0..n).map(|_| gaussian(rng)).collect::<Vec<f64>>(),
        SourceSignal::SpeechLike => {
            // slow random envelope (syllable-rate) over a tilted carrier
            let mod_hz = rng.gen_range(2.0..5.0);
            let tilt_hz = rng.gen_range(800.0..4000.0);
            let mut env: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
            one_pole_lowpass(&mut env, mod_hz, sr);
            one_pole_lowpass(&mut env, mod_hz, sr);
            // fourth power sharpens bursts and widens the silent stretches
            for v in env.iter_mut() {
                *v = v.powi(4);
            }
            let mean = env.iter().sum::<f64>() / n as f64;
            if mean > 0.0 {
                env.iter_mut().for_each(|v| *v /= mean);
            }
            let mut carrier: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
            one_pole_lowpass(&mut carrier, tilt_hz, sr);
            carrier
                .iter()
                .zip(env.iter())
                .map(|(c, e)| c * e)
                .collect()
        }
        SourceSignal::Tone { freq_hz } => (0..n)
            .map(|i| (2.0 * PI * freq_hz * i as f64 / sr).sin())
            .collect(),
        SourceSignal::Wav { path } => {
            let audio = read_wav(path)?;
            let mut v = audio.channel_vec(0);
            v.resize(n, 0.0);
            v
        }
    };
    if !matches!(signal, SourceSignal::Wav { .. }) {
        normalize_rms(&mut out, 0.1);
    }
    Ok(out)
}

fn verify_role_position(
    spec: &SceneSpec,
    role: SourceRole,
    region_index: usize,
    pos: [f64; 3],
) -> Result<()> {
    let pose = &spec.pose;
    let (az, dist) = pose.azimuth_distance_of([pos[0], pos[1]]);
    let region = |i: usize| -> Result<&Region> {
        spec.regions.get(i).ok_or_else(|| {
            Error::InvalidScene(format!("source references missing region {i}"))
        })
    };
    let max_region_distance = spec
        .regions
        .iter()
        .map(Region::max_distance)
        .fold(0.0, f64::max);
    let outside_all_azimuths = spec
        .regions
        .iter()
        .all(|r| !(az >= r.azimuth_min() && az <= r.azimuth_max()));
    let ok = match role {
        SourceRole::Target => in_region(region(region_index)?, [pos[0], pos[1]], pose),
        SourceRole::InterfA => {
            let r = region(region_index)?;
            az >= r.azimuth_min() && az <= r.azimuth_max() && dist > r.max_distance()
        }
        SourceRole::InterfB => dist <= max_region_distance && outside_all_azimuths,
        SourceRole::InterfC => dist > max_region_distance && outside_all_azimuths,
        SourceRole::PointNoise | SourceRole::Probe => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidScene(format!(
            "explicit position {pos:?} (azimuth {az:.1} deg, distance {dist:.2} m) \
             violates the {role:?} placement taxonomy"
        )))
    }
}

/// Synthesize a scene. Deterministic: the same spec (including seed) yields
/// bit-identical output.
pub fn synthesize_scene(spec: &SceneSpec) -> Result<SceneTruth> {
    spec.room.validate()?;
    if spec.sources.is_empty() {
        return Err(Error::InvalidScene("scene has no sources".into()));
    }
    let n_targets = spec
        .sources
        .iter()
        .filter(|s| s.role == SourceRole::Target)
        .count();
    if n_targets > 1 {
        return Err(Error::InvalidScene(format!(
            "at most one target per scene, got {n_targets}"
        )));
    }
    if !(spec.duration_s >= 0.1) {
        return Err(Error::InvalidScene(format!(
            "duration {} s too short",
            spec.duration_s
        )));
    }
    let mics_world = spec.pose.resolve_mics(&spec.geometry);
    for m in &mics_world {
        if !spec.room.contains_with_margin(*m, super::WALL_MARGIN) {
            return Err(Error::OutsideRoom {
                pos: *m,
                dims: spec.room.dims,
                margin: super::WALL_MARGIN,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ctx = PlacementContext {
        room: &spec.room,
        pose: &spec.pose,
        geom: &spec.geometry,
        regions: &spec.regions,
        source_z: spec.source_z,
    };
    let n_dry = (spec.duration_s * SAMPLE_RATE as f64).round() as usize;

    // reference for SIR/SNR: the target if present, else the first speaker
    let reference_index = spec
        .sources
        .iter()
        .position(|s| s.role == SourceRole::Target)
        .or_else(|| spec.sources.iter().position(|s| !s.role.is_noise()))
        .unwrap_or(0);

    // resolve positions, dry signals and level draws in source order
    let mut positions = Vec::with_capacity(spec.sources.len());
    let mut dry = Vec::with_capacity(spec.sources.len());
    let mut levels: Vec<Option<f64>> = Vec::with_capacity(spec.sources.len());
    for (idx, src) in spec.sources.iter().enumerate() {
        let pos = match &src.placement {
            SourcePlacement::Explicit(p) => {
                if !spec.room.contains_with_margin(*p, super::WALL_MARGIN) {
                    return Err(Error::OutsideRoom {
                        pos: *p,
                        dims: spec.room.dims,
                        margin: super::WALL_MARGIN,
                    });
                }
                verify_role_position(spec, src.role, src.region_index, *p)?;
                *p
            }
            SourcePlacement::Sampled => {
                let rule = match src.role {
                    SourceRole::Target => PlacementRule::InRegion(src.region_index),
                    SourceRole::InterfA => PlacementRule::InterfA(src.region_index),
                    SourceRole::InterfB => PlacementRule::InterfB,
                    SourceRole::InterfC => PlacementRule::InterfC,
                    SourceRole::PointNoise | SourceRole::Probe => PlacementRule::Anywhere,
                };
                sample_position(rule, &ctx, &mut rng)?
            }
        };
        positions.push(pos);
        dry.push(generate_signal(&src.signal, n_dry, &mut rng)?);
        let level = if idx == reference_index {
            None
        } else {
            Some(src.level_db.unwrap_or_else(|| {
                let (lo, hi) = if src.role.is_noise() {
                    SNR_RANGE_DB
                } else {
                    SIR_RANGE_DB
                };
                rng.gen_range(lo..=hi)
            }))
        };
        levels.push(level);
    }

    // propagate: convolve each dry signal with its RIR set
    let mut raw_images: Vec<Array2<f64>> = Vec::with_capacity(spec.sources.len());
    let mut total_len = 0usize;
    for (pos, sig) in positions.iter().zip(dry.iter()) {
        let rirs = simulate_rir(&spec.room, *pos, &mics_world, SAMPLE_RATE)?;
        let img_len = sig.len() + rirs[0].len() - 1;
        total_len = total_len.max(img_len);
        let mut img = Array2::zeros((img_len, mics_world.len()));
        for (ch, h) in rirs.iter().enumerate() {
            let y = fft_convolve(sig, h);
            for (t, v) in y.into_iter().enumerate() {
                img[[t, ch]] = v;
            }
        }
        raw_images.push(img);
    }

    // equalize lengths and compute level gains against the reference image
    let ref_mic = spec.geometry.ref_index();
    let ref_energy: f64 = raw_images[reference_index]
        .column(ref_mic)
        .iter()
        .map(|v| v * v)
        .sum();
    let mut gains = vec![1.0f64; spec.sources.len()];
    for (idx, level) in levels.iter().enumerate() {
        if let Some(db) = level {
            let src_energy: f64 = raw_images[idx]
                .column(ref_mic)
                .iter()
                .map(|v| v * v)
                .sum();
            if src_energy > 0.0 && ref_energy > 0.0 {
                gains[idx] = (ref_energy / src_energy).sqrt() * 10f64.powf(-db / 20.0);
            }
        }
    }

    let mut source_images = Vec::new();
    let mut noise_image: Option<MultichannelAudio> = None;
    let mut mixture = MultichannelAudio::zeros(total_len, mics_world.len(), SAMPLE_RATE);
    let mut source_meta = Vec::with_capacity(spec.sources.len());
    for (idx, src) in spec.sources.iter().enumerate() {
        let mut img = Array2::zeros((total_len, mics_world.len()));
        let raw = &raw_images[idx];
        img.slice_mut(ndarray::s![..raw.nrows(), ..])
            .assign(raw);
        img.mapv_inplace(|v| v * gains[idx]);
        let image = MultichannelAudio::new(img, SAMPLE_RATE)?;
        mixture.add(&image)?;

        let (az, dist) = spec
            .pose
            .azimuth_distance_of([positions[idx][0], positions[idx][1]]);
        let image_index = if src.role.is_noise() {
            match noise_image.as_mut() {
                Some(existing) => existing.add(&image)?,
                None => noise_image = Some(image),
            }
            None
        } else {
            source_images.push(image);
            Some(source_images.len() - 1)
        };
        source_meta.push(SourceMeta {
            role: src.role,
            position: positions[idx],
            azimuth_deg: az,
            distance_m: dist,
            level_db: levels[idx],
            gain: gains[idx],
            in_region: spec
                .regions
                .iter()
                .map(|r| in_region(r, [positions[idx][0], positions[idx][1]], &spec.pose))
                .collect(),
            in_region_folded: spec
                .regions
                .iter()
                .map(|r| {
                    in_region_folded(
                        r,
                        [positions[idx][0], positions[idx][1]],
                        &spec.pose,
                        &spec.geometry,
                    )
                })
                .collect(),
            image_index,
        });
    }

    Ok(SceneTruth {
        mixture,
        source_images,
        noise_image,
        metadata: SceneMetadata {
            seed: spec.seed,
            sample_rate: SAMPLE_RATE,
            num_samples: total_len,
            room: spec.room.clone(),
            geometry: spec.geometry.clone(),
            pose: spec.pose,
            regions: spec.regions.clone(),
            sources: source_meta,
        },
    })
}

/// Write a scene as `{mixture.wav, src_<n>.wav, noise.wav, meta.json}`.
pub fn write_scene_dir(dir: impl AsRef<Path>, truth: &SceneTruth) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_wav_f32(dir.join("mixture.wav"), &truth.mixture)?;
    for (k, img) in truth.source_images.iter().enumerate() {
        write_wav_f32(dir.join(format!("src_{k}.wav")), img)?;
    }
    if let Some(noise) = &truth.noise_image {
        write_wav_f32(dir.join("noise.wav"), noise)?;
    }
    let mut f = fs::File::create(dir.join("meta.json"))?;
    use std::io::Write;
    f.write_all(serde_json::to_string_pretty(&truth.metadata)?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Load a scene directory written by [`write_scene_dir`]. Per-sample values
/// carry float32 precision from the WAV encoding.
pub fn read_scene_dir(dir: impl AsRef<Path>) -> Result<SceneTruth> {
    let dir = dir.as_ref();
    let malformed = |reason: &str| Error::MalformedScene {
        dir: dir.to_path_buf(),
        reason: reason.to_string(),
    };
    let meta_path = dir.join("meta.json");
    if !meta_path.exists() {
        return Err(malformed("missing meta.json"));
    }
    let metadata: SceneMetadata = serde_json::from_reader(fs::File::open(&meta_path)?)?;
    let mixture = read_wav(dir.join("mixture.wav"))?;
    let n_images = metadata
        .sources
        .iter()
        .filter_map(|s| s.image_index)
        .max()
        .map(|m| m + 1)
        .unwrap_or(0);
    let mut source_images = Vec::with_capacity(n_images);
    for k in 0..n_images {
        let path = dir.join(format!("src_{k}.wav"));
        if !path.exists() {
            return Err(malformed(&format!("missing src_{k}.wav")));
        }
        source_images.push(read_wav(path)?);
    }
    let noise_path = dir.join("noise.wav");
    let noise_image = if noise_path.exists() {
        Some(read_wav(noise_path)?)
    } else {
        None
    };
    if mixture.num_channels() != metadata.geometry.num_mics() {
        return Err(malformed("mixture channel count disagrees with geometry"));
    }
    Ok(SceneTruth {
        mixture,
        source_images,
        noise_image,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basic_spec(seed: u64) -> SceneSpec {
        SceneSpec {
            room: RoomSpec::new([6.0, 5.0, 3.0], 0.3).unwrap(),
            geometry: ArrayGeometry::paper_linear8(),
            pose: ArrayPose::new([3.0, 1.0, 1.5], 0.0),
            regions: vec![
                Region::new(70.0, 80.0, 1.8).unwrap(),
                Region::new(100.0, 110.0, 1.8).unwrap(),
            ],
            sources: vec![
                SourceSpec::new(
                    SourceRole::Target,
                    SourceSignal::SpeechLike,
                    SourcePlacement::Sampled,
                ),
                SourceSpec::new(
                    SourceRole::InterfB,
                    SourceSignal::SpeechLike,
                    SourcePlacement::Sampled,
                ),
                SourceSpec::new(
                    SourceRole::PointNoise,
                    SourceSignal::WhiteNoise,
                    SourcePlacement::Sampled,
                ),
            ],
            duration_s: 0.6,
            source_z: 1.5,
            seed,
        }
    }

    #[test]
    fn mixture_is_exactly_the_sum_of_images() {
        let truth = synthesize_scene(&basic_spec(7)).unwrap();
        let mut sum = MultichannelAudio::zeros(
            truth.mixture.num_samples(),
            truth.mixture.num_channels(),
            SAMPLE_RATE,
        );
        for img in &truth.source_images {
            sum.add(img).unwrap();
        }
        if let Some(noise) = &truth.noise_image {
            sum.add(noise).unwrap();
        }
        assert_eq!(sum.samples(), truth.mixture.samples());
    }

    #[test]
    fn synthesis_is_deterministic() {
        let a = synthesize_scene(&basic_spec(42)).unwrap();
        let b = synthesize_scene(&basic_spec(42)).unwrap();
        assert_eq!(a.mixture.samples(), b.mixture.samples());
        assert_eq!(a.metadata, b.metadata);
        let c = synthesize_scene(&basic_spec(43)).unwrap();
        assert_ne!(a.mixture.samples(), c.mixture.samples());
    }

    #[test]
    fn labels_match_roles() {
        let truth = synthesize_scene(&basic_spec(11)).unwrap();
        let meta = &truth.metadata;
        assert_eq!(meta.sources[0].role, SourceRole::Target);
        assert!(meta.sources[0].in_region[0]);
        // Interf(b) is inside the distance band but outside every azimuth
        assert!(meta.sources[1].in_region.iter().all(|b| !b));
        assert!(meta.sources[1].in_region_folded.iter().all(|b| !b));
        assert!(meta.sources[1].distance_m <= 1.8);
        assert_eq!(truth.num_targets(), 1);
        assert_eq!(truth.source_images.len(), 2);
        assert!(truth.noise_image.is_some());
    }

    #[test]
    fn interferer_levels_match_their_sir() {
        let mut spec = basic_spec(13);
        spec.sources[1].level_db = Some(3.0);
        let truth = synthesize_scene(&spec).unwrap();
        let ref_mic = spec.geometry.ref_index();
        let e_target = truth.source_images[0].channel_energy(ref_mic);
        let e_interf = truth.source_images[1].channel_energy(ref_mic);
        let sir = 10.0 * (e_target / e_interf).log10();
        assert!((sir - 3.0).abs() < 1e-9, "sir {sir}");
    }

    #[test]
    fn rejects_two_targets_and_bad_explicit_positions() {
        let mut spec = basic_spec(1);
        spec.sources.push(SourceSpec::new(
            SourceRole::Target,
            SourceSignal::WhiteNoise,
            SourcePlacement::Sampled,
        ));
        assert!(matches!(
            synthesize_scene(&spec),
            Err(Error::InvalidScene(_))
        ));

        let mut spec = basic_spec(1);
        // explicit target position out of region (azimuth 0 from the array)
        spec.sources[0].placement = SourcePlacement::Explicit([4.5, 1.0, 1.5]);
        assert!(matches!(
            synthesize_scene(&spec),
            Err(Error::InvalidScene(_))
        ));
    }

    #[test]
    fn anechoic_single_source_mixture_equals_image() {
        let mut spec = basic_spec(3);
        spec.room = RoomSpec::new([6.0, 5.0, 3.0], 0.0).unwrap();
        spec.sources.truncate(1);
        let truth = synthesize_scene(&spec).unwrap();
        assert_eq!(truth.source_images.len(), 1);
        assert_eq!(
            truth.mixture.samples(),
            truth.source_images[0].samples()
        );
    }

    #[test]
    fn scene_dir_round_trip() {
        let truth = synthesize_scene(&basic_spec(21)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let scene_dir = dir.path().join("scene_0000");
        write_scene_dir(&scene_dir, &truth).unwrap();
        let back = read_scene_dir(&scene_dir).unwrap();
        assert_eq!(back.metadata, truth.metadata);
        assert_eq!(back.source_images.len(), truth.source_images.len());
        assert_eq!(back.mixture.num_samples(), truth.mixture.num_samples());
        // wav encoding is float32
        for (a, b) in truth
            .mixture
            .samples()
            .iter()
            .zip(back.mixture.samples().iter())
        {
            assert!((a - b).abs() <= a.abs().max(1.0) * 1e-6);
        }
        assert!(matches!(
            read_scene_dir(dir.path().join("nope")),
            Err(Error::MalformedScene { .. })
        ));
    }
}
