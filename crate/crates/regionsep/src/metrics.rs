//! Evaluation metrics: scale-invariant SDR, Decay, and batch evaluation
//! over scene sets.
//!
//! Scenes are scored per steering region. A region with no source inside it
//! gets Decay (the energy reduction of the estimate against the beamformed
//! mixture); a region with one or more gets SI-SDR against the beamformed
//! sum of its target images.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{in_region, Region};
use crate::roomsim::{read_scene_dir, SceneTruth};
use crate::separation::{beamform, separate, target_reference, MaskSource};

/// SI-SDR values are capped at +-60 dB to keep reports finite.
pub const SI_SDR_CAP_DB: f64 = 60.0;
/// Decay denominator floor.
pub const DECAY_EPSILON: f64 = 1e-12;

/// Scale-invariant signal-to-distortion ratio in dB.
///
/// The estimate is projected onto the reference (`alpha = <est, ref> /
/// ||ref||^2`); the ratio of projected-signal to residual energy is
/// reported, capped at +-60 dB. Invariant to positive scaling of the
/// estimate by construction.
pub fn si_sdr(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} samples", reference.len()),
            got: format!("{} samples", estimate.len()),
        });
    }
    let ref_energy: f64 = reference.iter().map(|v| v * v).sum();
    if ref_energy <= 0.0 {
        return Err(Error::ZeroEnergyReference);
    }
    let dot: f64 = reference
        .iter()
        .zip(estimate.iter())
        .map(|(r, e)| r * e)
        .sum();
    let alpha = dot / ref_energy;
    let signal_energy = alpha * alpha * ref_energy;
    let error_energy: f64 = estimate
        .iter()
        .zip(reference.iter())
        .map(|(e, r)| {
            let d = e - alpha * r;
            d * d
        })
        .sum();
    if error_energy <= 0.0 {
        return Ok(SI_SDR_CAP_DB);
    }
    Ok((10.0 * (signal_energy / error_energy).log10()).clamp(-SI_SDR_CAP_DB, SI_SDR_CAP_DB))
}

/// Energy reduction of the estimate against the beamformed mixture, dB.
/// Positive means the pipeline removed energy; identical signals give 0.
pub fn decay(mixture_ref: &[f64], estimate: &[f64]) -> Result<f64> {
    if mixture_ref.len() != estimate.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} samples", mixture_ref.len()),
            got: format!("{} samples", estimate.len()),
        });
    }
    let e_mix: f64 = mixture_ref.iter().map(|v| v * v).sum();
    let e_est: f64 = estimate.iter().map(|v| v * v).sum();
    Ok(10.0 * (e_mix / (e_est + DECAY_EPSILON)).log10())
}

/// Case split for one scene/region pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneCase {
    NoTarget,
    OneTarget,
    TwoTarget,
}

impl SceneCase {
    fn from_count(n: usize) -> Self {
        match n {
            0 => SceneCase::NoTarget,
            1 => SceneCase::OneTarget,
            _ => SceneCase::TwoTarget,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SceneCase::NoTarget => "no_target",
            SceneCase::OneTarget => "one_target",
            SceneCase::TwoTarget => "two_target",
        }
    }
}

/// One evaluated scene/region pairing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub scene_id: String,
    pub region_index: usize,
    pub case: SceneCase,
    /// Present for scenes with at least one in-region source.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub si_sdr_db: Option<f64>,
    /// Present for no-target scenes only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_db: Option<f64>,
}

/// Mean/median aggregates for one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseAggregate {
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_si_sdr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_si_sdr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_decay_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_decay_db: Option<f64>,
}

/// A skipped scene directory and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedScene {
    pub dir: PathBuf,
    pub reason: String,
}

/// Full evaluation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mask: String,
    pub records: Vec<SceneRecord>,
    pub aggregates: BTreeMap<String, CaseAggregate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<SkippedScene>,
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

fn aggregate(records: &[SceneRecord]) -> BTreeMap<String, CaseAggregate> {
    let mut out = BTreeMap::new();
    for case in [SceneCase::NoTarget, SceneCase::OneTarget, SceneCase::TwoTarget] {
        let subset: Vec<&SceneRecord> = records.iter().filter(|r| r.case == case).collect();
        if subset.is_empty() {
            continue;
        }
        let sdrs: Vec<f64> = subset.iter().filter_map(|r| r.si_sdr_db).collect();
        let decays: Vec<f64> = subset.iter().filter_map(|r| r.decay_db).collect();
        out.insert(
            case.as_str().to_string(),
            CaseAggregate {
                count: subset.len(),
                mean_si_sdr_db: mean(&sdrs),
                median_si_sdr_db: median(&sdrs),
                mean_decay_db: mean(&decays),
                median_decay_db: median(&decays),
            },
        );
    }
    out
}

/// Count sources whose geometric position lies inside `region`.
fn targets_in_region(truth: &SceneTruth, region: &Region) -> usize {
    truth
        .metadata
        .sources
        .iter()
        .filter(|s| {
            s.image_index.is_some()
                && in_region(
                    region,
                    [s.position[0], s.position[1]],
                    &truth.metadata.pose,
                )
        })
        .count()
}

/// Evaluate one loaded scene against one region.
pub fn evaluate_scene(
    truth: &SceneTruth,
    region: &Region,
    region_index: usize,
    mask: &MaskSource,
    scene_id: &str,
) -> Result<SceneRecord> {
    let angle = region.central_angle();
    let estimate = separate(truth, region, mask)?;
    let n_targets = targets_in_region(truth, region);
    let case = SceneCase::from_count(n_targets);
    let (si, dec) = match case {
        SceneCase::NoTarget => {
            let ys = beamform(&truth.mixture, &truth.metadata.geometry, angle)?;
            (None, Some(decay(&ys, &estimate)?))
        }
        _ => {
            let reference = target_reference(truth, region, angle)?.ok_or_else(|| {
                Error::InvalidScene("target present but reference empty".into())
            })?;
            (Some(si_sdr(&reference, &estimate)?), None)
        }
    };
    Ok(SceneRecord {
        scene_id: scene_id.to_string(),
        region_index,
        case,
        si_sdr_db: si,
        decay_db: dec,
    })
}

/// Evaluate every scene directory under `set_dir` with the given mask
/// source, one record per scene and region. Malformed directories are
/// skipped and recorded. Results are ordered by scene id then region.
pub fn evaluate_scene_set(set_dir: impl AsRef<Path>, mask: &MaskSource) -> Result<EvalReport> {
    let set_dir = set_dir.as_ref();
    let mut scene_dirs: Vec<PathBuf> = fs::read_dir(set_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    scene_dirs.sort();
    if scene_dirs.is_empty() {
        return Err(Error::InvalidScene(format!(
            "no scene directories under {}",
            set_dir.display()
        )));
    }

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for dir in scene_dirs {
        let scene_id = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let truth = match read_scene_dir(&dir) {
            Ok(t) => t,
            Err(e) => {
                skipped.push(SkippedScene {
                    dir,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        for (idx, region) in truth.metadata.regions.clone().iter().enumerate() {
            records.push(evaluate_scene(&truth, region, idx, mask, &scene_id)?);
        }
    }
    let aggregates = aggregate(&records);
    Ok(EvalReport {
        mask: format!("{mask:?}"),
        records,
        aggregates,
        skipped,
    })
}

impl EvalReport {
    /// Write the JSON form plus a CSV mirror of the per-scene records.
    pub fn write(&self, out_dir: impl AsRef<Path>) -> Result<()> {
        let out_dir = out_dir.as_ref();
        fs::create_dir_all(out_dir)?;
        let mut f = fs::File::create(out_dir.join("report.json"))?;
        f.write_all(serde_json::to_string_pretty(self)?.as_bytes())?;
        f.write_all(b"\n")?;

        let mut csv = String::from("scene_id,region_index,case,si_sdr_db,decay_db\n");
        for r in &self.records {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                r.scene_id,
                r.region_index,
                r.case.as_str(),
                r.si_sdr_db.map(|v| format!("{v:.6}")).unwrap_or_default(),
                r.decay_db.map(|v| format!("{v:.6}")).unwrap_or_default(),
            ));
        }
        fs::write(out_dir.join("report.csv"), csv)?;
        Ok(())
    }

    /// Human-readable aggregate table.
    pub fn summary_table(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "{:<12} {:>6} {:>14} {:>14}\n",
            "case", "count", "mean SI-SDR", "mean Decay"
        ));
        for (case, agg) in &self.aggregates {
            s.push_str(&format!(
                "{:<12} {:>6} {:>14} {:>14}\n",
                case,
                agg.count,
                agg.mean_si_sdr_db
                    .map(|v| format!("{v:.2} dB"))
                    .unwrap_or_else(|| "-".into()),
                agg.mean_decay_db
                    .map(|v| format!("{v:.2} dB"))
                    .unwrap_or_else(|| "-".into()),
            ));
        }
        s
    }
}
