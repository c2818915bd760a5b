//! Separable-zone analysis: sweep a probe source over a grid and record the
//! Decay of the separation output at each position.
//!
//! A probe inside a steered region should pass through (Decay near 0 dB);
//! anywhere else it should be suppressed. For a linear array the map is
//! symmetric across the microphone axis, so each region's mirror zone also
//! passes — the front-back confusion inherent to that geometry.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, ArrayPose, Region};
use crate::metrics::decay;
use crate::roomsim::{
    synthesize_scene, RoomSpec, SceneSpec, SourcePlacement, SourceRole, SourceSignal, SourceSpec,
};
use crate::separation::{beamform, separate, MaskSource};

/// Grid sweep configuration. The default reproduces the 5 x 5 x 3 m room
/// with sources on the z = 1.5 m plane, 20 cm off the walls, on a 0.2 m
/// grid (24 x 24 points).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapConfig {
    pub room: RoomSpec,
    pub grid_step_m: f64,
    pub wall_margin_m: f64,
    pub source_z_m: f64,
    pub duration_s: f64,
    pub seed: u64,
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        Self {
            room: RoomSpec {
                dims: [5.0, 5.0, 3.0],
                t60: 0.3,
                max_order: None,
            },
            grid_step_m: 0.2,
            wall_margin_m: 0.2,
            source_z_m: 1.5,
            duration_s: 1.0,
            seed: 0,
        }
    }
}

/// Decay grids from one sweep: one per steered region plus their pointwise
/// minimum. Indexed `[iy][ix]`; `NaN` marks skipped cells (a probe on top
/// of a microphone).
#[derive(Debug, Clone)]
pub struct HeatmapResult {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub regions: Vec<Region>,
    pub decay_per_region: Vec<Array2<f64>>,
    pub decay_min: Array2<f64>,
}

impl HeatmapResult {
    pub fn grid_shape(&self) -> (usize, usize) {
        (self.ys.len(), self.xs.len())
    }
}

fn grid_axis(extent: f64, margin: f64, step: f64) -> Vec<f64> {
    let n = ((extent - 2.0 * margin) / step).floor() as usize + 1;
    (0..n).map(|i| margin + i as f64 * step).collect()
}

/// Run the grid sweep: for every grid point synthesize a single-probe scene,
/// separate once per region, and record Decay against the beamformed
/// mixture.
pub fn heatmap_protocol(
    geom: &ArrayGeometry,
    pose: &ArrayPose,
    regions: &[Region],
    mask: &MaskSource,
    config: &HeatmapConfig,
) -> Result<HeatmapResult> {
    config.room.validate()?;
    if regions.is_empty() {
        return Err(Error::Config("heatmap needs at least one region".into()));
    }
    if !(config.grid_step_m > 0.0) {
        return Err(Error::Config("grid step must be positive".into()));
    }
    let xs = grid_axis(config.room.dims[0], config.wall_margin_m, config.grid_step_m);
    let ys = grid_axis(config.room.dims[1], config.wall_margin_m, config.grid_step_m);
    let mics_world = pose.resolve_mics(geom);

    let cells: Vec<(usize, usize)> = (0..ys.len())
        .flat_map(|iy| (0..xs.len()).map(move |ix| (iy, ix)))
        .collect();

    let results: Vec<(usize, usize, Vec<f64>)> = cells
        .par_iter()
        .map(|&(iy, ix)| -> Result<(usize, usize, Vec<f64>)> {
            let pos = [xs[ix], ys[iy], config.source_z_m];
            // a probe sitting on a microphone has no meaningful distance
            let too_close = mics_world
                .iter()
                .any(|m| super::dist3(*m, pos) < 0.05);
            if too_close {
                return Ok((iy, ix, vec![f64::NAN; regions.len()]));
            }
            let spec = SceneSpec {
                room: config.room.clone(),
                geometry: geom.clone(),
                pose: *pose,
                regions: regions.to_vec(),
                sources: vec![SourceSpec::new(
                    SourceRole::Probe,
                    SourceSignal::WhiteNoise,
                    SourcePlacement::Explicit(pos),
                )],
                duration_s: config.duration_s,
                source_z: config.source_z_m,
                seed: config
                    .seed
                    .wrapping_add((iy * xs.len() + ix) as u64),
            };
            let truth = synthesize_scene(&spec)?;
            let mut decays = Vec::with_capacity(regions.len());
            for region in regions {
                let estimate = separate(&truth, region, mask)?;
                let ysig = beamform(
                    &truth.mixture,
                    &truth.metadata.geometry,
                    region.central_angle(),
                )?;
                decays.push(decay(&ysig, &estimate)?);
            }
            Ok((iy, ix, decays))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut decay_per_region = vec![Array2::zeros((ys.len(), xs.len())); regions.len()];
    let mut decay_min = Array2::from_elem((ys.len(), xs.len()), f64::NAN);
    for (iy, ix, decays) in results {
        let mut min = f64::INFINITY;
        for (r, d) in decays.iter().enumerate() {
            decay_per_region[r][[iy, ix]] = *d;
            min = min.min(*d);
        }
        decay_min[[iy, ix]] = if min.is_finite() { min } else { f64::NAN };
    }
    Ok(HeatmapResult {
        xs,
        ys,
        regions: regions.to_vec(),
        decay_per_region,
        decay_min,
    })
}

/// CSV with one row per grid cell: coordinates, per-region Decay and the
/// minimum across regions.
pub fn write_heatmap_csv(path: impl AsRef<Path>, result: &HeatmapResult) -> Result<()> {
    let mut csv = String::from("x_m,y_m");
    for r in 0..result.decay_per_region.len() {
        csv.push_str(&format!(",decay_r{r}_db"));
    }
    csv.push_str(",decay_min_db\n");
    for (iy, y) in result.ys.iter().enumerate() {
        for (ix, x) in result.xs.iter().enumerate() {
            csv.push_str(&format!("{x:.3},{y:.3}"));
            for grid in &result.decay_per_region {
                csv.push_str(&format!(",{:.4}", grid[[iy, ix]]));
            }
            csv.push_str(&format!(",{:.4}\n", result.decay_min[[iy, ix]]));
        }
    }
    fs::write(path, csv)?;
    Ok(())
}

/// Binary (P5) grayscale PGM of the minimum-Decay grid. Dark cells pass
/// sound through (low Decay), bright cells suppress it; the range
/// 0..60 dB maps to 0..255 and `NaN` renders as 0.
pub fn write_heatmap_pgm(path: impl AsRef<Path>, result: &HeatmapResult) -> Result<()> {
    let (ny, nx) = result.grid_shape();
    let mut data = Vec::with_capacity(64 + ny * nx);
    data.extend_from_slice(format!("P5\n{nx} {ny}\n255\n").as_bytes());
    // row 0 at the top: iterate y from the far wall down
    for iy in (0..ny).rev() {
        for ix in 0..nx {
            let d = result.decay_min[[iy, ix]];
            let v = if d.is_nan() {
                0u8
            } else {
                (d.clamp(0.0, 60.0) / 60.0 * 255.0).round() as u8
            };
            data.push(v);
        }
    }
    fs::write(path, data)?;
    Ok(())
}
