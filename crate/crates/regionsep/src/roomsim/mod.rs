//! Image-source room simulation and region-labeled scene synthesis.
//!
//! Shoebox rooms with uniform wall absorption. Every reflection path is a
//! mirrored virtual source; each arrival is rendered at its fractional
//! delay with a 16-tap Hann-windowed sinc and amplitude
//! `beta^reflections / (4 pi distance)`.

mod heatmap;
mod sample;
mod scene;

pub use heatmap::{
    heatmap_protocol, write_heatmap_csv, write_heatmap_pgm, HeatmapConfig, HeatmapResult,
};
pub use sample::{sample_position, PlacementContext, PlacementRule};
pub use scene::{
    read_scene_dir, synthesize_scene, write_scene_dir, SceneMetadata, SceneSpec, SceneTruth,
    SourceMeta, SourcePlacement, SourceRole, SourceSignal, SourceSpec,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SPEED_OF_SOUND;

/// Wall clearance required of sources and microphones, meters.
pub const WALL_MARGIN: f64 = 0.1;

/// Longest supported reverberation time, seconds. Image enumeration cost
/// grows with `(c * t60)^3 / volume`, so this is a practicality bound, not
/// a physical one.
pub const MAX_T60: f64 = 2.0;

const SINC_HALF_TAPS: i64 = 8;

/// A shoebox room: dimensions in meters, reverberation time, optional cap
/// on the reflection order. `t60 == 0` means anechoic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    pub dims: [f64; 3],
    pub t60: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
}

impl RoomSpec {
    pub fn new(dims: [f64; 3], t60: f64) -> Result<Self> {
        let spec = Self {
            dims,
            t60,
            max_order: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dims.iter().all(|d| d.is_finite() && *d > 2.0 * WALL_MARGIN) {
            return Err(Error::InvalidRoom(format!(
                "dimensions {:?} must exceed {} m",
                self.dims,
                2.0 * WALL_MARGIN
            )));
        }
        if !self.t60.is_finite() || self.t60 < 0.0 || self.t60 > MAX_T60 {
            return Err(Error::InvalidRoom(format!(
                "t60 {} outside supported range [0, {MAX_T60}]",
                self.t60
            )));
        }
        Ok(())
    }

    /// True iff the dimensions lie inside the protocol range
    /// 3 x 3 x 2.5 .. 10 x 8 x 4 meters.
    pub fn within_protocol_bounds(&self) -> bool {
        const LO: [f64; 3] = [3.0, 3.0, 2.5];
        const HI: [f64; 3] = [10.0, 8.0, 4.0];
        self.dims
            .iter()
            .zip(LO.iter().zip(HI.iter()))
            .all(|(d, (lo, hi))| *d >= *lo && *d <= *hi)
    }

    pub fn volume(&self) -> f64 {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn surface_area(&self) -> f64 {
        let [x, y, z] = self.dims;
        2.0 * (x * y + x * z + y * z)
    }

    /// Uniform wall reflection coefficient for the requested decay time.
    ///
    /// Absorption comes from the exponential reverberation-time inversion
    /// `alpha = 1 - exp(-0.161 V / (S t60))`, which stays below 1 at short
    /// decay times where the linear form would demand impossible walls.
    pub fn reflection_coefficient(&self) -> f64 {
        if self.t60 <= 0.0 {
            return 0.0;
        }
        let alpha = 1.0 - (-0.161 * self.volume() / (self.surface_area() * self.t60)).exp();
        (1.0 - alpha).sqrt()
    }

    pub fn contains_with_margin(&self, p: [f64; 3], margin: f64) -> bool {
        p.iter()
            .zip(self.dims.iter())
            .all(|(v, d)| *v >= margin && *v <= d - margin)
    }
}

/// Hann-windowed sinc used to place fractional-delay arrivals.
#[inline]
fn windowed_sinc(t: f64) -> f64 {
    debug_assert!(t.abs() <= SINC_HALF_TAPS as f64 + 1.0);
    let w = 0.5 * (1.0 + (std::f64::consts::PI * t / SINC_HALF_TAPS as f64).cos());
    if t.abs() < 1e-12 {
        w
    } else {
        let pt = std::f64::consts::PI * t;
        w * pt.sin() / pt
    }
}

/// Render one arrival into the impulse response.
#[inline]
fn add_arrival(h: &mut [f64], delay_samples: f64, amplitude: f64) {
    let base = delay_samples.floor() as i64;
    for k in 0..(2 * SINC_HALF_TAPS) {
        let n = base - SINC_HALF_TAPS + 1 + k;
        if n < 0 || n as usize >= h.len() {
            continue;
        }
        let t = n as f64 - delay_samples;
        h[n as usize] += amplitude * windowed_sinc(t);
    }
}

/// Simulate per-microphone impulse responses from `src` to each world-frame
/// microphone position via the image-source method.
///
/// Source and microphones must sit strictly inside the room with at least
/// [`WALL_MARGIN`] of clearance. The direct path arrives at
/// `distance * sr / c` samples with amplitude `1 / (4 pi distance)`.
pub fn simulate_rir(
    room: &RoomSpec,
    src: [f64; 3],
    mics: &[[f64; 3]],
    sample_rate: u32,
) -> Result<Vec<Vec<f64>>> {
    room.validate()?;
    if !room.contains_with_margin(src, WALL_MARGIN) {
        return Err(Error::OutsideRoom {
            pos: src,
            dims: room.dims,
            margin: WALL_MARGIN,
        });
    }
    for m in mics {
        if !room.contains_with_margin(*m, WALL_MARGIN) {
            return Err(Error::OutsideRoom {
                pos: *m,
                dims: room.dims,
                margin: WALL_MARGIN,
            });
        }
    }
    let sr = sample_rate as f64;
    let max_direct = mics
        .iter()
        .map(|m| dist3(src, *m))
        .fold(0.0f64, f64::max);
    // long enough to hold the full decay plus the sinc tails
    let n_samples =
        ((room.t60 * 1.1 + max_direct / SPEED_OF_SOUND) * sr).ceil() as usize + 4 * SINC_HALF_TAPS as usize;
    let beta = room.reflection_coefficient();

    let mut rirs = vec![vec![0.0f64; n_samples]; mics.len()];
    if beta == 0.0 {
        for (mic, h) in mics.iter().zip(rirs.iter_mut()) {
            let d = dist3(src, *mic);
            add_arrival(h, d * sr / SPEED_OF_SOUND, 1.0 / (4.0 * std::f64::consts::PI * d));
        }
        return Ok(rirs);
    }

    let radius = n_samples as f64 * SPEED_OF_SOUND / sr + 1.0;
    let [lx, ly, lz] = room.dims;
    let n1 = (radius / (2.0 * lx)).ceil() as i64;
    let n2 = (radius / (2.0 * ly)).ceil() as i64;
    let n3 = (radius / (2.0 * lz)).ceil() as i64;
    let order_cap = room.max_order.map(|o| o as i64);

    for (mic, h) in mics.iter().zip(rirs.iter_mut()) {
        for mx in -n1..=n1 {
            let rx = 2.0 * mx as f64 * lx;
            for my in -n2..=n2 {
                let ry = 2.0 * my as f64 * ly;
                for mz in -n3..=n3 {
                    let rz = 2.0 * mz as f64 * lz;
                    for q in 0..=1i64 {
                        for j in 0..=1i64 {
                            for k in 0..=1i64 {
                                if let Some(cap) = order_cap {
                                    let order = (2 * mx - q).abs()
                                        + (2 * my - j).abs()
                                        + (2 * mz - k).abs();
                                    if order > cap {
                                        continue;
                                    }
                                }
                                let px = (1 - 2 * q) as f64 * src[0] - mic[0] + rx;
                                let py = (1 - 2 * j) as f64 * src[1] - mic[1] + ry;
                                let pz = (1 - 2 * k) as f64 * src[2] - mic[2] + rz;
                                let dist = (px * px + py * py + pz * pz).sqrt();
                                let delay = dist * sr / SPEED_OF_SOUND;
                                if delay >= (n_samples as i64 + SINC_HALF_TAPS) as f64 {
                                    continue;
                                }
                                let refl = ((mx - q).abs()
                                    + mx.abs()
                                    + (my - j).abs()
                                    + my.abs()
                                    + (mz - k).abs()
                                    + mz.abs()) as i32;
                                let amp = beta.powi(refl)
                                    / (4.0 * std::f64::consts::PI * dist.max(1e-3));
                                add_arrival(h, delay, amp);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(rirs)
}

pub(crate) fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Linear convolution via FFT; output length `signal + kernel - 1`.
pub(crate) fn fft_convolve(signal: &[f64], kernel: &[f64]) -> Vec<f64> {
    use num_complex::Complex64;
    use rustfft::FftPlanner;

    let out_len = signal.len() + kernel.len() - 1;
    let fft_len = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(fft_len);
    let ifft = planner.plan_fft_inverse(fft_len);

    let mut a: Vec<Complex64> = signal
        .iter()
        .map(|v| Complex64::new(*v, 0.0))
        .chain(std::iter::repeat(Complex64::default()))
        .take(fft_len)
        .collect();
    let mut b: Vec<Complex64> = kernel
        .iter()
        .map(|v| Complex64::new(*v, 0.0))
        .chain(std::iter::repeat(Complex64::default()))
        .take(fft_len)
        .collect();
    fft.process(&mut a);
    fft.process(&mut b);
    for (x, y) in a.iter_mut().zip(b.iter()) {
        *x *= *y;
    }
    ifft.process(&mut a);
    let scale = 1.0 / fft_len as f64;
    a[..out_len].iter().map(|c| c.re * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn room_validation() {
        assert!(RoomSpec::new([5.0, 4.0, 3.0], 0.4).is_ok());
        assert!(RoomSpec::new([0.1, 4.0, 3.0], 0.4).is_err());
        assert!(RoomSpec::new([5.0, 4.0, 3.0], -0.1).is_err());
        assert!(RoomSpec::new([5.0, 4.0, 3.0], 5.0).is_err());
        assert!(RoomSpec::new([5.0, 4.0, 3.0], 0.4)
            .unwrap()
            .within_protocol_bounds());
        assert!(!RoomSpec::new([12.0, 4.0, 3.0], 0.4)
            .unwrap()
            .within_protocol_bounds());
    }

    #[test]
    fn reflection_coefficient_stays_physical() {
        let small = RoomSpec::new([3.0, 3.0, 2.5], 0.05).unwrap();
        let b = small.reflection_coefficient();
        assert!(b > 0.0 && b < 1.0, "beta {b}");
        let live = RoomSpec::new([10.0, 8.0, 4.0], 1.4).unwrap();
        let b = live.reflection_coefficient();
        assert!(b > 0.9 && b < 1.0, "beta {b}");
        assert_eq!(
            RoomSpec::new([5.0, 4.0, 3.0], 0.0)
                .unwrap()
                .reflection_coefficient(),
            0.0
        );
    }

    #[test]
    fn anechoic_rir_is_a_single_arrival_at_the_direct_delay() {
        let room = RoomSpec::new([8.0, 6.0, 3.0], 0.0).unwrap();
        // distance chosen so the delay is an integer number of samples:
        // 50 samples of travel at 16 kHz is 50 * 343 / 16000 m
        let d = 50.0 * SPEED_OF_SOUND / 16000.0;
        let src = [2.0 + d, 3.0, 1.5];
        let mic = [2.0, 3.0, 1.5];
        let rirs = simulate_rir(&room, src, &[mic], 16000).unwrap();
        let h = &rirs[0];
        let peak = h
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap();
        assert_eq!(peak.0, 50);
        let expected = 1.0 / (4.0 * std::f64::consts::PI * d);
        assert!((peak.1 - expected).abs() / expected < 1e-9);
        // everything else is sinc sidelobes at an exact-integer delay: zero
        let spurious: f64 = h
            .iter()
            .enumerate()
            .filter(|(n, _)| *n != 50)
            .map(|(_, v)| v * v)
            .sum();
        assert!(spurious < 1e-20);
    }

    #[test]
    fn doubling_distance_drops_direct_energy_six_db() {
        let room = RoomSpec::new([20.0, 6.0, 3.0], 0.0).unwrap();
        let mic = [1.0, 3.0, 1.5];
        let energy = |dist: f64| {
            let rirs = simulate_rir(&room, [1.0 + dist, 3.0, 1.5], &[mic], 16000).unwrap();
            rirs[0].iter().map(|v| v * v).sum::<f64>()
        };
        let drop = 10.0 * (energy(1.3) / energy(2.6)).log10();
        assert!((drop - 6.0206).abs() < 0.1, "drop {drop}");
    }

    #[test]
    fn rir_energy_grows_with_t60() {
        let src = [1.5, 2.0, 1.5];
        let mic = [3.5, 2.5, 1.5];
        let mut prev = 0.0;
        for t60 in [0.0, 0.2, 0.5, 1.0] {
            let room = RoomSpec::new([5.0, 4.0, 3.0], t60).unwrap();
            let rirs = simulate_rir(&room, src, &[mic], 16000).unwrap();
            let e: f64 = rirs[0].iter().map(|v| v * v).sum();
            assert!(e > prev, "t60 {t60}: {e} <= {prev}");
            prev = e;
        }
    }

    #[test]
    fn placement_outside_the_room_is_rejected() {
        let room = RoomSpec::new([5.0, 4.0, 3.0], 0.3).unwrap();
        assert!(matches!(
            simulate_rir(&room, [5.05, 2.0, 1.5], &[[1.0, 1.0, 1.5]], 16000),
            Err(Error::OutsideRoom { .. })
        ));
        assert!(matches!(
            simulate_rir(&room, [2.0, 2.0, 1.5], &[[1.0, 0.05, 1.5]], 16000),
            Err(Error::OutsideRoom { .. })
        ));
    }

    #[test]
    fn max_order_zero_keeps_only_the_direct_path() {
        let mut room = RoomSpec::new([5.0, 4.0, 3.0], 0.5).unwrap();
        room.max_order = Some(0);
        let rirs = simulate_rir(&room, [1.5, 2.0, 1.5], &[[3.5, 2.5, 1.5]], 16000).unwrap();
        let anechoic = RoomSpec::new([5.0, 4.0, 3.0], 0.0).unwrap();
        let direct = simulate_rir(&anechoic, [1.5, 2.0, 1.5], &[[3.5, 2.5, 1.5]], 16000).unwrap();
        let n = direct[0].len().min(rirs[0].len());
        for i in 0..n {
            assert!((rirs[0][i] - direct[0][i]).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_matches_direct_evaluation() {
        let a = vec![1.0, 2.0, -1.0, 0.5];
        let b = vec![0.5, -0.25, 1.0];
        let got = fft_convolve(&a, &b);
        let mut want = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                want[i + j] += x * y;
            }
        }
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9);
        }
    }
}
