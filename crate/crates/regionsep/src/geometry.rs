//! Microphone-array geometry, target regions and steering delays.
//!
//! Steering delays are the integer sample shifts that time-align a far-field
//! source at a given azimuth across the array:
//!
//! ```text
//! shift[i] = floor((d_ref(p) - d_i(p)) * sr / c)
//! ```
//!
//! where `p` is a far point along the steering azimuth and `d_i` is its
//! Euclidean distance to microphone `i`. A [`Region`] is an azimuth interval
//! paired with a distance bound; together they define the zone a separation
//! pipeline is asked to keep.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of sound in m/s (dry air, 20 degrees C).
pub const SPEED_OF_SOUND: f64 = 343.0;

/// Default steering-point distance in meters; far enough to realize the
/// far-field assumption for any desk-scale array.
pub const DEFAULT_STEER_DISTANCE: f64 = 100.0;

/// Microphones may not sit closer together than this (meters).
const MIN_MIC_SPACING: f64 = 1e-6;

/// Guard added before the floor so that delay differences which are exact
/// integers in real arithmetic do not flip down a whole sample from
/// representation noise. 1e-9 samples is ~60 ps of signal; anything below
/// that is not geometry.
const FLOOR_GUARD: f64 = 1e-9;

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Normalize an angle in degrees into `[0, 360)`.
pub fn normalize_angle(deg: f64) -> f64 {
    let a = deg.rem_euclid(360.0);
    // rem_euclid(360) can return 360.0 when deg is a tiny negative number
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

/// Microphone positions in meters plus the index of the reference microphone.
///
/// All delay math in the crate derives from this type. Positions are in the
/// array's own frame; a scene places the array with an [`ArrayPose`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArrayGeometryRepr", into = "ArrayGeometryRepr")]
pub struct ArrayGeometry {
    mic_positions: Vec<[f64; 3]>,
    ref_index: usize,
}

/// JSON wire form: `{"mics": [[x,y,z],...], "ref": 0}`.
#[derive(Serialize, Deserialize)]
struct ArrayGeometryRepr {
    mics: Vec<[f64; 3]>,
    #[serde(rename = "ref", default)]
    ref_index: usize,
}

impl TryFrom<ArrayGeometryRepr> for ArrayGeometry {
    type Error = Error;
    fn try_from(r: ArrayGeometryRepr) -> Result<Self> {
        ArrayGeometry::new(r.mics, r.ref_index)
    }
}

impl From<ArrayGeometry> for ArrayGeometryRepr {
    fn from(g: ArrayGeometry) -> Self {
        ArrayGeometryRepr {
            mics: g.mic_positions,
            ref_index: g.ref_index,
        }
    }
}

impl ArrayGeometry {
    pub fn new(mic_positions: Vec<[f64; 3]>, ref_index: usize) -> Result<Self> {
        if mic_positions.len() < 2 {
            return Err(Error::InvalidGeometry(format!(
                "need at least 2 microphones, got {}",
                mic_positions.len()
            )));
        }
        if ref_index >= mic_positions.len() {
            return Err(Error::InvalidGeometry(format!(
                "reference index {} out of range for {} microphones",
                ref_index,
                mic_positions.len()
            )));
        }
        for p in &mic_positions {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidGeometry(format!(
                    "non-finite microphone position {p:?}"
                )));
            }
        }
        for i in 0..mic_positions.len() {
            for j in (i + 1)..mic_positions.len() {
                if dist3(mic_positions[i], mic_positions[j]) <= MIN_MIC_SPACING {
                    return Err(Error::InvalidGeometry(format!(
                        "microphones {i} and {j} are coincident"
                    )));
                }
            }
        }
        Ok(Self {
            mic_positions,
            ref_index,
        })
    }

    /// Uniform linear array along the x axis, centered on the origin.
    /// `aperture` is the end-to-end length in meters.
    pub fn linear_on_x(num_mics: usize, aperture: f64, ref_index: usize) -> Result<Self> {
        if num_mics < 2 {
            return Err(Error::InvalidGeometry(
                "linear array needs at least 2 microphones".into(),
            ));
        }
        if !(aperture > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "aperture must be positive, got {aperture}"
            )));
        }
        let spacing = aperture / (num_mics - 1) as f64;
        let half = aperture / 2.0;
        let mics = (0..num_mics)
            .map(|i| [i as f64 * spacing - half, 0.0, 0.0])
            .collect();
        Self::new(mics, ref_index)
    }

    /// The paper-protocol array: 8 microphones on the x axis, 38 cm aperture,
    /// reference at index 0.
    pub fn paper_linear8() -> Self {
        Self::linear_on_x(8, 0.38, 0).expect("static geometry is valid")
    }

    pub fn num_mics(&self) -> usize {
        self.mic_positions.len()
    }

    pub fn ref_index(&self) -> usize {
        self.ref_index
    }

    pub fn mic_positions(&self) -> &[[f64; 3]] {
        &self.mic_positions
    }

    pub fn centroid(&self) -> [f64; 3] {
        let n = self.mic_positions.len() as f64;
        let mut c = [0.0; 3];
        for p in &self.mic_positions {
            for k in 0..3 {
                c[k] += p[k] / n;
            }
        }
        c
    }

    /// Largest pairwise microphone distance in meters.
    pub fn aperture(&self) -> f64 {
        let mut a: f64 = 0.0;
        for i in 0..self.mic_positions.len() {
            for j in (i + 1)..self.mic_positions.len() {
                a = a.max(dist3(self.mic_positions[i], self.mic_positions[j]));
            }
        }
        a
    }

    /// Unit direction of the microphone line if all microphones are collinear
    /// (within 1e-6 m of the line), else `None`. Linear arrays cannot resolve
    /// sources mirrored across this axis.
    pub fn linear_axis(&self) -> Option<[f64; 3]> {
        let c = self.centroid();
        // take the farthest mic from the centroid as the axis candidate
        let far = self
            .mic_positions
            .iter()
            .max_by(|a, b| dist3(**a, c).total_cmp(&dist3(**b, c)))?;
        let len = dist3(*far, c);
        if len < MIN_MIC_SPACING {
            return None;
        }
        let axis = [
            (far[0] - c[0]) / len,
            (far[1] - c[1]) / len,
            (far[2] - c[2]) / len,
        ];
        for p in &self.mic_positions {
            let v = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
            let t = v[0] * axis[0] + v[1] * axis[1] + v[2] * axis[2];
            let off = [
                v[0] - t * axis[0],
                v[1] - t * axis[1],
                v[2] - t * axis[2],
            ];
            if (off[0] * off[0] + off[1] * off[1] + off[2] * off[2]).sqrt() > 1e-6 {
                return None;
            }
        }
        Some(axis)
    }

    /// Azimuth of the linear axis in the array frame, degrees in `[0, 360)`,
    /// if the array is linear and its axis lies in the horizontal plane.
    pub fn linear_axis_azimuth(&self) -> Option<f64> {
        let axis = self.linear_axis()?;
        if axis[2].abs() > 1e-9 {
            return None;
        }
        Some(normalize_angle(axis[1].atan2(axis[0]).to_degrees()))
    }

    /// Reflect an array-frame azimuth across the linear axis, if any.
    ///
    /// For a linear array the delay pattern of a source is invariant under
    /// this reflection (front-back confusion), so region membership for
    /// anything that only sees delays must be evaluated on both the azimuth
    /// and its mirror.
    pub fn mirror_azimuth(&self, azimuth_deg: f64) -> Option<f64> {
        let axis_az = self.linear_axis_azimuth()?;
        Some(normalize_angle(2.0 * axis_az - azimuth_deg))
    }
}

/// Placement of an array in a room: centroid position plus yaw about the
/// z axis in degrees. Yaw 0 aligns the array frame with the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayPose {
    pub position: [f64; 3],
    #[serde(default)]
    pub yaw_deg: f64,
}

impl ArrayPose {
    pub fn new(position: [f64; 3], yaw_deg: f64) -> Self {
        Self { position, yaw_deg }
    }

    /// Microphone positions in world coordinates.
    pub fn resolve_mics(&self, geom: &ArrayGeometry) -> Vec<[f64; 3]> {
        let yaw = self.yaw_deg.to_radians();
        let (s, c) = yaw.sin_cos();
        geom.mic_positions()
            .iter()
            .map(|p| {
                [
                    self.position[0] + c * p[0] - s * p[1],
                    self.position[1] + s * p[0] + c * p[1],
                    self.position[2] + p[2],
                ]
            })
            .collect()
    }

    /// Azimuth of a world-frame point in the array frame, degrees `[0, 360)`,
    /// and its horizontal distance from the array centroid in meters.
    pub fn azimuth_distance_of(&self, point_xy: [f64; 2]) -> (f64, f64) {
        let dx = point_xy[0] - self.position[0];
        let dy = point_xy[1] - self.position[1];
        let dist = (dx * dx + dy * dy).sqrt();
        let az_world = dy.atan2(dx).to_degrees();
        (normalize_angle(az_world - self.yaw_deg), dist)
    }

    /// World-frame azimuth of an array-frame azimuth.
    pub fn world_azimuth(&self, array_azimuth_deg: f64) -> f64 {
        normalize_angle(array_azimuth_deg + self.yaw_deg)
    }
}

/// A target zone: azimuth interval (degrees, array frame) plus a distance
/// band in meters. Both boundaries are closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionRepr", into = "RegionRepr")]
pub struct Region {
    azimuth_min: f64,
    azimuth_max: f64,
    max_distance: f64,
    min_distance: f64,
}

/// JSON wire form: `{"azimuth": [70, 80], "max_distance": 1.8}`.
#[derive(Serialize, Deserialize)]
struct RegionRepr {
    azimuth: [f64; 2],
    max_distance: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    min_distance: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl TryFrom<RegionRepr> for Region {
    type Error = Error;
    fn try_from(r: RegionRepr) -> Result<Self> {
        Region::with_min_distance(r.azimuth[0], r.azimuth[1], r.max_distance, r.min_distance)
    }
}

impl From<Region> for RegionRepr {
    fn from(r: Region) -> Self {
        RegionRepr {
            azimuth: [r.azimuth_min, r.azimuth_max],
            max_distance: r.max_distance,
            min_distance: r.min_distance,
        }
    }
}

impl Region {
    pub fn new(azimuth_min_deg: f64, azimuth_max_deg: f64, max_distance_m: f64) -> Result<Self> {
        Self::with_min_distance(azimuth_min_deg, azimuth_max_deg, max_distance_m, 0.0)
    }

    pub fn with_min_distance(
        azimuth_min_deg: f64,
        azimuth_max_deg: f64,
        max_distance_m: f64,
        min_distance_m: f64,
    ) -> Result<Self> {
        if !azimuth_min_deg.is_finite() || !azimuth_max_deg.is_finite() {
            return Err(Error::InvalidRegion("non-finite azimuth bound".into()));
        }
        let azimuth_min = normalize_angle(azimuth_min_deg);
        let azimuth_max = normalize_angle(azimuth_max_deg);
        // Intervals wrapping through 0 degrees are not supported; split such
        // a zone into two regions instead.
        if azimuth_min >= azimuth_max {
            return Err(Error::InvalidRegion(format!(
                "azimuth interval [{azimuth_min}, {azimuth_max}] is empty after normalization"
            )));
        }
        if !(max_distance_m > 0.0) {
            return Err(Error::InvalidRegion(format!(
                "max_distance must be positive, got {max_distance_m}"
            )));
        }
        if !(min_distance_m >= 0.0) || min_distance_m >= max_distance_m {
            return Err(Error::InvalidRegion(format!(
                "min_distance {min_distance_m} must be in [0, {max_distance_m})"
            )));
        }
        Ok(Self {
            azimuth_min,
            azimuth_max,
            max_distance: max_distance_m,
            min_distance: min_distance_m,
        })
    }

    pub fn azimuth_min(&self) -> f64 {
        self.azimuth_min
    }

    pub fn azimuth_max(&self) -> f64 {
        self.azimuth_max
    }

    pub fn max_distance(&self) -> f64 {
        self.max_distance
    }

    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    /// Central azimuth of the interval; the steering angle for this region.
    pub fn central_angle(&self) -> f64 {
        0.5 * (self.azimuth_min + self.azimuth_max)
    }

    /// Membership test in array-frame polar coordinates. Closed on every
    /// boundary.
    pub fn contains_polar(&self, azimuth_deg: f64, distance_m: f64) -> bool {
        let az = normalize_angle(azimuth_deg);
        az >= self.azimuth_min
            && az <= self.azimuth_max
            && distance_m >= self.min_distance
            && distance_m <= self.max_distance
    }
}

/// Integer sample shifts that align the array toward one azimuth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringDelays {
    shifts: Vec<i64>,
    angle_deg: f64,
    sample_rate: u32,
}

impl SteeringDelays {
    pub fn new(shifts: Vec<i64>, angle_deg: f64, sample_rate: u32) -> Result<Self> {
        // sanity bound for sub-10 m arrays
        let bound = (10.0 * sample_rate as f64 / SPEED_OF_SOUND) as i64;
        for &s in &shifts {
            if s.abs() >= bound {
                return Err(Error::DelayOutOfRange { shift: s, bound });
            }
        }
        Ok(Self {
            shifts,
            angle_deg,
            sample_rate,
        })
    }

    pub fn shifts(&self) -> &[i64] {
        &self.shifts
    }

    pub fn angle_deg(&self) -> f64 {
        self.angle_deg
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.shifts.len()
    }

    pub fn max_abs_shift(&self) -> i64 {
        self.shifts.iter().map(|s| s.abs()).max().unwrap_or(0)
    }
}

/// Compute the integer steering delays for `angle` degrees at `sample_rate`.
///
/// The steering point is placed `steer_distance` meters from the array
/// centroid along the azimuth, in the array's horizontal plane; the shift for
/// microphone `i` is `floor((d_ref - d_i) * sr / c)`. The floor (rather than
/// round) keeps the delays biased at most one sample low, and the reference
/// microphone's shift is always exactly zero.
pub fn compute_delays(
    geom: &ArrayGeometry,
    angle_deg: f64,
    sample_rate: u32,
    steer_distance_m: f64,
) -> Result<SteeringDelays> {
    if !angle_deg.is_finite() {
        return Err(Error::InvalidAngle(angle_deg));
    }
    if sample_rate == 0 {
        return Err(Error::InvalidGeometry("sample rate must be positive".into()));
    }
    let angle = normalize_angle(angle_deg);
    let aperture = geom.aperture();
    if !(steer_distance_m > aperture) {
        return Err(Error::FarFieldViolation {
            steer_m: steer_distance_m,
            aperture_m: aperture,
        });
    }
    let c = geom.centroid();
    let th = angle.to_radians();
    let p = [
        c[0] + steer_distance_m * th.cos(),
        c[1] + steer_distance_m * th.sin(),
        c[2],
    ];
    let d_ref = dist3(p, geom.mic_positions()[geom.ref_index()]);
    let shifts = geom
        .mic_positions()
        .iter()
        .map(|m| {
            let d_i = dist3(p, *m);
            ((d_ref - d_i) * sample_rate as f64 / SPEED_OF_SOUND + FLOOR_GUARD).floor() as i64
        })
        .collect();
    SteeringDelays::new(shifts, angle, sample_rate)
}

/// Compute steering delays at the default 100 m steering distance.
pub fn compute_delays_default(
    geom: &ArrayGeometry,
    angle_deg: f64,
    sample_rate: u32,
) -> Result<SteeringDelays> {
    compute_delays(geom, angle_deg, sample_rate, DEFAULT_STEER_DISTANCE)
}

/// True iff the source lies inside the region, judged from the array pose.
///
/// Uses the horizontal (xy) source position only; elevation is ignored. A
/// source coincident with the array centroid has no defined azimuth and is
/// reported outside.
pub fn in_region(region: &Region, source_xy: [f64; 2], pose: &ArrayPose) -> bool {
    let (az, dist) = pose.azimuth_distance_of(source_xy);
    if dist < 1e-9 {
        return false;
    }
    region.contains_polar(az, dist)
}

/// Region membership folded across the array's linear axis.
///
/// Linear arrays cannot distinguish a source from its mirror image across
/// the microphone line, so anything that reasons from delays alone (the
/// oracle mask, the separable-zone analysis) must accept both. For
/// non-linear arrays this is identical to [`in_region`].
pub fn in_region_folded(
    region: &Region,
    source_xy: [f64; 2],
    pose: &ArrayPose,
    geom: &ArrayGeometry,
) -> bool {
    if in_region(region, source_xy, pose) {
        return true;
    }
    let (az, dist) = pose.azimuth_distance_of(source_xy);
    if dist < 1e-9 {
        return false;
    }
    match geom.mirror_azimuth(az) {
        Some(mirrored) => region.contains_polar(mirrored, dist),
        None => false,
    }
}
