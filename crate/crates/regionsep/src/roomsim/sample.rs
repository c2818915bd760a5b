//! Rejection sampling of source positions under the interference taxonomy.
//!
//! Roles are defined relative to the target regions:
//!
//! * `InRegion`  — inside one region (the target itself),
//! * `InterfA`   — same azimuth interval, beyond the distance bound,
//! * `InterfB`   — within the distance bound, azimuth well outside every
//!   region,
//! * `InterfC`   — outside both,
//! * `Anywhere`  — unconstrained (point noise).
//!
//! Azimuth exclusions also cover the mirror image of each region across a
//! linear array's axis; a sample there would be indistinguishable from an
//! in-region one and would poison the scene labels.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, ArrayPose, Region};

use super::RoomSpec;

/// Clearance kept between sampled sources and the walls, meters.
pub const SOURCE_WALL_MARGIN: f64 = 0.2;
/// Interf(a) must sit this far beyond the region's distance bound, meters.
pub const INTERF_A_DISTANCE_BUFFER: f64 = 0.2;
/// Interf(b)/(c) azimuth must clear every region interval by this, degrees.
pub const INTERF_AZIMUTH_MARGIN: f64 = 10.0;
/// Interf(c) must sit this far beyond the largest distance bound, meters.
pub const INTERF_C_DISTANCE_BUFFER: f64 = 0.2;
/// No source may sit closer to the array centroid than this, meters.
pub const MIN_SOURCE_DISTANCE: f64 = 0.3;
/// Shortest sampled target distance, meters.
pub const TARGET_MIN_DISTANCE: f64 = 0.5;

const MAX_ATTEMPTS: usize = 1000;

/// Everything a placement decision depends on.
#[derive(Debug, Clone, Copy)]
pub struct PlacementContext<'a> {
    pub room: &'a RoomSpec,
    pub pose: &'a ArrayPose,
    pub geom: &'a ArrayGeometry,
    pub regions: &'a [Region],
    /// Height sources are placed at.
    pub source_z: f64,
}

/// The positional constraint to sample under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementRule {
    /// Uniform over the admissible part of the indexed region (targets).
    InRegion(usize),
    /// Same azimuth interval as the indexed region, outside its distance.
    InterfA(usize),
    /// Within the distance bound, azimuth outside every region.
    InterfB,
    /// Outside both azimuth and distance of every region.
    InterfC,
    /// Anywhere in the room.
    Anywhere,
}

impl PlacementRule {
    pub fn describe(&self) -> String {
        match self {
            PlacementRule::InRegion(i) => format!("inside region {i}"),
            PlacementRule::InterfA(i) => format!("region {i} azimuth, beyond its distance"),
            PlacementRule::InterfB => "within distance, outside every region azimuth".into(),
            PlacementRule::InterfC => "outside every region azimuth and distance".into(),
            PlacementRule::Anywhere => "anywhere in the room".into(),
        }
    }
}

fn region_of<'a>(ctx: &PlacementContext<'a>, index: usize) -> Result<&'a Region> {
    ctx.regions.get(index).ok_or_else(|| {
        Error::InvalidScene(format!(
            "region index {index} out of range ({} regions)",
            ctx.regions.len()
        ))
    })
}

/// Azimuth intervals to keep interferers away from: every region interval
/// plus, for linear arrays, its mirror image.
fn excluded_azimuth_intervals(ctx: &PlacementContext<'_>) -> Vec<(f64, f64)> {
    let mut spans = Vec::new();
    for r in ctx.regions {
        spans.push((r.azimuth_min(), r.azimuth_max()));
        if let (Some(lo), Some(hi)) = (
            ctx.geom.mirror_azimuth(r.azimuth_min()),
            ctx.geom.mirror_azimuth(r.azimuth_max()),
        ) {
            spans.push((lo.min(hi), lo.max(hi)));
        }
    }
    spans
}

/// Smallest angular distance from `az` to the interval `[lo, hi]`, degrees.
fn angular_clearance(az: f64, lo: f64, hi: f64) -> f64 {
    if az >= lo && az <= hi {
        return 0.0;
    }
    let d = |a: f64, b: f64| {
        let raw = (a - b).abs() % 360.0;
        raw.min(360.0 - raw)
    };
    d(az, lo).min(d(az, hi))
}

fn azimuth_clear_of_regions(ctx: &PlacementContext<'_>, az: f64) -> bool {
    excluded_azimuth_intervals(ctx)
        .iter()
        .all(|(lo, hi)| angular_clearance(az, *lo, *hi) >= INTERF_AZIMUTH_MARGIN)
}

fn max_region_distance(ctx: &PlacementContext<'_>) -> f64 {
    ctx.regions
        .iter()
        .map(Region::max_distance)
        .fold(0.0, f64::max)
}

fn in_any_region_distance_band(ctx: &PlacementContext<'_>, dist: f64) -> bool {
    dist <= max_region_distance(ctx)
}

fn room_ok(ctx: &PlacementContext<'_>, p: [f64; 3]) -> bool {
    ctx.room.contains_with_margin(p, SOURCE_WALL_MARGIN)
}

fn polar_point(ctx: &PlacementContext<'_>, az_array_frame: f64, dist: f64) -> [f64; 3] {
    let az_world = ctx.pose.world_azimuth(az_array_frame).to_radians();
    [
        ctx.pose.position[0] + dist * az_world.cos(),
        ctx.pose.position[1] + dist * az_world.sin(),
        ctx.source_z,
    ]
}

/// Sample a world-frame source position satisfying `rule`, uniform over the
/// admissible set. Fails with diagnostics after 1000 attempts.
pub fn sample_position(
    rule: PlacementRule,
    ctx: &PlacementContext<'_>,
    rng: &mut impl Rng,
) -> Result<[f64; 3]> {
    let room_diag = (ctx.room.dims[0].powi(2) + ctx.room.dims[1].powi(2)).sqrt();
    for _ in 0..MAX_ATTEMPTS {
        let candidate = match rule {
            // polar sampling is area-uniform when r^2 is drawn uniformly
            PlacementRule::InRegion(i) => {
                let r = region_of(ctx, i)?;
                let az = rng.gen_range(r.azimuth_min()..=r.azimuth_max());
                let r_lo = r.min_distance().max(TARGET_MIN_DISTANCE);
                let r_hi = r.max_distance();
                if r_lo >= r_hi {
                    return Err(Error::PlacementInfeasible {
                        attempts: 0,
                        constraint: format!(
                            "region {i} distance band [{r_lo}, {r_hi}] is empty"
                        ),
                    });
                }
                let rr = rng.gen_range(r_lo * r_lo..=r_hi * r_hi).sqrt();
                polar_point(ctx, az, rr)
            }
            PlacementRule::InterfA(i) => {
                let r = region_of(ctx, i)?;
                let az = rng.gen_range(r.azimuth_min()..=r.azimuth_max());
                let r_lo = r.max_distance() + INTERF_A_DISTANCE_BUFFER;
                let r_hi = room_diag;
                let rr = rng.gen_range(r_lo * r_lo..=r_hi * r_hi).sqrt();
                polar_point(ctx, az, rr)
            }
            PlacementRule::InterfB | PlacementRule::InterfC | PlacementRule::Anywhere => {
                let x = rng.gen_range(SOURCE_WALL_MARGIN..=ctx.room.dims[0] - SOURCE_WALL_MARGIN);
                let y = rng.gen_range(SOURCE_WALL_MARGIN..=ctx.room.dims[1] - SOURCE_WALL_MARGIN);
                [x, y, ctx.source_z]
            }
        };
        if !room_ok(ctx, candidate) {
            continue;
        }
        let (az, dist) = ctx
            .pose
            .azimuth_distance_of([candidate[0], candidate[1]]);
        if dist < MIN_SOURCE_DISTANCE {
            continue;
        }
        let ok = match rule {
            PlacementRule::InRegion(_) | PlacementRule::InterfA(_) => true,
            PlacementRule::InterfB => {
                in_any_region_distance_band(ctx, dist) && azimuth_clear_of_regions(ctx, az)
            }
            PlacementRule::InterfC => {
                dist > max_region_distance(ctx) + INTERF_C_DISTANCE_BUFFER
                    && azimuth_clear_of_regions(ctx, az)
            }
            PlacementRule::Anywhere => true,
        };
        if ok {
            return Ok(candidate);
        }
    }
    Err(Error::PlacementInfeasible {
        attempts: MAX_ATTEMPTS,
        constraint: format!(
            "{} in a {:?} room with array at {:?}",
            rule.describe(),
            ctx.room.dims,
            ctx.pose.position
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::in_region;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn context<'a>(
        room: &'a RoomSpec,
        pose: &'a ArrayPose,
        geom: &'a ArrayGeometry,
        regions: &'a [Region],
    ) -> PlacementContext<'a> {
        PlacementContext {
            room,
            pose,
            geom,
            regions,
            source_z: 1.5,
        }
    }

    #[test]
    fn sampled_target_positions_pass_membership() {
        let room = RoomSpec::new([10.0, 8.0, 3.0], 0.3).unwrap();
        let pose = ArrayPose::new([5.0, 4.0, 1.5], 0.0);
        let geom = ArrayGeometry::paper_linear8();
        let regions = [Region::new(70.0, 80.0, 1.8).unwrap()];
        let ctx = context(&room, &pose, &geom, &regions);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = sample_position(PlacementRule::InRegion(0), &ctx, &mut rng).unwrap();
            assert!(in_region(&regions[0], [p[0], p[1]], &pose));
            let (_, dist) = pose.azimuth_distance_of([p[0], p[1]]);
            assert!(dist >= TARGET_MIN_DISTANCE);
        }
    }

    #[test]
    fn interference_roles_fail_the_right_predicates() {
        let room = RoomSpec::new([10.0, 8.0, 3.0], 0.3).unwrap();
        let pose = ArrayPose::new([5.0, 4.0, 1.5], 0.0);
        let geom = ArrayGeometry::paper_linear8();
        let regions = [
            Region::new(70.0, 80.0, 1.8).unwrap(),
            Region::new(100.0, 110.0, 1.8).unwrap(),
        ];
        let ctx = context(&room, &pose, &geom, &regions);
        let mut rng = ChaCha8Rng::seed_from_u64(2);

        for _ in 0..100 {
            let p = sample_position(PlacementRule::InterfA(0), &ctx, &mut rng).unwrap();
            let (az, dist) = pose.azimuth_distance_of([p[0], p[1]]);
            assert!(az >= 70.0 && az <= 80.0);
            assert!(dist > 1.8);
            assert!(!in_region(&regions[0], [p[0], p[1]], &pose));

            let p = sample_position(PlacementRule::InterfB, &ctx, &mut rng).unwrap();
            let (az, dist) = pose.azimuth_distance_of([p[0], p[1]]);
            assert!(dist <= 1.8);
            for r in &regions {
                assert!(!r.contains_polar(az, dist));
                // clear of the mirror interval as well
                let m = geom.mirror_azimuth(az).unwrap();
                assert!(!r.contains_polar(m, dist));
            }

            let p = sample_position(PlacementRule::InterfC, &ctx, &mut rng).unwrap();
            let (az, dist) = pose.azimuth_distance_of([p[0], p[1]]);
            assert!(dist > 1.8);
            for r in &regions {
                assert!(!r.contains_polar(az, dist));
            }
        }
    }

    #[test]
    fn target_azimuth_is_uniform_over_the_interval() {
        // area-uniform sampling makes the azimuth marginal uniform; check
        // with a chi-squared test at 10 bins (critical value 21.67 at
        // p = 0.01, 9 degrees of freedom)
        let room = RoomSpec::new([10.0, 8.0, 3.0], 0.3).unwrap();
        let pose = ArrayPose::new([5.0, 4.0, 1.5], 0.0);
        let geom = ArrayGeometry::paper_linear8();
        let regions = [Region::new(70.0, 80.0, 1.8).unwrap()];
        let ctx = context(&room, &pose, &geom, &regions);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1000;
        let mut bins = [0usize; 10];
        for _ in 0..n {
            let p = sample_position(PlacementRule::InRegion(0), &ctx, &mut rng).unwrap();
            let (az, _) = pose.azimuth_distance_of([p[0], p[1]]);
            let b = (((az - 70.0) / 10.0 * 10.0) as usize).min(9);
            bins[b] += 1;
        }
        let expected = n as f64 / 10.0;
        let chi2: f64 = bins
            .iter()
            .map(|c| (*c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 21.67, "chi2 {chi2}, bins {bins:?}");
    }

    #[test]
    fn infeasible_constraint_reports_diagnostics() {
        // array jammed in a corner so that the region wedge exits the room
        let room = RoomSpec::new([3.0, 3.0, 2.5], 0.3).unwrap();
        let pose = ArrayPose::new([0.5, 2.6, 1.5], 0.0);
        let geom = ArrayGeometry::paper_linear8();
        // region pointing into the wall, all of it outside the room
        let regions = [Region::with_min_distance(85.0, 95.0, 1.8, 0.6).unwrap()];
        let ctx = context(&room, &pose, &geom, &regions);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let err = sample_position(PlacementRule::InRegion(0), &ctx, &mut rng).unwrap_err();
        assert!(matches!(err, Error::PlacementInfeasible { .. }));
    }
}
