//! Deterministic synthetic base shapes, fit to the unit cube.
//!
//! All four are free of rotational symmetry, and their longest point pairs
//! span several well-separated directions: a registration target whose
//! extremal pairs are collinear leaves the rotation about that common axis
//! (and a 180° flip of it) unconstrained at consensus scale. The shapes: a
//! chiral conical shell whose apex-to-rim pairs fan across a full turn of
//! azimuth, a coil with drifting radius, a knob of four unequal lobes whose
//! three longest lobe separations are deliberately close in length, and a
//! corner bracket of three unequal boxes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Point3, PointCloud, Vec3};

pub const SHAPE_NAMES: [&str; 4] = ["shell", "coil", "knob", "bracket"];

/// Generates `n` points of the named shape. Panics on unknown names; use
/// [`SHAPE_NAMES`] to enumerate.
pub fn generate(name: &str, n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5af3_9e1d_c0de_0001);
    let cloud = match name {
        "shell" => shell(n, &mut rng),
        "coil" => coil(n, &mut rng),
        "knob" => knob(n, &mut rng),
        "bracket" => bracket(n, &mut rng),
        other => panic!("unknown shape {other:?}"),
    };
    fit_unit_cube(&cloud)
}

fn shell(n: usize, rng: &mut impl Rng) -> PointCloud {
    // Conical helix. The longest pairs cross the wide final turn at every
    // azimuth, and the monotone height profile breaks any flip of the cone
    // plane.
    PointCloud::new(
        (0..n)
            .map(|_| {
                let u = rng.random_range(0.0..1.0f64);
                let t = 6.0 * PI * u;
                let r = 0.5 * (0.25 + 0.75 * u);
                let j = 0.012;
                Point3::new(
                    r * t.cos() + rng.random_range(-j..j),
                    r * t.sin() + rng.random_range(-j..j),
                    0.9 * u + rng.random_range(-j..j),
                )
            })
            .collect(),
    )
}

fn coil(n: usize, rng: &mut impl Rng) -> PointCloud {
    PointCloud::new(
        (0..n)
            .map(|_| {
                let t = rng.random_range(0.0..6.0 * PI);
                let r = 0.32 + 0.12 * (0.45 * t).sin() + 0.02 * t / (6.0 * PI);
                let j = 0.012;
                Point3::new(
                    r * t.cos() + rng.random_range(-j..j),
                    r * t.sin() + rng.random_range(-j..j),
                    0.055 * t + rng.random_range(-j..j),
                )
            })
            .collect(),
    )
}

fn knob(n: usize, rng: &mut impl Rng) -> PointCloud {
    // Four unequal lobes at general position, placed so the three largest
    // attainable pair distances (gap plus both radii) tie at 1.25. The
    // longest pairs then mix three well-separated directions instead of
    // concentrating along a single axis.
    let lobes = [
        (Point3::new(0.000, 0.000, 0.000), 0.10),
        (Point3::new(1.020, 0.000, 0.000), 0.13),
        (Point3::new(0.377, 0.817, 0.000), 0.08),
        (Point3::new(0.598, 0.386, 0.759), 0.11),
    ];
    PointCloud::new(
        (0..n)
            .map(|i| {
                let (center, radius) = lobes[i % lobes.len()];
                // uniform-in-ball offset by rejection
                loop {
                    let v = Vec3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    );
                    if v.norm() <= 1.0 {
                        break center + v * radius;
                    }
                }
            })
            .collect(),
    )
}

fn bracket(n: usize, rng: &mut impl Rng) -> PointCloud {
    // Arms along +x, +y, +z from one corner, unequal lengths and widths.
    let arms = [
        (Vec3::new(1.00, 0.16, 0.12), 1.00),
        (Vec3::new(0.14, 0.62, 0.10), 0.62),
        (Vec3::new(0.10, 0.12, 0.34), 0.34),
    ];
    let total: f64 = arms.iter().map(|(_, l)| l).sum();
    PointCloud::new(
        (0..n)
            .map(|_| {
                let mut pick = rng.random_range(0.0..total);
                let mut arm = &arms[0].0;
                for (ext, l) in &arms {
                    if pick < *l {
                        arm = ext;
                        break;
                    }
                    pick -= l;
                }
                Point3::new(
                    rng.random_range(0.0..arm.x),
                    rng.random_range(0.0..arm.y),
                    rng.random_range(0.0..arm.z),
                )
            })
            .collect(),
    )
}

/// Uniformly rescales and shifts so the cloud fits `[0,1]³` touching the
/// extremes of its longest axis.
pub fn fit_unit_cube(cloud: &PointCloud) -> PointCloud {
    let bbox = cloud.bounding_box().expect("shape clouds are non-empty");
    let scale = 1.0 / bbox.max_extent();
    PointCloud::new(cloud.iter().map(|p| Point3::from((p - bbox.min) * scale)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dist_linf;

    #[test]
    fn shapes_fit_unit_cube_and_are_deterministic() {
        for name in SHAPE_NAMES {
            let a = generate(name, 400, 3);
            let b = generate(name, 400, 3);
            assert_eq!(a.points(), b.points(), "{name} not deterministic");
            let bbox = a.bounding_box().unwrap();
            assert!(bbox.min.coords.amin() >= -1e-12, "{name}");
            assert!(bbox.max.coords.amax() <= 1.0 + 1e-12, "{name}");
            assert!((bbox.max_extent() - 1.0).abs() < 1e-9, "{name}");
        }
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate("coil", 100, 1);
        let b = generate("coil", 100, 2);
        assert!(a.iter().zip(b.iter()).any(|(x, y)| dist_linf(x, y) > 1e-6));
    }
}
