//! Synthetic degradation: outlier insertion, point deletion, Gaussian noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::{rodrigues, Point3, PointCloud, RigidTransform, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegradationKind {
    /// Uniform non-data points added to the scene.
    Outliers,
    /// A random fraction of the model deleted.
    Missing,
    /// Per-coordinate Gaussian perturbation of the scene.
    Noise,
}

impl DegradationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DegradationKind::Outliers => "outliers",
            DegradationKind::Missing => "missing",
            DegradationKind::Noise => "noise",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "outliers" => Some(DegradationKind::Outliers),
            "missing" => Some(DegradationKind::Missing),
            "noise" => Some(DegradationKind::Noise),
            _ => None,
        }
    }
}

/// One degradation setting. `magnitude` is the outlier fraction of the
/// scene, the deleted fraction of the model, or the Gaussian σ in data
/// units, depending on `kind`.
#[derive(Debug, Clone, Copy)]
pub struct DegradationSpec {
    pub kind: DegradationKind,
    pub magnitude: f64,
    pub rng_seed: u64,
}

/// A generated trial: model and scene clouds, the ground-truth transform,
/// and the surviving true pairs as `(model index, scene index)`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub model: PointCloud,
    pub scene: PointCloud,
    pub gt: RigidTransform,
    pub correspondences: Vec<(usize, usize)>,
}

/// Rotation with axis uniform on the sphere and angle uniform in `[0, π]`.
pub fn random_rotation(rng: &mut impl Rng) -> RigidTransform {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi = rng.random_range(0.0..2.0 * std::f64::consts::PI);
    let s = (1.0 - z * z).sqrt();
    let axis = Vec3::new(s * phi.cos(), s * phi.sin(), z);
    let angle = rng.random_range(0.0..=std::f64::consts::PI);
    RigidTransform::new(rodrigues(&(axis * angle)), Vec3::zeros())
}

fn random_gt(rng: &mut impl Rng) -> RigidTransform {
    let mut t = random_rotation(rng);
    t.translation = Vec3::new(
        rng.random_range(-0.5..0.5),
        rng.random_range(-0.5..0.5),
        rng.random_range(-0.5..0.5),
    );
    t
}

/// Builds a degraded (model, scene) pair from `base` with a fresh random
/// ground truth. Reproducible per `spec.rng_seed`.
pub fn make_instance(base: &PointCloud, spec: &DegradationSpec) -> Instance {
    assert!(!base.is_empty(), "base cloud must be non-empty");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let gt = random_gt(&mut rng);
    let n = base.len();

    match spec.kind {
        DegradationKind::Outliers => {
            debug_assert!((0.0..1.0).contains(&spec.magnitude));
            let mut scene: Vec<Point3> = base.iter().map(|p| gt.apply(p)).collect();
            // Outliers make up `magnitude` of the final scene. They are
            // drawn uniformly in the unit cube of the data frame and carried
            // through the same transform, so they stay intermixed with the
            // data instead of forming a separable cluster.
            let k = (spec.magnitude * n as f64 / (1.0 - spec.magnitude)).round() as usize;
            for _ in 0..k {
                let raw = Point3::new(rng.random(), rng.random(), rng.random());
                scene.push(gt.apply(&raw));
            }
            Instance {
                model: base.clone(),
                scene: PointCloud::new(scene),
                gt,
                correspondences: (0..n).map(|i| (i, i)).collect(),
            }
        }
        DegradationKind::Missing => {
            debug_assert!((0.0..1.0).contains(&spec.magnitude));
            let keep = n - (spec.magnitude * n as f64).round() as usize;
            let mut kept = rand::seq::index::sample(&mut rng, n, keep.max(1)).into_vec();
            kept.sort_unstable();
            let model = PointCloud::new(kept.iter().map(|&i| base.points()[i]).collect());
            let scene = base.transformed(&gt);
            Instance {
                model,
                scene,
                gt,
                correspondences: kept.iter().enumerate().map(|(j, &i)| (j, i)).collect(),
            }
        }
        DegradationKind::Noise => {
            debug_assert!(spec.magnitude >= 0.0);
            let normal = Normal::new(0.0, spec.magnitude.max(f64::MIN_POSITIVE)).unwrap();
            let scene = PointCloud::new(
                base.iter()
                    .map(|p| {
                        let q = gt.apply(p);
                        if spec.magnitude > 0.0 {
                            Point3::new(
                                q.x + normal.sample(&mut rng),
                                q.y + normal.sample(&mut rng),
                                q.z + normal.sample(&mut rng),
                            )
                        } else {
                            q
                        }
                    })
                    .collect(),
            );
            Instance {
                model: base.clone(),
                scene,
                gt,
                correspondences: (0..n).map(|i| (i, i)).collect(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dist_l2;
    use crate::harness::shapes;

    fn base() -> PointCloud {
        shapes::generate("coil", 500, 11)
    }

    #[test]
    fn zero_magnitude_is_pure_transform() {
        for kind in [DegradationKind::Outliers, DegradationKind::Missing, DegradationKind::Noise] {
            let spec = DegradationSpec { kind, magnitude: 0.0, rng_seed: 5 };
            let inst = make_instance(&base(), &spec);
            assert_eq!(inst.model.len(), 500);
            assert_eq!(inst.scene.len(), 500);
            for (m, s) in inst.correspondences.iter() {
                let expect = inst.gt.apply(&inst.model.points()[*m]);
                assert!(dist_l2(&expect, &inst.scene.points()[*s]) < 1e-12);
            }
        }
    }

    #[test]
    fn missing_fraction_sizes_model() {
        let spec = DegradationSpec { kind: DegradationKind::Missing, magnitude: 0.2, rng_seed: 6 };
        let inst = make_instance(&base(), &spec);
        assert_eq!(inst.model.len(), 400);
        assert_eq!(inst.scene.len(), 500);
        assert_eq!(inst.correspondences.len(), 400);
    }

    #[test]
    fn outlier_fraction_of_scene() {
        let spec = DegradationSpec { kind: DegradationKind::Outliers, magnitude: 0.3, rng_seed: 7 };
        let inst = make_instance(&base(), &spec);
        let added = inst.scene.len() - 500;
        let frac = added as f64 / inst.scene.len() as f64;
        assert!((frac - 0.3).abs() < 0.01, "fraction {frac}");
    }

    #[test]
    fn reproducible_per_seed() {
        let spec = DegradationSpec { kind: DegradationKind::Noise, magnitude: 0.01, rng_seed: 8 };
        let a = make_instance(&base(), &spec);
        let b = make_instance(&base(), &spec);
        assert_eq!(a.scene.points(), b.scene.points());
        assert_eq!(a.gt.translation, b.gt.translation);
    }

    #[test]
    fn noise_mean_displacement_matches_half_normal() {
        // per-coordinate |x| has mean sigma * sqrt(2/pi)
        let sigma = 0.01;
        let base = shapes::generate("knob", 2000, 12);
        let mut sum = 0.0;
        let mut count = 0usize;
        for seed in 0..17 {
            let spec = DegradationSpec { kind: DegradationKind::Noise, magnitude: sigma, rng_seed: seed };
            let inst = make_instance(&base, &spec);
            for (m, s) in inst.correspondences.iter() {
                let expect = inst.gt.apply(&inst.model.points()[*m]);
                let d = inst.scene.points()[*s] - expect;
                sum += d.x.abs() + d.y.abs() + d.z.abs();
                count += 3;
            }
        }
        assert!(count >= 100_000);
        let mean = sum / count as f64;
        let expect = sigma * (2.0 / std::f64::consts::PI).sqrt();
        assert!((mean - expect).abs() / expect < 0.05, "mean {mean}, expect {expect}");
    }
}
