//! Globally optimal translation search over a cubic range.
//!
//! Same skeleton as the rotation search, but the uncertainty region of a
//! translated point over a branch is exactly the branch cube itself: for any
//! `t` in a cube of half side `δ` centered at `t_c`, the image `m + t` stays
//! within L∞ distance `δ` of `m + t_c`, with equality at the corners. The
//! upper bound therefore enlarges the consensus threshold by the half side,
//! with no norm slack.

use crate::bnb::{self, BranchProblem, Cube, SearchStatus, TraceSample};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, PointCloud, Vec3};
use crate::integral_volume::{build, enlarged_hit, BucketGrid, IntegralVolume, OutOfBounds};
use crate::rotation_search::SearchConfig;

/// A cubic branch of translation space.
pub type TranslationCube = Cube;

#[derive(Debug, Clone)]
pub struct TranslationSearchResult {
    pub best_translation: Vec3,
    /// Exact consensus count achieved by `best_translation`.
    pub best_count: usize,
    /// Valid upper bound on the global maximum at exit.
    pub final_upper_bound: usize,
    pub iterations: u64,
    pub status: SearchStatus,
    pub bound_trace: Vec<TraceSample>,
}

/// Number of model points whose translate has a scene point within L∞
/// distance `epsilon_t`. Exact.
pub fn objective_t(
    model_rotated: &PointCloud,
    scene_grid: &BucketGrid,
    t: &Vec3,
    epsilon_t: f64,
) -> usize {
    debug_assert!(epsilon_t > 0.0);
    model_rotated
        .iter()
        .filter(|m| scene_grid.exact_consensus_exists(&(*m + t), epsilon_t))
        .count()
}

/// Upper bound on [`objective_t`] over every translation in `cube`.
pub fn upper_bound_t(
    model_rotated: &PointCloud,
    scene_iv: &IntegralVolume,
    scene_grid: &BucketGrid,
    cube: &TranslationCube,
    epsilon_t: f64,
) -> usize {
    upper_bound_t_pruned(model_rotated, scene_iv, scene_grid, cube, epsilon_t, usize::MAX)
}

/// As [`upper_bound_t`], but may stop with a valid over-estimate once the
/// branch provably cannot beat `prune_below`.
fn upper_bound_t_pruned(
    model_rotated: &PointCloud,
    scene_iv: &IntegralVolume,
    scene_grid: &BucketGrid,
    cube: &TranslationCube,
    epsilon_t: f64,
    prune_below: usize,
) -> usize {
    let reach = epsilon_t + cube.half_side;
    let total = model_rotated.len();
    let mut count = 0;
    for (i, m) in model_rotated.iter().enumerate() {
        let achievable = count + (total - i);
        if achievable <= prune_below {
            return achievable;
        }
        if enlarged_hit(scene_iv, scene_grid, &(m + cube.center), reach) {
            count += 1;
        }
    }
    count
}

struct TranslationProblem<'a> {
    model_rotated: &'a PointCloud,
    scene_iv: &'a IntegralVolume,
    scene_grid: &'a BucketGrid,
    epsilon_t: f64,
    root: Cube,
}

impl BranchProblem for TranslationProblem<'_> {
    fn root(&self) -> Cube {
        self.root
    }

    fn upper_bound(&self, cube: &Cube, prune_below: usize) -> usize {
        upper_bound_t_pruned(
            self.model_rotated,
            self.scene_iv,
            self.scene_grid,
            cube,
            self.epsilon_t,
            prune_below,
        )
    }

    fn evaluate_center(&self, cube: &Cube) -> (Vec3, usize) {
        (cube.center, objective_t(self.model_rotated, self.scene_grid, &cube.center, self.epsilon_t))
    }

    fn guide_score(&self, cube: &Cube) -> usize {
        let reach = self.epsilon_t + cube.half_side / 4.0;
        self.model_rotated
            .iter()
            .filter(|m| enlarged_hit(self.scene_iv, self.scene_grid, &(*m + cube.center), reach))
            .count()
    }

    fn refine_score(&self, point: &Vec3) -> usize {
        objective_t(self.model_rotated, self.scene_grid, point, self.epsilon_t / 2.0)
    }
}

/// Smallest cube enclosing `range`, the initial branch. Non-cubic ranges are
/// widened, not shrunk.
pub fn root_cube_for_range(range: &Aabb) -> Result<Cube> {
    let half = range.max_extent() / 2.0;
    if !(half > 0.0) || !half.is_finite() {
        return Err(Error::DegenerateBounds { axis: 0, extent: range.max_extent() });
    }
    Ok(Cube::new(range.center().coords, half, 0))
}

/// Builds the integral volume and bucket grid over the scene points.
pub fn build_translation_index(
    scene: &PointCloud,
    epsilon_t: f64,
    config: &SearchConfig,
) -> Result<(IntegralVolume, BucketGrid)> {
    let bbox = scene.bounding_box().ok_or(Error::EmptyInput { what: "scene point set" })?;
    let (r0, r1, r2) = (config.iv_resolution[0], config.iv_resolution[1], config.iv_resolution[2]);
    build(scene, (r0, r1, r2), bbox.padded(epsilon_t), OutOfBounds::Clamp)
}

/// Branch-and-bound translation search; builds the scene index internally.
pub fn bnb_translation_search(
    model_rotated: &PointCloud,
    scene: &PointCloud,
    epsilon_t: f64,
    gap: usize,
    range: &Aabb,
    config: &SearchConfig,
) -> Result<TranslationSearchResult> {
    let (iv, grid) = build_translation_index(scene, epsilon_t, config)?;
    bnb_translation_search_indexed(model_rotated, &iv, &grid, epsilon_t, gap, range, config)
}

/// Branch-and-bound translation search against a prebuilt scene index.
pub fn bnb_translation_search_indexed(
    model_rotated: &PointCloud,
    scene_iv: &IntegralVolume,
    scene_grid: &BucketGrid,
    epsilon_t: f64,
    gap: usize,
    range: &Aabb,
    config: &SearchConfig,
) -> Result<TranslationSearchResult> {
    assert!(epsilon_t > 0.0, "epsilon_t must be positive");
    if model_rotated.is_empty() {
        return Err(Error::EmptyInput { what: "model point set" });
    }
    if scene_grid.total_points() == 0 {
        return Err(Error::EmptyInput { what: "scene point set" });
    }
    let problem = TranslationProblem {
        model_rotated,
        scene_iv,
        scene_grid,
        epsilon_t,
        root: root_cube_for_range(range)?,
    };
    let out = bnb::best_first_search(&problem, gap, config.max_depth, config.record_trace);
    Ok(TranslationSearchResult {
        best_translation: out.best_point,
        best_count: out.best_count,
        final_upper_bound: out.final_upper_bound,
        iterations: out.iterations,
        status: out.status,
        bound_trace: out.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dist_linf, Point3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cloud(rng: &mut impl Rng, n: usize) -> PointCloud {
        PointCloud::new(
            (0..n)
                .map(|_| Point3::new(rng.random(), rng.random(), rng.random()))
                .collect(),
        )
    }

    fn unit_range() -> Aabb {
        Aabb::centered_cube(1.0)
    }

    #[test]
    fn objective_full_count_on_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let cloud = random_cloud(&mut rng, 80);
        let cfg = SearchConfig::default();
        let (_, grid) = build_translation_index(&cloud, 0.01, &cfg).unwrap();
        assert_eq!(objective_t(&cloud, &grid, &Vec3::zeros(), 0.01), 80);
    }

    #[test]
    fn objective_full_count_on_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let cloud = random_cloud(&mut rng, 80);
        let t0 = Vec3::new(0.21, -0.34, 0.07);
        let scene = cloud.translated(&t0);
        let cfg = SearchConfig::default();
        let (_, grid) = build_translation_index(&scene, 0.01, &cfg).unwrap();
        assert_eq!(objective_t(&cloud, &grid, &t0, 0.01), 80);
    }

    #[test]
    fn objective_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..20 {
            let model = random_cloud(&mut rng, 60);
            let scene = random_cloud(&mut rng, 70);
            let cfg = SearchConfig::default();
            let eps = rng.random_range(0.01..0.2);
            let (_, grid) = build_translation_index(&scene, eps, &cfg).unwrap();
            let t = Vec3::new(
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
            );
            let brute = model
                .iter()
                .filter(|m| scene.iter().any(|s| dist_linf(&(*m + t), s) <= eps))
                .count();
            assert_eq!(objective_t(&model, &grid, &t, eps), brute);
        }
    }

    #[test]
    fn upper_bound_dominates_sampled_objectives() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let model = random_cloud(&mut rng, 50);
        let scene = random_cloud(&mut rng, 60);
        let cfg = SearchConfig::default();
        let eps = 0.03;
        let (iv, grid) = build_translation_index(&scene, eps, &cfg).unwrap();
        for _ in 0..60 {
            let depth = rng.random_range(0..=6);
            let half = 1.0 / 2f64.powi(depth);
            let cube = TranslationCube::new(
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ),
                half,
                depth as u32,
            );
            let ub = upper_bound_t(&model, &iv, &grid, &cube, eps);
            for _ in 0..50 {
                let t = cube.center
                    + Vec3::new(
                        rng.random_range(-half..half),
                        rng.random_range(-half..half),
                        rng.random_range(-half..half),
                    );
                let obj = objective_t(&model, &grid, &t, eps);
                assert!(obj <= ub, "objective {obj} above bound {ub}");
            }
        }
    }

    #[test]
    fn cube_tightness_at_corners() {
        // |(m + t) - (m + t_c)|_inf <= half side, equality at corners.
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..500 {
            let half = rng.random_range(0.01..1.0);
            let center = Vec3::new(rng.random(), rng.random(), rng.random());
            let t = center
                + Vec3::new(
                    rng.random_range(-half..half),
                    rng.random_range(-half..half),
                    rng.random_range(-half..half),
                );
            let d = (t - center).abs().max();
            assert!(d <= half);
        }
        let corner = Vec3::new(0.25, -0.25, 0.25);
        assert_eq!((corner - Vec3::zeros()).abs().max(), 0.25);
    }

    #[test]
    fn search_recovers_zero_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let cloud = random_cloud(&mut rng, 60);
        let res =
            bnb_translation_search(&cloud, &cloud, 0.01, 0, &unit_range(), &SearchConfig::default())
                .unwrap();
        assert_eq!(res.best_count, 60);
        assert_eq!(res.status, SearchStatus::Certified);
        assert!(res.best_translation.abs().max() <= 0.01 + 1e-6);
    }

    #[test]
    fn search_recovers_constructed_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        for _ in 0..5 {
            let model = random_cloud(&mut rng, 50);
            let t0 = Vec3::new(
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
            );
            let scene = model.translated(&t0);
            let res =
                bnb_translation_search(&model, &scene, 0.01, 0, &unit_range(), &SearchConfig::default())
                    .unwrap();
            assert_eq!(res.best_count, 50);
            assert_eq!(res.status, SearchStatus::Certified);
            assert!((res.best_translation - t0).abs().max() <= 0.01 + 1e-6);
        }
    }

    #[test]
    fn search_tolerates_outliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(58);
        let model = random_cloud(&mut rng, 50);
        let t0 = Vec3::new(0.1, 0.2, -0.3);
        let mut pts: Vec<Point3> = model.translated(&t0).points().to_vec();
        for _ in 0..20 {
            pts.push(Point3::new(
                rng.random_range(-1.0..2.0),
                rng.random_range(-1.0..2.0),
                rng.random_range(-1.0..2.0),
            ));
        }
        let scene = PointCloud::new(pts);
        let res =
            bnb_translation_search(&model, &scene, 0.01, 0, &unit_range(), &SearchConfig::default())
                .unwrap();
        assert_eq!(res.best_count, 50);
        assert_eq!(res.status, SearchStatus::Certified);
    }

    #[test]
    fn empty_model_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let scene = random_cloud(&mut rng, 10);
        let empty = PointCloud::new(vec![]);
        assert!(matches!(
            bnb_translation_search(&empty, &scene, 0.01, 0, &unit_range(), &SearchConfig::default()),
            Err(Error::EmptyInput { .. })
        ));
    }
}
