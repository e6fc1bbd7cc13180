//! Globally optimal rotation search over the π-ball.
//!
//! Maximizes the L∞ consensus count between a moving TIV set and a fixed
//! TIV set over all 3D rotations. Branches are cubes of angle-axis space,
//! starting from `[-π, π]³`. For any rotation inside a cube, the image of a
//! vector `m` stays within a ball of radius `delta_r(|m|, α)` around the
//! image under the cube-center rotation, where `α` is the cube's half
//! diagonal. Enlarging the consensus threshold by that radius therefore
//! gives a valid upper bound, evaluated as an axis-aligned box count.

use std::f64::consts::PI;

use crate::bnb::{self, BranchProblem, Cube, SearchStatus, TraceSample};
use crate::error::{Error, Result};
use crate::geometry::{project_into_pi_ball, rodrigues, Point3, PointCloud, RotationMatrix, RotationVector, Vec3};
use crate::integral_volume::{build, enlarged_hit, BucketGrid, IntegralVolume, OutOfBounds};
use crate::tiv::TivSet;

/// A cubic branch of angle-axis space.
pub type RotationCube = Cube;

/// Shared knobs of both branch-and-bound searches.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Branches at this depth are evaluated but not subdivided.
    pub max_depth: u32,
    /// Integral-volume subdivisions per axis.
    pub iv_resolution: [usize; 3],
    /// Record one `(elapsed, upper, lower)` row per expanded branch.
    pub record_trace: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_depth: 25, iv_resolution: [51, 51, 51], record_trace: false }
    }
}

#[derive(Debug, Clone)]
pub struct RotationSearchResult {
    pub best_rotation: RotationVector,
    pub best_rotation_matrix: RotationMatrix,
    /// Exact consensus count achieved by `best_rotation`.
    pub best_count: usize,
    /// Valid upper bound on the global maximum at exit.
    pub final_upper_bound: usize,
    pub iterations: u64,
    pub status: SearchStatus,
    pub bound_trace: Vec<TraceSample>,
}

/// Maximum displacement of a vector of norm `m_norm` between any rotation in
/// a branch of half-diagonal `alpha` and the branch-center rotation: the
/// chord `sqrt(2 m² (1 - cos(min(alpha, π))))`, computed via the half-angle
/// sine. Monotone in both arguments and never above `2 m_norm`.
pub fn delta_r(m_norm: f64, alpha: f64) -> f64 {
    debug_assert!(m_norm >= 0.0 && alpha >= 0.0);
    2.0 * m_norm * (0.5 * alpha.min(PI)).sin()
}

/// Number of moving TIVs whose rotated image has a fixed TIV within L∞
/// distance `epsilon_r`. Exact.
pub fn objective_r(
    tivs_moving: &TivSet,
    scene_grid: &BucketGrid,
    rotation: &RotationMatrix,
    epsilon_r: f64,
) -> usize {
    debug_assert!(epsilon_r > 0.0);
    tivs_moving
        .iter()
        .filter(|t| scene_grid.exact_consensus_exists(&Point3::from(rotation * t.vector), epsilon_r))
        .count()
}

/// Upper bound on [`objective_r`] over every rotation in `cube`: counts the
/// moving TIVs whose threshold-plus-`delta_r` box around the center image
/// contains at least one fixed TIV.
pub fn upper_bound_r(
    tivs_moving: &TivSet,
    scene_iv: &IntegralVolume,
    scene_grid: &BucketGrid,
    cube: &RotationCube,
    epsilon_r: f64,
) -> usize {
    upper_bound_r_pruned(tivs_moving, scene_iv, scene_grid, cube, epsilon_r, usize::MAX)
}

/// As [`upper_bound_r`], but may stop once even a full score on the
/// remaining TIVs cannot exceed `prune_below`; the returned over-estimate is
/// then `<= prune_below` and the caller discards the branch.
fn upper_bound_r_pruned(
    tivs_moving: &TivSet,
    scene_iv: &IntegralVolume,
    scene_grid: &BucketGrid,
    cube: &RotationCube,
    epsilon_r: f64,
    prune_below: usize,
) -> usize {
    let rc = rodrigues(&cube.center);
    let alpha = cube.half_diagonal();
    let total = tivs_moving.len();
    let mut count = 0;
    for (i, t) in tivs_moving.iter().enumerate() {
        let achievable = count + (total - i);
        if achievable <= prune_below {
            return achievable;
        }
        let img = Point3::from(rc * t.vector);
        if enlarged_hit(scene_iv, scene_grid, &img, epsilon_r + delta_r(t.norm, alpha)) {
            count += 1;
        }
    }
    count
}

struct RotationProblem<'a> {
    tivs_moving: &'a TivSet,
    scene_iv: &'a IntegralVolume,
    scene_grid: &'a BucketGrid,
    epsilon_r: f64,
}

impl BranchProblem for RotationProblem<'_> {
    fn root(&self) -> Cube {
        Cube::new(Vec3::zeros(), PI, 0)
    }

    // Branches entirely outside the π-ball contain no rotation that is not
    // already covered by some branch inside it.
    fn admit(&self, cube: &Cube) -> bool {
        cube.distance_to_origin() <= PI
    }

    fn upper_bound(&self, cube: &Cube, prune_below: usize) -> usize {
        upper_bound_r_pruned(
            self.tivs_moving,
            self.scene_iv,
            self.scene_grid,
            cube,
            self.epsilon_r,
            prune_below,
        )
    }

    fn evaluate_center(&self, cube: &Cube) -> (Vec3, usize) {
        let r = project_into_pi_ball(&cube.center);
        let count = objective_r(self.tivs_moving, self.scene_grid, &rodrigues(&r), self.epsilon_r);
        (r, count)
    }

    // Consensus at a quarter of the branch uncertainty radius: coarse-to-
    // fine proximity signal for the queue ordering.
    fn guide_score(&self, cube: &Cube) -> usize {
        let rc = rodrigues(&cube.center);
        let alpha = cube.half_diagonal();
        self.tivs_moving
            .iter()
            .filter(|t| {
                let img = Point3::from(rc * t.vector);
                let reach = self.epsilon_r + delta_r(t.norm, alpha) / 4.0;
                enlarged_hit(self.scene_iv, self.scene_grid, &img, reach)
            })
            .count()
    }

    fn refine_score(&self, point: &Vec3) -> usize {
        objective_r(self.tivs_moving, self.scene_grid, &rodrigues(point), self.epsilon_r / 2.0)
    }
}

/// Builds the integral volume and bucket grid over the fixed TIV set.
///
/// Bounds are the fixed vectors' bounding box padded by `epsilon_r` plus the
/// largest possible uncertainty radius of the moving set, so bound queries
/// stay inside the grid instead of clipping.
pub fn build_rotation_index(
    tivs_moving: &TivSet,
    tivs_scene: &TivSet,
    epsilon_r: f64,
    config: &SearchConfig,
) -> Result<(IntegralVolume, BucketGrid)> {
    if tivs_scene.is_empty() {
        return Err(Error::EmptyInput { what: "fixed TIV set" });
    }
    let points = PointCloud::new(tivs_scene.iter().map(|t| Point3::from(t.vector)).collect());
    let bbox = points.bounding_box().expect("non-empty");
    let pad = epsilon_r + 2.0 * tivs_moving.max_norm();
    let (r0, r1, r2) = (config.iv_resolution[0], config.iv_resolution[1], config.iv_resolution[2]);
    build(&points, (r0, r1, r2), bbox.padded(pad), OutOfBounds::Clamp)
}

/// Branch-and-bound rotation search; builds the fixed-set index internally.
pub fn bnb_rotation_search(
    tivs_moving: &TivSet,
    tivs_scene: &TivSet,
    epsilon_r: f64,
    gap: usize,
    config: &SearchConfig,
) -> Result<RotationSearchResult> {
    let (iv, grid) = build_rotation_index(tivs_moving, tivs_scene, epsilon_r, config)?;
    bnb_rotation_search_indexed(tivs_moving, &iv, &grid, epsilon_r, gap, config)
}

/// Branch-and-bound rotation search against a prebuilt fixed-set index.
pub fn bnb_rotation_search_indexed(
    tivs_moving: &TivSet,
    scene_iv: &IntegralVolume,
    scene_grid: &BucketGrid,
    epsilon_r: f64,
    gap: usize,
    config: &SearchConfig,
) -> Result<RotationSearchResult> {
    assert!(epsilon_r > 0.0, "epsilon_r must be positive");
    if tivs_moving.is_empty() {
        return Err(Error::EmptyInput { what: "moving TIV set" });
    }
    if scene_grid.total_points() == 0 {
        return Err(Error::EmptyInput { what: "fixed TIV set" });
    }
    let problem = RotationProblem { tivs_moving, scene_iv, scene_grid, epsilon_r };
    let out = bnb::best_first_search(&problem, gap, config.max_depth, config.record_trace);
    Ok(RotationSearchResult {
        best_rotation: out.best_point,
        best_rotation_matrix: rodrigues(&out.best_point),
        best_count: out.best_count,
        final_upper_bound: out.final_upper_bound,
        iterations: out.iterations,
        status: out.status,
        bound_trace: out.trace,
    })
}
