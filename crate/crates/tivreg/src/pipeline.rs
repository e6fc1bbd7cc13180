//! End-to-end registration: normalize, build and select TIVs, search the
//! rotation, rotate the model, search the translation, compose the result.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point3, PointCloud, RigidTransform, Vec3};
use crate::rotation_search::{
    bnb_rotation_search_indexed, build_rotation_index, RotationSearchResult, SearchConfig,
};
use crate::tiv::{construct_all_tivs, select_norm_band, select_tivs, TivSet};
use crate::translation_search::{
    bnb_translation_search_indexed, build_translation_index, TranslationSearchResult,
};

/// All knobs of a registration run.
#[derive(Debug, Clone)]
pub struct RegistrationConfig {
    /// Shared inlier threshold of both searches, in search-space units
    /// (after normalization when `normalize` is on).
    pub epsilon: f64,
    pub iv_resolution: [usize; 3],
    /// Longest TIVs dropped from the moving set before keeping.
    pub tiv_delete: usize,
    /// TIVs kept for the moving side of the rotation search.
    pub tiv_keep: usize,
    pub gap_r: usize,
    pub gap_t: usize,
    pub translation_range: Aabb,
    /// Jointly scale both clouds into the unit cube before searching and
    /// express the returned transform in the original units.
    pub normalize: bool,
    /// Reserved for sampling stages (e.g. CLI downsampling); the searches
    /// themselves are deterministic.
    pub rng_seed: u64,
    pub max_depth: u32,
    pub record_trace: bool,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        RegistrationConfig {
            epsilon: 0.005,
            iv_resolution: [51, 51, 51],
            tiv_delete: 5000,
            tiv_keep: 200,
            gap_r: 0,
            gap_t: 0,
            translation_range: Aabb::centered_cube(1.0),
            normalize: true,
            rng_seed: 0,
            max_depth: 25,
            record_trace: false,
        }
    }
}

impl RegistrationConfig {
    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            max_depth: self.max_depth,
            iv_resolution: self.iv_resolution,
            record_trace: self.record_trace,
        }
    }
}

/// Uniform scale-and-shift that maps the joint input frame into `[0,1]³`.
#[derive(Debug, Clone, Copy)]
pub struct NormalizationRecord {
    pub scale: f64,
    pub offset: Vec3,
}

impl NormalizationRecord {
    pub fn identity() -> Self {
        NormalizationRecord { scale: 1.0, offset: Vec3::zeros() }
    }

    pub fn normalize_point(&self, p: &Point3) -> Point3 {
        Point3::from((p.coords - self.offset) * self.scale)
    }

    pub fn denormalize_point(&self, p: &Point3) -> Point3 {
        Point3::from(p.coords / self.scale + self.offset)
    }

    /// Expresses a transform found in normalized space in original units.
    /// The rotation carries over; only the translation rescales and shifts.
    pub fn denormalize_transform(&self, t: &RigidTransform) -> RigidTransform {
        let r = t.rotation;
        let translation = self.offset - r * self.offset + t.translation / self.scale;
        RigidTransform::new(r, translation)
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct StageTimings {
    pub tiv_s: f64,
    pub iv_rotation_s: f64,
    pub rotation_search_s: f64,
    pub iv_translation_s: f64,
    pub translation_search_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone)]
pub struct RegistrationResult {
    /// Model-to-scene transform in the units of the input clouds.
    pub transform: RigidTransform,
    pub rotation_result: RotationSearchResult,
    pub translation_result: TranslationSearchResult,
    pub timings: StageTimings,
    pub normalization: NormalizationRecord,
    pub moving_tiv_count: usize,
    pub fixed_tiv_count: usize,
}

/// Scales and shifts both clouds by one common map so their union fits
/// `[0,1]³` with the longest axis touching both faces.
pub fn normalize_to_unit_cube(
    model: &PointCloud,
    scene: &PointCloud,
) -> Result<(PointCloud, PointCloud, NormalizationRecord)> {
    let joint = model
        .iter()
        .chain(scene.iter())
        .copied()
        .collect::<PointCloud>()
        .bounding_box()
        .ok_or(Error::NormalizationDegenerate)?;
    let extent = joint.max_extent();
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(Error::NormalizationDegenerate);
    }
    let rec = NormalizationRecord { scale: 1.0 / extent, offset: joint.min.coords };
    let m = model.iter().map(|p| rec.normalize_point(p)).collect();
    let s = scene.iter().map(|p| rec.normalize_point(p)).collect();
    Ok((m, s, rec))
}

/// Consensus partners at threshold ε can differ in norm by at most √3·ε, so
/// the fixed TIV set keeps exactly the norm band of the selected moving TIVs
/// widened by that margin. This loses no possible partner regardless of how
/// the two pools differ (outliers, missing points), unlike applying the same
/// rank window to both sides.
fn scene_band_margin(epsilon: f64) -> f64 {
    3f64.sqrt() * epsilon
}

/// Builds both TIV sets for the rotation stage.
pub fn build_tiv_sets(
    model: &PointCloud,
    scene: &PointCloud,
    config: &RegistrationConfig,
) -> Result<(TivSet, TivSet)> {
    let moving = select_tivs(construct_all_tivs(model)?, config.tiv_delete, config.tiv_keep)?;
    let margin = scene_band_margin(config.epsilon);
    let fixed = select_norm_band(
        construct_all_tivs(scene)?,
        (moving.min_norm() - margin).max(0.0),
        moving.max_norm() + margin,
    )?;
    Ok((moving, fixed))
}

/// Registers `model` onto `scene`; see the module docs for the stage order.
pub fn register(
    model: &PointCloud,
    scene: &PointCloud,
    config: &RegistrationConfig,
) -> Result<RegistrationResult> {
    assert!(config.epsilon > 0.0, "epsilon must be positive");
    assert!(config.iv_resolution.iter().all(|&r| r >= 1), "iv resolution must be >= 1");
    if model.len() < 2 {
        return Err(Error::TooFewPoints { count: model.len(), required: 2 });
    }
    if scene.len() < 2 {
        return Err(Error::TooFewPoints { count: scene.len(), required: 2 });
    }
    let t_start = Instant::now();
    let search_cfg = config.search_config();

    let (model_n, scene_n, record) = if config.normalize {
        normalize_to_unit_cube(model, scene)?
    } else {
        (model.clone(), scene.clone(), NormalizationRecord::identity())
    };

    let t0 = Instant::now();
    let (moving_tivs, fixed_tivs) = build_tiv_sets(&model_n, &scene_n, config)?;
    let tiv_s = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let (rot_iv, rot_grid) =
        build_rotation_index(&moving_tivs, &fixed_tivs, config.epsilon, &search_cfg)?;
    let iv_rotation_s = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let rotation_result = bnb_rotation_search_indexed(
        &moving_tivs,
        &rot_iv,
        &rot_grid,
        config.epsilon,
        config.gap_r,
        &search_cfg,
    )?;
    let rotation_search_s = t0.elapsed().as_secs_f64();

    let model_rotated = model_n.rotated(&rotation_result.best_rotation_matrix);

    let t0 = Instant::now();
    let (tr_iv, tr_grid) = build_translation_index(&scene_n, config.epsilon, &search_cfg)?;
    let iv_translation_s = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let translation_result = bnb_translation_search_indexed(
        &model_rotated,
        &tr_iv,
        &tr_grid,
        config.epsilon,
        config.gap_t,
        &config.translation_range,
        &search_cfg,
    )?;
    let translation_search_s = t0.elapsed().as_secs_f64();

    let normalized_transform = RigidTransform::new(
        rotation_result.best_rotation_matrix,
        translation_result.best_translation,
    );
    let transform = record.denormalize_transform(&normalized_transform);

    Ok(RegistrationResult {
        transform,
        rotation_result,
        translation_result,
        timings: StageTimings {
            tiv_s,
            iv_rotation_s,
            rotation_search_s,
            iv_translation_s,
            translation_search_s,
            total_s: t_start.elapsed().as_secs_f64(),
        },
        normalization: record,
        moving_tiv_count: moving_tivs.len(),
        fixed_tiv_count: fixed_tivs.len(),
    })
}
