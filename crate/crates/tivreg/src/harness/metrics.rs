//! Evaluation metrics and the exhaustive consensus oracle.

use crate::error::{Error, Result};
use crate::geometry::{dist_l2, dist_linf, PointCloud, RigidTransform};

/// Root mean square L2 distance between transformed model points and their
/// true scene counterparts over the correspondence map.
pub fn rms_error(
    estimated: &RigidTransform,
    correspondences: &[(usize, usize)],
    model: &PointCloud,
    scene: &PointCloud,
) -> Result<f64> {
    if correspondences.is_empty() {
        return Err(Error::NoCorrespondences);
    }
    let sum: f64 = correspondences
        .iter()
        .map(|(m, s)| dist_l2(&estimated.apply(&model.points()[*m]), &scene.points()[*s]).powi(2))
        .sum();
    Ok((sum / correspondences.len() as f64).sqrt())
}

/// L2 distance between the estimated and true translation vectors.
pub fn translation_error(estimated: &RigidTransform, gt: &RigidTransform) -> f64 {
    (estimated.translation - gt.translation).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L2,
    Linf,
}

/// Exhaustive double-loop consensus count: model points whose transform has
/// a scene point within `epsilon` under the chosen norm. The reference
/// oracle for every objective implementation.
pub fn brute_force_consensus(
    model: &PointCloud,
    scene: &PointCloud,
    transform: &RigidTransform,
    epsilon: f64,
    norm: Norm,
) -> usize {
    debug_assert!(epsilon > 0.0);
    model
        .iter()
        .filter(|m| {
            let img = transform.apply(m);
            scene.iter().any(|s| match norm {
                Norm::L2 => dist_l2(&img, s) <= epsilon,
                Norm::Linf => dist_linf(&img, s) <= epsilon,
            })
        })
        .count()
}
