//! Translation-invariant vectors (TIVs).
//!
//! A TIV is the difference vector between an ordered pair of points of one
//! cloud. Translating the cloud leaves every TIV unchanged, rotating the
//! cloud rotates every TIV by the same rotation, so aligning the TIV sets of
//! two clouds recovers the relative rotation without touching the unknown
//! translation. Short TIVs are noise-sensitive and the very longest ones
//! tend to involve outliers, hence rank-based selection: drop the longest
//! `delete_top_k`, then keep the next `keep_top_k` by norm.

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Vec3};

/// Difference vector `points[i2] - points[i1]` with its source pair.
#[derive(Debug, Clone, Copy)]
pub struct Tiv {
    pub vector: Vec3,
    pub norm: f64,
    /// `(i1, i2)`: the vector points from `i1` to `i2`.
    pub source: (u32, u32),
}

impl Tiv {
    pub fn new(vector: Vec3, source: (u32, u32)) -> Self {
        Tiv { vector, norm: vector.norm(), source }
    }
}

/// A selected, norm-descending list of TIVs.
#[derive(Debug, Clone)]
pub struct TivSet {
    tivs: Vec<Tiv>,
    pub delete_top_k: usize,
    pub keep_top_k: usize,
}

impl TivSet {
    pub fn tivs(&self) -> &[Tiv] {
        &self.tivs
    }

    pub fn len(&self) -> usize {
        self.tivs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tivs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Tiv> {
        self.tivs.iter()
    }

    /// Largest norm in the set (sets are never constructed empty).
    pub fn max_norm(&self) -> f64 {
        self.tivs.first().map(|t| t.norm).unwrap_or(0.0)
    }

    pub fn min_norm(&self) -> f64 {
        self.tivs.last().map(|t| t.norm).unwrap_or(0.0)
    }

    /// Wraps externally supplied vectors as a TIV set (used when a file of
    /// vectors is searched directly). Each entry gets the degenerate source
    /// pair `(k, k)`.
    pub fn from_vectors(vectors: impl IntoIterator<Item = Vec3>) -> Result<TivSet> {
        let mut tivs: Vec<Tiv> = vectors
            .into_iter()
            .enumerate()
            .map(|(k, v)| Tiv::new(v, (k as u32, k as u32)))
            .collect();
        if tivs.is_empty() {
            return Err(Error::EmptyInput { what: "TIV set" });
        }
        sort_by_descending_norm(&mut tivs);
        let n = tivs.len();
        Ok(TivSet { tivs, delete_top_k: 0, keep_top_k: n })
    }
}

/// All `N(N-1)` ordered-pair difference vectors of `cloud`, in `i1`-major,
/// `i2`-minor order. Both `v` and `-v` are present for every unordered pair.
pub fn construct_all_tivs(cloud: &PointCloud) -> Result<Vec<Tiv>> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::TooFewPoints { count: n, required: 2 });
    }
    let pts = cloud.points();
    let mut out = Vec::with_capacity(n * (n - 1));
    for i1 in 0..n {
        for i2 in 0..n {
            if i1 == i2 {
                continue;
            }
            out.push(Tiv::new(pts[i2] - pts[i1], (i1 as u32, i2 as u32)));
        }
    }
    Ok(out)
}

fn sort_by_descending_norm(tivs: &mut [Tiv]) {
    // Ties in norm break by ascending (i1, i2) so the order is total.
    tivs.sort_unstable_by(|a, b| {
        b.norm
            .total_cmp(&a.norm)
            .then_with(|| a.source.cmp(&b.source))
    });
}

/// Sorts by descending norm, deletes the first `min(delete_top_k, len)`
/// entries and keeps the next `min(keep_top_k, remaining)`.
pub fn select_tivs(mut tivs: Vec<Tiv>, delete_top_k: usize, keep_top_k: usize) -> Result<TivSet> {
    assert!(keep_top_k >= 1, "keep_top_k must be at least 1");
    let available = tivs.len();
    sort_by_descending_norm(&mut tivs);
    let deleted = delete_top_k.min(available);
    if deleted == available {
        return Err(Error::EmptySelection { deleted, available });
    }
    let kept: Vec<Tiv> = tivs[deleted..].iter().take(keep_top_k).copied().collect();
    Ok(TivSet { tivs: kept, delete_top_k, keep_top_k })
}

/// Keeps every TIV whose norm lies in `[lo, hi]`, sorted descending.
///
/// Used for the fixed-set side of the rotation search: an L∞ consensus at
/// threshold ε implies the partner norms differ by at most √3·ε, so a band
/// around the moving set's kept norms retains every possible consensus
/// partner no matter how the two clouds' TIV pools differ in composition.
pub fn select_norm_band(tivs: Vec<Tiv>, lo: f64, hi: f64) -> Result<TivSet> {
    let mut kept: Vec<Tiv> = tivs.into_iter().filter(|t| t.norm >= lo && t.norm <= hi).collect();
    if kept.is_empty() {
        return Err(Error::EmptyInput { what: "norm-band TIV selection" });
    }
    sort_by_descending_norm(&mut kept);
    let n = kept.len();
    Ok(TivSet { tivs: kept, delete_top_k: 0, keep_top_k: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rodrigues, Point3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(points: &[[f64; 3]]) -> PointCloud {
        PointCloud::new(points.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect())
    }

    /// Coordinates on a dyadic grid so that translation is exact in floats.
    fn dyadic_cloud(rng: &mut impl Rng, n: usize) -> PointCloud {
        PointCloud::new(
            (0..n)
                .map(|_| {
                    Point3::new(
                        rng.random_range(0..1 << 20) as f64 / (1 << 20) as f64,
                        rng.random_range(0..1 << 20) as f64 / (1 << 20) as f64,
                        rng.random_range(0..1 << 20) as f64 / (1 << 20) as f64,
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn two_point_cloud_gives_both_directions() {
        let c = cloud(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        let tivs = construct_all_tivs(&c).unwrap();
        assert_eq!(tivs.len(), 2);
        assert_eq!(tivs[0].vector, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(tivs[0].source, (0, 1));
        assert_eq!(tivs[1].vector, Vec3::new(-1.0, 0.0, 0.0));
        assert_eq!(tivs[1].source, (1, 0));
    }

    #[test]
    fn three_points_give_six_tivs() {
        let c = cloud(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0]]);
        assert_eq!(construct_all_tivs(&c).unwrap().len(), 6);
    }

    #[test]
    fn too_few_points_rejected() {
        let c = cloud(&[[0.0, 0.0, 0.0]]);
        assert!(matches!(
            construct_all_tivs(&c),
            Err(Error::TooFewPoints { count: 1, required: 2 })
        ));
    }

    #[test]
    fn translation_invariance_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let c = dyadic_cloud(&mut rng, 12);
            // Translation on a coarser dyadic grid keeps every sum exact.
            let t = Vec3::new(
                rng.random_range(-128..128) as f64 / 16.0,
                rng.random_range(-128..128) as f64 / 16.0,
                rng.random_range(-128..128) as f64 / 16.0,
            );
            let shifted = c.translated(&t);
            let a = construct_all_tivs(&c).unwrap();
            let b = construct_all_tivs(&shifted).unwrap();
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x.source, y.source);
                assert_eq!(x.vector, y.vector, "TIVs must match exactly");
            }
        }
    }

    #[test]
    fn rotation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..50 {
            let c = dyadic_cloud(&mut rng, 10);
            let r = rodrigues(&Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ));
            let rotated = c.rotated(&r);
            let a = construct_all_tivs(&c).unwrap();
            let b = construct_all_tivs(&rotated).unwrap();
            for (x, y) in a.iter().zip(b.iter()) {
                let expect = r * x.vector;
                assert!((expect - y.vector).abs().max() < 1e-12);
            }
        }
    }

    #[test]
    fn selection_takes_longest() {
        let vecs: Vec<Tiv> = (1..=10)
            .map(|k| Tiv::new(Vec3::new(k as f64, 0.0, 0.0), (k, 0)))
            .collect();
        let set = select_tivs(vecs.clone(), 0, 3).unwrap();
        let norms: Vec<f64> = set.iter().map(|t| t.norm).collect();
        assert_eq!(norms, vec![10.0, 9.0, 8.0]);

        let set = select_tivs(vecs, 4, 3).unwrap();
        let norms: Vec<f64> = set.iter().map(|t| t.norm).collect();
        assert_eq!(norms, vec![6.0, 5.0, 4.0]);
    }

    #[test]
    fn selection_exhausted_pool_errors() {
        let vecs: Vec<Tiv> = (1..=10)
            .map(|k| Tiv::new(Vec3::new(k as f64, 0.0, 0.0), (k, 0)))
            .collect();
        assert!(matches!(
            select_tivs(vecs, 10, 5),
            Err(Error::EmptySelection { deleted: 10, available: 10 })
        ));
    }

    #[test]
    fn selection_clamps_small_pools() {
        let vecs: Vec<Tiv> = (1..=4)
            .map(|k| Tiv::new(Vec3::new(k as f64, 0.0, 0.0), (k, 0)))
            .collect();
        let set = select_tivs(vecs, 1, 10).unwrap();
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn selected_norms_never_exceed_deleted() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let c = dyadic_cloud(&mut rng, 15);
            let all = construct_all_tivs(&c).unwrap();
            let delete = rng.random_range(0..80);
            let keep = rng.random_range(1..60);
            let total = all.len();
            if delete >= total {
                continue;
            }
            let mut sorted = all.clone();
            sort_by_descending_norm(&mut sorted);
            let set = select_tivs(all, delete, keep).unwrap();
            assert!(set.len() <= keep);
            let deleted_min = sorted[..delete].iter().map(|t| t.norm).fold(f64::INFINITY, f64::min);
            for t in set.iter() {
                assert!(t.norm <= deleted_min);
            }
        }
    }

    #[test]
    fn norm_band_keeps_exactly_the_band() {
        let vecs: Vec<Tiv> = (1..=10)
            .map(|k| Tiv::new(Vec3::new(k as f64, 0.0, 0.0), (k, 0)))
            .collect();
        let set = select_norm_band(vecs, 3.5, 7.0).unwrap();
        let norms: Vec<f64> = set.iter().map(|t| t.norm).collect();
        assert_eq!(norms, vec![7.0, 6.0, 5.0, 4.0]);
    }
}
