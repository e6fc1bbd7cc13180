//! Foundational 3D types: points, clouds, axis-aligned boxes, angle-axis
//! rotations and rigid transforms.
//!
//! All coordinates are 64-bit floats. Rotations are handled in two forms:
//! a 3-vector in angle-axis encoding (direction = axis, norm = angle in
//! radians; every rotation fits in the ball of radius π) and the
//! corresponding 3×3 matrix. Conversion is [`rodrigues`].

use nalgebra as na;

pub type Point3 = na::Point3<f64>;
pub type Vec3 = na::Vector3<f64>;
pub type Mat3 = na::Matrix3<f64>;

/// Angle-axis rotation vector.
pub type RotationVector = Vec3;
/// 3×3 rotation matrix (orthonormal, det +1 within [`ROTATION_TOL`]).
pub type RotationMatrix = Mat3;

/// Orthonormality tolerance for rotation matrices.
pub const ROTATION_TOL: f64 = 1e-9;

/// An ordered, immutable set of 3D points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Self {
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point3> {
        self.points.iter()
    }

    /// Smallest axis-aligned box containing the cloud; `None` when empty.
    pub fn bounding_box(&self) -> Option<Aabb> {
        Aabb::from_points(self.points.iter().copied())
    }

    pub fn transformed(&self, t: &RigidTransform) -> PointCloud {
        PointCloud::new(self.points.iter().map(|p| t.apply(p)).collect())
    }

    pub fn rotated(&self, rot: &RotationMatrix) -> PointCloud {
        PointCloud::new(self.points.iter().map(|p| Point3::from(rot * p.coords)).collect())
    }

    pub fn translated(&self, t: &Vec3) -> PointCloud {
        PointCloud::new(self.points.iter().map(|p| p + t).collect())
    }
}

impl FromIterator<Point3> for PointCloud {
    fn from_iter<I: IntoIterator<Item = Point3>>(iter: I) -> Self {
        PointCloud::new(iter.into_iter().collect())
    }
}

/// Axis-aligned cuboid, `min[a] <= max[a]` per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Self {
        Aabb { min, max }
    }

    pub fn from_points<I: IntoIterator<Item = Point3>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut min = first;
        let mut max = first;
        for p in it {
            for a in 0..3 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        Some(Aabb { min, max })
    }

    /// Cube `[-h, h]^3`.
    pub fn centered_cube(h: f64) -> Self {
        Aabb::new(Point3::new(-h, -h, -h), Point3::new(h, h, h))
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn max_extent(&self) -> f64 {
        let e = self.extent();
        e.x.max(e.y).max(e.z)
    }

    pub fn center(&self) -> Point3 {
        na::center(&self.min, &self.max)
    }

    /// Grown by `pad` on every face.
    pub fn padded(&self, pad: f64) -> Self {
        let d = Vec3::repeat(pad);
        Aabb::new(self.min - d, self.max + d)
    }

    pub fn contains(&self, p: &Point3) -> bool {
        (0..3).all(|a| self.min[a] <= p[a] && p[a] <= self.max[a])
    }
}

/// Rotation followed by translation: `p ↦ R p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: RotationMatrix,
    pub translation: Vec3,
}

impl RigidTransform {
    pub fn new(rotation: RotationMatrix, translation: Vec3) -> Self {
        RigidTransform { rotation, translation }
    }

    pub fn identity() -> Self {
        RigidTransform::new(Mat3::identity(), Vec3::zeros())
    }

    pub fn apply(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform::new(rt, -(rt * self.translation))
    }
}

/// Rotation matrix for the angle-axis vector `r` (axis `r/|r|`, angle `|r|`).
/// Returns the identity when `|r| < 1e-12`.
pub fn rodrigues(r: &RotationVector) -> RotationMatrix {
    let theta = r.norm();
    if theta < 1e-12 {
        return Mat3::identity();
    }
    let k = r / theta;
    let kx = skew(&k);
    Mat3::identity() + kx * theta.sin() + kx * kx * (1.0 - theta.cos())
}

fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// True when `m` is orthonormal with determinant +1 within `tol`.
pub fn is_rotation_matrix(m: &Mat3, tol: f64) -> bool {
    let gram = m.transpose() * m;
    let ortho = (gram - Mat3::identity()).abs().max();
    ortho <= tol && (m.determinant() - 1.0).abs() <= tol
}

/// Chebyshev distance: max over coordinates of `|a - b|`.
pub fn dist_linf(a: &Point3, b: &Point3) -> f64 {
    let d = a - b;
    d.x.abs().max(d.y.abs()).max(d.z.abs())
}

/// Euclidean distance.
pub fn dist_l2(a: &Point3, b: &Point3) -> f64 {
    (a - b).norm()
}

/// Geodesic angle between two rotations, in radians, clamped to `[0, π]`.
pub fn angular_error(r_est: &RotationMatrix, r_gt: &RotationMatrix) -> f64 {
    let c = ((r_est.transpose() * r_gt).trace() - 1.0) / 2.0;
    c.clamp(-1.0, 1.0).acos()
}

/// Radially projects an angle-axis vector onto the closed π-ball.
pub fn project_into_pi_ball(r: &RotationVector) -> RotationVector {
    let n = r.norm();
    if n <= std::f64::consts::PI {
        *r
    } else {
        r * (std::f64::consts::PI / n)
    }
}
