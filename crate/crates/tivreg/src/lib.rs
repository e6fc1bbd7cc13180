//! Globally optimal rigid registration of two 3D point sets.
//!
//! The 6-DOF problem is decomposed into two 3-DOF searches. Difference
//! vectors between point pairs (translation-invariant vectors, TIVs) are
//! unaffected by any translation of their cloud, so the relative rotation
//! can be recovered first by a branch-and-bound search that aligns the two
//! TIV sets under an L∞ consensus objective. The model is then rotated and
//! a second branch-and-bound search recovers the translation. Both searches
//! bound their branches with constant-time box counts against a 3D integral
//! volume, with exact bucket-grid checks for the consensus values, so every
//! result carries a certificate: at gap 0 the returned consensus count is
//! the global maximum.
//!
//! The crate ships the registration pipeline ([`pipeline::register`]), the
//! individual searches, the integral-volume structure, a synthetic
//! degradation harness with brute-force oracles ([`harness`]), point-cloud
//! file I/O, and the `tivreg` command-line tool.

pub mod bnb;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod integral_volume;
pub mod io;
pub mod pipeline;
pub mod rotation_search;
pub mod tiv;
pub mod translation_search;

pub mod cli;

pub use error::{Error, Result};
pub use geometry::{Aabb, Mat3, Point3, PointCloud, RigidTransform, RotationVector, Vec3};
