//! Curation and view augmentation for large aerial scene captures.
//!
//! The crate turns structure-from-motion output (poses, intrinsics, tracked
//! 3D points) into fixed-size, high-overlap view clusters, synthesizes extra
//! camera poses on virtual domes above the scene, and writes everything out
//! as DTU-style scan directories.
//!
//! * [`scene`]: domain types, COLMAP text / PLY ingestion, camera geometry.
//! * [`clustering`]: sequence, grid, ray-ground and shared-point clustering.
//! * [`sampling`]: dome pose sampling, multiscale grid domes and the
//!   rooftop-slice building detector used for semantic domes.
//! * [`render`]: z-buffered point splatting and PPM/PGM output.
//! * [`synth`]: procedural city, survey trajectory and track generation.
//! * [`export`]: DTU `cam.txt` files and the cluster manifest.

pub mod clustering;
pub mod error;
pub mod export;
pub mod render;
pub mod rng;
pub mod sampling;
pub mod scene;
pub mod synth;

pub use error::{Error, Result};
pub use scene::{
    AxisAlignedBounds, CameraPose, Intrinsics, Plane, Point3D, Ray, SceneModel, UpAxis,
};

pub use nalgebra::{Matrix3, UnitQuaternion, Vector3};
