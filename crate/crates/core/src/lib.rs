//! Relative pose estimation for a stereo rolling-shutter rig moving with
//! constant velocity, SGM stereo depth, and depth-aware rolling-shutter
//! correction.
//!
//! The pipeline is:
//!
//! 1. [`geom`]: per-row poses of the four images (first/second frame,
//!    left/right camera) and the rolling-shutter projection.
//! 2. [`essential`]: row-pair essential matrices and their expansion into
//!    monomials of the unknown motion.
//! 3. [`solver`]: the lifted 19-unknown linear system solved by SVD, motion
//!    extraction, a global-shutter 8-point baseline and a RANSAC wrapper.
//! 4. [`stereo`]: census/SGM disparity and depth.
//! 5. [`rectify`]: synthetic rolling-shutter rendering and forward-warp
//!    correction to the first-row pose.
//! 6. [`simgen`]: synthetic correspondences, error metrics and sweeps.
//!
//! Pixel coordinates follow a row-first convention throughout: a pixel is
//! `[u, v, 1]` with `u` the scanline (row) index and `v` the column.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(feature = "cli")]
pub mod cli;
pub mod config;
pub mod error;
pub mod essential;
pub mod geom;
pub mod image;
pub mod io;
pub mod poly;
pub mod rectify;
pub mod simgen;
pub mod solver;
pub mod stereo;
pub mod svg;

pub use error::{Error, Result};
