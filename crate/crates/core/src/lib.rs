//! Headless simulation pipeline for dynamic indoor scenes: mesh geometry,
//! scene composition, robot control, fixed-step recording, ground-truth
//! sensors, noise post-processing and trajectory evaluation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eval;
pub mod geometry;
pub mod pose;
pub mod control;
pub mod scene;
pub mod sensors;
pub mod noise;
pub mod sim;
