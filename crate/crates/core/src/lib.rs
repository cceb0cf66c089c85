//! Occlusion-aware collision risk and longitudinal planning at urban
//! intersections, with a Monte Carlo harness for comparing risk modes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod geometry;
pub mod metrics;
pub mod planner;
pub mod risk;
pub mod rng;
pub mod scene;
pub mod simulator;
