//! Convexity analysis of error rates for maximum-likelihood detection in
//! additive white Gaussian noise.
//!
//! Given an arbitrary constellation (or a code viewed as one), the crate
//! builds the Voronoi decision regions, estimates SER, PEP and BER, estimates
//! their second derivatives in SNR and in noise power, and classifies where
//! each error rate is provably convex or concave.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision.

pub mod acceptance;
pub mod constellation;
pub mod convexity;
pub mod curvature;
pub mod error;
pub mod error_engine;
pub mod geometry;
pub mod mc;
pub mod probes;
pub mod run;
pub mod scalar;

pub use constellation::{build_standard, ChannelParams, Constellation, StandardKind};
pub use convexity::{thresholds, ConvexityReport, ThresholdSet, Verdict};
pub use curvature::{curvature_mc, Axis, CurvatureEstimate, Sign};
pub use error::{Error, Result};
pub use error_engine::{rate_mc, ErrorMetric, Estimate};
pub use geometry::{HalfspaceRegion, RegionExtents};
pub use mc::Budget;
pub use scalar::Scalar;

pub type Constellation64 = Constellation<f64>;
pub type Constellation32 = Constellation<f32>;
pub type ChannelParams64 = ChannelParams<f64>;
pub type ChannelParams32 = ChannelParams<f32>;
pub type HalfspaceRegion64 = HalfspaceRegion<f64>;
pub type HalfspaceRegion32 = HalfspaceRegion<f32>;
pub type Estimate64 = Estimate<f64>;
pub type Estimate32 = Estimate<f32>;
pub type CurvatureEstimate64 = CurvatureEstimate<f64>;
pub type CurvatureEstimate32 = CurvatureEstimate<f32>;
pub type ThresholdSet64 = ThresholdSet<f64>;
pub type ThresholdSet32 = ThresholdSet<f32>;
