//! Node coverage estimation and node-position analysis for dynamic (ad hoc) networks.
//!
//! The numeric modules are generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`, which is what the CLI uses.
//!
//! - [`mc_estimation`]: seeded Monte Carlo estimates of π, areas under bounded curves,
//!   and expected in-region node counts.
//! - [`coverage`]: circular coverage membership and IP block partitioning.
//! - [`curve_fit`]: vertical and perpendicular offset least-squares lines.
//! - [`exp_models`]: growth, decay and saturating growth models with log-linear fitting.
//! - [`position_prediction`]: geometric-mean interpolation and the AM/HM/GM identity.
//! - [`cell_network`]: join-order leader election and versioned routing tables per cell.

pub mod cell_network;
pub mod coverage;
pub mod curve_fit;
pub mod exp_models;
pub mod geometry;
pub mod mc_estimation;
pub mod position_prediction;
pub mod rng;
pub mod scalar;

pub use scalar::Real;

pub type Point2D = geometry::Point2D<f64>;
pub type Point2DF32 = geometry::Point2D<f32>;

pub type McEstimate = mc_estimation::McEstimate<f64>;
pub type BoundedFunction = mc_estimation::BoundedFunction<f64>;

pub type CoverageRegion = coverage::CoverageRegion<f64>;
pub type Membership = coverage::Membership<f64>;

pub type PointSet = curve_fit::PointSet<f64>;
pub type SummaryStats = curve_fit::SummaryStats<f64>;
pub type LinearFit = curve_fit::LinearFit<f64>;
pub type LinearFitF32 = curve_fit::LinearFit<f32>;

pub type ExpModel = exp_models::ExpModel<f64>;
pub type TimeSeries = exp_models::TimeSeries<f64>;

pub type PositionSample = position_prediction::PositionSample<f64>;
pub type Means = position_prediction::Means<f64>;

pub use cell_network::{CellState, Event, EventOp, LogEntry, NodeId, RoutingTable};
pub use coverage::IpAllocation;
pub use mc_estimation::McConfig;
