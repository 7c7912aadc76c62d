//! Capacitated spatiotemporal matching.
//!
//! A planner assigns heterogeneous demand (location x urgency type) to
//! capacitated service stations over a time horizon, maximizing total
//! welfare: reward minus spatial transport cost minus temporal deviation
//! cost. The core solver minimizes a finite-dimensional convex dual over
//! one weight per (station, type) pair; the optimal weights induce
//! generalized Laguerre cells in space, labeled service intervals in time,
//! envy-free prices, and finite slot schedules.
//!
//! Module map:
//! - [`domain`]: problem-instance types, cost evaluation, grid quadrature,
//!   config ingestion.
//! - [`solver`]: the convex dual objective (exact and smoothed) and its
//!   minimizer.
//! - [`partition`]: spatial/temporal partitions, matching plans, structural
//!   verifiers.
//! - [`linear`]: closed-form fast path for constant capacity and two-piece
//!   linear costs.
//! - [`pricing`]: envy-free time-dependent prices and the finite-slot
//!   mechanism.
//! - [`allocation`]: budgeted capacity allocation across stations.
//! - [`analytic`]: closed-form linear-city oracles used as ground truth.
//! - [`oracle`]: brute-force LP oracle on discretized instances.
//! - [`policies`]: benchmark assignment/scheduling rules and comparison
//!   metrics.
//! - [`scenarios`]: seeded synthetic scenario generation.

pub mod allocation;
pub mod analytic;
pub mod domain;
pub(crate) mod envelope;
pub mod linear;
pub mod oracle;
pub mod partition;
pub mod piecewise;
pub mod policies;
pub mod pricing;
pub mod scenarios;
pub mod solver;

mod gauss;
mod lbfgs;
