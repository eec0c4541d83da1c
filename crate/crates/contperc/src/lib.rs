//! Planar continuum percolation: random connection models with straight
//! edges, their "enhanced" variants where crossing edges merge components,
//! and Poisson stick networks.
//!
//! The crate samples realizations of these models in a window, detects
//! geometric events (box crossings, annulus circuits, one-arm connections,
//! longest-edge statistics) exactly, and estimates event probabilities with
//! reproducible, seed-deterministic Monte Carlo. A companion set of
//! deterministic numerics (moment integrals, path-counting bound series,
//! heavy-tail connection asymptotics) supports quantitative checks.
//!
//! # Example
//!
//! Estimate the probability that an enhanced random connection model at
//! intensity 1.5 crosses a 6-by-3 rectangle left to right:
//!
//! ```
//! use contperc::analysis::estimate_event_probability;
//! use contperc::config::{EventSpec, ModelConfig, ModelKind};
//! use contperc::events::{CrossingSpec, Direction};
//! use contperc::geometry::Box2;
//! use contperc::models::ConnectionFunction;
//!
//! let cfg = ModelConfig {
//!     model: ModelKind::Ercm,
//!     lambda: 1.5,
//!     connection: Some(ConnectionFunction::Indicator { r0: 1.0 }),
//!     weight_beta: None,
//!     stick: None,
//!     core_half: 4.0,
//!     padding: None,    // derived from the connection function
//!     truncation: None, // likewise
//! };
//! let event = EventSpec::Crossing {
//!     spec: CrossingSpec {
//!         rect: Box2::from_coords(-3.0, -1.5, 3.0, 1.5),
//!         direction: Direction::LeftRight,
//!     },
//! };
//! let est = estimate_event_probability(&cfg, &event, 100, 7).unwrap();
//! assert_eq!(est.trials, 100);
//! assert!(est.ci_low <= est.p_hat && est.p_hat <= est.ci_high);
//! // Same seed, same answer — independent of the worker count.
//! let again = estimate_event_probability(&cfg, &event, 100, 7).unwrap();
//! assert_eq!(est.hits, again.hits);
//! ```

pub mod analysis;
pub mod config;
pub mod connectivity;
pub mod events;
pub mod experiment;
pub mod geometry;
pub mod models;
pub mod sampling;
