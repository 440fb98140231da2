//! Capacity analysis of a minor road at an unsignalized priority intersection.
//!
//! Minor-road drivers cross the major road when the gap until the next
//! major-road vehicle exceeds their critical headway. This crate computes the
//! resulting minor-road capacity (and M/G/1 queue metrics) under three driver
//! behavior models, optionally with driver impatience and with Markov-modulated
//! ("platooned") major-road traffic, and ships a discrete-event simulator that
//! independently estimates every analytic quantity.
//!
//! All internal quantities are in seconds and per-second rates; conversion to
//! vehicles per hour happens at the external interface (multiply by 3600).

pub mod distributions;
pub mod impatience;
pub mod mmpp;
pub mod numerics;
pub mod poisson;
pub mod simulator;

pub use distributions::{DistributionError, HeadwayDistribution};
pub use impatience::{AffineMap, ImpatiencePolicy, ImpatientService};
pub use mmpp::{CapacityResult, MmppSpec, NaiveVariant};
pub use poisson::{Behavior, QueueMetrics, ServiceCharacterization};
pub use simulator::{ArrivalModel, Horizon, SimConfig, SimEstimate};

/// Seconds-rate to vehicles/hour.
pub const SECONDS_PER_HOUR: f64 = 3600.0;
