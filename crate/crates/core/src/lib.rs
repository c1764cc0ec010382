//! Secure multi-cell massive MIMO downlink: data and artificial-noise precoders,
//! closed-form SINR and secrecy analytics, polynomial-precoder coefficient solvers
//! and a Monte Carlo ergodic secrecy engine.

pub mod an_precoder;
pub mod analytics;
pub mod asymptotics;
pub mod channel;
pub mod complexity;
pub mod config;
pub mod data_precoder;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod scenario;

pub use an_precoder::{AnKind, AnPrecoder};
pub use channel::{ChannelEstimate, ChannelRealization, EstimationStats};
pub use config::{CrossCellCsi, PathLossModel, SystemConfig};
pub use data_precoder::{DataKind, DataPrecoder};
pub use error::{Error, Result};
pub use analytics::{AnalyticSinr, EveBound, Regularization, SecrecyAnalytics, Threshold};
pub use complexity::Dimensions;
pub use montecarlo::{Evaluator, PhiOptimum, SecrecyReport, SinrComponents};
pub use scenario::{Metric, Row, Scenario, Status, SweepVar};
