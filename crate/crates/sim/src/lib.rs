//! Experiment testbeds driven by precision-dependent credit: cooperative
//! trajectory prediction, Vicsek flocking, tabular multi-agent control and
//! a credit-assignment bench.

pub mod credit_bench;
pub mod error;
pub mod linalg;
pub mod marl;
pub mod policy;
pub mod predictor;
pub mod presets;
pub mod tracks;
pub mod vicsek;
pub mod traj;

pub use error::{Result, SimError, DATASET_RECORD};
pub use policy::{BetaPolicy, PolicyState};
