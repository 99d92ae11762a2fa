//! Default setups for the closed-loop experiments, shared by the command line
//! and the acceptance suite.

use synergy_core::ApcConfig64;

use crate::error::Result;
use crate::marl::{MarlConfig, MarlEnv};
use crate::policy::BetaPolicy;
use crate::tracks::RoundaboutGenerator;
use crate::traj::{TrajTask, TrajTaskConfig};
use crate::vicsek::NoiseSchedule;

/// Four synthetic roundabout agents; four noise copies per fit keep the
/// credit estimate smooth enough for the controller.
pub fn synthetic_traj_task(seed: u64) -> Result<TrajTask> {
    let cfg = TrajTaskConfig { noise_copies: 4, ..Default::default() };
    TrajTask::from_tracks(&RoundaboutGenerator::default().generate(seed), &cfg, seed)
}

/// Credits on the trajectory task are mean absolute errors in track units,
/// so the step size is large.
pub fn traj_apc() -> ApcConfig64 {
    ApcConfig64 { eta: 400.0, explore_scale: 0.5, fit_len: Some(30), ..Default::default() }
}

pub const TRAJ_INITIAL_BETA: f64 = 1.0;
pub const TRAJ_FIXED_BETAS: [f64; 3] = [0.5, 2.0, 5.0];

pub fn flock_apc() -> ApcConfig64 {
    ApcConfig64 { eta: 100.0, explore_scale: 1.0, beta_min: 0.2, beta_max: 15.0, ..Default::default() }
}

pub const FLOCK_INITIAL_BETA: f64 = 7.6;
pub const FLOCK_FIXED_BETAS: [f64; 4] = [1.0, 4.0, 7.0, 10.0];

/// Intrinsic noise rising from 0.05 to 0.3.
pub fn flock_schedule(episodes: usize) -> NoiseSchedule {
    NoiseSchedule { nu_start: 0.05, nu_end: 0.3, episodes }
}

pub fn marl_apc() -> ApcConfig64 {
    ApcConfig64 { eta: 0.2, ..Default::default() }
}

pub const MARL_INITIAL_BETA: f64 = 1.0;
pub const MARL_FIXED_BETAS: [f64; 6] = [0.2, 0.5, 1.0, 2.0, 3.0, 5.0];

/// Ten roundabout vehicles.
pub fn synthetic_marl_env(seed: u64) -> Result<MarlEnv> {
    MarlEnv::new(MarlConfig::default(), &RoundaboutGenerator { n_tracks: 10, ..Default::default() }.generate(seed))
}

/// Fixed baselines, a random policy over the APC clamp range, then APC.
pub fn strategies(fixed: &[f64], apc: ApcConfig64, initial: f64, with_random: bool) -> Vec<(String, BetaPolicy)> {
    let mut out: Vec<(String, BetaPolicy)> = fixed.iter().map(|&b| (format!("fixed-{b}"), BetaPolicy::Fixed(b))).collect();
    if with_random {
        out.push(("random".into(), BetaPolicy::random_like(&apc)));
    }
    out.push(("apc".into(), BetaPolicy::Apc { cfg: apc, initial }));
    out
}
