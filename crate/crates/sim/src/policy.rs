//! Precision schedules shared by the closed-loop experiments.

use rand::Rng;
use synergy_core::{rng_from_seed, ApcConfig64, ApcState64, SimRng};

use crate::error::Result;

/// How a run chooses its precision `β` from one epoch (or episode) to the next.
#[derive(Clone, Debug, PartialEq)]
pub enum BetaPolicy {
    Fixed(f64),
    /// Uniform on `[lo, hi]`, redrawn every `period` epochs.
    Random { lo: f64, hi: f64, period: usize },
    Apc { cfg: ApcConfig64, initial: f64 },
}

impl BetaPolicy {
    /// Short label used in output tables.
    pub fn label(&self) -> String {
        match self {
            BetaPolicy::Fixed(b) => format!("fixed-{b}"),
            BetaPolicy::Random { .. } => "random".into(),
            BetaPolicy::Apc { .. } => "apc".into(),
        }
    }

    /// Random schedule over the clamp range of `cfg`, redrawn on its update ticks.
    pub fn random_like(cfg: &ApcConfig64) -> Self {
        BetaPolicy::Random { lo: cfg.beta_min, hi: cfg.beta_max, period: cfg.update_period }
    }

    pub fn start(&self, seed: u64) -> Result<PolicyState> {
        Ok(match self {
            BetaPolicy::Fixed(b) => PolicyState::Fixed(*b),
            BetaPolicy::Random { lo, hi, period } => {
                let mut rng = rng_from_seed(seed);
                let beta = rng.random_range(*lo..=*hi);
                PolicyState::Random { lo: *lo, hi: *hi, period: (*period).max(1), rng, beta, epoch: 0 }
            }
            BetaPolicy::Apc { cfg, initial } => {
                PolicyState::Apc { state: ApcState64::new(*initial, seed, cfg)?, cfg: *cfg }
            }
        })
    }
}

#[derive(Clone, Debug)]
pub enum PolicyState {
    Fixed(f64),
    Random { lo: f64, hi: f64, period: usize, rng: SimRng, beta: f64, epoch: usize },
    Apc { state: ApcState64, cfg: ApcConfig64 },
}

impl PolicyState {
    pub fn beta(&self) -> f64 {
        match self {
            PolicyState::Fixed(b) => *b,
            PolicyState::Random { beta, .. } => *beta,
            PolicyState::Apc { state, .. } => state.beta(),
        }
    }

    /// Reports the credit earned at the current `β`.
    pub fn observe(&mut self, credit: f64) -> Result<()> {
        match self {
            PolicyState::Fixed(_) => {}
            PolicyState::Random { lo, hi, period, rng, beta, epoch } => {
                *epoch += 1;
                if *epoch % *period == 0 {
                    *beta = rng.random_range(*lo..=*hi);
                }
            }
            PolicyState::Apc { state, cfg } => {
                state.step(credit, cfg)?;
            }
        }
        Ok(())
    }
}
