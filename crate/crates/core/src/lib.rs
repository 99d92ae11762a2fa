//! Exact cooperative-game machinery for multi-agent credit assignment.
//!
//! Coalitions are bitmasks over at most [`MAX_AGENTS`] agents. Set functions
//! on the coalition lattice decompose into Harsanyi dividends through the
//! Möbius transform; Shapley credit, Gibbs posteriors over coalitions, the
//! pairwise mean-field approximation and the adaptive precision controller
//! build on those tables.
//!
//! Numeric code is generic over the scalar: lattice transforms and Shapley
//! credit accept any [`Ring`] (exact rationals included), while anything that
//! needs `exp`/`ln` requires [`Real`]. The `*64` aliases below fix `f64`.

pub mod apc;
pub mod coalition;
pub mod error;
pub mod game;
pub mod gibbs;
pub mod meanfield;
pub mod mobius;
pub mod scalar;
pub mod seed;
pub mod shapley;
pub mod stationarity;

pub use apc::{fit_quadratic, run_apc_on_oracle, ApcAction, ApcConfig, ApcRecord, ApcState, QuadraticFit};
pub use coalition::{lattice_size, submasks, CharacteristicFunction, Coalition, DividendTable, EnergyTable, MAX_AGENTS};
pub use error::{Error, Result};
pub use game::{coalition_value_from_game, verify_eps_nash, GameFamily, NashCheckReport, NormalFormGame};
pub use gibbs::{collective_free_energy, entropy, gibbs_distribution, FreeEnergyReport, GibbsDistribution};
pub use meanfield::{
    attention_weights, meanfield_fixed_point, meanfield_free_energy, pairwise_energy, FixedPointOptions,
    MeanFieldOutcome, MeanFieldState, PairwiseEnergyModel,
};
pub use mobius::{mobius_dividends, reconstruct_setfunction};
pub use scalar::{Real, Ring};
pub use seed::{derive_seed, rng_from_seed, SimRng};
pub use shapley::{
    permutation_shapley, sample_permutations, shapley_exact, shapley_from_dividends, shapley_monte_carlo,
    PermutationSampling, ShapleyVector,
};
pub use stationarity::{effective_stationarity_check, locate_peak, PrecisionGameFamily};

pub type CharacteristicFunction64 = CharacteristicFunction<f64>;
pub type EnergyTable64 = EnergyTable<f64>;
pub type DividendTable64 = DividendTable<f64>;
pub type ShapleyVector64 = ShapleyVector<f64>;
pub type GibbsDistribution64 = GibbsDistribution<f64>;
pub type FreeEnergyReport64 = FreeEnergyReport<f64>;
pub type NormalFormGame64 = NormalFormGame<f64>;
pub type NashCheckReport64 = NashCheckReport<f64>;
pub type PairwiseEnergyModel64 = PairwiseEnergyModel<f64>;
pub type MeanFieldState64 = MeanFieldState<f64>;
pub type QuadraticFit64 = QuadraticFit<f64>;
pub type ApcConfig64 = ApcConfig<f64>;
pub type ApcState64 = ApcState<f64>;
pub type ApcRecord64 = ApcRecord<f64>;
