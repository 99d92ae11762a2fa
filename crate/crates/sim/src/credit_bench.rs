//! Four credit-assignment rules compared on a restricted coalition game:
//! values are measured only for coalitions of at most three agents and
//! anything larger is imputed with zero higher-order dividends.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use synergy_core::{
    derive_seed, lattice_size, mobius_dividends, reconstruct_setfunction, rng_from_seed, shapley_from_dividends,
    shapley_monte_carlo, CharacteristicFunction64, DividendTable64, PermutationSampling, MAX_AGENTS,
};

use crate::error::{Result, SimError};
use crate::predictor::{fit_predictor_weighted, inject_noise, mae, PredictionSample};
use crate::tracks::RoundaboutGenerator;
use crate::traj::{AgentSplit, TrajTask, TrajTaskConfig};

/// Below this many episodes per coalition the standard errors are unreliable.
pub const MIN_EPISODES: usize = 30;
/// Smallest relative sample weight an agent can be given.
pub const WEIGHT_FLOOR: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CreditMethod {
    Uniform,
    DifferenceRewards,
    ShapleyPermutation,
    Harsanyi,
}

impl CreditMethod {
    pub const ALL: [CreditMethod; 4] =
        [CreditMethod::Uniform, CreditMethod::DifferenceRewards, CreditMethod::ShapleyPermutation, CreditMethod::Harsanyi];

    pub fn label(self) -> &'static str {
        match self {
            CreditMethod::Uniform => "uniform",
            CreditMethod::DifferenceRewards => "difference_rewards",
            CreditMethod::ShapleyPermutation => "shapley_permutation",
            CreditMethod::Harsanyi => "harsanyi",
        }
    }
}

impl fmt::Display for CreditMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CreditMethod {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| SimError::InvalidArgument(format!("unknown credit method {s:?}")))
    }
}

/// Empirical coalition values up to `max_order`; larger coalitions are NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedGame {
    pub n_agents: usize,
    pub max_order: usize,
    pub values: Vec<f64>,
    /// Standard error of each measured value.
    pub std_errs: Vec<f64>,
    pub episodes: usize,
    pub warning: Option<String>,
}

impl RestrictedGame {
    /// Masks of every non-empty coalition with at most `max_order` members, ascending.
    pub fn measured_masks(n_agents: usize, max_order: usize) -> Vec<u32> {
        (1..lattice_size(n_agents) as u32).filter(|m| m.count_ones() as usize <= max_order).collect()
    }

    /// Wraps a fully known game; only orders up to `max_order` are kept.
    pub fn from_table(v: &CharacteristicFunction64, max_order: usize) -> Self {
        let n = v.n_agents();
        let values = (0..lattice_size(n) as u32)
            .map(|m| if m.count_ones() as usize <= max_order { v.value(m) } else { f64::NAN })
            .collect();
        Self { n_agents: n, max_order, values, std_errs: vec![0.0; lattice_size(n)], episodes: 1, warning: None }
    }

    pub fn value(&self, mask: u32) -> Option<f64> {
        self.values.get(mask as usize).copied().filter(|v| !v.is_nan())
    }

    /// Möbius dividends of the measured orders; higher orders are zero.
    pub fn dividends(&self) -> Result<DividendTable64> {
        let filled: Vec<f64> = self.values.iter().map(|v| if v.is_nan() { 0.0 } else { *v }).collect();
        let d = mobius_dividends(&CharacteristicFunction64::new(self.n_agents, filled)?)?;
        Ok(d.truncated(self.max_order))
    }

    /// Half-width of the 95% normal interval for `Δ(mask)`, treating the
    /// value estimates as independent.
    pub fn dividend_ci(&self, mask: u32) -> f64 {
        let var: f64 = synergy_core::submasks(mask).filter(|&s| s != 0).map(|s| self.std_errs[s as usize].powi(2)).sum();
        1.96 * var.sqrt()
    }

    /// The full game implied by zero dividends above `max_order`.
    pub fn imputed(&self) -> Result<CharacteristicFunction64> {
        Ok(reconstruct_setfunction(&self.dividends()?)?)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut g = self.clone();
        g.values.iter_mut().for_each(|v| *v *= alpha);
        g.std_errs.iter_mut().for_each(|v| *v *= alpha.abs());
        g
    }
}

/// Averages `episodes` draws of every coalition value up to `max_order`.
///
/// `sample(episode_seed, masks)` returns one draw per mask; episode `e` gets
/// `derive_seed(seed, "coalition-episode", e)`. Episodes run in parallel.
pub fn estimate_coalition_values<F>(
    n_agents: usize,
    max_order: usize,
    episodes: usize,
    seed: u64,
    sample: F,
) -> Result<RestrictedGame>
where
    F: Fn(u64, &[u32]) -> Result<Vec<f64>> + Sync,
{
    if n_agents == 0 || n_agents > MAX_AGENTS {
        return Err(SimError::InvalidArgument(format!("need 1..={MAX_AGENTS} agents, got {n_agents}")));
    }
    if episodes == 0 {
        return Err(SimError::InvalidArgument("episodes must be at least 1".into()));
    }
    let masks = RestrictedGame::measured_masks(n_agents, max_order);
    let draws = (0..episodes as u64)
        .into_par_iter()
        .map(|e| {
            let d = sample(derive_seed(seed, "coalition-episode", e), &masks)?;
            if d.len() != masks.len() {
                return Err(SimError::InvalidArgument("sampler returned the wrong number of values".into()));
            }
            Ok(d)
        })
        .collect::<Result<Vec<_>>>()?;
    let size = lattice_size(n_agents);
    let mut values = vec![f64::NAN; size];
    let mut std_errs = vec![f64::NAN; size];
    values[0] = 0.0;
    std_errs[0] = 0.0;
    let k = episodes as f64;
    for (j, &m) in masks.iter().enumerate() {
        let mean = draws.iter().map(|d| d[j]).sum::<f64>() / k;
        let se = if episodes > 1 {
            let var = draws.iter().map(|d| (d[j] - mean).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        } else {
            f64::INFINITY
        };
        values[m as usize] = mean;
        std_errs[m as usize] = se;
    }
    let warning = (episodes < MIN_EPISODES).then(|| {
        format!("only {episodes} episodes per coalition (fewer than {MIN_EPISODES}); intervals are wide")
    });
    Ok(RestrictedGame { n_agents, max_order, values, std_errs, episodes, warning })
}

/// Per-agent credits under `method`.
///
/// Difference rewards average `v(P) − v(P∖{i})` over every measured coalition
/// `P ∋ i` of the largest measured size, standing in for the unmeasured grand
/// coalition. Permutation Shapley samples `n_perms` orderings of the imputed game.
pub fn compute_credits(
    method: CreditMethod,
    game: &RestrictedGame,
    team_value: f64,
    n_perms: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = game.n_agents;
    match method {
        CreditMethod::Uniform => Ok(vec![team_value / n as f64; n]),
        CreditMethod::DifferenceRewards => {
            let k = game.max_order.min(n);
            let top: Vec<u32> = RestrictedGame::measured_masks(n, k).into_iter().filter(|m| m.count_ones() as usize == k).collect();
            Ok((0..n)
                .map(|i| {
                    let bit = 1u32 << i;
                    let diffs: Vec<f64> = top
                        .iter()
                        .filter(|&&m| m & bit != 0)
                        .filter_map(|&m| Some(game.value(m)? - game.value(m & !bit)?))
                        .collect();
                    diffs.iter().sum::<f64>() / diffs.len().max(1) as f64
                })
                .collect())
        }
        CreditMethod::ShapleyPermutation => {
            Ok(shapley_monte_carlo(&game.imputed()?, n_perms, seed, PermutationSampling::WithReplacement)?.credits)
        }
        CreditMethod::Harsanyi => Ok(shapley_from_dividends(&game.dividends()?).credits),
    }
}

/// Relative sample weight per agent: credit over mean absolute credit, floored
/// at [`WEIGHT_FLOOR`], renormalised to mean one. Equal credits give all ones.
pub fn credit_weights(credits: &[f64]) -> Vec<f64> {
    let n = credits.len();
    let scale = credits.iter().map(|c| c.abs()).sum::<f64>() / n.max(1) as f64;
    if credits.windows(2).all(|w| w[0] == w[1]) || !(scale > 0.0) || !scale.is_finite() {
        return vec![1.0; n];
    }
    let raw: Vec<f64> = credits.iter().map(|c| (c / scale).max(WEIGHT_FLOOR)).collect();
    let mean = raw.iter().sum::<f64>() / n as f64;
    raw.into_iter().map(|w| w / mean).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynergyEntry {
    pub mask: u32,
    pub order: usize,
    pub dividend: f64,
}

/// Pair and triple dividends, largest magnitude first.
#[derive(Clone, Debug, PartialEq)]
pub struct SynergyReport {
    pub entries: Vec<SynergyEntry>,
}

impl SynergyReport {
    pub fn pairs(&self) -> impl Iterator<Item = &SynergyEntry> {
        self.entries.iter().filter(|e| e.order == 2)
    }

    pub fn triples(&self) -> impl Iterator<Item = &SynergyEntry> {
        self.entries.iter().filter(|e| e.order == 3)
    }

    pub fn dividend(&self, mask: u32) -> Option<f64> {
        self.entries.iter().find(|e| e.mask == mask).map(|e| e.dividend)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["coalition_mask", "order", "dividend"])?;
        for e in &self.entries {
            w.write_record([e.mask.to_string(), e.order.to_string(), e.dividend.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn synergy_report(game: &RestrictedGame) -> Result<SynergyReport> {
    let d = game.dividends()?;
    let mut entries: Vec<SynergyEntry> = (0..lattice_size(game.n_agents) as u32)
        .filter(|m| (2..=game.max_order.min(3)).contains(&(m.count_ones() as usize)))
        .map(|m| SynergyEntry { mask: m, order: m.count_ones() as usize, dividend: d.dividend(m) })
        .collect();
    entries.sort_by(|a, b| b.dividend.abs().total_cmp(&a.dividend.abs()).then(a.mask.cmp(&b.mask)));
    Ok(SynergyReport { entries })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CreditBenchConfig {
    pub beta: f64,
    pub epochs: usize,
    pub episodes_per_coalition: usize,
    pub n_perms: usize,
    pub max_order: usize,
}

impl Default for CreditBenchConfig {
    fn default() -> Self {
        Self { beta: 4.0, epochs: 20, episodes_per_coalition: 4, n_perms: 200, max_order: 3 }
    }
}

/// MAE of the zero predictor, which is what ridge regression fits on no data.
fn zero_mae(samples: &[PredictionSample]) -> f64 {
    let (sum, count) = samples.iter().fold((0.0, 0usize), |(s, c), x| (s + x.future.iter().map(|f| f.abs()).sum::<f64>(), c + x.future.len()));
    sum / count.max(1) as f64
}

/// One fixed noise draw of every training window at precision `beta`.
fn noisy_train(task: &TrajTask, beta: f64, seed: u64) -> Result<Vec<PredictionSample>> {
    let mut out = Vec::new();
    for (i, a) in task.agents().iter().enumerate() {
        out.extend(inject_noise(&a.train, beta, derive_seed(seed, "train-noise", i as u64))?);
    }
    Ok(out)
}

fn team_val(task: &TrajTask) -> Vec<PredictionSample> {
    (0..task.n_agents()).flat_map(|i| task.measured_val(i).iter().cloned()).collect()
}

/// Restricted game on a trajectory task: `v(C)` is how far `C`'s ridge fit at
/// precision `beta` lowers the team validation MAE below the untrained predictor's.
pub fn estimate_task_values(task: &TrajTask, beta: f64, max_order: usize, episodes: usize, seed: u64) -> Result<RestrictedGame> {
    let null = zero_mae(&team_val(task));
    estimate_coalition_values(task.n_agents(), max_order, episodes, seed, |s, masks| {
        let o = task.oracle(beta, s)?;
        masks.iter().map(|&m| Ok(null - o.team_val_mae(m)?)).collect()
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CreditEpoch {
    pub method: CreditMethod,
    pub epoch: usize,
    pub val_mae: f64,
    pub weights: Vec<f64>,
}

/// Trains one pooled ridge predictor per epoch with credit-weighted samples.
///
/// Every epoch measures a fresh restricted game, credits are averaged over
/// the epochs so far, and the fit uses one fixed noise draw of the training
/// windows at `cfg.beta`, weighted by
/// the owning agent's [`credit_weights`]. Epoch `e` measures with
/// `derive_seed(seed, "credit-epoch", e)` whatever the method, so methods are paired.
pub fn credit_weighted_training(
    task: &TrajTask,
    method: CreditMethod,
    cfg: &CreditBenchConfig,
    seed: u64,
) -> Result<Vec<CreditEpoch>> {
    let n = task.n_agents();
    let train = noisy_train(task, cfg.beta, seed)?;
    let val = team_val(task);
    let mut sum = vec![0.0; n];
    let mut out = Vec::with_capacity(cfg.epochs);
    for e in 0..cfg.epochs {
        let weights = if method == CreditMethod::Uniform {
            vec![1.0; n]
        } else {
            let es = derive_seed(seed, "credit-epoch", e as u64);
            let game = estimate_task_values(task, cfg.beta, cfg.max_order, cfg.episodes_per_coalition, es)?;
            let team = game.imputed()?.grand_value();
            let xi = compute_credits(method, &game, team, cfg.n_perms, derive_seed(es, "perm", 0))?;
            sum.iter_mut().zip(&xi).for_each(|(s, x)| *s += x);
            let mean: Vec<f64> = sum.iter().map(|s| s / (e + 1) as f64).collect();
            credit_weights(&mean)
        };
        let w: Vec<f64> = train.iter().map(|s| weights[s.agent]).collect();
        let p = fit_predictor_weighted(&train, &w, task.lambda())?;
        out.push(CreditEpoch { method, epoch: e, val_mae: mae(&p, &val)?, weights });
    }
    Ok(out)
}

pub fn write_credit_csv<W: Write>(records: &[CreditEpoch], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "epoch", "val_mae"])?;
    for r in records {
        w.write_record([r.method.label().to_string(), r.epoch.to_string(), r.val_mae.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Roundabout agents plus one last agent whose inputs and targets are
/// independent zero-mean noise at the data's own scale, so training on it only
/// shrinks the fit.
pub fn noise_agent_task(n_real: usize, seed: u64) -> Result<TrajTask> {
    let cfg = TrajTaskConfig::default();
    let table = RoundaboutGenerator { n_tracks: n_real, ..Default::default() }.generate(seed);
    let base = TrajTask::from_tracks(&table, &cfg, seed)?;
    let mut agents = base.agents().to_vec();
    let donor = agents.first().ok_or_else(|| SimError::InsufficientData("no real agents".into()))?.clone();
    let all: Vec<f64> = donor.train.iter().flat_map(|s| s.future.iter().copied()).collect();
    let m = all.iter().sum::<f64>() / all.len() as f64;
    let sd = (all.iter().map(|x| (x - m).powi(2)).sum::<f64>() / all.len() as f64).sqrt().max(1e-6);
    let noise = Normal::new(0.0, sd).expect("finite sd");
    let mut rng = rng_from_seed(derive_seed(seed, "noise-agent", 0));
    let idx = agents.len();
    let mut scramble = |xs: &[PredictionSample]| -> Vec<PredictionSample> {
        xs.iter()
            .map(|s| PredictionSample {
                agent: idx,
                past: s.past.iter().map(|_| noise.sample(&mut rng)).collect(),
                future: s.future.iter().map(|_| noise.sample(&mut rng)).collect(),
            })
            .collect()
    };
    let split = AgentSplit { train: scramble(&donor.train), val: scramble(&donor.val), test: scramble(&donor.test) };
    agents.push(split);
    TrajTask::new(agents, cfg.lambda, cfg.measurement_var, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use synergy_core::Coalition;

    fn additive(a: &[f64]) -> CharacteristicFunction64 {
        CharacteristicFunction64::from_fn(a.len(), |c| c.members().map(|i| a[i]).sum()).unwrap()
    }

    #[test]
    fn uniform_splits_team_value() {
        let g = RestrictedGame::from_table(&additive(&[1.0; 5]), 3);
        assert_eq!(compute_credits(CreditMethod::Uniform, &g, 10.0, 1, 0).unwrap(), vec![2.0; 5]);
    }

    #[test]
    fn methods_agree_on_additive_game() {
        let a = [0.5, -1.0, 2.0, 3.0, 0.25];
        let g = RestrictedGame::from_table(&additive(&a), 3);
        for m in [CreditMethod::DifferenceRewards, CreditMethod::ShapleyPermutation, CreditMethod::Harsanyi] {
            let xi = compute_credits(m, &g, 0.0, 50, 3).unwrap();
            for (x, y) in xi.iter().zip(&a) {
                assert!((x - y).abs() < 1e-12, "{m}: {xi:?}");
            }
        }
        assert!(synergy_report(&g).unwrap().entries.iter().all(|e| e.dividend.abs() < 1e-12));
    }

    #[test]
    fn pair_synergy_splits_between_partners() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let v = CharacteristicFunction64::from_fn(4, |c| {
            c.members().map(|i| a[i]).sum::<f64>() + if c.contains(0) && c.contains(1) { 0.6 } else { 0.0 }
        })
        .unwrap();
        let g = RestrictedGame::from_table(&v, 3);
        let xi = compute_credits(CreditMethod::Harsanyi, &g, 0.0, 1, 0).unwrap();
        assert!((xi[0] - 1.3).abs() < 1e-12 && (xi[1] - 2.3).abs() < 1e-12 && (xi[2] - 3.0).abs() < 1e-12);
        let r = synergy_report(&g).unwrap();
        assert_eq!(r.entries[0].mask, 0b11);
        assert!((r.entries[0].dividend - 0.6).abs() < 1e-12);
    }

    #[test]
    fn duplicate_pair_is_redundant() {
        // agents 0 and 1 carry the same information
        let v = CharacteristicFunction64::from_fn(3, |c| {
            let m = c.mask();
            (if m & 0b11 != 0 { 1.0 } else { 0.0 }) + if c.contains(2) { 0.5 } else { 0.0 }
        })
        .unwrap();
        let d = synergy_report(&RestrictedGame::from_table(&v, 3)).unwrap().dividend(0b11).unwrap();
        assert!(d < 0.0, "{d}");
    }

    #[test]
    fn deterministic_sampler_has_exact_means() {
        let v = additive(&[1.0, 2.0, 3.0]);
        let g = estimate_coalition_values(3, 3, 5, 1, |_, ms| Ok(ms.iter().map(|&m| v.value(m)).collect())).unwrap();
        assert_eq!(g.values, v.values());
        assert!(g.warning.is_some());
        assert!(g.std_errs.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn standard_error_shrinks_with_episodes() {
        let noisy = |s: u64, ms: &[u32]| -> Result<Vec<f64>> {
            let mut rng = rng_from_seed(s);
            let z = Normal::new(0.0, 1.0).unwrap();
            Ok(ms.iter().map(|_| z.sample(&mut rng)).collect())
        };
        let few = estimate_coalition_values(3, 2, 20, 4, noisy).unwrap();
        let many = estimate_coalition_values(3, 2, 2000, 4, noisy).unwrap();
        let ratio = few.std_errs[1] / many.std_errs[1];
        assert!((ratio - 10.0).abs() < 2.5, "{ratio}");
        assert!(many.warning.is_none());
        assert!(many.value(0b111).is_none());
    }

    #[test]
    fn difference_rewards_are_exact_for_small_teams() {
        let v = CharacteristicFunction64::from_fn(3, |c| (c.len() * c.len()) as f64).unwrap();
        let g = RestrictedGame::from_table(&v, 3);
        assert_eq!(compute_credits(CreditMethod::DifferenceRewards, &g, 0.0, 1, 0).unwrap(), vec![5.0; 3]);
    }

    #[test]
    fn equal_credits_give_unit_weights() {
        assert_eq!(credit_weights(&[0.3; 4]), vec![1.0; 4]);
        assert_eq!(credit_weights(&[-2.0; 3]), vec![1.0; 3]);
        let w = credit_weights(&[1.0, 1.0, -5.0]);
        assert!((w.iter().sum::<f64>() - 3.0).abs() < 1e-12);
        assert!(w[2] < w[0]);
    }

    #[test]
    fn method_labels_round_trip() {
        for m in CreditMethod::ALL {
            assert_eq!(m.label().parse::<CreditMethod>().unwrap(), m);
        }
        assert!("nope".parse::<CreditMethod>().is_err());
    }

    #[test]
    fn uniform_training_curve_is_flat() {
        let t = noise_agent_task(3, 2).unwrap();
        let cfg = CreditBenchConfig { epochs: 4, ..Default::default() };
        let c = credit_weighted_training(&t, CreditMethod::Uniform, &cfg, 1).unwrap();
        assert!(c.iter().all(|r| r.val_mae == c[0].val_mae));
        let train = noisy_train(&t, cfg.beta, 1).unwrap();
        let plain = crate::predictor::fit_predictor(&train, t.lambda()).unwrap();
        assert_eq!(mae(&plain, &team_val(&t)).unwrap(), c[0].val_mae);
    }

    #[test]
    fn noise_agent_gets_downweighted() {
        let t = noise_agent_task(3, 3).unwrap();
        let cfg = CreditBenchConfig { epochs: 2, ..Default::default() };
        let c = credit_weighted_training(&t, CreditMethod::Harsanyi, &cfg, 1).unwrap();
        let w = &c.last().unwrap().weights;
        assert!(w[3] < 1.0 && w[..3].iter().all(|&x| w[3] <= x), "{w:?}");
    }

    fn game_strategy() -> impl Strategy<Value = (usize, Vec<f64>)> {
        (2usize..=6).prop_flat_map(|n| (Just(n), prop::collection::vec(-5.0..5.0f64, lattice_size(n))))
    }

    proptest! {
        #[test]
        fn harsanyi_is_efficient_on_truncated_game((n, raw) in game_strategy()) {
            let v = CharacteristicFunction64::from_fn(n, |c| if c.is_empty() { 0.0 } else { raw[c.mask() as usize] }).unwrap();
            let g = RestrictedGame::from_table(&v, 3);
            let xi = compute_credits(CreditMethod::Harsanyi, &g, 0.0, 1, 0).unwrap();
            let total: f64 = g.dividends().unwrap().dividends().iter().sum();
            prop_assert!((xi.iter().sum::<f64>() - total).abs() < 1e-9);
            let grand = Coalition::grand(n).unwrap().mask();
            prop_assert!((g.imputed().unwrap().value(grand) - total).abs() < 1e-9);
        }

        #[test]
        fn credits_scale_with_values((n, raw) in game_strategy(), alpha in 0.1..10.0f64) {
            let v = CharacteristicFunction64::from_fn(n, |c| if c.is_empty() { 0.0 } else { raw[c.mask() as usize] }).unwrap();
            let g = RestrictedGame::from_table(&v, 3);
            let h = g.scaled(alpha);
            for m in [CreditMethod::DifferenceRewards, CreditMethod::ShapleyPermutation, CreditMethod::Harsanyi] {
                let a = compute_credits(m, &g, 0.0, 20, 9).unwrap();
                let b = compute_credits(m, &h, 0.0, 20, 9).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    prop_assert!((alpha * x - y).abs() < 1e-9 * (1.0 + y.abs()));
                }
                let (wa, wb) = (credit_weights(&a), credit_weights(&b));
                for (x, y) in wa.iter().zip(&wb) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }
}
