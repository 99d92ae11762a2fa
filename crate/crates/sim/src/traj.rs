//! Cooperative trajectory prediction: each agent contributes its own track
//! windows, a coalition's value is the negative held-out MAE of a ridge
//! predictor fitted on the members' noise-injected training windows.

use std::collections::HashMap;
use std::io::Write;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use synergy_core::{
    derive_seed, fit_quadratic, lattice_size, permutation_shapley, rng_from_seed, sample_permutations,
    CharacteristicFunction64, PermutationSampling, QuadraticFit64, ShapleyVector64, MAX_AGENTS,
};

use crate::error::{Result, SimError};
use crate::linalg::NormalEquations;
use crate::policy::BetaPolicy;
use crate::predictor::{
    inject_noise, make_samples, noise_sd, normal_equations, split_temporal, LinearPredictor, PredictionSample,
    DEFAULT_FUTURE, DEFAULT_PAST, DEFAULT_RIDGE,
};
use crate::tracks::TrackTable;

/// The precision grid swept in the inverted-U experiment.
pub fn default_betas() -> Vec<f64> {
    (1..=10).map(|k| 0.5 * k as f64).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajTaskConfig {
    pub past: usize,
    pub future: usize,
    pub stride: usize,
    pub train_frac: f64,
    pub val_frac: f64,
    pub lambda: f64,
    /// std of Gaussian noise added to every target window
    pub target_noise_sd: f64,
    /// variance of the sensor noise on validation/test inputs
    pub measurement_var: f64,
    /// shift and scale coordinates to zero mean, unit pooled std
    pub standardize: bool,
    pub max_agents: Option<usize>,
    /// independent noise draws per training window in every fit
    pub noise_copies: usize,
}

impl Default for TrajTaskConfig {
    /// Settings for the synthetic roundabout task.
    fn default() -> Self {
        Self {
            past: DEFAULT_PAST,
            future: DEFAULT_FUTURE,
            stride: 1,
            train_frac: 0.7,
            val_frac: 0.15,
            lambda: DEFAULT_RIDGE,
            target_noise_sd: 0.05,
            measurement_var: 0.25,
            standardize: false,
            max_agents: None,
            noise_copies: 1,
        }
    }
}

impl TrajTaskConfig {
    /// Recorded tracks: already noisy, in degrees, so standardized and left unperturbed.
    pub fn recorded() -> Self {
        Self { target_noise_sd: 0.0, measurement_var: 0.0, standardize: true, max_agents: Some(10), ..Self::default() }
    }
}

/// One agent's temporally ordered windows.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentSplit {
    pub train: Vec<PredictionSample>,
    pub val: Vec<PredictionSample>,
    pub test: Vec<PredictionSample>,
}

#[derive(Clone, Debug)]
pub struct TrajTask {
    agents: Vec<AgentSplit>,
    measured_val: Vec<Vec<PredictionSample>>,
    measured_test: Vec<Vec<PredictionSample>>,
    lambda: f64,
    measurement_var: f64,
    noise_copies: usize,
    seed: u64,
}

fn add_gaussian(samples: &[PredictionSample], sd: f64, seed: u64, on_past: bool) -> Vec<PredictionSample> {
    if sd == 0.0 {
        return samples.to_vec();
    }
    let mut rng = rng_from_seed(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    samples
        .iter()
        .map(|s| {
            let mut s = s.clone();
            let v = if on_past { &mut s.past } else { &mut s.future };
            v.iter_mut().for_each(|x| *x += sd * unit.sample(&mut rng));
            s
        })
        .collect()
}

fn standardized(t: &TrackTable) -> TrackTable {
    let pts = t.tracks.iter().flat_map(|tr| tr.points.iter());
    let n = t.tracks.iter().map(|tr| tr.points.len()).sum::<usize>().max(1) as f64;
    let (sx, sy) = pts.clone().fold((0.0, 0.0), |(a, b), p| (a + p.lon, b + p.lat));
    let (mx, my) = (sx / n, sy / n);
    let ss = pts.fold(0.0, |acc, p| acc + (p.lon - mx).powi(2) + (p.lat - my).powi(2));
    let scale = (ss / (2.0 * n)).sqrt();
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut out = t.clone();
    for tr in &mut out.tracks {
        for p in &mut tr.points {
            p.lon = (p.lon - mx) / scale;
            p.lat = (p.lat - my) / scale;
        }
    }
    out
}

impl TrajTask {
    /// Builds the task from per-agent splits; sensor noise of variance
    /// `measurement_var` is drawn once for the validation and test inputs.
    pub fn new(agents: Vec<AgentSplit>, lambda: f64, measurement_var: f64, seed: u64) -> Result<Self> {
        if agents.is_empty() {
            return Err(SimError::InsufficientData("no agents".into()));
        }
        if agents.len() > MAX_AGENTS {
            return Err(SimError::Core(synergy_core::Error::TooManyAgents { n_agents: agents.len(), limit: MAX_AGENTS }));
        }
        for (i, a) in agents.iter().enumerate() {
            if a.train.is_empty() || a.val.is_empty() {
                return Err(SimError::InsufficientData(format!("agent {i} has no training or validation windows")));
            }
        }
        if !(measurement_var >= 0.0) {
            return Err(SimError::InvalidArgument("measurement variance must be non-negative".into()));
        }
        let mut task =
            Self { agents, measured_val: vec![], measured_test: vec![], lambda, measurement_var, noise_copies: 1, seed };
        task.measure();
        Ok(task)
    }

    fn measure(&mut self) {
        let sd = self.measurement_var.sqrt();
        self.measured_val = (0..self.agents.len())
            .map(|i| add_gaussian(&self.agents[i].val, sd, derive_seed(self.seed, "measure-val", i as u64), true))
            .collect();
        self.measured_test = (0..self.agents.len())
            .map(|i| add_gaussian(&self.agents[i].test, sd, derive_seed(self.seed, "measure-test", i as u64), true))
            .collect();
    }

    /// Windows every track, perturbs targets, splits 70/15/15 in time order.
    pub fn from_tracks(table: &TrackTable, cfg: &TrajTaskConfig, seed: u64) -> Result<Self> {
        let table = match cfg.max_agents {
            Some(n) => table.clone().truncated(n),
            None => table.clone(),
        };
        let table = if cfg.standardize { standardized(&table) } else { table };
        let samples = make_samples(&table, cfg.past, cfg.future, cfg.stride);
        let mut per_agent: Vec<Vec<PredictionSample>> = vec![Vec::new(); table.len()];
        for s in samples {
            per_agent[s.agent].push(s);
        }
        let agents = per_agent
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                let s = add_gaussian(&s, cfg.target_noise_sd, derive_seed(seed, "target-noise", i as u64), false);
                let (train, val, test) = split_temporal(&s, cfg.train_frac, cfg.val_frac);
                AgentSplit { train, val, test }
            })
            .collect();
        Ok(Self::new(agents, cfg.lambda, cfg.measurement_var, seed)?.with_noise_copies(cfg.noise_copies))
    }

    /// Uses `copies` independent noise draws of every training window per fit.
    pub fn with_noise_copies(mut self, copies: usize) -> Self {
        self.noise_copies = copies.max(1);
        self
    }

    pub fn noise_copies(&self) -> usize {
        self.noise_copies
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[AgentSplit] {
        &self.agents
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn measurement_var(&self) -> f64 {
        self.measurement_var
    }

    /// Same data and sensor-noise draws, rescaled to a new variance.
    pub fn with_measurement_var(&self, var: f64) -> Result<Self> {
        Ok(Self::new(self.agents.clone(), self.lambda, var, self.seed)?.with_noise_copies(self.noise_copies))
    }

    pub fn measured_val(&self, agent: usize) -> &[PredictionSample] {
        &self.measured_val[agent]
    }

    pub fn measured_test(&self, agent: usize) -> &[PredictionSample] {
        &self.measured_test[agent]
    }

    /// Coalition oracle at precision `beta`; training noise for agent `i`
    /// comes from `derive_seed(noise_seed, "inject", i)`, one stream per copy.
    pub fn oracle(&self, beta: f64, noise_seed: u64) -> Result<CoalitionOracle<'_>> {
        noise_sd(beta)?;
        let per_agent = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let agent_seed = derive_seed(noise_seed, "inject", i as u64);
                let mut ne = normal_equations(&inject_noise(&a.train, beta, agent_seed)?, |_| 1.0)?;
                for copy in 1..self.noise_copies {
                    let noisy = inject_noise(&a.train, beta, derive_seed(agent_seed, "copy", copy as u64))?;
                    ne.merge(&normal_equations(&noisy, |_| 1.0)?);
                }
                Ok(ne)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CoalitionOracle { task: self, per_agent, cache: HashMap::new() })
    }
}

/// Memoised coalition values for one `(β, noise draw)`.
pub struct CoalitionOracle<'a> {
    task: &'a TrajTask,
    per_agent: Vec<NormalEquations>,
    cache: HashMap<u32, f64>,
}

impl CoalitionOracle<'_> {
    fn check(&self, mask: u32) -> Result<()> {
        let n = self.task.n_agents();
        if (mask as u64) >= lattice_size(n) as u64 {
            return Err(SimError::Core(synergy_core::Error::MaskOutOfRange { mask, n_agents: n }));
        }
        Ok(())
    }

    fn members(&self, mask: u32) -> impl Iterator<Item = usize> + '_ {
        (0..self.task.n_agents()).filter(move |i| mask >> i & 1 == 1)
    }

    pub fn predictor(&self, mask: u32) -> Result<LinearPredictor> {
        self.check(mask)?;
        let mut it = self.members(mask);
        let first = it.next().ok_or_else(|| SimError::InsufficientData("empty coalition".into()))?;
        let mut ne = self.per_agent[first].clone();
        for i in it {
            ne.merge(&self.per_agent[i]);
        }
        LinearPredictor::from_normal_equations(&ne, self.task.lambda)
    }

    fn pooled_mae(&self, mask: u32, p: &LinearPredictor, test: bool) -> f64 {
        let (mut sum, mut count) = (0.0, 0usize);
        for i in self.members(mask) {
            let s = if test { self.task.measured_test(i) } else { self.task.measured_val(i) };
            let (a, b) = p.abs_error(s);
            sum += a;
            count += b;
        }
        if count == 0 {
            f64::NAN
        } else {
            sum / count as f64
        }
    }

    /// `v(C) = −MAE` on the members' validation windows; `v(∅) = 0`.
    pub fn value(&mut self, mask: u32) -> Result<f64> {
        if mask == 0 {
            return Ok(0.0);
        }
        if let Some(&v) = self.cache.get(&mask) {
            return Ok(v);
        }
        let p = self.predictor(mask)?;
        let v = -self.pooled_mae(mask, &p, false);
        self.cache.insert(mask, v);
        Ok(v)
    }

    /// MAE of the coalition's predictor on every agent's validation windows.
    pub fn team_val_mae(&self, mask: u32) -> Result<f64> {
        let p = self.predictor(mask)?;
        Ok(self.pooled_mae(lattice_size(self.task.n_agents()) as u32 - 1, &p, false))
    }

    /// MAE of the coalition's predictor on the members' test windows.
    pub fn test_mae(&self, mask: u32) -> Result<f64> {
        let p = self.predictor(mask)?;
        let m = self.pooled_mae(mask, &p, true);
        if m.is_nan() {
            return Err(SimError::InsufficientData("coalition has no test windows".into()));
        }
        Ok(m)
    }

    /// Permutation Shapley over distinct orderings (all of them when `n_perms ≥ N!`).
    pub fn shapley(&mut self, n_perms: usize, perm_seed: u64) -> Result<ShapleyVector64> {
        if n_perms == 0 {
            return Err(SimError::InvalidArgument("n_perms must be at least 1".into()));
        }
        let n = self.task.n_agents();
        let mut rng = rng_from_seed(perm_seed);
        let orders = sample_permutations(n, n_perms, PermutationSampling::WithoutReplacement, &mut rng);
        let credits = permutation_shapley(n, &orders, |m| self.value(m))?;
        Ok(ShapleyVector64 { credits })
    }

    /// Every coalition's value.
    pub fn table(&mut self) -> Result<CharacteristicFunction64> {
        let n = self.task.n_agents();
        let values = (0..lattice_size(n) as u32).map(|m| self.value(m)).collect::<Result<Vec<_>>>()?;
        Ok(CharacteristicFunction64::new(n, values)?)
    }
}

/// Value of one coalition at precision `beta`.
pub fn coalition_value(task: &TrajTask, mask: u32, beta: f64, seed: u64) -> Result<f64> {
    task.oracle(beta, seed)?.value(mask)
}

/// Shapley credit at precision `beta` from `n_perms` distinct orderings.
pub fn shapley_credit(task: &TrajTask, beta: f64, n_perms: usize, seed: u64) -> Result<ShapleyVector64> {
    task.oracle(beta, seed)?.shapley(n_perms, derive_seed(seed, "perms", 0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRecord {
    pub beta: f64,
    /// mean over runs of the agents' mean credit
    pub credit_mean: f64,
    pub credit_std: f64,
    /// full-coalition test MAE, averaged over runs
    pub mae_mean: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub fit: QuadraticFit64,
    pub peak_beta: Option<f64>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["beta", "credit_mean", "credit_std", "mae_mean"])?;
        for r in &self.records {
            w.write_record([r.beta, r.credit_mean, r.credit_std, r.mae_mean].map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean credit and test MAE of every `(β, run)` cell.
///
/// Run `r` uses the same seed at every `β`, so the injected noise differs
/// across the grid only in scale.
pub fn credit_grid(task: &TrajTask, betas: &[f64], runs: usize, n_perms: usize, seed: u64) -> Result<Vec<Vec<(f64, f64)>>> {
    let cells: Vec<(usize, usize)> = (0..betas.len()).flat_map(|b| (0..runs).map(move |r| (b, r))).collect();
    let out = cells
        .par_iter()
        .map(|&(b, r)| {
            let run_seed = derive_seed(seed, "sweep-run", r as u64);
            let mut o = task.oracle(betas[b], run_seed)?;
            let xi = o.shapley(n_perms, derive_seed(run_seed, "perms", 0))?;
            let full = (lattice_size(task.n_agents()) - 1) as u32;
            Ok((xi.total() / task.n_agents() as f64, o.test_mae(full)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(out.chunks(runs).map(|c| c.to_vec()).collect())
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = if n > 1.0 { xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Credit against precision with a quadratic fit through the per-`β` means.
pub fn run_inverted_u_sweep(task: &TrajTask, betas: &[f64], runs: usize, n_perms: usize, seed: u64) -> Result<SweepResult> {
    if runs == 0 || betas.is_empty() {
        return Err(SimError::InvalidArgument("need at least one beta and one run".into()));
    }
    let grid = credit_grid(task, betas, runs, n_perms, seed)?;
    let records: Vec<SweepRecord> = betas
        .iter()
        .zip(&grid)
        .map(|(&beta, cells)| {
            let (credit_mean, credit_std) = mean_std(cells.iter().map(|c| c.0));
            let (mae_mean, _) = mean_std(cells.iter().map(|c| c.1));
            SweepRecord { beta, credit_mean, credit_std, mae_mean }
        })
        .collect();
    let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.beta, r.credit_mean)).collect();
    let fit = fit_quadratic(&pts)?;
    Ok(SweepResult { peak_beta: fit.peak(), records, fit })
}

/// Measurement noise multiplied by `factor` from epoch `at` onwards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseShift {
    pub at: u64,
    pub factor: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingOptions {
    pub epochs: u64,
    pub n_perms: usize,
    pub shift: Option<NoiseShift>,
}

impl Default for TrainingOptions {
    fn default() -> Self {
        Self { epochs: 300, n_perms: 10, shift: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainingRecord {
    pub epoch: u64,
    pub beta: f64,
    /// agents' mean Shapley credit
    pub credit: f64,
    /// full-coalition test MAE
    pub mae: f64,
}

/// Closed-loop training: each epoch refits every predictor at the policy's
/// current `β`, estimates Shapley credit and feeds the mean credit back.
///
/// Epoch noise seeds depend only on `(seed, epoch)`, so runs with different
/// policies are paired.
pub fn run_apc_training(task: &TrajTask, policy: &BetaPolicy, opts: &TrainingOptions, seed: u64) -> Result<Vec<TrainingRecord>> {
    let mut state = policy.start(derive_seed(seed, "policy", 0))?;
    let shifted = match opts.shift {
        Some(s) => Some(task.with_measurement_var(task.measurement_var() * s.factor)?),
        None => None,
    };
    let full = (lattice_size(task.n_agents()) - 1) as u32;
    let mut out = Vec::with_capacity(opts.epochs as usize);
    for epoch in 0..opts.epochs {
        let env = match (&shifted, opts.shift) {
            (Some(t), Some(s)) if epoch >= s.at => t,
            _ => task,
        };
        let beta = state.beta();
        let epoch_seed = derive_seed(seed, "epoch", epoch);
        let mut o = env.oracle(beta, epoch_seed)?;
        let credit = o.shapley(opts.n_perms, derive_seed(epoch_seed, "perms", 0))?.total() / env.n_agents() as f64;
        let mae = o.test_mae(full)?;
        state.observe(credit)?;
        out.push(TrainingRecord { epoch, beta, credit, mae });
    }
    Ok(out)
}

pub fn write_training_csv<W: Write>(records: &[TrainingRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "beta", "credit", "mae"])?;
    for r in records {
        w.write_record([r.epoch.to_string(), r.beta.to_string(), r.credit.to_string(), r.mae.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
