//! Reference-following agents with independent tabular Q-learning.
//!
//! Each agent moves along its own reference path by a scalar progress
//! coordinate; actions change the progress velocity. Observations (offset to
//! the nominal reference point, distances to the three nearest agents) are
//! seen through `N(0, 1/β)` noise.

use std::collections::HashMap;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use synergy_core::{derive_seed, rng_from_seed, SimRng};

use crate::error::{Result, SimError};
use crate::policy::BetaPolicy;
use crate::predictor::noise_sd;
use crate::tracks::TrackTable;

pub const OBS_DIM: usize = 5;
pub const N_ACTIONS: usize = 3;
/// Padding for missing neighbours; equals the distance clip.
pub const DISTANCE_SENTINEL: f64 = 2.0;

#[derive(Clone, Debug, PartialEq)]
pub struct MarlConfig {
    pub n_agents: usize,
    pub episode_len: usize,
    pub collision_dist: f64,
    pub collision_penalty: f64,
    pub lr: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub bins: Bins,
}

impl Default for MarlConfig {
    fn default() -> Self {
        Self {
            n_agents: 10,
            episode_len: 100,
            collision_dist: 0.05,
            collision_penalty: -10.0,
            lr: 0.1,
            gamma: 0.95,
            epsilon: 0.1,
            bins: Bins::default(),
        }
    }
}

impl MarlConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.n_agents > 0
            && self.episode_len > 0
            && self.gamma > 0.0
            && self.gamma < 1.0
            && (0.0..=1.0).contains(&self.epsilon)
            && self.lr >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidArgument(format!("invalid MARL config {self:?}")))
        }
    }
}

/// A reference path: planar points at consecutive time steps.
pub type Path = Vec<[f64; 2]>;

pub fn paths_from_tracks(t: &TrackTable, n: usize, min_len: usize) -> Result<Vec<Path>> {
    let paths: Vec<Path> = t
        .tracks
        .iter()
        .filter(|tr| tr.points.len() >= min_len)
        .take(n)
        .map(|tr| tr.points.iter().map(|p| [p.lon, p.lat]).collect())
        .collect();
    if paths.len() < n {
        return Err(SimError::InsufficientData(format!(
            "need {n} tracks with at least {min_len} points, found {}",
            paths.len()
        )));
    }
    Ok(paths)
}

fn interp(path: &Path, s: f64) -> [f64; 2] {
    let k = (s.floor() as usize).min(path.len() - 1);
    let f = s - k as f64;
    if k + 1 >= path.len() || f == 0.0 {
        return path[k];
    }
    let (a, b) = (path[k], path[k + 1]);
    [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarlState {
    pub progress: Vec<f64>,
    pub velocity: Vec<f64>,
    pub step: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    pub offset: [f64; 2],
    pub neighbor_dists: [f64; 3],
}

impl Observation {
    pub const ZERO: Observation = Observation { offset: [0.0; 2], neighbor_dists: [0.0; 3] };

    pub fn to_array(self) -> [f64; OBS_DIM] {
        let [a, b] = self.offset;
        let [c, d, e] = self.neighbor_dists;
        [a, b, c, d, e]
    }

    pub fn from_array(x: [f64; OBS_DIM]) -> Self {
        Self { offset: [x[0], x[1]], neighbor_dists: [x[2], x[3], x[4]] }
    }

    /// Copy with i.i.d. `N(0, 1/β)` noise on all five entries.
    pub fn corrupted<R: Rng + ?Sized>(self, beta: f64, rng: &mut R) -> Result<Self> {
        let sd = noise_sd(beta)?;
        let unit = Normal::new(0.0, 1.0).expect("unit normal");
        Ok(Self::from_array(self.to_array().map(|v| v + sd * unit.sample(rng))))
    }
}

/// The multi-agent environment over fixed reference paths.
#[derive(Clone, Debug)]
pub struct MarlEnv {
    pub cfg: MarlConfig,
    pub paths: Vec<Path>,
}

/// Outcome of one environment step.
#[derive(Clone, Debug)]
pub struct StepResult {
    pub state: MarlState,
    pub rewards: Vec<f64>,
    pub observations: Vec<Observation>,
    pub done: bool,
}

impl MarlEnv {
    /// Needs `cfg.n_agents` paths with more than `episode_len` points.
    pub fn new(cfg: MarlConfig, tracks: &TrackTable) -> Result<Self> {
        cfg.validate()?;
        let paths = paths_from_tracks(tracks, cfg.n_agents, cfg.episode_len + 1)?;
        Ok(Self { cfg, paths })
    }

    pub fn from_paths(cfg: MarlConfig, paths: Vec<Path>) -> Result<Self> {
        cfg.validate()?;
        if paths.len() < cfg.n_agents || paths.iter().any(|p| p.len() < 2) {
            return Err(SimError::InsufficientData("need one path of at least 2 points per agent".into()));
        }
        Ok(Self { cfg, paths })
    }

    pub fn reset(&self) -> (MarlState, Vec<Observation>) {
        let n = self.cfg.n_agents;
        let s = MarlState { progress: vec![0.0; n], velocity: vec![1.0; n], step: 0 };
        let obs = self.observe(&s);
        (s, obs)
    }

    pub fn positions(&self, s: &MarlState) -> Vec<[f64; 2]> {
        s.progress.iter().zip(&self.paths).map(|(&p, path)| interp(path, p)).collect()
    }

    fn reference(&self, i: usize, step: usize) -> [f64; 2] {
        let path = &self.paths[i];
        path[step.min(path.len() - 1)]
    }

    pub fn observe(&self, s: &MarlState) -> Vec<Observation> {
        let pos = self.positions(s);
        (0..pos.len())
            .map(|i| {
                let r = self.reference(i, s.step);
                let mut d: Vec<f64> =
                    (0..pos.len()).filter(|&j| j != i).map(|j| dist(pos[i], pos[j])).collect();
                d.sort_by(f64::total_cmp);
                let mut nd = [DISTANCE_SENTINEL; 3];
                for (slot, v) in nd.iter_mut().zip(d) {
                    *slot = v;
                }
                Observation { offset: [pos[i][0] - r[0], pos[i][1] - r[1]], neighbor_dists: nd }
            })
            .collect()
    }

    /// Applies accelerations `actions[i] ∈ {-1, 0, 1}`.
    pub fn step(&self, s: &MarlState, actions: &[i8]) -> StepResult {
        let cfg = &self.cfg;
        let mut next = s.clone();
        for (i, &a) in actions.iter().enumerate() {
            next.velocity[i] = (next.velocity[i] + 0.1 * a as f64).clamp(0.0, 2.0);
            let last = (self.paths[i].len() - 1) as f64;
            next.progress[i] = (next.progress[i] + next.velocity[i]).clamp(0.0, last);
        }
        next.step += 1;
        let pos = self.positions(&next);
        let rewards = (0..pos.len())
            .map(|i| {
                let tracking = -dist(pos[i], self.reference(i, next.step));
                let crash = (0..pos.len()).any(|j| j != i && dist(pos[i], pos[j]) < cfg.collision_dist);
                tracking + if crash { cfg.collision_penalty } else { 0.0 }
            })
            .collect();
        let exhausted = next.progress.iter().zip(&self.paths).any(|(&p, path)| p >= (path.len() - 1) as f64);
        let done = next.step >= cfg.episode_len || exhausted;
        let observations = self.observe(&next);
        StepResult { state: next, rewards, observations, done }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Uniform per-dimension binning with clipping.
#[derive(Clone, Debug, PartialEq)]
pub struct Bins {
    pub offset_bins: usize,
    pub offset_range: (f64, f64),
    pub dist_bins: usize,
    pub dist_range: (f64, f64),
}

impl Default for Bins {
    fn default() -> Self {
        Self { offset_bins: 7, offset_range: (-1.0, 1.0), dist_bins: 5, dist_range: (0.0, DISTANCE_SENTINEL) }
    }
}

fn bin(x: f64, n: usize, (lo, hi): (f64, f64)) -> u8 {
    let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
    ((f * n as f64).floor() as usize).min(n - 1) as u8
}

pub type StateKey = [u8; OBS_DIM];

pub fn discretize(obs: &Observation, bins: &Bins) -> StateKey {
    let x = obs.to_array();
    std::array::from_fn(|k| {
        if k < 2 {
            bin(x[k], bins.offset_bins, bins.offset_range)
        } else {
            bin(x[k], bins.dist_bins, bins.dist_range)
        }
    })
}

/// Action values per visited state; index `k` is acceleration `k - 1`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QTable {
    pub values: HashMap<StateKey, [f64; N_ACTIONS]>,
}

impl QTable {
    pub fn get(&self, s: &StateKey) -> [f64; N_ACTIONS] {
        self.values.get(s).copied().unwrap_or([0.0; N_ACTIONS])
    }

    /// Greedy action index, lowest index on ties.
    pub fn greedy(&self, s: &StateKey) -> usize {
        let q = self.get(s);
        (1..N_ACTIONS).fold(0, |best, a| if q[a] > q[best] { a } else { best })
    }

    pub fn epsilon_greedy<R: Rng + ?Sized>(&self, s: &StateKey, epsilon: f64, rng: &mut R) -> usize {
        if rng.random::<f64>() < epsilon {
            rng.random_range(0..N_ACTIONS)
        } else {
            self.greedy(s)
        }
    }
}

pub fn action_value(index: usize) -> i8 {
    index as i8 - 1
}

/// `Q[s][a] += lr (r + γ max Q[s'] − Q[s][a])`; `s_next = None` is terminal.
pub fn q_update(q: &mut QTable, s: StateKey, a: usize, r: f64, s_next: Option<StateKey>, cfg: &MarlConfig) {
    let bootstrap = s_next.map_or(0.0, |n| q.get(&n).into_iter().fold(f64::NEG_INFINITY, f64::max));
    let entry = q.values.entry(s).or_insert([0.0; N_ACTIONS]);
    entry[a] += cfg.lr * (r + cfg.gamma * bootstrap - entry[a]);
}

/// Team reward of one episode plus bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeStats {
    pub total_reward: f64,
    pub steps: usize,
}

impl EpisodeStats {
    /// Episode reward per agent.
    pub fn avg_reward(&self, n_agents: usize) -> f64 {
        self.total_reward / n_agents as f64
    }
}

/// How agents act during an episode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    /// ε-greedy with Q-learning updates
    Train,
    /// greedy, no updates
    Evaluate,
}

/// Runs one episode. Agents with `masked[i]` see the zero observation.
///
/// Observation noise and exploration draw from `rng` in a fixed order, so
/// two calls with equal seeds are paired draw for draw.
pub fn run_episode(
    env: &MarlEnv,
    q: &mut [QTable],
    beta: f64,
    mode: Mode,
    masked: &[bool],
    rng: &mut SimRng,
) -> Result<EpisodeStats> {
    let cfg = &env.cfg;
    let n = cfg.n_agents;
    let see = |obs: &[Observation], rng: &mut SimRng| -> Result<Vec<StateKey>> {
        obs.iter()
            .enumerate()
            .map(|(i, o)| {
                let noisy = o.corrupted(beta, rng)?;
                Ok(discretize(if masked.get(i).copied().unwrap_or(false) { &Observation::ZERO } else { &noisy }, &cfg.bins))
            })
            .collect()
    };
    let (mut state, obs) = env.reset();
    let mut keys = see(&obs, rng)?;
    let mut total = 0.0;
    loop {
        let mut actions = Vec::with_capacity(n);
        let mut idx = Vec::with_capacity(n);
        for i in 0..n {
            let eps = if mode == Mode::Train { cfg.epsilon } else { 0.0 };
            let u: f64 = rng.random();
            let r: usize = rng.random_range(0..N_ACTIONS);
            let a = if u < eps { r } else { q[i].greedy(&keys[i]) };
            idx.push(a);
            actions.push(action_value(a));
        }
        let res = env.step(&state, &actions);
        total += res.rewards.iter().sum::<f64>();
        let next_keys = see(&res.observations, rng)?;
        if mode == Mode::Train {
            for i in 0..n {
                let nk = if res.done { None } else { Some(next_keys[i]) };
                q_update(&mut q[i], keys[i], idx[i], res.rewards[i], nk, cfg);
            }
        }
        state = res.state;
        keys = next_keys;
        if res.done {
            return Ok(EpisodeStats { total_reward: total, steps: state.step });
        }
    }
}

/// Team-reward drop when agent `i`'s observation is replaced by zeros,
/// averaged over `n_perms` paired greedy rollouts.
pub fn masking_credit(env: &MarlEnv, q: &[QTable], beta: f64, n_perms: usize, seed: u64) -> Result<Vec<f64>> {
    let n = env.cfg.n_agents;
    let mut credit = vec![0.0; n];
    let mut scratch = q.to_vec();
    for k in 0..n_perms.max(1) {
        let s = derive_seed(seed, "masking", k as u64);
        let base = run_episode(env, &mut scratch, beta, Mode::Evaluate, &[], &mut rng_from_seed(s))?.total_reward;
        for (i, c) in credit.iter_mut().enumerate() {
            let mut mask = vec![false; n];
            mask[i] = true;
            let m = run_episode(env, &mut scratch, beta, Mode::Evaluate, &mask, &mut rng_from_seed(s))?.total_reward;
            *c += base - m;
        }
    }
    let k = n_perms.max(1) as f64;
    Ok(credit.into_iter().map(|c| c / k).collect())
}

/// One learning run: fresh Q-tables, `episodes` training episodes under `policy`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarlRecord {
    pub episode: usize,
    pub beta: f64,
    pub avg_reward: f64,
}

/// Q-agents persist across episodes; the policy sees the agents' mean
/// masking credit after each episode (computed only for adaptive policies).
pub fn run_marl(env: &MarlEnv, policy: &BetaPolicy, episodes: usize, credit_perms: usize, seed: u64) -> Result<Vec<MarlRecord>> {
    let n = env.cfg.n_agents;
    let mut q = vec![QTable::default(); n];
    let mut state = policy.start(derive_seed(seed, "policy", 0))?;
    let adaptive = matches!(policy, BetaPolicy::Apc { .. });
    let mut out = Vec::with_capacity(episodes);
    for episode in 0..episodes {
        let beta = state.beta();
        let mut rng = rng_from_seed(derive_seed(seed, "marl-episode", episode as u64));
        let stats = run_episode(env, &mut q, beta, Mode::Train, &[], &mut rng)?;
        let credit = if adaptive {
            let c = masking_credit(env, &q, beta, credit_perms, derive_seed(seed, "marl-credit", episode as u64))?;
            c.iter().sum::<f64>() / n as f64
        } else {
            0.0
        };
        state.observe(credit)?;
        out.push(MarlRecord { episode, beta, avg_reward: stats.avg_reward(n) });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarlRow {
    pub strategy: String,
    pub seed: u64,
    pub episode: usize,
    pub beta: f64,
    pub avg_reward: f64,
}

/// Every `(strategy, seed)` run, in parallel; rows sorted by strategy order then seed.
pub fn run_marl_experiment(
    env: &MarlEnv,
    strategies: &[(String, BetaPolicy)],
    episodes: usize,
    seeds: &[u64],
    credit_perms: usize,
) -> Result<Vec<MarlRow>> {
    let cells: Vec<(usize, u64)> = (0..strategies.len()).flat_map(|s| seeds.iter().map(move |&k| (s, k))).collect();
    let runs = cells
        .par_iter()
        .map(|&(s, k)| run_marl(env, &strategies[s].1, episodes, credit_perms, k).map(|r| (s, k, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(runs
        .into_iter()
        .flat_map(|(s, k, r)| {
            let name = strategies[s].0.clone();
            r.into_iter().map(move |x| MarlRow {
                strategy: name.clone(),
                seed: k,
                episode: x.episode,
                beta: x.beta,
                avg_reward: x.avg_reward,
            })
        })
        .collect())
}

pub fn write_marl_csv<W: Write>(rows: &[MarlRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["strategy", "seed", "episode", "beta", "avg_reward"])?;
    for r in rows {
        w.write_record([r.strategy.clone(), r.seed.to_string(), r.episode.to_string(), r.beta.to_string(), r.avg_reward.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracks::RoundaboutGenerator;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    fn line(y: f64, len: usize) -> Path {
        (0..len).map(|t| [t as f64 * 0.3, y]).collect()
    }

    fn lines(n: usize) -> MarlEnv {
        let cfg = MarlConfig { n_agents: n, ..Default::default() };
        MarlEnv::from_paths(cfg, (0..n).map(|k| line(5.0 * k as f64, 150)).collect()).unwrap()
    }

    #[test]
    fn holding_speed_tracks_reference_exactly() {
        let env = lines(3);
        let (mut s, _) = env.reset();
        for _ in 0..100 {
            let r = env.step(&s, &[0, 0, 0]);
            assert!(r.rewards.iter().all(|&x| x.abs() < 1e-12));
            s = r.state;
            if r.done {
                break;
            }
        }
        assert_eq!(s.step, 100);
    }

    #[test]
    fn collisions_penalise_both() {
        let cfg = MarlConfig { n_agents: 3, ..Default::default() };
        let paths = vec![line(0.0, 150), line(0.01, 150), line(9.0, 150)];
        let env = MarlEnv::from_paths(cfg, paths).unwrap();
        let (s, _) = env.reset();
        let r = env.step(&s, &[0, 0, 0]);
        assert!((r.rewards[0] + 10.0).abs() < 1e-12);
        assert!((r.rewards[1] + 10.0).abs() < 1e-12);
        assert_eq!(r.rewards[2], 0.0);
    }

    #[test]
    fn episodes_end_at_length_or_path_end() {
        let env = lines(2);
        let mut q = vec![QTable::default(); 2];
        let st = run_episode(&env, &mut q, 1.0, Mode::Train, &[], &mut rng_from_seed(1)).unwrap();
        assert!(st.steps <= 100);
        let short = MarlEnv::from_paths(MarlConfig { n_agents: 1, ..Default::default() }, vec![line(0.0, 30)]).unwrap();
        let (mut s, _) = short.reset();
        loop {
            let r = short.step(&s, &[1]);
            s = r.state;
            if r.done {
                break;
            }
        }
        assert!(s.step < 30);
        assert!(MarlEnv::new(MarlConfig::default(), &RoundaboutGenerator { n_tracks: 3, ..Default::default() }.generate(1)).is_err());
    }

    #[test]
    fn sentinel_pads_missing_neighbours() {
        let env = lines(2);
        let (_, obs) = env.reset();
        assert_eq!(obs[0].neighbor_dists, [5.0, DISTANCE_SENTINEL, DISTANCE_SENTINEL]);
    }

    #[test]
    fn default_bins() {
        let b = Bins::default();
        assert_eq!(discretize(&Observation::ZERO, &b), [3, 3, 0, 0, 0]);
        let far = Observation { offset: [-7.0, 9.0], neighbor_dists: [30.0, -1.0, 1.99] };
        assert_eq!(discretize(&far, &b), [0, 6, 4, 0, 4]);
        let a = Observation { offset: [0.01, 0.02], neighbor_dists: [0.1; 3] };
        let c = Observation { offset: [0.03, 0.05], neighbor_dists: [0.2; 3] };
        assert_eq!(discretize(&a, &b), discretize(&c, &b));
    }

    #[test]
    fn q_update_arithmetic() {
        let cfg = MarlConfig::default();
        let mut q = QTable::default();
        q_update(&mut q, [0; 5], 1, 1.0, None, &cfg);
        assert!((q.get(&[0; 5])[1] - 0.1).abs() < 1e-15);
        for _ in 0..500 {
            q_update(&mut q, [0; 5], 1, 1.0, None, &cfg);
        }
        assert!((q.get(&[0; 5])[1] - 1.0).abs() < 1e-9);
        let frozen = MarlConfig { lr: 0.0, ..cfg };
        let before = q.clone();
        q_update(&mut q, [0; 5], 2, 5.0, Some([1; 5]), &frozen);
        assert_eq!(q, before);
    }

    #[test]
    fn untrained_agents_earn_no_masking_credit() {
        let env = lines(3);
        let q = vec![QTable::default(); 3];
        let c = masking_credit(&env, &q, 2.0, 5, 3).unwrap();
        assert!(c.iter().all(|&x| x == 0.0), "{c:?}");
    }

    #[test]
    fn masking_everyone_is_the_blind_rollout() {
        let env = lines(3);
        let mut q = vec![QTable::default(); 3];
        let mut rng = rng_from_seed(4);
        for _ in 0..30 {
            run_episode(&env, &mut q, 2.0, Mode::Train, &[], &mut rng).unwrap();
        }
        let all = run_episode(&env, &mut q.clone(), 2.0, Mode::Evaluate, &[true; 3], &mut rng_from_seed(9)).unwrap();
        let blind = run_episode(&env, &mut q.clone(), 1e12, Mode::Evaluate, &[true; 3], &mut rng_from_seed(10)).unwrap();
        assert_eq!(all, blind);
    }

    #[test]
    fn identical_far_apart_agents_get_equal_credit() {
        let env = lines(4);
        let mut q = vec![QTable::default(); 4];
        let mut rng = rng_from_seed(5);
        for _ in 0..50 {
            run_episode(&env, &mut q, 3.0, Mode::Train, &[], &mut rng).unwrap();
        }
        // identical tables make the agents interchangeable
        let shared = vec![q[0].clone(); 4];
        let c = masking_credit(&env, &shared, 3.0, 40, 6).unwrap();
        let mean = c.iter().sum::<f64>() / 4.0;
        let spread = c.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
        assert!(spread <= 0.5 * mean.abs().max(1.0), "{c:?}");
    }

    #[test]
    fn true_state_ignores_observation_noise() {
        let env = lines(3);
        let acts: Vec<Vec<i8>> = (0..100).map(|t| vec![(t % 3) as i8 - 1, 1, -1]).collect();
        let roll = |beta: f64| {
            let (mut s, _) = env.reset();
            let mut rng = rng_from_seed(1);
            let mut traj = Vec::new();
            for a in &acts {
                let r = env.step(&s, a);
                let _noisy: Vec<_> = r.observations.iter().map(|o| o.corrupted(beta, &mut rng).unwrap()).collect();
                s = r.state;
                traj.push(s.clone());
                if r.done {
                    break;
                }
            }
            traj
        };
        assert_eq!(roll(0.3), roll(300.0));
    }

    #[test]
    fn single_agent_corridor_is_learned() {
        let cfg = MarlConfig { n_agents: 1, ..Default::default() };
        // the reference moves at speed 1, the agent must hold
        let env = MarlEnv::from_paths(cfg, vec![line(0.0, 250)]).unwrap();
        let mut q = vec![QTable::default()];
        let mut rng = rng_from_seed(2);
        for _ in 0..500 {
            run_episode(&env, &mut q, 1e6, Mode::Train, &[], &mut rng).unwrap();
        }
        let learned = run_episode(&env, &mut q, 1e6, Mode::Evaluate, &[], &mut rng_from_seed(3)).unwrap().total_reward;
        // best constant action is "hold", with return 0; the worst is far below
        let mut worst = f64::MAX;
        for a in [-1i8, 1] {
            let (mut s, _) = env.reset();
            let mut tot = 0.0;
            loop {
                let r = env.step(&s, &[a]);
                tot += r.rewards[0];
                s = r.state;
                if r.done {
                    break;
                }
            }
            worst = worst.min(tot);
        }
        // ≥ 90% of the way from the worst constant policy to the best one
        assert!(learned >= 0.1 * worst, "learned {learned}, worst {worst}");
    }

    #[test]
    fn paired_strategies_are_identical() {
        let env = MarlEnv::new(
            MarlConfig { n_agents: 4, ..Default::default() },
            &RoundaboutGenerator { n_tracks: 4, ..Default::default() }.generate(3),
        )
        .unwrap();
        let s = vec![("a".to_string(), BetaPolicy::Fixed(2.0)), ("b".to_string(), BetaPolicy::Fixed(2.0))];
        let rows = run_marl_experiment(&env, &s, 5, &[1, 2], 2).unwrap();
        let (a, b): (Vec<_>, Vec<_>) = rows.iter().partition(|r| r.strategy == "a");
        assert_eq!(a.iter().map(|r| r.avg_reward).collect::<Vec<_>>(), b.iter().map(|r| r.avg_reward).collect::<Vec<_>>());
    }

    proptest! {
        #[test]
        fn rewards_are_non_positive(seed in 0u64..500, beta in 0.1f64..20.0) {
            let env = lines(3);
            let mut q = vec![QTable::default(); 3];
            let mut rng = rng_from_seed(seed);
            let (mut s, _) = env.reset();
            for _ in 0..100 {
                let acts: Vec<i8> = (0..3).map(|_| rng.random_range(-1i8..=1)).collect();
                let r = env.step(&s, &acts);
                for &x in &r.rewards {
                    prop_assert!(x <= 0.0);
                }
                s = r.state;
                if r.done { break; }
            }
            let st = run_episode(&env, &mut q, beta, Mode::Train, &[], &mut rng).unwrap();
            prop_assert!(st.total_reward <= 0.0);
        }

        #[test]
        fn collision_penalty_is_symmetric(gap in 0.0f64..0.2) {
            let cfg = MarlConfig { n_agents: 2, ..Default::default() };
            let env = MarlEnv::from_paths(cfg.clone(), vec![line(0.0, 150), line(gap, 150)]).unwrap();
            let (s, _) = env.reset();
            let r = env.step(&s, &[0, 0]);
            let hit = |x: f64| x <= cfg.collision_penalty + 1e-9;
            prop_assert_eq!(hit(r.rewards[0]), hit(r.rewards[1]));
        }
    }
}
