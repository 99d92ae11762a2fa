//! Vicsek flocking with noisy perception of neighbours' headings.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use synergy_core::{derive_seed, rng_from_seed, SimRng};

use crate::error::{Result, SimError};
use crate::policy::BetaPolicy;
use crate::predictor::noise_sd;

#[derive(Clone, Debug, PartialEq)]
pub struct FlockConfig {
    pub n_agents: usize,
    /// side of the periodic square
    pub box_size: f64,
    /// interaction radius `R`
    pub radius: f64,
    pub speed: f64,
    pub steps_per_episode: usize,
    /// leading steps excluded from the order measurement
    pub warmup_steps: usize,
}

impl Default for FlockConfig {
    fn default() -> Self {
        Self { n_agents: 100, box_size: 10.0, radius: 1.0, speed: 0.03, steps_per_episode: 500, warmup_steps: 100 }
    }
}

impl FlockConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.n_agents > 0
            && self.box_size > 0.0
            && self.radius > 0.0
            && self.speed > 0.0
            && self.radius <= self.box_size / 2.0
            && self.warmup_steps < self.steps_per_episode;
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidArgument(format!("invalid flock config {self:?}")))
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlockState {
    pub positions: Vec<[f64; 2]>,
    /// in `[-π, π)`
    pub headings: Vec<f64>,
    pub rng: SimRng,
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

fn wrap_coord(x: f64, l: f64) -> f64 {
    let w = x.rem_euclid(l);
    if w >= l {
        0.0
    } else {
        w
    }
}

impl FlockState {
    /// Uniform positions and headings.
    pub fn random(cfg: &FlockConfig, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let positions = (0..cfg.n_agents)
            .map(|_| [rng.random_range(0.0..cfg.box_size), rng.random_range(0.0..cfg.box_size)])
            .collect();
        let headings = (0..cfg.n_agents).map(|_| rng.random_range(-PI..PI)).collect();
        Self { positions, headings, rng }
    }
}

/// `Φ = |mean unit heading vector|`.
pub fn polarization(headings: &[f64]) -> f64 {
    if headings.is_empty() {
        return 0.0;
    }
    let (s, c) = headings.iter().fold((0.0, 0.0), |(s, c), &t| (s + t.sin(), c + t.cos()));
    (s.hypot(c) / headings.len() as f64).min(1.0)
}

/// Neighbour lists (self excluded, ascending index) under the periodic metric.
fn neighbours(pos: &[[f64; 2]], cfg: &FlockConfig) -> Vec<Vec<usize>> {
    let n = pos.len();
    let l = cfg.box_size;
    let r2 = cfg.radius * cfg.radius;
    let close = |i: usize, j: usize| {
        let mut dx = (pos[i][0] - pos[j][0]).abs();
        let mut dy = (pos[i][1] - pos[j][1]).abs();
        dx = dx.min(l - dx);
        dy = dy.min(l - dy);
        dx * dx + dy * dy <= r2
    };
    let cells = (l / cfg.radius).floor() as usize;
    let mut out = vec![Vec::new(); n];
    if cells < 3 {
        for i in 0..n {
            out[i] = (0..n).filter(|&j| j != i && close(i, j)).collect();
        }
        return out;
    }
    let edge = l / cells as f64;
    let cell_of = |p: &[f64; 2]| {
        let cx = ((p[0] / edge) as usize).min(cells - 1);
        let cy = ((p[1] / edge) as usize).min(cells - 1);
        (cx, cy)
    };
    let mut grid: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    for (i, p) in pos.iter().enumerate() {
        let (cx, cy) = cell_of(p);
        grid[cy * cells + cx].push(i);
    }
    for i in 0..n {
        let (cx, cy) = cell_of(&pos[i]);
        let list = &mut out[i];
        for dy in [cells - 1, 0, 1] {
            for dx in [cells - 1, 0, 1] {
                let c = ((cy + dy) % cells) * cells + (cx + dx) % cells;
                list.extend(grid[c].iter().copied().filter(|&j| j != i && close(i, j)));
            }
        }
        list.sort_unstable();
    }
    out
}

/// One synchronous update at perception precision `beta` and intrinsic noise `nu`.
///
/// Each agent averages its own heading with its neighbours' headings, each of
/// the latter seen through `N(0, 1/β)` angular noise, then adds `N(0, ν²)`.
/// Noise is drawn per observer in ascending neighbour order.
pub fn step_flock(s: &mut FlockState, cfg: &FlockConfig, beta: f64, nu: f64) -> Result<()> {
    let sd = noise_sd(beta)?;
    if !(nu >= 0.0) {
        return Err(SimError::InvalidArgument("nu must be non-negative".into()));
    }
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let nb = neighbours(&s.positions, cfg);
    let old = s.headings.clone();
    for i in 0..old.len() {
        let (mut sx, mut sy) = (old[i].sin(), old[i].cos());
        for &j in &nb[i] {
            let seen = old[j] + sd * unit.sample(&mut s.rng);
            sx += seen.sin();
            sy += seen.cos();
        }
        let eta = nu * unit.sample(&mut s.rng);
        s.headings[i] = wrap_angle(sx.atan2(sy) + eta);
    }
    for (p, &t) in s.positions.iter_mut().zip(&s.headings) {
        p[0] = wrap_coord(p[0] + cfg.speed * t.cos(), cfg.box_size);
        p[1] = wrap_coord(p[1] + cfg.speed * t.sin(), cfg.box_size);
    }
    Ok(())
}

/// Runs one episode; returns the mean polarisation after warm-up.
pub fn run_episode(s: &mut FlockState, cfg: &FlockConfig, beta: f64, nu: f64) -> Result<f64> {
    let mut acc = 0.0;
    for step in 0..cfg.steps_per_episode {
        step_flock(s, cfg, beta, nu)?;
        if step >= cfg.warmup_steps {
            acc += polarization(&s.headings);
        }
    }
    Ok(acc / (cfg.steps_per_episode - cfg.warmup_steps) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlockSweepRecord {
    pub beta: f64,
    pub phi_mean: f64,
    pub phi_std: f64,
}

/// Episode `k` starts from the same state and noise stream at every `β`.
pub fn run_beta_sweep(cfg: &FlockConfig, betas: &[f64], nu: f64, episodes_per_beta: usize, seed: u64) -> Result<Vec<FlockSweepRecord>> {
    cfg.validate()?;
    if betas.is_empty() || episodes_per_beta == 0 {
        return Err(SimError::InvalidArgument("need at least one beta and one episode".into()));
    }
    let cells: Vec<(usize, usize)> =
        (0..betas.len()).flat_map(|b| (0..episodes_per_beta).map(move |e| (b, e))).collect();
    let phis = cells
        .par_iter()
        .map(|&(b, e)| {
            let mut s = FlockState::random(cfg, derive_seed(seed, "vicsek-sweep", e as u64));
            run_episode(&mut s, cfg, betas[b], nu)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(betas
        .iter()
        .zip(phis.chunks(episodes_per_beta))
        .map(|(&beta, c)| {
            let n = c.len() as f64;
            let mean = c.iter().sum::<f64>() / n;
            let var = if c.len() > 1 { c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            FlockSweepRecord { beta, phi_mean: mean, phi_std: var.sqrt() }
        })
        .collect())
}

pub fn write_sweep_csv<W: Write>(records: &[FlockSweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["beta", "phi_mean", "phi_std"])?;
    for r in records {
        w.write_record([r.beta, r.phi_mean, r.phi_std].map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Intrinsic noise ramped linearly over a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSchedule {
    pub nu_start: f64,
    pub nu_end: f64,
    pub episodes: usize,
}

impl NoiseSchedule {
    pub fn constant(nu: f64, episodes: usize) -> Self {
        Self { nu_start: nu, nu_end: nu, episodes }
    }

    pub fn nu(&self, episode: usize) -> f64 {
        if self.episodes <= 1 {
            return self.nu_start;
        }
        let f = (episode.min(self.episodes - 1)) as f64 / (self.episodes - 1) as f64;
        (self.nu_start + f * (self.nu_end - self.nu_start)).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlockRecord {
    pub episode: usize,
    pub nu: f64,
    pub beta: f64,
    pub phi: f64,
}

/// Closed loop over episodes: the flock carries over from one episode to the
/// next and the episode's mean polarisation is the policy's credit.
///
/// The simulation stream depends only on `seed`, so policies are paired.
pub fn run_apc_flock(cfg: &FlockConfig, schedule: &NoiseSchedule, policy: &BetaPolicy, seed: u64) -> Result<Vec<FlockRecord>> {
    cfg.validate()?;
    let mut state = policy.start(derive_seed(seed, "policy", 0))?;
    let mut flock = FlockState::random(cfg, derive_seed(seed, "vicsek-apc", 0));
    let mut out = Vec::with_capacity(schedule.episodes);
    for episode in 0..schedule.episodes {
        let nu = schedule.nu(episode);
        let beta = state.beta();
        flock.rng = rng_from_seed(derive_seed(seed, "vicsek-episode", episode as u64));
        let phi = run_episode(&mut flock, cfg, beta, nu)?;
        state.observe(phi)?;
        out.push(FlockRecord { episode, nu, beta, phi });
    }
    Ok(out)
}

pub fn write_apc_csv<W: Write>(records: &[FlockRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["episode", "nu", "beta", "phi"])?;
    for r in records {
        w.write_record([r.episode.to_string(), r.nu.to_string(), r.beta.to_string(), r.phi.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest};

    #[test]
    fn polarization_extremes() {
        assert!((polarization(&[0.3; 7]) - 1.0).abs() < 1e-12);
        assert!(polarization(&[0.0, PI]) < 1e-12);
    }

    #[test]
    fn random_headings_are_disordered() {
        let mut hits = 0;
        for seed in 0..200 {
            let mut rng = rng_from_seed(seed);
            let h: Vec<f64> = (0..10_000).map(|_| rng.random_range(-PI..PI)).collect();
            if polarization(&h) <= 0.05 {
                hits += 1;
            }
        }
        assert!(hits >= 198, "{hits}");
    }

    #[test]
    fn noiseless_alignment_is_fixed() {
        let cfg = FlockConfig::default();
        let mut s = FlockState::random(&cfg, 1);
        s.headings.iter_mut().for_each(|h| *h = 0.7);
        for _ in 0..100 {
            step_flock(&mut s, &cfg, 1e9, 0.0).unwrap();
        }
        assert!(polarization(&s.headings) > 1.0 - 1e-6);
    }

    #[test]
    fn lone_agent_only_feels_intrinsic_noise() {
        let cfg = FlockConfig { n_agents: 1, ..Default::default() };
        let mut s = FlockState::random(&cfg, 2);
        let h0 = s.headings[0];
        step_flock(&mut s, &cfg, 1e-6, 0.0).unwrap();
        assert!((s.headings[0] - h0).abs() < 1e-12);
        step_flock(&mut s, &cfg, 1e-6, 0.5).unwrap();
        assert!((s.headings[0] - h0).abs() > 1e-6);
    }

    #[test]
    fn cell_lists_match_brute_force() {
        let cfg = FlockConfig { n_agents: 300, radius: 0.9, ..Default::default() };
        let s = FlockState::random(&cfg, 5);
        let fast = neighbours(&s.positions, &cfg);
        let l = cfg.box_size;
        for i in 0..cfg.n_agents {
            let want: Vec<usize> = (0..cfg.n_agents)
                .filter(|&j| {
                    let dx = (s.positions[i][0] - s.positions[j][0]).abs();
                    let dy = (s.positions[i][1] - s.positions[j][1]).abs();
                    j != i && dx.min(l - dx).powi(2) + dy.min(l - dy).powi(2) <= 0.81
                })
                .collect();
            assert_eq!(fast[i], want);
        }
    }

    #[test]
    fn rotated_flock_has_same_order_trajectory() {
        let cfg = FlockConfig { n_agents: 60, ..Default::default() };
        let a0 = FlockState::random(&cfg, 8);
        let mut b = a0.clone();
        for (p, h) in b.positions.iter_mut().zip(&mut b.headings) {
            *p = [wrap_coord(cfg.box_size - p[1], cfg.box_size), p[0]];
            *h = wrap_angle(*h + PI / 2.0);
        }
        let mut a = a0;
        for _ in 0..50 {
            step_flock(&mut a, &cfg, 3.0, 0.2).unwrap();
            step_flock(&mut b, &cfg, 3.0, 0.2).unwrap();
            assert!((polarization(&a.headings) - polarization(&b.headings)).abs() < 1e-9);
        }
    }

    #[test]
    fn overwhelming_noise_destroys_order() {
        let cfg = FlockConfig { steps_per_episode: 200, warmup_steps: 50, ..Default::default() };
        let r = run_beta_sweep(&cfg, &[1.0, 10.0], 10.0, 3, 4).unwrap();
        assert!(r.iter().all(|x| x.phi_mean <= 0.2), "{r:?}");
        assert_eq!(run_beta_sweep(&cfg, &[2.0], 0.1, 1, 4).unwrap().len(), 1);
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = FlockConfig { steps_per_episode: 60, warmup_steps: 10, ..Default::default() };
        assert_eq!(run_beta_sweep(&cfg, &[1.0, 4.0], 0.1, 2, 9).unwrap(), run_beta_sweep(&cfg, &[1.0, 4.0], 0.1, 2, 9).unwrap());
    }

    #[test]
    fn schedule_is_linear() {
        let s = NoiseSchedule { nu_start: 0.1, nu_end: 0.5, episodes: 5 };
        let v: Vec<f64> = (0..5).map(|e| s.nu(e)).collect();
        for (a, b) in v.iter().zip([0.1, 0.2, 0.3, 0.4, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn state_stays_in_the_box(seed in 0u64..1000, beta in 0.1f64..50.0, nu in 0.0f64..2.0) {
            let cfg = FlockConfig { n_agents: 40, speed: 0.7, ..Default::default() };
            let mut s = FlockState::random(&cfg, seed);
            for _ in 0..20 {
                step_flock(&mut s, &cfg, beta, nu).unwrap();
                for p in &s.positions {
                    prop_assert!((0.0..cfg.box_size).contains(&p[0]) && (0.0..cfg.box_size).contains(&p[1]));
                }
                for h in &s.headings {
                    prop_assert!((-PI..PI).contains(h));
                }
                let phi = polarization(&s.headings);
                prop_assert!((0.0..=1.0).contains(&phi));
            }
        }
    }
}
