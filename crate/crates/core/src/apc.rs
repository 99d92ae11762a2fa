//! Adaptive Precision Control: an online controller that keeps a rolling
//! buffer of `(β, credit)` observations, fits a quadratic to it every `K`
//! epochs and, when the fit is concave, ascends its gradient.

use std::collections::VecDeque;
use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{from_usize, Real};
use crate::seed::{derive_seed, rng_from_seed, SimRng};

/// `f(β) = a β² + b β + c`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticFit<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub r_squared: T,
}

impl<T: Real> QuadraticFit<T> {
    pub fn eval(&self, x: T) -> T {
        (self.a * x + self.b) * x + self.c
    }

    pub fn derivative(&self, x: T) -> T {
        T::lit(2.0) * self.a * x + self.b
    }

    /// Vertex `-b / 2a`, only for concave fits.
    pub fn peak(&self) -> Option<T> {
        (self.a < T::zero()).then(|| -self.b / (T::lit(2.0) * self.a))
    }
}

fn solve3<T: Real>(mut m: [[T; 4]; 3], tol: T) -> Option<[T; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if !(m[pivot][col].abs() > tol) {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] = m[row][k] - f * m[col][k];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Least-squares quadratic through `(β, credit)` points.
///
/// The normal equations are formed on the centred and scaled abscissa
/// `t = (β - mean) / spread` and mapped back, which keeps tightly clustered
/// buffers well conditioned.
pub fn fit_quadratic<T: Real>(points: &[(T, T)]) -> Result<QuadraticFit<T>> {
    let n = points.len();
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidArgument("non-finite point".into()));
    }
    let mut xs: Vec<T> = points.iter().map(|p| p.0).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::SingularFit);
    }
    let nf: T = from_usize(n);
    let mean = points.iter().fold(T::zero(), |s, p| s + p.0) / nf;
    let spread = points.iter().fold(T::zero(), |s, p| s.max((p.0 - mean).abs()));

    let mut s = [T::zero(); 5];
    let mut r = [T::zero(); 3];
    for &(x, y) in points {
        let t = (x - mean) / spread;
        let mut pow = T::one();
        for (k, sk) in s.iter_mut().enumerate() {
            *sk = *sk + pow;
            if k < 3 {
                r[k] = r[k] + pow * y;
            }
            pow = pow * t;
        }
    }
    let system = [[s[0], s[1], s[2], r[0]], [s[1], s[2], s[3], r[1]], [s[2], s[3], s[4], r[2]]];
    let [c0, c1, c2] = solve3(system, T::lit(1e-10) * nf).ok_or(Error::SingularFit)?;

    // back to the original abscissa
    let a = c2 / (spread * spread);
    let b = c1 / spread - T::lit(2.0) * c2 * mean / (spread * spread);
    let c = c2 * mean * mean / (spread * spread) - c1 * mean / spread + c0;

    let y_mean = points.iter().fold(T::zero(), |acc, p| acc + p.1) / nf;
    let mut ss_tot = T::zero();
    let mut ss_res = T::zero();
    for &(x, y) in points {
        let t = (x - mean) / spread;
        let pred = c0 + t * (c1 + t * c2);
        ss_res = ss_res + (y - pred) * (y - pred);
        ss_tot = ss_tot + (y - y_mean) * (y - y_mean);
    }
    let r_squared = if ss_tot == T::zero() { T::one() } else { T::one() - ss_res / ss_tot };
    Ok(QuadraticFit { a, b, c, r_squared })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApcConfig<T> {
    /// gradient step size `η`
    pub eta: T,
    /// buffer length `L`
    pub window_len: usize,
    /// adaptation period `K`, in epochs
    pub update_period: usize,
    pub beta_min: T,
    pub beta_max: T,
    /// exploration steps are uniform on `[-explore_scale/2, explore_scale/2]`
    pub explore_scale: T,
    /// fit a trailing 5-point mean of the credits instead of the raw values
    pub smoothing: bool,
    /// fit only the most recent `fit_len` buffer entries
    pub fit_len: Option<usize>,
}

impl<T: Real> Default for ApcConfig<T> {
    fn default() -> Self {
        Self {
            eta: T::lit(0.05),
            window_len: 50,
            update_period: 10,
            beta_min: T::lit(0.2),
            beta_max: T::lit(5.0),
            explore_scale: T::lit(0.1),
            smoothing: false,
            fit_len: None,
        }
    }
}

impl<T: Real> ApcConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.into()));
        if !(self.beta_min > T::zero() && self.beta_min < self.beta_max) {
            return bad("need 0 < beta_min < beta_max");
        }
        if !(self.eta > T::zero()) {
            return bad("eta must be positive");
        }
        if self.window_len < 3 {
            return bad("window_len must be at least 3");
        }
        if self.update_period < 1 {
            return bad("update_period must be at least 1");
        }
        if !(self.explore_scale >= T::zero()) {
            return bad("explore_scale must be non-negative");
        }
        if self.fit_len.is_some_and(|k| k < 3) {
            return bad("fit_len must be at least 3");
        }
        Ok(())
    }

    pub fn clamp(&self, beta: T) -> T {
        beta.max(self.beta_min).min(self.beta_max)
    }
}

/// What happened on one controller step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ApcAction<T> {
    /// Off-tick epoch: the observation was only buffered.
    Recorded,
    /// Concave fit: `β ← clamp(β + η (2aβ + b))`.
    Ascended { fit: QuadraticFit<T>, gradient: T },
    /// No usable concave fit; a bounded random step was taken.
    Explored { delta: T, fit: Option<QuadraticFit<T>> },
}

/// One agent's controller state.
#[derive(Clone, Debug)]
pub struct ApcState<T> {
    beta: T,
    buffer: VecDeque<(T, T)>,
    epoch: u64,
    rng: SimRng,
}

impl<T: Real> ApcState<T> {
    pub fn new(initial_beta: T, seed: u64, cfg: &ApcConfig<T>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            beta: cfg.clamp(initial_beta),
            buffer: VecDeque::with_capacity(cfg.window_len + 1),
            epoch: 0,
            rng: rng_from_seed(seed),
        })
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn buffer(&self) -> &VecDeque<(T, T)> {
        &self.buffer
    }

    /// Seeds the buffer, e.g. to resume from a previous run.
    pub fn preload(&mut self, points: impl IntoIterator<Item = (T, T)>, cfg: &ApcConfig<T>) {
        for p in points {
            self.push(p, cfg.window_len);
        }
    }

    fn push(&mut self, point: (T, T), window_len: usize) {
        self.buffer.push_back(point);
        while self.buffer.len() > window_len {
            self.buffer.pop_front();
        }
    }

    fn fit_points(&self, cfg: &ApcConfig<T>) -> Vec<(T, T)> {
        let skip = cfg.fit_len.map_or(0, |k| self.buffer.len().saturating_sub(k));
        let pts: Vec<(T, T)> = self.buffer.iter().skip(skip).copied().collect();
        if !cfg.smoothing {
            return pts;
        }
        (0..pts.len())
            .map(|i| {
                let lo = i.saturating_sub(4);
                let w = &pts[lo..=i];
                let mean = w.iter().fold(T::zero(), |s, p| s + p.1) / from_usize(w.len());
                (pts[i].0, mean)
            })
            .collect()
    }

    /// Records the credit earned at the current `β`, then adapts `β` on every
    /// `K`-th epoch.
    pub fn step(&mut self, credit: T, cfg: &ApcConfig<T>) -> Result<ApcAction<T>> {
        if !credit.is_finite() {
            return Err(Error::InvalidArgument("credit must be finite".into()));
        }
        self.push((self.beta, credit), cfg.window_len);
        self.epoch += 1;
        if self.epoch % cfg.update_period as u64 != 0 {
            return Ok(ApcAction::Recorded);
        }
        let fit = fit_quadratic(&self.fit_points(cfg)).ok();
        match fit {
            Some(f) if f.a < T::zero() => {
                let gradient = f.derivative(self.beta);
                self.beta = cfg.clamp(self.beta + cfg.eta * gradient);
                Ok(ApcAction::Ascended { fit: f, gradient })
            }
            _ => {
                let u: f64 = self.rng.random();
                let delta = cfg.explore_scale * (T::lit(u) - T::lit(0.5));
                self.beta = cfg.clamp(self.beta + delta);
                Ok(ApcAction::Explored { delta, fit })
            }
        }
    }
}

/// One epoch of a closed-loop run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApcRecord<T> {
    pub epoch: u64,
    /// precision used during this epoch
    pub beta: T,
    pub credit: T,
}

/// Runs the controller against a credit oracle `credit_fn(β, epoch, rng)`.
///
/// Oracle noise draws from a stream derived from `seed`, separate from the
/// controller's exploration stream.
pub fn run_apc_on_oracle<T: Real>(
    mut credit_fn: impl FnMut(T, u64, &mut SimRng) -> T,
    cfg: &ApcConfig<T>,
    initial_beta: T,
    epochs: u64,
    seed: u64,
) -> Result<Vec<ApcRecord<T>>> {
    let mut state = ApcState::new(initial_beta, seed, cfg)?;
    let mut noise = rng_from_seed(derive_seed(seed, "apc-oracle", 0));
    let mut out = Vec::with_capacity(epochs as usize);
    for epoch in 0..epochs {
        let beta = state.beta();
        let credit = credit_fn(beta, epoch, &mut noise);
        state.step(credit, cfg)?;
        out.push(ApcRecord { epoch, beta, credit });
    }
    Ok(out)
}

/// `epoch,beta,credit` with header.
pub fn write_trajectory_csv<T: Real + std::fmt::Display, W: Write>(records: &[ApcRecord<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "beta", "credit"])?;
    for r in records {
        w.write_record([r.epoch.to_string(), r.beta.to_string(), r.credit.to_string()])?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}
