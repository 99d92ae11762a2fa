//! Sliding-window samples and the ridge linear predictor.

use rand_distr::{Distribution, Normal};
use synergy_core::rng_from_seed;

use crate::error::{Result, SimError};
use crate::linalg::{Matrix, NormalEquations};
use crate::tracks::TrackTable;

pub const DEFAULT_PAST: usize = 10;
pub const DEFAULT_FUTURE: usize = 5;
pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Past window → future window for one agent; coordinates interleaved `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionSample {
    pub agent: usize,
    pub past: Vec<f64>,
    pub future: Vec<f64>,
}

/// Sliding windows over every track, in track then time order.
///
/// The agent id of a sample is its track's index in the table.
pub fn make_samples(t: &TrackTable, past: usize, future: usize, stride: usize) -> Vec<PredictionSample> {
    assert!(past > 0 && future > 0 && stride > 0, "window sizes and stride must be positive");
    let span = past + future;
    let mut out = Vec::new();
    for (agent, track) in t.tracks.iter().enumerate() {
        let pts = &track.points;
        if pts.len() < span {
            continue;
        }
        for start in (0..=pts.len() - span).step_by(stride) {
            let flat = |r: std::ops::Range<usize>| pts[r].iter().flat_map(|p| [p.lon, p.lat]).collect();
            out.push(PredictionSample {
                agent,
                past: flat(start..start + past),
                future: flat(start + past..start + span),
            });
        }
    }
    out
}

/// Temporal split of one agent's samples into train/validation/test.
pub fn split_temporal<T: Clone>(samples: &[T], train: f64, val: f64) -> (Vec<T>, Vec<T>, Vec<T>) {
    let n = samples.len();
    let a = ((n as f64) * train).floor() as usize;
    let b = (((n as f64) * (train + val)).floor() as usize).clamp(a, n);
    (samples[..a].to_vec(), samples[a..b].to_vec(), samples[b..].to_vec())
}

/// Adds `N(0, 1/β)` to every past coordinate; targets are left alone.
///
/// Draws are consumed in sample order, so a fixed seed gives the same
/// standard-normal field at every `β` (only its scale changes).
pub fn inject_noise(samples: &[PredictionSample], beta: f64, seed: u64) -> Result<Vec<PredictionSample>> {
    let sd = noise_sd(beta)?;
    let mut rng = rng_from_seed(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    Ok(samples
        .iter()
        .map(|s| PredictionSample {
            agent: s.agent,
            past: s.past.iter().map(|x| x + sd * unit.sample(&mut rng)).collect(),
            future: s.future.clone(),
        })
        .collect())
}

pub(crate) fn noise_sd(beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(SimError::Core(synergy_core::Error::InvalidBeta(beta)));
    }
    Ok(beta.sqrt().recip())
}

/// Affine map from a flattened past window to a flattened future window.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearPredictor {
    /// `(features + 1) × outputs`, bias in the last row
    pub weights: Matrix,
}

impl LinearPredictor {
    pub fn from_normal_equations(ne: &NormalEquations, lambda: f64) -> Result<Self> {
        if ne.count() == 0 {
            return Err(SimError::InsufficientData("no training samples".into()));
        }
        let weights = ne.solve(lambda)?;
        if weights.data.iter().any(|w| !w.is_finite()) {
            return Err(SimError::SingularSystem);
        }
        Ok(Self { weights })
    }

    pub fn features(&self) -> usize {
        self.weights.rows - 1
    }

    pub fn predict(&self, past: &[f64]) -> Vec<f64> {
        assert_eq!(past.len(), self.features(), "feature length");
        let w = &self.weights;
        let mut out = w.row(w.rows - 1).to_vec();
        for (i, &x) in past.iter().enumerate() {
            for (o, &wij) in out.iter_mut().zip(w.row(i)) {
                *o += x * wij;
            }
        }
        out
    }

    /// Sum of absolute errors and the number of target coordinates.
    pub fn abs_error(&self, samples: &[PredictionSample]) -> (f64, usize) {
        let mut sum = 0.0;
        let mut count = 0;
        for s in samples {
            let pred = self.predict(&s.past);
            sum += pred.iter().zip(&s.future).map(|(p, y)| (p - y).abs()).sum::<f64>();
            count += s.future.len();
        }
        (sum, count)
    }
}

pub fn normal_equations(samples: &[PredictionSample], weight: impl Fn(&PredictionSample) -> f64) -> Result<NormalEquations> {
    let first = samples.first().ok_or_else(|| SimError::InsufficientData("no training samples".into()))?;
    let mut ne = NormalEquations::new(first.past.len(), first.future.len());
    for s in samples {
        ne.add(&s.past, &s.future, weight(s));
    }
    Ok(ne)
}

/// Ridge least squares with penalty `lambda` on all coefficients.
pub fn fit_predictor(train: &[PredictionSample], lambda: f64) -> Result<LinearPredictor> {
    LinearPredictor::from_normal_equations(&normal_equations(train, |_| 1.0)?, lambda)
}

/// Weighted ridge least squares; `weights[k]` multiplies the loss of `train[k]`.
pub fn fit_predictor_weighted(train: &[PredictionSample], weights: &[f64], lambda: f64) -> Result<LinearPredictor> {
    if weights.len() != train.len() {
        return Err(SimError::InvalidArgument("one weight per sample".into()));
    }
    let first = train.first().ok_or_else(|| SimError::InsufficientData("no training samples".into()))?;
    let mut ne = NormalEquations::new(first.past.len(), first.future.len());
    for (s, &w) in train.iter().zip(weights) {
        ne.add(&s.past, &s.future, w);
    }
    LinearPredictor::from_normal_equations(&ne, lambda)
}

/// Mean absolute error over every target coordinate.
pub fn mae(p: &LinearPredictor, samples: &[PredictionSample]) -> Result<f64> {
    let (sum, count) = p.abs_error(samples);
    if count == 0 {
        return Err(SimError::InsufficientData("no evaluation samples".into()));
    }
    Ok(sum / count as f64)
}
