//! Stationarity of the summed credit at per-agent precision peaks.
//!
//! Under the mean-field factorisation each agent's credit depends on its own
//! precision only, and the effective collective free energy reduces to
//! `Σ_i ξ_i(β_i)` plus a constant. Its gradient at the vector of individual
//! peaks should therefore vanish.

use crate::coalition::{lattice_size, DividendTable};
use crate::error::Result;
use crate::shapley::shapley_from_dividends;

/// Central-difference step used by [`effective_stationarity_check`].
pub const STATIONARITY_STEP: f64 = 1e-4;

/// Largest `|∂(Σ_i ξ_i)/∂β_i|` at `peaks`, each curve a function of its own precision.
pub fn effective_stationarity_check<F: Fn(f64) -> f64>(xi_curves: &[F], peaks: &[f64]) -> f64 {
    assert_eq!(xi_curves.len(), peaks.len(), "one peak per curve");
    let h = STATIONARITY_STEP;
    xi_curves
        .iter()
        .zip(peaks)
        .map(|(f, &b)| ((f(b + h) - f(b - h)) / (2.0 * h)).abs())
        .fold(0.0, f64::max)
}

/// Maximiser of `f` on `[lo, hi]`: grid search followed by golden-section refinement
/// inside the bracketing grid cells.
pub fn locate_peak(f: impl Fn(f64) -> f64, lo: f64, hi: f64, grid: usize) -> f64 {
    assert!(hi > lo && grid >= 2);
    let dx = (hi - lo) / grid as f64;
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for k in 0..=grid {
        let v = f(lo + k as f64 * dx);
        if v > best_val {
            best_val = v;
            best = k;
        }
    }
    let mut a = lo + best.saturating_sub(1) as f64 * dx;
    let mut b = (lo + (best + 1) as f64 * dx).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a < 1e-12 {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

/// Coalition games whose dividends depend on per-agent precisions:
///
/// * `Δ({i}) = amp_i · β_i · exp(1 - β_i / tau_i)` (peak `amp_i·tau_i` at `β_i = tau_i`)
/// * `Δ({i,j}) = psi_ij + coupling · β_i β_j`
///
/// With `coupling = 0` every credit depends on its own precision only.
#[derive(Clone, Debug)]
pub struct PrecisionGameFamily {
    pub amp: Vec<f64>,
    pub tau: Vec<f64>,
    /// symmetric, zero diagonal
    pub psi: Vec<Vec<f64>>,
    pub coupling: f64,
}

impl PrecisionGameFamily {
    pub fn n_agents(&self) -> usize {
        self.amp.len()
    }

    pub fn dividends(&self, betas: &[f64]) -> Result<DividendTable<f64>> {
        let n = self.n_agents();
        let mut d = vec![0.0; lattice_size(n)];
        for i in 0..n {
            d[1 << i] = self.amp[i] * betas[i] * (1.0 - betas[i] / self.tau[i]).exp();
            for j in 0..i {
                d[1 << i | 1 << j] = self.psi[i][j] + self.coupling * betas[i] * betas[j];
            }
        }
        DividendTable::new(n, d)
    }

    /// Shapley credits at a precision profile.
    pub fn credits(&self, betas: &[f64]) -> Result<Vec<f64>> {
        Ok(shapley_from_dividends(&self.dividends(betas)?).credits)
    }

    /// `ξ_i` as a function of `β_i` with every other precision held at `betas`.
    pub fn own_curve<'a>(&'a self, i: usize, betas: &'a [f64]) -> impl Fn(f64) -> f64 + 'a {
        move |b| {
            let mut profile = betas.to_vec();
            profile[i] = b;
            self.credits(&profile).expect("table sizes are consistent")[i]
        }
    }

    /// Self-consistent individual peaks: each agent maximises its own credit
    /// with the others held at their current peaks, until nobody moves.
    pub fn locate_peaks(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = self.n_agents();
        let mut peaks = vec![0.5 * (lo + hi); n];
        for _ in 0..50 {
            let mut moved = 0.0f64;
            for i in 0..n {
                let p = locate_peak(self.own_curve(i, &peaks.clone()), lo, hi, 400);
                moved = moved.max((p - peaks[i]).abs());
                peaks[i] = p;
            }
            if moved < 1e-10 {
                break;
            }
        }
        peaks
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parabola(b: f64) -> f64 {
        -(b - 4.0).powi(2)
    }

    #[test]
    fn exact_parabolas_are_stationary_at_peak() {
        let curves = [parabola, parabola, parabola];
        assert!(effective_stationarity_check(&curves, &[4.0, 4.0, 4.0]) <= 1e-6);
    }

    #[test]
    fn displaced_agent_shows_its_slope() {
        let curves = [parabola, parabola];
        let g = effective_stationarity_check(&curves, &[4.0, 3.0]);
        assert!((g - 2.0).abs() < 1e-4);
    }

    #[test]
    fn peak_location_is_accurate() {
        let p = locate_peak(|b| -(b - 2.345_678).powi(2) + 1.0, 0.0, 10.0, 100);
        assert!((p - 2.345_678).abs() < 1e-6);
    }

    #[test]
    fn synthetic_family_peaks_are_stationary() {
        let fam = PrecisionGameFamily {
            amp: vec![1.0, 0.7, 1.3, 0.9],
            tau: vec![2.0, 3.5, 4.2, 6.0],
            psi: vec![
                vec![0.0, 0.3, -0.2, 0.1],
                vec![0.3, 0.0, 0.05, -0.4],
                vec![-0.2, 0.05, 0.0, 0.2],
                vec![0.1, -0.4, 0.2, 0.0],
            ],
            coupling: 0.0,
        };
        let peaks = fam.locate_peaks(0.1, 10.0);
        for (p, t) in peaks.iter().zip(&fam.tau) {
            assert!((p - t).abs() < 1e-5);
        }
        let curves: Vec<_> = (0..4).map(|i| fam.own_curve(i, &peaks)).collect();
        assert!(effective_stationarity_check(&curves, &peaks) <= 1e-3);
    }
}
