//! Gibbs posterior over coalitions and the collective free energy it minimises.

use crate::coalition::EnergyTable;
use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Real};

/// `P*(C) = exp(-β E(C)) / Z` over the coalition lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsDistribution<T> {
    pub probs: Vec<T>,
    /// `ln Z`
    pub log_partition: T,
}

impl<T: Real> GibbsDistribution<T> {
    /// Mass on the coalitions attaining the minimum energy, `tol` apart at most.
    pub fn mass_on_minimizers(&self, energies: &[T], tol: T) -> T {
        let min = energies.iter().copied().fold(T::infinity(), T::min);
        self.probs
            .iter()
            .zip(energies)
            .filter(|(_, &e)| e - min <= tol)
            .fold(T::zero(), |acc, (&p, _)| acc + p)
    }

    /// Most probable coalition mask, lowest index on ties.
    pub fn mode(&self) -> u32 {
        let mut best = 0usize;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best as u32
    }
}

pub(crate) fn check_beta<T: Real>(beta: T) -> Result<()> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(Error::InvalidBeta(beta.as_f64()));
    }
    Ok(())
}

pub fn gibbs_distribution<T: Real>(e: &EnergyTable<T>) -> Result<GibbsDistribution<T>> {
    let beta = e.beta();
    check_beta(beta)?;
    if let Some(i) = e.energies().iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let logits: Vec<T> = e.energies().iter().map(|&x| -beta * x).collect();
    let log_partition = log_sum_exp(&logits);
    let probs = logits.iter().map(|&l| (l - log_partition).exp()).collect();
    Ok(GibbsDistribution { probs, log_partition })
}

/// Shannon entropy in nats with `0 ln 0 = 0`.
pub fn entropy<T: Real>(p: &[T]) -> T {
    p.iter()
        .filter(|&&x| x > T::zero())
        .fold(T::zero(), |acc, &x| acc - x * x.ln())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeEnergyReport<T> {
    pub expected_energy: T,
    /// nats
    pub entropy: T,
    pub free_energy: T,
    pub beta: T,
}

/// `F(p) = Σ p E - H(p)/β`.
pub fn collective_free_energy<T: Real>(p: &[T], e: &EnergyTable<T>) -> Result<FreeEnergyReport<T>> {
    let beta = e.beta();
    check_beta(beta)?;
    if p.len() != e.energies().len() {
        return Err(Error::LengthMismatch { probs: p.len(), energies: e.energies().len() });
    }
    if let Some(i) = p.iter().position(|&x| !x.is_finite() || x < T::zero()) {
        return Err(Error::NonFinite(i));
    }
    let sum = p.iter().fold(T::zero(), |a, &x| a + x);
    if (sum - T::one()).abs().as_f64() > 1e-9 {
        return Err(Error::Unnormalized { sum: sum.as_f64() });
    }
    let expected_energy = p.iter().zip(e.energies()).fold(T::zero(), |a, (&pi, &ei)| a + pi * ei);
    let h = entropy(p);
    Ok(FreeEnergyReport { expected_energy, entropy: h, free_energy: expected_energy - h / beta, beta })
}
