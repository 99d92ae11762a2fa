//! Pairwise-truncated coalition energies under a factorised Bernoulli
//! posterior: the mean-field free energy, its logistic fixed point, and the
//! softmax (attention) form of the same update.

use crate::coalition::{lattice_size, Coalition, DividendTable, EnergyTable};
use crate::error::{Error, Result};
use crate::gibbs::check_beta;
use crate::scalar::{log_sum_exp, sigmoid, Real};

const Q_CLAMP: f64 = 1e-12;

/// `E(C) ≈ Σ_{i∈C} φ_i + Σ_{{i,j}⊆C} ψ_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseEnergyModel<T> {
    phi: Vec<T>,
    /// row-major `N×N`, symmetric, zero diagonal
    psi: Vec<T>,
    beta: T,
}

impl<T: Real> PairwiseEnergyModel<T> {
    pub fn new(phi: Vec<T>, psi: Vec<Vec<T>>, beta: T) -> Result<Self> {
        check_beta(beta)?;
        let n = phi.len();
        if psi.len() != n || psi.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("psi must be N×N".into()));
        }
        for i in 0..n {
            if psi[i][i] != T::zero() {
                return Err(Error::InvalidArgument(format!("psi[{i}][{i}] must be zero")));
            }
            for j in 0..i {
                if psi[i][j] != psi[j][i] {
                    return Err(Error::InvalidArgument(format!("psi not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { phi, psi: psi.into_iter().flatten().collect(), beta })
    }

    /// Unary terms from order-1 dividends and pairwise terms from order-2 dividends.
    pub fn from_dividends(d: &DividendTable<T>, beta: T) -> Result<Self> {
        let n = d.n_agents();
        let phi = (0..n).map(|i| d.dividend(1 << i)).collect();
        let psi = (0..n)
            .map(|i| (0..n).map(|j| if i == j { T::zero() } else { d.dividend(1 << i | 1 << j) }).collect())
            .collect();
        Self::new(phi, psi, beta)
    }

    pub fn n_agents(&self) -> usize {
        self.phi.len()
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    #[inline]
    pub fn psi(&self, i: usize, j: usize) -> T {
        self.psi[i * self.phi.len() + j]
    }

    /// `φ_i + Σ_j ψ_ij q_j`: the mean field felt by agent `i`.
    pub fn local_field(&self, q: &[T], i: usize) -> T {
        let n = self.n_agents();
        let row = &self.psi[i * n..(i + 1) * n];
        row.iter().zip(q).fold(self.phi[i], |s, (&p, &qj)| s + p * qj)
    }

    /// Tabulates the truncated energy on every coalition.
    pub fn energy_table(&self) -> Result<EnergyTable<T>> {
        let n = self.n_agents();
        let energies = (0..lattice_size(n) as u32)
            .map(|m| pairwise_energy(self, Coalition::new(m, n).expect("mask in range")))
            .collect();
        EnergyTable::new(n, energies, self.beta)
    }
}

pub fn pairwise_energy<T: Real>(m: &PairwiseEnergyModel<T>, c: Coalition) -> T {
    let members: Vec<usize> = c.members().collect();
    let mut e = T::zero();
    for (k, &i) in members.iter().enumerate() {
        e = e + m.phi[i];
        for &j in &members[k + 1..] {
            e = e + m.psi(i, j);
        }
    }
    e
}

fn check_marginals<T: Real>(q: &[T], n: usize) -> Result<()> {
    if q.len() != n {
        return Err(Error::InvalidArgument(format!("expected {n} marginals, got {}", q.len())));
    }
    if let Some((index, &value)) = q.iter().enumerate().find(|(_, &x)| !(x > T::zero() && x < T::one())) {
        return Err(Error::MarginalOutOfRange { index, value: value.as_f64() });
    }
    Ok(())
}

fn neg_entropy_term<T: Real>(q: T) -> T {
    let lo = T::lit(Q_CLAMP);
    let q = q.max(lo).min(T::one() - lo);
    q * q.ln() + (T::one() - q) * (T::one() - q).ln()
}

/// `Σφ_i q_i + Σ_{i<j} ψ_ij q_i q_j + (1/β) Σ [q ln q + (1-q) ln(1-q)]`.
pub fn meanfield_free_energy<T: Real>(q: &[T], m: &PairwiseEnergyModel<T>) -> Result<T> {
    let n = m.n_agents();
    check_marginals(q, n)?;
    let mut f = T::zero();
    for i in 0..n {
        f = f + m.phi[i] * q[i] + neg_entropy_term(q[i]) / m.beta;
        for j in i + 1..n {
            f = f + m.psi(i, j) * q[i] * q[j];
        }
    }
    Ok(f)
}

/// Analytic gradient `φ_i + Σ_{j≠i} ψ_ij q_j + (1/β) ln(q_i / (1-q_i))`.
pub fn meanfield_gradient<T: Real>(q: &[T], m: &PairwiseEnergyModel<T>) -> Result<Vec<T>> {
    check_marginals(q, m.n_agents())?;
    Ok((0..m.n_agents())
        .map(|i| m.local_field(q, i) + (q[i] / (T::one() - q[i])).ln() / m.beta)
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanFieldState<T> {
    pub q: Vec<T>,
    /// `max_i |q_i - σ(-β φ_i - β Σ_j ψ_ij q_j)|` at return
    pub residual: T,
    pub iterations: usize,
}

/// Result of the damped fixed-point iteration. Failure to reach the tolerance
/// is a legitimate outcome for strong couplings and is reported, not hidden.
#[derive(Clone, Debug, PartialEq)]
pub enum MeanFieldOutcome<T> {
    Converged(MeanFieldState<T>),
    NotConverged(MeanFieldState<T>),
}

impl<T> MeanFieldOutcome<T> {
    pub fn state(&self) -> &MeanFieldState<T> {
        match self {
            Self::Converged(s) | Self::NotConverged(s) => s,
        }
    }

    pub fn converged(&self) -> bool {
        matches!(self, Self::Converged(_))
    }
}

fn logistic_targets<T: Real>(m: &PairwiseEnergyModel<T>, q: &[T], out: &mut [T]) -> T {
    let mut residual = T::zero();
    for i in 0..m.n_agents() {
        out[i] = sigmoid(-m.beta * m.local_field(q, i));
        residual = residual.max((q[i] - out[i]).abs());
    }
    residual
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointOptions<T> {
    pub tol: T,
    pub max_iter: usize,
    pub damping: T,
}

impl<T: Real> Default for FixedPointOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-10), max_iter: 10_000, damping: T::lit(0.5) }
    }
}

/// Damped synchronous iteration `q ← (1-d) q + d σ(-β φ - β ψ q)` from `init_q`
/// (all 0.5 when `None`).
pub fn meanfield_fixed_point<T: Real>(
    m: &PairwiseEnergyModel<T>,
    init_q: Option<&[T]>,
    opts: FixedPointOptions<T>,
) -> Result<MeanFieldOutcome<T>> {
    let n = m.n_agents();
    if !(opts.tol > T::zero()) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if !(opts.damping > T::zero() && opts.damping <= T::one()) {
        return Err(Error::InvalidArgument("damping must lie in (0, 1]".into()));
    }
    let mut q = match init_q {
        Some(q0) => {
            check_marginals(q0, n)?;
            q0.to_vec()
        }
        None => vec![T::lit(0.5); n],
    };
    let mut target = vec![T::zero(); n];
    let mut residual = logistic_targets(m, &q, &mut target);
    let mut iterations = 0;
    while residual >= opts.tol && iterations < opts.max_iter {
        for (qi, &ti) in q.iter_mut().zip(&target) {
            *qi = (T::one() - opts.damping) * *qi + opts.damping * ti;
        }
        iterations += 1;
        residual = logistic_targets(m, &q, &mut target);
    }
    let state = MeanFieldState { q, residual, iterations };
    Ok(if residual < opts.tol { MeanFieldOutcome::Converged(state) } else { MeanFieldOutcome::NotConverged(state) })
}

/// Softmax over agents of `-β φ_i - β Σ_j ψ_ij q_j`.
pub fn attention_weights<T: Real>(m: &PairwiseEnergyModel<T>, q: &[T]) -> Result<Vec<T>> {
    if q.len() != m.n_agents() {
        return Err(Error::InvalidArgument("marginal count mismatch".into()));
    }
    let logits: Vec<T> = (0..m.n_agents()).map(|i| -m.beta * m.local_field(q, i)).collect();
    let lse = log_sum_exp(&logits);
    Ok(logits.into_iter().map(|l| (l - lse).exp()).collect())
}
