//! Shapley credit: the dividend formula, the all-permutations average, and
//! permutation sampling.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::coalition::{lattice_size, CharacteristicFunction, DividendTable};
use crate::error::{Error, Result};
use crate::scalar::{from_usize, Ring};
use crate::seed::rng_from_seed;

/// Largest agent count for exhaustive permutation enumeration (8! = 40320).
pub const MAX_EXACT_AGENTS: usize = 8;

/// Per-agent credit `ξ_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapleyVector<T> {
    pub credits: Vec<T>,
}

impl<T: Ring> ShapleyVector<T> {
    pub fn len(&self) -> usize {
        self.credits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.credits.is_empty()
    }

    pub fn total(&self) -> T {
        self.credits.iter().fold(T::zero(), |acc, &x| acc + x)
    }
}

/// `ξ_i = Σ_{B∋i} Δ(B)/|B|`.
pub fn shapley_from_dividends<T: Ring>(d: &DividendTable<T>) -> ShapleyVector<T> {
    let n = d.n_agents();
    let mut credits = vec![T::zero(); n];
    for mask in 1..lattice_size(n) as u32 {
        let share = d.dividend(mask) / from_usize(mask.count_ones() as usize);
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            credits[i] += share;
            rest &= rest - 1;
        }
    }
    ShapleyVector { credits }
}

/// Visits every permutation of `0..n` (Heap's algorithm).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn accumulate_marginals<T: Ring>(v: &CharacteristicFunction<T>, order: &[usize], acc: &mut [T]) {
    let mut mask = 0u32;
    let mut prev = T::zero();
    for &i in order {
        mask |= 1 << i;
        let cur = v.value(mask);
        acc[i] += cur - prev;
        prev = cur;
    }
}

/// Average marginal contribution over all `N!` orderings.
pub fn shapley_exact<T: Ring>(v: &CharacteristicFunction<T>) -> Result<ShapleyVector<T>> {
    let n = v.n_agents();
    if n > MAX_EXACT_AGENTS {
        return Err(Error::TooManyAgents { n_agents: n, limit: MAX_EXACT_AGENTS });
    }
    let mut acc = vec![T::zero(); n];
    let mut count = 0usize;
    for_each_permutation(n, |p| {
        accumulate_marginals(v, p, &mut acc);
        count += 1;
    });
    let denom: T = from_usize(count);
    Ok(ShapleyVector { credits: acc.into_iter().map(|x| x / denom).collect() })
}

/// How [`shapley_monte_carlo`] draws its orderings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PermutationSampling {
    /// Independent uniform permutations.
    #[default]
    WithReplacement,
    /// Distinct permutations; asking for at least `N!` enumerates all of them.
    WithoutReplacement,
}

fn factorial(n: usize) -> Option<usize> {
    (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k))
}

/// Draws the orderings used by permutation sampling.
pub fn sample_permutations<R: Rng + ?Sized>(
    n: usize,
    n_perms: usize,
    mode: PermutationSampling,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    match mode {
        PermutationSampling::WithReplacement => (0..n_perms)
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(rng);
                p
            })
            .collect(),
        PermutationSampling::WithoutReplacement => {
            if factorial(n).is_some_and(|f| n_perms >= f) {
                let mut all = Vec::new();
                for_each_permutation(n, |p| all.push(p.to_vec()));
                return all;
            }
            let mut seen = HashSet::with_capacity(n_perms);
            let mut out = Vec::with_capacity(n_perms);
            while out.len() < n_perms {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(rng);
                if seen.insert(p.clone()) {
                    out.push(p);
                }
            }
            out
        }
    }
}

/// Permutation-sampling Shapley estimate against a value oracle keyed by mask.
///
/// The oracle is called once per prefix of each sampled ordering; callers with
/// expensive values should memoise by mask.
pub fn permutation_shapley<E>(
    n: usize,
    orders: &[Vec<usize>],
    mut value: impl FnMut(u32) -> std::result::Result<f64, E>,
) -> std::result::Result<Vec<f64>, E> {
    let mut acc = vec![0.0; n];
    let empty = value(0)?;
    for order in orders {
        let mut mask = 0u32;
        let mut prev = empty;
        for &i in order {
            mask |= 1 << i;
            let cur = value(mask)?;
            acc[i] += cur - prev;
            prev = cur;
        }
    }
    let k = orders.len().max(1) as f64;
    Ok(acc.into_iter().map(|x| x / k).collect())
}

/// Unbiased Monte Carlo Shapley estimate from `n_perms` orderings; deterministic given `seed`.
pub fn shapley_monte_carlo<T: Ring>(
    v: &CharacteristicFunction<T>,
    n_perms: usize,
    seed: u64,
    mode: PermutationSampling,
) -> Result<ShapleyVector<T>> {
    if n_perms == 0 {
        return Err(Error::InvalidArgument("n_perms must be at least 1".into()));
    }
    let n = v.n_agents();
    let mut rng = rng_from_seed(seed);
    let orders = sample_permutations(n, n_perms, mode, &mut rng);
    let mut acc = vec![T::zero(); n];
    for order in &orders {
        accumulate_marginals(v, order, &mut acc);
    }
    let denom: T = from_usize(orders.len());
    Ok(ShapleyVector { credits: acc.into_iter().map(|x| x / denom).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobius::mobius_dividends;
    use num_rational::Rational64;
    use proptest::prelude::{any, prop_assert, proptest};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_game(n: usize, seed: u64) -> CharacteristicFunction<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CharacteristicFunction::from_fn(n, |_| rng.random_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn two_player_dividend_credit() {
        let v = CharacteristicFunction::new(2, vec![0.0, 1.0, 2.0, 4.0]).unwrap();
        let xi = shapley_from_dividends(&mobius_dividends(&v).unwrap());
        assert_eq!(xi.credits, vec![1.5, 2.5]);
        assert_eq!(xi.total(), 4.0);
    }

    #[test]
    fn symmetric_game_splits_evenly() {
        let v = CharacteristicFunction::from_fn(4, |c| (c.len() as f64).powi(2) + 0.5).unwrap();
        let xi = shapley_from_dividends(&mobius_dividends(&v).unwrap());
        for x in &xi.credits {
            assert!((x - v.grand_value() / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_additive_and_unanimity() {
        let w = [0.5, -1.0, 2.0, 3.25];
        let v = CharacteristicFunction::from_fn(4, |c| c.members().map(|i| w[i]).sum::<f64>()).unwrap();
        assert_eq!(shapley_exact(&v).unwrap().credits, w.to_vec());

        let u = CharacteristicFunction::from_fn(3, |c| Rational64::from(if c.len() == 3 { 1 } else { 0 }))
            .unwrap();
        let xi = shapley_exact(&u).unwrap();
        assert_eq!(xi.credits, vec![Rational64::new(1, 3); 3]);
    }

    #[test]
    fn exact_rejects_large_games() {
        let v = CharacteristicFunction::from_fn(9, |c| c.len() as f64).unwrap();
        assert!(matches!(shapley_exact(&v), Err(Error::TooManyAgents { .. })));
    }

    #[test]
    fn dividend_path_matches_permutations() {
        for seed in 0..20 {
            let v = random_game(5, seed);
            let a = shapley_from_dividends(&mobius_dividends(&v).unwrap());
            let b = shapley_exact(&v).unwrap();
            for (x, y) in a.credits.iter().zip(&b.credits) {
                assert!((x - y).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn dividend_path_is_exact_over_rationals() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = CharacteristicFunction::from_fn(4, |_| Rational64::new(rng.random_range(-50..50), 6)).unwrap();
        assert_eq!(shapley_from_dividends(&mobius_dividends(&v).unwrap()), shapley_exact(&v).unwrap());
    }

    #[test]
    fn monte_carlo_additive_is_exact() {
        let w = [1.0, 2.0, -0.5];
        let v = CharacteristicFunction::from_fn(3, |c| c.members().map(|i| w[i]).sum::<f64>()).unwrap();
        for n_perms in [1, 3, 17] {
            let xi = shapley_monte_carlo(&v, n_perms, 11, PermutationSampling::WithReplacement).unwrap();
            for (x, y) in xi.credits.iter().zip(&w) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monte_carlo_exhaustive_without_replacement_is_exact() {
        let v = random_game(4, 3);
        let xi = shapley_monte_carlo(&v, 24, 0, PermutationSampling::WithoutReplacement).unwrap();
        let ex = shapley_exact(&v).unwrap();
        for (x, y) in xi.credits.iter().zip(&ex.credits) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((xi.total() - v.grand_value()).abs() < 1e-12);
    }

    #[test]
    fn distinct_sampling_returns_distinct_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let orders = sample_permutations(5, 60, PermutationSampling::WithoutReplacement, &mut rng);
        let set: HashSet<_> = orders.iter().collect();
        assert_eq!(set.len(), 60);
    }

    #[test]
    fn monte_carlo_agrees_with_exact_on_six_players() {
        let v = random_game(6, 77);
        let ex = shapley_exact(&v).unwrap();
        let mc = shapley_monte_carlo(&v, 10_000, 5, PermutationSampling::WithReplacement).unwrap();
        for (x, y) in mc.credits.iter().zip(&ex.credits) {
            assert!((x - y).abs() < 0.02, "{x} vs {y}");
        }
    }

    #[test]
    fn twenty_permutation_estimates_are_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let v = CharacteristicFunction::from_fn(6, |_| rng.random::<f64>()).unwrap();
        let ex = shapley_exact(&v).unwrap();
        let mut mean = vec![0.0; 6];
        for seed in 0..50 {
            let mc = shapley_monte_carlo(&v, 20, seed, PermutationSampling::WithReplacement).unwrap();
            for (m, x) in mean.iter_mut().zip(&mc.credits) {
                *m += x / 50.0;
            }
        }
        for (m, y) in mean.iter().zip(&ex.credits) {
            assert!((m - y).abs() < 0.05, "{m} vs {y}");
        }
    }

    #[test]
    fn dummy_player_gets_nothing() {
        // agent 2 never changes the value
        let base = random_game(2, 8);
        let v = CharacteristicFunction::from_fn(3, |c| base.value(c.mask() & 0b11)).unwrap();
        let xi = shapley_from_dividends(&mobius_dividends(&v).unwrap());
        assert!(xi.credits[2].abs() < 1e-12);
        assert!(shapley_exact(&v).unwrap().credits[2].abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn efficiency_on_every_path(n in 1usize..=6, seed in any::<u64>()) {
            let v = random_game(n, seed);
            let grand = v.grand_value();
            let d = shapley_from_dividends(&mobius_dividends(&v).unwrap());
            prop_assert!((d.total() - grand).abs() <= 1e-10);
            prop_assert!((shapley_exact(&v).unwrap().total() - grand).abs() <= 1e-10);
            let mc = shapley_monte_carlo(&v, 7, seed, PermutationSampling::WithReplacement).unwrap();
            prop_assert!((mc.total() - grand).abs() <= 1e-10);
        }

        #[test]
        fn swapping_players_swaps_credit(seed in any::<u64>()) {
            // make agents 0 and 1 interchangeable
            let base = random_game(4, seed);
            let sym = |m: u32| {
                let swapped = (m & !0b11) | ((m & 1) << 1) | ((m >> 1) & 1);
                (base.value(m) + base.value(swapped)) / 2.0
            };
            let v = CharacteristicFunction::from_fn(4, |c| sym(c.mask())).unwrap();
            let xi = shapley_exact(&v).unwrap();
            prop_assert!((xi.credits[0] - xi.credits[1]).abs() < 1e-12);
        }
    }
}
