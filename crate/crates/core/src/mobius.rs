//! Zeta and Möbius transforms on the subset lattice.
//!
//! Both run in place in `O(N·2^N)`: for every agent bit, each table entry whose
//! mask contains that bit absorbs (or releases) the entry without it.

use crate::coalition::{check_agents, lattice_size, CharacteristicFunction, DividendTable};
use crate::error::{Error, Result};
use crate::scalar::Ring;

fn check_len(len: usize) -> Result<usize> {
    if !len.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("table length {len} is not a power of two")));
    }
    let n = len.trailing_zeros() as usize;
    check_agents(n)?;
    Ok(n)
}

/// `f(C) ← Σ_{B⊆C} f(B)`.
pub fn zeta_in_place<T: Ring>(table: &mut [T]) -> Result<()> {
    let n = check_len(table.len())?;
    for bit in 0..n {
        let step = 1usize << bit;
        for block in table.chunks_exact_mut(step * 2) {
            let (lo, hi) = block.split_at_mut(step);
            for (h, &l) in hi.iter_mut().zip(lo.iter()) {
                *h += l;
            }
        }
    }
    Ok(())
}

/// `g(C) ← Σ_{A⊆C} (-1)^{|C|-|A|} g(A)`; inverse of [`zeta_in_place`].
pub fn mobius_in_place<T: Ring>(table: &mut [T]) -> Result<()> {
    let n = check_len(table.len())?;
    for bit in 0..n {
        let step = 1usize << bit;
        for block in table.chunks_exact_mut(step * 2) {
            let (lo, hi) = block.split_at_mut(step);
            for (h, &l) in hi.iter_mut().zip(lo.iter()) {
                *h -= l;
            }
        }
    }
    Ok(())
}

/// Harsanyi dividends of a set function vanishing on the empty coalition.
pub fn mobius_dividends<T: Ring>(f: &CharacteristicFunction<T>) -> Result<DividendTable<T>> {
    let n = f.n_agents();
    let mut table = f.clone().into_values();
    mobius_in_place(&mut table)?;
    // Exact in any ring: the empty entry is never touched.
    debug_assert!(table[0] == T::zero());
    DividendTable::new(n, table)
}

/// Rebuilds `f(C) = Σ_{B⊆C} Δ(B)` from dividends.
pub fn reconstruct_setfunction<T: Ring>(d: &DividendTable<T>) -> Result<CharacteristicFunction<T>> {
    let n = d.n_agents();
    debug_assert_eq!(d.dividends().len(), lattice_size(n));
    let mut table = d.clone().into_values();
    zeta_in_place(&mut table)?;
    CharacteristicFunction::new(n, table)
}
