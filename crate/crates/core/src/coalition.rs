//! Coalitions as bitmasks and the tables indexed by them.

use std::fmt::Display;
use std::io::{Read, Write};
use std::ops::Index;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Ring;

/// Largest agent count for which the full lattice of `2^N` coalitions is enumerated.
pub const MAX_AGENTS: usize = 20;

pub(crate) fn check_agents(n_agents: usize) -> Result<()> {
    if n_agents > MAX_AGENTS {
        return Err(Error::TooManyAgents { n_agents, limit: MAX_AGENTS });
    }
    Ok(())
}

/// Number of coalitions over `n_agents` agents.
#[inline]
pub fn lattice_size(n_agents: usize) -> usize {
    1usize << n_agents
}

/// A subset of the agents `0..n_agents`, stored as a bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition {
    mask: u32,
    n_agents: u8,
}

impl Coalition {
    pub fn new(mask: u32, n_agents: usize) -> Result<Self> {
        check_agents(n_agents)?;
        if mask >> n_agents != 0 {
            return Err(Error::MaskOutOfRange { mask, n_agents });
        }
        Ok(Self { mask, n_agents: n_agents as u8 })
    }

    pub fn empty(n_agents: usize) -> Result<Self> {
        Self::new(0, n_agents)
    }

    pub fn grand(n_agents: usize) -> Result<Self> {
        check_agents(n_agents)?;
        Self::new(((1u64 << n_agents) - 1) as u32, n_agents)
    }

    pub fn from_members(members: &[usize], n_agents: usize) -> Result<Self> {
        check_agents(n_agents)?;
        let mut mask = 0u32;
        for &i in members {
            if i >= n_agents {
                return Err(Error::InvalidArgument(format!(
                    "agent {i} out of range for {n_agents} agents"
                )));
            }
            mask |= 1 << i;
        }
        Self::new(mask, n_agents)
    }

    #[inline]
    pub fn mask(self) -> u32 {
        self.mask
    }

    #[inline]
    pub fn n_agents(self) -> usize {
        self.n_agents as usize
    }

    #[inline]
    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    #[inline]
    pub fn contains(self, agent: usize) -> bool {
        agent < 32 && self.mask >> agent & 1 == 1
    }

    pub fn with(self, agent: usize) -> Self {
        debug_assert!(agent < self.n_agents());
        Self { mask: self.mask | 1 << agent, ..self }
    }

    pub fn without(self, agent: usize) -> Self {
        Self { mask: self.mask & !(1 << agent), ..self }
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        let mask = self.mask;
        (0..32usize).filter(move |&i| mask >> i & 1 == 1)
    }

    /// All subsets of this coalition, including the empty set and itself.
    pub fn subsets(self) -> Submasks {
        Submasks { full: self.mask, next: Some(self.mask) }
    }
}

/// Iterator over the submasks of a mask in decreasing numeric order.
#[derive(Clone, Debug)]
pub struct Submasks {
    full: u32,
    next: Option<u32>,
}

impl Iterator for Submasks {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        let cur = self.next?;
        self.next = if cur == 0 { None } else { Some((cur - 1) & self.full) };
        Some(cur)
    }
}

/// Submasks of `mask` (including 0 and `mask`).
pub fn submasks(mask: u32) -> Submasks {
    Submasks { full: mask, next: Some(mask) }
}

fn check_table_len(n_agents: usize, len: usize) -> Result<()> {
    check_agents(n_agents)?;
    if len != lattice_size(n_agents) {
        return Err(Error::TableSize { n_agents, len });
    }
    Ok(())
}

/// Coalition value table `v(C)` over all `2^N` coalitions, with `v(∅) = 0`.
///
/// This is also the general "set function" type consumed by the Möbius
/// transform; any table vanishing on the empty set qualifies.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicFunction<T> {
    n_agents: usize,
    values: Vec<T>,
}

impl<T: Ring> CharacteristicFunction<T> {
    pub fn new(n_agents: usize, values: Vec<T>) -> Result<Self> {
        check_table_len(n_agents, values.len())?;
        if values[0] != T::zero() {
            return Err(Error::NonZeroEmpty);
        }
        Ok(Self { n_agents, values })
    }

    /// Tabulates `f` on every non-empty coalition; `v(∅)` is fixed at zero.
    pub fn from_fn(n_agents: usize, mut f: impl FnMut(Coalition) -> T) -> Result<Self> {
        check_agents(n_agents)?;
        let values = (0..lattice_size(n_agents) as u32)
            .map(|m| if m == 0 { T::zero() } else { f(Coalition { mask: m, n_agents: n_agents as u8 }) })
            .collect();
        Ok(Self { n_agents, values })
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn value(&self, mask: u32) -> T {
        self.values[mask as usize]
    }

    pub fn grand_value(&self) -> T {
        self.values[lattice_size(self.n_agents) - 1]
    }

    /// Energy table `E(C) = -v(C)` tagged with the inverse temperature it was evaluated at.
    pub fn to_energy_table(&self, beta: T) -> EnergyTable<T> {
        EnergyTable {
            n_agents: self.n_agents,
            energies: self.values.iter().map(|&v| T::zero() - v).collect(),
            beta,
        }
    }

    pub(crate) fn into_values(self) -> Vec<T> {
        self.values
    }
}

impl<T> Index<u32> for CharacteristicFunction<T> {
    type Output = T;
    fn index(&self, mask: u32) -> &T {
        &self.values[mask as usize]
    }
}

impl<T: Ring + Display + FromStr> CharacteristicFunction<T> {
    /// Writes `mask,value` rows under a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_mask_csv(out, "value", &self.values)
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let (n, values) = read_mask_csv(input)?;
        Self::new(n, values)
    }
}

/// Energies `E(C;β)` over the coalition lattice. `β` is carried as metadata:
/// callers supply energies already evaluated at that precision.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyTable<T> {
    n_agents: usize,
    energies: Vec<T>,
    beta: T,
}

impl<T: Ring> EnergyTable<T> {
    pub fn new(n_agents: usize, energies: Vec<T>, beta: T) -> Result<Self> {
        check_table_len(n_agents, energies.len())?;
        Ok(Self { n_agents, energies, beta })
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn with_beta(mut self, beta: T) -> Self {
        self.beta = beta;
        self
    }
}

/// Harsanyi dividends `Δ(B)`: the irreducible synergy of exactly the set `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct DividendTable<T> {
    n_agents: usize,
    dividends: Vec<T>,
}

impl<T: Ring> DividendTable<T> {
    pub fn new(n_agents: usize, dividends: Vec<T>) -> Result<Self> {
        check_table_len(n_agents, dividends.len())?;
        if dividends[0] != T::zero() {
            return Err(Error::NonZeroEmpty);
        }
        Ok(Self { n_agents, dividends })
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn dividends(&self) -> &[T] {
        &self.dividends
    }

    #[inline]
    pub fn dividend(&self, mask: u32) -> T {
        self.dividends[mask as usize]
    }

    /// Zeroes every dividend of order greater than `max_order`.
    pub fn truncated(&self, max_order: usize) -> Self {
        let dividends = self
            .dividends
            .iter()
            .enumerate()
            .map(|(m, &d)| if (m as u32).count_ones() as usize <= max_order { d } else { T::zero() })
            .collect();
        Self { n_agents: self.n_agents, dividends }
    }

    pub(crate) fn into_values(self) -> Vec<T> {
        self.dividends
    }
}

impl<T> Index<u32> for DividendTable<T> {
    type Output = T;
    fn index(&self, mask: u32) -> &T {
        &self.dividends[mask as usize]
    }
}

impl<T: Ring + Display + FromStr> DividendTable<T> {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_mask_csv(out, "value", &self.dividends)
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let (n, values) = read_mask_csv(input)?;
        Self::new(n, values)
    }
}

fn write_mask_csv<W: Write, T: Display>(out: W, column: &str, values: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mask", column])?;
    for (m, v) in values.iter().enumerate() {
        w.write_record([m.to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

fn read_mask_csv<R: Read, T: Ring + FromStr>(input: R) -> Result<(usize, Vec<T>)> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows: Vec<(u32, T)> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| Error::Csv(format!("row {}: bad {what}", line + 2));
        let mask: u32 = rec.get(0).ok_or_else(|| bad("mask"))?.trim().parse().map_err(|_| bad("mask"))?;
        let value: T = rec.get(1).ok_or_else(|| bad("value"))?.trim().parse().map_err(|_| bad("value"))?;
        rows.push((mask, value));
    }
    let len = rows.len();
    if !len.is_power_of_two() {
        return Err(Error::Csv(format!("{len} rows is not a power of two")));
    }
    let n = len.trailing_zeros() as usize;
    let mut values = vec![T::zero(); len];
    let mut seen = vec![false; len];
    for (mask, v) in rows {
        let idx = mask as usize;
        if idx >= len || seen[idx] {
            return Err(Error::Csv(format!("mask {mask} duplicated or out of range")));
        }
        seen[idx] = true;
        values[idx] = v;
    }
    Ok((n, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn submask_enumeration_is_complete() {
        let subs: Vec<u32> = submasks(0b1011).collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|&s| s & !0b1011 == 0));
        assert_eq!(submasks(0).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn coalition_bounds() {
        assert!(Coalition::new(0b100, 2).is_err());
        assert!(Coalition::new(0, 21).is_err());
        let c = Coalition::from_members(&[0, 2], 3).unwrap();
        assert_eq!(c.mask(), 0b101);
        assert_eq!(c.members().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(Coalition::grand(20).unwrap().len(), 20);
    }

    #[test]
    fn characteristic_function_rejects_nonzero_empty() {
        assert_eq!(CharacteristicFunction::new(1, vec![1.0, 2.0]), Err(Error::NonZeroEmpty));
        assert!(matches!(CharacteristicFunction::new(2, vec![0.0; 3]), Err(Error::TableSize { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let v = CharacteristicFunction::new(2, vec![0.0, 1.0, 2.0, 4.5]).unwrap();
        let mut buf = Vec::new();
        v.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("mask,value\n0,0\n1,1\n"));
        assert_eq!(CharacteristicFunction::read_csv(buf.as_slice()).unwrap(), v);
    }
}
