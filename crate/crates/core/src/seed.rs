//! Seed derivation and the generator used throughout the workspace.
//!
//! Every stochastic routine takes a `u64` seed and builds a [`SimRng`] from
//! it. Independent streams for experiment cells come from [`derive_seed`]:
//!
//! ```text
//! seed = u64::from_le_bytes(SHA-256(b"synergy/v1" || master_le64 || len_le64(tag) || tag || cell_le64)[0..8])
//! ```
//!
//! The mapping is stable across builds and platforms. Generator output is
//! only guaranteed stable within one build of this workspace.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Counter-based generator shared by all simulations.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Stream seed for `(experiment tag, cell index)` under a master seed.
pub fn derive_seed(master_seed: u64, tag: &str, cell_index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(b"synergy/v1");
    h.update(master_seed.to_le_bytes());
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag.as_bytes());
    h.update(cell_index.to_le_bytes());
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn stable_and_distinct() {
        assert_eq!(derive_seed(7, "sweep", 3), derive_seed(7, "sweep", 3));
        assert_ne!(derive_seed(7, "sweep", 3), derive_seed(7, "sweep", 4));
        assert_ne!(derive_seed(7, "sweep", 3), derive_seed(8, "sweep", 3));
        assert_ne!(derive_seed(7, "a", 0), derive_seed(7, "b", 0));
        // tag/cell boundaries cannot alias thanks to the length prefix
        assert_ne!(derive_seed(0, "a1", 0), derive_seed(0, "a", 0x31));
    }

    #[test]
    fn no_collisions_in_ten_thousand_cells() {
        let seeds: HashSet<u64> = (0..10_000).map(|c| derive_seed(42, "grid", c)).collect();
        assert_eq!(seeds.len(), 10_000);
    }

    #[test]
    fn low_bits_are_uniform_across_tags() {
        // chi-square on the low 4 bits, 16 bins, 15 dof; 99.9% quantile is 37.7
        for tag in ["sweep", "vicsek", "marl"] {
            let mut bins = [0u32; 16];
            let n = 16_000u64;
            for c in 0..n {
                bins[(derive_seed(1, tag, c) & 0xf) as usize] += 1;
            }
            let expect = n as f64 / 16.0;
            let chi2: f64 = bins.iter().map(|&b| (b as f64 - expect).powi(2) / expect).sum();
            assert!(chi2 < 37.7, "tag {tag}: chi2 {chi2}");
        }
    }
}
