//! Seed derivation. Every stochastic component gets its own ChaCha stream
//! keyed by a mixed 64-bit seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a stream tag.
pub fn derive(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ mix64(tag))
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    rng_from(derive(seed, tag))
}

/// Big-endian packing of a short ASCII name.
const fn tag(name: &[u8]) -> u64 {
    let (mut v, mut i) = (0u64, 0);
    while i < name.len() {
        v = (v << 8) | name[i] as u64;
        i += 1;
    }
    v
}

// Stream tags used across modules.
pub(crate) const TAG_NOISE: u64 = tag(b"noise");
pub(crate) const TAG_MASK: u64 = tag(b"mask");
pub(crate) const TAG_INIT: u64 = tag(b"init");
pub(crate) const TAG_PAIRS: u64 = tag(b"pair");
pub(crate) const TAG_AUG: u64 = tag(b"aug");
pub(crate) const TAG_FORWARD: u64 = tag(b"fwd");
pub(crate) const TAG_EPOCH: u64 = tag(b"epoch");
pub(crate) const TAG_BANK: u64 = tag(b"bank");
pub(crate) const TAG_TOPOLOGY: u64 = tag(b"topo");
pub(crate) const TAG_SIM: u64 = tag(b"sim");
pub(crate) const TAG_RECALL: u64 = tag(b"recall");
pub(crate) const TAG_FAULTS: u64 = tag(b"fault");

#[cfg(test)]
mod tests {
    #[test]
    fn tags_pack_ascii() {
        assert_eq!(super::TAG_NOISE, 0x6e_6f69_7365);
        assert_eq!(super::TAG_FORWARD, 0x66_7764);
    }
}
