//! Stable seed derivation. Everything here is fixed arithmetic so seeds do
//! not change across platforms or toolchains.

use crate::algorithms::StreamSeeds;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit hash of (master seed, replication index, stream label).
pub fn derive_seed(master: u64, replication: u64, label: &str) -> u64 {
    let mut h = splitmix64(master);
    h = splitmix64(h ^ replication);
    for chunk in label.as_bytes().chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        h = splitmix64(h ^ u64::from_le_bytes(word));
    }
    splitmix64(h ^ label.len() as u64)
}

pub fn stream_seeds(master: u64, replication: u64) -> StreamSeeds {
    StreamSeeds {
        variation: derive_seed(master, replication, "variation"),
        selection: derive_seed(master, replication, "selection"),
        noise: derive_seed(master, replication, "noise"),
    }
}
