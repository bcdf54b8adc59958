//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`Pcg64`] (PCG XSL-RR 128/64,
//! the `Lcg128Xsl64` generator of `rand_pcg`). A single user seed is fanned out
//! into independent PCG streams, one per consumer, so that adding draws in one
//! place never shifts the sequence seen by another. The generator and the
//! seeding procedure are fully specified, so results reproduce across
//! platforms.

pub use rand_pcg::Pcg64;

/// Consumers of randomness. The discriminant is the PCG stream selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Split = 1,
    Synthetic = 2,
    GnnInit = 3,
    GnnTrain = 4,
    Tpe = 5,
}

/// Returns the generator for `stream` under the user-level `seed`.
pub fn stream(seed: u64, stream: Stream) -> Pcg64 {
    let hi = splitmix64(seed);
    let lo = splitmix64(hi ^ seed);
    let state = ((hi as u128) << 64) | lo as u128;
    Pcg64::new(state, stream as u128)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
