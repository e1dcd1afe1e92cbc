//! Explicitly seeded generators with platform-independent streams.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// xoshiro256** with SplitMix64 state expansion. Default.
    Xoshiro256StarStar,
    SplitMix64,
}

impl Algorithm {
    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Xoshiro256StarStar => "xoshiro256starstar",
            Algorithm::SplitMix64 => "splitmix64",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "xoshiro256starstar" | "xoshiro256**" => Ok(Algorithm::Xoshiro256StarStar),
            "splitmix64" => Ok(Algorithm::SplitMix64),
            other => Err(Error::Config(format!("unknown generator `{other}`"))),
        }
    }
}

/// One SplitMix64 output step; also used as a seed mixer.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a seed path, e.g. `(master, param index, rep)`.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut state = 0x6A09_E667_F3BC_C909u64;
    let mut out = 0;
    for &p in parts {
        state ^= p;
        out = splitmix64(&mut state);
        state = out;
    }
    out
}

/// A single-owner generator; clone it to fork an identical stream.
#[derive(Clone)]
pub struct RngHandle {
    algorithm: Algorithm,
    seed: u64,
    state: [u64; 4],
}

impl fmt::Debug for RngHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RngHandle")
            .field("algorithm", &self.algorithm)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

impl RngHandle {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        let state = match algorithm {
            Algorithm::Xoshiro256StarStar => {
                let mut sm = seed;
                [
                    splitmix64(&mut sm),
                    splitmix64(&mut sm),
                    splitmix64(&mut sm),
                    splitmix64(&mut sm),
                ]
            }
            Algorithm::SplitMix64 => [seed, 0, 0, 0],
        };
        Self { algorithm, seed, state }
    }

    pub fn seeded(seed: u64) -> Self {
        Self::new(Algorithm::Xoshiro256StarStar, seed)
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        match self.algorithm {
            Algorithm::Xoshiro256StarStar => {
                let s = &mut self.state;
                let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
                let t = s[1] << 17;
                s[2] ^= s[0];
                s[3] ^= s[1];
                s[1] ^= s[2];
                s[0] ^= s[3];
                s[2] ^= t;
                s[3] = s[3].rotate_left(45);
                result
            }
            Algorithm::SplitMix64 => splitmix64(&mut self.state[0]),
        }
    }

    /// Uniform on the 2⁻⁵³ midpoint lattice, so the value is in [0, 1) and
    /// never exactly 0. Quantile functions and `ln` can consume it directly.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * TWO_POW_M53
    }
}
