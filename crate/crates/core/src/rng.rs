//! Reproducible random streams.
//!
//! A [`SeedStream`] names a ChaCha8 keystream by `(master_seed, stream_index)`.
//! The master seed is expanded into the 256-bit key and the index selects the
//! 64-bit ChaCha stream id, so distinct indices never share keystream blocks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Derive the stream used for child `index` (e.g. one replication).
    ///
    /// The child lives under a new master seed mixed from this stream's
    /// coordinates, so the children of different parents do not collide.
    pub fn child(&self, index: u64) -> SeedStream {
        let master =
            splitmix64(self.master_seed ^ splitmix64(self.stream_index ^ 0x5EED_57E4_A11C_E5ED));
        SeedStream::new(master, index)
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_coordinates_same_output() {
        let a: Vec<u64> = (0..8)
            .map({
                let mut r = SeedStream::new(7, 3).rng();
                move |_| r.random()
            })
            .collect();
        let b: Vec<u64> = (0..8)
            .map({
                let mut r = SeedStream::new(7, 3).rng();
                move |_| r.random()
            })
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_streams_differ() {
        let mut r0 = SeedStream::new(7, 0).rng();
        let mut r1 = SeedStream::new(7, 1).rng();
        let a: u64 = r0.random();
        let b: u64 = r1.random();
        assert_ne!(a, b);
        assert_ne!(
            SeedStream::new(7, 0).child(0),
            SeedStream::new(7, 1).child(0)
        );
    }

    #[test]
    fn streams_look_uncorrelated() {
        let mut r0 = SeedStream::new(11, 0).rng();
        let mut r1 = SeedStream::new(11, 1).rng();
        let n = 100_000;
        let mut sxy = 0.0;
        for _ in 0..n {
            let x: f64 = r0.random::<f64>() - 0.5;
            let y: f64 = r1.random::<f64>() - 0.5;
            sxy += x * y;
        }
        // correlation SE is 1/sqrt(n) once scaled by var = 1/12
        let corr = sxy / n as f64 * 12.0;
        assert!(corr.abs() < 5.0 / (n as f64).sqrt(), "corr {corr}");
    }
}
