//! Counter-based random substreams.
//!
//! Every round draws from its own ChaCha stream selected by the round id, so
//! the values a round sees depend only on `(master_seed, round_id)` and never
//! on how rounds are batched across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RoundRng = ChaCha8Rng;

/// Independent generator for one round.
pub fn round_rng(master_seed: u64, round_id: u64) -> RoundRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(round_id);
    rng
}

/// Derives a distinct master seed for a named sub-experiment so that, for
/// instance, two sweep points never share round streams.
pub fn derive_seed(master_seed: u64, label: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = master_seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
