use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MASTER_SALT: u64 = 0x6a09_e667_f3bc_c908;

/// SplitMix64 output function; a bijection on `u64`.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one Monte Carlo trial.
///
/// For a fixed master seed the map `(point, trial) -> seed` is injective: the
/// pair is packed into one `u64`, xor-ed with a master-derived key and passed
/// through a bijective mixer. Any trial can be replayed alone from its tuple.
pub fn derive_trial_seed(master_seed: u64, grid_point: u32, trial: u32) -> u64 {
    let key = mix64(master_seed ^ MASTER_SALT);
    mix64(key ^ ((u64::from(grid_point) << 32) | u64::from(trial)))
}

/// The random stream of one trial.
pub fn trial_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
