use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Counter-based random streams keyed by `(master seed, SNR index, trial index)`.
///
/// The master seed fixes the ChaCha key; the cell and trial indices select
/// the stream, so any trial can be regenerated independently of the order
/// or thread on which trials run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeder {
    key: [u8; 32],
}

const TRIAL_BITS: u32 = 40;

impl TrialSeeder {
    pub fn new(master: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = master;
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self { key }
    }

    pub fn rng(&self, cell: usize, trial: u64) -> ChaCha8Rng {
        debug_assert!(trial < 1 << TRIAL_BITS);
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(((cell as u64) << TRIAL_BITS) | trial);
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
