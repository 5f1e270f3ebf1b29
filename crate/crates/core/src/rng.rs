//! Seed handling.
//!
//! One master seed drives a run. Each consumer gets its own ChaCha8 stream
//! derived from that seed, so the draws seen by one consumer never depend on
//! how many draws another consumer made:
//!
//! | stream        | consumer                                         |
//! |---------------|--------------------------------------------------|
//! | `Init`        | model parameter initialization                   |
//! | `Environment` | topology, LoS flags, UE activity and protection  |
//! | `Exploration` | ε-greedy coin and random action, scripted random policy |
//! | `Replay`      | replay-buffer minibatch indices                  |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init = 0,
    Environment = 1,
    Exploration = 2,
    Replay = 3,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
