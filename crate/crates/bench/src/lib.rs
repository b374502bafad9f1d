//! Fixtures shared by the benchmarks.

use harvest_relay_core::experiments::{sample_channel, Geometry};
use harvest_relay_core::{received_powers, ChannelRealization, ReceivedPowerProfile, SystemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A reproducible channel draw at the power-sweep geometry (5 m / 10 m / 15 m).
pub fn fixture(n_antennas: usize, seed: u64) -> (SystemParams, ChannelRealization, ReceivedPowerProfile) {
    let params = SystemParams {
        n_antennas,
        ..SystemParams::default()
    };
    let geometry = Geometry { d1: 5.0, d2: 10.0, d3: 15.0 };
    let ch = sample_channel(&geometry, &params, &mut ChaCha8Rng::seed_from_u64(seed));
    let rho = received_powers(&params, &ch);
    (params, ch, rho)
}
