//! Shared fixtures for the precoder benchmarks.

use secure_mimo::channel::{estimate_channels, sample_realization};
use secure_mimo::{ChannelEstimate, SystemConfig};

/// A simplified-model system with estimates drawn from a fixed seed.
pub struct Fixture {
    pub config: SystemConfig,
    pub estimate: ChannelEstimate,
}

pub fn fixture(cells: usize, users: usize, antennas: usize) -> Fixture {
    let config = SystemConfig::simplified(cells, users, antennas, antennas / 10, 10.0, 0.75, 0.3);
    let estimate = estimate_channels(&sample_realization(&config, 11, 0), &config);
    Fixture { config, estimate }
}
