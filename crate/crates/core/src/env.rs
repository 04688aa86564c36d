//! Stochastic environment: arm means, gaps and seeded reward sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Identity of the pseudo-random generator behind [`RngStream`]. Written into
/// the header of every output file.
pub const GENERATOR_ID: &str =
    "rand_chacha::ChaCha8Rng(seed_from_u64(master_seed), stream=stream_index)";

/// Arm means, the shared variance proxy and the target arm.
///
/// Rewards for arm `i` are Gaussian with mean `means[i]` and standard
/// deviation `sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentConfig {
    means: Vec<f64>,
    sigma: f64,
    target: usize,
}

impl EnvironmentConfig {
    /// Builds an environment. `target` is 0-based; `None` selects the last arm.
    pub fn new(means: Vec<f64>, sigma: f64, target: Option<usize>) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::Config(format!(
                "need at least 2 arms, got {}",
                means.len()
            )));
        }
        if let Some(bad) = means.iter().find(|m| !m.is_finite()) {
            return Err(Error::Config(format!("arm mean {bad} is not finite")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::Config(format!(
                "sigma must be finite and >= 0, got {sigma}"
            )));
        }
        let target = target.unwrap_or(means.len() - 1);
        if target >= means.len() {
            return Err(Error::Config(format!(
                "target arm {} out of range 1..={}",
                target + 1,
                means.len()
            )));
        }
        Ok(Self {
            means,
            sigma,
            target,
        })
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn target(&self) -> usize {
        self.target
    }

    fn check_arm(&self, arm: usize) -> Result<()> {
        if arm < self.means.len() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "arm {} out of range 1..={}",
                arm + 1,
                self.means.len()
            )))
        }
    }

    /// `mu_arm - mu_target`.
    pub fn gap(&self, arm: usize) -> Result<f64> {
        self.check_arm(arm)?;
        if arm == self.target {
            return Ok(0.0);
        }
        Ok(self.means[arm] - self.means[self.target])
    }

    /// `max(0, gap(arm))`.
    pub fn gap_plus(&self, arm: usize) -> Result<f64> {
        Ok(self.gap(arm)?.max(0.0))
    }

    /// Largest positive gap over non-target arms.
    pub fn max_gap_plus(&self) -> f64 {
        (0..self.num_arms())
            .filter(|&i| i != self.target)
            .map(|i| (self.means[i] - self.means[self.target]).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Draws a pre-attack reward for `arm`.
    pub fn sample_reward(&self, arm: usize, rng: &mut RngStream) -> Result<f64> {
        self.check_arm(arm)?;
        let z: f64 = rng.rng.sample(StandardNormal);
        Ok(self.means[arm] + self.sigma * z)
    }
}

/// A replication's private random stream.
///
/// ChaCha8 keyed by `master_seed` with the 64-bit stream id set to
/// `stream_index`, so distinct replications read disjoint keystreams.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}
