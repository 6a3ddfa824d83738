//! Random streams and waiting-time distributions.
//!
//! Every stream is a ChaCha20 generator (`rand_chacha` 0.9) keyed by
//! `seed_from_u64(master_seed)` with its stream id set to the trial index.
//! ChaCha output is value-stable across platforms and crate releases, so a
//! fixed `(master_seed, stream_id)` replays bit-for-bit.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name recorded in output metadata.
pub const GENERATOR_NAME: &str = "ChaCha20 (rand_chacha 0.9, seed_from_u64 + set_stream)";

/// One independent stream of randomness.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `(0, 1)`; zero draws are resampled.
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        // Lemire-style rejection keeps the draw unbiased
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }

    /// Derives a child stream, consuming one draw.
    pub fn fork(&mut self) -> RngStream {
        let seed = self.next_u64();
        RngStream::new(seed, 0)
    }
}

pub fn sample_uniform(rng: &mut RngStream) -> f64 {
    rng.uniform()
}

/// `ln(1/u) / rate` with `u` uniform on `(0, 1)`.
pub fn sample_waiting_time(rng: &mut RngStream, rate: f64) -> Result<f64> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::Argument(format!("waiting-time rate must be positive, got {rate}")));
    }
    Ok(waiting_time_from_uniform(rng.uniform_open(), rate))
}

#[inline]
pub fn waiting_time_from_uniform(u: f64, rate: f64) -> f64 {
    (1.0 / u).ln() / rate
}

/// Parameters of the truncated discretized exponential distribution on
/// `{kδ : k = 0..=K}` with `Pr(w ≥ kδ) = exp(-λkδ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscExpParams {
    pub k_max: u64,
    pub delta: f64,
    pub rate: f64,
}

impl DiscExpParams {
    pub fn new(k_max: u64, delta: f64, rate: f64) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::Argument("truncation index K must be positive".into()));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Argument(format!("grid spacing must be positive, got {delta}")));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Argument(format!("rate must be positive, got {rate}")));
        }
        Ok(Self { k_max, delta, rate })
    }

    /// `Pr(w = kδ)` from the closed form.
    pub fn probability(&self, k: u64) -> f64 {
        let tail = |k: u64| (-self.rate * k as f64 * self.delta).exp();
        match k {
            k if k < self.k_max => tail(k) - tail(k + 1),
            k if k == self.k_max => tail(k),
            _ => 0.0,
        }
    }

    /// `Pr(w ≥ kδ)`.
    pub fn tail(&self, k: u64) -> f64 {
        if k > self.k_max {
            0.0
        } else {
            (-self.rate * k as f64 * self.delta).exp()
        }
    }
}

/// Inverse CDF: `k = min(K, floor(-ln(u) / (λδ)))`, then nudged by at most
/// a step so that `u ∈ (tail(k+1), tail(k)]` holds exactly for the computed
/// tails. Non-increasing in `u`.
pub fn disc_exp_index(u: f64, params: &DiscExpParams) -> u64 {
    let x = -u.ln() / (params.rate * params.delta);
    let mut k = if !(x < params.k_max as f64) {
        params.k_max
    } else {
        (x.floor() as u64).min(params.k_max)
    };
    if k < params.k_max && u <= params.tail(k + 1) {
        k += 1;
    } else if k > 0 && u > params.tail(k) {
        k -= 1;
    }
    k
}

/// A grid point `kδ` drawn from `D_{K,δ,λ}`, returned as the index `k`.
pub fn sample_disc_exp_index(rng: &mut RngStream, params: &DiscExpParams) -> u64 {
    disc_exp_index(rng.uniform(), params)
}

pub fn sample_disc_exp(rng: &mut RngStream, params: &DiscExpParams) -> f64 {
    sample_disc_exp_index(rng, params) as f64 * params.delta
}

/// Fixed `(K, δ)` grid used for every rate along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretePolicy {
    pub delta: f64,
    pub k_max: u64,
}

impl DiscretePolicy {
    /// Desk-scale default `δ = 1e-6·t`, `K = ⌈2t/δ⌉`.
    pub fn for_horizon(t: f64) -> Self {
        Self::with_delta(t, t * 1e-6)
    }

    pub fn with_delta(t: f64, delta: f64) -> Self {
        Self {
            delta,
            // guard against 2t/δ landing a rounding error above an integer
            k_max: ((2.0 * t / delta * (1.0 - 1e-12)).ceil() as u64).max(1),
        }
    }

    pub fn params(&self, rate: f64) -> Result<DiscExpParams> {
        DiscExpParams::new(self.k_max, self.delta, rate)
    }
}
