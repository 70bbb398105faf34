//! Seeded, parallel Monte-Carlo simulation of the relay-selection protocols.
//!
//! Trials are grouped into fixed-size blocks. Block `b` of grid point `p` draws
//! from a ChaCha8 stream keyed by `(base_seed, p)` with stream number `b`, and
//! the per-block outage counts are summed exactly. Estimates are therefore
//! identical for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{ChannelModel, HopSampler};
use crate::power_alloc::PowerSplit;
use crate::saf::harmonic_snr_bound;
use crate::sdf::NetworkConfig;
use crate::{db_to_linear, Error, Result};

/// Trials per seeded block.
pub const BLOCK_TRIALS: u64 = 1 << 16;

/// Simulation size, seed, parallelism and channel law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub trials: u64,
    pub base_seed: u64,
    pub workers: usize,
    pub channel: ChannelModel,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            trials: 1_000_000,
            base_seed: 0x5eed,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            channel: ChannelModel::CascadedRayleigh,
        }
    }
}

impl McConfig {
    pub fn new(trials: u64, base_seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        Ok(McConfig {
            trials,
            base_seed,
            ..McConfig::default()
        })
    }

    pub fn with_workers(self, workers: usize) -> Self {
        McConfig {
            workers: workers.max(1),
            ..self
        }
    }

    pub fn with_channel(self, channel: ChannelModel) -> Self {
        McConfig { channel, ..self }
    }
}

/// A Monte-Carlo proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
    pub hits: u64,
}

impl McEstimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        McEstimate {
            value: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
            hits,
        }
    }
}

/// One Bernoulli trial of a protocol: returns `true` on outage.
pub trait TrialKernel: Sync {
    fn trial(&self, rng: &mut ChaCha8Rng) -> bool;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The generator for block `block` of grid point `point`.
pub fn stream_rng(base_seed: u64, point: u64, block: u64) -> ChaCha8Rng {
    let key = splitmix64(base_seed ^ splitmix64(point));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(block);
    rng
}

fn run_block<K: TrialKernel>(kernel: &K, mc: &McConfig, point: u64, block: u64) -> u64 {
    let start = block * BLOCK_TRIALS;
    let len = BLOCK_TRIALS.min(mc.trials - start);
    let mut rng = stream_rng(mc.base_seed, point, block);
    (0..len).filter(|_| kernel.trial(&mut rng)).count() as u64
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers <= 1 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

fn count_blocks<K: TrialKernel>(kernel: &K, mc: &McConfig, point: u64) -> u64 {
    let blocks = mc.trials.div_ceil(BLOCK_TRIALS);
    if mc.workers <= 1 {
        (0..blocks).map(|b| run_block(kernel, mc, point, b)).sum()
    } else {
        (0..blocks)
            .into_par_iter()
            .map(|b| run_block(kernel, mc, point, b))
            .sum()
    }
}

/// Runs `mc.trials` trials of `kernel` for grid point `point`.
pub fn run_kernel<K: TrialKernel>(kernel: &K, mc: &McConfig, point: u64) -> Result<McEstimate> {
    if mc.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let hits = with_pool(mc.workers, || count_blocks(kernel, mc, point))?;
    Ok(McEstimate::from_counts(hits, mc.trials))
}

/// Hop samplers for every relay of `config` under `power`.
fn relay_samplers(
    config: &NetworkConfig,
    power: &PowerSplit,
    model: ChannelModel,
) -> Result<Vec<(HopSampler, HopSampler)>> {
    config
        .relays
        .iter()
        .map(|r| {
            Ok((
                HopSampler::new(&r.source.fading, r.source.avg_snr(power.p1, config.noise_power), model)?,
                HopSampler::new(&r.dest.fading, r.dest.avg_snr(power.p2, config.noise_power), model)?,
            ))
        })
        .collect()
}

/// S-DF protocol: a relay delivers if it decodes (hop 1 at or above `γ_o`) and its
/// hop 2 clears `γ_o`. The relay of rank `rank` (1 = worst, N = best) forwards, so
/// the trial is an outage when at least `rank` relays fail to deliver.
#[derive(Debug, Clone)]
pub struct SdfKernel {
    hops: Vec<(HopSampler, HopSampler)>,
    gamma_o: f64,
    rank: usize,
}

impl SdfKernel {
    pub fn new(config: &NetworkConfig, power: &PowerSplit, model: ChannelModel) -> Result<Self> {
        Self::with_rank(config, power, model, config.len())
    }

    pub fn with_rank(
        config: &NetworkConfig,
        power: &PowerSplit,
        model: ChannelModel,
        rank: usize,
    ) -> Result<Self> {
        if rank < 1 || rank > config.len() {
            return Err(Error::Rank {
                rank,
                len: config.len(),
            });
        }
        Ok(SdfKernel {
            hops: relay_samplers(config, power, model)?,
            gamma_o: config.gamma_o,
            rank,
        })
    }
}

impl TrialKernel for SdfKernel {
    fn trial(&self, rng: &mut ChaCha8Rng) -> bool {
        let n = self.hops.len();
        let mut failures = 0;
        let mut successes = 0;
        for (h1, h2) in &self.hops {
            let delivered = h1.sample(rng) >= self.gamma_o && h2.sample(rng) >= self.gamma_o;
            if delivered {
                successes += 1;
                if successes > n - self.rank {
                    return false;
                }
            } else {
                failures += 1;
                if failures >= self.rank {
                    return true;
                }
            }
        }
        failures >= self.rank
    }
}

/// S-AF protocol: the relay with the largest harmonic bound `γ_{H,i}^n` is
/// selected, and the trial is an outage when that bound is below `γ_o`.
#[derive(Debug, Clone)]
pub struct SafKernel {
    hops: Vec<(HopSampler, HopSampler, u32)>,
    gamma_o: f64,
}

impl SafKernel {
    pub fn new(config: &NetworkConfig, power: &PowerSplit, model: ChannelModel) -> Result<Self> {
        let samplers = relay_samplers(config, power, model)?;
        let hops = samplers
            .into_iter()
            .zip(&config.relays)
            .map(|((a, b), r)| {
                if r.source.fading.n != r.dest.fading.n {
                    return Err(Error::InvalidConfig(
                        "S-AF needs equal cascade orders on both hops".into(),
                    ));
                }
                Ok((a, b, r.source.fading.n))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SafKernel {
            hops,
            gamma_o: config.gamma_o,
        })
    }
}

impl TrialKernel for SafKernel {
    fn trial(&self, rng: &mut ChaCha8Rng) -> bool {
        for (h1, h2, n) in &self.hops {
            let z = harmonic_snr_bound(h1.sample(rng), h2.sample(rng), *n).unwrap_or(0.0);
            if z.powi(*n as i32) >= self.gamma_o {
                return false;
            }
        }
        true
    }
}

/// Monte-Carlo outage of best-relay S-DF.
pub fn mc_outage_sdf(config: &NetworkConfig, power: &PowerSplit, mc: &McConfig) -> Result<McEstimate> {
    run_kernel(&SdfKernel::new(config, power, mc.channel)?, mc, 0)
}

/// Monte-Carlo outage when the relay of rank `rank` forwards.
pub fn mc_outage_sdf_ith(
    config: &NetworkConfig,
    power: &PowerSplit,
    rank: usize,
    mc: &McConfig,
) -> Result<McEstimate> {
    run_kernel(&SdfKernel::with_rank(config, power, mc.channel, rank)?, mc, 0)
}

/// Monte-Carlo outage of best-relay S-AF on the harmonic bound.
pub fn mc_outage_saf(config: &NetworkConfig, power: &PowerSplit, mc: &McConfig) -> Result<McEstimate> {
    run_kernel(&SafKernel::new(config, power, mc.channel)?, mc, 0)
}

/// One Monte-Carlo grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McPoint {
    pub snr_db: f64,
    pub estimate: McEstimate,
}

/// Estimates one kernel per SNR grid point; point `k` uses seed stream `k`.
pub fn mc_curve<K, F>(sweep_db: &[f64], kernel_at: F, mc: &McConfig) -> Result<Vec<McPoint>>
where
    K: TrialKernel,
    F: Fn(f64) -> Result<K>,
{
    sweep_db
        .iter()
        .enumerate()
        .map(|(k, &snr_db)| {
            let kernel = kernel_at(snr_db)?;
            Ok(McPoint {
                snr_db,
                estimate: run_kernel(&kernel, mc, k as u64)?,
            })
        })
        .collect()
}

/// Power split with each hop transmitting at `P/N₀ = snr_db`.
pub fn per_hop_power(config: &NetworkConfig, snr_db: f64) -> PowerSplit {
    PowerSplit::per_hop(config.noise_power * db_to_linear(snr_db))
}

/// Fraction of draws from `sample` that satisfy `pred`, as a seeded estimate.
pub fn estimate_probability<S, P>(sample: S, pred: P, mc: &McConfig, point: u64) -> Result<McEstimate>
where
    S: Fn(&mut ChaCha8Rng) -> f64 + Sync,
    P: Fn(f64) -> bool + Sync,
{
    struct Closure<S, P>(S, P);
    impl<S, P> TrialKernel for Closure<S, P>
    where
        S: Fn(&mut ChaCha8Rng) -> f64 + Sync,
        P: Fn(f64) -> bool + Sync,
    {
        fn trial(&self, rng: &mut ChaCha8Rng) -> bool {
            (self.1)((self.0)(rng))
        }
    }
    run_kernel(&Closure(sample, pred), mc, point)
}

/// Uniform draw in `(0, 1]`.
pub fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}
