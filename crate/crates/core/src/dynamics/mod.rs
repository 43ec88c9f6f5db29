//! Annealing simulators and the success-probability estimation protocol.
//!
//! [`exact`] integrates the time-dependent Schroedinger equation for small
//! systems; [`svmc`] is a classical spin-vector Monte Carlo surrogate that
//! scales to full Chimera graphs. [`estimate_success`] drives any sampler
//! through the batched run protocol: runs in batches, a fresh spin-reversal
//! gauge at a fixed period, early stop after a target number of successes,
//! and an explicit unsolved flag when the budget is exhausted.

pub mod exact;
pub mod svmc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::ising::{IsingInstance, SpinConfig};
use crate::oracle::GroundStateSet;

/// 97.5% normal quantile, for two-sided 95% Wilson intervals.
const Z95: f64 = 1.959963984540054;

/// Batched sampling protocol parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerProtocol {
    /// Runs per batch (one "call" of the sampler backend).
    pub batch_size: u64,
    /// Maximum number of batches.
    pub max_batches: u64,
    /// Stop as soon as this many successes have been observed.
    pub stop_successes: u64,
    /// A fresh spin-reversal gauge every this many runs.
    pub gauge_period: u64,
}

impl Default for SamplerProtocol {
    fn default() -> Self {
        SamplerProtocol {
            batch_size: 10_000,
            max_batches: 1_000,
            stop_successes: 5,
            gauge_period: 1_000,
        }
    }
}

impl SamplerProtocol {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0
            || self.max_batches == 0
            || self.stop_successes == 0
            || self.gauge_period == 0
        {
            return Err(CoreError::InvalidParameter(
                "protocol parameters must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn max_runs(&self) -> u64 {
        self.batch_size * self.max_batches
    }
}

/// Success-probability estimate with a 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub successes: u64,
    pub runs: u64,
    /// `successes / runs`; when nothing succeeded, the upper bound
    /// `1 / runs` with `solved = false`.
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub solved: bool,
}

impl SuccessEstimate {
    pub fn from_counts(successes: u64, runs: u64) -> Self {
        assert!(runs > 0, "estimate requires at least one run");
        let (ci_low, ci_high) = wilson_interval(successes, runs, Z95);
        let solved = successes > 0;
        let p_hat = if solved {
            successes as f64 / runs as f64
        } else {
            1.0 / runs as f64
        };
        SuccessEstimate {
            successes,
            runs,
            p_hat,
            ci_low,
            ci_high,
            solved,
        }
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, runs: u64, z: f64) -> (f64, f64) {
    let n = runs as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // at the boundary counts, center and half agree analytically; avoid a
    // rounding-residue bound
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == runs {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// One annealing run's outcome, as streamed to record sinks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_index: u64,
    pub gauge_id: u64,
    pub energy: f64,
    pub success: bool,
}

/// Per-run context handed to samplers: a derived seed and the active gauge
/// (the instance passed to the sampler is already gauge-transformed; test
/// doubles may use the mask to fabricate outcomes in the gauged frame).
#[derive(Debug, Clone, Copy)]
pub struct RunContext<'a> {
    pub run_index: u64,
    pub seed: u64,
    pub gauge: &'a [i8],
}

/// Anything that can produce one spin configuration per annealing run.
/// Implementations must be deterministic functions of the instance and the
/// context seed.
pub trait AnnealSampler: Sync {
    fn sample(&self, instance: &IsingInstance, ctx: &RunContext) -> SpinConfig;
}

/// Deterministic seed derivation (splitmix64 over root and index), so runs
/// are independent but reproducible regardless of execution order.
pub fn derive_seed(root: u64, domain: u64, index: u64) -> u64 {
    let mut z = root
        .wrapping_add(domain.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const DOMAIN_RUN: u64 = 1;
const DOMAIN_GAUGE: u64 = 2;

fn gauge_mask(root_seed: u64, gauge_id: u64, n: usize) -> Vec<i8> {
    use rand::{Rng, SeedableRng};
    if gauge_id == 0 {
        // first window runs ungauged; matches baseline single-shot use
        return vec![1; n];
    }
    let mut rng =
        rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(root_seed, DOMAIN_GAUGE, gauge_id));
    (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect()
}

/// Run the sampling protocol and reduce to a [`SuccessEstimate`].
///
/// A run counts as a success when its sampled configuration reaches the
/// reference ground energy (so every degenerate ground state counts).
/// Sampled configurations are produced in the gauged frame and mapped back
/// before the energy test. Outcomes depend only on `(root_seed, run_index)`,
/// so results are independent of chunking and parallelism; the estimate
/// counts runs up to and including the stopping run.
pub fn estimate_success(
    sampler: &dyn AnnealSampler,
    instance: &IsingInstance,
    reference: &GroundStateSet,
    protocol: &SamplerProtocol,
    root_seed: u64,
) -> Result<SuccessEstimate> {
    estimate_success_with_records(sampler, instance, reference, protocol, root_seed, |_| {})
}

/// As [`estimate_success`], streaming every run's record to `sink` in run
/// order.
pub fn estimate_success_with_records(
    sampler: &dyn AnnealSampler,
    instance: &IsingInstance,
    reference: &GroundStateSet,
    protocol: &SamplerProtocol,
    root_seed: u64,
    mut sink: impl FnMut(&RunRecord),
) -> Result<SuccessEstimate> {
    protocol.validate()?;
    if reference.states.is_empty() {
        return Err(CoreError::EmptyInput("reference ground-state set"));
    }
    let n = instance.num_spins();
    let max_runs = protocol.max_runs();

    let mut successes = 0u64;
    let mut runs = 0u64;
    let mut run = 0u64;
    let mut cached_gauge: Option<(u64, Vec<i8>, IsingInstance)> = None;

    'outer: while run < max_runs {
        let gauge_id = run / protocol.gauge_period;
        // window: same gauge, same batch, bounded chunk
        let window_end = max_runs
            .min((gauge_id + 1) * protocol.gauge_period)
            .min((run / protocol.batch_size + 1) * protocol.batch_size)
            .min(run + 1024);

        let (gauge, gauged) = match &cached_gauge {
            Some((id, g, inst)) if *id == gauge_id => (g.clone(), inst.clone()),
            _ => {
                let g = gauge_mask(root_seed, gauge_id, n);
                let inst = instance.gauge_transformed(&g)?;
                cached_gauge = Some((gauge_id, g.clone(), inst.clone()));
                (g, inst)
            }
        };

        let outcomes: Vec<(f64, bool)> = (run..window_end)
            .into_par_iter()
            .map(|r| {
                let ctx = RunContext {
                    run_index: r,
                    seed: derive_seed(root_seed, DOMAIN_RUN, r),
                    gauge: &gauge,
                };
                let sampled = sampler.sample(&gauged, &ctx);
                let config = sampled.gauge_mapped(&gauge);
                let energy = instance
                    .energy(&config)
                    .expect("sampler returned configuration of wrong length");
                (energy, reference.contains_energy(energy))
            })
            .collect();

        for (offset, (energy, success)) in outcomes.into_iter().enumerate() {
            let r = run + offset as u64;
            runs = r + 1;
            if success {
                successes += 1;
            }
            sink(&RunRecord {
                run_index: r,
                gauge_id,
                energy,
                success,
            });
            if successes >= protocol.stop_successes {
                break 'outer;
            }
        }
        run = window_end;
    }

    Ok(SuccessEstimate::from_counts(successes, runs))
}

#[cfg(test)]
pub(crate) mod test_samplers {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Succeeds with probability `p`, independent of the instance: returns
    /// a known ground state (in the gauged frame) or a known excited state.
    pub struct BernoulliMock {
        pub p: f64,
        pub ground: SpinConfig,
        pub excited: SpinConfig,
    }

    impl AnnealSampler for BernoulliMock {
        fn sample(&self, _instance: &IsingInstance, ctx: &RunContext) -> SpinConfig {
            let hit = if self.p <= 0.0 {
                false
            } else if self.p >= 1.0 {
                true
            } else {
                rand_chacha::ChaCha8Rng::seed_from_u64(ctx.seed).gen_bool(self.p)
            };
            let base = if hit { &self.ground } else { &self.excited };
            base.gauge_mapped(ctx.gauge)
        }
    }

    /// A two-spin ferromagnet fixture with known ground / excited states.
    pub fn fixture() -> (IsingInstance, GroundStateSet, SpinConfig, SpinConfig) {
        use crate::ising::InstanceMetadata;
        use crate::oracle::enumerate_ground_states;
        let inst = IsingInstance::new(
            2,
            vec![(0, 1, -1.0)],
            vec![-0.25, 0.0],
            InstanceMetadata::custom(),
        )
        .unwrap();
        let gs = enumerate_ground_states(&inst, 24).unwrap();
        let ground = gs.states[0].clone();
        let excited = SpinConfig::new(vec![-1, 1]).unwrap();
        (inst, gs, ground, excited)
    }
}
