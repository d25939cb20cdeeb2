//! Seeded, parallel Monte Carlo estimation of both ergodic rates straight
//! from the link model, as indicator-weighted sample means:
//! the GB estimator averages `log2(1+γ_GB)·1{admitted}` and the GF estimator
//! `log2(1+γ_GF)·1{admitted ∧ γ_GB > threshold}`.
//!
//! Randomness contract: trial i draws from a ChaCha8 stream whose stream id
//! is the trial index (word position 0), so every trial is a pure function
//! of `(seed, i)` no matter how trials are partitioned across workers. Each
//! trial consumes four uniforms in the order d_GF, d_GB, |h_GF|², |h_GB|²,
//! each mapped u ↦ 1-u so the variate lies in (0, 1].
//!
//! Accumulation is blocked (4096 trials per block, sequential inside a
//! block) and block statistics are merged along a fixed pairwise tree, so
//! results are bit-identical for any worker count.

use crate::model::{
    evaluate_link, sample_distance, sample_fading, with_axis, ChannelDraw, LinkOutcome,
    SystemParams,
};
use crate::{Error, Result};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const BLOCK: u64 = 4096;

/// A rate estimate in BPCU with its sampling uncertainty and the protocol
/// probabilities observed on the same trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub mean_bpcu: f64,
    /// Sample standard deviation divided by √trials.
    pub std_err: f64,
    pub trials: u64,
    /// Empirical admission frequency.
    pub admit_prob: f64,
    /// Empirical admission-and-SIC-success frequency (never exceeds
    /// `admit_prob`).
    pub sic_success_prob: f64,
}

/// Streaming mean/variance accumulator with an associative merge.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let n = a.n + b.n;
        let delta = b.mean - a.mean;
        Moments {
            n,
            mean: a.mean + delta * b.n as f64 / n as f64,
            m2: a.m2 + b.m2 + delta * delta * (a.n as f64 * b.n as f64) / n as f64,
        }
    }

    fn std_err(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BlockStats {
    gb: Moments,
    gf: Moments,
    admitted: u64,
    sic_ok: u64,
}

impl BlockStats {
    fn merge(a: BlockStats, b: BlockStats) -> BlockStats {
        BlockStats {
            gb: Moments::merge(a.gb, b.gb),
            gf: Moments::merge(a.gf, b.gf),
            admitted: a.admitted + b.admitted,
            sic_ok: a.sic_ok + b.sic_ok,
        }
    }
}

fn draw_from_base(base: &ChaCha8Rng, params: &SystemParams, index: u64) -> ChannelDraw {
    let mut rng = base.clone();
    rng.set_stream(index);
    // u -> 1-u keeps every variate inside (0,1], so distances and fading
    // gains stay strictly positive.
    let u_dgf = 1.0 - rng.gen::<f64>();
    let u_dgb = 1.0 - rng.gen::<f64>();
    let u_hgf = 1.0 - rng.gen::<f64>();
    let u_hgb = 1.0 - rng.gen::<f64>();
    ChannelDraw {
        d_gf_m: sample_distance(params.radius_m, u_dgf).expect("u in (0,1]"),
        d_gb_m: sample_distance(params.radius_m, u_dgb).expect("u in (0,1]"),
        h2_gf: sample_fading(params.fading_mean_gf, u_hgf).expect("u in (0,1]"),
        h2_gb: sample_fading(params.fading_mean_gb, u_hgb).expect("u in (0,1]"),
    }
}

/// The channel realization of trial `index` under the randomness contract.
pub fn trial_draw(params: &SystemParams, seed: u64, index: u64) -> ChannelDraw {
    draw_from_base(&ChaCha8Rng::seed_from_u64(seed), params, index)
}

fn run_block(base: &ChaCha8Rng, params: &SystemParams, start: u64, end: u64) -> BlockStats {
    let mut stats = BlockStats::default();
    for i in start..end {
        let draw = draw_from_base(base, params, i);
        let out = evaluate_link(params, &draw);
        stats.gb.push(if out.admitted { (1.0 + out.gamma_gb).log2() } else { 0.0 });
        stats.gf.push(if out.sic_ok { (1.0 + out.gamma_gf).log2() } else { 0.0 });
        stats.admitted += out.admitted as u64;
        stats.sic_ok += out.sic_ok as u64;
    }
    stats
}

/// Pairwise power-of-two reduction; the tree shape depends only on the
/// block count, never on scheduling.
fn tree_merge(mut level: Vec<BlockStats>) -> BlockStats {
    if level.is_empty() {
        return BlockStats::default();
    }
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len() / 2 + 1);
        let mut it = level.chunks_exact(2);
        for pair in &mut it {
            next.push(BlockStats::merge(pair[0], pair[1]));
        }
        if let [last] = it.remainder() {
            next.push(*last);
        }
        level = next;
    }
    level[0]
}

/// Runs `trials` independent link realizations and estimates both rates.
///
/// Deterministic for fixed `(params, trials, seed)` regardless of the rayon
/// pool executing it.
pub fn simulate(
    params: &SystemParams,
    trials: u64,
    seed: u64,
) -> Result<(RateEstimate, RateEstimate)> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    params.validate()?;
    let base = ChaCha8Rng::seed_from_u64(seed);
    let n_blocks = trials.div_ceil(BLOCK);
    let blocks: Vec<BlockStats> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            run_block(&base, params, start, (start + BLOCK).min(trials))
        })
        .collect();
    let total = tree_merge(blocks);

    let admit_prob = total.admitted as f64 / trials as f64;
    let sic_prob = total.sic_ok as f64 / trials as f64;
    let make = |m: &Moments| RateEstimate {
        mean_bpcu: m.mean,
        std_err: m.std_err(),
        trials,
        admit_prob,
        sic_success_prob: sic_prob,
    };
    Ok((make(&total.gb), make(&total.gf)))
}

/// Visits every trial of the same deterministic stream in index order.
/// Sequential diagnostic path sharing `simulate`'s draw contract exactly.
pub fn for_each_outcome(
    params: &SystemParams,
    trials: u64,
    seed: u64,
    mut f: impl FnMut(u64, &ChannelDraw, &LinkOutcome),
) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    params.validate()?;
    let base = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..trials {
        let draw = draw_from_base(&base, params, i);
        let out = evaluate_link(params, &draw);
        f(i, &draw, &out);
    }
    Ok(())
}

/// splitmix64 of (seed, index); the per-point sub-seed for sweeps.
pub fn derive_subseed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add((index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One `simulate` per axis value, with per-point sub-seeds derived from
/// `(seed, index)`.
pub fn sweep_simulate(
    base: &SystemParams,
    axis: &str,
    values: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<(f64, RateEstimate, RateEstimate)>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one axis value".into()));
    }
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let p = with_axis(base, axis, v)?;
            let (gb, gf) = simulate(&p, trials, derive_subseed(seed, i as u64))?;
            Ok((v, gb, gf))
        })
        .collect()
}
