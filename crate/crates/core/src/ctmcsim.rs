//! Gillespie simulation of the bilateral birth-death chain with rates
//! lambda_i = q^{2nu-2i} (jump i -> i+1) and mu_i = q^{-2i} (jump i -> i-1),
//! plus empirical-vs-analytic comparison against transition rows.
//!
//! Simulation arithmetic runs at machine double precision: statistical error
//! dominates everything here, and the simulator deliberately shares no
//! quadrature code with `bdkernel`, so agreement between the two is evidence
//! for both.
//!
//! Reproducibility: path k draws from a ChaCha8 stream seeded by
//! `path_seed(cfg.seed, k)` (a SplitMix64-style mix of the master seed and
//! the path index), so ensembles are deterministic under any parallel
//! schedule.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bdkernel::TransitionRow;
use crate::error::{Error, Result};
use crate::qcore::{GridWindow, QParams};

/// Configuration for one simulation run.
#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    pub params: QParams,
    /// Start exponent r (state q^r).
    pub start: i64,
    /// Simulated time horizon.
    pub t_end: f64,
    pub n_paths: u64,
    pub seed: u64,
    /// Absorbing guard bounds: a path leaving this window is excluded.
    pub guard: GridWindow,
    /// Event-count guard per path.
    pub max_events: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.guard.contains(self.start) {
            return Err(Error::InvalidSimConfig(format!(
                "start exponent {} outside guard window {}",
                self.start, self.guard
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidSimConfig("n_paths must be >= 1".into()));
        }
        if self.max_events == 0 {
            return Err(Error::InvalidSimConfig("max_events must be >= 1".into()));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidSimConfig(format!(
                "t_end must be finite and >= 0, got {}",
                self.t_end
            )));
        }
        Ok(())
    }
}

/// Jump rates at state q^i: (lambda_i, mu_i) = (q^{2nu-2i}, q^{-2i}).
pub fn rates(i: i64, params: &QParams) -> (f64, f64) {
    let q = params.q();
    let lambda = q.powf(2.0 * params.nu() - 2.0 * i as f64);
    let mu = q.powf(-2.0 * i as f64);
    (lambda, mu)
}

/// How a simulated path ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Terminal {
    ReachedTEnd,
    HitGuard,
    MaxEvents,
}

/// One trajectory: the jump events (time, new exponent) and how it ended.
#[derive(Clone, Debug)]
pub struct PathSample {
    pub events: Vec<(f64, i64)>,
    pub terminal: Terminal,
    /// State exponent when the path ended.
    pub end_index: i64,
}

/// Derive the per-path seed: a SplitMix64 finalizer over
/// master + (k+1) * golden-gamma. Documented so ensembles can be reproduced
/// path by path in other implementations.
pub fn path_seed(master: u64, k: u64) -> u64 {
    const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut z = master.wrapping_add((k.wrapping_add(1)).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw strictly inside (0, 1): (x + 0.5) / 2^53 over 53 random bits,
/// so exponential holding times are finite and strictly positive.
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    let x = rng.random::<u64>() >> 11;
    (x as f64 + 0.5) / 9_007_199_254_740_992.0
}

/// Simulate a single path by exponential clocks: holding time
/// Exp(lambda_i + mu_i) at state i, jump up with probability
/// lambda_i / (lambda_i + mu_i), else down. Deterministic given `seed`.
pub fn simulate_path(cfg: &SimConfig, seed: u64) -> PathSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut i = cfg.start;
    let mut t = 0.0f64;
    let mut events = Vec::new();

    loop {
        let (lambda, mu) = rates(i, &cfg.params);
        let total = lambda + mu;
        let holding = -open_unit(&mut rng).ln() / total;
        t += holding;
        if t > cfg.t_end {
            return PathSample {
                events,
                terminal: Terminal::ReachedTEnd,
                end_index: i,
            };
        }
        let up = rng.random::<f64>() < lambda / total;
        i += if up { 1 } else { -1 };
        events.push((t, i));
        if !cfg.guard.contains(i) {
            return PathSample {
                events,
                terminal: Terminal::HitGuard,
                end_index: i,
            };
        }
        if events.len() as u64 >= cfg.max_events {
            return PathSample {
                events,
                terminal: Terminal::MaxEvents,
                end_index: i,
            };
        }
    }
}

/// End-state counts over an ensemble, with excluded-path bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStats {
    /// End-state exponent -> count, over paths that reached t_end.
    pub counts: BTreeMap<i64, u64>,
    pub n_valid: u64,
    pub n_guard: u64,
    pub n_maxed: u64,
    pub n_paths: u64,
    /// Echo of the run configuration, for comparison validation.
    pub start: i64,
    pub t_end: f64,
    pub seed: u64,
    pub q: f64,
    pub nu: f64,
}

impl EnsembleStats {
    /// Fraction of paths excluded by the guard or the event cap.
    pub fn excluded_fraction(&self) -> f64 {
        (self.n_guard + self.n_maxed) as f64 / self.n_paths as f64
    }

    /// Excluded mass above 0.1% means the guard window is too tight for the
    /// configuration and the run should be treated as unreliable.
    pub fn excluded_mass_suspicious(&self) -> bool {
        self.excluded_fraction() > 0.001
    }
}

/// Run `cfg.n_paths` independent paths (in parallel) and aggregate end states.
pub fn simulate_ensemble(cfg: &SimConfig) -> Result<EnsembleStats> {
    cfg.validate()?;
    let results: Vec<(Terminal, i64)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|k| {
            let sample = simulate_path(cfg, path_seed(cfg.seed, k));
            (sample.terminal, sample.end_index)
        })
        .collect();

    let mut counts = BTreeMap::new();
    let (mut n_valid, mut n_guard, mut n_maxed) = (0u64, 0u64, 0u64);
    for (terminal, end) in results {
        match terminal {
            Terminal::ReachedTEnd => {
                n_valid += 1;
                *counts.entry(end).or_insert(0) += 1;
            }
            Terminal::HitGuard => n_guard += 1,
            Terminal::MaxEvents => n_maxed += 1,
        }
    }
    Ok(EnsembleStats {
        counts,
        n_valid,
        n_guard,
        n_maxed,
        n_paths: cfg.n_paths,
        start: cfg.start,
        t_end: cfg.t_end,
        seed: cfg.seed,
        q: cfg.params.q(),
        nu: cfg.params.nu(),
    })
}

/// Result of comparing an empirical ensemble against an analytic row.
#[derive(Clone, Debug)]
pub struct ComparisonReport {
    /// Total variation distance between empirical frequencies and analytic
    /// probabilities.
    pub tv: f64,
    /// Acceptance threshold 3 sqrt(K / (2 n_valid)).
    pub threshold: f64,
    /// Number of states holding 99.9% of the analytic mass.
    pub k_states: usize,
    /// Per-state z-scores (exponent, z) for states with expected count >= 5;
    /// the binomial normal approximation is unreliable below that.
    pub z_scores: Vec<(i64, f64)>,
    pub z_max: f64,
    pub pass: bool,
    pub n_valid: u64,
}

/// Compare ensemble end-state frequencies against an analytic transition row
/// computed at the same (r, t, params).
pub fn empirical_vs_analytic(
    stats: &EnsembleStats,
    row: &TransitionRow,
) -> Result<ComparisonReport> {
    if stats.start != row.start() {
        return Err(Error::ComparisonMismatch(format!(
            "ensemble start {} vs row start {}",
            stats.start,
            row.start()
        )));
    }
    if stats.t_end != row.t() {
        return Err(Error::ComparisonMismatch(format!(
            "ensemble t_end {} vs row t {}",
            stats.t_end,
            row.t()
        )));
    }
    if stats.n_valid == 0 {
        return Err(Error::ComparisonMismatch("no valid paths".into()));
    }
    let n = stats.n_valid as f64;

    let probs: Vec<(i64, f64)> = row
        .window()
        .exponents()
        .zip(row.probs())
        .map(|(i, p)| (i, p.to_f64()))
        .collect();

    // K: smallest state count covering 99.9% of the analytic mass
    let mut sorted: Vec<f64> = probs.iter().map(|&(_, p)| p.max(0.0)).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut acc = 0.0;
    let mut k_states = 0;
    for p in &sorted {
        acc += p;
        k_states += 1;
        if acc >= 0.999 {
            break;
        }
    }

    // TV over the union of analytic support and observed states
    let mut tv = 0.0f64;
    let mut z_scores = Vec::new();
    for &(i, p) in &probs {
        let count = stats.counts.get(&i).copied().unwrap_or(0) as f64;
        let emp = count / n;
        tv += (emp - p).abs();
        let expected = n * p;
        if expected >= 5.0 && p < 1.0 {
            let se = (p * (1.0 - p) / n).sqrt();
            z_scores.push((i, (emp - p) / se));
        }
    }
    for (&i, &count) in &stats.counts {
        if row.window().index_of(i).is_none() {
            tv += count as f64 / n;
        }
    }
    tv *= 0.5;

    let threshold = 3.0 * (k_states as f64 / (2.0 * n)).sqrt();
    let z_max = z_scores
        .iter()
        .map(|&(_, z)| z.abs())
        .fold(0.0f64, f64::max);
    let pass = tv <= threshold && z_max <= 4.0;
    Ok(ComparisonReport {
        tv,
        threshold,
        k_states,
        z_scores,
        z_max,
        pass,
        n_valid: stats.n_valid,
    })
}
