//! Statistical behavior of the chain simulator: holding-time rates, seed
//! determinism under varying parallelism, and the empirical-vs-analytic
//! comparison machinery.

use qbd_core::bdkernel::transition_row;
use qbd_core::ctmcsim::{
    empirical_vs_analytic, path_seed, rates, simulate_ensemble, simulate_path, EnsembleStats,
    SimConfig, Terminal,
};
use qbd_core::qcore::{GridWindow, QParams};
use qbd_core::qfourier::KernelMatrix;
use qbd_core::verify::kernel_window;

fn config(n_paths: u64, seed: u64) -> SimConfig {
    SimConfig {
        params: QParams::new(0.5, 1.0, 192, 1e-40).unwrap(),
        start: 0,
        t_end: 0.5,
        n_paths,
        seed,
        guard: GridWindow::new(-12, 30).unwrap(),
        max_events: 1_000_000,
    }
}

/// Mean holding time observed at a state converges to 1/(lambda_i + mu_i).
#[test]
fn holding_times_match_rates() {
    // nu = 0 makes the embedded walk symmetric (recurrent), so state 0 is
    // revisited often enough to estimate the holding rate well
    let cfg = SimConfig {
        params: QParams::new(0.5, 0.0, 192, 1e-40).unwrap(),
        t_end: 40.0,
        ..config(400, 20240521)
    };
    let (lambda, mu) = rates(0, &cfg.params);
    let expect = 1.0 / (lambda + mu);

    let mut holds = Vec::new();
    for k in 0..cfg.n_paths {
        let sample = simulate_path(&cfg, path_seed(cfg.seed, k));
        // reconstruct holding intervals at state 0: from each arrival (or the
        // path start) to the next jump
        let mut at_state = Some(0.0f64); // path starts at state 0 at time 0
        for &(t, idx) in &sample.events {
            if let Some(since) = at_state {
                holds.push(t - since);
            }
            at_state = if idx == 0 { Some(t) } else { None };
        }
    }
    let n = holds.len() as f64;
    assert!(n > 1000.0, "need visits, got {n}");
    let mean: f64 = holds.iter().sum::<f64>() / n;
    // exponential: sd = mean; standard error = mean / sqrt(n)
    let se = expect / n.sqrt();
    assert!(
        (mean - expect).abs() < 4.0 * se,
        "mean {mean} vs {expect} (se {se}, n {n})"
    );
}

#[test]
fn ensemble_invariant_under_thread_count() {
    let cfg = config(4000, 99);
    let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = pool1.install(|| simulate_ensemble(&cfg)).unwrap();
    let b = pool4.install(|| simulate_ensemble(&cfg)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_path_ensemble_reduces_to_simulate_path() {
    let cfg = config(1, 31337);
    let stats = simulate_ensemble(&cfg).unwrap();
    let path = simulate_path(&cfg, path_seed(cfg.seed, 0));
    assert_eq!(stats.n_valid + stats.n_guard + stats.n_maxed, 1);
    if path.terminal == Terminal::ReachedTEnd {
        assert_eq!(stats.counts.len(), 1);
        assert_eq!(stats.counts[&path.end_index], 1);
    }
}

#[test]
fn nearest_neighbor_jumps_always() {
    let cfg = config(200, 7);
    for k in 0..cfg.n_paths {
        let sample = simulate_path(&cfg, path_seed(cfg.seed, k));
        let mut prev = cfg.start;
        for &(_, idx) in &sample.events {
            assert_eq!((idx - prev).abs(), 1);
            prev = idx;
        }
        assert_eq!(sample.terminal, Terminal::ReachedTEnd);
    }
}

/// A synthetic ensemble with counts = round(n p) agrees almost perfectly.
#[test]
fn comparison_passes_on_constructed_agreement() {
    let params = QParams::new(0.5, 1.0, 192, 1e-40).unwrap();
    let window = kernel_window(&params).unwrap();
    let matrix = KernelMatrix::build(window, &params).unwrap();
    let row = transition_row(0, 0.5, &matrix).unwrap();

    let n = 100_000u64;
    let mut counts = std::collections::BTreeMap::new();
    let mut assigned = 0u64;
    for (i, p) in row.window().exponents().zip(row.probs()) {
        let c = (p.to_f64().max(0.0) * n as f64).round() as u64;
        if c > 0 {
            counts.insert(i, c);
            assigned += c;
        }
    }
    let stats = EnsembleStats {
        counts,
        n_valid: assigned,
        n_guard: 0,
        n_maxed: 0,
        n_paths: assigned,
        start: 0,
        t_end: 0.5,
        seed: 0,
        q: 0.5,
        nu: 1.0,
    };
    let report = empirical_vs_analytic(&stats, &row).unwrap();
    assert!(report.pass, "tv = {}, z_max = {}", report.tv, report.z_max);
    assert!(report.tv < 1e-4);
}

#[test]
fn comparison_exact_at_t_zero() {
    let params = QParams::new(0.5, 1.0, 192, 1e-40).unwrap();
    let matrix = KernelMatrix::build(GridWindow::new(-8, 24).unwrap(), &params).unwrap();
    let row = transition_row(3, 0.0, &matrix).unwrap();
    let cfg = SimConfig {
        start: 3,
        t_end: 0.0,
        n_paths: 500,
        ..config(500, 11)
    };
    let stats = simulate_ensemble(&cfg).unwrap();
    let report = empirical_vs_analytic(&stats, &row).unwrap();
    assert_eq!(report.tv, 0.0);
    assert!(report.pass);
}

#[test]
fn comparison_rejects_mismatched_inputs() {
    let params = QParams::new(0.5, 1.0, 192, 1e-40).unwrap();
    let matrix = KernelMatrix::build(GridWindow::new(-8, 24).unwrap(), &params).unwrap();
    let row = transition_row(0, 1.0, &matrix).unwrap(); // t differs
    let stats = simulate_ensemble(&config(50, 3)).unwrap();
    assert!(empirical_vs_analytic(&stats, &row).is_err());
}

/// The documented validation scenario at reduced path count: TV within the
/// statistical threshold, no guard exits.
#[test]
fn validation_scenario_reduced() {
    let cfg = config(20_000, 1234);
    let stats = simulate_ensemble(&cfg).unwrap();
    assert_eq!(stats.n_guard, 0);
    assert_eq!(stats.n_maxed, 0);

    let params = cfg.params;
    let window = kernel_window(&params).unwrap();
    let matrix = KernelMatrix::build(window, &params).unwrap();
    let row = transition_row(0, 0.5, &matrix).unwrap();
    let report = empirical_vs_analytic(&stats, &row).unwrap();
    assert!(
        report.pass,
        "tv = {} vs threshold {}, z_max = {}",
        report.tv, report.threshold, report.z_max
    );
}
