//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::*;
use prp_core::experiment::{self, aggregate_csv, run_sweep, Axes, ReportKind, RunResult, SweepSpec};
use prp_core::metrics::{latency, DiscoveryRecord};
use prp_core::radio::{distance_from_rssi, path_loss_at, LinkBudget};
use prp_core::sim_core::{rng_stream, StreamLabel};
use prp_core::{KPolicy, Protocol, ScenarioConfig};
use rand::Rng;

const DENSITIES: [usize; 4] = [50, 75, 100, 125];
const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const RANDOM_3_7: KPolicy = KPolicy::RandomUniform { lo: 3, hi: 7 };

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = xs.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum::<f64>() / v.len() as f64
}

/// Density sweep results keyed by (protocol, node_count, seed).
struct Sweep {
    runs: BTreeMap<(Protocol, usize, u64), RunResult>,
    elapsed: Duration,
}

impl Sweep {
    fn run(k: KPolicy, protocols: Vec<Protocol>) -> Sweep {
        let spec = SweepSpec {
            base: ScenarioConfig::default(),
            axes: Axes {
                node_count: DENSITIES.to_vec(),
                k_policy: vec![k],
                flow_count: vec![1],
                protocol: protocols,
            },
            seeds: SEEDS.to_vec(),
            report: ReportKind::Aggregate,
        };
        let t = Instant::now();
        let results = run_sweep(&spec, std::thread::available_parallelism().map_or(1, |n| n.get()))
            .expect("sweep runs");
        let elapsed = t.elapsed();
        let runs = results
            .into_iter()
            .map(|r| ((r.key.protocol, r.key.node_count, r.key.seed), r))
            .collect();
        Sweep { runs, elapsed }
    }

    fn get(&self, p: Protocol, n: usize, seed: u64) -> &RunResult {
        &self.runs[&(p, n, seed)]
    }

    fn srb(&self, p: Protocol, n: usize, seed: u64) -> f64 {
        self.get(p, n, seed).report.mean_srb.expect("some requests were sent")
    }

    fn mean_srb(&self, p: Protocol, n: usize) -> f64 {
        mean(SEEDS.iter().map(|&s| self.srb(p, n, s)))
    }

    fn mean_success(&self, p: Protocol, n: usize) -> f64 {
        mean(SEEDS.iter().map(|&s| self.get(p, n, s).report.success_rate.unwrap()))
    }

    fn records(&self, p: Protocol, n: usize) -> impl Iterator<Item = &DiscoveryRecord> {
        SEEDS.iter().flat_map(move |&s| self.get(p, n, s).records.iter())
    }
}

fn round_trip() -> Verdict {
    let t = Instant::now();
    let mut rng = rng_stream(2024, StreamLabel::Loss);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = 2.0 * (1.0 - rng.random::<f64>());
        let f = rng.random_range(100.0..=6000.0);
        let loss = path_loss_at(d, f).unwrap();
        let back = distance_from_rssi(&LinkBudget::new(0.0, -loss, f));
        worst = worst.max((back - d).abs() / d);
    }
    let elapsed = t.elapsed();
    verdict(
        worst <= 1e-9 && elapsed < Duration::from_secs(1),
        format!("worst relative error {worst:.3e}, {elapsed:?}"),
    )
}

fn flood_reachability() -> Verdict {
    let cfg = static_config(50, Protocol::Flood, RANDOM_3_7, 30.0);
    let mut discoveries = 0;
    let mut flooded = 0;
    let mut failures = 0;
    let mut partial = 0;
    for positions in connected_placements(&cfg, 25, 77) {
        for rec in run_on(&cfg, &positions).records {
            discoveries += 1;
            failures += usize::from(!rec.succeeded);
            // Targets already in the origin's neighbor table need no request.
            if rec.seq.is_some() {
                flooded += 1;
                partial += usize::from(rec.received.len() != cfg.node_count);
            }
        }
    }
    verdict(
        failures == 0 && partial == 0 && flooded > 0,
        format!(
            "{discoveries} discoveries, {failures} failed; {flooded} flooded, {partial} missed a node"
        ),
    )
}

fn srb_separation(s: &Sweep) -> Verdict {
    let prp: Vec<f64> = DENSITIES.iter().map(|&n| s.mean_srb(Protocol::Prp, n)).collect();
    let flood: Vec<f64> = DENSITIES.iter().map(|&n| s.mean_srb(Protocol::Flood, n)).collect();
    let high_ok = prp[2] >= 0.55 && prp[3] >= 0.55;
    let flood_ok = flood.iter().all(|&x| x <= 0.20);
    let band_ok = (prp[3] - 0.70).abs() <= 0.15;
    let time_ok = s.elapsed < Duration::from_secs(120);
    verdict(
        high_ok && flood_ok && band_ok && time_ok,
        format!(
            "PRP SRB {} | flooding SRB {} | sweep {:.1?}",
            fmt_list(&prp),
            fmt_list(&flood),
            s.elapsed
        ),
    )
}

fn k2_regime(s: &Sweep) -> Verdict {
    let prp: Vec<f64> = DENSITIES.iter().map(|&n| s.mean_srb(Protocol::Prp, n)).collect();
    verdict(
        prp.iter().all(|x| (0.30..=0.55).contains(x)),
        format!("Fixed(2) PRP SRB {}", fmt_list(&prp)),
    )
}

fn density_monotonicity(s: &Sweep) -> Verdict {
    let pairs: Vec<(f64, f64)> = SEEDS
        .iter()
        .map(|&seed| (s.srb(Protocol::Prp, 50, seed), s.srb(Protocol::Prp, 125, seed)))
        .collect();
    let holds = pairs.iter().filter(|(lo, hi)| hi >= lo).count();
    let shown: Vec<String> = pairs.iter().map(|(a, b)| format!("{a:.4}->{b:.4}")).collect();
    verdict(
        holds == SEEDS.len(),
        format!(
            "SRB 50->125 nodes per seed: {} ({holds}/{} seeds hold)",
            shown.join(", "),
            SEEDS.len()
        ),
    )
}

fn success_convergence(s: &Sweep) -> Verdict {
    let (p125, f125) = (s.mean_success(Protocol::Prp, 125), s.mean_success(Protocol::Flood, 125));
    let (p50, f50) = (s.mean_success(Protocol::Prp, 50), s.mean_success(Protocol::Flood, 50));
    verdict(
        p125 >= 0.90 * f125 && p50 <= f50,
        format!("125 nodes: PRP {p125:.4} vs flooding {f125:.4}; 50 nodes: PRP {p50:.4} vs flooding {f50:.4}"),
    )
}

fn path_optimality(s: &Sweep) -> Verdict {
    let stretches: Vec<f64> = [100, 125]
        .iter()
        .flat_map(|&n| s.records(Protocol::Prp, n))
        .filter_map(DiscoveryRecord::stretch)
        .collect();
    let below_one = stretches.iter().filter(|&&x| x < 1.0).count();
    let m = mean(stretches.iter().copied());
    verdict(
        !stretches.is_empty() && m <= 1.5 && below_one == 0,
        format!("{} routes, mean stretch {m:.4}, {below_one} below 1", stretches.len()),
    )
}

fn latency_parity(s: &Sweep) -> Verdict {
    let pooled = |p| mean(s.records(p, 125).filter_map(|r| latency(r).ok()));
    let (prp, flood) = (pooled(Protocol::Prp), pooled(Protocol::Flood));
    let ratio = prp / flood;
    verdict(
        (0.75..=1.25).contains(&ratio),
        format!("125 nodes: PRP {:.1} us, flooding {:.1} us, ratio {ratio:.3}", prp * 1e6, flood * 1e6),
    )
}

fn preset_determinism() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    for name in experiment::PRESET_NAMES {
        let mut spec = experiment::preset(name).unwrap();
        spec.base.sim_duration_s = 12.0;
        let a = experiment::render(&spec, &run_sweep(&spec, 1).unwrap());
        let b = experiment::render(&spec, &run_sweep(&spec, 8).unwrap());
        let c = experiment::render(&spec, &run_sweep(&spec, 8).unwrap());
        let rows = a.lines().count() - 1;
        let same = a == b && b == c && rows > 0;
        ok &= same;
        notes.push(format!("{name}: {rows} rows{}", if same { "" } else { " DIFFER" }));
    }
    verdict(ok, format!("12 s presets at 1 vs 8 threads: {}", notes.join(", ")))
}

fn degenerate_k() -> Verdict {
    let prp = static_config(50, Protocol::Prp, KPolicy::Fixed(1), 30.0);
    let flood = ScenarioConfig {
        protocol: Protocol::Flood,
        ..prp.clone()
    };
    let (mut compared, mut differ, mut extra) = (0, 0, 0);
    // Flooding transmitters missing from PRP, by cause.
    let (mut target, mut unreached, mut silent) = (0, 0, 0);
    for positions in connected_placements(&prp, 10, 31) {
        let a = run_on(&prp, &positions).records;
        let b = run_on(&flood, &positions).records;
        assert_eq!(a.len(), b.len());
        for (p, f) in a.iter().zip(&b) {
            assert_eq!((p.origin, p.target, p.start), (f.origin, f.target, f.start));
            compared += 1;
            if p.transmitted == f.transmitted {
                continue;
            }
            differ += 1;
            extra += p.transmitted.difference(&f.transmitted).count();
            for n in f.transmitted.difference(&p.transmitted) {
                if *n == p.target {
                    target += 1;
                } else if !p.received.contains(n) {
                    unreached += 1;
                } else {
                    silent += 1;
                }
            }
        }
    }
    verdict(
        differ == 0,
        format!(
            "{compared} discoveries compared, {differ} with different transmitter sets; \
             PRP-only transmitters {extra}; flooding-only: target {target}, \
             never reached {unreached}, reached but silent {silent}"
        ),
    )
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = DENSITIES
        .iter()
        .zip(xs)
        .map(|(n, x)| format!("{n}:{x:.4}"))
        .collect();
    parts.join(" ")
}

fn main() {
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut report = |id, name, v: Verdict| {
        println!("[{}] {id:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((id, name, v));
    };

    report(1, "path-loss round trip", round_trip());
    report(2, "flooding reachability", flood_reachability());

    let main_sweep = Sweep::run(RANDOM_3_7, vec![Protocol::Prp, Protocol::Flood]);
    eprintln!("{}", aggregate_csv(&main_sweep.runs.values().cloned().collect::<Vec<_>>()));
    report(3, "SRB separation", srb_separation(&main_sweep));
    let k2 = Sweep::run(KPolicy::Fixed(2), vec![Protocol::Prp]);
    report(4, "K=2 regime", k2_regime(&k2));
    report(5, "density monotonicity", density_monotonicity(&main_sweep));
    report(6, "success-rate convergence", success_convergence(&main_sweep));
    report(7, "path optimality", path_optimality(&main_sweep));
    report(8, "latency parity", latency_parity(&main_sweep));
    report(9, "preset determinism", preset_determinism());
    report(10, "degenerate-K equivalence", degenerate_k());

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria pass",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
