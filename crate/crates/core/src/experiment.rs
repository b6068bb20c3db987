//! Parameter sweeps over independent runs, presets for the published
//! experiment grids, and CSV rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::metrics::{latency, mean_ci, AggregateReport, DiscoveryRecord};
use crate::sim::Simulation;
use crate::sim_core::{ConfigError, KPolicy, Protocol, ScenarioConfig};

/// Identity of one run inside a sweep; rows sort by this key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunKey {
    pub node_count: usize,
    pub flow_count: usize,
    pub k_policy: KPolicy,
    pub protocol: Protocol,
    pub seed: u64,
}

impl std::fmt::Display for RunKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "node_count={} flow_count={} k_policy={} protocol={} seed={}",
            self.node_count, self.flow_count, self.k_policy, self.protocol, self.seed
        )
    }
}

impl RunKey {
    pub fn of(config: &ScenarioConfig) -> Self {
        RunKey {
            node_count: config.node_count,
            flow_count: config.flow_count,
            k_policy: config.k_policy,
            protocol: config.protocol,
            seed: config.rng_seed,
        }
    }

    fn csv_prefix(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.node_count, self.flow_count, self.k_policy, self.protocol, self.seed
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    /// One row per run.
    #[default]
    Aggregate,
    /// One row per run and established path length.
    LatencyByHops,
}

/// Sweep axes. An omitted axis takes the base config's value.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Axes {
    pub node_count: Vec<usize>,
    pub k_policy: Vec<KPolicy>,
    pub flow_count: Vec<usize>,
    pub protocol: Vec<Protocol>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub base: ScenarioConfig,
    #[serde(default)]
    pub axes: Axes,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub report: ReportKind,
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run {key} is invalid: {source}")]
    InvalidRun {
        key: RunKey,
        #[source]
        source: ConfigError,
    },
    #[error("run {key} failed: {reason}")]
    RunFailed { key: RunKey, reason: String },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
    #[error("unknown preset `{name}` (available: {available})")]
    UnknownPreset { name: String, available: String },
}

impl SweepSpec {
    pub fn from_toml_str(s: &str) -> Result<Self, SweepError> {
        let spec: SweepSpec =
            toml::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, SweepError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.seeds.is_empty() {
            return Err(ConfigError::invalid("seeds", "at least one seed is required").into());
        }
        for cfg in self.configs() {
            cfg.validate().map_err(|source| SweepError::InvalidRun {
                key: RunKey::of(&cfg),
                source,
            })?;
        }
        Ok(())
    }

    /// Full cross-product of axes and seeds, in sort-key order.
    pub fn configs(&self) -> Vec<ScenarioConfig> {
        fn or_base<T: Copy>(axis: &[T], base: T) -> Vec<T> {
            if axis.is_empty() {
                vec![base]
            } else {
                axis.to_vec()
            }
        }
        let b = &self.base;
        let mut out = Vec::new();
        for &node_count in &or_base(&self.axes.node_count, b.node_count) {
            for &flow_count in &or_base(&self.axes.flow_count, b.flow_count) {
                for &k_policy in &or_base(&self.axes.k_policy, b.k_policy) {
                    for &protocol in &or_base(&self.axes.protocol, b.protocol) {
                        for &seed in &self.seeds {
                            out.push(ScenarioConfig {
                                node_count,
                                flow_count,
                                k_policy,
                                protocol,
                                rng_seed: seed,
                                ..b.clone()
                            });
                        }
                    }
                }
            }
        }
        out.sort_by_key(RunKey::of);
        out
    }

    pub fn run_count(&self) -> usize {
        let len = |n: usize| n.max(1);
        len(self.axes.node_count.len())
            * len(self.axes.flow_count.len())
            * len(self.axes.k_policy.len())
            * len(self.axes.protocol.len())
            * self.seeds.len()
    }
}

/// Outcome of one run inside a sweep.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub key: RunKey,
    pub report: AggregateReport,
    pub records: Vec<DiscoveryRecord>,
}

/// Run one scenario, turning a panic into an error naming the run.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunResult, SweepError> {
    let key = RunKey::of(config);
    let sim = Simulation::new(config.clone())
        .map_err(|source| SweepError::InvalidRun { key, source })?;
    let out = panic::catch_unwind(AssertUnwindSafe(|| sim.run())).map_err(|p| {
        let reason = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".to_string());
        SweepError::RunFailed { key, reason }
    })?;
    Ok(RunResult {
        key,
        report: out.report,
        records: out.records,
    })
}

/// Execute every run of `spec` on up to `parallelism` threads. Results come
/// back sorted by [`RunKey`] whatever the execution order.
pub fn run_sweep(spec: &SweepSpec, parallelism: usize) -> Result<Vec<RunResult>, SweepError> {
    spec.validate()?;
    let configs = spec.configs();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let mut results = pool.install(|| {
        configs
            .par_iter()
            .map(run_scenario)
            .collect::<Result<Vec<_>, _>>()
    })?;
    results.sort_by_key(|r| r.key);
    Ok(results)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub const AGGREGATE_HEADER: &str = "node_count,flow_count,k_policy,protocol,seed,discoveries,success_rate,mean_srb,srb_ci,mean_latency_s,mean_path_stretch";

pub fn aggregate_csv(results: &[RunResult]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for r in results {
        let a = &r.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.9},{}",
            r.key.csv_prefix(),
            a.discovery_count,
            opt(a.success_rate),
            opt(a.mean_srb),
            opt(a.srb_ci),
            a.mean_latency_s.map(|x| format!("{x:.9}")).unwrap_or_default(),
            opt(a.mean_path_stretch),
        );
    }
    out
}

pub const LATENCY_HEADER: &str =
    "node_count,flow_count,k_policy,protocol,seed,path_hops,discoveries,mean_latency_s";

/// Mean acquisition latency per established path length, for routes found
/// through a request (one-hop neighbor-table hits are skipped).
pub fn latency_by_hops_csv(results: &[RunResult]) -> String {
    let mut out = String::from(LATENCY_HEADER);
    out.push('\n');
    for r in results {
        let mut by_hops: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for rec in r.records.iter().filter(|rec| !rec.received.is_empty()) {
            if let (Ok(l), Some(h)) = (latency(rec), rec.path_hops) {
                by_hops.entry(h).or_default().push(l);
            }
        }
        for (hops, lats) in by_hops {
            let (mean, _) = mean_ci(&lats).expect("non-empty group");
            let _ = writeln!(
                out,
                "{},{},{},{:.9}",
                r.key.csv_prefix(),
                hops,
                lats.len(),
                mean
            );
        }
    }
    out
}

pub const RECORD_HEADER: &str = "node_count,flow_count,k_policy,protocol,seed,origin,target,seq,start_s,end_s,succeeded,received,transmitted,srb,path_hops,oracle_hops,latency_s";

/// One row per discovery.
pub fn records_csv(results: &[RunResult]) -> String {
    let mut out = String::from(RECORD_HEADER);
    out.push('\n');
    let num = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in results {
        for rec in &r.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.9},{},{},{},{},{},{},{},{}",
                r.key.csv_prefix(),
                rec.origin.0,
                rec.target.0,
                rec.seq.map(|s| s.to_string()).unwrap_or_default(),
                rec.start.as_secs(),
                rec.end.map(|e| format!("{:.9}", e.as_secs())).unwrap_or_default(),
                rec.succeeded,
                rec.received.len(),
                rec.transmitted.len(),
                opt(rec.srb()),
                num(rec.path_hops),
                num(rec.oracle_hops),
                latency(rec).ok().map(|l| format!("{l:.9}")).unwrap_or_default(),
            );
        }
    }
    out
}

/// Render the report kind selected by `spec`.
pub fn render(spec: &SweepSpec, results: &[RunResult]) -> String {
    match spec.report {
        ReportKind::Aggregate => aggregate_csv(results),
        ReportKind::LatencyByHops => latency_by_hops_csv(results),
    }
}

pub const DENSITIES: [usize; 4] = [50, 75, 100, 125];
pub const PRESET_NAMES: [&str; 4] = ["fig3", "fig5_6", "fig7", "fig8"];

fn preset_seeds() -> Vec<u64> {
    (1..=5).collect()
}

/// Built-in sweeps, all on the default scenario: 350 m x 350 m,
/// 900 s, random waypoint at up to 20 m/s.
pub fn preset(name: &str) -> Result<SweepSpec, SweepError> {
    let random_3_7 = KPolicy::RandomUniform { lo: 3, hi: 7 };
    let both = vec![Protocol::Prp, Protocol::Flood];
    let spec = match name {
        // SRB as a function of K, PRP only.
        "fig3" => SweepSpec {
            base: ScenarioConfig::default(),
            axes: Axes {
                node_count: DENSITIES.to_vec(),
                k_policy: [2, 3, 5, 7, 9]
                    .into_iter()
                    .map(KPolicy::Fixed)
                    .chain([KPolicy::RandomUniform { lo: 3, hi: 9 }])
                    .collect(),
                flow_count: vec![1],
                protocol: vec![Protocol::Prp],
            },
            seeds: preset_seeds(),
            report: ReportKind::Aggregate,
        },
        // Success rate and SRB against density, single flow.
        "fig5_6" => SweepSpec {
            base: ScenarioConfig::default(),
            axes: Axes {
                node_count: DENSITIES.to_vec(),
                k_policy: vec![random_3_7],
                flow_count: vec![1],
                protocol: both,
            },
            seeds: preset_seeds(),
            report: ReportKind::Aggregate,
        },
        // SRB with several concurrent flows.
        "fig7" => SweepSpec {
            base: ScenarioConfig::default(),
            axes: Axes {
                node_count: DENSITIES.to_vec(),
                k_policy: vec![random_3_7],
                flow_count: vec![2, 3, 5],
                protocol: both,
            },
            seeds: preset_seeds(),
            report: ReportKind::Aggregate,
        },
        // Acquisition latency grouped by path length.
        "fig8" => SweepSpec {
            base: ScenarioConfig::default(),
            axes: Axes {
                node_count: DENSITIES.to_vec(),
                k_policy: vec![random_3_7],
                flow_count: vec![1, 2, 3, 5],
                protocol: both,
            },
            seeds: preset_seeds(),
            report: ReportKind::LatencyByHops,
        },
        other => {
            return Err(SweepError::UnknownPreset {
                name: other.to_string(),
                available: PRESET_NAMES.join(", "),
            })
        }
    };
    Ok(spec)
}
