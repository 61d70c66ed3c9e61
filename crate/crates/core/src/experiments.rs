//! Monte Carlo drivers: replicate management, aggregation and snapshots.
//!
//! Replicate `i` uses `replicate_seed(master, i)` for both its initial
//! opinions and its event stream, at every threshold of a grid, so grid
//! points are compared on common random numbers. Records come back in
//! `(threshold, replicate)` order whatever the worker count.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    extremist_count, is_absorbing, random_initial, simulate, OpinionConfig, SimParams,
    StopCondition,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed::replicate_seed;

/// Slope of the coexistence floor `(1 - 12 eps) N`.
pub const COEXISTENCE_SLOPE: f64 = 12.0;
/// Prefactor of the coexistence failure probability `3 exp(-eps N)`.
pub const COEXISTENCE_PREFACTOR: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSpec {
    /// Human-readable graph name, e.g. `path:20`.
    pub graph: String,
    pub epsilons: Vec<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    pub stop: StopCondition,
    /// Parallelism only; never changes results.
    #[serde(skip)]
    pub workers: usize,
}

impl ExperimentSpec {
    pub fn new(
        graph: impl Into<String>,
        epsilons: Vec<f64>,
        replicates: usize,
        master_seed: u64,
    ) -> Self {
        ExperimentSpec {
            graph: graph.into(),
            epsilons,
            replicates,
            master_seed,
            stop: StopCondition::to_absorption(),
            workers: 1,
        }
    }

    pub fn with_stop(mut self, stop: StopCondition) -> Self {
        self.stop = stop;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("need at least one replicate".into()));
        }
        if self.epsilons.is_empty() {
            return Err(Error::InvalidArgument("empty threshold grid".into()));
        }
        if let Some(&e) = self.epsilons.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::EpsilonOutOfRange(e));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub seed: u64,
    pub epsilon: f64,
    /// Distinct opinions at the end of the run.
    pub nu: usize,
    pub absorbed: bool,
    pub consensus: bool,
    /// Extremists left at the end; only for `epsilon > 1/2`.
    pub final_extremists: Option<usize>,
    /// Whether the extremist set emptied; only for absorbed runs with `epsilon > 1/2`.
    pub theta_inf_zero: Option<bool>,
    pub initially_absorbing: bool,
    pub events: u64,
    /// Not serialized, so reports stay reproducible.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Point estimate with a `3 sigma / sqrt(R)` radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub radius: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Estimate {
                mean: f64::NAN,
                radius: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / n;
        if xs.len() < 2 {
            return Estimate { mean, radius: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Estimate {
            mean,
            radius: 3.0 * var.sqrt() / n.sqrt(),
        }
    }

    fn frequency(flags: impl Iterator<Item = bool>) -> Estimate {
        let xs: Vec<f64> = flags.map(|b| if b { 1.0 } else { 0.0 }).collect();
        Self::from_samples(&xs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub epsilon: f64,
    pub replicates: usize,
    pub nu: Estimate,
    pub nu_min: usize,
    pub nu_max: usize,
    pub nu_fraction: Estimate,
    pub absorbed: Estimate,
    pub consensus: Estimate,
    pub theta_inf_zero: Option<Estimate>,
    pub initially_absorbing: Estimate,
    pub events: Estimate,
}

impl Aggregate {
    fn from_records(epsilon: f64, n: usize, recs: &[&ReplicateRecord]) -> Aggregate {
        let nu: Vec<f64> = recs.iter().map(|r| r.nu as f64).collect();
        let fractions: Vec<f64> = nu.iter().map(|v| v / n as f64).collect();
        let events: Vec<f64> = recs.iter().map(|r| r.events as f64).collect();
        let theta: Vec<bool> = recs.iter().filter_map(|r| r.theta_inf_zero).collect();
        Aggregate {
            epsilon,
            replicates: recs.len(),
            nu: Estimate::from_samples(&nu),
            nu_min: recs.iter().map(|r| r.nu).min().unwrap_or(0),
            nu_max: recs.iter().map(|r| r.nu).max().unwrap_or(0),
            nu_fraction: Estimate::from_samples(&fractions),
            absorbed: Estimate::frequency(recs.iter().map(|r| r.absorbed)),
            consensus: Estimate::frequency(recs.iter().map(|r| r.consensus)),
            theta_inf_zero: (!theta.is_empty()).then(|| Estimate::frequency(theta.into_iter())),
            initially_absorbing: Estimate::frequency(recs.iter().map(|r| r.initially_absorbing)),
            events: Estimate::from_samples(&events),
        }
    }
}

/// A theoretical bound set against what the replicates show.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub epsilon: f64,
    pub observed: f64,
    pub bound: f64,
    pub holds: bool,
}

impl Check {
    fn new(name: &str, epsilon: f64, observed: f64, bound: f64, holds: bool) -> Check {
        Check {
            name: name.to_string(),
            epsilon,
            observed,
            bound,
            holds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub n_vertices: usize,
    pub records: Vec<ReplicateRecord>,
    pub aggregates: Vec<Aggregate>,
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    fn new(spec: &ExperimentSpec, g: &Graph, records: Vec<ReplicateRecord>) -> Self {
        let n = g.n_vertices();
        let aggregates = spec
            .epsilons
            .iter()
            .enumerate()
            .map(|(k, &eps)| {
                let recs: Vec<&ReplicateRecord> = records
                    [k * spec.replicates..(k + 1) * spec.replicates]
                    .iter()
                    .collect();
                Aggregate::from_records(eps, n, &recs)
            })
            .collect();
        ExperimentReport {
            spec: spec.clone(),
            n_vertices: n,
            records,
            aggregates,
            checks: Vec::new(),
        }
    }

    pub fn aggregate(&self, epsilon: f64) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.epsilon == epsilon)
    }

    pub fn all_checks_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Records in `(threshold, replicate)` order; thresholds are in the JSON report.
    pub fn records_csv(&self) -> String {
        let mut out = String::from("replicate,seed,nu,absorbed,consensus,theta_inf_zero,events\n");
        for r in &self.records {
            let theta = r.theta_inf_zero.map_or(String::new(), |b| b.to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.replicate, r.seed, r.nu, r.absorbed, r.consensus, theta, r.events
            ));
        }
        out
    }
}

fn run_replicate(
    g: &Graph,
    epsilon: f64,
    stop: StopCondition,
    replicate: usize,
    seed: u64,
) -> Result<(ReplicateRecord, OpinionConfig)> {
    let start = Instant::now();
    let init = random_initial(g, seed);
    let initially_absorbing = is_absorbing(g, &init, epsilon);
    let report = simulate(g, &init, &SimParams::new(epsilon, stop, seed))?;
    let nu = report.distinct_opinions();
    let final_extremists = if epsilon > 0.5 {
        Some(extremist_count(&report.final_opinions, epsilon)?)
    } else {
        None
    };
    let theta_inf_zero = match final_extremists {
        Some(x) if report.absorbed => Some(x == 0),
        _ => None,
    };
    let record = ReplicateRecord {
        replicate,
        seed,
        epsilon,
        nu,
        absorbed: report.absorbed,
        consensus: report.absorbed && nu == 1,
        final_extremists,
        theta_inf_zero,
        initially_absorbing,
        events: report.events,
        wall_time: start.elapsed(),
    };
    Ok((record, report.final_opinions))
}

/// Runs `R` replicates at every grid threshold. Also returns the final
/// configuration of replicate 0 at each threshold.
fn run_grid(
    g: &Graph,
    spec: &ExperimentSpec,
) -> Result<(Vec<ReplicateRecord>, Vec<OpinionConfig>)> {
    spec.validate()?;
    g.require_connected()?;
    let jobs: Vec<(f64, usize)> = spec
        .epsilons
        .iter()
        .flat_map(|&e| (0..spec.replicates).map(move |i| (e, i)))
        .collect();
    let job = |&(eps, i): &(f64, usize)| {
        let seed = replicate_seed(spec.master_seed, i as u64);
        run_replicate(g, eps, spec.stop, i, seed).map(|(rec, c)| (rec, (i == 0).then_some(c)))
    };
    let results: Vec<Result<_>> = if spec.workers == 1 {
        jobs.iter().map(job).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(job).collect())
    };
    let mut records = Vec::with_capacity(results.len());
    let mut firsts = Vec::new();
    for r in results {
        let (rec, first) = r?;
        records.push(rec);
        firsts.extend(first);
    }
    Ok((records, firsts))
}

fn bernoulli_margin(p: f64, replicates: usize) -> f64 {
    let p = p.clamp(0.0, 1.0);
    3.0 * (p * (1.0 - p) / replicates as f64).sqrt()
}

/// Runs toward absorption with `epsilon > 1/2` and checks the extremist
/// identity: the extremist set empties with probability `2 eps - 1`, and
/// an absorbed state has either no extremists or only extremists.
pub fn consensus_experiment(g: &Graph, spec: &ExperimentSpec) -> Result<ExperimentReport> {
    if let Some(&e) = spec.epsilons.iter().find(|&&e| !(e > 0.5 && e <= 1.0)) {
        return Err(Error::EpsilonOutOfRange(e));
    }
    let (records, _) = run_grid(g, spec)?;
    let mut report = ExperimentReport::new(spec, g, records);
    let n = g.n_vertices();
    let r = spec.replicates;
    for (k, &eps) in spec.epsilons.iter().enumerate() {
        let recs = &report.records[k * r..(k + 1) * r];
        let p = 2.0 * eps - 1.0;
        let margin = bernoulli_margin(p, r);
        let agg = &report.aggregates[k];
        let theta = agg.theta_inf_zero.map_or(f64::NAN, |e| e.mean);
        let all_absorbed = recs.iter().all(|rec| rec.absorbed);
        let bad = recs
            .iter()
            .filter(|rec| {
                rec.absorbed && !matches!(rec.final_extremists, Some(x) if x == 0 || x == n)
            })
            .count();
        report.checks.extend([
            Check::new(
                "extremists empty frequency = 2eps-1",
                eps,
                theta,
                p,
                all_absorbed && (theta - p).abs() <= margin,
            ),
            Check::new(
                "consensus frequency >= 2eps-1",
                eps,
                agg.consensus.mean,
                p,
                agg.consensus.mean >= p - margin,
            ),
            Check::new(
                "absorbed extremist count in {0, N}: violations",
                eps,
                bad as f64,
                0.0,
                bad == 0,
            ),
        ]);
    }
    Ok(report)
}

/// Absorbing runs on the path of `n` vertices against the coexistence bound:
/// at least `(1 - 12 eps) n` opinions survive except with probability at
/// most `3 exp(-eps n)`.
pub fn coexistence_experiment(n: usize, spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let g = Graph::path(n)?;
    let (records, _) = run_grid(&g, spec)?;
    let mut report = ExperimentReport::new(spec, &g, records);
    let r = spec.replicates;
    for (k, &eps) in spec.epsilons.iter().enumerate() {
        let floor = (1.0 - COEXISTENCE_SLOPE * eps) * n as f64;
        let recs = &report.records[k * r..(k + 1) * r];
        let violations = recs.iter().filter(|rec| (rec.nu as f64) < floor).count();
        let freq = violations as f64 / r as f64;
        let bound = (COEXISTENCE_PREFACTOR * (-eps * n as f64).exp()).min(1.0);
        let min_nu = report.aggregates[k].nu_min as f64;
        report.checks.extend([
            Check::new(
                "min opinions >= (1 - 12eps) N",
                eps,
                min_nu,
                floor,
                min_nu >= floor,
            ),
            Check::new(
                "violation frequency <= 3 exp(-eps N)",
                eps,
                freq,
                bound,
                freq <= bound + bernoulli_margin(bound, r),
            ),
        ]);
    }
    Ok(report)
}

/// Sweep output: the report plus replicate 0's final state at each threshold.
#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub report: ExperimentReport,
    pub width: usize,
    pub height: usize,
    pub snapshots: Vec<(f64, OpinionConfig)>,
}

/// Runs every grid threshold on the `width x height` torus, normally to a
/// fixed model time, and checks that the mean opinion count falls as the
/// threshold grows.
pub fn sweep_experiment(width: usize, height: usize, spec: &ExperimentSpec) -> Result<SweepOutput> {
    let g = Graph::torus(width, height)?;
    let (records, firsts) = run_grid(&g, spec)?;
    let mut report = ExperimentReport::new(spec, &g, records);
    let mut pairs: Vec<(f64, f64)> = report
        .aggregates
        .iter()
        .map(|a| (a.epsilon, a.nu.mean))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in pairs.windows(2) {
        report.checks.push(Check::new(
            "mean opinions strictly decrease in eps",
            w[1].0,
            w[1].1,
            w[0].1,
            w[1].1 < w[0].1,
        ));
    }
    let snapshots = spec.epsilons.iter().copied().zip(firsts).collect();
    Ok(SweepOutput {
        report,
        width,
        height,
        snapshots,
    })
}

/// Frequency of non-absorbing initial states against the union bound
/// `2 eps |E|`, plus the opinion fraction at the end of each run.
pub fn degree_bound_check(g: &Graph, spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let (records, _) = run_grid(g, spec)?;
    let mut report = ExperimentReport::new(spec, g, records);
    let r = spec.replicates;
    for (k, &eps) in spec.epsilons.iter().enumerate() {
        let bound = 2.0 * eps * g.n_edges() as f64;
        let observed = 1.0 - report.aggregates[k].initially_absorbing.mean;
        let holds = observed <= bound + bernoulli_margin(bound.min(1.0), r);
        report.checks.push(Check::new(
            "non-absorbing initial frequency <= 2 eps |E|",
            eps,
            observed,
            bound,
            holds,
        ));
    }
    Ok(report)
}

/// Binary PGM: `P5`, dimensions, `255`, then one byte per vertex in
/// row-major order, `round(opinion * 255)` with halves rounded up.
pub fn encode_pgm(c: &OpinionConfig, width: usize, height: usize) -> Result<Vec<u8>> {
    if width * height != c.len() {
        return Err(Error::InvalidArgument(format!(
            "{width}x{height} image needs {} opinions, got {}",
            width * height,
            c.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(c.values().iter().map(|&x| (x * 255.0 + 0.5).floor() as u8));
    Ok(out)
}

pub fn write_snapshot(c: &OpinionConfig, width: usize, height: usize, path: &Path) -> Result<()> {
    let bytes = encode_pgm(c, width, height)?;
    fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimates() {
        let e = Estimate::from_samples(&[1.0, 1.0, 1.0]);
        assert_eq!(
            e,
            Estimate {
                mean: 1.0,
                radius: 0.0
            }
        );
        let e = Estimate::from_samples(&[0.0, 2.0]);
        assert_eq!(e.mean, 1.0);
        assert!((e.radius - 3.0 * 2f64.sqrt() / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pgm_encoding() {
        let c = OpinionConfig::new(vec![0.0, 1.0, 0.5, 0.25, 0.999, 0.001]).unwrap();
        let bytes = encode_pgm(&c, 3, 2).unwrap();
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0, 255, 128, 64, 255, 0]);
        assert!(encode_pgm(&c, 2, 2).is_err());
        let black = encode_pgm(&OpinionConfig::constant(9, 0.0).unwrap(), 3, 3).unwrap();
        assert!(black[11..].iter().all(|&b| b == 0));
    }

    #[test]
    fn snapshot_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.pgm");
        write_snapshot(&OpinionConfig::constant(4, 1.0).unwrap(), 2, 2, &path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"P5\n2 2\n255\n\xff\xff\xff\xff");
        let missing = dir.path().join("no/such/dir/s.pgm");
        let err =
            write_snapshot(&OpinionConfig::constant(4, 1.0).unwrap(), 2, 2, &missing).unwrap_err();
        assert!(err.is_io());
    }

    #[test]
    fn spec_validation() {
        assert!(ExperimentSpec::new("g", vec![0.5], 0, 1)
            .validate()
            .is_err());
        assert!(ExperimentSpec::new("g", vec![1.5], 1, 1)
            .validate()
            .is_err());
        assert!(ExperimentSpec::new("g", vec![], 1, 1).validate().is_err());
        assert!(ExperimentSpec::new("g", vec![0.5], 1, 1)
            .with_workers(0)
            .validate()
            .is_err());
        assert!(ExperimentSpec::new("g", vec![0.0, 1.0], 1, 1)
            .validate()
            .is_ok());
    }

    #[test]
    fn consensus_rejects_low_threshold() {
        let g = Graph::path(5).unwrap();
        let spec = ExperimentSpec::new("path:5", vec![0.5], 3, 1);
        assert!(matches!(
            consensus_experiment(&g, &spec),
            Err(Error::EpsilonOutOfRange(_))
        ));
    }

    #[test]
    fn voter_limit_always_consensus() {
        let g = Graph::path(20).unwrap();
        let report =
            consensus_experiment(&g, &ExperimentSpec::new("path:20", vec![1.0], 100, 4)).unwrap();
        let agg = report.aggregate(1.0).unwrap();
        assert_eq!(agg.consensus.mean, 1.0);
        assert_eq!(agg.theta_inf_zero.unwrap().mean, 1.0);
        assert!(report.all_checks_hold(), "{:?}", report.checks);
    }

    #[test]
    fn frozen_paths_keep_every_opinion() {
        let report =
            coexistence_experiment(100, &ExperimentSpec::new("path:100", vec![0.0], 10, 2))
                .unwrap();
        assert!(report
            .records
            .iter()
            .all(|r| r.nu == 100 && r.events == 0 && r.initially_absorbing));
        assert!(report.all_checks_hold());
    }

    #[test]
    fn serial_and_parallel_reports_agree() {
        let spec = ExperimentSpec::new("torus:5x5", vec![0.0, 0.3, 1.0], 6, 99)
            .with_stop(StopCondition::until(20.0));
        let serial = sweep_experiment(5, 5, &spec).unwrap();
        let parallel = sweep_experiment(5, 5, &spec.clone().with_workers(3)).unwrap();
        assert_eq!(serial.report.to_json(), parallel.report.to_json());
        assert_eq!(serial.report.records_csv(), parallel.report.records_csv());
        assert_eq!(serial.snapshots, parallel.snapshots);
        assert_eq!(serial.snapshots.len(), 3);
        assert!(serial.report.aggregate(0.0).unwrap().nu.mean == 25.0);
    }

    #[test]
    fn report_layout() {
        let g = Graph::path(10).unwrap();
        let spec = ExperimentSpec::new("path:10", vec![0.75], 4, 5);
        let report = consensus_experiment(&g, &spec).unwrap();
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        for key in ["spec", "records", "aggregates"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert!(json["spec"].get("workers").is_none());
        assert!(json["records"][0].get("wall_time").is_none());
        let csv = report.records_csv();
        assert!(csv.starts_with("replicate,seed,nu,absorbed,consensus,theta_inf_zero,events\n"));
        assert_eq!(csv.lines().count(), 5);
        assert_eq!(report.records[1].seed, replicate_seed(5, 1));
    }

    #[test]
    fn degree_bound_at_zero_threshold() {
        let g = Graph::path(30).unwrap();
        let report =
            degree_bound_check(&g, &ExperimentSpec::new("path:30", vec![0.0], 20, 1)).unwrap();
        assert_eq!(report.aggregates[0].initially_absorbing.mean, 1.0);
        assert!(report.all_checks_hold());
    }
}
