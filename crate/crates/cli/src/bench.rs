//! Benchmark grid runner and its CSV and table outputs.
//!
//! Each (k, B, seed) triple yields one generated instance, solved or
//! exported once per configured method. Outputs for `rows.csv`:
//!
//! * `rows.csv`: one [`BenchRow`] per run, written as runs finish and
//!   rewritten in key order at the end;
//! * `rows_aggregate.csv` and `rows_aggregate.md`: per (k, B, method)
//!   averages, the latter in `time^solved | LB | UB | Gap` layout;
//! * `rows_cumulative.csv`: per method, the sorted solve times of solved
//!   runs and the sorted final gaps of unsolved ones, each with a running
//!   count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bpmcf::bdd::Diagrams;
use bpmcf::instgen::{generate, GenConfig};
use bpmcf::matching::{applies, solve_two_per_bin};
use bpmcf::mip::{emit_anf, emit_ip};
use bpmcf::oracle::{brute_force_solve, DEFAULT_LIMIT};
use bpmcf::search::{ConsistentPathSolver, SolverConfig};
use bpmcf::{canonical_order, objective_lower_bound, Error, Instance, SolveReport, Status};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_TIME_LIMIT_S: f64 = 1800.0;

pub const CSV_HEADER: [&str; 10] = [
    "k", "B", "seed", "method", "build_s", "time_s", "lb", "ub", "gap_pct", "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Bb,
    Oracle,
    Matching,
    IpEmit,
    AnfEmit,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Bb => "bb",
            Method::Oracle => "oracle",
            Method::Matching => "matching",
            Method::IpEmit => "ip-emit",
            Method::AnfEmit => "anf-emit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
    /// The model file was written; nothing was solved.
    Emitted,
    /// The method cannot handle this instance (matching on bins that fit
    /// three items).
    NotApplicable,
}

impl RowStatus {
    /// Finished within the limit: optimum or infeasibility proven, or model
    /// written.
    pub fn solved(self) -> bool {
        matches!(
            self,
            RowStatus::Optimal | RowStatus::Infeasible | RowStatus::Emitted
        )
    }
}

impl From<Status> for RowStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Optimal => RowStatus::Optimal,
            Status::Feasible => RowStatus::Feasible,
            Status::Infeasible => RowStatus::Infeasible,
            Status::TimeLimit => RowStatus::TimeLimit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub k: usize,
    #[serde(rename = "B")]
    pub capacity: u32,
    pub seed: u64,
    pub method: Method,
    pub build_s: f64,
    pub time_s: f64,
    pub lb: u32,
    pub ub: Option<u32>,
    pub gap_pct: f64,
    pub status: RowStatus,
}

impl BenchRow {
    fn key(&self) -> (usize, u32, u64, Method) {
        (self.k, self.capacity, self.seed, self.method)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    /// Seeds `0..n`.
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn values(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

/// `{"k": [10, 20], "B": [8], "seeds": 10, "methods": ["bb"], "time_limit_s": 300}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub k: Vec<usize>,
    #[serde(rename = "B")]
    pub capacity: Vec<u32>,
    pub seeds: Seeds,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_time_limit")]
    pub time_limit_s: f64,
}

fn default_methods() -> Vec<Method> {
    vec![Method::Bb]
}

fn default_time_limit() -> f64 {
    DEFAULT_TIME_LIMIT_S
}

impl BenchConfig {
    pub fn from_json(path: &Path) -> Result<Self> {
        let text = crate::error::read(path)?;
        let config: BenchConfig = serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if config.time_limit_s.is_nan() || config.time_limit_s <= 0.0 {
            return Err(CliError::Usage("time_limit_s must be positive".into()));
        }
        for &k in &config.k {
            for &b in &config.capacity {
                GenConfig::new(k, b, 0)?;
            }
        }
        Ok(config)
    }
}

fn row_from_report(
    cfg: &GenConfig,
    method: Method,
    build_s: f64,
    report: &SolveReport,
) -> BenchRow {
    BenchRow {
        k: cfg.k,
        capacity: cfg.capacity,
        seed: cfg.seed,
        method,
        build_s,
        time_s: report.elapsed_s,
        lb: report.lower_bound,
        ub: report.upper_bound,
        gap_pct: report.gap_pct,
        status: report.status.into(),
    }
}

fn unsolved_row(
    cfg: &GenConfig,
    instance: &Instance,
    method: Method,
    build_s: f64,
    time_s: f64,
    status: RowStatus,
) -> BenchRow {
    BenchRow {
        k: cfg.k,
        capacity: cfg.capacity,
        seed: cfg.seed,
        method,
        build_s,
        time_s,
        lb: objective_lower_bound(instance),
        ub: None,
        gap_pct: f64::INFINITY,
        status,
    }
}

/// Generates the instance for `cfg` and runs `method` on it.
pub fn run_one(cfg: &GenConfig, method: Method, time_limit_s: f64) -> Result<BenchRow> {
    let instance = generate(cfg);
    Ok(match method {
        Method::Bb => {
            let solver = ConsistentPathSolver::new(&instance)?;
            let out = solver.solve(&SolverConfig::default().with_time_limit(time_limit_s));
            row_from_report(cfg, method, solver.build_seconds(), &out.report)
        }
        Method::Oracle => {
            let start = Instant::now();
            match brute_force_solve(&instance, DEFAULT_LIMIT) {
                Ok(out) => row_from_report(cfg, method, 0.0, &out.report),
                Err(Error::BudgetExceeded { .. }) => unsolved_row(
                    cfg,
                    &instance,
                    method,
                    0.0,
                    start.elapsed().as_secs_f64(),
                    RowStatus::TimeLimit,
                ),
                Err(e) => return Err(e.into()),
            }
        }
        Method::Matching => {
            if applies(&instance) {
                let out = solve_two_per_bin(&instance)?;
                row_from_report(cfg, method, 0.0, &out.report)
            } else {
                unsolved_row(cfg, &instance, method, 0.0, 0.0, RowStatus::NotApplicable)
            }
        }
        Method::IpEmit => {
            let canonical = canonical_order(&instance).instance;
            let start = Instant::now();
            emit_ip(&canonical);
            let t = start.elapsed().as_secs_f64();
            unsolved_row(cfg, &instance, method, 0.0, t, RowStatus::Emitted)
        }
        Method::AnfEmit => {
            let canonical = canonical_order(&instance).instance;
            let start = Instant::now();
            let diagrams = Diagrams::build(&canonical)?;
            let build_s = start.elapsed().as_secs_f64();
            let start = Instant::now();
            emit_anf(&canonical, &diagrams);
            let t = start.elapsed().as_secs_f64();
            unsolved_row(cfg, &instance, method, build_s, t, RowStatus::Emitted)
        }
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    w.write_record(CSV_HEADER)?;
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(w)
}

pub fn write_rows(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_rows(path: &Path) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(CliError::from))
        .collect()
}

/// Runs the grid, appending each row to `out_csv` as soon as it is known.
/// `progress` sees every row in run order.
pub fn run_bench(
    config: &BenchConfig,
    out_csv: &Path,
    mut progress: impl FnMut(&BenchRow),
) -> Result<Vec<BenchRow>> {
    let mut writer = csv_writer(out_csv)?;
    let mut rows = Vec::new();
    for &k in &config.k {
        for &capacity in &config.capacity {
            for seed in config.seeds.values() {
                let cfg = GenConfig::new(k, capacity, seed)?;
                for &method in &config.methods {
                    let row = run_one(&cfg, method, config.time_limit_s)?;
                    writer.serialize(&row)?;
                    writer.flush().map_err(|source| CliError::Io {
                        path: out_csv.to_path_buf(),
                        source,
                    })?;
                    progress(&row);
                    rows.push(row);
                }
            }
        }
    }
    drop(writer);
    rows.sort_by_key(BenchRow::key);
    write_rows(out_csv, &rows)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub k: usize,
    #[serde(rename = "B")]
    pub capacity: u32,
    pub method: Method,
    pub instances: usize,
    pub solved: usize,
    /// Mean time over solved runs only.
    pub avg_time_s: Option<f64>,
    pub avg_lb: f64,
    /// Mean over runs that found a solution.
    pub avg_ub: Option<f64>,
    /// Mean over runs with a finite gap.
    pub avg_gap_pct: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Per (k, B, method) averages. Runs marked not applicable are left out.
pub fn aggregate(rows: &[BenchRow]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(usize, u32, Method), Vec<&BenchRow>> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.status != RowStatus::NotApplicable) {
        groups
            .entry((row.k, row.capacity, row.method))
            .or_default()
            .push(row);
    }
    groups
        .into_iter()
        .map(|((k, capacity, method), group)| AggregateRow {
            k,
            capacity,
            method,
            instances: group.len(),
            solved: group.iter().filter(|r| r.status.solved()).count(),
            avg_time_s: mean(group.iter().filter(|r| r.status.solved()).map(|r| r.time_s)),
            avg_lb: mean(group.iter().map(|r| r.lb as f64)).unwrap_or(0.0),
            avg_ub: mean(group.iter().filter_map(|r| r.ub.map(f64::from))),
            avg_gap_pct: mean(group.iter().map(|r| r.gap_pct).filter(|g| g.is_finite())),
        })
        .collect()
}

/// Markdown table; solve times carry the solved count as `^n`, `-` marks
/// an empty average.
pub fn format_table(rows: &[AggregateRow]) -> String {
    let mut s =
        String::from("| k | B | method | Time | LB | UB | Gap |\n|---|---|---|---|---|---|---|\n");
    let opt = |v: Option<f64>, digits: usize| match v {
        Some(v) => format!("{v:.digits$}"),
        None => "-".to_string(),
    };
    for r in rows {
        let time = match r.avg_time_s {
            Some(t) => format!("{t:.2}^{}", r.solved),
            None => "-".to_string(),
        };
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {:.1} | {} | {} |",
            r.k,
            r.capacity,
            r.method,
            time,
            r.avg_lb,
            opt(r.avg_ub, 1),
            opt(r.avg_gap_pct, 1)
        );
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Time,
    Gap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeRow {
    pub method: Method,
    pub metric: Metric,
    pub value: f64,
    pub count: usize,
}

/// Solved runs by time and unsolved runs by final gap, each sorted and
/// paired with the number of runs at or below that value.
pub fn cumulative(rows: &[BenchRow]) -> Vec<CumulativeRow> {
    let mut by_method: BTreeMap<Method, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.status != RowStatus::NotApplicable) {
        let entry = by_method.entry(row.method).or_default();
        if row.status.solved() {
            entry.0.push(row.time_s);
        } else if row.gap_pct.is_finite() {
            entry.1.push(row.gap_pct);
        }
    }
    let mut out = Vec::new();
    for (method, (mut times, mut gaps)) in by_method {
        for (metric, values) in [(Metric::Time, &mut times), (Metric::Gap, &mut gaps)] {
            values.sort_by(f64::total_cmp);
            out.extend(values.iter().enumerate().map(|(i, &value)| CumulativeRow {
                method,
                metric,
                value,
                count: i + 1,
            }));
        }
    }
    out
}

/// Paths of the derived reports for a row file `dir/name.csv`.
pub struct ReportPaths {
    pub aggregate_csv: PathBuf,
    pub aggregate_table: PathBuf,
    pub cumulative_csv: PathBuf,
}

impl ReportPaths {
    pub fn for_rows(out_csv: &Path) -> Self {
        let stem = out_csv
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "bench".into());
        let sibling = |suffix: &str| out_csv.with_file_name(format!("{stem}{suffix}"));
        ReportPaths {
            aggregate_csv: sibling("_aggregate.csv"),
            aggregate_table: sibling("_aggregate.md"),
            cumulative_csv: sibling("_cumulative.csv"),
        }
    }
}

/// Writes the aggregate and cumulative reports; returns the table text.
pub fn write_reports(rows: &[BenchRow], out_csv: &Path) -> Result<String> {
    let paths = ReportPaths::for_rows(out_csv);
    let agg = aggregate(rows);
    let table = format_table(&agg);

    let mut w = csv::Writer::from_path(&paths.aggregate_csv)?;
    if agg.is_empty() {
        w.write_record([
            "k",
            "B",
            "method",
            "instances",
            "solved",
            "avg_time_s",
            "avg_lb",
            "avg_ub",
            "avg_gap_pct",
        ])?;
    }
    for r in &agg {
        w.serialize(r)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: paths.aggregate_csv.clone(),
        source,
    })?;

    let mut w = csv::Writer::from_path(&paths.cumulative_csv)?;
    let cum = cumulative(rows);
    if cum.is_empty() {
        w.write_record(["method", "metric", "value", "count"])?;
    }
    for r in &cum {
        w.serialize(r)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: paths.cumulative_csv.clone(),
        source,
    })?;

    let mut f = File::create(&paths.aggregate_table).map_err(|source| CliError::Io {
        path: paths.aggregate_table.clone(),
        source,
    })?;
    f.write_all(table.as_bytes())
        .map_err(|source| CliError::Io {
            path: paths.aggregate_table.clone(),
            source,
        })?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(
        seed: u64,
        status: RowStatus,
        time_s: f64,
        lb: u32,
        ub: Option<u32>,
        gap_pct: f64,
    ) -> BenchRow {
        BenchRow {
            k: 10,
            capacity: 8,
            seed,
            method: Method::Bb,
            build_s: 0.0,
            time_s,
            lb,
            ub,
            gap_pct,
            status,
        }
    }

    #[test]
    fn aggregate_averages_solved_times_only() {
        let rows = vec![
            row(0, RowStatus::Optimal, 1.0, 10, Some(10), 0.0),
            row(1, RowStatus::Optimal, 3.0, 12, Some(12), 0.0),
            row(2, RowStatus::TimeLimit, 300.0, 9, Some(10), 10.0),
        ];
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 1);
        let a = &agg[0];
        assert_eq!((a.instances, a.solved), (3, 2));
        assert_eq!(a.avg_time_s, Some(2.0));
        assert!((a.avg_lb - 31.0 / 3.0).abs() < 1e-12);
        assert_eq!(a.avg_gap_pct, Some(10.0 / 3.0));
        assert_eq!(
            format_table(&agg).lines().nth(2).unwrap(),
            "| 10 | 8 | bb | 2.00^2 | 10.3 | 10.7 | 3.3 |"
        );
    }

    #[test]
    fn unsolved_groups_show_dash() {
        let rows = vec![row(0, RowStatus::TimeLimit, 5.0, 3, None, f64::INFINITY)];
        let agg = aggregate(&rows);
        assert_eq!(agg[0].avg_time_s, None);
        assert!(format_table(&agg).contains("| - | 3.0 | - | - |"));
    }

    #[test]
    fn cumulative_counts_are_running() {
        let rows = vec![
            row(0, RowStatus::Optimal, 2.0, 1, Some(1), 0.0),
            row(1, RowStatus::Optimal, 1.0, 1, Some(1), 0.0),
            row(2, RowStatus::TimeLimit, 9.0, 1, Some(2), 50.0),
        ];
        let c = cumulative(&rows);
        let got: Vec<_> = c.iter().map(|r| (r.metric, r.value, r.count)).collect();
        assert_eq!(
            got,
            vec![
                (Metric::Time, 1.0, 1),
                (Metric::Time, 2.0, 2),
                (Metric::Gap, 50.0, 1)
            ]
        );
    }

    #[test]
    fn config_parsing() {
        let c: BenchConfig = serde_json::from_str(r#"{"k":[10],"B":[8],"seeds":3}"#).unwrap();
        assert_eq!(c.seeds.values(), vec![0, 1, 2]);
        assert_eq!(c.methods, vec![Method::Bb]);
        assert_eq!(c.time_limit_s, DEFAULT_TIME_LIMIT_S);
        let c: BenchConfig = serde_json::from_str(
            r#"{"k":[],"B":[8],"seeds":[4,9],"methods":["oracle","anf-emit"],"time_limit_s":5}"#,
        )
        .unwrap();
        assert_eq!(c.seeds.values(), vec![4, 9]);
        assert_eq!(c.methods, vec![Method::Oracle, Method::AnfEmit]);
        assert!(
            serde_json::from_str::<BenchConfig>(r#"{"k":[1],"B":[8],"seeds":1,"x":1}"#).is_err()
        );
    }

    #[test]
    fn report_paths() {
        let p = ReportPaths::for_rows(Path::new("/tmp/out/rows.csv"));
        assert_eq!(p.aggregate_table, Path::new("/tmp/out/rows_aggregate.md"));
        assert_eq!(p.cumulative_csv, Path::new("/tmp/out/rows_cumulative.csv"));
    }
}
