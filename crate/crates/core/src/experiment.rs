//! Reproduction harness: the log-log error metric, seed-averaged traces,
//! scenario files and trace comparison.
//!
//! The metric is `ln(ln(1 + e))` with natural logarithms on both layers,
//! where `e` is a relative error clamped below at `1e-15`. Traces average
//! the metric over sample paths (not the metric of an averaged iterate).

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::info;
use ndarray::Array2;

use crate::drk::{self, DrkOptions, DrkRun, Variant};
use crate::error::{Error, Result};
use crate::gossip::{self, GossipConfig, GossipRun, METRIC_FLOOR};
use crate::graph::{self, Graph, Lobes};
use crate::scalar::Real;
use crate::spectral::{effective_resistances, spectral, ResistanceTable};

/// `ln(ln(1 + max(rel_err, 1e-15)))`
pub fn metric(rel_err: f64) -> f64 {
    rel_err.max(METRIC_FLOOR).ln_1p().ln()
}

/// Seed-averaged metric samples on a common event grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub events: Vec<u64>,
    /// Metric values, one row per sample path in seed order.
    pub per_seed: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub comm_mean: Option<Vec<f64>>,
    pub lobe_left_mean: Option<Vec<f64>>,
    pub lobe_right_mean: Option<Vec<f64>>,
}

fn column_means(rows: &[&[f64]]) -> Vec<f64> {
    let len = rows.first().map_or(0, |r| r.len());
    let count = rows.len() as f64;
    (0..len)
        .map(|k| rows.iter().fold(0.0, |acc, r| acc + r[k]) / count)
        .collect()
}

impl ConvergenceTrace {
    /// Averages per-path metric rows that share the sample grid `events`.
    pub fn aggregate(events: Vec<u64>, per_seed: Vec<Vec<f64>>) -> Result<Self> {
        if per_seed.is_empty() {
            return Err(Error::TraceMismatch("no sample paths".into()));
        }
        if let Some(k) = per_seed.iter().position(|r| r.len() != events.len()) {
            return Err(Error::TraceMismatch(format!("path {k} has {} samples, expected {}", per_seed[k].len(), events.len())));
        }
        let rows: Vec<&[f64]> = per_seed.iter().map(Vec::as_slice).collect();
        let mean = column_means(&rows);
        Ok(Self { events, per_seed, mean, comm_mean: None, lobe_left_mean: None, lobe_right_mean: None })
    }

    pub fn from_drk<T: Real>(runs: &[DrkRun<T>]) -> Result<Self> {
        let events = runs.first().map(|r| r.trace.events.clone()).unwrap_or_default();
        if runs.iter().any(|r| r.trace.events != events) {
            return Err(Error::TraceMismatch("sample paths recorded different events".into()));
        }
        let per_seed = runs.iter().map(|r| r.trace.rel_err.iter().map(|&e| metric(e)).collect()).collect();
        let mut trace = Self::aggregate(events, per_seed)?;
        let comm: Vec<Vec<f64>> = runs.iter().map(|r| r.trace.comm.iter().map(|&c| c as f64).collect()).collect();
        trace.comm_mean = Some(column_means(&comm.iter().map(Vec::as_slice).collect::<Vec<_>>()));
        Ok(trace)
    }

    pub fn from_gossip<T: Real>(runs: &[GossipRun<T>]) -> Result<Self> {
        let events = runs.first().map(|r| r.trace.events.clone()).unwrap_or_default();
        if runs.iter().any(|r| r.trace.events != events) {
            return Err(Error::TraceMismatch("sample paths recorded different events".into()));
        }
        let per_seed = runs.iter().map(|r| r.trace.error.iter().map(|&e| metric(e)).collect()).collect();
        let mut trace = Self::aggregate(events, per_seed)?;
        let lobe = |f: fn(&GossipRun<T>) -> Option<&Vec<f64>>| -> Option<Vec<f64>> {
            let rows: Option<Vec<&[f64]>> = runs.iter().map(|r| f(r).map(Vec::as_slice)).collect();
            rows.map(|r| column_means(&r))
        };
        trace.lobe_left_mean = lobe(|r| r.trace.lobe_left.as_ref());
        trace.lobe_right_mean = lobe(|r| r.trace.lobe_right.as_ref());
        Ok(trace)
    }

    /// First recorded event whose mean metric is at or below `threshold`.
    pub fn first_crossing(&self, threshold: f64) -> Option<u64> {
        self.events.iter().zip(&self.mean).find(|(_, &m)| m <= threshold).map(|(&k, _)| k)
    }

    /// CSV with columns `event,metric_mean,comm_cumulative_mean` for D-RK
    /// traces or `event,metric_mean,lobeL_mean,lobeR_mean` for gossip.
    pub fn to_csv(&self, kind: TraceKind) -> String {
        let mut out = String::new();
        match kind {
            TraceKind::Drk => {
                out.push_str("event,metric_mean,comm_cumulative_mean\n");
                for (k, &e) in self.events.iter().enumerate() {
                    let c = self.comm_mean.as_ref().map(|c| c[k].to_string()).unwrap_or_default();
                    let _ = writeln!(out, "{e},{},{c}", self.mean[k]);
                }
            }
            TraceKind::Gossip => {
                out.push_str("event,metric_mean,lobeL_mean,lobeR_mean\n");
                for (k, &e) in self.events.iter().enumerate() {
                    let l = self.lobe_left_mean.as_ref().map(|v| v[k].to_string()).unwrap_or_default();
                    let r = self.lobe_right_mean.as_ref().map(|v| v[k].to_string()).unwrap_or_default();
                    let _ = writeln!(out, "{e},{},{l},{r}", self.mean[k]);
                }
            }
        }
        out
    }

    /// Parses either CSV layout. Per-seed rows are not stored in the file
    /// and come back empty.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty trace".into() })?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        let kind = match cols.as_slice() {
            ["event", "metric_mean", "comm_cumulative_mean"] => TraceKind::Drk,
            ["event", "metric_mean", "lobeL_mean", "lobeR_mean"] => TraceKind::Gossip,
            _ => return Err(Error::Parse { line: 1, msg: format!("unknown trace header {header:?}") }),
        };
        let mut events = Vec::new();
        let mut mean = Vec::new();
        let mut extra: [Vec<Option<f64>>; 2] = [Vec::new(), Vec::new()];
        for (idx, line) in lines {
            let bad = |what: &str| Error::Parse { line: idx + 1, msg: format!("bad {what}") };
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != cols.len() {
                return Err(bad("column count"));
            }
            events.push(f[0].parse().map_err(|_| bad("event"))?);
            mean.push(f[1].parse().map_err(|_| bad("metric"))?);
            for (slot, field) in extra.iter_mut().zip(&f[2..]) {
                slot.push(if field.is_empty() { None } else { Some(field.parse().map_err(|_| bad("value"))?) });
            }
        }
        let full = |v: &[Option<f64>]| -> Option<Vec<f64>> {
            if v.is_empty() {
                None
            } else {
                v.iter().copied().collect()
            }
        };
        let mut trace = Self {
            events,
            per_seed: Vec::new(),
            mean,
            comm_mean: None,
            lobe_left_mean: None,
            lobe_right_mean: None,
        };
        match kind {
            TraceKind::Drk => trace.comm_mean = full(&extra[0]),
            TraceKind::Gossip => {
                trace.lobe_left_mean = full(&extra[0]);
                trace.lobe_right_mean = full(&extra[1]);
            }
        }
        Ok(trace)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Drk,
    Gossip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub events_a: Option<u64>,
    pub events_b: Option<u64>,
    /// `events_a / events_b`, only when both traces cross.
    pub speedup: Option<f64>,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<u64>| v.map_or_else(|| "not reached".to_string(), |k| k.to_string());
        writeln!(f, "events_a: {}", show(self.events_a))?;
        writeln!(f, "events_b: {}", show(self.events_b))?;
        match self.speedup {
            Some(s) => write!(f, "speedup: {s}"),
            None => write!(f, "speedup: not reached"),
        }
    }
}

/// First crossings of `threshold` (on the metric scale) in two traces over
/// the same event grid.
pub fn compare(a: &ConvergenceTrace, b: &ConvergenceTrace, threshold: f64) -> Result<Comparison> {
    if a.events != b.events {
        return Err(Error::TraceMismatch("traces were sampled at different events".into()));
    }
    let events_a = a.first_crossing(threshold);
    let events_b = b.first_crossing(threshold);
    let speedup = match (events_a, events_b) {
        (Some(x), Some(y)) if y > 0 => Some(x as f64 / y as f64),
        (Some(0), Some(0)) => Some(1.0),
        _ => None,
    };
    Ok(Comparison { events_a, events_b, speedup })
}

/// Graph source: a generator with parameters or an edge-list file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSpec {
    SmallWorld { n: usize, m: usize, seed: u64 },
    Barbell { n: usize },
    File(PathBuf),
}

impl GraphSpec {
    pub fn build<T: Real>(&self) -> Result<(Graph<T>, Option<Lobes>)> {
        match self {
            GraphSpec::SmallWorld { n, m, seed } => Ok((graph::small_world(*n, *m, *seed)?, None)),
            GraphSpec::Barbell { n } => Ok((graph::barbell(*n)?, Some(Lobes::barbell(*n)))),
            GraphSpec::File(p) => Ok((Graph::from_edge_list(p)?, None)),
        }
    }

    fn rebase(&self, base: &Path) -> Self {
        match self {
            GraphSpec::File(p) if p.is_relative() => GraphSpec::File(base.join(p)),
            other => other.clone(),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::SmallWorld { n, m, seed } => write!(f, "small-world:{n}:{m}:{seed}"),
            GraphSpec::Barbell { n } => write!(f, "barbell:{n}"),
            GraphSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    /// `small-world:N:M:SEED`, `barbell:N`, or a file path.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Scenario(format!("bad graph spec {s:?}"));
        let num = |v: &str| v.parse::<u64>().map_err(|_| bad());
        if let Some(rest) = s.strip_prefix("small-world:") {
            let f: Vec<&str> = rest.split(':').collect();
            if f.len() != 3 {
                return Err(bad());
            }
            return Ok(GraphSpec::SmallWorld { n: num(f[0])? as usize, m: num(f[1])? as usize, seed: num(f[2])? });
        }
        if let Some(rest) = s.strip_prefix("barbell:") {
            return Ok(GraphSpec::Barbell { n: num(rest)? as usize });
        }
        if s.is_empty() {
            return Err(bad());
        }
        Ok(GraphSpec::File(PathBuf::from(s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    DrkStandard,
    DrkNormalized,
    CyclicKaczmarz,
    GossipClassic,
    GossipEffres,
}

impl Algorithm {
    pub fn trace_kind(self) -> TraceKind {
        match self {
            Algorithm::GossipClassic | Algorithm::GossipEffres => TraceKind::Gossip,
            _ => TraceKind::Drk,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::DrkStandard => "drk-standard",
            Algorithm::DrkNormalized => "drk-normalized",
            Algorithm::CyclicKaczmarz => "cyclic-kaczmarz",
            Algorithm::GossipClassic => "gossip-classic",
            Algorithm::GossipEffres => "gossip-effres",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "drk-standard" => Algorithm::DrkStandard,
            "drk-normalized" => Algorithm::DrkNormalized,
            "cyclic-kaczmarz" => Algorithm::CyclicKaczmarz,
            "gossip-classic" => Algorithm::GossipClassic,
            "gossip-effres" => Algorithm::GossipEffres,
            _ => return Err(Error::Scenario(format!("unknown algorithm {s:?}"))),
        })
    }
}

/// Initial gossip values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Init {
    /// Left lobe `N(100, 1)`, right lobe `N(0, 1)`, drawn per sample path.
    BarbellNormal,
    /// One value per line, node order, shared by all paths.
    File(PathBuf),
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Init::BarbellNormal => f.write_str("barbell-normal"),
            Init::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "barbell-normal" {
            Ok(Init::BarbellNormal)
        } else if let Some(p) = s.strip_prefix("file:") {
            Ok(Init::File(PathBuf::from(p)))
        } else {
            Err(Error::Scenario(format!("unknown init {s:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        })
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" => Ok(Precision::F32),
            "f64" => Ok(Precision::F64),
            _ => Err(Error::Scenario(format!("unknown precision {s:?}"))),
        }
    }
}

/// One experiment: graph, algorithm and sampling budget.
///
/// Stored as `key = value` lines; `#` starts a comment. Relative paths are
/// resolved against the scenario file's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub graph: GraphSpec,
    pub algorithm: Algorithm,
    pub events: u64,
    pub seeds: u64,
    /// Sample paths use seeds `seed, seed + 1, …, seed + seeds - 1`.
    pub seed: u64,
    pub stride: usize,
    /// Relative error used for the events-to-threshold summary.
    pub threshold: f64,
    pub init: Init,
    /// Resistance table (`i,j,R`) for `gossip-effres`; computed by the
    /// dense oracle when absent.
    pub resistances: Option<PathBuf>,
    pub precision: Precision,
    pub out: Option<PathBuf>,
}

impl Scenario {
    pub fn new(graph: GraphSpec, algorithm: Algorithm) -> Self {
        Self {
            graph,
            algorithm,
            events: 10_000,
            seeds: 100,
            seed: 0,
            stride: 1,
            threshold: 1e-6,
            init: Init::BarbellNormal,
            resistances: None,
            precision: Precision::F64,
            out: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut graph = None;
        let mut algorithm = None;
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(Error::Parse { line: idx + 1, msg: "expected key = value".into() })?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "graph" => graph = Some(v.parse()?),
                "algorithm" => algorithm = Some(v.parse()?),
                _ => pairs.push((idx + 1, k.to_string(), v.to_string())),
            }
        }
        let mut s = Scenario::new(
            graph.ok_or_else(|| Error::Scenario("missing key graph".into()))?,
            algorithm.ok_or_else(|| Error::Scenario("missing key algorithm".into()))?,
        );
        for (line, k, v) in pairs {
            let bad = || Error::Parse { line, msg: format!("bad value {v:?} for {k}") };
            match k.as_str() {
                "events" => s.events = v.parse().map_err(|_| bad())?,
                "seeds" => s.seeds = v.parse().map_err(|_| bad())?,
                "seed" => s.seed = v.parse().map_err(|_| bad())?,
                "stride" => s.stride = v.parse().map_err(|_| bad())?,
                "threshold" => s.threshold = v.parse().map_err(|_| bad())?,
                "init" => s.init = v.parse()?,
                "resistances" => s.resistances = Some(PathBuf::from(v)),
                "precision" => s.precision = v.parse()?,
                "out" => s.out = Some(PathBuf::from(v)),
                _ => return Err(Error::Parse { line, msg: format!("unknown key {k:?}") }),
            }
        }
        if s.events == 0 || s.seeds == 0 || s.stride == 0 {
            return Err(Error::Scenario("events, seeds and stride must be positive".into()));
        }
        if !(s.threshold > 0.0) {
            return Err(Error::Scenario("threshold must be positive".into()));
        }
        Ok(s)
    }

    /// Loads a scenario file and resolves its relative paths.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut s = Self::parse(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        s.graph = s.graph.rebase(base);
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Init::File(p) = &mut s.init {
            rebase(p);
        }
        if let Some(p) = s.resistances.as_mut() {
            rebase(p);
        }
        if let Some(p) = s.out.as_mut() {
            rebase(p);
        }
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut t = String::new();
        let _ = writeln!(t, "graph = {}", self.graph);
        let _ = writeln!(t, "algorithm = {}", self.algorithm);
        let _ = writeln!(t, "events = {}", self.events);
        let _ = writeln!(t, "seeds = {}", self.seeds);
        let _ = writeln!(t, "seed = {}", self.seed);
        let _ = writeln!(t, "stride = {}", self.stride);
        let _ = writeln!(t, "threshold = {:e}", self.threshold);
        let _ = writeln!(t, "init = {}", self.init);
        if let Some(p) = &self.resistances {
            let _ = writeln!(t, "resistances = {}", p.display());
        }
        let _ = writeln!(t, "precision = {}", self.precision);
        if let Some(p) = &self.out {
            let _ = writeln!(t, "out = {}", p.display());
        }
        t
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub trace: ConvergenceTrace,
    pub csv: String,
    pub final_metric: f64,
    /// First event where the mean metric reaches `metric(threshold)`.
    pub events_to_threshold: Option<u64>,
    /// Total communications divided by events actually simulated.
    pub mean_comm_per_event: Option<f64>,
    /// Per sample path, the event at which the relative error first
    /// reached `1e-13` (D-RK algorithms only).
    pub finite_convergence: Vec<Option<u64>>,
    /// Gossip paths whose average was zero report absolute dispersion.
    pub absolute_error: bool,
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.scenario;
        writeln!(f, "scenario: {} on {} ({} paths, {} events)", s.algorithm, s.graph, self.trace.per_seed.len(), s.events)?;
        writeln!(f, "final mean metric: {}", self.final_metric)?;
        match self.events_to_threshold {
            Some(k) => writeln!(f, "events to relative error {:e}: {k}", s.threshold)?,
            None => writeln!(f, "events to relative error {:e}: not reached", s.threshold)?,
        }
        if let Some(c) = self.mean_comm_per_event {
            writeln!(f, "mean communications per event: {c}")?;
        }
        if !self.finite_convergence.is_empty() {
            let hit: Vec<u64> = self.finite_convergence.iter().flatten().copied().collect();
            write!(f, "paths reaching 1e-13: {}/{}", hit.len(), self.finite_convergence.len())?;
            if let (Some(lo), Some(hi)) = (hit.iter().min(), hit.iter().max()) {
                write!(f, " (events {lo}..={hi})")?;
            }
            writeln!(f)?;
        }
        if self.absolute_error {
            writeln!(f, "note: zero average, metric uses absolute dispersion")?;
        }
        Ok(())
    }
}

/// Runs every sample path, aggregates, and writes the CSV to `out` when set.
/// Nothing is written if any path fails.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioReport> {
    let report = match s.precision {
        Precision::F64 => run_scenario_as::<f64>(s)?,
        Precision::F32 => run_scenario_as::<f32>(s)?,
    };
    if let Some(out) = &s.out {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(out, &report.csv)?;
    }
    Ok(report)
}

fn read_values<T: Real>(path: &Path, n: usize) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path)?;
    let values = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| l.trim().parse().map_err(|_| Error::Parse { line: i + 1, msg: "bad value".into() }))
        .collect::<Result<Vec<T>>>()?;
    if values.len() != n {
        return Err(Error::Dimension(format!("{} initial values for {n} nodes", values.len())));
    }
    Ok(values)
}

pub fn run_scenario_as<T: Real>(s: &Scenario) -> Result<ScenarioReport> {
    let (g, lobes) = s.graph.build::<T>()?;
    let mut finite_convergence = Vec::new();
    let mut mean_comm_per_event = None;
    let mut absolute_error = false;

    let trace = match s.algorithm {
        Algorithm::DrkStandard | Algorithm::DrkNormalized | Algorithm::CyclicKaczmarz => {
            let reference: Array2<T> = spectral(&g)?.pinv;
            let opts = DrkOptions { stride: s.stride, ..Default::default() };
            let runs = match s.algorithm {
                Algorithm::CyclicKaczmarz => vec![drk::run_cyclic(&g, &reference, s.events, &opts)?],
                Algorithm::DrkStandard => drk::run_many(&g, Variant::Standard, &reference, s.seed, s.seeds, s.events, &opts)?,
                _ => drk::run_many(&g, Variant::Normalized, &reference, s.seed, s.seeds, s.events, &opts)?,
            };
            finite_convergence = runs.iter().map(|r| r.trace.stopped_at).collect();
            for (k, hit) in finite_convergence.iter().enumerate() {
                if let Some(ev) = hit {
                    info!("{} path {}: relative error reached 1e-13 at event {ev}", s.algorithm, k);
                }
            }
            let comm: u64 = runs.iter().map(|r| r.state.comm_count()).sum();
            let simulated: u64 = runs.iter().map(|r| r.state.event()).sum();
            if simulated > 0 {
                mean_comm_per_event = Some(comm as f64 / simulated as f64);
            }
            ConvergenceTrace::from_drk(&runs)?
        }
        Algorithm::GossipClassic | Algorithm::GossipEffres => {
            let config = if s.algorithm == Algorithm::GossipClassic {
                GossipConfig::classic(&g)
            } else {
                let table = match &s.resistances {
                    Some(p) => ResistanceTable::from_csv(&std::fs::read_to_string(p)?, &g)?,
                    None => effective_resistances(&spectral(&g)?, &g)?,
                };
                GossipConfig::effective_resistance(&g, &table)?
            };
            let fixed = match &s.init {
                Init::File(p) => Some(read_values::<T>(p, g.node_count())?),
                Init::BarbellNormal => None,
            };
            let init_lobes = match (&fixed, &lobes) {
                (None, None) => {
                    return Err(Error::Scenario("barbell-normal init needs a barbell graph".into()));
                }
                (_, l) => l.clone(),
            };
            let init = |seed: u64| match &fixed {
                Some(v) => v.clone(),
                None => gossip::barbell_initial(init_lobes.as_ref().unwrap(), seed),
            };
            let runs = gossip::run_gossip_many(&g, init, &config, s.seed, s.seeds, s.events, s.stride, lobes.as_ref())?;
            absolute_error = runs.iter().any(|r| r.trace.absolute);
            ConvergenceTrace::from_gossip(&runs)?
        }
    };

    let csv = trace.to_csv(s.algorithm.trace_kind());
    Ok(ScenarioReport {
        scenario: s.clone(),
        final_metric: *trace.mean.last().unwrap(),
        events_to_threshold: trace.first_crossing(metric(s.threshold)),
        trace,
        csv,
        mean_comm_per_event,
        finite_convergence,
        absolute_error,
    })
}
