//! Discrete-event simulation of decentralized randomized Kaczmarz (D-RK)
//! for the Laplacian pseudoinverse.
//!
//! Column `l` of `L⁺` is the minimum-norm solution of `L x = e_l - 𝟏/n`.
//! Every node owns its own coordinate of the first `n - 1` column
//! iterates. When node `i` wakes it gathers its neighbours' coordinates,
//! forms `q_i` for every column and sends it back, so one wake-up is one
//! Kaczmarz projection onto row `i` of each column system. The last column
//! is never iterated; it is `-Σ` of the others because `L⁺𝟏 = 0`.
//!
//! Node selection depends only on the wake probabilities `p_i = r_i / Σ r`,
//! so the simulator advances a discrete event index. Poisson arrival times
//! can be generated alongside on an independent random stream.

use std::fmt;
use std::str::FromStr;

use log::info;
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kaczmarz::SparseRow;
use crate::laplacian::laplacian;
use crate::sampling::DiscreteSampler;
use crate::scalar::Real;

/// Which linear system the nodes iterate on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `L X = B` with clock rates `r_i = s_i`.
    Standard,
    /// `S^{-1/2} L X = S^{-1/2} B` with equal clock rates.
    Normalized,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Standard => "standard",
            Variant::Normalized => "normalized",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Variant::Standard),
            "normalized" => Ok(Variant::Normalized),
            other => Err(Error::InvalidParameters(format!("unknown D-RK variant {other:?}"))),
        }
    }
}

/// All node-local iterates of one D-RK sample path.
#[derive(Debug, Clone)]
pub struct DrkState<T> {
    n: usize,
    variant: Variant,
    rows: Vec<SparseRow<T>>,
    row_sq_norms: Vec<T>,
    /// `1/√s_i` for the normalized system, one otherwise.
    rhs_scale: Vec<T>,
    degrees: Vec<usize>,
    rates: Vec<f64>,
    probs: Vec<f64>,
    inv_n: T,
    /// `columns[l][j]` is node `j`'s coordinate of column iterate `l`.
    columns: Vec<Vec<T>>,
    event: u64,
    comm: u64,
}

impl<T: Real> DrkState<T> {
    pub fn new(g: &Graph<T>, variant: Variant) -> Self {
        let n = g.node_count();
        let lap = laplacian(g);
        let s = lap.row_sq_norms();
        let (rows, row_sq_norms, rhs_scale) = match variant {
            Variant::Standard => (lap.rows().to_vec(), s.to_vec(), vec![T::one(); n]),
            Variant::Normalized => {
                let scale: Vec<T> = s.iter().map(|&si| T::one() / si.sqrt()).collect();
                let rows = lap.rows().iter().zip(&scale).map(|(r, &c)| r.scaled(c)).collect::<Vec<_>>();
                let norms = rows.iter().map(SparseRow::sq_norm).collect();
                (rows, norms, scale)
            }
        };
        let rates: Vec<f64> = match variant {
            Variant::Standard => s.iter().map(|v| v.as_f64()).collect(),
            Variant::Normalized => vec![1.0; n],
        };
        let total: f64 = rates.iter().sum();
        let probs = rates.iter().map(|r| r / total).collect();
        Self {
            n,
            variant,
            rows,
            row_sq_norms,
            rhs_scale,
            degrees: g.degrees(),
            rates,
            probs,
            inv_n: T::one() / T::from_count(n),
            columns: vec![vec![T::zero(); n]; n.saturating_sub(1)],
            event: 0,
            comm: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Clock rates `r_i`.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Wake-up probabilities `p_i = r_i / Σ r_j`.
    pub fn wake_probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn event(&self) -> u64 {
        self.event
    }

    /// Cumulative scalar sends plus receives.
    pub fn comm_count(&self) -> u64 {
        self.comm
    }

    /// Node `j`'s coordinate of column iterate `l < n - 1`.
    pub fn coordinate(&self, l: usize, j: usize) -> T {
        self.columns[l][j]
    }

    /// Scalars exchanged by one wake-up of node `i`: `2 d_i (n - 1)`.
    pub fn wake_cost(&self, i: usize) -> u64 {
        2 * self.degrees[i] as u64 * (self.n as u64 - 1)
    }

    /// Nodes whose coordinates a wake-up of `i` may change, `N_i ∪ {i}`.
    pub fn wake_support(&self, i: usize) -> &[usize] {
        self.rows[i].indices()
    }

    /// Node `i` wakes and projects every column iterate onto its row.
    pub fn wake(&mut self, i: usize) {
        let row = &self.rows[i];
        let norm = self.row_sq_norms[i];
        let scale = self.rhs_scale[i];
        let off = -self.inv_n * scale;
        for (l, x) in self.columns.iter_mut().enumerate() {
            let rhs = if l == i { scale + off } else { off };
            row.project(x, rhs, norm);
        }
        self.comm += self.wake_cost(i);
        self.event += 1;
    }

    /// Dense `X^k` with last column `-Σ_{l<n} x^{l,k}`.
    pub fn assemble(&self) -> Array2<T> {
        let n = self.n;
        let mut x = Array2::zeros((n, n));
        for j in 0..n {
            let mut acc = T::zero();
            for (l, col) in self.columns.iter().enumerate() {
                x[[j, l]] = col[j];
                acc += col[j];
            }
            x[[j, n - 1]] = -acc;
        }
        x
    }

    fn row_error_sq(&self, reference: &Array2<T>, j: usize) -> f64 {
        let mut acc = T::zero();
        let mut err = T::zero();
        for (l, col) in self.columns.iter().enumerate() {
            let d = col[j] - reference[[j, l]];
            err += d * d;
            acc += col[j];
        }
        let d = -acc - reference[[j, self.n - 1]];
        (err + d * d).as_f64()
    }
}

/// Maintains `‖X^k - X_ref‖_F` by recomputing only the rows a wake-up
/// touched.
#[derive(Debug, Clone)]
struct ErrorTracker<'a, T> {
    reference: &'a Array2<T>,
    row_err: Vec<f64>,
    ref_norm: f64,
}

impl<'a, T: Real> ErrorTracker<'a, T> {
    fn new(reference: &'a Array2<T>, state: &DrkState<T>) -> Self {
        let row_err = (0..state.n).map(|j| state.row_error_sq(reference, j)).collect();
        let ref_norm = reference.iter().map(|v| v.as_f64().powi(2)).sum::<f64>().sqrt();
        Self { reference, row_err, ref_norm }
    }

    fn refresh(&mut self, state: &DrkState<T>, i: usize) {
        for &j in state.wake_support(i) {
            self.row_err[j] = state.row_error_sq(self.reference, j);
        }
    }

    fn abs_sq(&self) -> f64 {
        self.row_err.iter().sum()
    }

    fn rel(&self) -> f64 {
        self.abs_sq().sqrt() / self.ref_norm
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrkOptions {
    /// Record every `stride`-th event (the final event is always recorded).
    pub stride: usize,
    /// Stop the path once the relative error drops to this level; later
    /// samples repeat the frozen state.
    pub stop_rel_err: Option<f64>,
    /// Also sample exponential inter-arrival times.
    pub timestamps: bool,
}

impl Default for DrkOptions {
    fn default() -> Self {
        Self { stride: 1, stop_rel_err: Some(1e-13), timestamps: false }
    }
}

/// Samples recorded along one sample path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTrace {
    pub events: Vec<u64>,
    /// `‖X^k - L⁺‖_F / ‖L⁺‖_F`
    pub rel_err: Vec<f64>,
    /// `‖X^k - L⁺‖_F²`
    pub abs_err_sq: Vec<f64>,
    pub comm: Vec<u64>,
    /// Poisson arrival time of each recorded event, when requested.
    pub times: Option<Vec<f64>>,
    /// Event at which the stop rule fired.
    pub stopped_at: Option<u64>,
}

impl PathTrace {
    /// First recorded event with relative error at or below `level`.
    pub fn first_below(&self, level: f64) -> Option<u64> {
        self.events.iter().zip(&self.rel_err).find(|(_, &e)| e <= level).map(|(&k, _)| k)
    }
}

#[derive(Debug, Clone)]
pub struct DrkRun<T> {
    pub trace: PathTrace,
    pub state: DrkState<T>,
}

fn sample_points(events: u64, stride: usize) -> impl Iterator<Item = u64> {
    let stride = stride.max(1) as u64;
    (0..=events).filter(move |k| k % stride == 0 || *k == events)
}

fn simulate<T: Real>(
    mut state: DrkState<T>,
    reference: &Array2<T>,
    events: u64,
    opts: &DrkOptions,
    mut next_node: impl FnMut() -> usize,
    mut next_gap: Option<impl FnMut() -> f64>,
    seed_label: &str,
) -> Result<DrkRun<T>> {
    let n = state.node_count();
    if reference.dim() != (n, n) {
        return Err(Error::Dimension(format!("reference is {:?}, expected {n}x{n}", reference.dim())));
    }
    let mut tracker = ErrorTracker::new(reference, &state);
    let stride = opts.stride.max(1) as u64;
    let mut trace = PathTrace {
        events: Vec::new(),
        rel_err: Vec::new(),
        abs_err_sq: Vec::new(),
        comm: Vec::new(),
        times: next_gap.as_ref().map(|_| Vec::new()),
        stopped_at: None,
    };
    let mut clock = 0.0;
    let record = |trace: &mut PathTrace, k: u64, tracker: &ErrorTracker<T>, comm: u64, clock: f64| {
        trace.events.push(k);
        trace.rel_err.push(tracker.rel());
        trace.abs_err_sq.push(tracker.abs_sq());
        trace.comm.push(comm);
        if let Some(t) = trace.times.as_mut() {
            t.push(clock);
        }
    };

    record(&mut trace, 0, &tracker, 0, clock);
    for k in 1..=events {
        if trace.stopped_at.is_none() {
            let i = next_node();
            if let Some(gap) = next_gap.as_mut() {
                clock += gap();
            }
            state.wake(i);
            tracker.refresh(&state, i);
            if let Some(level) = opts.stop_rel_err {
                if tracker.rel() <= level {
                    trace.stopped_at = Some(k);
                    info!("{seed_label}: relative error {:.3e} <= {level:e} at event {k}", tracker.rel());
                }
            }
        }
        if k % stride == 0 || k == events {
            record(&mut trace, k, &tracker, state.comm_count(), clock);
        }
    }
    Ok(DrkRun { trace, state })
}

/// Runs `events` wake-ups with nodes drawn i.i.d. from the variant's wake
/// probabilities. `reference` is the exact `L⁺` the error is measured
/// against.
pub fn run<T: Real>(
    g: &Graph<T>,
    variant: Variant,
    reference: &Array2<T>,
    seed: u64,
    events: u64,
    opts: &DrkOptions,
) -> Result<DrkRun<T>> {
    let state = DrkState::new(g, variant);
    let sampler = DiscreteSampler::from_probabilities(state.wake_probabilities())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaps = if opts.timestamps {
        let total: f64 = state.rates().iter().sum();
        let exp = Exp::new(total).map_err(|e| Error::InvalidParameters(e.to_string()))?;
        let mut time_rng = ChaCha8Rng::seed_from_u64(seed);
        time_rng.set_stream(1);
        Some(move || exp.sample(&mut time_rng))
    } else {
        None
    };
    simulate(state, reference, events, opts, || sampler.sample(&mut rng), gaps, &format!("seed {seed}"))
}

/// Deterministic sweep waking nodes `1, 2, …, n` in turn.
pub fn run_cyclic<T: Real>(g: &Graph<T>, reference: &Array2<T>, events: u64, opts: &DrkOptions) -> Result<DrkRun<T>> {
    let state = DrkState::new(g, Variant::Standard);
    let n = g.node_count();
    let mut next = 0usize;
    let pick = move || {
        let i = next;
        next = (next + 1) % n;
        i
    };
    simulate(state, reference, events, opts, pick, None::<fn() -> f64>, "cyclic")
}

/// Independent sample paths for seeds `seed0 .. seed0 + count`, run in
/// parallel and returned in seed order.
pub fn run_many<T: Real>(
    g: &Graph<T>,
    variant: Variant,
    reference: &Array2<T>,
    seed0: u64,
    count: u64,
    events: u64,
    opts: &DrkOptions,
) -> Result<Vec<DrkRun<T>>> {
    (seed0..seed0 + count)
        .into_par_iter()
        .map(|seed| run(g, variant, reference, seed, events, opts))
        .collect()
}

/// Event indices a run with these settings records.
pub fn recorded_events(events: u64, stride: usize) -> Vec<u64> {
    sample_points(events, stride).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, path, small_world};
    use crate::spectral::spectral;

    #[test]
    fn p2_converges_in_one_wake() {
        let g = path::<f64>(2).unwrap();
        let mut st = DrkState::new(&g, Variant::Standard);
        st.wake(0);
        assert_eq!(st.coordinate(0, 0), 0.25);
        assert_eq!(st.coordinate(0, 1), -0.25);
        let x = st.assemble();
        assert_eq!(x, ndarray::arr2(&[[0.25, -0.25], [-0.25, 0.25]]));
    }

    #[test]
    fn first_wake_from_zero() {
        // q_i^l = -b_i^l / s_i; coordinate j moves by -L_ij q.
        let g = small_world::<f64>(10, 18, 4).unwrap();
        let lap = laplacian(&g);
        let mut st = DrkState::new(&g, Variant::Standard);
        let i = 3;
        st.wake(i);
        for l in 0..9 {
            let b = if l == i { 0.9 } else { -0.1 };
            let q = -b / lap.row_sq_norm(i);
            for j in 0..10 {
                let lij = lap.to_dense()[[i, j]];
                assert!((st.coordinate(l, j) - (-lij * q)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn comm_cost_per_wake() {
        let g = small_world::<f64>(10, 18, 4).unwrap();
        let mut st = DrkState::new(&g, Variant::Normalized);
        let i = (0..10).find(|&i| g.degree(i) == 3).unwrap();
        st.wake(i);
        assert_eq!(st.comm_count(), 54);
    }

    #[test]
    fn wake_probabilities() {
        let g = small_world::<f64>(10, 18, 4).unwrap();
        let st = DrkState::new(&g, Variant::Standard);
        let d = g.degrees();
        let denom: usize = 2 * 18 + d.iter().map(|x| x * x).sum::<usize>();
        for (i, &p) in st.wake_probabilities().iter().enumerate() {
            assert!((p - (d[i] * (d[i] + 1)) as f64 / denom as f64).abs() < 1e-15);
        }
        let st = DrkState::new(&g, Variant::Normalized);
        assert!(st.wake_probabilities().iter().all(|&p| (p - 0.1).abs() < 1e-15));
    }

    #[test]
    fn wake_is_local() {
        let g = small_world::<f64>(12, 20, 8).unwrap();
        for variant in [Variant::Standard, Variant::Normalized] {
            let mut st = DrkState::new(&g, variant);
            for i in [0, 5, 7, 2] {
                st.wake(i);
            }
            for i in 0..12 {
                let before = st.assemble();
                st.wake(i);
                let after = st.assemble();
                let support = st.wake_support(i).to_vec();
                for j in 0..12 {
                    if !support.contains(&j) {
                        assert_eq!(before.row(j), after.row(j), "node {j} changed on wake of {i}");
                    }
                }
            }
        }
    }

    #[test]
    fn assembled_rows_sum_to_zero_exactly() {
        let g = small_world::<f64>(10, 25, 1).unwrap();
        let reference = spectral(&g).unwrap().pinv;
        let run = run(&g, Variant::Standard, &reference, 3, 37, &DrkOptions::default()).unwrap();
        let x = run.state.assemble();
        for row in x.rows() {
            let s = row.iter().fold(0.0, |acc, v| acc + v);
            assert_eq!(s, 0.0);
        }
        let zero = DrkState::new(&g, Variant::Normalized).assemble();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn converges_to_pinv() {
        let g = small_world::<f64>(10, 18, 5).unwrap();
        let reference = spectral(&g).unwrap().pinv;
        for variant in [Variant::Standard, Variant::Normalized] {
            let opts = DrkOptions { stride: 1000, ..Default::default() };
            let r = run(&g, variant, &reference, 1, 50_000, &opts).unwrap();
            let x = r.state.assemble();
            let rel = (&x - &reference).iter().map(|v| v * v).sum::<f64>().sqrt()
                / reference.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(rel <= 1e-8, "{variant}: {rel}");
            assert!(*r.trace.rel_err.last().unwrap() <= 1e-8);
        }
    }

    #[test]
    fn k3_wake_frequencies_are_uniform() {
        let g = complete::<f64>(3).unwrap();
        for variant in [Variant::Standard, Variant::Normalized] {
            let st = DrkState::new(&g, variant);
            assert!(st.wake_probabilities().iter().all(|&p| (p - 1.0 / 3.0).abs() < 1e-15));
        }
    }

    #[test]
    fn trace_bookkeeping() {
        let g = small_world::<f64>(10, 18, 5).unwrap();
        let reference = spectral(&g).unwrap().pinv;
        let opts = DrkOptions { stride: 7, stop_rel_err: None, timestamps: true };
        let r = run(&g, Variant::Standard, &reference, 9, 30, &opts).unwrap();
        assert_eq!(r.trace.events, recorded_events(30, 7));
        assert_eq!(r.trace.events, vec![0, 7, 14, 21, 28, 30]);
        assert_eq!(*r.trace.comm.last().unwrap(), r.state.comm_count());
        let t = r.trace.times.as_ref().unwrap();
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert!(r.trace.comm.windows(2).all(|w| w[0] < w[1]));

        // Timestamps come from a separate stream and leave the wake sequence alone.
        let plain = run(&g, Variant::Standard, &reference, 9, 30, &DrkOptions { timestamps: false, ..opts }).unwrap();
        assert_eq!(plain.trace.rel_err, r.trace.rel_err);
    }

    #[test]
    fn stop_rule_freezes_the_path() {
        let g = path::<f64>(2).unwrap();
        let reference = spectral(&g).unwrap().pinv;
        let r = run(&g, Variant::Standard, &reference, 0, 10, &DrkOptions::default()).unwrap();
        assert_eq!(r.trace.stopped_at, Some(1));
        assert_eq!(r.state.event(), 1);
        assert_eq!(r.trace.events.len(), 11);
        assert!(r.trace.comm[1..].iter().all(|&c| c == 2));
    }

    #[test]
    fn cyclic_is_deterministic() {
        let g = small_world::<f64>(10, 18, 5).unwrap();
        let reference = spectral(&g).unwrap().pinv;
        let a = run_cyclic(&g, &reference, 500, &DrkOptions::default()).unwrap();
        let b = run_cyclic(&g, &reference, 500, &DrkOptions::default()).unwrap();
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn run_many_matches_individual_runs() {
        let g = small_world::<f64>(10, 18, 5).unwrap();
        let reference = spectral(&g).unwrap().pinv;
        let opts = DrkOptions { stride: 10, ..Default::default() };
        let many = run_many(&g, Variant::Normalized, &reference, 40, 4, 200, &opts).unwrap();
        for (k, r) in many.iter().enumerate() {
            let single = run(&g, Variant::Normalized, &reference, 40 + k as u64, 200, &opts).unwrap();
            assert_eq!(r.trace, single.trace);
        }
    }

    #[test]
    fn variant_names() {
        assert_eq!("normalized".parse::<Variant>().unwrap(), Variant::Normalized);
        assert_eq!(Variant::Standard.to_string(), "standard");
        assert!("fast".parse::<Variant>().is_err());
    }
}
