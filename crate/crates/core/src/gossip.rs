//! Asynchronous randomized gossip averaging.
//!
//! A woken node `i` picks one neighbour `j` and both replace their values
//! with the pair mean. The classic scheme wakes nodes uniformly and picks
//! neighbours uniformly; the resistance-weighted scheme sets the clock rate
//! of node `i` to `Σ_{j∈N_i} R_ij` and picks `j` with probability
//! proportional to `R_ij`, so edge `(i, j)` fires with probability
//! `R_ij / Σ_E R`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, Lobes};
use crate::sampling::DiscreteSampler;
use crate::scalar::Real;
use crate::spectral::ResistanceTable;

/// Relative errors are clamped to this before any log transform.
pub const METRIC_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Classic,
    EffectiveResistance,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Classic => "classic",
            Scheme::EffectiveResistance => "effres",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classic" => Ok(Scheme::Classic),
            "effres" | "effective-resistance" => Ok(Scheme::EffectiveResistance),
            other => Err(Error::InvalidParameters(format!("unknown gossip scheme {other:?}"))),
        }
    }
}

/// Wake-up and neighbour-selection probabilities.
#[derive(Debug, Clone)]
pub struct GossipConfig<T> {
    scheme: Scheme,
    wake: Vec<T>,
    /// `neighbor[i][k]` belongs to the `k`-th entry of `g.neighbors(i)`.
    neighbor: Vec<Vec<T>>,
}

impl<T: Real> GossipConfig<T> {
    /// `p_i = 1/n`, `p_ij = 1/d_i`.
    pub fn classic(g: &Graph<T>) -> Self {
        let n = g.node_count();
        let wake = vec![T::one() / T::from_count(n); n];
        let neighbor = (0..n)
            .map(|i| {
                let d = g.degree(i);
                vec![T::one() / T::from_count(d); d]
            })
            .collect();
        Self { scheme: Scheme::Classic, wake, neighbor }
    }

    /// `p_i = Σ_{j∈N_i} R_ij / (2 Σ_E R)`, `p_ij = R_ij / Σ_{j∈N_i} R_ij`.
    pub fn effective_resistance(g: &Graph<T>, r: &ResistanceTable<T>) -> Result<Self> {
        let n = g.node_count();
        if r.table().nrows() != n {
            return Err(Error::Dimension(format!("resistance table for {} nodes, graph has {n}", r.table().nrows())));
        }
        let two_total = T::lit(2.0) * r.edge_total();
        let wake = (0..n).map(|i| r.node_sum(i) / two_total).collect();
        let neighbor = (0..n)
            .map(|i| g.neighbors(i).iter().map(|inc| r.get(i, inc.node) / r.node_sum(i)).collect())
            .collect();
        let cfg = Self { scheme: Scheme::EffectiveResistance, wake, neighbor };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |v: &T| !(*v > T::zero()) || !v.is_finite();
        if self.wake.iter().any(bad) || self.neighbor.iter().flatten().any(bad) {
            return Err(Error::InvalidProbabilities("resistances must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn wake_probabilities(&self) -> &[T] {
        &self.wake
    }

    /// `p_ij` for `j ∈ N_i`.
    pub fn neighbor_probability(&self, g: &Graph<T>, i: usize, j: usize) -> Result<T> {
        let k = g
            .neighbors(i)
            .binary_search_by_key(&j, |inc| inc.node)
            .map_err(|_| Error::NotAnEdge(i + 1, j + 1))?;
        Ok(self.neighbor[i][k])
    }

    /// Probability that a single event averages edge `(i, j)`:
    /// `p_i p_ij + p_j p_ji`.
    pub fn edge_activation_probability(&self, g: &Graph<T>, i: usize, j: usize) -> Result<T> {
        Ok(self.wake[i] * self.neighbor_probability(g, i, j)? + self.wake[j] * self.neighbor_probability(g, j, i)?)
    }

    fn samplers(&self) -> Result<(DiscreteSampler, Vec<DiscreteSampler>)> {
        let f = |v: &[T]| v.iter().map(|x| x.as_f64()).collect::<Vec<_>>();
        let wake = DiscreteSampler::from_weights(&f(&self.wake))?;
        let nb = self.neighbor.iter().map(|p| DiscreteSampler::from_weights(&f(p))).collect::<Result<_>>()?;
        Ok((wake, nb))
    }
}

#[derive(Debug, Clone)]
pub struct GossipState<T> {
    values: Vec<T>,
    event: u64,
    target: T,
    initial_sum: T,
}

impl<T: Real> GossipState<T> {
    pub fn new(y0: Vec<T>) -> Self {
        let initial_sum: T = y0.iter().copied().sum();
        let target = initial_sum / T::from_count(y0.len());
        Self { values: y0, event: 0, target, initial_sum }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `ȳ`, the average of the initial values.
    pub fn target(&self) -> T {
        self.target
    }

    pub fn initial_sum(&self) -> T {
        self.initial_sum
    }

    pub fn event(&self) -> u64 {
        self.event
    }

    /// Replaces `y_i` and `y_j` by their mean. Fails unless `(i, j)` is an edge.
    pub fn gossip_step(&mut self, g: &Graph<T>, i: usize, j: usize) -> Result<()> {
        if i >= g.node_count() || j >= g.node_count() || g.edge_index(i, j).is_none() {
            return Err(Error::NotAnEdge(i + 1, j + 1));
        }
        self.average(i, j);
        Ok(())
    }

    #[inline]
    fn average(&mut self, i: usize, j: usize) {
        let mean = (self.values[i] + self.values[j]) * T::lit(0.5);
        self.values[i] = mean;
        self.values[j] = mean;
        self.event += 1;
    }

    /// `‖y - ȳ𝟏‖₂`
    pub fn dispersion(&self) -> T {
        self.values
            .iter()
            .map(|&y| (y - self.target) * (y - self.target))
            .sum::<T>()
            .sqrt()
    }

    /// `‖y - ȳ𝟏‖₂ / |ȳ|`, or the absolute dispersion when `ȳ = 0` (flagged
    /// by the second component).
    pub fn error(&self) -> (f64, bool) {
        let d = self.dispersion().as_f64();
        let t = self.target.as_f64().abs();
        if t == 0.0 {
            (d, true)
        } else {
            (d / t, false)
        }
    }

    pub fn mean_over(&self, nodes: &[usize]) -> f64 {
        nodes.iter().map(|&i| self.values[i].as_f64()).sum::<f64>() / nodes.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GossipTrace {
    pub events: Vec<u64>,
    /// Relative error, or absolute dispersion when `absolute` is set.
    pub error: Vec<f64>,
    pub absolute: bool,
    pub lobe_left: Option<Vec<f64>>,
    pub lobe_right: Option<Vec<f64>>,
}

impl GossipTrace {
    pub fn first_below(&self, level: f64) -> Option<u64> {
        self.events.iter().zip(&self.error).find(|(_, &e)| e <= level).map(|(&k, _)| k)
    }
}

#[derive(Debug, Clone)]
pub struct GossipRun<T> {
    pub trace: GossipTrace,
    pub state: GossipState<T>,
}

/// Runs Algorithm-3 style gossip for `events` wake-ups, recording every
/// `stride`-th event.
pub fn run_gossip<T: Real>(
    g: &Graph<T>,
    y0: Vec<T>,
    config: &GossipConfig<T>,
    seed: u64,
    events: u64,
    stride: usize,
    lobes: Option<&Lobes>,
) -> Result<GossipRun<T>> {
    let n = g.node_count();
    if y0.len() != n {
        return Err(Error::Dimension(format!("{} initial values for {n} nodes", y0.len())));
    }
    if config.wake.len() != n {
        return Err(Error::Dimension("gossip configuration built for another graph".into()));
    }
    let (wake, neighbor) = config.samplers()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = GossipState::new(y0);
    let absolute = state.error().1;
    let mut trace = GossipTrace {
        events: Vec::new(),
        error: Vec::new(),
        absolute,
        lobe_left: lobes.map(|_| Vec::new()),
        lobe_right: lobes.map(|_| Vec::new()),
    };
    let record = |trace: &mut GossipTrace, state: &GossipState<T>| {
        trace.events.push(state.event());
        trace.error.push(state.error().0);
        if let Some(l) = lobes {
            trace.lobe_left.as_mut().unwrap().push(state.mean_over(&l.left));
            trace.lobe_right.as_mut().unwrap().push(state.mean_over(&l.right));
        }
    };

    let stride = stride.max(1) as u64;
    record(&mut trace, &state);
    for k in 1..=events {
        let i = wake.sample(&mut rng);
        let j = g.neighbors(i)[neighbor[i].sample(&mut rng)].node;
        state.average(i, j);
        if k % stride == 0 || k == events {
            record(&mut trace, &state);
        }
    }
    Ok(GossipRun { trace, state })
}

/// Sample paths for seeds `seed0 .. seed0 + count` in parallel, seed order
/// preserved. `init` produces the initial values of each path from its seed.
#[allow(clippy::too_many_arguments)]
pub fn run_gossip_many<T: Real>(
    g: &Graph<T>,
    init: impl Fn(u64) -> Vec<T> + Sync,
    config: &GossipConfig<T>,
    seed0: u64,
    count: u64,
    events: u64,
    stride: usize,
    lobes: Option<&Lobes>,
) -> Result<Vec<GossipRun<T>>> {
    (seed0..seed0 + count)
        .into_par_iter()
        .map(|seed| run_gossip(g, init(seed), config, seed, events, stride, lobes))
        .collect()
}

/// Left lobe i.i.d. `N(100, 1)`, right lobe `N(0, 1)`.
pub fn barbell_initial<T: Real>(lobes: &Lobes, seed: u64) -> Vec<T> {
    let n = lobes.left.len() + lobes.right.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Separate stream so initial values are independent of the wake sequence.
    rng.set_stream(2);
    let high = Normal::new(100.0, 1.0).unwrap();
    let low = Normal::new(0.0, 1.0).unwrap();
    let mut y = vec![T::zero(); n];
    for &i in &lobes.left {
        y[i] = T::lit(high.sample(&mut rng));
    }
    for &i in &lobes.right {
        y[i] = T::lit(low.sample(&mut rng));
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{barbell, complete, path, small_world};
    use crate::spectral::{effective_resistances, spectral};
    use proptest::prelude::*;

    fn er_config(g: &Graph<f64>) -> GossipConfig<f64> {
        let r = effective_resistances(&spectral(g).unwrap(), g).unwrap();
        GossipConfig::effective_resistance(g, &r).unwrap()
    }

    #[test]
    fn pair_average() {
        let g = path::<f64>(2).unwrap();
        let mut s = GossipState::new(vec![0.0, 2.0]);
        s.gossip_step(&g, 0, 1).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0]);
        s.gossip_step(&g, 1, 0).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0]);
        let g3 = path::<f64>(3).unwrap();
        let mut s = GossipState::new(vec![0.0, 1.0, 2.0]);
        assert!(matches!(s.gossip_step(&g3, 0, 2), Err(Error::NotAnEdge(1, 3))));
    }

    #[test]
    fn k3_schemes_coincide() {
        let g = complete::<f64>(3).unwrap();
        let er = er_config(&g);
        let cl = GossipConfig::classic(&g);
        for i in 0..3 {
            assert!((er.wake_probabilities()[i] - 1.0 / 3.0).abs() < 1e-12);
            for j in (0..3).filter(|&j| j != i) {
                assert!((er.neighbor_probability(&g, i, j).unwrap() - 0.5).abs() < 1e-12);
                assert_eq!(cl.neighbor_probability(&g, i, j).unwrap(), 0.5);
            }
        }
    }

    #[test]
    fn er_edge_activation_is_proportional_to_resistance() {
        for seed in 0..5 {
            let g = small_world::<f64>(12, 25, seed).unwrap();
            let r = effective_resistances(&spectral(&g).unwrap(), &g).unwrap();
            let cfg = GossipConfig::effective_resistance(&g, &r).unwrap();
            let mut total = 0.0;
            for e in g.edges() {
                let p = cfg.edge_activation_probability(&g, e.u, e.v).unwrap();
                assert!((p - r.get(e.u, e.v) / r.edge_total()).abs() < 1e-14);
                total += p;
            }
            assert!((total - 1.0).abs() < 1e-12);
            let s: f64 = cfg.wake_probabilities().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn classic_edge_activation() {
        // Regular graph: uniform 1/m.
        let g = small_world::<f64>(9, 9, 0).unwrap();
        let cfg = GossipConfig::classic(&g);
        for e in g.edges() {
            assert!((cfg.edge_activation_probability(&g, e.u, e.v).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        }
        // Otherwise (1/n)(1/d_i + 1/d_j), which is not uniform.
        let g = barbell::<f64>(4).unwrap();
        let cfg = GossipConfig::classic(&g);
        let mut total = 0.0;
        for e in g.edges() {
            let p = cfg.edge_activation_probability(&g, e.u, e.v).unwrap();
            let want = (1.0 / 8.0) * (1.0 / g.degree(e.u) as f64 + 1.0 / g.degree(e.v) as f64);
            assert!((p - want).abs() < 1e-15);
            total += p;
        }
        assert!((total - 1.0).abs() < 1e-12);
        assert!(cfg.edge_activation_probability(&g, 0, 7).is_err());
    }

    #[test]
    fn constant_values_are_a_fixed_point() {
        let g = barbell::<f64>(5).unwrap();
        let cfg = GossipConfig::classic(&g);
        let run = run_gossip(&g, vec![3.5; 10], &cfg, 1, 500, 10, Some(&Lobes::barbell(5))).unwrap();
        assert!(run.state.values().iter().all(|&v| v == 3.5));
        assert!(run.trace.error.iter().all(|&e| e == 0.0));
        assert!(!run.trace.absolute);
    }

    #[test]
    fn zero_mean_falls_back_to_absolute_error() {
        let g = path::<f64>(4).unwrap();
        let cfg = GossipConfig::classic(&g);
        let run = run_gossip(&g, vec![-1.0, 1.0, -2.0, 2.0], &cfg, 1, 50, 1, None).unwrap();
        assert!(run.trace.absolute);
        assert!((run.trace.error[0] - 10f64.sqrt()).abs() < 1e-15);
        assert!(run.trace.lobe_left.is_none());
    }

    #[test]
    fn barbell_initializer() {
        let lobes = Lobes::barbell(20);
        let y = barbell_initial::<f64>(&lobes, 4);
        assert_eq!(y.len(), 40);
        let left = lobes.left.iter().map(|&i| y[i]).sum::<f64>() / 20.0;
        let right = lobes.right.iter().map(|&i| y[i]).sum::<f64>() / 20.0;
        assert!((left - 100.0).abs() < 1.0 && right.abs() < 1.0);
        assert_eq!(y, barbell_initial::<f64>(&lobes, 4));
        assert_ne!(y, barbell_initial::<f64>(&lobes, 5));
    }

    #[test]
    fn lobe_means_meet_at_the_average() {
        let g = barbell::<f64>(6).unwrap();
        let lobes = Lobes::barbell(6);
        let cfg = er_config(&g);
        let y0 = barbell_initial::<f64>(&lobes, 1);
        let run = run_gossip(&g, y0, &cfg, 1, 20_000, 100, Some(&lobes)).unwrap();
        let ybar = run.state.target();
        assert!((run.trace.lobe_left.unwrap().last().unwrap() - ybar).abs() < 1e-6);
        assert!((run.trace.lobe_right.unwrap().last().unwrap() - ybar).abs() < 1e-6);
    }

    #[test]
    fn scheme_names() {
        assert_eq!("effres".parse::<Scheme>().unwrap(), Scheme::EffectiveResistance);
        assert_eq!(Scheme::Classic.to_string(), "classic");
    }

    proptest! {
        #[test]
        fn steps_conserve_and_contract(
            y in prop::collection::vec(-1e3f64..1e3, 8),
            picks in prop::collection::vec((0usize..8, 0usize..8), 1..60),
        ) {
            let g = complete::<f64>(8).unwrap();
            let mut s = GossipState::new(y.clone());
            let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
            let mut prev = s.dispersion();
            for (k, (i, j)) in picks.into_iter().enumerate() {
                if i == j { continue; }
                s.gossip_step(&g, i, j).unwrap();
                let sum: f64 = s.values().iter().sum();
                prop_assert!((sum - s.initial_sum()).abs() <= 8.0 * (k as f64 + 1.0) * f64::EPSILON * scale * 8.0);
                let d = s.dispersion();
                prop_assert!(d <= prev * (1.0 + 1e-12) + 1e-9);
                prev = d;
            }
        }
    }
}
