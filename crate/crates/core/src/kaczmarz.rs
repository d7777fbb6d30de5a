//! Row-projection (Kaczmarz) solvers for consistent linear systems.
//!
//! Starting from `x = 0` every iterate stays in the row space of `A`, so
//! the limit is the minimum-norm solution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::laplacian::LaplacianView;
use crate::sampling::{check_probabilities, DiscreteSampler};
use crate::scalar::Real;

/// Sparse row stored as parallel index/value arrays, indices ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow<T> {
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseRow<T> {
    pub fn new(mut entries: Vec<(usize, T)>) -> Self {
        entries.sort_by_key(|&(j, _)| j);
        let (indices, values) = entries.into_iter().unzip();
        Self { indices, values }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn dot(&self, x: &[T]) -> T {
        self.iter().fold(T::zero(), |acc, (j, v)| acc + v * x[j])
    }

    pub fn sq_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &v| acc + v * v)
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            indices: self.indices.clone(),
            values: self.values.iter().map(|&v| v * factor).collect(),
        }
    }

    /// Projects `x` onto `{z : a·z = rhs}` in place and returns the scaled
    /// residual `q = (a·x - rhs) / ‖a‖²`. Only the support of `a` is touched.
    #[inline]
    pub fn project(&self, x: &mut [T], rhs: T, sq_norm: T) -> T {
        let q = (self.dot(x) - rhs) / sq_norm;
        for (j, v) in self.iter() {
            x[j] -= v * q;
        }
        q
    }
}

/// Consistent system `Ax = b` given by its rows.
#[derive(Debug, Clone)]
pub struct RowSystem<T> {
    rows: Vec<SparseRow<T>>,
    rhs: Vec<T>,
    sq_norms: Vec<T>,
    ncols: usize,
}

impl<T: Real> RowSystem<T> {
    pub fn new(rows: Vec<SparseRow<T>>, rhs: Vec<T>, ncols: usize) -> Result<Self> {
        if rows.len() != rhs.len() {
            return Err(Error::Dimension(format!("{} rows but {} right-hand sides", rows.len(), rhs.len())));
        }
        if rows.is_empty() {
            return Err(Error::Dimension("system has no rows".into()));
        }
        let mut sq_norms = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.indices.iter().any(|&j| j >= ncols) {
                return Err(Error::Dimension(format!("row {i} exceeds {ncols} columns")));
            }
            let s = row.sq_norm();
            if !(s > T::zero()) {
                return Err(Error::Dimension(format!("row {i} is all zeros")));
            }
            sq_norms.push(s);
        }
        Ok(Self { rows, rhs, sq_norms, ncols })
    }

    /// `L x = b` over the rows of a Laplacian.
    pub fn from_laplacian(l: &LaplacianView<T>, rhs: Vec<T>) -> Result<Self> {
        Self::new(l.rows().to_vec(), rhs, l.dim())
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &SparseRow<T> {
        &self.rows[i]
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    pub fn row_sq_norm(&self, i: usize) -> T {
        self.sq_norms[i]
    }

    /// `p_i = ‖a_i‖² / ‖A‖_F²`.
    pub fn norm_proportional(&self) -> Vec<T> {
        let total: T = self.sq_norms.iter().copied().sum();
        self.sq_norms.iter().map(|&s| s / total).collect()
    }

    /// Applies one projection onto row `i`.
    #[inline]
    pub fn rk_step(&self, x: &mut [T], i: usize) {
        self.rows[i].project(x, self.rhs[i], self.sq_norms[i]);
    }

    pub fn residual_inf(&self, x: &[T]) -> T {
        self.rows
            .iter()
            .zip(&self.rhs)
            .fold(T::zero(), |acc, (row, &b)| acc.max((row.dot(x) - b).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub max_steps: usize,
    /// Tolerance on the ∞-norm residual.
    pub tol: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { max_steps: 1_000_000, tol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct KaczmarzSolution<T> {
    pub x: Vec<T>,
    pub steps: usize,
    /// ∞-norm residual at step 0 and after every full pass of `m` steps.
    pub residual_history: Vec<T>,
}

#[derive(Debug, Clone)]
enum RowOrder {
    Random { sampler: DiscreteSampler, rng: ChaCha8Rng },
    Cyclic { next: usize },
}

/// Stepwise Kaczmarz iteration from `x = 0`.
#[derive(Debug, Clone)]
pub struct Kaczmarz<'a, T> {
    sys: &'a RowSystem<T>,
    x: Vec<T>,
    order: RowOrder,
    steps: usize,
}

impl<'a, T: Real> Kaczmarz<'a, T> {
    pub fn randomized(sys: &'a RowSystem<T>, p: &[T], seed: u64) -> Result<Self> {
        if p.len() != sys.row_count() {
            return Err(Error::InvalidProbabilities(format!(
                "{} probabilities for {} rows",
                p.len(),
                sys.row_count()
            )));
        }
        let p: Vec<f64> = p.iter().map(|v| v.as_f64()).collect();
        check_probabilities(&p)?;
        let sampler = DiscreteSampler::from_probabilities(&p)?;
        Ok(Self {
            sys,
            x: vec![T::zero(); sys.col_count()],
            order: RowOrder::Random { sampler, rng: ChaCha8Rng::seed_from_u64(seed) },
            steps: 0,
        })
    }

    pub fn cyclic(sys: &'a RowSystem<T>) -> Self {
        Self {
            sys,
            x: vec![T::zero(); sys.col_count()],
            order: RowOrder::Cyclic { next: 0 },
            steps: 0,
        }
    }

    /// Performs one projection and returns the row used.
    pub fn step(&mut self) -> usize {
        let i = match &mut self.order {
            RowOrder::Random { sampler, rng } => sampler.sample(rng),
            RowOrder::Cyclic { next } => {
                let i = *next;
                *next = (i + 1) % self.sys.row_count();
                i
            }
        };
        self.sys.rk_step(&mut self.x, i);
        self.steps += 1;
        i
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn into_x(self) -> Vec<T> {
        self.x
    }

    fn solve(mut self, stop: StopRule) -> Result<KaczmarzSolution<T>> {
        let tol = T::lit(stop.tol);
        let epoch = self.sys.row_count();
        let mut history = vec![self.sys.residual_inf(&self.x)];
        loop {
            let residual = *history.last().unwrap();
            if residual <= tol {
                return Ok(KaczmarzSolution { x: self.x, steps: self.steps, residual_history: history });
            }
            if self.steps >= stop.max_steps {
                return Err(Error::NotConverged { steps: self.steps, residual: residual.as_f64() });
            }
            let burst = epoch.min(stop.max_steps - self.steps);
            for _ in 0..burst {
                self.step();
            }
            history.push(self.sys.residual_inf(&self.x));
        }
    }
}

/// Randomized Kaczmarz with row probabilities `p`.
pub fn rk_solve<T: Real>(sys: &RowSystem<T>, p: &[T], seed: u64, stop: StopRule) -> Result<KaczmarzSolution<T>> {
    Kaczmarz::randomized(sys, p, seed)?.solve(stop)
}

/// Kaczmarz sweeping rows `0, 1, …, m-1` repeatedly.
pub fn cyclic_solve<T: Real>(sys: &RowSystem<T>, stop: StopRule) -> Result<KaczmarzSolution<T>> {
    Kaczmarz::cyclic(sys).solve(stop)
}
