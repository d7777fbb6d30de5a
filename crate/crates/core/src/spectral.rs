//! Dense reference computations: Laplacian eigenstructure, pseudoinverse,
//! effective resistances and the Kaczmarz rate constants.
//!
//! Everything here is `O(n³)` and meant for graphs with at most a few
//! hundred nodes. The iterative modules are checked against it.

use std::fmt::Write as _;

use ndarray::{Array1, Array2};

use crate::eigen::{lambda_min_plus, symmetric_eigen};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::laplacian::laplacian;
use crate::sampling::check_probabilities;
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct SpectralData<T> {
    /// Ascending; the first is zero up to rounding.
    pub eigenvalues: Array1<T>,
    /// Orthonormal eigenvectors as columns.
    pub eigenvectors: Array2<T>,
    pub pinv: Array2<T>,
    pub lambda_min_plus: T,
}

pub fn spectral<T: Real>(g: &Graph<T>) -> Result<SpectralData<T>> {
    let l = laplacian(g).to_dense();
    let eig = symmetric_eigen(&l)?;
    let n = g.node_count();
    let lmax = eig.values.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));
    let cut = T::zero_eigen_tol() * lmax;
    let zeros = eig.values.iter().filter(|&&x| x.abs() <= cut).count();
    if n > 1 && zeros != 1 {
        return Err(Error::Disconnected);
    }

    let mut pinv = Array2::<T>::zeros((n, n));
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda <= cut {
            continue;
        }
        let u = eig.vectors.column(k);
        let inv = T::one() / lambda;
        for a in 0..n {
            let ua = u[a] * inv;
            for b in a..n {
                pinv[[a, b]] += ua * u[b];
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            pinv[[a, b]] = pinv[[b, a]];
        }
    }
    let lambda_min_plus = lambda_min_plus(&eig.values).unwrap_or(T::zero());
    Ok(SpectralData { eigenvalues: eig.values, eigenvectors: eig.vectors, pinv, lambda_min_plus })
}

/// Pairwise effective resistances plus the per-node and total sums over
/// edges that the resistance-weighted gossip needs.
#[derive(Debug, Clone)]
pub struct ResistanceTable<T> {
    table: Array2<T>,
    node_sums: Vec<T>,
    edge_total: T,
}

impl<T: Real> ResistanceTable<T> {
    /// `R_ij = X_ii + X_jj - 2 X_ij` for a symmetric estimate `X` of `L⁺`.
    pub fn from_pinv(pinv: &Array2<T>, g: &Graph<T>) -> Result<Self> {
        let n = g.node_count();
        if pinv.dim() != (n, n) {
            return Err(Error::Dimension(format!("{:?} estimate for {n} nodes", pinv.dim())));
        }
        let two = T::lit(2.0);
        let mut table = Array2::zeros((n, n));
        for i in 0..n {
            for j in i + 1..n {
                let r = pinv[[i, i]] + pinv[[j, j]] - two * pinv[[i, j]];
                table[[i, j]] = r;
                table[[j, i]] = r;
            }
        }
        Ok(Self::from_table(table, g))
    }

    fn from_table(table: Array2<T>, g: &Graph<T>) -> Self {
        let node_sums = (0..g.node_count())
            .map(|i| g.neighbors(i).iter().map(|inc| table[[i, inc.node]]).sum())
            .collect();
        let edge_total = g.edges().iter().map(|e| table[[e.u, e.v]]).sum();
        Self { table, node_sums, edge_total }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.table[[i, j]]
    }

    pub fn table(&self) -> &Array2<T> {
        &self.table
    }

    /// `Σ_{j ∈ N_i} R_ij`.
    pub fn node_sum(&self, i: usize) -> T {
        self.node_sums[i]
    }

    /// `Σ_{(i,j) ∈ E} R_ij`.
    pub fn edge_total(&self) -> T {
        self.edge_total
    }

    /// `Σ_{(i,j) ∈ E} w_ij R_ij`; equals `n - 1` on a connected graph.
    pub fn foster_sum(&self, g: &Graph<T>) -> T {
        g.edges().iter().map(|e| e.weight * self.table[[e.u, e.v]]).sum()
    }

    /// CSV with header `i,j,R`, one line per unordered pair, 1-based.
    pub fn to_csv(&self) -> String {
        let n = self.table.nrows();
        let mut out = String::from("i,j,R\n");
        for i in 0..n {
            for j in i + 1..n {
                let _ = writeln!(out, "{},{},{}", i + 1, j + 1, self.table[[i, j]]);
            }
        }
        out
    }

    /// Reads a table written by [`to_csv`](Self::to_csv). Every edge of `g`
    /// must be present; pairs that are not edges are optional.
    pub fn from_csv(text: &str, g: &Graph<T>) -> Result<Self> {
        let n = g.node_count();
        let mut table = Array2::from_elem((n, n), T::nan());
        for i in 0..n {
            table[[i, i]] = T::zero();
        }
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (idx == 0 && line.starts_with('i')) {
                continue;
            }
            let bad = |msg: &str| Error::Parse { line: idx + 1, msg: msg.to_string() };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(bad("expected \"i,j,R\""));
            }
            let i: usize = f[0].trim().parse().map_err(|_| bad("bad node label"))?;
            let j: usize = f[1].trim().parse().map_err(|_| bad("bad node label"))?;
            let r: T = f[2].trim().parse().map_err(|_| bad("bad resistance"))?;
            if i == 0 || j == 0 || i > n || j > n || i == j {
                return Err(bad("node label out of range"));
            }
            table[[i - 1, j - 1]] = r;
            table[[j - 1, i - 1]] = r;
        }
        if let Some(e) = g.edges().iter().find(|e| !(table[[e.u, e.v]] > T::zero())) {
            return Err(Error::Parse {
                line: 0,
                msg: format!("missing or nonpositive resistance for edge ({}, {})", e.u + 1, e.v + 1),
            });
        }
        Ok(Self::from_table(table, g))
    }
}

pub fn effective_resistances<T: Real>(sd: &SpectralData<T>, g: &Graph<T>) -> Result<ResistanceTable<T>> {
    ResistanceTable::from_pinv(&sd.pinv, g)
}

/// `1 - λ⁺min(Lᵀ H L)` with `H = diag(p_i / s_i)`.
pub fn rate_rho<T: Real>(g: &Graph<T>, p: &[T]) -> Result<T> {
    let n = g.node_count();
    if p.len() != n {
        return Err(Error::InvalidProbabilities(format!("{} probabilities for {n} rows", p.len())));
    }
    check_probabilities(&p.iter().map(|v| v.as_f64()).collect::<Vec<_>>())?;
    let lap = laplacian(g);
    let h: Vec<T> = (0..n).map(|i| p[i] / lap.row_sq_norm(i)).collect();
    Ok(T::one() - lambda_min_plus_lhl(&lap.to_dense(), &h)?)
}

/// `ρ` for row-norm-proportional sampling, `p_i = s_i / ‖L‖_F²`.
pub fn rate_rho_norm_proportional<T: Real>(g: &Graph<T>) -> Result<T> {
    let lap = laplacian(g);
    let p: Vec<T> = lap.row_sq_norms().iter().map(|&s| s / lap.frobenius_sq()).collect();
    rate_rho(g, &p)
}

/// `ρ_S = 1 - λ⁺min(L S⁻¹ L) / n` for the row-normalized system with
/// uniform sampling.
pub fn rate_rho_normalized<T: Real>(g: &Graph<T>) -> Result<T> {
    Ok(T::one() - normalized_lhs(g)?)
}

fn normalized_lhs<T: Real>(g: &Graph<T>) -> Result<T> {
    let lap = laplacian(g);
    let n = T::from_count(g.node_count());
    let h: Vec<T> = lap.row_sq_norms().iter().map(|&s| T::one() / s).collect();
    Ok(lambda_min_plus_lhl(&lap.to_dense(), &h)? / n)
}

/// `λ⁺min(L diag(h) L)`.
fn lambda_min_plus_lhl<T: Real>(l: &Array2<T>, h: &[T]) -> Result<T> {
    let mut hl = l.clone();
    for (i, mut row) in hl.rows_mut().into_iter().enumerate() {
        row.mapv_inplace(|v| v * h[i]);
    }
    let mut m = l.t().dot(&hl);
    // Remove rounding asymmetry before the symmetric solver sees it.
    let n = m.nrows();
    let half = T::lit(0.5);
    for i in 0..n {
        for j in i + 1..n {
            let avg = (m[[i, j]] + m[[j, i]]) * half;
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
    let eig = symmetric_eigen(&m)?;
    lambda_min_plus(&eig.values).ok_or_else(|| Error::Dimension("matrix has no positive eigenvalue".into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjectureCheck<T> {
    pub holds: bool,
    /// `λ⁺min(L S⁻¹ L) / n`
    pub lhs: T,
    /// `(λ⁺min(L) / ‖L‖_F)²`
    pub rhs: T,
}

/// Compares the normalized and norm-proportional rate constants; `holds`
/// means the normalized system contracts at least as fast.
pub fn check_conjecture<T: Real>(g: &Graph<T>) -> Result<ConjectureCheck<T>> {
    let lhs = normalized_lhs(g)?;
    let sd = spectral(g)?;
    let rhs = sd.lambda_min_plus * sd.lambda_min_plus / laplacian(g).frobenius_sq();
    Ok(ConjectureCheck { holds: lhs >= rhs - T::lit(1e-12), lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, path, small_world};

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn p2_spectrum() {
        let g = path::<f64>(2).unwrap();
        let sd = spectral(&g).unwrap();
        assert!(sd.eigenvalues[0].abs() < 1e-15);
        assert!((sd.eigenvalues[1] - 2.0).abs() < 1e-15);
        let want = ndarray::arr2(&[[0.25, -0.25], [-0.25, 0.25]]);
        assert!(max_abs(&(&sd.pinv - &want)) < 1e-15);
        let r = effective_resistances(&sd, &g).unwrap();
        assert!((r.get(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k3_resistances() {
        let g = complete::<f64>(3).unwrap();
        let r = effective_resistances(&spectral(&g).unwrap(), &g).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((r.get(i, j) - 2.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn spectral_invariants_on_small_world() {
        for seed in 0..5 {
            let g = small_world::<f64>(15, 40, seed).unwrap();
            let n = 15;
            let sd = spectral(&g).unwrap();
            assert!(sd.eigenvalues[0].abs() < 1e-9);
            let u1 = sd.eigenvectors.column(0);
            let c = 1.0 / (n as f64).sqrt();
            assert!(u1.iter().all(|&x| (x.abs() - c).abs() < 1e-9));
            let l = laplacian(&g).to_dense();
            let b = Array2::<f64>::eye(n) - Array2::from_elem((n, n), 1.0 / n as f64);
            let resid = &l.dot(&sd.pinv) - &b;
            assert!(resid.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-9);
            assert!(sd.pinv.sum_axis(ndarray::Axis(1)).iter().all(|x| x.abs() < 1e-12));
            assert_eq!(sd.pinv, sd.pinv.t());
            assert!((sd.lambda_min_plus - sd.eigenvalues[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn p2_rates() {
        let g = path::<f64>(2).unwrap();
        assert!(rate_rho(&g, &[0.5, 0.5]).unwrap().abs() < 1e-12);
        assert!(rate_rho_normalized(&g).unwrap().abs() < 1e-12);
        let c = check_conjecture(&g).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-12 && (c.rhs - 1.0).abs() < 1e-12);
        assert!(c.holds);
    }

    #[test]
    fn k3_rate_in_range() {
        let r = rate_rho_normalized(&complete::<f64>(3).unwrap()).unwrap();
        assert!((0.0..1.0).contains(&r));
    }

    #[test]
    fn norm_proportional_rate_matches_closed_form() {
        for seed in 0..6 {
            let g = small_world::<f64>(12, 30, seed).unwrap();
            let sd = spectral(&g).unwrap();
            let closed = 1.0 - sd.lambda_min_plus.powi(2) / laplacian(&g).frobenius_sq();
            let rho = rate_rho_norm_proportional(&g).unwrap();
            assert!((rho - closed).abs() < 1e-10, "{rho} vs {closed}");
            let rank = (g.node_count() - 1) as f64;
            assert!(1.0 - 1.0 / rank <= rho + 1e-12 && rho < 1.0);
        }
    }

    #[test]
    fn rate_rejects_bad_probabilities() {
        let g = path::<f64>(3).unwrap();
        assert!(rate_rho(&g, &[0.5, 0.5]).is_err());
        assert!(rate_rho(&g, &[0.5, 0.5, 0.5]).is_err());
        assert!(rate_rho(&g, &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn csv_round_trip_and_missing_edges() {
        let g = small_world::<f64>(8, 14, 2).unwrap();
        let r = effective_resistances(&spectral(&g).unwrap(), &g).unwrap();
        let back = ResistanceTable::from_csv(&r.to_csv(), &g).unwrap();
        assert_eq!(back.table(), r.table());
        assert_eq!(back.edge_total(), r.edge_total());
        assert!(ResistanceTable::from_csv("i,j,R\n1,2,0.5\n", &g).is_err());
    }

    #[test]
    fn single_precision_pipeline() {
        let g = complete::<f32>(5).unwrap();
        let r = effective_resistances(&spectral(&g).unwrap(), &g).unwrap();
        assert!((r.get(0, 4) - 0.4).abs() < 1e-5);
    }
}
