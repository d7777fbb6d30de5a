use ndarray::Array2;

use crate::graph::Graph;
use crate::kaczmarz::SparseRow;
use crate::scalar::Real;

/// Row-accessible weighted Laplacian `L = D - W`.
#[derive(Debug, Clone)]
pub struct LaplacianView<T> {
    rows: Vec<SparseRow<T>>,
    diagonal: Vec<T>,
    row_sq_norms: Vec<T>,
    frobenius_sq: T,
}

impl<T: Real> LaplacianView<T> {
    pub fn new(g: &Graph<T>) -> Self {
        let n = g.node_count();
        let mut rows = Vec::with_capacity(n);
        let mut diagonal = Vec::with_capacity(n);
        let mut row_sq_norms = Vec::with_capacity(n);
        for i in 0..n {
            let off: Vec<(usize, T)> = g
                .neighbors(i)
                .iter()
                .map(|inc| (inc.node, -g.edges()[inc.edge].weight))
                .collect();
            // Negated sum of the stored off-diagonals, so the row sums to zero
            // exactly when evaluated in the same order.
            let diag = -off.iter().fold(T::zero(), |acc, &(_, v)| acc + v);
            let mut entries = off;
            let pos = entries.partition_point(|&(j, _)| j < i);
            entries.insert(pos, (i, diag));
            let row = SparseRow::new(entries);
            row_sq_norms.push(row.sq_norm());
            diagonal.push(diag);
            rows.push(row);
        }
        let frobenius_sq = row_sq_norms.iter().copied().sum();
        Self { rows, diagonal, row_sq_norms, frobenius_sq }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Row `i` with entries sorted by column.
    pub fn row(&self, i: usize) -> &SparseRow<T> {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[SparseRow<T>] {
        &self.rows
    }

    pub fn diagonal(&self, i: usize) -> T {
        self.diagonal[i]
    }

    /// `s_i`, the squared Euclidean norm of row `i`.
    pub fn row_sq_norm(&self, i: usize) -> T {
        self.row_sq_norms[i]
    }

    pub fn row_sq_norms(&self) -> &[T] {
        &self.row_sq_norms
    }

    /// `‖L‖_F² = Σ s_i`.
    pub fn frobenius_sq(&self) -> T {
        self.frobenius_sq
    }

    /// Row sum with the off-diagonals accumulated first, matching how the
    /// diagonal was formed.
    pub fn row_sum(&self, i: usize) -> T {
        let off = self.rows[i]
            .iter()
            .filter(|&(j, _)| j != i)
            .fold(T::zero(), |acc, (_, v)| acc + v);
        off + self.diagonal[i]
    }

    pub fn to_dense(&self) -> Array2<T> {
        let n = self.dim();
        let mut a = Array2::zeros((n, n));
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row.iter() {
                a[[i, j]] = v;
            }
        }
        a
    }
}

pub fn laplacian<T: Real>(g: &Graph<T>) -> LaplacianView<T> {
    LaplacianView::new(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, path, small_world};

    #[test]
    fn p2_rows() {
        let l = laplacian(&path::<f64>(2).unwrap());
        assert_eq!(l.to_dense(), ndarray::arr2(&[[1.0, -1.0], [-1.0, 1.0]]));
        assert_eq!(l.row_sq_norms(), &[2.0, 2.0]);
        assert_eq!(l.frobenius_sq(), 4.0);
    }

    #[test]
    fn k3_rows() {
        let l = laplacian(&complete::<f64>(3).unwrap());
        let d = l.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d[[i, j]], if i == j { 2.0 } else { -1.0 });
            }
            assert_eq!(l.row_sq_norm(i), 6.0);
        }
    }

    #[test]
    fn unweighted_row_norms_follow_degrees() {
        let g = small_world::<f64>(20, 76, 11).unwrap();
        let l = laplacian(&g);
        let deg = g.degrees();
        for (i, &d) in deg.iter().enumerate() {
            assert_eq!(l.row_sq_norm(i), (d * (d + 1)) as f64);
        }
        let sum_d2: usize = deg.iter().map(|d| d * d).sum();
        assert_eq!(l.frobenius_sq(), (2 * g.edge_count() + sum_d2) as f64);
    }

    #[test]
    fn weighted_rows_sum_to_zero_and_are_symmetric() {
        let g = Graph::<f64>::new(
            4,
            [(0, 1, 0.1), (1, 2, 1.0 / 3.0), (2, 3, 0.7), (0, 3, 2.9), (0, 2, 1e-3)],
        )
        .unwrap();
        let l = laplacian(&g);
        let d = l.to_dense();
        for i in 0..4 {
            assert_eq!(l.row_sum(i), 0.0);
            for j in 0..4 {
                assert_eq!(d[[i, j]].to_bits(), d[[j, i]].to_bits());
            }
        }
    }
}
