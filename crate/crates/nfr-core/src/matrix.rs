//! Minimal dense row-major matrix used for relevance, policy and
//! transition data. Only the operations the solvers need.

/// Dense row-major `rows x cols` matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let n_rows = rows.len();
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let data = rows.into_iter().flatten().collect();
        DenseMatrix {
            rows: n_rows,
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }
}

/// Solves `A x = b` in place by LU decomposition with partial pivoting.
/// `a` is consumed as scratch. Returns `None` when a pivot collapses
/// (singular within floating precision).
pub fn lu_solve(mut a: DenseMatrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n, "square system expected");
    assert_eq!(b.len(), n);
    let mut x = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = a.get(col, col).abs();
        for r in col + 1..n {
            let v = a.get(r, col).abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val < 1e-300 {
            return None;
        }
        if pivot_row != col {
            perm.swap(col, pivot_row);
            let (lo, hi) = (col.min(pivot_row), col.max(pivot_row));
            let (top, bottom) = a.data.split_at_mut(hi * n);
            top[lo * n..lo * n + n].swap_with_slice(&mut bottom[..n]);
            x.swap(col, pivot_row);
        }
        let pivot = a.get(col, col);
        for r in col + 1..n {
            let factor = a.get(r, col) / pivot;
            if factor == 0.0 {
                continue;
            }
            a.set(r, col, 0.0);
            let (upper, lower) = a.data.split_at_mut(r * n);
            let src = &upper[col * n..col * n + n];
            let dst = &mut lower[..n];
            for j in col + 1..n {
                dst[j] -= factor * src[j];
            }
            x[r] -= factor * x[col];
        }
    }

    for col in (0..n).rev() {
        x[col] /= a.get(col, col);
        let xc = x[col];
        for r in 0..col {
            x[r] -= a.get(r, col) * xc;
        }
    }
    Some(x)
}
