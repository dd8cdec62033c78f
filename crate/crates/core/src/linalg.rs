//! Small dense linear algebra: Gaussian elimination with partial pivoting.
//!
//! The systems solved here are tiny (a KKT system for two 4-simplices is
//! 12x12), so a straightforward row-major implementation is enough.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Largest absolute entry.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Principal submatrix on the given (sorted) index set.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let mut m = Self::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m.set(a, b, self.get(i, j));
            }
        }
        m
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }
}

/// Solves `a x = b` for square `a`. A pivot smaller than
/// `rel_pivot * max_norm(a)` is reported as [`Error::Singular`].
pub fn solve(a: &DenseMatrix, b: &[f64], rel_pivot: f64) -> Result<Vec<f64>> {
    let n = a.rows;
    assert_eq!(a.cols, n);
    assert_eq!(b.len(), n);
    let threshold = rel_pivot * a.max_norm();
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let (p, pv) = (k..n)
            .map(|i| (i, m[i * n + k].abs()))
            .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if pv <= threshold || pv == 0.0 {
            return Err(Error::Singular);
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        let piv = m[k * n + k];
        for i in k + 1..n {
            let f = m[i * n + k] / piv;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k * n + j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k * n + k];
    }
    Ok(x)
}

/// Numerical rank using full pivoting; entries below `rel_pivot * max_norm`
/// count as zero.
pub fn rank(a: &DenseMatrix, rel_pivot: f64) -> usize {
    let (r, c) = (a.rows, a.cols);
    let threshold = rel_pivot * a.max_norm();
    let mut m = a.data.clone();
    let mut rank = 0;
    for k in 0..r.min(c) {
        let mut best = (k, k, -1.0);
        for i in k..r {
            for j in k..c {
                let v = m[i * c + j].abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 <= threshold || best.2 == 0.0 {
            break;
        }
        let (pi, pj, _) = best;
        for j in 0..c {
            m.swap(k * c + j, pi * c + j);
        }
        for i in 0..r {
            m.swap(i * c + k, i * c + pj);
        }
        let piv = m[k * c + k];
        for i in k + 1..r {
            let f = m[i * c + k] / piv;
            for j in k..c {
                m[i * c + j] -= f * m[k * c + j];
            }
        }
        rank += 1;
    }
    rank
}

/// Determinant by elimination with partial pivoting (exact zero pivots give 0).
pub fn determinant(a: &DenseMatrix) -> f64 {
    let n = a.rows;
    assert_eq!(a.cols, n);
    let mut m = a.data.clone();
    let mut det = 1.0;
    for k in 0..n {
        let (p, pv) = (k..n)
            .map(|i| (i, m[i * n + k].abs()))
            .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if pv == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let piv = m[k * n + k];
        det *= piv;
        for i in k + 1..n {
            let f = m[i * n + k] / piv;
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
        }
    }
    det
}

/// Inverse of a square matrix, or `None` when singular at the given threshold.
pub fn inverse(a: &DenseMatrix, rel_pivot: f64) -> Option<DenseMatrix> {
    let n = a.rows;
    let mut inv = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = solve(a, &e, rel_pivot).ok()?;
        for (i, v) in col.into_iter().enumerate() {
            inv.set(i, j, v);
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 2.0], vec![3.0, 1.0]]);
        let x = solve(&a, &[4.0, 5.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn repeated_row_is_singular() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]);
        assert_eq!(solve(&a, &[1.0, 1.0], 1e-12), Err(Error::Singular));
        assert_eq!(rank(&a, 1e-12), 1);
    }

    #[test]
    fn determinant_sign_and_rank() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(determinant(&a), -1.0);
        assert_eq!(rank(&a, 1e-12), 2);
        let inv = inverse(&a, 1e-12).unwrap();
        assert_eq!(inv, a);
    }
}
