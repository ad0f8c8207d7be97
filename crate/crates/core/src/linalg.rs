//! Exact rational matrices: rank, reduced row echelon form, and nullspace
//! bases, sized for desk-scale orbit computations.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q_int(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn q_ratio(num: i64, den: i64) -> Q {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Dense row-major matrix over the rationals. Zero-sized dimensions are
/// allowed and behave as empty maps.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Q>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            data: vec![Q::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Q) -> Self {
        let mut m = QMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        QMat::from_fn(r, c, |i, j| q_int(rows[i][j]))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> QMat {
        QMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows, "shape mismatch in matrix product");
        QMat::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols)
                .map(|k| &self[(i, k)] * &other[(k, j)])
                .fold(Q::zero(), |a, b| a + b)
        })
    }

    pub fn sub(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMat::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] - &other[(i, j)])
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.row_reduce().len()
    }

    /// In-place reduction to reduced row echelon form; returns pivot columns.
    pub fn row_reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            // Prefer a pivot with small numerator/denominator to keep
            // intermediate entries modest.
            let pivot_row = (row..self.rows)
                .filter(|&i| !self[(i, col)].is_zero())
                .min_by_key(|&i| {
                    let x = &self[(i, col)];
                    x.numer().abs().bits() + x.denom().bits()
                });
            let Some(p) = pivot_row else { continue };
            self.swap_rows(row, p);
            let inv = self[(row, col)].recip();
            for j in col..self.cols {
                let v = &self[(row, j)] * &inv;
                self[(row, j)] = v;
            }
            for i in 0..self.rows {
                if i != row && !self[(i, col)].is_zero() {
                    let factor = self[(i, col)].clone();
                    for j in col..self.cols {
                        let v = &self[(i, j)] - &factor * &self[(row, j)];
                        self[(i, j)] = v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Basis of {v : self * v = 0}, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let mut m = self.clone();
        let pivots = m.row_reduce();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![Q::zero(); self.cols];
            v[free] = Q::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[(r, free)].clone();
            }
            basis.push(v);
        }
        basis
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_nullspace() {
        let m = QMat::from_int_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        for v in &ns {
            for i in 0..m.rows {
                let s = (0..m.cols)
                    .map(|j| &m[(i, j)] * &v[j])
                    .fold(Q::zero(), |a, b| a + b);
                assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn empty_shapes() {
        let m = QMat::zeros(0, 3);
        assert_eq!(m.rank(), 0);
        assert_eq!(m.nullspace().len(), 3);
        let m2 = QMat::zeros(3, 0);
        assert_eq!(m2.rank(), 0);
        assert_eq!(m2.nullspace().len(), 0);
    }

    #[test]
    fn product_and_identity() {
        let a = QMat::from_int_rows(&[vec![1, 2], vec![3, 4]]);
        assert_eq!(a.mul(&QMat::identity(2)), a);
        let b = QMat::from_fn(2, 2, |i, j| q_ratio((i + j) as i64, 2));
        let ab = a.mul(&b);
        assert_eq!(ab[(1, 1)], q_ratio(3, 2) + q_int(4));
    }
}
