//! Dense Gaussian elimination over F_p.
//!
//! Degree slices of the graded modules are small, so each slice is copied
//! into a dense row-major matrix before elimination. Sparse storage lives in
//! [`crate::falg`]; this module only handles the per-slice solves.

use crate::fp::Fp;

/// Row-major dense matrix over F_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<u32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<u32>], cols: usize) -> Matrix {
        let mut m = Matrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<u32>], rows: usize) -> Matrix {
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, &v) in c.iter().enumerate() {
                m.data[i * m.cols + j] = v;
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul_vec(&self, f: Fp, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = 0u64;
                for (a, b) in self.row(i).iter().zip(v) {
                    acc += *a as u64 * *b as u64;
                }
                (acc % f.p() as u64) as u32
            })
            .collect()
    }

    pub fn mul(&self, f: Fp, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b != 0 {
                        let v = f.add(out.get(i, j), f.mul(a, b));
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Reduces in place to reduced row echelon form; returns pivot columns.
    pub fn rref(&mut self, f: Fp) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(piv) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            self.swap_rows(r, piv);
            let inv = f.inv(self.get(r, c));
            for j in c..self.cols {
                let v = f.mul(self.get(r, j), inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c);
                if factor == 0 {
                    continue;
                }
                for j in c..self.cols {
                    let v = f.sub(self.get(i, j), f.mul(factor, self.get(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, f: Fp) -> usize {
        self.clone().rref(f).len()
    }

    /// Basis of the right null space, one vector per free column, in
    /// increasing order of the free column. Each vector has a 1 in its free
    /// column, which makes the basis canonical.
    pub fn kernel(&self, f: Fp) -> Vec<Vec<u32>> {
        let mut m = self.clone();
        let pivots = m.rref(f);
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u32; self.cols];
            v[free] = 1;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(m.get(row, free));
            }
            basis.push(v);
        }
        basis
    }
}

/// Precomputed elimination for repeated solves of `A x = b`.
#[derive(Clone, Debug)]
pub struct Solver {
    field: Fp,
    cols: usize,
    /// Row operations taking `A` to its RREF.
    transform: Matrix,
    pivots: Vec<usize>,
    kernel: Vec<Vec<u32>>,
}

impl Solver {
    pub fn new(f: Fp, a: &Matrix) -> Solver {
        let mut aug = Matrix::zeros(a.rows, a.cols + a.rows);
        for i in 0..a.rows {
            for j in 0..a.cols {
                aug.set(i, j, a.get(i, j));
            }
            aug.set(i, a.cols + i, 1);
        }
        // Only pivot inside the A block.
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let Some(piv) = (r..a.rows).find(|&i| aug.get(i, c) != 0) else {
                continue;
            };
            aug.swap_rows(r, piv);
            let inv = f.inv(aug.get(r, c));
            for j in 0..aug.cols {
                let v = f.mul(aug.get(r, j), inv);
                aug.set(r, j, v);
            }
            for i in 0..a.rows {
                if i == r {
                    continue;
                }
                let factor = aug.get(i, c);
                if factor == 0 {
                    continue;
                }
                for j in 0..aug.cols {
                    let v = f.sub(aug.get(i, j), f.mul(factor, aug.get(r, j)));
                    aug.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        let mut transform = Matrix::zeros(a.rows, a.rows);
        for i in 0..a.rows {
            for j in 0..a.rows {
                transform.set(i, j, aug.get(i, a.cols + j));
            }
        }
        Solver {
            field: f,
            cols: a.cols,
            transform,
            pivots,
            kernel: a.kernel(f),
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn kernel(&self) -> &[Vec<u32>] {
        &self.kernel
    }

    /// A particular solution of `A x = b`, or `None` when `b` is not in the
    /// column space. The returned solution is zero on every free column.
    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        let c = self.transform.mul_vec(self.field, b);
        if c[self.pivots.len()..].iter().any(|&x| x != 0) {
            return None;
        }
        let mut x = vec![0u32; self.cols];
        for (row, &pc) in self.pivots.iter().enumerate() {
            x[pc] = c[row];
        }
        Some(x)
    }
}

/// Incrementally built basis of a subspace in semi-echelon form, used for
/// membership tests and for extending a basis greedily.
#[derive(Clone, Debug)]
pub struct Echelon {
    field: Fp,
    dim: usize,
    rows: Vec<(usize, Vec<u32>)>,
}

impl Echelon {
    pub fn new(f: Fp, dim: usize) -> Echelon {
        Echelon {
            field: f,
            dim,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// `v` minus its projection onto the span along the pivots.
    pub fn reduce(&self, v: &[u32]) -> Vec<u32> {
        let f = self.field;
        let mut w = v.to_vec();
        for (c, r) in &self.rows {
            let x = w[*c];
            if x != 0 {
                for (wi, ri) in w.iter_mut().zip(r) {
                    *wi = f.sub(*wi, f.mul(x, *ri));
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Adds `v` to the span; returns false when it was already there.
    pub fn insert(&mut self, v: &[u32]) -> bool {
        let f = self.field;
        let mut w = self.reduce(v);
        let Some(c) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv(w[c]);
        for x in w.iter_mut() {
            *x = f.mul(*x, inv);
        }
        self.rows.push((c, w));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Fp {
        Fp::new(3).unwrap()
    }

    #[test]
    fn identity_has_trivial_kernel() {
        let mut m = Matrix::zeros(3, 3);
        for i in 0..3 {
            m.set(i, i, 1);
        }
        assert!(m.kernel(f3()).is_empty());
        assert_eq!(m.rank(f3()), 3);
    }

    #[test]
    fn zero_map_kernel_is_everything() {
        let m = Matrix::zeros(2, 4);
        assert_eq!(m.kernel(f3()).len(), 4);
    }

    #[test]
    fn solve_back_substitutes() {
        let f = f3();
        let a = Matrix::from_rows(&[vec![1, 2, 0], vec![0, 1, 1]], 3);
        let s = Solver::new(f, &a);
        let b = vec![2, 1];
        let x = s.solve(&b).unwrap();
        assert_eq!(a.mul_vec(f, &x), b);
        for k in s.kernel() {
            assert!(a.mul_vec(f, k).iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn inconsistent_system_has_no_solution() {
        let f = f3();
        let a = Matrix::from_rows(&[vec![1, 1], vec![2, 2]], 2);
        let s = Solver::new(f, &a);
        assert!(s.solve(&[1, 0]).is_none());
        assert!(s.solve(&[1, 2]).is_some());
    }
}
