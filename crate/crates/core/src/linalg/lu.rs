//! Right-looking LU without pivoting.
//!
//! Only safe for matrices where elimination never meets a small pivot, such
//! as `I - A` with `A` substochastic (column diagonally dominant).

use super::{gemm, DenseMatrix};

const BLOCK: usize = 64;

#[derive(Debug, Clone)]
pub struct PivotFreeLu {
    lu: DenseMatrix,
}

impl PivotFreeLu {
    pub fn factor(mut a: DenseMatrix) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU factorization expects a square matrix");
        let mut k0 = 0;
        while k0 < n {
            let kb = BLOCK.min(n - k0);
            factor_panel(&mut a, k0, kb);
            if k0 + kb < n {
                update_trailing(&mut a, k0, kb);
            }
            k0 += kb;
        }
        Self { lu: a }
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    pub fn u_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.lu[(i, i)]).collect()
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.dim();
        // L y = b, unit diagonal, column oriented
        for j in 0..n {
            let yj = b[j];
            if yj != 0.0 {
                let col = self.lu.column(j);
                for i in j + 1..n {
                    b[i] -= col[i] * yj;
                }
            }
        }
        // U x = y
        for j in (0..n).rev() {
            let col = self.lu.column(j);
            b[j] /= col[j];
            let xj = b[j];
            if xj != 0.0 {
                for (bi, &u) in b[..j].iter_mut().zip(&col[..j]) {
                    *bi -= u * xj;
                }
            }
        }
    }

    /// Solves `A^T x = b` in place.
    pub fn solve_transpose(&self, b: &mut [f64]) {
        let n = self.dim();
        // U^T z = b
        for j in 0..n {
            let col = self.lu.column(j);
            let dot: f64 = col[..j].iter().zip(&b[..j]).map(|(u, x)| u * x).sum();
            b[j] = (b[j] - dot) / col[j];
        }
        // L^T x = z
        for j in (0..n).rev() {
            let col = self.lu.column(j);
            let dot: f64 = col[j + 1..].iter().zip(&b[j + 1..]).map(|(l, x)| l * x).sum();
            b[j] -= dot;
        }
    }
}

fn factor_panel(a: &mut DenseMatrix, k0: usize, kb: usize) {
    let n = a.nrows();
    for k in k0..k0 + kb {
        let pivot = a[(k, k)];
        {
            let col = a.column_mut(k);
            for v in &mut col[k + 1..] {
                *v /= pivot;
            }
        }
        let data = a.as_mut_slice();
        let (left, right) = data.split_at_mut((k + 1) * n);
        let l = &left[k * n + k + 1..(k + 1) * n];
        for jj in 0..(k0 + kb - k - 1) {
            let col = &mut right[jj * n..(jj + 1) * n];
            let ukj = col[k];
            if ukj != 0.0 {
                for (c, &lv) in col[k + 1..].iter_mut().zip(l) {
                    *c -= lv * ukj;
                }
            }
        }
    }
}

fn update_trailing(a: &mut DenseMatrix, k0: usize, kb: usize) {
    let n = a.nrows();
    let k1 = k0 + kb;
    // U12 = L11^{-1} A12
    for j in k1..n {
        for k in k0..k1 {
            let ukj = a[(k, j)];
            if ukj == 0.0 {
                continue;
            }
            for i in k + 1..k1 {
                let l = a[(i, k)];
                a[(i, j)] -= l * ukj;
            }
        }
    }
    // A22 -= L21 U12; the three blocks are disjoint regions of `a`
    let m = n - k1;
    let data = a.as_mut_slice().as_mut_ptr();
    unsafe {
        gemm(
            m,
            kb,
            m,
            -1.0,
            (data.add(k0 * n + k1) as *const f64, 1, n as isize),
            (data.add(k1 * n + k0) as *const f64, 1, n as isize),
            1.0,
            (data.add(k1 * n + k1), 1, n as isize),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_diagonally_dominant_system() {
        for &n in &[1, 3, BLOCK, BLOCK + 7, 2 * BLOCK + 1] {
            let mut a = DenseMatrix::zeros(n, n);
            for j in 0..n {
                for i in 0..n {
                    a[(i, j)] = if i == j { 1.0 } else { -0.9 / n as f64 * ((i * 7 + j * 3) % 5) as f64 / 4.0 };
                }
            }
            let x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
            let lu = PivotFreeLu::factor(a.clone());
            let mut b = a.matvec(&x);
            lu.solve(&mut b);
            let err = b.iter().zip(&x).map(|(p, q)| (p - q).abs() / q).fold(0.0, f64::max);
            assert!(err < 1e-12, "n={n} err={err}");
            let mut bt = a.transpose().matvec(&x);
            lu.solve_transpose(&mut bt);
            let err = bt.iter().zip(&x).map(|(p, q)| (p - q).abs() / q).fold(0.0, f64::max);
            assert!(err < 1e-12, "transpose n={n} err={err}");
        }
    }
}
