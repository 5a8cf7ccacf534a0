//! Blocked Householder QR for square systems.
//!
//! Panels of `BLOCK` columns are reduced with unblocked reflectors, the panel's
//! reflectors are accumulated into compact-WY form `I - V T V^T`, and the
//! trailing matrix is updated with two matrix products. The factored matrix
//! holds `R` on and above the diagonal and the reflector tails below it.

use super::{gemm, DenseMatrix};

const BLOCK: usize = 48;

#[derive(Debug, Clone)]
pub struct HouseholderQr {
    qr: DenseMatrix,
    tau: Vec<f64>,
}

/// Generates a reflector `H = I - tau v v^T` with `v[0] = 1` such that
/// `H x = beta e_1`. On return `x[0] = beta` and `x[1..]` holds `v[1..]`.
fn make_reflector(x: &mut [f64]) -> f64 {
    let alpha = x[0];
    let tail_norm = norm2(&x[1..]);
    if tail_norm == 0.0 {
        return 0.0;
    }
    let beta = -alpha.signum() * alpha.hypot(tail_norm);
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for v in &mut x[1..] {
        *v *= scale;
    }
    x[0] = beta;
    tau
}

fn norm2(x: &[f64]) -> f64 {
    // scaled to avoid overflow on badly scaled columns
    let amax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if amax == 0.0 || !amax.is_finite() {
        return amax;
    }
    let s: f64 = x.iter().map(|v| (v / amax) * (v / amax)).sum();
    amax * s.sqrt()
}

/// Applies `I - tau v v^T` (with implicit `v[0] = 1`) to `c`.
#[inline]
fn apply_reflector(v_tail: &[f64], tau: f64, c: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let (head, tail) = c.split_first_mut().expect("non-empty column");
    let mut w = *head;
    for (a, b) in v_tail.iter().zip(tail.iter()) {
        w += a * b;
    }
    w *= tau;
    *head -= w;
    for (a, b) in v_tail.iter().zip(tail.iter_mut()) {
        *b -= w * a;
    }
}

impl HouseholderQr {
    /// Factors a square matrix. Panics if `a` is not square.
    pub fn factor(mut a: DenseMatrix) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "QR factorization expects a square matrix");
        let mut tau = vec![0.0; n];
        let mut k0 = 0;
        while k0 < n {
            let kb = BLOCK.min(n - k0);
            factor_panel(&mut a, k0, kb, &mut tau);
            if k0 + kb < n {
                update_trailing(&mut a, k0, kb, &tau[k0..k0 + kb]);
            }
            k0 += kb;
        }
        Self { qr: a, tau }
    }

    pub fn dim(&self) -> usize {
        self.qr.nrows()
    }

    /// Diagonal of the triangular factor.
    pub fn r_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.qr[(i, i)]).collect()
    }

    /// Overwrites `b` with `Q^T b`.
    pub fn apply_qt(&self, b: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        for k in 0..n {
            let v = &self.qr.column(k)[k + 1..];
            apply_reflector(v, self.tau[k], &mut b[k..]);
        }
    }

    /// Overwrites `b` with `Q b`.
    pub fn apply_q(&self, b: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        for k in (0..n).rev() {
            let v = &self.qr.column(k)[k + 1..];
            apply_reflector(v, self.tau[k], &mut b[k..]);
        }
    }

    /// Solves `R x = b` in place.
    pub fn solve_r(&self, b: &mut [f64]) {
        let n = self.dim();
        for j in (0..n).rev() {
            let col = self.qr.column(j);
            b[j] /= col[j];
            let xj = b[j];
            if xj != 0.0 {
                for (bi, &r) in b[..j].iter_mut().zip(&col[..j]) {
                    *bi -= r * xj;
                }
            }
        }
    }

    /// Solves `R^T x = b` in place.
    pub fn solve_rt(&self, b: &mut [f64]) {
        let n = self.dim();
        for j in 0..n {
            let col = self.qr.column(j);
            let dot: f64 = col[..j].iter().zip(&b[..j]).map(|(r, x)| r * x).sum();
            b[j] = (b[j] - dot) / col[j];
        }
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        self.apply_qt(b);
        self.solve_r(b);
    }

    /// Solves `A^T x = b` in place.
    pub fn solve_transpose(&self, b: &mut [f64]) {
        self.solve_rt(b);
        self.apply_q(b);
    }
}

fn factor_panel(a: &mut DenseMatrix, k0: usize, kb: usize, tau: &mut [f64]) {
    let n = a.nrows();
    for k in k0..k0 + kb {
        tau[k] = make_reflector(&mut a.column_mut(k)[k..]);
        if tau[k] == 0.0 {
            continue;
        }
        // apply to the rest of the panel
        let data = a.as_mut_slice();
        let (left, right) = data.split_at_mut((k + 1) * n);
        let v = &left[k * n + k + 1..(k + 1) * n];
        for jj in 0..(k0 + kb - k - 1) {
            let col = &mut right[jj * n + k..(jj + 1) * n];
            apply_reflector(v, tau[k], col);
        }
    }
}

/// Applies `(I - V T V^T)^T` from panel `k0..k0+kb` to the trailing columns.
fn update_trailing(a: &mut DenseMatrix, k0: usize, kb: usize, tau: &[f64]) {
    let n = a.nrows();
    let m = n - k0;
    let nc = n - k0 - kb;

    // explicit unit-lower-trapezoidal V, m x kb
    let mut v = vec![0.0; m * kb];
    for c in 0..kb {
        let src = &a.column(k0 + c)[k0..];
        let dst = &mut v[c * m..(c + 1) * m];
        dst[c] = 1.0;
        dst[c + 1..].copy_from_slice(&src[c + 1..]);
    }

    // T is kb x kb upper triangular, column-major
    let mut t = vec![0.0; kb * kb];
    for i in 0..kb {
        t[i * kb + i] = tau[i];
        if tau[i] == 0.0 {
            continue;
        }
        let vi = &v[i * m..(i + 1) * m];
        // z = V[:, 0..i]^T v_i
        let mut z = vec![0.0; i];
        for (r, zr) in z.iter_mut().enumerate() {
            let vr = &v[r * m..(r + 1) * m];
            *zr = vr[i..].iter().zip(&vi[i..]).map(|(x, y)| x * y).sum();
        }
        // T[0..i, i] = -tau_i T[0..i, 0..i] z
        for r in 0..i {
            let mut s = 0.0;
            for c in r..i {
                s += t[c * kb + r] * z[c];
            }
            t[i * kb + r] = -tau[i] * s;
        }
    }

    let mut w = vec![0.0; kb * nc];
    let data = a.as_mut_slice();
    let c_off = (k0 + kb) * n + k0;
    // W = V^T C
    unsafe {
        gemm(
            kb,
            m,
            nc,
            1.0,
            (v.as_ptr(), m as isize, 1),
            (data.as_ptr().add(c_off), 1, n as isize),
            0.0,
            (w.as_mut_ptr(), 1, kb as isize),
        );
    }
    // W = T^T W
    for col in w.chunks_exact_mut(kb) {
        for r in (0..kb).rev() {
            let mut s = 0.0;
            for c in 0..=r {
                s += t[r * kb + c] * col[c];
            }
            col[r] = s;
        }
    }
    // C -= V W
    unsafe {
        gemm(
            m,
            kb,
            nc,
            -1.0,
            (v.as_ptr(), 1, m as isize),
            (w.as_ptr(), 1, kb as isize),
            1.0,
            (data.as_mut_ptr().add(c_off), 1, n as isize),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: u64) -> DenseMatrix {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut a = DenseMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                a[(i, j)] = next();
            }
            a[(j, j)] += 2.0;
        }
        a
    }

    #[test]
    fn reflector_annihilates_tail() {
        let mut x = vec![3.0, 4.0, 0.0];
        let orig = x.clone();
        let tau = make_reflector(&mut x);
        let beta = x[0];
        let v_tail = x[1..].to_vec();
        let mut y = orig;
        apply_reflector(&v_tail, tau, &mut y);
        assert!((y[0] - beta).abs() < 1e-14);
        assert!((beta.abs() - 5.0).abs() < 1e-14);
        assert!(y[1].abs() < 1e-14 && y[2].abs() < 1e-14);
    }

    #[test]
    fn solves_across_block_boundaries() {
        for &n in &[1, 2, 7, BLOCK, BLOCK + 1, 2 * BLOCK + 5] {
            let a = sample(n, n as u64 + 3);
            let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let b = a.matvec(&x);
            let qr = HouseholderQr::factor(a.clone());
            let mut sol = b.clone();
            qr.solve(&mut sol);
            let err = sol.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(err < 1e-11, "n={n} err={err}");

            let bt = a.transpose().matvec(&x);
            let mut solt = bt;
            qr.solve_transpose(&mut solt);
            let err = solt.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(err < 1e-11, "transpose n={n} err={err}");
        }
    }

    #[test]
    fn q_is_orthogonal() {
        let n = BLOCK + 9;
        let qr = HouseholderQr::factor(sample(n, 11));
        let x: Vec<f64> = (0..n).map(|i| 1.0 / (i + 1) as f64).collect();
        let mut y = x.clone();
        qr.apply_q(&mut y);
        let nx = norm2(&x);
        assert!((norm2(&y) - nx).abs() < 1e-13 * nx.max(1.0));
        qr.apply_qt(&mut y);
        let err = y.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-14);
    }
}
