//! Dense kernels: symmetric eigendecomposition and partial-pivot LU.
//!
//! Matrices are row-major `Vec<f64>` of length `n * n`.

use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 64;

/// Eigenpairs of a dense symmetric matrix, unsorted.
///
/// Householder reduction to tridiagonal form followed by implicit QL with
/// shifts. Only the upper triangle of `a` is read. Eigenvectors come back as
/// rows: `vectors[k * n..(k + 1) * n]` pairs with `values[k]`.
pub fn symmetric_eigen(mut a: Vec<f64>, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut taus = vec![0.0; n];
    tridiagonalize(&mut a, n, &mut diag, &mut off, &mut taus);
    let mut zt = accumulate_transposed(&a, n, &taus);
    implicit_ql(&mut diag, &mut off, &mut zt, n)?;
    Ok((diag, zt))
}

/// Reduces the upper triangle in place. On return row `k` past the diagonal
/// holds the Householder vector of step `k`, `taus[k]` its scale, and
/// `off[k]` couples `diag[k]` with `diag[k + 1]`.
fn tridiagonalize(a: &mut [f64], n: usize, diag: &mut [f64], off: &mut [f64], taus: &mut [f64]) {
    let mut p = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        diag[k] = a[k * n + k];
        let lo = k + 1;
        let m = n - lo;
        let (head, tail) = a.split_at_mut((k + 1) * n);
        let x = &mut head[k * n + lo..k * n + n];
        let sigma: f64 = x[1..].iter().map(|v| v * v).sum();
        if sigma == 0.0 {
            off[k] = x[0];
            taus[k] = 0.0;
            x.fill(0.0);
            continue;
        }
        let norm = (x[0] * x[0] + sigma).sqrt();
        let alpha = if x[0] > 0.0 { -norm } else { norm };
        x[0] -= alpha;
        let vtv = x[0] * x[0] + sigma;
        let tau = 2.0 / vtv;
        off[k] = alpha;
        taus[k] = tau;
        let v = &*x;

        // p = tau * A22 v from the upper triangle of the trailing block
        let p = &mut p[..m];
        p.fill(0.0);
        for r in 0..m {
            let row = &tail[r * n + lo + r..r * n + n];
            let vr = v[r];
            let mut acc = row[0] * vr;
            let (rest_row, rest_v) = (&row[1..], &v[r + 1..]);
            let rest_p = &mut p[r + 1..];
            for ((&arc, &vc), pc) in rest_row.iter().zip(rest_v).zip(rest_p.iter_mut()) {
                acc += arc * vc;
                *pc += arc * vr;
            }
            p[r] += acc;
        }
        let mut ptv = 0.0;
        for (pi, &vi) in p.iter_mut().zip(v) {
            *pi *= tau;
            ptv += *pi * vi;
        }
        let half = 0.5 * tau * ptv;
        let w = &mut w[..m];
        for ((wi, &pi), &vi) in w.iter_mut().zip(p.iter()).zip(v) {
            *wi = pi - half * vi;
        }
        for r in 0..m {
            let row = &mut tail[r * n + lo + r..r * n + n];
            let (vr, wr) = (v[r], w[r]);
            for ((arc, &vc), &wc) in row.iter_mut().zip(&v[r..]).zip(&w[r..]) {
                *arc -= vr * wc + wr * vc;
            }
        }
    }
    diag[n - 1] = a[(n - 1) * n + n - 1];
    off[n - 1] = 0.0;
}

/// Builds `Q^T = H_{n-2} ... H_0` so that row `i` is column `i` of `Q`.
fn accumulate_transposed(a: &[f64], n: usize, taus: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    for k in (0..n.saturating_sub(1)).rev() {
        let tau = taus[k];
        if tau == 0.0 {
            continue;
        }
        let lo = k + 1;
        let v = &a[k * n + lo..k * n + n];
        for r in lo..n {
            let row = &mut m[r * n + lo..r * n + n];
            let s: f64 = row.iter().zip(v).map(|(x, y)| x * y).sum();
            let f = tau * s;
            if f != 0.0 {
                for (x, &y) in row.iter_mut().zip(v) {
                    *x -= f * y;
                }
            }
        }
    }
    m
}

/// Implicit QL on the tridiagonal `(diag, off)`; rotations are applied to
/// the rows of `zt`.
fn implicit_ql(d: &mut [f64], e: &mut [f64], zt: &mut [f64], n: usize) -> Result<()> {
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::ConvergenceFailure(format!(
                        "QL iteration did not deflate eigenvalue {l} after {MAX_QL_ITERATIONS} sweeps"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (upper, lower) = zt.split_at_mut((i + 1) * n);
                    let zi = &mut upper[i * n..];
                    let zi1 = &mut lower[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let hb = *b;
                        *b = s * *a + c * hb;
                        *a = c * *a - s * hb;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Solves `a x = b` by LU factorization with partial pivoting.
pub fn lu_solve(mut a: Vec<f64>, n: usize, mut b: Vec<f64>) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let scale = a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let tiny = scale * n as f64 * f64::EPSILON;
    for k in 0..n {
        let (piv, pmax) =
            (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pmax > tiny) {
            return Err(Error::SingularSystem(k));
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            b.swap(k, piv);
        }
        let (head, tail) = a.split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n + k..k * n + n];
        let inv = 1.0 / pivot_row[0];
        let bk = b[k];
        for (r, row) in tail.chunks_exact_mut(n).enumerate() {
            let row = &mut row[k..];
            let l = row[0] * inv;
            if l == 0.0 {
                continue;
            }
            row[0] = l;
            for (x, &y) in row[1..].iter_mut().zip(&pivot_row[1..]) {
                *x -= l * y;
            }
            b[k + 1 + r] -= l * bk;
        }
    }
    for k in (0..n).rev() {
        let row = &a[k * n..(k + 1) * n];
        let s: f64 = row[k + 1..].iter().zip(&b[k + 1..]).map(|(x, y)| x * y).sum();
        b[k] = (b[k] - s) / row[k];
    }
    Ok(b)
}
