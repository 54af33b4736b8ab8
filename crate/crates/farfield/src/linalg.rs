//! Dense matrix kernels used by the frontend and the transformer.
//!
//! Everything is row-major `&[f64]` with explicit dimensions. The complex
//! product is factored into three real GEMMs (Karatsuba form) because the
//! spectral-filtering stage dominates training cost.

/// `c = alpha * a @ b + beta * c` for row-major matrices
/// (`a`: m x k, `b`: k x n, `c`: m x n).
pub fn gemm(m: usize, k: usize, n: usize, alpha: f64, a: &[f64], b: &[f64], beta: f64, c: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 || k == 0 {
        if beta == 0.0 {
            c.fill(0.0);
        } else if beta != 1.0 {
            for v in c.iter_mut() {
                *v *= beta;
            }
        }
        return;
    }
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            k as isize,
            1,
            b.as_ptr(),
            n as isize,
            1,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// `y = a @ x` for a row-major m x k matrix and a k-vector.
pub fn matvec(m: usize, k: usize, a: &[f64], x: &[f64], y: &mut [f64]) {
    gemm(m, k, 1, 1.0, a, x, 0.0, y);
}

/// `y += a^T @ x` for a row-major m x k matrix and an m-vector.
pub fn matvec_t_acc(m: usize, k: usize, a: &[f64], x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(y.len(), k);
    for i in 0..m {
        let xi = x[i];
        if xi == 0.0 {
            continue;
        }
        let row = &a[i * k..(i + 1) * k];
        for (yj, aij) in y.iter_mut().zip(row) {
            *yj += aij * xi;
        }
    }
}

/// Transpose a row-major m x n matrix into an n x m buffer.
pub fn transpose(m: usize, n: usize, a: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.len(), m * n);
    debug_assert_eq!(out.len(), m * n);
    for i in 0..m {
        for j in 0..n {
            out[j * m + i] = a[i * n + j];
        }
    }
}

/// Complex matrix product `C = A @ B` where the operands are stored as
/// separate real and imaginary planes. Uses the three-multiplication
/// factoring: with `t1 = Ar@Br`, `t2 = Ai@Bi`, `t3 = (Ar+Ai)@(Br+Bi)`,
/// the result is `Cr = t1 - t2`, `Ci = t3 - t1 - t2`.
///
/// `scratch` must hold at least `m*k + k*n + m*n` elements.
#[allow(clippy::too_many_arguments)]
pub fn complex_gemm(
    m: usize,
    k: usize,
    n: usize,
    ar: &[f64],
    ai: &[f64],
    br: &[f64],
    bi: &[f64],
    cr: &mut [f64],
    ci: &mut [f64],
    scratch: &mut Vec<f64>,
) {
    scratch.clear();
    scratch.resize(m * k + k * n + m * n, 0.0);
    let (asum, rest) = scratch.split_at_mut(m * k);
    let (bsum, t1) = rest.split_at_mut(k * n);
    for i in 0..m * k {
        asum[i] = ar[i] + ai[i];
    }
    for i in 0..k * n {
        bsum[i] = br[i] + bi[i];
    }
    // t1 = Ar@Br ; ci = (Ar+Ai)@(Br+Bi) ; cr = Ai@Bi
    gemm(m, k, n, 1.0, ar, br, 0.0, t1);
    gemm(m, k, n, 1.0, asum, bsum, 0.0, ci);
    gemm(m, k, n, 1.0, ai, bi, 0.0, cr);
    for i in 0..m * n {
        let t2 = cr[i];
        ci[i] -= t1[i] + t2;
        cr[i] = t1[i] - t2;
    }
}

/// Numerically stable softmax over a slice, in place.
pub fn softmax_inplace(x: &mut [f64]) {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in x.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    let inv = 1.0 / sum;
    for v in x.iter_mut() {
        *v *= inv;
    }
}

/// log(sum(exp(x))) without overflow.
pub fn logsumexp(x: &[f64]) -> f64 {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = x.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// log(exp(a) + exp(b)) without overflow.
#[inline]
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
