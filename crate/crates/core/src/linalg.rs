//! Dense complex linear algebra shared by the state, channel and embedding code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Eigenvalues below this are treated as exact zeros by spectral functions.
///
/// `x^t` is not Lipschitz at zero, so eigensolver noise of order 1e-16 would
/// otherwise leak into fractional powers as `(1e-16)^0.3 ≈ 1.6e-5`.
pub const EIGEN_FLOOR: f64 = 1e-13;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut dev = 0.0f64;
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted descending.
///
/// Only the lower triangle of `m` is read.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let mut eig = SymmetricEigen::new(m.clone());
    if !eigen_is_finite(&eig) {
        // The QR sweep can break down on very sparse rank-deficient input; a
        // fixed dense rotation avoids it.
        let q = dft(n);
        let hm = hermitian_part(&(&q * m * q.adjoint()));
        eig = SymmetricEigen::new(hm);
        eig.eigenvectors = q.adjoint() * &eig.eigenvectors;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

fn eigen_is_finite(e: &SymmetricEigen<C64, nalgebra::Dyn>) -> bool {
    e.eigenvalues.iter().all(|v| v.is_finite()) && e.eigenvectors.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Unitary discrete Fourier transform.
fn dft(n: usize) -> CMatrix {
    let norm = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |j, k| {
        C64::from_polar(norm, std::f64::consts::TAU * ((j * k) % n) as f64 / n as f64)
    })
}

/// `V diag(f(λ)) V†`.
pub fn spectral_apply(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = vectors.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &lam) in values.iter().enumerate() {
        let w = f(lam);
        if w == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        for i in 0..n {
            let vi = v[i] * w;
            for j in 0..n {
                out[(i, j)] += vi * v[j].conj();
            }
        }
    }
    out
}

/// `x^t` with the convention `0^t = 0` and eigenvalues below [`EIGEN_FLOOR`] treated as zero.
#[inline]
pub fn floored_pow(x: f64, t: f64) -> f64 {
    if x <= EIGEN_FLOOR {
        0.0
    } else {
        x.powf(t)
    }
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Row-major strides of a tensor-product index over `dims`.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Splits a flat index into its per-subsystem digits.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        out[i] = index % dims[i];
        index /= dims[i];
    }
    out
}

/// Reduced matrix on the (sorted, distinct) subsystems `keep`.
pub fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let st = strides(dims);
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let dk: usize = keep_dims.iter().product();
    let dt: usize = traced_dims.iter().product();

    let offset = |sub: &[usize], sub_dims: &[usize], flat: usize| -> usize {
        digits(flat, sub_dims)
            .iter()
            .zip(sub)
            .map(|(d, &s)| d * st[s])
            .sum()
    };
    let keep_off: Vec<usize> = (0..dk).map(|a| offset(keep, &keep_dims, a)).collect();
    let trace_off: Vec<usize> = (0..dt).map(|t| offset(&traced, &traced_dims, t)).collect();

    let mut out = CMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = ZERO;
            for &t in &trace_off {
                acc += m[(keep_off[a] + t, keep_off[b] + t)];
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// Reorders the tensor factors of a vector: output subsystem `i` is input subsystem `order[i]`.
pub fn permute_vector(v: &CVector, dims: &[usize], order: &[usize]) -> CVector {
    let new_dims: Vec<usize> = order.iter().map(|&i| dims[i]).collect();
    let st_old = strides(dims);
    let mut out = CVector::zeros(v.len());
    for (flat, slot) in out.iter_mut().enumerate() {
        let dg = digits(flat, &new_dims);
        let src: usize = dg.iter().zip(order).map(|(d, &o)| d * st_old[o]).sum();
        *slot = v[src];
    }
    out
}
