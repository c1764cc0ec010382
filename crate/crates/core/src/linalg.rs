//! Complex dense helpers. Products go through a blocked GEMM kernel because the
//! generic nalgebra path for complex scalars is an order of magnitude slower.

use matrixmultiply::CGemmOption;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Gram matrices whose estimated condition number exceeds this are treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// I.i.d. circularly-symmetric complex Gaussian entries with the given variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, variance: f64) -> CMat {
    let s = (variance / 2.0).sqrt();
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

#[derive(Clone, Copy)]
enum Op {
    Plain,
    Adjoint,
}

fn gemm(a: &CMat, op_a: Op, b: &CMat, op_b: Op) -> CMat {
    // Only plain products exist in the kernel, so adjoints are conjugated copies
    // read through transposed strides.
    let conj_a;
    let (a_src, m, k, rsa, csa) = match op_a {
        Op::Plain => (a, a.nrows(), a.ncols(), 1isize, a.nrows() as isize),
        Op::Adjoint => {
            conj_a = a.conjugate();
            (&conj_a, a.ncols(), a.nrows(), a.nrows() as isize, 1isize)
        }
    };
    let conj_b;
    let (b_src, kb, n, rsb, csb) = match op_b {
        Op::Plain => (b, b.nrows(), b.ncols(), 1isize, b.nrows() as isize),
        Op::Adjoint => {
            conj_b = b.conjugate();
            (&conj_b, b.ncols(), b.nrows(), b.nrows() as isize, 1isize)
        }
    };
    assert_eq!(k, kb, "inner dimensions differ");
    let mut c = CMat::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: Complex64 is repr(C) {re, im}, layout-identical to [f64; 2]; the
    // strides describe column-major storage owned by the matrices above, and
    // `c` is a distinct allocation of exactly m x n elements.
    unsafe {
        matrixmultiply::zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a_src.as_ptr() as *const [f64; 2],
            rsa,
            csa,
            b_src.as_ptr() as *const [f64; 2],
            rsb,
            csb,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// A B
pub fn mul(a: &CMat, b: &CMat) -> CMat {
    gemm(a, Op::Plain, b, Op::Plain)
}

/// A^H B
pub fn mul_adj(a: &CMat, b: &CMat) -> CMat {
    gemm(a, Op::Adjoint, b, Op::Plain)
}

/// A B^H
pub fn mul_by_adj(a: &CMat, b: &CMat) -> CMat {
    gemm(a, Op::Plain, b, Op::Adjoint)
}

/// H H^H
pub fn gram(h: &CMat) -> CMat {
    mul_by_adj(h, h)
}

pub fn frob_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Solves G X = B for Hermitian positive-definite G via Cholesky, refusing
/// systems whose condition number estimate exceeds [`CONDITION_LIMIT`].
pub fn hermitian_solve(g: &CMat, rhs: &CMat, what: &str) -> Result<CMat> {
    let chol = g
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Infeasible(format!("{what}: Gram matrix is not positive definite")))?;
    // Squared ratio of Cholesky diagonal extremes; a cheap lower estimate of cond(G).
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0f64), |(lo, hi), d| (lo.min(d.re), hi.max(d.re)));
    let cond = (hi / lo).powi(2);
    if !(cond.is_finite() && cond <= CONDITION_LIMIT) {
        return Err(Error::Infeasible(format!("{what}: Gram matrix condition {cond:.3e} exceeds {CONDITION_LIMIT:.0e}")));
    }
    Ok(chol.solve(rhs))
}

/// Eigen-decomposition of a Hermitian matrix (eigenvalues ascending is not guaranteed).
pub fn hermitian_eigen(m: &CMat) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    m.clone().symmetric_eigen()
}

/// Rescales `m` so its squared Frobenius norm equals `target`; returns the factor applied.
pub fn normalize_frob(m: &mut CMat, target: f64) -> Result<f64> {
    let e = frob_sq(m);
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::Degenerate("matrix has zero or non-finite energy".into()));
    }
    let s = (target / e).sqrt();
    m.scale_mut(s);
    Ok(s)
}

/// Row `i` of `h` times `m`, as a row vector.
pub fn row_times(h: &CMat, i: usize, m: &CMat) -> Vec<Complex64> {
    let n = m.ncols();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (j, o) in out.iter_mut().enumerate() {
        let col = m.column(j);
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, c) in col.iter().enumerate() {
            acc += h[(i, t)] * c;
        }
        *o = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gemm_variants_match_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = complex_gaussian(&mut rng, 7, 5, 1.0);
        let b = complex_gaussian(&mut rng, 5, 4, 1.0);
        let c = complex_gaussian(&mut rng, 7, 4, 1.0);
        let d = complex_gaussian(&mut rng, 3, 5, 1.0);
        assert!((mul(&a, &b) - &a * &b).norm() < 1e-12);
        assert!((mul_adj(&a, &c) - a.adjoint() * &c).norm() < 1e-12);
        assert!((mul_by_adj(&a, &d) - &a * d.adjoint()).norm() < 1e-12);
        assert!((gram(&a) - &a * a.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn solve_rejects_singular() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = complex_gaussian(&mut rng, 3, 8, 1.0);
        let g = gram(&h);
        let x = hermitian_solve(&g, &h, "test").unwrap();
        assert!((&g * &x - &h).norm() < 1e-10);
        let tall = complex_gaussian(&mut rng, 8, 3, 1.0);
        assert!(hermitian_solve(&gram(&tall), &tall, "rank-deficient").is_err());
    }

    #[test]
    fn gaussian_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = complex_gaussian(&mut rng, 64, 256, 2.0);
        let v = frob_sq(&h) / (64.0 * 256.0);
        assert!((v - 2.0).abs() < 0.05);
    }
}
