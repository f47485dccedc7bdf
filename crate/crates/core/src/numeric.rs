//! Small numeric helpers shared across modules: deterministic reductions,
//! Kronecker products, Gauss rules and factorial tables.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::num::NonZeroUsize;

pub type C64 = Complex64;

/// Chunk size for parallel reductions. Fixed so that results do not depend
/// on the number of worker threads.
pub const REDUCE_CHUNK: usize = 256;

/// Pairwise summation of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_c(xs: &[C64]) -> C64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_c(&xs[..mid]) + pairwise_sum_c(&xs[mid..])
}

/// Parallel sum of `f(i)` for `i in 0..n`, bitwise reproducible for any
/// thread count.
pub fn par_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let partial: Vec<f64> = (0..n.div_ceil(REDUCE_CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * REDUCE_CHUNK;
            let hi = (lo + REDUCE_CHUNK).min(n);
            let v: Vec<f64> = (lo..hi).map(&f).collect();
            pairwise_sum(&v)
        })
        .collect();
    pairwise_sum(&partial)
}

pub fn par_sum_c<F>(n: usize, f: F) -> C64
where
    F: Fn(usize) -> C64 + Sync,
{
    let partial: Vec<C64> = (0..n.div_ceil(REDUCE_CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * REDUCE_CHUNK;
            let hi = (lo + REDUCE_CHUNK).min(n);
            let v: Vec<C64> = (lo..hi).map(&f).collect();
            pairwise_sum_c(&v)
        })
        .collect();
    pairwise_sum_c(&partial)
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub fn identity(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

/// Frobenius norm of a complex matrix.
pub fn frob(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let n = n.max(1);
    let rule = gauss_quad::GaussLegendre::new(NonZeroUsize::new(n).unwrap());
    let mut pairs = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // The crate's values are good to ~1e-14; two Newton steps on P_n bring
    // nodes and weights to full precision.
    for p in pairs.iter_mut() {
        let mut x = p.0;
        for _ in 0..2 {
            let (pn, d) = legendre_with_derivative(n, x);
            x -= pn / d;
        }
        let (_, d) = legendre_with_derivative(n, x);
        *p = (x, 2.0 / ((1.0 - x * x) * d * d));
    }
    pairs
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Hermite nodes and weights for the weight `exp(-x^2)`.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let rule = gauss_quad::GaussHermite::new(NonZeroUsize::new(n.max(1)).unwrap());
    let mut pairs = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Gauss-Laguerre nodes and weights for the weight `exp(-x)` on [0, inf).
pub fn gauss_laguerre(n: usize) -> Vec<(f64, f64)> {
    let alpha = gauss_quad::FiniteAboveNegOneF64::new(0.0).unwrap();
    let rule = gauss_quad::GaussLaguerre::new(NonZeroUsize::new(n.max(1)).unwrap(), alpha);
    let mut pairs = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Chebyshev polynomials of the second kind `U_0..=U_n` at a complex point.
/// `U_n(cos w) = sin((n+1)w)/sin(w)` is the SU(2) character of spin `n/2`.
pub fn chebyshev_u(n: usize, tau: C64) -> Vec<C64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(C64::new(1.0, 0.0));
    if n == 0 {
        return out;
    }
    out.push(2.0 * tau);
    for k in 2..=n {
        let next = 2.0 * tau * out[k - 1] - out[k - 2];
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_sum_is_reproducible() {
        let f = |i: usize| (i as f64).sin() * 1e-3 + 1.0 / (1.0 + i as f64);
        let a = par_sum(100_000, f);
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| par_sum(100_000, f));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn chebyshev_matches_sine_ratio() {
        let w = 0.7_f64;
        let u = chebyshev_u(6, C64::new(w.cos(), 0.0));
        for (n, v) in u.iter().enumerate() {
            let exact = ((n as f64 + 1.0) * w).sin() / w.sin();
            assert!((v.re - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn gauss_rules_integrate_moments() {
        let gl = gauss_legendre(5);
        let s: f64 = gl.iter().map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-13);
        let gh = gauss_hermite(10);
        let s: f64 = gh.iter().map(|(x, w)| w * x * x).sum();
        assert!((s - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-13);
        let lag = gauss_laguerre(8);
        let s: f64 = lag.iter().map(|(x, w)| w * x.powi(5)).sum();
        assert!((s - 120.0).abs() < 1e-9);
    }
}
