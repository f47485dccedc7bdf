//! Segal-Bargmann transforms `B_t` and `C_t`, their norms, pointwise bounds
//! and the torus phase-space density.
//!
//! Both transforms are "heat operator, then holomorphic extension"; they
//! differ only in the measure on `K_C` used to normalize the image.

use crate::check::Comparison;
use crate::error::{HeatlabError, Result};
use crate::fock::hermite_norm_adaptive;
use crate::fourier::{exactness_for_band, FourierCoefficients};
use crate::group::{CompactGroup, ComplexGroupPoint, Factor, FactorLabel, FactorPoint, Irrep};
use crate::heat::{wrapped_gaussian, HeatKernel};
use crate::numeric::{gauss_hermite, C64};
use crate::quadrature::{haar_quadrature_with, DEFAULT_NODE_CAP};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::PI;

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(HeatlabError::InvalidArgument(format!(
            "t must be positive, got {t}"
        )))
    }
}

/// `B_t f(g)`: heat operator on the Fourier data, then holomorphic evaluation.
pub fn segal_bargmann_b(f: &FourierCoefficients, t: f64, g: &ComplexGroupPoint) -> Result<C64> {
    check_t(t)?;
    Ok(f.heat(t).eval_complex(g))
}

/// `C_t f(g)`; the same formula as [`segal_bargmann_b`].
pub fn segal_bargmann_c(f: &FourierCoefficients, t: f64, g: &ComplexGroupPoint) -> Result<C64> {
    segal_bargmann_b(f, t, g)
}

/// `int rho_t(g x^{-1}) f(x) dx` by Haar quadrature of the given exactness,
/// with the kernel continued analytically by its character series.
pub fn segal_bargmann_by_convolution(
    f: &FourierCoefficients,
    t: f64,
    g: &ComplexGroupPoint,
    exactness: &[usize],
) -> Result<C64> {
    check_t(t)?;
    let group = f.group();
    let h = HeatKernel::new(group, t)?;
    let rule = haar_quadrature_with(group, exactness, DEFAULT_NODE_CAP)?;
    let vals: Vec<Result<C64>> = rule
        .nodes
        .par_iter()
        .zip(&rule.weights)
        .map(|(x, w)| {
            let gx = g.mul(&x.inverse().complexify());
            let (rho, _) = h.rho_complex_with_tail(&gx, 1e-16)?;
            Ok(rho * f.eval(x) * *w)
        })
        .collect();
    let mut terms = Vec::with_capacity(vals.len());
    for v in vals {
        terms.push(v?);
    }
    Ok(crate::numeric::pairwise_sum_c(&terms))
}

/// A convolution exactness that resolves the kernel at `t` and imaginary part `|Y| <= y_max`.
pub fn convolution_exactness(f: &FourierCoefficients, t: f64, y_max: f64) -> Result<Vec<usize>> {
    let h = HeatKernel::new(f.group(), t)?;
    // Terms e^{-t n^2/8 + n |Y|/2} of the continued series decay past n ~ 4|Y|/t.
    let extra = (8.0 * y_max / t).ceil() as usize;
    let band: Vec<usize> = h
        .band()
        .iter()
        .zip(f.band())
        .map(|(b, fb)| (b + extra).max(fb))
        .collect();
    Ok(exactness_for_band(f.group(), &band))
}

/// `||f||^2` in `L^2(K, rho_t)`, by quadrature of `|f|^2 rho_t`, cross-checked
/// against `e^{t Delta/2}(conj(f) f)(e)` computed from Fourier data.
pub fn norm_in_position(f: &FourierCoefficients, t: f64) -> Result<f64> {
    check_t(t)?;
    let group = f.group();
    let h = HeatKernel::new(group, t)?;
    let band: Vec<usize> = f.band().iter().zip(h.band()).map(|(a, b)| a + b).collect();
    let rule = haar_quadrature_with(group, &exactness_for_band(group, &band), DEFAULT_NODE_CAP)?;
    let quad = rule.integrate(|x| f.eval(x).norm_sqr() * h.rho(x));
    let spectral = f.conj_product(f)?.heat_at_identity(t).re;
    let tol = 1e-9 * quad.abs().max(spectral.abs()) + 1e-15 + h.tail_bound * f.l2_norm_sq();
    if (quad - spectral).abs() > tol {
        return Err(HeatlabError::Consistency {
            what: "position norm",
            lhs: quad,
            rhs: spectral,
        });
    }
    Ok(quad)
}

/// `||f||^2` in `L^2(K, dx)` by quadrature, cross-checked against Plancherel.
pub fn norm_in_l2(f: &FourierCoefficients) -> Result<f64> {
    let group = f.group();
    let rule = haar_quadrature_with(
        group,
        &exactness_for_band(group, &f.band()),
        DEFAULT_NODE_CAP,
    )?;
    let quad = rule.integrate(|x| f.eval(x).norm_sqr());
    let plancherel = f.l2_norm_sq();
    if (quad - plancherel).abs() > 1e-10 * quad.max(plancherel) + 1e-15 {
        return Err(HeatlabError::Consistency {
            what: "L2 norm",
            lhs: quad,
            rhs: plancherel,
        });
    }
    Ok(quad)
}

/// The two holomorphic measures on `(C^*)^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorusMeasure {
    /// `mu_t`: the `K_C` heat kernel, normalizing `B_t`.
    Mu,
    /// `nu_t(Y) d theta/(2 pi)`, normalizing `C_t`.
    Nu,
}

pub(crate) fn torus_dim(group: &CompactGroup, op: &'static str) -> Result<usize> {
    match group.factors() {
        [Factor::Torus(d)] => Ok(*d),
        _ => Err(HeatlabError::Unsupported {
            op,
            group: group.name(),
            reason: "holomorphic L2 norms are computed by quadrature only on the torus".into(),
        }),
    }
}

/// Laurent coefficients `(n, c_n)` of a holomorphic function on `(C^*)^d`
/// stored as torus Fourier data.
pub(crate) fn laurent(f: &FourierCoefficients) -> Vec<(Vec<i64>, C64)> {
    f.blocks()
        .iter()
        .filter_map(|(ir, m)| match ir.label.0.as_slice() {
            [FactorLabel::Torus(n)] => Some((n.clone(), m[(0, 0)])),
            _ => None,
        })
        .collect()
}

/// Nodes and weights of a one-variable rule for the given measure, good for
/// Laurent modes with `|n| <= band`. Returns `(theta nodes with weights, Y nodes with weights)`.
pub(crate) fn torus_rule_1d(
    t: f64,
    band: usize,
    measure: TorusMeasure,
) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let m = match measure {
        TorusMeasure::Mu => 2 * band + 1 + (160.0 / t).sqrt().ceil() as usize,
        TorusMeasure::Nu => 2 * band + 1,
    };
    let theta: Vec<(f64, f64)> = (0..m)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / m as f64;
            let w = match measure {
                TorusMeasure::Mu => 2.0 * PI / m as f64 * wrapped_gaussian(t / 2.0, th),
                TorusMeasure::Nu => 1.0 / m as f64,
            };
            (th, w)
        })
        .collect();
    // Integrands e^{-2 n Y} against nu_t peak near Y = -n t; cover that with Hermite nodes.
    let a = 2.0 * band as f64 * t.sqrt();
    let n_gh = 60.max(((a / 2.0 + 8.0).powi(2) / 2.0).ceil() as usize + 10);
    let ys: Vec<(f64, f64)> = gauss_hermite(n_gh)
        .into_iter()
        .map(|(s, w)| (t.sqrt() * s, w / PI.sqrt()))
        .collect();
    (theta, ys)
}

pub(crate) const RADIAL_NODES: usize = 40;

/// `(int e^{-kY}, int Y e^{-kY})` against `e^{-Y^2/t} dY / sqrt(pi t)`, by Gauss-Hermite
/// nodes recentered at the peak `Y = -k t / 2` of the integrand.
pub(crate) fn radial_moments(t: f64, k: i64, nodes: &[(f64, f64)]) -> (f64, f64) {
    let c = -(k as f64) * t / 2.0;
    let (mut m0, mut m1) = (0.0, 0.0);
    for &(s, w) in nodes {
        let y = c + t.sqrt() * s;
        let v = w / PI.sqrt() * (-(k as f64) * y - (2.0 * y * c - c * c) / t).exp();
        m0 += v;
        m1 += v * y;
    }
    (m0, m1)
}

/// One-variable Gram matrix `G(n, m) = int conj(e^{inz}) e^{imz}` for `|n|,|m| <= band`, by quadrature.
pub(crate) fn gram_1d(t: f64, band: usize, measure: TorusMeasure) -> DMatrix<C64> {
    let (theta, _) = torus_rule_1d(t, band, measure);
    let nodes = gauss_hermite(RADIAL_NODES);
    let b = band as i64;
    let size = 2 * band + 1;
    DMatrix::from_fn(size, size, |i, j| {
        let (n, m) = (i as i64 - b, j as i64 - b);
        let ang: C64 = theta
            .iter()
            .map(|(th, w)| C64::from_polar(*w, (m - n) as f64 * th))
            .sum();
        ang * radial_moments(t, n + m, &nodes).0
    })
}

/// `int |F|^2` over `(C^*)^d` against `mu_t` or `nu_t d theta/(2 pi)`, where `F`
/// is holomorphic with the given Laurent data. The product rule is applied
/// coordinate by coordinate: each one-variable integral is a theta-grid times
/// Gauss-Hermite quadrature.
pub fn bargmann_norm_torus(
    big_f: &FourierCoefficients,
    t: f64,
    measure: TorusMeasure,
) -> Result<f64> {
    check_t(t)?;
    torus_dim(big_f.group(), "bargmann_norm_torus")?;
    let modes = laurent(big_f);
    let band = big_f.band()[0];
    let g = gram_1d(t, band, measure);
    let b = band as i64;
    let v: f64 = modes
        .par_iter()
        .map(|(n, cn)| {
            let mut s = C64::from(0.0);
            for (m, cm) in &modes {
                let mut gp = C64::from(1.0);
                for (nk, mk) in n.iter().zip(m) {
                    gp *= g[((nk + b) as usize, (mk + b) as usize)];
                }
                s += cn.conj() * cm * gp;
            }
            s.re
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(v)
}

/// The same integral as [`bargmann_norm_torus`], summed directly over the
/// product nodes with `F` evaluated pointwise. Cost grows like `nodes^(2d)`.
pub fn bargmann_norm_torus_direct(
    big_f: &FourierCoefficients,
    t: f64,
    measure: TorusMeasure,
) -> Result<f64> {
    check_t(t)?;
    let d = torus_dim(big_f.group(), "bargmann_norm_torus_direct")?;
    let (theta, ys) = torus_rule_1d(t, big_f.band()[0], measure);
    let one: Vec<(C64, f64)> = theta
        .iter()
        .flat_map(|(th, wt)| ys.iter().map(move |(y, wy)| (C64::new(*th, *y), wt * wy)))
        .collect();
    let total = one.len().pow(d as u32);
    let parts: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut z = Vec::with_capacity(d);
            let mut w = 1.0;
            for _ in 0..d {
                let (zz, ww) = one[idx % one.len()];
                z.push(zz);
                w *= ww;
                idx /= one.len();
            }
            w * big_f.eval_complex(&ComplexGroupPoint::torus(z)).norm_sqr()
        })
        .collect();
    Ok(crate::numeric::pairwise_sum(&parts))
}

/// `||B_t f||^2`: quadrature against `mu_t` on the torus, otherwise the
/// truncated Fock norm of the Taylor data (a lower bound, tail reported separately).
pub fn holomorphic_norm(f: &FourierCoefficients, t: f64) -> Result<(f64, f64)> {
    if torus_dim(f.group(), "holomorphic_norm").is_ok() {
        Ok((bargmann_norm_torus(&f.heat(t), t, TorusMeasure::Mu)?, 0.0))
    } else {
        let n = hermite_norm_adaptive(f, t, 1e-14 * (1.0 + f.l2_norm_sq()))?;
        Ok((n.value, n.tail))
    }
}

/// Sample points `x e^{iY}` with `x` Haar-distributed and `Y` standard normal.
pub fn bound_samples<R: Rng + ?Sized>(
    group: &CompactGroup,
    n: usize,
    rng: &mut R,
) -> Vec<ComplexGroupPoint> {
    (0..n)
        .map(|_| {
            let x = group.random_point(rng);
            let y: Vec<f64> = (0..group.dim())
                .map(|_| StandardNormal.sample(rng))
                .collect();
            group.from_polar(&x, &y)
        })
        .collect()
}

/// Distance of `g` from the identity in `K_C`: exact on torus factors; on
/// SU(2) factors the bounds `|Y| <= |g| <= d(e,x) + |Y|` from `g = x e^{iY}`.
/// Returns `(lower, upper)`.
pub fn distance_bounds(group: &CompactGroup, g: &ComplexGroupPoint) -> (f64, f64) {
    let (x, y) = g.polar();
    let mut lo2 = 0.0;
    let mut hi2 = 0.0;
    for (i, (fp, fac)) in x.0.iter().zip(group.factors()).enumerate() {
        let off = group.offsets()[i];
        let yf = &y[off..off + fac.dim()];
        let y2: f64 = yf.iter().map(|v| v * v).sum();
        match fp {
            FactorPoint::Torus(th) => {
                let e: f64 = th
                    .iter()
                    .map(|a| crate::group::wrap_angle(*a).powi(2))
                    .sum::<f64>()
                    + y2;
                lo2 += e;
                hi2 += e;
            }
            FactorPoint::Su2(m) => {
                lo2 += y2;
                hi2 += (crate::group::su2_distance(m) + y2.sqrt()).powi(2);
            }
        }
    }
    (lo2.sqrt(), hi2.sqrt())
}

/// Result of testing `|F(g)|^2 <= ||F||^2 e^{|g|^2/t}` on samples.
#[derive(Clone, Debug)]
pub struct PointwiseReport {
    pub samples: usize,
    pub norm_sq: f64,
    pub norm_tail: f64,
    /// Largest `|F(g)|^2 / (||F||^2 e^{D^2/t})` with `D` the distance (torus)
    /// or its upper bound (SU(2) factors).
    pub max_ratio: f64,
    pub violations: usize,
    pub witness: Option<ComplexGroupPoint>,
    /// The same ratio with `|Y|` in place of the distance; diagnostic only.
    pub surrogate_max_ratio: f64,
    pub surrogate_violations: usize,
    pub distance_exact: bool,
}

impl PointwiseReport {
    pub fn pass(&self) -> bool {
        self.violations == 0 && self.max_ratio.is_finite()
    }
}

pub fn pointwise_bound_check(
    f: &FourierCoefficients,
    t: f64,
    sample: &[ComplexGroupPoint],
) -> Result<PointwiseReport> {
    check_t(t)?;
    let group = f.group();
    let (norm_sq, norm_tail) = holomorphic_norm(f, t)?;
    let big_f = f.heat(t);
    let ln_norm = norm_sq.ln();
    let ratios: Vec<(f64, f64)> = sample
        .par_iter()
        .map(|g| {
            let v = big_f.eval_complex(g).norm_sqr();
            let (lo, hi) = distance_bounds(group, g);
            let base = v.ln() - ln_norm;
            ((base - hi * hi / t).exp(), (base - lo * lo / t).exp())
        })
        .collect();
    let slack = 1.0 + 1e-10;
    let mut rep = PointwiseReport {
        samples: sample.len(),
        norm_sq,
        norm_tail,
        max_ratio: 0.0,
        violations: 0,
        witness: None,
        surrogate_max_ratio: 0.0,
        surrogate_violations: 0,
        distance_exact: !group.factors().iter().any(|f| matches!(f, Factor::Su2)),
    };
    for (g, (r, s)) in sample.iter().zip(ratios) {
        if r > rep.max_ratio {
            rep.max_ratio = r;
        }
        if r > slack || r.is_nan() {
            rep.violations += 1;
            rep.witness.get_or_insert_with(|| g.clone());
        }
        rep.surrogate_max_ratio = rep.surrogate_max_ratio.max(s);
        if s > slack {
            rep.surrogate_violations += 1;
        }
    }
    Ok(rep)
}

/// `(1 + 2 sum_k e^{-pi^2 k^2/t})^d`, the supremum over unit vectors of
/// `|C_t f|^2 nu_t (2 pi)^{-d} (2 pi t)^d` on `(C^*)^d`.
pub fn phase_constant_oracle(d: usize, t: f64) -> f64 {
    let mut s = 1.0;
    let mut k = 1.0;
    loop {
        let term = 2.0 * (-PI * PI * k * k / t).exp();
        s += term;
        if term < 1e-300 || term < 1e-18 * s {
            break;
        }
        k += 1.0;
    }
    s.powi(d as i32)
}

/// Largest value over a `Y`-grid of the reproducing-kernel diagonal
/// `K(z,z) nu_t(Y) (2 pi)^{-d} (2 pi t)^d`, the sharp constant for the phase density.
pub fn phase_constant_measured(d: usize, t: f64, grid: usize) -> f64 {
    // The diagonal depends only on Y and is periodic with period t in each coordinate.
    let one = (0..grid.max(1))
        .map(|i| {
            let y = t * i as f64 / grid.max(1) as f64;
            kernel_diagonal_1d(t, y)
        })
        .fold(0.0, f64::max);
    one.powi(d as i32)
}

/// `sqrt(t/pi) sum_n e^{-(Y + t n)^2/t}`.
fn kernel_diagonal_1d(t: f64, y: f64) -> f64 {
    let center = (-y / t).round() as i64;
    let mut s = 0.0;
    let mut k = 0i64;
    loop {
        let mut added = 0.0;
        for n in if k == 0 {
            vec![center]
        } else {
            vec![center - k, center + k]
        } {
            let u = y + t * n as f64;
            added += (-u * u / t).exp();
        }
        s += added;
        if added < 1e-20 * s {
            break;
        }
        k += 1;
    }
    (t / PI).sqrt() * s
}

#[derive(Clone, Debug)]
pub struct PhaseReport {
    pub t: f64,
    pub d: usize,
    /// `int D`, which should be 1.
    pub integral: f64,
    /// Largest `D` on the `(theta, Y)` grid.
    pub sup_density: f64,
    /// `sup D (2 pi t)^d` for this `f`.
    pub f_constant: f64,
    /// Sharp constant measured from the reproducing kernel on a grid.
    pub measured_a: f64,
    pub oracle_a: f64,
    pub pass: bool,
}

/// Phase-space density `D = |C_t f|^2 nu_t (2 pi)^{-d}` for unit `f` on the torus.
pub fn phase_density_check_torus(
    f: &FourierCoefficients,
    t: f64,
    grid: usize,
) -> Result<PhaseReport> {
    check_t(t)?;
    let d = torus_dim(f.group(), "phase_density_check_torus")?;
    let norm = f.l2_norm_sq();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(HeatlabError::InvalidArgument(format!(
            "f must have unit L2 norm, got {norm}"
        )));
    }
    let big_f = f.heat(t);
    let integral = bargmann_norm_torus(&big_f, t, TorusMeasure::Nu)?;
    let band = f.band()[0] as f64;
    let y_max = t * band + 6.0 * t.sqrt();
    let g = grid.max(2);
    let axis: Vec<(f64, f64)> = (0..g)
        .flat_map(|i| {
            (0..g).map(move |j| {
                (
                    2.0 * PI * i as f64 / g as f64,
                    -y_max + 2.0 * y_max * j as f64 / (g - 1) as f64,
                )
            })
        })
        .collect();
    let total = axis.len().pow(d as u32);
    let sup_density = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut z = Vec::with_capacity(d);
            let mut y2 = 0.0;
            for _ in 0..d {
                let (th, y) = axis[idx % axis.len()];
                idx /= axis.len();
                z.push(C64::new(th, y));
                y2 += y * y;
            }
            let v = big_f.eval_complex(&ComplexGroupPoint::torus(z)).norm_sqr();
            v * (PI * t).powf(-(d as f64) / 2.0) * (-y2 / t).exp() / (2.0 * PI).powi(d as i32)
        })
        .reduce(|| 0.0, f64::max);
    let f_constant = sup_density * (2.0 * PI * t).powi(d as i32);
    let measured_a = phase_constant_measured(d, t, 4 * grid.max(1));
    let oracle_a = phase_constant_oracle(d, t);
    let pass = (integral - 1.0).abs() <= 1e-6
        && f_constant <= measured_a * (1.0 + 1e-9)
        && measured_a <= oracle_a * (1.0 + 1e-12);
    Ok(PhaseReport {
        t,
        d,
        integral,
        sup_density,
        f_constant,
        measured_a,
        oracle_a,
        pass,
    })
}

/// Measured sharp constants over a ladder of times, and whether they
/// decrease strictly toward 1 as `t` decreases.
pub fn phase_constant_ladder(d: usize, ts: &[f64], grid: usize) -> (Vec<f64>, bool) {
    let a: Vec<f64> = ts
        .iter()
        .map(|&t| phase_constant_measured(d, t, grid))
        .collect();
    let mut order: Vec<usize> = (0..ts.len()).collect();
    order.sort_by(|&i, &j| ts[j].partial_cmp(&ts[i]).unwrap());
    let ok = order.windows(2).all(|w| a[w[1]] < a[w[0]]) && a.iter().all(|v| *v >= 1.0 - 1e-12);
    (a, ok)
}

/// `t/2 sum X^2 = t/4 sum X^2 + t/4 sum (JX)^2 + t/4 sum (X^2 - (JX)^2)` on an
/// irrep, with `JX` acting as `i pi(X)`. Returns the largest entry of the difference.
pub fn laplacian_split_residual(ir: &Irrep, t: f64) -> f64 {
    let (a, b, c) = laplacian_parts(ir);
    let lhs = &a * C64::from(t / 2.0);
    let rhs = &a * C64::from(t / 4.0) + &b * C64::from(t / 4.0) + &c * C64::from(t / 4.0);
    (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn laplacian_parts(ir: &Irrep) -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>) {
    let n = ir.dim;
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    let mut c = DMatrix::zeros(n, n);
    for x in &ir.generators {
        let jx = x * C64::i();
        let x2 = x * x;
        let jx2 = &jx * &jx;
        a += &x2;
        c += &x2 - &jx2;
        b += jx2;
    }
    (a, b, c)
}

/// `exp(t/2 A)` against `exp(t/4 A) exp(t/4 B) exp(t/4 C)`, relative to `||exp(t/2 A)||`.
pub fn factored_heat_residual(ir: &Irrep, t: f64) -> f64 {
    let (a, b, c) = laplacian_parts(ir);
    let lhs = (&a * C64::from(t / 2.0)).exp();
    let rhs = (&a * C64::from(t / 4.0)).exp()
        * (&b * C64::from(t / 4.0)).exp()
        * (&c * C64::from(t / 4.0)).exp();
    (&lhs - rhs).norm() / lhs.norm()
}

/// `e^{t Delta/2}(conj(f) f)(e)` against the Fock norm of the Hermite data of `f`.
pub fn doubling_check(f: &FourierCoefficients, t: f64, rel_tol: f64) -> Result<Comparison> {
    check_t(t)?;
    let lhs = f.conj_product(f)?.heat_at_identity(t).re;
    let rhs = hermite_norm_adaptive(f, t, 1e-3 * rel_tol * (1e-300 + lhs.abs()))?;
    Ok(Comparison::new(lhs, rhs.value, rel_tol, rhs.tail))
}

/// Largest `|(d/dt) B_t f - Delta B_t f / 2|` on `points`, the time derivative
/// taken as a central difference with step `h`.
pub fn heat_equation_residual(
    f: &FourierCoefficients,
    t: f64,
    h: f64,
    points: &[crate::group::GroupPoint],
) -> Result<f64> {
    check_t(t)?;
    if !(h > 0.0 && h < t) {
        return Err(HeatlabError::InvalidArgument(
            "step must lie in (0, t)".into(),
        ));
    }
    let group = f.group();
    let plus = f.heat(t + h);
    let minus = f.heat(t - h);
    let now = f.heat(t);
    let lap = (0..group.dim()).fold(FourierCoefficients::zeros(group), |acc, k| {
        acc.add(&now.derivative_word(&[k, k]))
    });
    Ok(points
        .iter()
        .map(|x| ((plus.eval(x) - minus.eval(x)) / (2.0 * h) - lap.eval(x) * 0.5).norm())
        .fold(0.0, f64::max))
}

/// `B_t(X_k f)(g)` from generator matrices against a five-point difference of
/// `s -> B_t f(g e^{s X_k})`. Returns the largest relative difference.
pub fn intertwining_residual(
    f: &FourierCoefficients,
    t: f64,
    k: usize,
    points: &[ComplexGroupPoint],
) -> Result<f64> {
    check_t(t)?;
    let group = f.group();
    let big_f = f.heat(t);
    let lhs_f = f.derivative(k).heat(t);
    let h = 1e-3;
    let shifted = |g: &ComplexGroupPoint, s: f64| {
        let mut y = vec![C64::from(0.0); group.dim()];
        y[k] = C64::from(s);
        big_f.eval_complex(&g.mul(&group.exp_complex(&y)))
    };
    Ok(points
        .iter()
        .map(|g| {
            let lhs = lhs_f.eval_complex(g);
            let fd = (shifted(g, -2.0 * h) - shifted(g, -h) * 8.0 + shifted(g, h) * 8.0
                - shifted(g, 2.0 * h))
                / (12.0 * h);
            (lhs - fd).norm() / (1.0 + lhs.norm())
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::labels_within_band;
    use crate::group::{GroupPoint, IrrepLabel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cos_theta() -> FourierCoefficients {
        let g = CompactGroup::torus(1);
        FourierCoefficients::torus_mode(&g, &[1], C64::from(0.5))
            .unwrap()
            .add(&FourierCoefficients::torus_mode(&g, &[-1], C64::from(0.5)).unwrap())
    }

    #[test]
    fn transform_of_constants_and_entries() {
        let g = CompactGroup::su2();
        let pt = g.from_polar(
            &g.random_point(&mut ChaCha8Rng::seed_from_u64(1)),
            &[0.3, -0.2, 0.5],
        );
        let one = FourierCoefficients::constant(&g, C64::from(1.0));
        assert!((segal_bargmann_b(&one, 0.7, &pt).unwrap() - C64::from(1.0)).norm() < 1e-14);
        let e = FourierCoefficients::matrix_entry(&g, IrrepLabel::spin(2), 0, 1).unwrap();
        let ir = Irrep::spin(2);
        let expect = ir.eval_complex(&pt)[(0, 1)] * (-0.7 * ir.casimir / 2.0).exp();
        assert!((segal_bargmann_c(&e, 0.7, &pt).unwrap() - expect).norm() < 1e-13);
        assert!(segal_bargmann_b(&e, 0.0, &pt).is_err());
    }

    #[test]
    fn cosine_at_i_matches_convolution() {
        let f = cos_theta();
        let g = ComplexGroupPoint::torus(vec![C64::i()]);
        let direct = segal_bargmann_b(&f, 1.0, &g).unwrap();
        let expect = (-0.5f64).exp() * 1.0f64.cosh();
        assert!((direct - C64::from(expect)).norm() < 1e-14);
        let ex = convolution_exactness(&f, 1.0, 1.0).unwrap();
        let conv = segal_bargmann_by_convolution(&f, 1.0, &g, &ex).unwrap();
        assert!((conv - C64::from(expect)).norm() < 1e-8, "{conv}");
    }

    #[test]
    fn convolution_form_on_su2() {
        let g = CompactGroup::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = FourierCoefficients::random(&g, &labels_within_band(&g, &[2]), &mut rng);
        let t = 0.5;
        let ex = convolution_exactness(&f, t, 0.6).unwrap();
        for _ in 0..2 {
            let x = g.random_point(&mut rng);
            let pt = g.from_polar(&x, &[0.2, 0.3, -0.1]);
            let a = segal_bargmann_b(&f, t, &pt).unwrap();
            let b = segal_bargmann_by_convolution(&f, t, &pt, &ex).unwrap();
            assert!((a - b).norm() < 1e-8 * (1.0 + a.norm()), "{a} {b}");
        }
    }

    #[test]
    fn position_norms() {
        let g = CompactGroup::su2();
        let one = FourierCoefficients::constant(&g, C64::from(1.0));
        assert!((norm_in_position(&one, 0.4).unwrap() - 1.0).abs() < 1e-12);
        let torus = CompactGroup::torus(1);
        let e = FourierCoefficients::torus_mode(&torus, &[1], C64::from(1.0)).unwrap();
        assert!((norm_in_position(&e, 0.3).unwrap() - 1.0).abs() < 1e-12);
        // chi_{1/2}^2 = chi_0 + chi_1
        let chi = FourierCoefficients::character(&g, IrrepLabel::spin(1)).unwrap();
        let t = 0.5;
        let expect = 1.0 + 3.0 * (-t * 4.0 / 2.0f64).exp();
        assert!((norm_in_position(&chi, t).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn torus_gram_matches_closed_forms() {
        let t = 0.6;
        let mu = gram_1d(t, 3, TorusMeasure::Mu);
        let nu = gram_1d(t, 3, TorusMeasure::Nu);
        for i in 0..7 {
            for j in 0..7 {
                let (n, m) = (i as f64 - 3.0, j as f64 - 3.0);
                assert!(
                    (mu[(i, j)] - C64::from((t * n * m).exp())).norm()
                        < 1e-12 * (t * n * m).exp().max(1.0)
                );
                let e = if i == j { (t * n * n).exp() } else { 0.0 };
                assert!((nu[(i, j)] - C64::from(e)).norm() < 1e-12 * e.max(1.0));
            }
        }
    }

    #[test]
    fn torus_unitarity_both_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [1, 2] {
            let g = CompactGroup::torus(d);
            for t in [0.1, 1.0] {
                let f =
                    FourierCoefficients::random(&g, &labels_within_band(&g, &[2]), &mut rng);
                let big = f.heat(t);
                let b = bargmann_norm_torus(&big, t, TorusMeasure::Mu).unwrap();
                let p = norm_in_position(&f, t).unwrap();
                assert!((b - p).abs() < 1e-9 * p, "d={d} t={t}");
                let c = bargmann_norm_torus(&big, t, TorusMeasure::Nu).unwrap();
                let l = norm_in_l2(&f).unwrap();
                assert!((c - l).abs() < 1e-9 * l);
            }
        }
        let f = cos_theta();
        for m in [TorusMeasure::Mu, TorusMeasure::Nu] {
            let a = bargmann_norm_torus(&f.heat(1.0), 1.0, m).unwrap();
            let b = bargmann_norm_torus_direct(&f.heat(1.0), 1.0, m).unwrap();
            assert!((a - b).abs() < 1e-11 * a);
        }
        assert!(bargmann_norm_torus(
            &FourierCoefficients::constant(&CompactGroup::su2(), C64::from(1.0)),
            1.0,
            TorusMeasure::Mu
        )
        .is_err());
    }

    #[test]
    fn pointwise_bounds_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for name in ["torus:1", "su2", "torus:1,su2"] {
            let g = CompactGroup::parse(name).unwrap();
            let f = FourierCoefficients::random(
                &g,
                &labels_within_band(&g, &vec![1; g.factors().len()]),
                &mut rng,
            );
            let pts = bound_samples(&g, 300, &mut rng);
            let rep = pointwise_bound_check(&f, 0.5, &pts).unwrap();
            assert!(rep.pass(), "{name}: {}", rep.max_ratio);
            assert!(rep.max_ratio > 0.0);
        }
        let g = CompactGroup::su2();
        let one = FourierCoefficients::constant(&g, C64::from(1.0));
        let rep = pointwise_bound_check(&one, 1.0, &[g.identity().complexify()]).unwrap();
        assert!((rep.max_ratio - 1.0).abs() < 1e-12 && rep.pass());
    }

    #[test]
    fn phase_density_constant_function() {
        let g = CompactGroup::torus(1);
        let one = FourierCoefficients::constant(&g, C64::from(1.0));
        let t = 0.5;
        let rep = phase_density_check_torus(&one, t, 41).unwrap();
        assert!(rep.pass);
        assert!((rep.integral - 1.0).abs() < 1e-12);
        // D = nu_t(Y)/(2 pi); sup at Y = 0.
        let sup = (PI * t).powf(-0.5) / (2.0 * PI);
        assert!((rep.sup_density - sup).abs() < 1e-12);
        assert!((rep.measured_a - rep.oracle_a).abs() < 1e-12);
        let (a, ok) = phase_constant_ladder(1, &[1.0, 0.5, 0.1], 64);
        assert!(ok, "{a:?}");
        let not_unit = one.scale(C64::from(2.0));
        assert!(phase_density_check_torus(&not_unit, t, 8).is_err());
    }

    #[test]
    fn split_laplacian_identities() {
        for twice in 0..5 {
            let ir = Irrep::spin(twice);
            assert_eq!(laplacian_split_residual(&ir, 0.7), 0.0);
            assert!(factored_heat_residual(&ir, 0.7) < 1e-12);
        }
    }

    #[test]
    fn doubling_and_heat_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = CompactGroup::su2();
        let f = FourierCoefficients::random(&g, &labels_within_band(&g, &[2]), &mut rng);
        let c = doubling_check(&f, 0.5, 1e-8).unwrap();
        assert!(c.pass, "{c:?}");
        let pts: Vec<GroupPoint> = (0..5).map(|_| g.random_point(&mut rng)).collect();
        let r1 = heat_equation_residual(&f, 0.5, 1e-2, &pts).unwrap();
        let r2 = heat_equation_residual(&f, 0.5, 5e-3, &pts).unwrap();
        assert!(r1 < 1e-3 && r2 < r1 / 3.0, "{r1} {r2}");
    }

    #[test]
    fn derivative_commutes_with_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = CompactGroup::su2();
        let f = FourierCoefficients::random(&g, &labels_within_band(&g, &[2]), &mut rng);
        let pts = bound_samples(&g, 5, &mut rng);
        for k in 0..3 {
            assert!(intertwining_residual(&f, 0.5, k, &pts).unwrap() < 1e-9);
        }
    }
}
