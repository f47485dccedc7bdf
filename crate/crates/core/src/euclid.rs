//! Exact Gaussian analysis on `R^d` with rational polynomial coefficients:
//! heat operators, the Segal-Bargmann transform, Hermite polynomials and
//! Gaussian moments.
//!
//! `rho_t` is the centered Gaussian with covariance `t I` and `mu_t` on `C^d`
//! has density `(pi t)^{-d} e^{-|z|^2/t}`.

use crate::check::Comparison;
use crate::error::{HeatlabError, Result};
use crate::numeric::{gauss_hermite, gauss_laguerre, C64};
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

pub type Q = Ratio<i128>;

/// A polynomial in `d` real (or, after continuation, complex) variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    d: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl Poly {
    pub fn zero(d: usize) -> Self {
        Self {
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(d: usize, c: Q) -> Self {
        Self::zero(d).plus_term(vec![0; d], c)
    }

    pub fn monomial(exponents: &[u32]) -> Self {
        Self::zero(exponents.len()).plus_term(exponents.to_vec(), Q::one())
    }

    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = (Vec<u32>, Q)>) -> Result<Self> {
        let mut p = Self::zero(d);
        for (e, c) in terms {
            if e.len() != d {
                return Err(HeatlabError::InvalidArgument(format!(
                    "exponent {e:?} has wrong length for d = {d}"
                )));
            }
            p = p.plus_term(e, c);
        }
        Ok(p)
    }

    fn plus_term(mut self, e: Vec<u32>, c: Q) -> Self {
        if c.is_zero() {
            return self;
        }
        let entry = self.terms.entry(e).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Q> {
        &self.terms
    }

    pub fn coefficient(&self, e: &[u32]) -> Q {
        self.terms.get(e).copied().unwrap_or_else(Q::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        other
            .terms
            .iter()
            .fold(self.clone(), |p, (e, c)| p.plus_term(e.clone(), *c))
    }

    pub fn scale(&self, s: Q) -> Poly {
        self.terms.iter().fold(Poly::zero(self.d), |p, (e, c)| {
            p.plus_term(e.clone(), *c * s)
        })
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.d);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out = out.plus_term(e, *ca * *cb);
            }
        }
        out
    }

    pub fn partial(&self, k: usize) -> Poly {
        let mut out = Poly::zero(self.d);
        for (e, c) in &self.terms {
            if e[k] > 0 {
                let mut f = e.clone();
                f[k] -= 1;
                out = out.plus_term(f, *c * Q::from(e[k] as i128));
            }
        }
        out
    }

    pub fn laplacian(&self) -> Poly {
        (0..self.d).fold(Poly::zero(self.d), |acc, k| {
            acc.add(&self.partial(k).partial(k))
        })
    }

    /// `e^{s Delta / 2} f`; the series terminates.
    pub fn heat(&self, s: Q) -> Poly {
        let mut out = self.clone();
        let mut term = self.clone();
        let mut k = 1i128;
        loop {
            term = term.laplacian().scale(s / Q::from(2 * k));
            if term.is_zero() {
                return out;
            }
            out = out.add(&term);
            k += 1;
        }
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: C64 = e.iter().zip(z).map(|(&n, &zi)| zi.powu(n)).product();
                m * to_f64(*c)
            })
            .sum()
    }

    pub fn eval_real(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                to_f64(*c)
                    * e.iter()
                        .zip(x)
                        .map(|(&n, &xi)| xi.powi(n as i32))
                        .product::<f64>()
            })
            .sum()
    }
}

pub fn to_f64(q: Q) -> f64 {
    q.numer().to_f64().unwrap() / q.denom().to_f64().unwrap()
}

/// Parses `"1/10"`, `"0.5"` or `"2"` as an exact rational.
pub fn parse_rational(s: &str) -> Result<Q> {
    let bad = || HeatlabError::InvalidArgument(format!("not a rational number: {s}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((i, f)) = s.split_once('.') {
        let den = 10i128.checked_pow(f.len() as u32).ok_or_else(bad)?;
        let sign = if i.trim_start().starts_with('-') {
            -1
        } else {
            1
        };
        let ip: i128 = if i.is_empty() || i == "-" {
            0
        } else {
            i.parse().map_err(|_| bad())?
        };
        let fp: i128 = if f.is_empty() {
            0
        } else {
            f.parse().map_err(|_| bad())?
        };
        return Ok(Q::new(ip * den + sign * fp, den));
    }
    Ok(Q::from(s.trim().parse::<i128>().map_err(|_| bad())?))
}

/// `B_t f` as a polynomial in `z`.
pub fn bt_euclid_poly(f: &Poly, t: Q) -> Poly {
    f.heat(t)
}

/// `(B_t f)(z)`.
pub fn bt_euclid(f: &Poly, t: Q, z: &[C64]) -> C64 {
    bt_euclid_poly(f, t).eval(z)
}

/// `H_n = e^{-t Delta/2} x^n`.
pub fn hermite_euclid(n: &[u32], t: Q) -> Poly {
    Poly::monomial(n).heat(-t)
}

fn double_factorial_odd(k: u32) -> i128 {
    (1..=k as i128).map(|j| 2 * j - 1).product()
}

fn factorial(n: u32) -> i128 {
    (1..=n as i128).product()
}

/// `int p rho_t dx`, exact.
pub fn gaussian_expectation(p: &Poly, t: Q) -> Q {
    p.terms
        .iter()
        .filter(|(e, _)| e.iter().all(|n| n % 2 == 0))
        .map(|(e, c)| {
            e.iter().fold(*c, |acc, &n| {
                acc * Q::from(double_factorial_odd(n / 2)) * t.pow((n / 2) as i32)
            })
        })
        .sum()
}

/// `<f, g>_{L^2(rho_t)}` for real polynomials.
pub fn gaussian_inner(f: &Poly, g: &Poly, t: Q) -> Q {
    gaussian_expectation(&f.mul(g), t)
}

/// `||F||^2` in the Fock norm, `sum_n t^n/n! sum_{|w| = n} |d^w F(0)|^2`; for
/// commuting variables this is `sum_b t^{|b|} b! |c_b|^2`.
pub fn fock_norm_sq(big_f: &Poly, t: Q) -> Q {
    big_f
        .terms
        .iter()
        .map(|(e, c)| {
            let n: u32 = e.iter().sum();
            let bang: i128 = e.iter().map(|&k| factorial(k)).product();
            *c * *c * t.pow(n as i32) * Q::from(bang)
        })
        .sum()
}

/// `int |z^n|^2 d mu_t` in one variable, exactly `t^n n!`.
pub fn monomial_norm_exact(n: u32, t: Q) -> Q {
    t.pow(n as i32) * Q::from(factorial(n))
}

/// Closed form against two quadratures: radial Gauss-Laguerre and a tensor
/// Gauss-Hermite rule over `(Re z, Im z)`.
pub fn monomial_norm_check(n: u32, t: Q, rel_tol: f64) -> (Comparison, Comparison) {
    let exact = to_f64(monomial_norm_exact(n, t));
    let tf = to_f64(t);
    let m = (n as usize + 2).max(8);
    let radial: f64 = gauss_laguerre(m)
        .iter()
        .map(|(s, w)| w * (tf * s).powi(n as i32))
        .sum();
    let gh = gauss_hermite(n as usize + 4);
    let mut planar = 0.0;
    for (x, wx) in &gh {
        for (y, wy) in &gh {
            planar += wx * wy * (tf * (x * x + y * y)).powi(n as i32);
        }
    }
    planar /= std::f64::consts::PI;
    (
        Comparison::new(radial, exact, rel_tol, 0.0),
        Comparison::new(planar, exact, rel_tol, 0.0),
    )
}

/// `<H_m, H_n>_{L^2(rho_t)}` by Gauss-Hermite quadrature, `d = 1`.
pub fn hermite_inner_quadrature(m: u32, n: u32, t: Q) -> f64 {
    let (hm, hn) = (hermite_euclid(&[m], t), hermite_euclid(&[n], t));
    let s = (2.0 * to_f64(t)).sqrt();
    gauss_hermite(((m + n) / 2 + 2) as usize)
        .iter()
        .map(|(x, w)| w * hm.eval_real(&[s * x]) * hn.eval_real(&[s * x]))
        .sum::<f64>()
        / std::f64::consts::PI.sqrt()
}

/// `[a, a*]` on `z^n` in the Fock space of `mu_t`, where `a = d/dz` and `a*` is its
/// adjoint `z/t`. Returns the constant `<z^n, [a, a*] z^n> / <z^n, z^n>`.
pub fn ccr_constant_euclid(n: u32, t: Q) -> Q {
    // a a* z^n = (n+1) z^n / t, a* a z^n = n z^n / t
    let aa_star = Q::from((n + 1) as i128) / t;
    let a_star_a = Q::from(n as i128) / t;
    aa_star - a_star_a
}

/// All multi-indices in `d` variables of total degree at most `n`.
pub fn multi_indices(d: usize, n: u32) -> Vec<Vec<u32>> {
    if d == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for k in 0..=n {
        for mut rest in multi_indices(d - 1, n - k) {
            rest.insert(0, k);
            out.push(rest);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i128, d: i128) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn transform_of_low_monomials() {
        let t = q(3, 7);
        assert_eq!(
            bt_euclid_poly(&Poly::constant(1, Q::one()), t),
            Poly::constant(1, Q::one())
        );
        let x2 = bt_euclid_poly(&Poly::monomial(&[2]), t);
        assert_eq!(x2, Poly::monomial(&[2]).add(&Poly::constant(1, t)));
        let x3 = bt_euclid_poly(&Poly::monomial(&[3]), t);
        assert_eq!(
            x3,
            Poly::monomial(&[3]).add(&Poly::monomial(&[1]).scale(t * Q::from(3)))
        );
        let z = [C64::new(0.3, -1.2)];
        let v = bt_euclid(&Poly::monomial(&[3]), t, &z);
        let want = z[0].powu(3) + z[0] * 3.0 * to_f64(t);
        assert!((v - want).norm() < 1e-14);
    }

    #[test]
    fn hermite_low_orders() {
        let t = q(1, 2);
        assert_eq!(hermite_euclid(&[1], t), Poly::monomial(&[1]));
        assert_eq!(
            hermite_euclid(&[2], t),
            Poly::monomial(&[2]).add(&Poly::constant(1, -t))
        );
        for n in 0..7 {
            assert_eq!(
                bt_euclid_poly(&hermite_euclid(&[n], t), t),
                Poly::monomial(&[n])
            );
        }
        assert_eq!(
            bt_euclid_poly(&hermite_euclid(&[2, 3], t), t),
            Poly::monomial(&[2, 3])
        );
    }

    #[test]
    fn hermite_orthogonality_exact_and_quadrature() {
        for t in [q(1, 10), q(1, 2), Q::one()] {
            for m in 0..7 {
                for n in 0..7 {
                    let exact =
                        gaussian_inner(&hermite_euclid(&[m], t), &hermite_euclid(&[n], t), t);
                    let want = if m == n {
                        monomial_norm_exact(n, t)
                    } else {
                        Q::zero()
                    };
                    assert_eq!(exact, want);
                    let quad = hermite_inner_quadrature(m, n, t);
                    assert!(
                        (quad - to_f64(want)).abs()
                            <= 1e-10 * to_f64(monomial_norm_exact(m.max(n), t)).max(1.0)
                    );
                }
            }
        }
    }

    #[test]
    fn monomial_norms() {
        let t = q(3, 10);
        assert_eq!(monomial_norm_exact(0, t), Q::one());
        assert_eq!(monomial_norm_exact(1, t), t);
        assert_eq!(monomial_norm_exact(2, t), t * t * Q::from(2));
        for n in 0..10 {
            let (a, b) = monomial_norm_check(n, t, 1e-10);
            assert!(a.pass && b.pass, "{n} {a:?} {b:?}");
        }
    }

    #[test]
    fn transform_is_unitary_on_polynomials() {
        let t = q(2, 5);
        let mut seed = 17i128;
        for d in [1usize, 2] {
            for deg in 0..=6 {
                let mut f = Poly::zero(d);
                for e in multi_indices(d, deg) {
                    seed = (seed * 1103515245 + 12345) % 2147483648;
                    f = f
                        .add(&Poly::from_terms(d, [(e, q(seed % 21 - 10, 1 + seed % 7))]).unwrap());
                }
                assert_eq!(
                    gaussian_inner(&f, &f, t),
                    fock_norm_sq(&bt_euclid_poly(&f, t), t),
                    "d={d} deg={deg}"
                );
            }
        }
    }

    #[test]
    fn ccr_is_inverse_time() {
        for n in 0..5 {
            assert_eq!(ccr_constant_euclid(n, q(1, 4)), Q::from(4));
        }
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/10").unwrap(), q(1, 10));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), q(-3, 2));
        assert_eq!(parse_rational("3").unwrap(), Q::from(3));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }
}
