//! Creation and annihilation operators in the position, Bargmann and Fock
//! realizations.
//!
//! Annihilation is differentiation along a left-invariant field (position,
//! Bargmann) or contraction of the last tensor slot (Fock). Creation is the
//! adjoint with respect to the realization's inner product.

use crate::check::Comparison;
use crate::error::{HeatlabError, Result};
use crate::fock::{taylor_map, FockSpace, TensorFunctional};
use crate::fourier::{exactness_for_band, FourierCoefficients};
use crate::group::{CompactGroup, GroupPoint, IrrepLabel};
use crate::heat::HeatKernel;
use crate::numeric::{gauss_hermite, C64};
use crate::quadrature::{haar_quadrature_with, QuadratureRule, DEFAULT_NODE_CAP};
use crate::transforms::{
    gram_1d, laurent, radial_moments, torus_dim, torus_rule_1d, TorusMeasure, RADIAL_NODES,
};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// Which space the operators act on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Realization {
    Position,
    Bargmann,
    Fock,
}

/// The value of `[a_X, a_X^*]` on the abelian Fock space with norm weights `t^n/n!`.
pub fn ccr_constant(t: f64) -> f64 {
    1.0 / t
}

/// `sum_w (X_w rho_t) u_w / rho_t`, where `X_w rho_t = X_{w_1}..X_{w_n} rho_t`.
/// A plain band-limited function is the single term with the empty word.
#[derive(Clone, Debug)]
pub struct PositionState {
    pub terms: Vec<(Vec<usize>, FourierCoefficients)>,
}

impl PositionState {
    pub fn plain(f: FourierCoefficients) -> Self {
        Self {
            terms: vec![(Vec::new(), f)],
        }
    }

    pub fn is_plain(&self) -> bool {
        self.terms.iter().all(|(w, _)| w.is_empty())
    }

    fn numerator(&self, h: &HeatKernel, x: &GroupPoint) -> C64 {
        self.terms
            .iter()
            .map(|(w, u)| u.eval(x) * h.derivative(w, x))
            .sum()
    }

    fn band(&self) -> Vec<usize> {
        let mut b = vec![
            0;
            self.terms
                .first()
                .map(|(_, u)| u.group().factors().len())
                .unwrap_or(0)
        ];
        for (_, u) in &self.terms {
            for (a, c) in b.iter_mut().zip(u.band()) {
                *a = (*a).max(c);
            }
        }
        b
    }
}

/// Operators on `L^2(K, rho_t)`.
#[derive(Clone, Debug)]
pub struct PositionRealization {
    group: CompactGroup,
    pub t: f64,
    kernel: HeatKernel,
    /// Extra per-factor band used for integrands containing `1/rho_t`.
    pub extra_band: usize,
    /// Nodes where the truncated kernel is below this are dropped from
    /// integrands containing `1/rho_t`; there the true integrand is
    /// `rho_t` times bounded log-derivatives, and the series is rounding noise.
    rho_floor: f64,
}

impl PositionRealization {
    pub fn new(group: &CompactGroup, t: f64) -> Result<Self> {
        let kernel = HeatKernel::new(group, t)?;
        let rho_floor = 1e-12 * kernel.rho(&group.identity());
        Ok(Self {
            group: group.clone(),
            t,
            kernel,
            extra_band: 24,
            rho_floor,
        })
    }

    pub fn kernel(&self) -> &HeatKernel {
        &self.kernel
    }

    /// `a_X f = X f`.
    pub fn annihilate(&self, k: usize, f: &FourierCoefficients) -> FourierCoefficients {
        f.derivative(k)
    }

    /// `a_X^* psi = -X psi - X(log rho_t) psi = -X(rho_t psi)/rho_t`.
    pub fn create(&self, k: usize, s: &PositionState) -> PositionState {
        let mut terms = Vec::with_capacity(2 * s.terms.len());
        for (w, u) in &s.terms {
            let mut xw = Vec::with_capacity(w.len() + 1);
            xw.push(k);
            xw.extend_from_slice(w);
            terms.push((xw, u.scale(C64::from(-1.0))));
            terms.push((w.clone(), u.derivative(k).scale(C64::from(-1.0))));
        }
        PositionState { terms }
    }

    pub fn eval(&self, s: &PositionState, x: &GroupPoint) -> Result<C64> {
        let rho = self.kernel.rho_checked(x)?;
        Ok(s.numerator(&self.kernel, x) / rho)
    }

    fn rule(&self, band: &[usize]) -> Result<QuadratureRule> {
        haar_quadrature_with(
            &self.group,
            &exactness_for_band(&self.group, band),
            DEFAULT_NODE_CAP,
        )
    }

    /// `<a, b>` in `L^2(rho_t)`, conjugate-linear in `a`. When one side is
    /// plain the integrand is band-limited and the rule is exact; otherwise
    /// it contains `1/rho_t` and a wider rule is used.
    pub fn inner(&self, a: &PositionState, b: &PositionState) -> Result<C64> {
        let hb = self.kernel.band();
        let (ba, bb) = (a.band(), b.band());
        let h = &self.kernel;
        if a.is_plain() || b.is_plain() {
            let (plain, other, conj_plain) = if a.is_plain() {
                (a, b, true)
            } else {
                (b, a, false)
            };
            let band: Vec<usize> = (0..hb.len()).map(|i| ba[i] + bb[i] + hb[i]).collect();
            let rule = self.rule(&band)?;
            let v = rule.integrate_c(|x| {
                let p: C64 = plain.terms.iter().map(|(_, u)| u.eval(x)).sum();
                let o = other.numerator(h, x);
                if conj_plain {
                    p.conj() * o
                } else {
                    o.conj() * p
                }
            });
            return Ok(v);
        }
        let band: Vec<usize> = (0..hb.len())
            .map(|i| ba[i] + bb[i] + 2 * hb[i] + self.extra_band)
            .collect();
        let rule = self.rule(&band)?;
        let v = rule.integrate_c(|x| {
            let rho = h.rho(x);
            if rho <= self.rho_floor {
                return C64::from(0.0);
            }
            a.numerator(h, x).conj() * b.numerator(h, x) / rho
        });
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(HeatlabError::Positivity { value: f64::NAN });
        }
        Ok(v)
    }

    /// `<a_X u, v>` against `<u, a_X^* v>` for band-limited `u`, `v`.
    pub fn adjointness(
        &self,
        k: usize,
        u: &FourierCoefficients,
        v: &FourierCoefficients,
        rel_tol: f64,
    ) -> Result<Comparison> {
        let lhs = self.inner(
            &PositionState::plain(self.annihilate(k, u)),
            &PositionState::plain(v.clone()),
        )?;
        let rhs = self.inner(
            &PositionState::plain(u.clone()),
            &self.create(k, &PositionState::plain(v.clone())),
        )?;
        let scale = self.norm(u)?.sqrt() * self.norm(v)?.sqrt() * (1.0 + self.group.dim() as f64);
        Ok(Comparison::complex(lhs, rhs, rel_tol, scale, 0.0))
    }

    fn norm(&self, f: &FourierCoefficients) -> Result<f64> {
        let p = PositionState::plain(f.clone());
        Ok(self.inner(&p, &p)?.re)
    }

    /// `||([a_j, a_k] - a_{[X_j, X_k]}) u|| / ||u||` in `L^2(rho_t)`.
    pub fn commutator_residual(&self, j: usize, k: usize, u: &FourierCoefficients) -> Result<f64> {
        let lhs = self
            .annihilate(j, &self.annihilate(k, u))
            .sub(&self.annihilate(k, &self.annihilate(j, u)));
        let br = self.group.bracket(j, k);
        let rhs = u.derivative_along(&br);
        let diff = lhs.sub(&rhs);
        let n = self.norm(u)?;
        Ok((self.norm(&diff)?.max(0.0) / n).sqrt())
    }

    /// `<v, [a_j, a_k^*] u>` computed weakly as
    /// `<a_j^* v, a_k^* u> - <a_k v, a_j u>`, against
    /// `<v, (-[X_j, X_k] - X_j X_k log rho_t) u>`.
    pub fn mixed_commutator_check(
        &self,
        j: usize,
        k: usize,
        u: &FourierCoefficients,
        v: &FourierCoefficients,
        rel_tol: f64,
    ) -> Result<Comparison> {
        let pu = PositionState::plain(u.clone());
        let pv = PositionState::plain(v.clone());
        let lhs = self.inner(&self.create(j, &pv), &self.create(k, &pu))?
            - self.inner(
                &PositionState::plain(self.annihilate(k, v)),
                &PositionState::plain(self.annihilate(j, u)),
            )?;
        let br = u.derivative_along(&self.group.bracket(j, k));
        let first = self.inner(&pv, &PositionState::plain(br))?;
        let h = &self.kernel;
        let hb = h.band();
        let band: Vec<usize> = (0..hb.len())
            .map(|i| u.band()[i] + v.band()[i] + 2 * hb[i] + self.extra_band)
            .collect();
        let rule = self.rule(&band)?;
        let second = rule.integrate_c(|x| {
            let rho = h.rho(x);
            if rho <= self.rho_floor {
                return C64::from(0.0);
            }
            let xy = h.derivative(&[j, k], x);
            let xr = h.derivative(&[j], x);
            let yr = h.derivative(&[k], x);
            v.eval(x).conj() * u.eval(x) * (xy - xr * yr / rho)
        });
        let rhs = -first - second;
        let scale = self.norm(u)?.sqrt() * self.norm(v)?.sqrt() * (1.0 + 1.0 / self.t);
        Ok(Comparison::complex(lhs, rhs, rel_tol, scale, 0.0))
    }
}

/// `p'(theta)` for the wrapped Gaussian of variance `s`.
fn wrapped_gaussian_derivative(s: f64, theta: f64) -> f64 {
    let mut v = 0.0;
    let mut n = 1usize;
    loop {
        let c = (-s * (n * n) as f64 / 2.0).exp();
        v -= 2.0 * c * n as f64 * (n as f64 * theta).sin();
        if c < 1e-18 {
            break;
        }
        n += 1;
    }
    v / (2.0 * PI)
}

/// Operators on the holomorphic space `HL^2((C^*)^d, mu_t)`, states given by
/// Laurent data. Creation is `P_t(phi_X F)` with
/// `phi_X = -p'(theta)/(2 p(theta)) + i Y/t`, where `p` is the angular
/// factor of `mu_t`; the projection is computed by a Galerkin solve on a
/// finite set of Laurent modes.
#[derive(Clone, Debug)]
pub struct BargmannRealization {
    group: CompactGroup,
    pub t: f64,
    d: usize,
}

impl BargmannRealization {
    pub fn new(group: &CompactGroup, t: f64) -> Result<Self> {
        let d = torus_dim(group, "bargmann realization")?;
        if !(t > 0.0) {
            return Err(HeatlabError::InvalidArgument(format!(
                "t must be positive, got {t}"
            )));
        }
        Ok(Self {
            group: group.clone(),
            t,
            d,
        })
    }

    pub fn annihilate(&self, k: usize, big_f: &FourierCoefficients) -> FourierCoefficients {
        big_f.derivative(k)
    }

    /// One-variable matrix `int conj(e^{inz}) phi(z) e^{imz} d mu_t` by quadrature.
    fn phi_1d(&self, band: usize) -> DMatrix<C64> {
        let t = self.t;
        let (theta, _) = torus_rule_1d(t, band, TorusMeasure::Mu);
        let nodes = gauss_hermite(RADIAL_NODES);
        let m = theta.len() as f64;
        let b = band as i64;
        let size = 2 * band + 1;
        DMatrix::from_fn(size, size, |i, j| {
            let (n, mm) = (i as i64 - b, j as i64 - b);
            // Angular weight p(theta) absorbs the division in p'/p.
            let ang_p: C64 = theta
                .iter()
                .map(|(th, w)| C64::from_polar(*w, (mm - n) as f64 * th))
                .sum();
            let ang_dp: C64 = theta
                .iter()
                .map(|(th, _)| {
                    C64::from_polar(
                        2.0 * PI / m * wrapped_gaussian_derivative(t / 2.0, *th),
                        (mm - n) as f64 * th,
                    )
                })
                .sum();
            let (rad, rad_y) = radial_moments(t, n + mm, &nodes);
            ang_dp * (-0.5 * rad) + ang_p * C64::new(0.0, rad_y / t)
        })
    }

    fn modes(&self, band: usize) -> Vec<Vec<i64>> {
        let b = band as i64;
        let side = 2 * band + 1;
        (0..side.pow(self.d as u32))
            .map(|mut idx| {
                let mut n = vec![0i64; self.d];
                for slot in n.iter_mut().rev() {
                    *slot = (idx % side) as i64 - b;
                    idx /= side;
                }
                n
            })
            .collect()
    }

    /// `<e^{inz}, A e^{imz}>` for a product of one-variable matrices, with
    /// `phi` placed in coordinate `k` if given.
    fn pair(
        &self,
        gram: &DMatrix<C64>,
        phi: Option<(usize, &DMatrix<C64>)>,
        band: usize,
        n: &[i64],
        m: &[i64],
    ) -> C64 {
        let b = band as i64;
        let mut v = C64::from(1.0);
        for c in 0..self.d {
            let (i, j) = ((n[c] + b) as usize, (m[c] + b) as usize);
            v *= match phi {
                Some((k, p)) if k == c => p[(i, j)],
                _ => gram[(i, j)],
            };
        }
        v
    }

    fn coeffs(&self, f: &FourierCoefficients) -> Vec<(Vec<i64>, C64)> {
        laurent(f)
    }

    /// `<G, F>_{mu_t}` by quadrature.
    pub fn inner(&self, g: &FourierCoefficients, f: &FourierCoefficients) -> C64 {
        let band = g.band()[0].max(f.band()[0]);
        let gram = gram_1d(self.t, band, TorusMeasure::Mu);
        let (gc, fc) = (self.coeffs(g), self.coeffs(f));
        let mut s = C64::from(0.0);
        for (n, a) in &gc {
            for (m, c) in &fc {
                s += a.conj() * c * self.pair(&gram, None, band, n, m);
            }
        }
        s
    }

    /// `<G, phi_k F>_{mu_t}` by quadrature.
    pub fn inner_phi(&self, k: usize, g: &FourierCoefficients, f: &FourierCoefficients) -> C64 {
        let band = g.band()[0].max(f.band()[0]);
        let gram = gram_1d(self.t, band, TorusMeasure::Mu);
        let phi = self.phi_1d(band);
        let (gc, fc) = (self.coeffs(g), self.coeffs(f));
        let mut s = C64::from(0.0);
        for (n, a) in &gc {
            for (m, c) in &fc {
                s += a.conj() * c * self.pair(&gram, Some((k, &phi)), band, n, m);
            }
        }
        s
    }

    /// `P(phi_k F)` projected onto Laurent modes with `|n|_inf <= band_out`.
    pub fn create(
        &self,
        k: usize,
        big_f: &FourierCoefficients,
        band_out: usize,
    ) -> Result<FourierCoefficients> {
        let band = band_out.max(big_f.band()[0]);
        let gram = gram_1d(self.t, band, TorusMeasure::Mu);
        let phi = self.phi_1d(band);
        let modes = self.modes(band_out);
        let fc = self.coeffs(big_f);
        let t = self.t;
        let scale = |n: &[i64]| (-t * n.iter().map(|v| (v * v) as f64).sum::<f64>() / 2.0).exp();
        // Basis e^{-t|n|^2/2} e^{inz} keeps the Gram matrix well conditioned.
        let g = DMatrix::from_fn(modes.len(), modes.len(), |i, j| {
            self.pair(&gram, None, band, &modes[i], &modes[j]) * scale(&modes[i]) * scale(&modes[j])
        });
        let rhs = DVector::from_fn(modes.len(), |i, _| {
            fc.iter()
                .map(|(m, c)| c * self.pair(&gram, Some((k, &phi)), band, &modes[i], m))
                .sum::<C64>()
                * scale(&modes[i])
        });
        let sol = g
            .cholesky()
            .ok_or_else(|| HeatlabError::Invariant("Gram matrix is not positive definite".into()))?
            .solve(&rhs);
        let mut out = FourierCoefficients::zeros(&self.group);
        for (n, a) in modes.iter().zip(sol.iter()) {
            out.add_block(
                IrrepLabel::torus(n.clone()),
                DMatrix::from_element(1, 1, a * scale(n)),
            )?;
        }
        Ok(out)
    }

    /// `<a_X G, F>` against `<G, phi_X F>`, the integration by parts behind `a_X^*`.
    pub fn adjointness(
        &self,
        k: usize,
        g: &FourierCoefficients,
        f: &FourierCoefficients,
        rel_tol: f64,
    ) -> Comparison {
        let lhs = self.inner(&self.annihilate(k, g), f);
        let rhs = self.inner_phi(k, g, f);
        let scale =
            self.inner(g, g).re.sqrt() * self.inner(f, f).re.sqrt() * (1.0 + g.band()[0] as f64);
        Comparison::complex(lhs, rhs, rel_tol, scale, 0.0)
    }
}

/// Operators on the truncated Fock space.
#[derive(Clone, Debug)]
pub struct FockRealization {
    pub space: FockSpace,
}

impl FockRealization {
    pub fn new(group: &CompactGroup, t: f64, n_max: usize) -> Result<Self> {
        Ok(Self {
            space: FockSpace::new(group, t, n_max)?,
        })
    }

    pub fn group(&self) -> &CompactGroup {
        self.space.group()
    }

    pub fn annihilate(&self, k: usize, xi: &TensorFunctional) -> TensorFunctional {
        xi.annihilate(k)
    }

    pub fn create(&self, k: usize, eta: &TensorFunctional) -> Result<TensorFunctional> {
        self.space.create(k, eta)
    }

    /// `<a_X u, v>` against `<u, a_X^* v>`; `u` on level `m`, `v` on level `m - 1`.
    pub fn adjointness(
        &self,
        k: usize,
        u: &TensorFunctional,
        v: &TensorFunctional,
        rel_tol: f64,
    ) -> Result<Comparison> {
        let lhs = self.annihilate(k, u).inner(v);
        let rhs = u.inner(&self.create(k, v)?);
        let scale = u.fock_norm().value.sqrt()
            * v.fock_norm().value.sqrt()
            * (1.0 + 1.0 / self.space.t.sqrt());
        Ok(Comparison::complex(lhs, rhs, rel_tol, scale, 0.0))
    }

    /// `||([a_j, a_k] - a_{[X_j,X_k]}) xi|| / ||xi||` over the degrees both sides reach.
    pub fn commutator_residual(&self, j: usize, k: usize, xi: &TensorFunctional) -> f64 {
        let lhs = xi
            .annihilate(k)
            .annihilate(j)
            .sub(&xi.annihilate(j).annihilate(k));
        let mut rhs = TensorFunctional::zeros(self.group(), xi.t, lhs.n_max());
        for (l, c) in self.group().bracket(j, k).into_iter().enumerate() {
            if c != 0.0 {
                rhs = rhs.add(&xi.annihilate(l).truncate(lhs.n_max()).scale(C64::from(c)));
            }
        }
        residual_ratio(&lhs.sub(&rhs), xi)
    }

    /// `||([a_j^*, a_k^*] + a^*_{[X_j,X_k]} E^*) eta|| / ||eta||`, where `E^*` is
    /// the adjoint of restriction from level `m - 1` to `m - 2`.
    pub fn creation_commutator_residual(
        &self,
        j: usize,
        k: usize,
        eta: &TensorFunctional,
    ) -> Result<f64> {
        let jk = self.create(j, &self.create(k, eta)?)?;
        let kj = self.create(k, &self.create(j, eta)?)?;
        let ext = self.space.extend(eta)?;
        let mut rhs = TensorFunctional::zeros(self.group(), eta.t, jk.n_max());
        for (l, c) in self.group().bracket(j, k).into_iter().enumerate() {
            if c != 0.0 {
                rhs = rhs.add(&self.create(l, &ext)?.scale(C64::from(-c)));
            }
        }
        Ok(residual_ratio(&jk.sub(&kj).sub(&rhs), eta))
    }

    /// `||([a_j, a_k^*] - kappa delta_jk) eta|| / ||eta||` on the abelian Fock space.
    pub fn ccr_residual(
        &self,
        j: usize,
        k: usize,
        eta: &TensorFunctional,
        kappa: f64,
    ) -> Result<f64> {
        if !self.group().is_abelian() {
            return Err(HeatlabError::Unsupported {
                op: "ccr_check_abelian",
                group: self.group().name(),
                reason: "canonical commutation relations hold only for abelian groups".into(),
            });
        }
        let first = self.annihilate(j, &self.create(k, eta)?);
        let second = if eta.n_max() == 0 {
            TensorFunctional::zeros(self.group(), eta.t, 0)
        } else {
            self.create(k, &self.annihilate(j, eta))?
        };
        let expect = if j == k {
            eta.scale(C64::from(kappa))
        } else {
            TensorFunctional::zeros(self.group(), eta.t, eta.n_max())
        };
        Ok(residual_ratio(&first.sub(&second).sub(&expect), eta))
    }

    /// Resolution of identity over creation chains on the vacuum, against `<u, v>`.
    /// The tail is `sqrt(tail_u tail_v)` from the stored bounds.
    pub fn resolution_check(
        &self,
        u: &TensorFunctional,
        v: &TensorFunctional,
        rel_tol: f64,
    ) -> Comparison {
        let lhs = u.inner(v);
        let rhs = self.space.resolution_sum(u, v);
        let top = self.space.n_max.min(u.n_max()).min(v.n_max());
        let beyond = u.n_max().min(v.n_max()) > top;
        let mut tail = (u.tail_bound * v.tail_bound).sqrt();
        if beyond {
            tail += (u.fock_norm().value - u.truncate(top).fock_norm().value)
                .max(0.0)
                .sqrt()
                * (v.fock_norm().value - v.truncate(top).fock_norm().value)
                    .max(0.0)
                    .sqrt();
        }
        let scale = u.fock_norm().value.sqrt() * v.fock_norm().value.sqrt();
        Comparison::complex(lhs, rhs, rel_tol, scale, tail)
    }

    pub fn vacuum_nullity(&self, m: usize) -> usize {
        self.space.vacuum_nullity(m)
    }
}

fn residual_ratio(diff: &TensorFunctional, reference: &TensorFunctional) -> f64 {
    let n = reference.fock_norm().value;
    if n == 0.0 {
        diff.fock_norm().value.sqrt()
    } else {
        (diff.fock_norm().value / n).sqrt()
    }
}

/// `max |taylor_map(X_k f) - a_k taylor_map(f)|` over `k`, plus the vacuum check.
pub fn intertwining_residual(f: &FourierCoefficients, t: f64, n_max: usize) -> Result<f64> {
    if n_max == 0 {
        return Err(HeatlabError::InvalidArgument(
            "need at least degree 1".into(),
        ));
    }
    let xi = taylor_map(f, t, n_max)?;
    let mut worst: f64 = 0.0;
    for k in 0..f.group().dim() {
        let lhs = taylor_map(&f.derivative(k), t, n_max - 1)?;
        worst = worst.max(lhs.max_abs_diff(&xi.annihilate(k)));
    }
    let vac = taylor_map(
        &FourierCoefficients::constant(f.group(), C64::from(1.0)),
        t,
        n_max,
    )?;
    worst = worst.max(vac.max_abs_diff(&TensorFunctional::vacuum(f.group(), t, n_max)));
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::labels_within_band;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_f(g: &CompactGroup, band: usize, seed: u64) -> FourierCoefficients {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FourierCoefficients::random(
            g,
            &labels_within_band(g, &vec![band; g.factors().len()]),
            &mut rng,
        )
    }

    #[test]
    fn position_annihilation_of_a_character() {
        let g = CompactGroup::torus(1);
        let p = PositionRealization::new(&g, 0.5).unwrap();
        let e = FourierCoefficients::torus_mode(&g, &[1], C64::from(1.0)).unwrap();
        let de = p.annihilate(0, &e);
        assert!(de.max_abs_diff(&e.scale(C64::i())) < 1e-15);
        let one = FourierCoefficients::constant(&g, C64::from(1.0));
        assert!(p.annihilate(0, &one).l2_norm_sq() < 1e-30);
    }

    #[test]
    fn position_creation_on_constant_is_log_derivative() {
        let g = CompactGroup::torus(1);
        let p = PositionRealization::new(&g, 0.5).unwrap();
        let one = PositionState::plain(FourierCoefficients::constant(&g, C64::from(1.0)));
        let c = p.create(0, &one);
        let h = p.kernel();
        for th in [0.3, 1.1, -2.0] {
            let x = GroupPoint::torus(vec![th]);
            let expect = -h.derivative(&[0], &x) / h.rho(&x);
            assert!((p.eval(&c, &x).unwrap() - C64::from(expect)).norm() < 1e-12);
            let mirrored = p.eval(&c, &GroupPoint::torus(vec![-th])).unwrap();
            assert!((mirrored + C64::from(expect)).norm() < 1e-12);
        }
        let e = FourierCoefficients::torus_mode(&g, &[1], C64::from(1.0)).unwrap();
        let cmp = p
            .adjointness(
                0,
                &e,
                &FourierCoefficients::constant(&g, C64::from(1.0)),
                1e-10,
            )
            .unwrap();
        assert!(cmp.pass, "{cmp:?}");
    }

    #[test]
    fn position_adjointness_and_commutators() {
        for name in ["torus:2", "su2"] {
            let g = CompactGroup::parse(name).unwrap();
            let p = PositionRealization::new(&g, 0.5).unwrap();
            let u = random_f(&g, 1, 1);
            let v = random_f(&g, 1, 2);
            for k in 0..g.dim() {
                let c = p.adjointness(k, &u, &v, 1e-10).unwrap();
                assert!(c.pass, "{name} {k}: {c:?}");
            }
            assert!(p.commutator_residual(0, 1, &u).unwrap() < 1e-12);
            let m = p.mixed_commutator_check(0, 1, &u, &v, 1e-7).unwrap();
            assert!(m.pass, "{name}: {m:?}");
            let m = p.mixed_commutator_check(1, 1, &u, &v, 1e-7).unwrap();
            assert!(m.pass, "{name}: {m:?}");
        }
    }

    #[test]
    fn bargmann_adjointness() {
        let g = CompactGroup::torus(1);
        let b = BargmannRealization::new(&g, 0.7).unwrap();
        for seed in 0..4 {
            let gg = random_f(&g, 2, seed).heat(0.7);
            let ff = random_f(&g, 3, seed + 10).heat(0.7);
            let c = b.adjointness(0, &gg, &ff, 1e-9);
            assert!(c.pass, "{c:?}");
        }
        let g2 = CompactGroup::torus(2);
        let b2 = BargmannRealization::new(&g2, 0.5).unwrap();
        let c = b2.adjointness(
            1,
            &random_f(&g2, 1, 3).heat(0.5),
            &random_f(&g2, 2, 4).heat(0.5),
            1e-9,
        );
        assert!(c.pass, "{c:?}");
        assert!(BargmannRealization::new(&CompactGroup::su2(), 1.0).is_err());
    }

    #[test]
    fn bargmann_creation_is_galerkin_adjoint() {
        let g = CompactGroup::torus(1);
        let t = 0.6;
        let b = BargmannRealization::new(&g, t).unwrap();
        let f = random_f(&g, 2, 7).heat(t);
        let cf = b.create(0, &f, 4).unwrap();
        for seed in 0..3 {
            let gg = random_f(&g, 4, 20 + seed).heat(t);
            let lhs = b.inner(&b.annihilate(0, &gg), &f);
            let rhs = b.inner(&gg, &cf);
            assert!(
                (lhs - rhs).norm() < 1e-8 * (1.0 + lhs.norm()),
                "{lhs} {rhs}"
            );
        }
    }

    #[test]
    fn fock_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = CompactGroup::su2();
        let fr = FockRealization::new(&g, 0.6, 4).unwrap();
        let vac = TensorFunctional::vacuum(&g, 0.6, 3);
        for k in 0..3 {
            assert!(fr.annihilate(k, &vac).fock_norm().value == 0.0);
        }
        let mut only_one = TensorFunctional::zeros(&g, 0.6, 1);
        let mut comps = only_one.components().to_vec();
        comps[1][2] = C64::new(0.5, -1.0);
        only_one = TensorFunctional::new(&g, 0.6, comps).unwrap();
        let a = fr.annihilate(2, &only_one);
        assert_eq!(a.n_max(), 0);
        assert_eq!(a.get(&[]), C64::new(0.5, -1.0));

        for m in 1..=4 {
            let u = fr.space.random_state(m, &mut rng);
            let v = fr.space.random_state(m - 1, &mut rng);
            for k in 0..3 {
                assert!(fr.adjointness(k, &u, &v, 1e-10).unwrap().pass);
            }
        }
        let xi = fr.space.random_state(4, &mut rng);
        assert!(fr.commutator_residual(0, 1, &xi) < 1e-12);
        assert!(fr.commutator_residual(2, 0, &xi) < 1e-12);
        let eta = fr.space.random_state(2, &mut rng);
        assert!(fr.creation_commutator_residual(0, 1, &eta).unwrap() < 1e-10);
        assert!(fr.ccr_residual(0, 0, &eta, ccr_constant(0.6)).is_err());
        for m in 0..=4 {
            assert_eq!(fr.vacuum_nullity(m), 1);
        }
    }

    #[test]
    fn abelian_ccr_constant_is_inverse_t() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = CompactGroup::torus(2);
        for t in [0.5, 1.0, 2.0] {
            let fr = FockRealization::new(&g, t, 5).unwrap();
            for m in 0..=4 {
                let eta = fr.space.random_state(m, &mut rng);
                assert!(fr.ccr_residual(0, 0, &eta, ccr_constant(t)).unwrap() < 1e-10);
                assert!(fr.ccr_residual(0, 1, &eta, ccr_constant(t)).unwrap() < 1e-10);
                if (t - 1.0f64).abs() > 0.1 {
                    assert!(fr.ccr_residual(0, 0, &eta, t).unwrap() > 1e-3);
                }
            }
        }
    }

    #[test]
    fn resolution_of_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g = CompactGroup::su2();
        let fr = FockRealization::new(&g, 0.5, 4).unwrap();
        let vac = TensorFunctional::vacuum(&g, 0.5, 4);
        let c = fr.resolution_check(&vac, &vac, 1e-12);
        assert!(c.pass && (c.lhs - 1.0).abs() < 1e-15);
        for _ in 0..3 {
            let u = fr.space.random_state(2, &mut rng);
            let v = fr.space.random_state(2, &mut rng);
            let c = fr.resolution_check(&u, &v, 1e-10);
            assert!(c.pass, "{c:?}");
        }
        // Single excitation on the circle has norm 1/t.
        let g1 = CompactGroup::torus(1);
        let t = 0.4;
        let fr1 = FockRealization::new(&g1, t, 4).unwrap();
        let one = fr1.create(0, &TensorFunctional::vacuum(&g1, t, 0)).unwrap();
        let c = fr1.resolution_check(&one, &one, 1e-12);
        assert!(c.pass && (c.lhs - 1.0 / t).abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn resolution_with_taylor_states() {
        let g = CompactGroup::su2();
        let t = 0.1;
        let fr = FockRealization::new(&g, t, 8).unwrap();
        let f = random_f(&g, 1, 14);
        let h = random_f(&g, 2, 15);
        let u = taylor_map(&f, t, 8).unwrap();
        let v = taylor_map(&h, t, 8).unwrap();
        let p = PositionRealization::new(&g, t).unwrap();
        let lhs = p
            .inner(
                &PositionState::plain(f.clone()),
                &PositionState::plain(h.clone()),
            )
            .unwrap();
        let rhs = fr.space.resolution_sum(&u, &v);
        let tail = (u.tail_bound * v.tail_bound).sqrt();
        assert!(tail < 1e-8);
        assert!((lhs - rhs).norm() <= 1e-9 + tail, "{lhs} {rhs} {tail}");
    }

    #[test]
    fn taylor_map_intertwines() {
        for (name, seed) in [("su2", 1u64), ("torus:1", 2), ("torus:1,su2", 3)] {
            let g = CompactGroup::parse(name).unwrap();
            let f = random_f(&g, 2, seed);
            assert!(intertwining_residual(&f, 0.5, 4).unwrap() < 1e-12, "{name}");
        }
    }
}
