//! Heat kernels on K and their analytic continuation, the heat operator on
//! Fourier data, and the explicit torus measures `mu_t` and `nu_t`.
//!
//! Haar measure has unit mass, so `rho_t = sum_l d_l e^{-t c_l/2} chi_l`.
//! Against the angle measure `d theta` on a circle the density is
//! `rho_t / (2 pi)`.

use crate::error::{HeatlabError, Result};
use crate::fourier::FourierCoefficients;
use crate::group::{
    CompactGroup, ComplexFactorPoint, ComplexGroupPoint, Factor, FactorLabel, FactorPoint,
    GroupPoint, Irrep, IrrepLabel,
};
use crate::numeric::{chebyshev_u, C64};
use nalgebra::Matrix2;
use std::f64::consts::PI;

/// Default relative truncation tolerance for the character series.
pub const DEFAULT_HEAT_TOL: f64 = 1e-16;

/// Largest number of terms the adaptive complex series may use per circle
/// or SU(2) factor.
pub const COMPLEX_TERM_CAP: usize = 20_000;

/// Truncation of the heat kernel on one circle or one SU(2) factor.
#[derive(Clone, Debug)]
struct Piece {
    kind: PieceKind,
    /// Largest `|n|` (circle) or twice-spin (SU(2)) kept.
    cutoff: usize,
    /// `sum_kept d^2 e^{-t c/2}`, a bound for the truncated sum on K.
    mass: f64,
    /// Bound for the discarded terms on K.
    tail: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum PieceKind {
    Circle,
    Su2,
}

fn circle_term(t: f64, n: usize) -> f64 {
    (-t * (n * n) as f64 / 2.0).exp()
}

fn su2_term(t: f64, n: usize) -> f64 {
    // d^2 e^{-t c/2} with d = n+1, c = n(n+2)/2
    let d = (n + 1) as f64;
    d * d * (-t * (n * (n + 2)) as f64 / 4.0).exp()
}

/// Tail of `sum_{|n| > N} e^{-t n^2/2}`.
fn circle_tail(t: f64, n: usize) -> f64 {
    let q = (-t * (2 * n + 3) as f64 / 2.0).exp();
    2.0 * circle_term(t, n + 1) / (1.0 - q)
}

/// Tail of `sum_{m > N} (m+1)^2 e^{-t m(m+2)/4}`; the term ratio decreases in m.
fn su2_tail(t: f64, n: usize) -> f64 {
    let m = n + 1;
    let r = ((m + 2) as f64 / (m + 1) as f64).powi(2) * (-t * (2 * m + 3) as f64 / 4.0).exp();
    if r >= 1.0 {
        return f64::INFINITY;
    }
    su2_term(t, m) / (1.0 - r)
}

impl Piece {
    fn new(kind: PieceKind, t: f64, tol: f64) -> Self {
        let mut cutoff = 0;
        let mut mass = match kind {
            PieceKind::Circle => 1.0,
            PieceKind::Su2 => 1.0,
        };
        loop {
            let tail = match kind {
                PieceKind::Circle => circle_tail(t, cutoff),
                PieceKind::Su2 => su2_tail(t, cutoff),
            };
            if tail <= tol * mass {
                return Self {
                    kind,
                    cutoff,
                    mass,
                    tail,
                };
            }
            cutoff += 1;
            mass += match kind {
                PieceKind::Circle => 2.0 * circle_term(t, cutoff),
                PieceKind::Su2 => su2_term(t, cutoff),
            };
        }
    }

    fn coefficient(&self, t: f64, n: usize) -> f64 {
        match self.kind {
            PieceKind::Circle => circle_term(t, n),
            PieceKind::Su2 => (n + 1) as f64 * (-t * (n * (n + 2)) as f64 / 4.0).exp(),
        }
    }
}

/// The heat kernel `rho_t` of a group, truncated with a rigorous tail bound.
#[derive(Clone, Debug)]
pub struct HeatKernel {
    pub group: CompactGroup,
    pub t: f64,
    /// Largest Casimir value kept in the character series.
    pub term_cutoff: f64,
    /// Bound on `|rho_t(x) - truncated(x)|` for every x in K.
    pub tail_bound: f64,
    pieces: Vec<Piece>,
}

impl HeatKernel {
    pub fn new(group: &CompactGroup, t: f64) -> Result<Self> {
        Self::with_tolerance(group, t, DEFAULT_HEAT_TOL)
    }

    /// Truncates each circle / SU(2) factor so that its discarded mass is at
    /// most `tol` times its kept mass.
    pub fn with_tolerance(group: &CompactGroup, t: f64, tol: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(HeatlabError::InvalidArgument(format!(
                "heat kernel time must be positive, got {t}"
            )));
        }
        if !(tol > 0.0) {
            return Err(HeatlabError::InvalidArgument(
                "tolerance must be positive".into(),
            ));
        }
        let mut pieces = Vec::new();
        for f in group.factors() {
            match f {
                Factor::Torus(d) => {
                    for _ in 0..*d {
                        pieces.push(Piece::new(PieceKind::Circle, t, tol));
                    }
                }
                Factor::Su2 => pieces.push(Piece::new(PieceKind::Su2, t, tol)),
            }
        }
        Ok(Self::from_pieces(group, t, pieces))
    }

    /// A deliberately coarse truncation keeping circle frequencies / twice-spins
    /// up to `cutoff` in every piece.
    pub fn with_cutoff(group: &CompactGroup, t: f64, cutoff: usize) -> Result<Self> {
        if !(t > 0.0) {
            return Err(HeatlabError::InvalidArgument(format!(
                "heat kernel time must be positive, got {t}"
            )));
        }
        let mut pieces = Vec::new();
        let build = |kind: PieceKind| {
            let mut mass = 1.0;
            for n in 1..=cutoff {
                mass += match kind {
                    PieceKind::Circle => 2.0 * circle_term(t, n),
                    PieceKind::Su2 => su2_term(t, n),
                };
            }
            let tail = match kind {
                PieceKind::Circle => circle_tail(t, cutoff),
                PieceKind::Su2 => su2_tail(t, cutoff),
            };
            Piece {
                kind,
                cutoff,
                mass,
                tail,
            }
        };
        for f in group.factors() {
            match f {
                Factor::Torus(d) => {
                    for _ in 0..*d {
                        pieces.push(build(PieceKind::Circle));
                    }
                }
                Factor::Su2 => pieces.push(build(PieceKind::Su2)),
            }
        }
        Ok(Self::from_pieces(group, t, pieces))
    }

    fn from_pieces(group: &CompactGroup, t: f64, pieces: Vec<Piece>) -> Self {
        let with_tail: f64 = pieces.iter().map(|p| p.mass + p.tail).product();
        let kept: f64 = pieces.iter().map(|p| p.mass).product();
        let term_cutoff = pieces
            .iter()
            .map(|p| match p.kind {
                PieceKind::Circle => (p.cutoff * p.cutoff) as f64,
                PieceKind::Su2 => (p.cutoff * (p.cutoff + 2)) as f64 / 2.0,
            })
            .sum();
        Self {
            group: group.clone(),
            t,
            term_cutoff,
            tail_bound: with_tail - kept,
            pieces,
        }
    }

    /// Per-factor band of the truncated kernel, in the units of
    /// [`FourierCoefficients::band`].
    pub fn band(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut i = 0;
        for f in self.group.factors() {
            match f {
                Factor::Torus(d) => {
                    out.push(
                        self.pieces[i..i + d]
                            .iter()
                            .map(|p| p.cutoff)
                            .max()
                            .unwrap_or(0),
                    );
                    i += d;
                }
                Factor::Su2 => {
                    out.push(self.pieces[i].cutoff);
                    i += 1;
                }
            }
        }
        out
    }

    /// Truncated kernel value; the true value is within `tail_bound`.
    pub fn rho(&self, x: &GroupPoint) -> f64 {
        self.derivative(&[], x)
    }

    /// Truncated kernel value, erroring if it is not positive.
    pub fn rho_checked(&self, x: &GroupPoint) -> Result<f64> {
        let v = self.rho(x);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(HeatlabError::Positivity { value: v })
        }
    }

    /// `(X_{w_1} ... X_{w_n} rho)(x)` for the truncated kernel.
    pub fn derivative(&self, word: &[usize], x: &GroupPoint) -> f64 {
        let mut out = 1.0;
        let mut piece = 0;
        for (fi, (f, p)) in self.group.factors().iter().zip(&x.0).enumerate() {
            let off = self.group.offsets()[fi];
            match (f, p) {
                (Factor::Torus(d), FactorPoint::Torus(th)) => {
                    for k in 0..*d {
                        let m = word.iter().filter(|&&w| w == off + k).count();
                        out *= self.circle_derivative(&self.pieces[piece], m, th[k]);
                        piece += 1;
                    }
                }
                (Factor::Su2, FactorPoint::Su2(g)) => {
                    let local: Vec<usize> = word
                        .iter()
                        .filter(|&&w| w >= off && w < off + 3)
                        .map(|&w| w - off)
                        .collect();
                    out *= self.su2_derivative(&self.pieces[piece], &local, g);
                    piece += 1;
                }
                _ => panic!("point does not belong to the kernel's group"),
            }
            if out == 0.0 {
                return 0.0;
            }
        }
        out
    }

    fn circle_derivative(&self, p: &Piece, m: usize, theta: f64) -> f64 {
        // sum_n e^{-t n^2/2} (in)^m e^{in theta}, real by symmetry n -> -n.
        let mut s = if m == 0 { 1.0 } else { 0.0 };
        for n in 1..=p.cutoff {
            let c = p.coefficient(self.t, n);
            let nf = n as f64;
            let phase = nf * theta + m as f64 * PI / 2.0;
            s += 2.0 * c * nf.powi(m as i32) * phase.cos();
        }
        s
    }

    fn su2_derivative(&self, p: &Piece, word: &[usize], g: &Matrix2<C64>) -> f64 {
        let tau = g.trace().re / 2.0;
        let m = word.len();
        // F^{(r)}(tau) for r = 0..=m with F = sum_n coef_n U_n.
        let derivs = chebyshev_u_derivatives(p.cutoff, tau, m);
        let mut fr = vec![0.0; m + 1];
        for n in 0..=p.cutoff {
            let c = p.coefficient(self.t, n);
            for r in 0..=m {
                fr[r] += c * derivs[r][n];
            }
        }
        if m == 0 {
            return fr[0];
        }
        let basis = crate::group::su2_basis();
        let mut total = 0.0;
        for_each_set_partition(m, &mut |blocks: &[Vec<usize>]| {
            let mut prod = fr[blocks.len()];
            for b in blocks {
                let mut a = *g;
                for &i in b {
                    a *= basis[word[i]];
                }
                prod *= a.trace().re / 2.0;
            }
            total += prod;
        });
        total
    }

    /// Fourier coefficients of the truncated kernel: `e^{-t c/2} I` per irrep.
    pub fn fourier(&self) -> FourierCoefficients {
        let labels = crate::fourier::labels_within_band(&self.group, &self.band());
        let mut f = FourierCoefficients::zeros(&self.group);
        for l in labels {
            if !self.keeps(&l) {
                continue;
            }
            let ir = Irrep::new(&self.group, l).expect("label matches group");
            let m = nalgebra::DMatrix::identity(ir.dim, ir.dim)
                * C64::from((-self.t * ir.casimir / 2.0).exp());
            f.add_irrep_block(ir, m);
        }
        f
    }

    fn keeps(&self, l: &IrrepLabel) -> bool {
        let mut piece = 0;
        for fl in &l.0 {
            match fl {
                FactorLabel::Torus(n) => {
                    for v in n {
                        if v.unsigned_abs() as usize > self.pieces[piece].cutoff {
                            return false;
                        }
                        piece += 1;
                    }
                }
                FactorLabel::Su2(tw) => {
                    if *tw as usize > self.pieces[piece].cutoff {
                        return false;
                    }
                    piece += 1;
                }
            }
        }
        true
    }

    /// Analytic continuation to `K_C`, summed adaptively until the remaining
    /// terms are below `tol` relative to the absolute series. Returns the value
    /// and a bound on the discarded terms.
    pub fn rho_complex_with_tail(&self, g: &ComplexGroupPoint, tol: f64) -> Result<(C64, f64)> {
        let mut value = C64::from(1.0);
        let mut abs_sum = 1.0;
        let mut abs_with_tail = 1.0;
        for (f, p) in self.group.factors().iter().zip(&g.0) {
            match (f, p) {
                (Factor::Torus(_), ComplexFactorPoint::Torus(z)) => {
                    for zk in z {
                        let (v, a, e) = circle_complex(self.t, *zk, tol)?;
                        value *= v;
                        abs_sum *= a;
                        abs_with_tail *= a + e;
                    }
                }
                (Factor::Su2, ComplexFactorPoint::Su2(m)) => {
                    let (v, a, e) = su2_complex(self.t, m, tol)?;
                    value *= v;
                    abs_sum *= a;
                    abs_with_tail *= a + e;
                }
                _ => panic!("point does not belong to the kernel's group"),
            }
        }
        Ok((value, abs_with_tail - abs_sum))
    }
}

/// Adaptive `sum_n e^{-t n^2/2} e^{i n z}`: (value, abs-series bound, tail).
fn circle_complex(t: f64, z: C64, tol: f64) -> Result<(C64, f64, f64)> {
    let y = z.im.abs();
    let log_b = |n: usize| -t * (n * n) as f64 / 2.0 + n as f64 * y;
    let peak = (y / t).ceil() as usize;
    let mut value = C64::from(1.0);
    let mut abs = 1.0;
    let mut n = 1;
    loop {
        if n > COMPLEX_TERM_CAP {
            return Err(HeatlabError::SeriesDivergence {
                cap: COMPLEX_TERM_CAP,
            });
        }
        let c = circle_term(t, n);
        let e1 = (C64::i() * z * n as f64).exp();
        let e2 = (-C64::i() * z * n as f64).exp();
        value += (e1 + e2) * c;
        abs += 2.0 * log_b(n).exp();
        if n >= peak {
            let r = (log_b(n + 1) - log_b(n)).exp();
            if r < 1.0 {
                let tail = 2.0 * log_b(n + 1).exp() / (1.0 - r);
                if tail <= tol * abs {
                    return Ok((value, abs, tail));
                }
            }
        }
        n += 1;
    }
}

/// Adaptive `sum_n (n+1) e^{-t n(n+2)/4} U_n(tr g / 2)`.
fn su2_complex(t: f64, g: &Matrix2<C64>, tol: f64) -> Result<(C64, f64, f64)> {
    let tr = g.trace();
    // Eigenvalues lam, 1/lam of g; |U_n| <= (n+1) r^n with r = max(|lam|, 1/|lam|).
    let disc = (tr * tr - 4.0).sqrt();
    let lam = (tr + disc) / 2.0;
    let r = lam.norm().max(1.0 / lam.norm()).max(1.0);
    let log_r = r.ln();
    let log_b =
        |n: usize| 2.0 * ((n + 1) as f64).ln() - t * (n * (n + 2)) as f64 / 4.0 + n as f64 * log_r;
    let tau = tr / 2.0;
    let mut u_prev = C64::from(0.0);
    let mut u = C64::from(1.0);
    let mut value = C64::from(1.0);
    let mut abs = 1.0;
    let mut n = 0;
    loop {
        n += 1;
        if n > COMPLEX_TERM_CAP {
            return Err(HeatlabError::SeriesDivergence {
                cap: COMPLEX_TERM_CAP,
            });
        }
        let next = tau * 2.0 * u - u_prev;
        u_prev = u;
        u = next;
        let c = (n + 1) as f64 * (-t * (n * (n + 2)) as f64 / 4.0).exp();
        value += u * c;
        abs += log_b(n).exp();
        let ratio = (log_b(n + 1) - log_b(n)).exp();
        if ratio < 1.0 && log_b(n + 1) < log_b(n) {
            let tail = log_b(n + 1).exp() / (1.0 - ratio);
            if tail <= tol * abs {
                return Ok((value, abs, tail));
            }
        }
    }
}

/// `U_n^{(r)}(tau)` for `n <= nmax`, `r <= rmax`, indexed `[r][n]`.
fn chebyshev_u_derivatives(nmax: usize, tau: f64, rmax: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; nmax + 1]; rmax + 1];
    for (n, v) in chebyshev_u(nmax, C64::from(tau)).into_iter().enumerate() {
        out[0][n] = v.re;
    }
    for r in 1..=rmax {
        for n in 1..=nmax {
            let prev2 = if n >= 2 { out[r][n - 2] } else { 0.0 };
            out[r][n] = 2.0 * tau * out[r][n - 1] + 2.0 * r as f64 * out[r - 1][n - 1] - prev2;
        }
    }
    out
}

/// Calls `f` with every set partition of `0..m` (blocks in increasing order).
fn for_each_set_partition(m: usize, f: &mut dyn FnMut(&[Vec<usize>])) {
    fn rec(i: usize, m: usize, blocks: &mut Vec<Vec<usize>>, f: &mut dyn FnMut(&[Vec<usize>])) {
        if i == m {
            f(blocks);
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            rec(i + 1, m, blocks, f);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        rec(i + 1, m, blocks, f);
        blocks.pop();
    }
    let mut blocks = Vec::new();
    rec(0, m, &mut blocks, f);
}

/// `rho_t(x)` for the truncated kernel `h`, with positivity enforced.
pub fn rho_t(h: &HeatKernel, x: &GroupPoint) -> Result<f64> {
    h.rho_checked(x)
}

/// Analytic continuation of `rho_t` to `K_C`.
pub fn rho_t_complex(h: &HeatKernel, g: &ComplexGroupPoint) -> Result<C64> {
    Ok(h.rho_complex_with_tail(g, 1e-16)?.0)
}

/// `e^{t Delta/2}` on Fourier data; negative `t` gives the inverse operator.
pub fn heat_operator(f: &FourierCoefficients, t: f64) -> FourierCoefficients {
    f.heat(t)
}

fn require_torus(group: &CompactGroup, op: &'static str) -> Result<usize> {
    match group.factors() {
        [Factor::Torus(d)] => Ok(*d),
        _ => Err(HeatlabError::Unsupported {
            op,
            group: group.name(),
            reason: "closed forms for the complexified measures exist only on the torus".into(),
        }),
    }
}

/// `nu_t(Y) = (pi t)^{-d/2} e^{-|Y|^2/t}` on `R^d`.
pub fn nu_t_torus(d: usize, t: f64, y: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(HeatlabError::InvalidArgument(format!(
            "t must be positive, got {t}"
        )));
    }
    if y.len() != d {
        return Err(HeatlabError::InvalidArgument(
            "Y has wrong dimension".into(),
        ));
    }
    let r2: f64 = y.iter().map(|v| v * v).sum();
    Ok((PI * t).powf(-(d as f64) / 2.0) * (-r2 / t).exp())
}

/// `nu_t` for a group, rejecting anything that is not a torus.
pub fn nu_t(group: &CompactGroup, t: f64, y: &[f64]) -> Result<f64> {
    let d = require_torus(group, "nu_t")?;
    nu_t_torus(d, t, y)
}

/// Periodized Gaussian of variance `s` on the circle, as a density for `d theta`.
pub fn wrapped_gaussian(s: f64, theta: f64) -> f64 {
    let mut v = 1.0;
    let mut n = 1usize;
    loop {
        let c = (-s * (n * n) as f64 / 2.0).exp();
        v += 2.0 * c * (n as f64 * theta).cos();
        if c < 1e-18 {
            break;
        }
        n += 1;
    }
    v / (2.0 * PI)
}

/// `mu_t(theta + iY)` on `(C^*)^d`, a density for `d theta dY`: a periodized
/// Gaussian of variance `t/2` in each angle times `nu_t(Y)`.
pub fn mu_t_torus(d: usize, t: f64, z: &[C64]) -> Result<f64> {
    if z.len() != d {
        return Err(HeatlabError::InvalidArgument(
            "z has wrong dimension".into(),
        ));
    }
    let y: Vec<f64> = z.iter().map(|v| v.im).collect();
    let ang: f64 = z.iter().map(|v| wrapped_gaussian(t / 2.0, v.re)).product();
    Ok(ang * nu_t_torus(d, t, &y)?)
}

pub fn mu_t(group: &CompactGroup, t: f64, z: &[C64]) -> Result<f64> {
    let d = require_torus(group, "mu_t")?;
    mu_t_torus(d, t, z)
}

/// CSV rows `coords..., value, tail_bound` for kernel values at the given points.
pub fn kernel_csv(h: &HeatKernel, points: &[GroupPoint]) -> String {
    let mut header: Vec<String> = Vec::new();
    for (fi, f) in h.group.factors().iter().enumerate() {
        match f {
            Factor::Torus(d) => (0..*d).for_each(|k| header.push(format!("f{fi}_theta{k}"))),
            Factor::Su2 => ["re_a", "im_a", "re_b", "im_b"]
                .iter()
                .for_each(|s| header.push(format!("f{fi}_{s}"))),
        }
    }
    header.push("value".into());
    header.push("tail_bound".into());
    let mut out = header.join(",");
    out.push('\n');
    for x in points {
        let mut row: Vec<String> = Vec::new();
        for p in &x.0 {
            match p {
                FactorPoint::Torus(th) => th.iter().for_each(|v| row.push(format!("{v:.17e}"))),
                FactorPoint::Su2(m) => {
                    for v in [m[(0, 0)].re, m[(0, 0)].im, m[(0, 1)].re, m[(0, 1)].im] {
                        row.push(format!("{v:.17e}"));
                    }
                }
            }
        }
        row.push(format!("{:.17e}", h.rho(x)));
        row.push(format!("{:.3e}", h.tail_bound));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{exactness_for_band, labels_within_band};
    use crate::quadrature::{haar_quadrature, haar_quadrature_with, DEFAULT_NODE_CAP};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn circle_value_at_zero_matches_direct_sum() {
        let g = CompactGroup::torus(1);
        let h = HeatKernel::new(&g, 1.0).unwrap();
        let direct: f64 = (-200i64..=200).map(|n| (-(n * n) as f64 / 2.0).exp()).sum();
        let v = h.rho(&g.identity());
        assert!((v - direct).abs() < 1e-14 * direct);
        assert!(h.tail_bound < 1e-15 * direct);
    }

    #[test]
    fn matches_jacobi_theta_via_poisson_summation() {
        // sum_n e^{-t n^2/2} e^{i n theta} = sqrt(2 pi/t) sum_k e^{-(theta + 2 pi k)^2/(2t)}
        let g = CompactGroup::torus(1);
        for t in [0.1, 0.5, 2.0] {
            let h = HeatKernel::new(&g, t).unwrap();
            for theta in [0.0, 0.3, 1.7, 3.1] {
                let poisson: f64 = (-50i64..=50)
                    .map(|k| (-(theta + 2.0 * PI * k as f64).powi(2) / (2.0 * t)).exp())
                    .sum::<f64>()
                    * (2.0 * PI / t).sqrt();
                let v = h.rho(&GroupPoint::torus(vec![theta]));
                assert!(
                    (v - poisson).abs() < 1e-12 * poisson.max(1.0),
                    "t={t} theta={theta}"
                );
            }
        }
    }

    #[test]
    fn su2_peak_at_identity_and_symmetric() {
        let g = CompactGroup::su2();
        let h = HeatKernel::new(&g, 0.5).unwrap();
        let e = h.rho(&g.identity());
        let minus = h.rho(&GroupPoint::su2(-Matrix2::identity()));
        assert!(e > minus && minus > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let x = g.random_point(&mut rng);
            assert!((h.rho(&x) - h.rho(&x.inverse())).abs() < 1e-10 * h.rho(&x).max(1.0));
        }
    }

    #[test]
    fn kernel_integrates_to_one() {
        for (name, t) in [("torus:1", 0.3), ("su2", 0.5), ("torus:1,su2", 1.0)] {
            let g = CompactGroup::parse(name).unwrap();
            let h = HeatKernel::new(&g, t).unwrap();
            let ex = exactness_for_band(&g, &h.band());
            let rule = haar_quadrature_with(&g, &ex, DEFAULT_NODE_CAP).unwrap();
            let v = rule.integrate(|x| h.rho(x));
            assert!((v - 1.0).abs() < 1e-12 + h.tail_bound, "{name}: {v}");
        }
    }

    #[test]
    fn complex_restriction_and_conjugation() {
        let g = CompactGroup::torus(1);
        let h = HeatKernel::new(&g, 0.8).unwrap();
        let x = GroupPoint::torus(vec![1.1]);
        let r = rho_t_complex(&h, &x.complexify()).unwrap();
        assert!((r.re - h.rho(&x)).abs() < 1e-10 && r.im.abs() < 1e-12);
        let z = ComplexGroupPoint::torus(vec![C64::new(0.4, 1.3)]);
        let a = rho_t_complex(&h, &z).unwrap();
        let b = rho_t_complex(&h, &z.conj()).unwrap();
        assert!((a.conj() - b).norm() < 1e-12 * a.norm());
        // z = iy: sum_n e^{-t n^2/2} e^{-n y}
        let y = 2.0;
        let direct: f64 = (-300i64..=300)
            .map(|n| (-0.8 * (n * n) as f64 / 2.0 - n as f64 * y).exp())
            .sum();
        let v = rho_t_complex(&h, &ComplexGroupPoint::torus(vec![C64::new(0.0, y)])).unwrap();
        assert!((v.re - direct).abs() < 1e-12 * direct && v.im.abs() < 1e-12 * direct);
    }

    #[test]
    fn su2_complex_restricts_to_real() {
        let g = CompactGroup::su2();
        let h = HeatKernel::new(&g, 0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..5 {
            let x = g.random_point(&mut rng);
            let v = rho_t_complex(&h, &x.complexify()).unwrap();
            assert!((v.re - h.rho(&x)).abs() < 1e-10 * h.rho(&x).max(1.0));
        }
        let far = g.from_polar(&g.identity(), &[0.0, 0.0, 400.0]);
        assert!(matches!(
            h.rho_complex_with_tail(&far, 1e-16),
            Ok(_) | Err(HeatlabError::SeriesDivergence { .. })
        ));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for name in ["su2", "torus:2"] {
            let g = CompactGroup::parse(name).unwrap();
            let h = HeatKernel::new(&g, 0.7).unwrap();
            let x = g.random_point(&mut rng);
            let eps = 1e-4;
            for word in [vec![0usize], vec![1, 0], vec![0, 1, 1]] {
                let k = word[0];
                let rest = &word[1..];
                let mut y = vec![0.0; g.dim()];
                y[k] = eps;
                let p = h.derivative(rest, &x.mul(&g.exp_map(&y)));
                y[k] = -eps;
                let m = h.derivative(rest, &x.mul(&g.exp_map(&y)));
                let fd = (p - m) / (2.0 * eps);
                let exact = h.derivative(&word, &x);
                assert!(
                    (fd - exact).abs() < 1e-6 * (1.0 + exact.abs()),
                    "{name} {word:?}: {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn derivatives_match_fourier_route() {
        let g = CompactGroup::su2();
        let h = HeatKernel::new(&g, 1.0).unwrap();
        let f = h.fourier();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = g.random_point(&mut rng);
        for word in [vec![], vec![2], vec![0, 1], vec![2, 0, 2, 1]] {
            let a = h.derivative(&word, &x);
            let b = f.derivative_word(&word).eval(&x);
            assert!(
                (a - b.re).abs() < 1e-10 * (1.0 + a.abs()) && b.im.abs() < 1e-10 * (1.0 + a.abs())
            );
        }
    }

    #[test]
    fn heat_pairing_identity() {
        let g = CompactGroup::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let phi = FourierCoefficients::random(&g, &labels_within_band(&g, &[3]), &mut rng);
        let h = HeatKernel::new(&g, 0.6).unwrap();
        let mut band = h.band();
        band[0] += 3;
        let rule =
            haar_quadrature_with(&g, &exactness_for_band(&g, &band), DEFAULT_NODE_CAP).unwrap();
        let lhs = rule.integrate_c(|x| phi.eval(x) * h.rho(x));
        let rhs = phi.heat_at_identity(0.6);
        assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0));
    }

    #[test]
    fn semigroup_by_convolution() {
        let g = CompactGroup::su2();
        let (s, t) = (0.3, 0.4);
        let hs = HeatKernel::new(&g, s).unwrap();
        let ht = HeatKernel::new(&g, t).unwrap();
        let hst = HeatKernel::new(&g, s + t).unwrap();
        let band: Vec<usize> = hs
            .band()
            .iter()
            .zip(ht.band())
            .map(|(a, b)| *a.max(&b))
            .collect();
        let rule =
            haar_quadrature_with(&g, &exactness_for_band(&g, &band), DEFAULT_NODE_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..3 {
            let x = g.random_point(&mut rng);
            let conv = rule.integrate(|y| hs.rho(y) * ht.rho(&y.inverse().mul(&x)));
            let direct = hst.rho(&x);
            assert!((conv - direct).abs() < 1e-8 * direct.max(1.0));
        }
    }

    #[test]
    fn coarse_truncation_reports_positivity_failure() {
        let g = CompactGroup::torus(1);
        let h = HeatKernel::with_cutoff(&g, 0.01, 2).unwrap();
        let bad = (0..200)
            .map(|i| GroupPoint::torus(vec![i as f64 * 0.0314]))
            .find(|x| h.rho(x) <= 0.0);
        let x = bad.expect("a coarse truncation at small t goes negative somewhere");
        assert!(matches!(
            rho_t(&h, &x),
            Err(HeatlabError::Positivity { .. })
        ));
        assert!(HeatKernel::new(&g, 0.0).is_err());
    }

    #[test]
    fn nu_and_mu_closed_forms() {
        assert!((nu_t_torus(1, 1.0, &[0.0]).unwrap() - PI.powf(-0.5)).abs() < 1e-15);
        let gh = crate::numeric::gauss_hermite(20);
        let t = 0.7;
        // Y = sqrt(t) s turns nu_t dY into e^{-s^2} ds / sqrt(pi).
        let m0: f64 = gh.iter().map(|(_, w)| w / PI.sqrt()).sum();
        let m2: f64 = gh.iter().map(|(s, w)| w * t * s * s / PI.sqrt()).sum();
        assert!((m0 - 1.0).abs() < 1e-14 && (m2 - t / 2.0).abs() < 1e-14);
        assert!(nu_t(&CompactGroup::su2(), 1.0, &[0.0; 3]).is_err());
        assert!(mu_t(&CompactGroup::su2(), 1.0, &[C64::from(0.0); 3]).is_err());
    }

    #[test]
    fn mu_t_normalized_and_concentrating() {
        let gh = crate::numeric::gauss_hermite(40);
        for t in [1.0_f64, 0.05] {
            let m = 400;
            let mut total = 0.0;
            let mut inner = 0.0;
            for i in 0..m {
                let th = 2.0 * PI * i as f64 / m as f64 - PI;
                for (s, w) in &gh {
                    let y = t.sqrt() * s;
                    let v = mu_t_torus(1, t, &[C64::new(th, y)]).unwrap();
                    // weight for dY against e^{-s^2}: dY = sqrt(t) ds and divide out e^{-s^2}
                    let dens = v * t.sqrt() * (s * s).exp() * w * 2.0 * PI / m as f64;
                    total += dens;
                    if th * th + y * y < 0.25 {
                        inner += dens;
                    }
                }
            }
            assert!((total - 1.0).abs() < 1e-10, "t={t}: {total}");
            if t < 0.1 {
                assert!(inner > 0.99);
            }
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = CompactGroup::su2();
        let h = HeatKernel::new(&g, 1.0).unwrap();
        let q = haar_quadrature(&g, 1).unwrap();
        let csv = kernel_csv(&h, &q.nodes[..3]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].ends_with("value,tail_bound"));
    }
}
