//! Brownian motion on the group as a product of exponentials of Gaussian
//! increments, its pushforward to the heat kernel, the gauge action of
//! finite-energy loops, and low-order Wiener chaos.
//!
//! Sample `i` of a run with seed `s` draws from `ChaCha8Rng::seed_from_u64(s)`
//! on stream `i`, so results do not depend on the number of threads.

use crate::error::{HeatlabError, Result};
use crate::fock::weight;
use crate::fock::{hermite_degree_norms, taylor_map};
use crate::fourier::FourierCoefficients;
use crate::group::{
    quaternion_to_su2, su2_log, CompactGroup, Factor, FactorPoint, GroupPoint, Irrep, IrrepLabel,
};
use crate::numeric::{gauss_hermite, pairwise_sum, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::{PI, SQRT_2};

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Brownian increments `a_{tau_{i+1}} - a_{tau_i}` on a uniform mesh of `[0,1]`,
/// each coordinate `N(0, t/mesh)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisePath {
    group: CompactGroup,
    pub t: f64,
    pub increments: Vec<Vec<f64>>,
}

impl NoisePath {
    pub fn sample(
        group: &CompactGroup,
        t: f64,
        mesh: usize,
        seed: u64,
        index: u64,
    ) -> Result<Self> {
        if !(t > 0.0) {
            return Err(HeatlabError::InvalidArgument(format!(
                "t must be positive, got {t}"
            )));
        }
        if mesh == 0 {
            return Err(HeatlabError::InvalidArgument(
                "mesh must be at least 1".into(),
            ));
        }
        let mut rng = rng_for(seed, index);
        let sd = (t / mesh as f64).sqrt();
        let d = group.dim();
        let increments = (0..mesh)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        sd * z
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            group: group.clone(),
            t,
            increments,
        })
    }

    pub fn zero(group: &CompactGroup, t: f64, mesh: usize) -> Self {
        Self {
            group: group.clone(),
            t,
            increments: vec![vec![0.0; group.dim()]; mesh],
        }
    }

    pub fn group(&self) -> &CompactGroup {
        &self.group
    }

    pub fn mesh(&self) -> usize {
        self.increments.len()
    }

    /// Sums consecutive blocks of `factor` increments: the same Brownian path on a coarser mesh.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.mesh().is_multiple_of(factor) {
            return Err(HeatlabError::MeshMismatch {
                path: self.mesh(),
                lp: factor,
            });
        }
        let d = self.group.dim();
        let increments = self
            .increments
            .chunks(factor)
            .map(|c| (0..d).map(|k| c.iter().map(|w| w[k]).sum()).collect())
            .collect();
        Ok(Self {
            group: self.group.clone(),
            t: self.t,
            increments,
        })
    }
}

/// SU(2) element as `a + i v.sigma`.
#[derive(Clone, Copy, Debug)]
struct Quat {
    a: f64,
    v: [f64; 3],
}

impl Quat {
    const ONE: Quat = Quat {
        a: 1.0,
        v: [0.0; 3],
    };

    /// `exp(sum w_k X_k)` with `X_k = i sigma_k / sqrt 2`.
    fn exp(w: &[f64]) -> Quat {
        let u = [w[0] / SQRT_2, w[1] / SQRT_2, w[2] / SQRT_2];
        let r = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        let s = if r < 1e-8 {
            1.0 - r * r / 6.0
        } else {
            r.sin() / r
        };
        Quat {
            a: r.cos(),
            v: [u[0] * s, u[1] * s, u[2] * s],
        }
    }

    fn mul(self, o: Quat) -> Quat {
        let (p, q) = (self.v, o.v);
        let dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
        let cross = [
            p[1] * q[2] - p[2] * q[1],
            p[2] * q[0] - p[0] * q[2],
            p[0] * q[1] - p[1] * q[0],
        ];
        Quat {
            a: self.a * o.a - dot,
            v: [
                self.a * q[0] + o.a * p[0] - cross[0],
                self.a * q[1] + o.a * p[1] - cross[1],
                self.a * q[2] + o.a * p[2] - cross[2],
            ],
        }
    }

    fn to_point(self) -> FactorPoint {
        let n = (self.a * self.a + self.v.iter().map(|x| x * x).sum::<f64>()).sqrt();
        FactorPoint::Su2(quaternion_to_su2([
            self.a / n,
            self.v[2] / n,
            self.v[1] / n,
            self.v[0] / n,
        ]))
    }
}

/// Ordered product `exp(dW_1) exp(dW_2) ... exp(dW_m)`.
pub fn holonomy(p: &NoisePath) -> GroupPoint {
    holonomy_of(&p.group, p.increments.iter().map(|v| v.as_slice()))
}

fn holonomy_of<'a>(group: &CompactGroup, incs: impl Iterator<Item = &'a [f64]>) -> GroupPoint {
    let mut torus: Vec<Vec<f64>> = Vec::new();
    let mut su2: Vec<Quat> = Vec::new();
    for f in group.factors() {
        match f {
            Factor::Torus(d) => torus.push(vec![0.0; *d]),
            Factor::Su2 => su2.push(Quat::ONE),
        }
    }
    for w in incs {
        let (mut ti, mut si) = (0, 0);
        for (f, &off) in group.factors().iter().zip(group.offsets()) {
            match f {
                Factor::Torus(d) => {
                    for k in 0..*d {
                        torus[ti][k] += w[off + k];
                    }
                    ti += 1;
                }
                Factor::Su2 => {
                    su2[si] = su2[si].mul(Quat::exp(&w[off..off + 3]));
                    si += 1;
                }
            }
        }
    }
    let (mut ti, mut si) = (0, 0);
    GroupPoint(
        group
            .factors()
            .iter()
            .map(|f| match f {
                Factor::Torus(_) => {
                    ti += 1;
                    FactorPoint::Torus(
                        torus[ti - 1]
                            .iter()
                            .map(|a| a.rem_euclid(2.0 * PI))
                            .collect(),
                    )
                }
                Factor::Su2 => {
                    si += 1;
                    su2[si - 1].to_point()
                }
            })
            .collect(),
    )
}

/// Holonomy of sample `index` without keeping the path.
pub fn sample_holonomy(
    group: &CompactGroup,
    t: f64,
    mesh: usize,
    seed: u64,
    index: u64,
) -> Result<GroupPoint> {
    Ok(holonomy(&NoisePath::sample(group, t, mesh, seed, index)?))
}

/// Monte Carlo estimate of `E[chi(h)]` for one irrep.
#[derive(Clone, Debug)]
pub struct PushforwardEntry {
    pub label: IrrepLabel,
    pub mean: C64,
    pub expected: f64,
    pub std_err: f64,
    pub z: f64,
}

impl PushforwardEntry {
    pub fn pass(&self, z_max: f64) -> bool {
        self.z <= z_max
            || (self.std_err == 0.0 && (self.mean - C64::from(self.expected)).norm() < 1e-12)
    }
}

/// `E[chi_l(h)]` over `samples` holonomies against `d_l e^{-t c_l/2}`.
pub fn pushforward_check(
    group: &CompactGroup,
    t: f64,
    labels: &[IrrepLabel],
    samples: usize,
    mesh: usize,
    seed: u64,
) -> Result<Vec<PushforwardEntry>> {
    let irreps: Vec<Irrep> = labels
        .iter()
        .map(|l| Irrep::new(group, l.clone()))
        .collect::<Result<_>>()?;
    let values: Vec<Vec<C64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let h = sample_holonomy(group, t, mesh, seed, i)?;
            Ok(irreps.iter().map(|ir| ir.character(&h)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(irreps
        .iter()
        .enumerate()
        .map(|(j, ir)| {
            let re: Vec<f64> = values.iter().map(|v| v[j].re).collect();
            let im: Vec<f64> = values.iter().map(|v| v[j].im).collect();
            let n = samples as f64;
            let mean = C64::new(pairwise_sum(&re) / n, pairwise_sum(&im) / n);
            let dev: Vec<f64> = values.iter().map(|v| (v[j] - mean).norm_sqr()).collect();
            let var = pairwise_sum(&dev) / (n - 1.0).max(1.0);
            let std_err = (var / n).sqrt();
            let expected = ir.dim as f64 * (-t * ir.casimir / 2.0).exp();
            let diff = (mean - C64::from(expected)).norm();
            let z = if std_err > 0.0 {
                diff / std_err
            } else if diff < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            PushforwardEntry {
                label: ir.label.clone(),
                mean,
                expected,
                std_err,
                z,
            }
        })
        .collect())
}

/// `E[chi_n(e^w)] / d` for one SU(2) step `w ~ N(0, (t/mesh) I)`, `n` twice the spin.
/// The rotation angle is `|w|/sqrt 2`, and for a 3D Gaussian `r` with per-coordinate
/// variance `s`, `E cos(k|r|) = (1 - k^2 s) e^{-k^2 s/2}`. Returns the value minus one.
pub fn su2_step_mean_minus_one(twice: u32, t: f64, mesh: usize) -> f64 {
    let s = t / (2.0 * mesh as f64);
    let d = (twice + 1) as f64;
    let terms: Vec<f64> = (0..=twice)
        .map(|i| {
            let k = twice as f64 - 2.0 * i as f64;
            let x = k * k * s / 2.0;
            // (1 - 2x) e^{-x} - 1
            (-x).exp_m1() - 2.0 * x * (-x).exp()
        })
        .collect();
    pairwise_sum(&terms) / d
}

/// The same one-step mean by tensor Gauss-Hermite quadrature over `w`.
pub fn su2_step_mean_quadrature(twice: u32, t: f64, mesh: usize, nodes: usize) -> f64 {
    let gh = gauss_hermite(nodes);
    let sd = (2.0 * t / mesh as f64).sqrt();
    let ir = Irrep::spin(twice);
    let mut acc = Vec::with_capacity(nodes * nodes * nodes);
    for (x, wx) in &gh {
        for (y, wy) in &gh {
            for (z, wz) in &gh {
                let w = [sd * x, sd * y, sd * z];
                let g = GroupPoint(vec![Quat::exp(&w).to_point()]);
                acc.push(wx * wy * wz * ir.character(&g).re);
            }
        }
    }
    pairwise_sum(&acc) / PI.powf(1.5) / ir.dim as f64
}

/// `|E[chi(h_mesh)] - d e^{-t c/2}|` for the product-of-exponentials walk.
/// Increments are conjugation invariant, so `E[pi(h_m)] = s^m I` with `s` the one-step mean.
pub fn su2_weak_bias(twice: u32, t: f64, mesh: usize) -> f64 {
    let d = (twice + 1) as f64;
    let c = twice as f64 * (twice as f64 + 2.0) / 2.0;
    let log_ratio = mesh as f64 * su2_step_mean_minus_one(twice, t, mesh).ln_1p() + t * c / 2.0;
    d * (-t * c / 2.0).exp() * log_ratio.exp_m1().abs()
}

/// Weak order between the coarsest and finest mesh of the ladder.
pub fn su2_weak_order(twice: u32, t: f64, meshes: &[usize]) -> f64 {
    let lo = *meshes.iter().min().unwrap();
    let hi = *meshes.iter().max().unwrap();
    (su2_weak_bias(twice, t, lo) / su2_weak_bias(twice, t, hi)).ln() / (hi as f64 / lo as f64).ln()
}

/// Kolmogorov-Smirnov statistic of circle holonomies (angles in `(-pi, pi]`)
/// against the wrapped Gaussian of variance `t`.
pub fn ks_statistic_circle(t: f64, samples: usize, mesh: usize, seed: u64) -> Result<f64> {
    let g = CompactGroup::torus(1);
    let mut angles: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let h = sample_holonomy(&g, t, mesh, seed, i)?;
            let FactorPoint::Torus(th) = &h.0[0] else {
                unreachable!()
            };
            Ok(crate::group::wrap_angle(th[0]))
        })
        .collect::<Result<_>>()?;
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples as f64;
    let d = angles
        .par_iter()
        .enumerate()
        .map(|(i, &th)| {
            let f = wrapped_gaussian_cdf(t, th);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .reduce(|| 0.0, f64::max);
    Ok(d)
}

/// KS critical value at level 0.01.
pub fn ks_critical_001(samples: usize) -> f64 {
    1.628 / (samples as f64).sqrt()
}

/// CDF on `(-pi, pi]` of the wrapped Gaussian of variance `t`.
pub fn wrapped_gaussian_cdf(t: f64, theta: f64) -> f64 {
    let mut s = (theta + PI) / (2.0 * PI);
    let mut n = 1.0f64;
    loop {
        let c = (-t * n * n / 2.0).exp();
        s += c * (n * theta).sin() / (PI * n);
        if c < 1e-18 {
            break;
        }
        n += 1.0;
    }
    s
}

/// A discretized loop `l_0 = e, l_1, ..., l_m = e`.
#[derive(Clone, Debug)]
pub struct LoopElement {
    group: CompactGroup,
    pub points: Vec<GroupPoint>,
}

impl LoopElement {
    /// `l(tau) = exp(sum_k c_k(tau) X_k)` sampled at `tau = i/mesh`, where
    /// `coeffs(tau)` must vanish at 0 and 1.
    pub fn from_fn<F: Fn(f64) -> Vec<f64>>(
        group: &CompactGroup,
        mesh: usize,
        coeffs: F,
    ) -> Result<Self> {
        let points: Vec<GroupPoint> = (0..=mesh)
            .map(|i| group.exp_map(&coeffs(i as f64 / mesh as f64)))
            .collect();
        let e = group.identity();
        if !points[0].approx_eq(&e, 1e-12) || !points[mesh].approx_eq(&e, 1e-12) {
            return Err(HeatlabError::InvalidArgument(
                "loop must start and end at the identity".into(),
            ));
        }
        Ok(Self {
            group: group.clone(),
            points,
        })
    }

    pub fn identity(group: &CompactGroup, mesh: usize) -> Self {
        Self {
            group: group.clone(),
            points: vec![group.identity(); mesh + 1],
        }
    }

    /// `exp(a sin(2 pi tau) X_1 + b (1 - cos(2 pi tau)) X_2)` on SU(2) or any
    /// group with at least two algebra directions.
    pub fn trigonometric(group: &CompactGroup, mesh: usize, a: f64, b: f64) -> Result<Self> {
        let d = group.dim();
        if d < 2 {
            return Self::from_fn(group, mesh, |tau| vec![a * (2.0 * PI * tau).sin()]);
        }
        Self::from_fn(group, mesh, |tau| {
            let mut c = vec![0.0; d];
            c[0] = a * (2.0 * PI * tau).sin();
            c[1] = b * (1.0 - (2.0 * PI * tau).cos());
            c
        })
    }

    pub fn mesh(&self) -> usize {
        self.points.len() - 1
    }

    /// Coarser loop through every `factor`-th point.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.mesh().is_multiple_of(factor) {
            return Err(HeatlabError::MeshMismatch {
                path: self.mesh(),
                lp: factor,
            });
        }
        Ok(Self {
            group: self.group.clone(),
            points: self.points.iter().step_by(factor).cloned().collect(),
        })
    }
}

/// `log` on the group, principal branch on each factor.
fn group_log(group: &CompactGroup, x: &GroupPoint) -> Vec<f64> {
    let mut out = vec![0.0; group.dim()];
    for ((f, &off), p) in group.factors().iter().zip(group.offsets()).zip(&x.0) {
        match (f, p) {
            (Factor::Torus(_), FactorPoint::Torus(th)) => {
                for (k, a) in th.iter().enumerate() {
                    out[off + k] = crate::group::wrap_angle(*a);
                }
            }
            (Factor::Su2, FactorPoint::Su2(m)) => out[off..off + 3].copy_from_slice(&su2_log(m)),
            _ => unreachable!("point does not match group"),
        }
    }
    out
}

/// `Ad_x w` in coordinates.
fn adjoint_action(group: &CompactGroup, x: &GroupPoint, w: &[f64]) -> Vec<f64> {
    let mut out = w.to_vec();
    let basis = crate::group::su2_basis();
    for ((f, &off), p) in group.factors().iter().zip(group.offsets()).zip(&x.0) {
        if let (Factor::Su2, FactorPoint::Su2(m)) = (f, p) {
            let y = basis[0] * C64::from(w[off])
                + basis[1] * C64::from(w[off + 1])
                + basis[2] * C64::from(w[off + 2]);
            let conj = m * y * m.adjoint();
            for k in 0..3 {
                out[off + k] = (basis[k].adjoint() * conj).trace().re;
            }
        }
    }
    out
}

/// Gauge action `A -> l A l^{-1} - (dl/dtau) l^{-1}` on increments:
/// `dW_i -> Ad_{l_i} dW_i + log(l_i l_{i+1}^{-1})`.
pub fn loop_action(l: &LoopElement, p: &NoisePath) -> Result<NoisePath> {
    if l.mesh() != p.mesh() {
        return Err(HeatlabError::MeshMismatch {
            path: p.mesh(),
            lp: l.mesh(),
        });
    }
    let g = &p.group;
    let increments = p
        .increments
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let mut v = adjoint_action(g, &l.points[i], w);
            let step = group_log(g, &l.points[i].mul(&l.points[i + 1].inverse()));
            v.iter_mut().zip(step).for_each(|(a, b)| *a += b);
            v
        })
        .collect();
    Ok(NoisePath {
        group: g.clone(),
        t: p.t,
        increments,
    })
}

/// Mean distance between `holonomy(p)` and `holonomy(l . p)` at each mesh,
/// coarsening one fine path per sample so all meshes share the noise.
pub fn loop_invariance_study(
    group: &CompactGroup,
    t: f64,
    l_fine: &LoopElement,
    meshes: &[usize],
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let fine = l_fine.mesh();
    let loops: Vec<LoopElement> = meshes
        .iter()
        .map(|&m| l_fine.coarsen(fine / m.max(1)))
        .collect::<Result<_>>()?;
    for (&m, l) in meshes.iter().zip(&loops) {
        if l.mesh() != m {
            return Err(HeatlabError::MeshMismatch { path: fine, lp: m });
        }
    }
    let per_sample: Vec<Vec<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = NoisePath::sample(group, t, fine, seed, i)?;
            meshes
                .iter()
                .zip(&loops)
                .map(|(&m, l)| {
                    let pm = p.coarsen(fine / m)?;
                    let a = holonomy(&pm);
                    let b = holonomy(&loop_action(l, &pm)?);
                    Ok(a.inverse().mul(&b).distance_from_identity())
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..meshes.len())
        .map(|j| {
            pairwise_sum(&per_sample.iter().map(|v| v[j]).collect::<Vec<_>>()) / samples as f64
        })
        .collect())
}

/// Least-squares slope of `-log(err)` against `log(mesh)`.
pub fn observed_order(meshes: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = meshes.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| -e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// Monte Carlo residual of the order-`<= 2` chaos expansion against the Fock tail.
#[derive(Clone, Debug)]
pub struct ChaosReport {
    pub residual_mean: f64,
    pub std_err: f64,
    pub expected_tail: f64,
    pub z: f64,
}

impl ChaosReport {
    pub fn pass(&self, z_max: f64) -> bool {
        self.z <= z_max
    }
}

/// `E|phi(h) - xi_0 - I_1 - I_2|^2` against `sum_{n > 2} t^n/n! ||xi_n||^2`, where
/// `I_1 = sum_k xi_1(k) a^k_1` and `I_2 = sum_{j,k} xi_2(j,k) int_{s<r} da^j_s da^k_r`
/// are computed with forward increments.
pub fn chaos_term_check(
    phi: &FourierCoefficients,
    t: f64,
    samples: usize,
    mesh: usize,
    seed: u64,
) -> Result<ChaosReport> {
    let group = phi.group();
    let d = group.dim();
    let xi = taylor_map(phi, t, 2)?;
    let norms = hermite_degree_norms(phi, t, 2);
    let total = crate::transforms::norm_in_position(phi, t)?;
    let kept: f64 = norms
        .iter()
        .enumerate()
        .map(|(n, v)| weight(t, n) * v)
        .sum();
    let expected_tail = (total - kept).max(0.0);
    let vals: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = NoisePath::sample(group, t, mesh, seed, i)?;
            let h = holonomy(&p);
            let mut running = vec![0.0; d];
            let mut i2 = C64::from(0.0);
            for w in &p.increments {
                for j in 0..d {
                    if running[j] == 0.0 {
                        continue;
                    }
                    for (k, wk) in w.iter().enumerate() {
                        i2 += xi.get(&[j, k]) * (running[j] * wk);
                    }
                }
                running.iter_mut().zip(w).for_each(|(a, b)| *a += b);
            }
            let i1: C64 = (0..d).map(|k| xi.get(&[k]) * running[k]).sum();
            let r = phi.eval(&h) - xi.get(&[]) - i1 - i2;
            Ok(r.norm_sqr())
        })
        .collect::<Result<_>>()?;
    let n = samples as f64;
    let mean = pairwise_sum(&vals) / n;
    let dev: Vec<f64> = vals.iter().map(|v| (v - mean).powi(2)).collect();
    let std_err = (pairwise_sum(&dev) / (n - 1.0).max(1.0) / n).sqrt();
    let z = (mean - expected_tail).abs() / std_err.max(f64::MIN_POSITIVE);
    Ok(ChaosReport {
        residual_mean: mean,
        std_err,
        expected_tail,
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_gives_identity() {
        for name in ["torus:2", "su2", "torus:1,su2"] {
            let g = CompactGroup::parse(name).unwrap();
            let h = holonomy(&NoisePath::zero(&g, 1.0, 10));
            assert!(h.approx_eq(&g.identity(), 1e-15));
        }
    }

    #[test]
    fn quaternion_path_matches_matrix_exponentials() {
        let g = CompactGroup::su2();
        let p = NoisePath::sample(&g, 0.5, 50, 3, 7).unwrap();
        let mut m = g.identity();
        for w in &p.increments {
            m = m.mul(&g.exp_map(w));
        }
        assert!(holonomy(&p).approx_eq(&m, 1e-12));
    }

    #[test]
    fn sampling_is_deterministic_and_stream_keyed() {
        let g = CompactGroup::su2();
        let a = NoisePath::sample(&g, 0.5, 20, 42, 3).unwrap();
        let b = NoisePath::sample(&g, 0.5, 20, 42, 3).unwrap();
        let c = NoisePath::sample(&g, 0.5, 20, 42, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn increment_variance() {
        let g = CompactGroup::su2();
        let t = 0.8;
        let mesh = 100;
        let mut sq = Vec::new();
        for i in 0..200 {
            let p = NoisePath::sample(&g, t, mesh, 1, i).unwrap();
            sq.extend(p.increments.iter().flatten().map(|v| v * v));
        }
        let var = pairwise_sum(&sq) / sq.len() as f64;
        let se = (2.0f64 / sq.len() as f64).sqrt() * t / mesh as f64;
        assert!((var - t / mesh as f64).abs() < 4.0 * se);
    }

    #[test]
    fn step_mean_closed_form_matches_quadrature() {
        for twice in [1, 2, 4] {
            for mesh in [1, 10] {
                let closed = 1.0 + su2_step_mean_minus_one(twice, 0.5, mesh);
                let quad = su2_step_mean_quadrature(twice, 0.5, mesh, 30);
                assert!(
                    (closed - quad).abs() < 1e-12,
                    "{twice} {mesh}: {closed} {quad}"
                );
            }
        }
    }

    #[test]
    fn weak_bias_is_first_order() {
        let order = su2_weak_order(1, 0.5, &[250, 1000, 4000]);
        assert!((1.0..1.1).contains(&order), "{order}");
        assert!(su2_weak_bias(1, 0.5, 4000) < su2_weak_bias(1, 0.5, 250));
    }

    #[test]
    fn pushforward_small_run() {
        let g = CompactGroup::su2();
        let e = pushforward_check(
            &g,
            0.5,
            &[
                IrrepLabel::spin(0),
                IrrepLabel::spin(1),
                IrrepLabel::spin(2),
            ],
            4000,
            50,
            9,
        )
        .unwrap();
        assert!((e[0].mean - C64::from(1.0)).norm() < 1e-12);
        for x in &e {
            assert!(x.pass(4.0), "{x:?}");
        }
        let t1 = CompactGroup::torus(1);
        let e = pushforward_check(&t1, 0.5, &[IrrepLabel::torus(vec![1])], 4000, 10, 9).unwrap();
        assert!(e[0].pass(4.0), "{:?}", e[0]);
    }

    #[test]
    fn circle_holonomy_is_wrapped_gaussian() {
        assert!((wrapped_gaussian_cdf(0.5, PI) - 1.0).abs() < 1e-14);
        assert!(wrapped_gaussian_cdf(0.5, -PI).abs() < 1e-14);
        assert!((wrapped_gaussian_cdf(0.5, 0.0) - 0.5).abs() < 1e-14);
        let d = ks_statistic_circle(0.7, 5000, 5, 2).unwrap();
        assert!(d < ks_critical_001(5000), "{d}");
    }

    #[test]
    fn trivial_and_abelian_loops() {
        let g = CompactGroup::su2();
        let p = NoisePath::sample(&g, 0.5, 40, 5, 0).unwrap();
        let q = loop_action(&LoopElement::identity(&g, 40), &p).unwrap();
        for (a, b) in p.increments.iter().zip(&q.increments) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-14);
            }
        }
        let t1 = CompactGroup::torus(1);
        let p = NoisePath::sample(&t1, 0.5, 64, 5, 0).unwrap();
        let l = LoopElement::trigonometric(&t1, 64, 0.7, 0.0).unwrap();
        let q = loop_action(&l, &p).unwrap();
        assert!(holonomy(&p).approx_eq(&holonomy(&q), 1e-12));
        assert!(loop_action(
            &LoopElement::identity(&g, 10),
            &NoisePath::zero(&g, 1.0, 20)
        )
        .is_err());
        assert!(LoopElement::from_fn(&g, 10, |tau| vec![tau, 0.0, 0.0]).is_err());
    }

    #[test]
    fn su2_log_inverts_exp() {
        let g = CompactGroup::su2();
        for w in [[0.3, -0.2, 0.1], [1.0, 2.0, -0.5], [0.0, 0.0, 0.0]] {
            let x = g.exp_map(&w);
            let back = su2_log(match &x.0[0] {
                FactorPoint::Su2(m) => m,
                _ => unreachable!(),
            });
            for k in 0..3 {
                assert!((back[k] - w[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn loop_action_converges() {
        let g = CompactGroup::su2();
        let l = LoopElement::trigonometric(&g, 1024, 0.8, 0.5).unwrap();
        let meshes = [64, 256, 1024];
        let errs = loop_invariance_study(&g, 0.5, &l, &meshes, 200, 3).unwrap();
        let order = observed_order(&meshes, &errs);
        assert!(errs[2] < errs[0]);
        assert!(order >= 0.9, "{errs:?} {order}");
    }

    #[test]
    fn chaos_residual_for_constant_is_zero() {
        let g = CompactGroup::su2();
        let one = FourierCoefficients::constant(&g, C64::from(1.0));
        let r = chaos_term_check(&one, 0.5, 100, 10, 1).unwrap();
        assert!(r.residual_mean < 1e-24 && r.expected_tail < 1e-12);
    }
}
