//! Quadrature rules for normalized Haar measure.
//!
//! A rule of exactness `E` integrates products of two matrix entries of
//! degree at most `E` exactly (equivalently, single entries of degree up to
//! `2E`). On a circle that is a uniform grid of `2E+1` points; on SU(2) it is
//! an Euler-angle product rule with Gauss-Legendre nodes in `cos(beta)`.

use crate::error::{HeatlabError, Result};
use crate::group::{CompactGroup, Factor, FactorPoint, GroupPoint};
use crate::numeric::{gauss_legendre, C64};
use nalgebra::Matrix2;
use std::f64::consts::PI;

/// Default limit on the number of nodes of a product rule.
pub const DEFAULT_NODE_CAP: usize = 4_000_000;

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<GroupPoint>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_i w_i f(x_i)`, reproducible across thread counts.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&GroupPoint) -> f64 + Sync,
    {
        crate::numeric::par_sum(self.nodes.len(), |i| self.weights[i] * f(&self.nodes[i]))
    }

    pub fn integrate_c<F>(&self, f: F) -> C64
    where
        F: Fn(&GroupPoint) -> C64 + Sync,
    {
        crate::numeric::par_sum_c(self.nodes.len(), |i| f(&self.nodes[i]) * self.weights[i])
    }
}

/// One factor's nodes and weights.
fn factor_rule(f: &Factor, e: usize) -> Vec<(FactorPoint, f64)> {
    match f {
        Factor::Torus(d) => {
            let m = 2 * e + 1;
            let circle: Vec<f64> = (0..m).map(|i| 2.0 * PI * i as f64 / m as f64).collect();
            let w = 1.0 / (m as f64).powi(*d as i32);
            let total = m.pow(*d as u32);
            (0..total)
                .map(|mut idx| {
                    let mut th = vec![0.0; *d];
                    for k in (0..*d).rev() {
                        th[k] = circle[idx % m];
                        idx /= m;
                    }
                    (FactorPoint::Torus(th), w)
                })
                .collect()
        }
        Factor::Su2 => {
            let m = 4 * e + 1;
            let gl = gauss_legendre(e + 1);
            let mut out = Vec::with_capacity(m * m * gl.len());
            let phases: Vec<C64> = (0..m)
                .map(|i| {
                    // alpha = 2u, so exp(-i alpha/2) = exp(-iu).
                    let u = 2.0 * PI * i as f64 / m as f64;
                    C64::new(u.cos(), -u.sin())
                })
                .collect();
            let wa = 1.0 / (m * m) as f64;
            for pa in &phases {
                for (x, wb) in &gl {
                    let half = x.acos() / 2.0;
                    let (s, c) = half.sin_cos();
                    for pg in &phases {
                        // Rz(alpha) Ry(beta) Rz(gamma)
                        let m11 = pa * c * pg;
                        let m12 = -pa * s * pg.conj();
                        let m21 = pa.conj() * s * pg;
                        let m22 = pa.conj() * c * pg.conj();
                        out.push((
                            FactorPoint::Su2(Matrix2::new(m11, m12, m21, m22)),
                            wa * wb / 2.0,
                        ));
                    }
                }
            }
            out
        }
    }
}

/// Node count of a rule with per-factor exactness.
pub fn node_count(group: &CompactGroup, exactness: &[usize]) -> usize {
    group
        .factors()
        .iter()
        .zip(exactness)
        .map(|(f, &e)| match f {
            Factor::Torus(d) => (2 * e + 1).saturating_pow(*d as u32),
            Factor::Su2 => (4 * e + 1).saturating_mul(4 * e + 1).saturating_mul(e + 1),
        })
        .fold(1usize, |a, b| a.saturating_mul(b))
}

/// Haar quadrature with the same exactness on every factor.
pub fn haar_quadrature(group: &CompactGroup, exactness: usize) -> Result<QuadratureRule> {
    let e = vec![exactness; group.factors().len()];
    haar_quadrature_with(group, &e, DEFAULT_NODE_CAP)
}

/// Haar quadrature with per-factor exactness and an explicit node cap.
pub fn haar_quadrature_with(
    group: &CompactGroup,
    exactness: &[usize],
    cap: usize,
) -> Result<QuadratureRule> {
    if exactness.len() != group.factors().len() {
        return Err(HeatlabError::InvalidArgument(
            "one exactness value per factor required".into(),
        ));
    }
    if exactness.contains(&0) {
        return Err(HeatlabError::InvalidArgument(
            "exactness must be at least 1".into(),
        ));
    }
    let needed = node_count(group, exactness);
    if needed > cap {
        return Err(HeatlabError::ResourceCap {
            what: "quadrature nodes",
            needed,
            limit: cap,
        });
    }
    let rules: Vec<Vec<(FactorPoint, f64)>> = group
        .factors()
        .iter()
        .zip(exactness)
        .map(|(f, &e)| factor_rule(f, e))
        .collect();
    let mut nodes = Vec::with_capacity(needed);
    let mut weights = Vec::with_capacity(needed);
    let mut idx = vec![0usize; rules.len()];
    loop {
        let mut pts = Vec::with_capacity(rules.len());
        let mut w = 1.0;
        for (r, &i) in rules.iter().zip(&idx) {
            pts.push(r[i].0.clone());
            w *= r[i].1;
        }
        nodes.push(GroupPoint(pts));
        weights.push(w);
        let mut k = rules.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < rules[k].len() {
                break;
            }
            idx[k] = 0;
            if k == 0 {
                k = usize::MAX;
                break;
            }
        }
        if k == usize::MAX {
            break;
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        exactness: *exactness.iter().min().unwrap(),
    })
}
