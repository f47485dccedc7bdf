//! The Fock space `J_t^0` of functionals on the enveloping algebra, the
//! Taylor / Hermite map into it, and Rodriguez-type Hermite functions.
//!
//! Degree-`n` components are dense arrays over words `(k_1..k_n)`, stored
//! row-major with `k_1` most significant. The norm is
//! `sum_n t^n/n! sum_w |xi_n(w)|^2`.

use crate::check::Comparison;
use crate::error::{HeatlabError, Result};
use crate::fourier::{labels_within_band, FourierCoefficients};
use crate::group::{CompactGroup, GroupPoint, Irrep};
use crate::heat::HeatKernel;
use crate::numeric::{factorial, C64};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

/// Largest dense tensor (total entries over all degrees) we will allocate.
pub const DENSE_ENTRY_CAP: usize = 4_000_000;

/// Largest truncation degree the Gram recursion will try.
pub const GRAM_DEGREE_CAP: usize = 400;

pub(crate) fn weight(t: f64, n: usize) -> f64 {
    t.powi(n as i32) / factorial(n)
}

fn dense_len(d: usize, n_max: usize) -> usize {
    (0..=n_max).fold(0usize, |acc, n| {
        acc.saturating_add(d.saturating_pow(n as u32))
    })
}

fn check_dense(d: usize, n_max: usize) -> Result<()> {
    let needed = dense_len(d, n_max);
    if needed > DENSE_ENTRY_CAP {
        return Err(HeatlabError::ResourceCap {
            what: "tensor entries",
            needed,
            limit: DENSE_ENTRY_CAP,
        });
    }
    Ok(())
}

/// A squared norm together with a bound on what truncation left out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockNorm {
    pub value: f64,
    pub tail: f64,
    pub degree: usize,
}

/// A degree-truncated element of the dual of the tensor algebra.
#[derive(Clone, Debug)]
pub struct TensorFunctional {
    group: CompactGroup,
    pub t: f64,
    components: Vec<Vec<C64>>,
    /// Bound on the norm contribution of the discarded degrees, if known.
    pub tail_bound: f64,
}

impl TensorFunctional {
    pub fn new(group: &CompactGroup, t: f64, components: Vec<Vec<C64>>) -> Result<Self> {
        if !(t > 0.0) {
            return Err(HeatlabError::InvalidArgument(format!(
                "t must be positive, got {t}"
            )));
        }
        let d = group.dim();
        for (n, c) in components.iter().enumerate() {
            if c.len() != d.pow(n as u32) {
                return Err(HeatlabError::InvalidArgument(format!(
                    "degree {n} component has {} entries, expected {}",
                    c.len(),
                    d.pow(n as u32)
                )));
            }
        }
        if components.is_empty() {
            return Err(HeatlabError::InvalidArgument(
                "at least the degree-0 component is required".into(),
            ));
        }
        Ok(Self {
            group: group.clone(),
            t,
            components,
            tail_bound: 0.0,
        })
    }

    pub fn zeros(group: &CompactGroup, t: f64, n_max: usize) -> Self {
        let d = group.dim();
        let components = (0..=n_max)
            .map(|n| vec![C64::from(0.0); d.pow(n as u32)])
            .collect();
        Self {
            group: group.clone(),
            t,
            components,
            tail_bound: 0.0,
        }
    }

    /// The vacuum: `xi_0 = 1`, everything else zero.
    pub fn vacuum(group: &CompactGroup, t: f64, n_max: usize) -> Self {
        let mut v = Self::zeros(group, t, n_max);
        v.components[0][0] = C64::from(1.0);
        v
    }

    pub fn group(&self) -> &CompactGroup {
        &self.group
    }

    pub fn n_max(&self) -> usize {
        self.components.len() - 1
    }

    pub fn component(&self, n: usize) -> &[C64] {
        &self.components[n]
    }

    pub fn components(&self) -> &[Vec<C64>] {
        &self.components
    }

    pub fn get(&self, word: &[usize]) -> C64 {
        self.components[word.len()][word_index(self.group.dim(), word)]
    }

    /// Squared Fock norm over the stored degrees, with the stored tail bound.
    pub fn fock_norm(&self) -> FockNorm {
        let value = self
            .components
            .iter()
            .enumerate()
            .map(|(n, c)| weight(self.t, n) * c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum();
        FockNorm {
            value,
            tail: self.tail_bound,
            degree: self.n_max(),
        }
    }

    /// Fock inner product, conjugate-linear in `self`, over common degrees.
    pub fn inner(&self, other: &Self) -> C64 {
        let mut s = C64::from(0.0);
        for n in 0..=self.n_max().min(other.n_max()) {
            let w = weight(self.t, n);
            let part: C64 = self.components[n]
                .iter()
                .zip(&other.components[n])
                .map(|(a, b)| a.conj() * b)
                .sum();
            s += part * w;
        }
        s
    }

    pub fn truncate(&self, n_max: usize) -> Self {
        let mut out = self.clone();
        out.components.truncate(n_max + 1);
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.components
            .iter_mut()
            .for_each(|v| v.iter_mut().for_each(|z| *z *= c));
        out.tail_bound *= c.norm_sqr();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.n_max().min(other.n_max());
        let mut out = self.truncate(n);
        for (a, b) in out.components.iter_mut().zip(&other.components) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        out.tail_bound = 0.0;
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::from(-1.0)))
    }

    /// Largest entry of the difference over common degrees.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for n in 0..=self.n_max().min(other.n_max()) {
            for (a, b) in self.components[n].iter().zip(&other.components[n]) {
                m = m.max((a - b).norm());
            }
        }
        m
    }

    /// `(a_X xi)(alpha) = xi(alpha X)`: contract the last slot; loses the top degree.
    pub fn annihilate(&self, k: usize) -> Self {
        let d = self.group.dim();
        let n_max = self.n_max().saturating_sub(1);
        let mut comps = Vec::with_capacity(n_max + 1);
        for n in 0..self.n_max() {
            let src = &self.components[n + 1];
            comps.push((0..d.pow(n as u32)).map(|i| src[i * d + k]).collect());
        }
        if comps.is_empty() {
            comps.push(vec![C64::from(0.0)]);
        }
        Self {
            group: self.group.clone(),
            t: self.t,
            components: comps,
            tail_bound: 0.0,
        }
    }

    /// Largest violation of
    /// `xi(..a,b..) - xi(..b,a..) = sum_l c[l][a][b] xi(..l..)` over all degrees.
    pub fn ideal_residual(&self) -> f64 {
        let d = self.group.dim();
        let mut worst: f64 = 0.0;
        for n in 2..=self.n_max() {
            let comp = &self.components[n];
            let lower = &self.components[n - 1];
            let mut word = vec![0usize; n];
            for idx in 0..comp.len() {
                decode_word(d, idx, &mut word);
                for p in 0..n - 1 {
                    let (a, b) = (word[p], word[p + 1]);
                    if a >= b {
                        continue;
                    }
                    let mut sw = word.clone();
                    sw.swap(p, p + 1);
                    let lhs = comp[idx] - comp[word_index(d, &sw)];
                    let mut rhs = C64::from(0.0);
                    let mut low: Vec<usize> = Vec::with_capacity(n - 1);
                    for l in 0..d {
                        let c = self.group.c(l, a, b);
                        if c == 0.0 {
                            continue;
                        }
                        low.clear();
                        low.extend_from_slice(&word[..p]);
                        low.push(l);
                        low.extend_from_slice(&word[p + 2..]);
                        rhs += lower[word_index(d, &low)] * c;
                    }
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
        worst
    }

    pub fn check_ideal(&self, tol: f64) -> Result<()> {
        let r = self.ideal_residual();
        if r > tol {
            return Err(HeatlabError::IdealViolation { residual: r });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let mut comps = serde_json::Map::new();
        for (n, c) in self.components.iter().enumerate() {
            comps.insert(
                n.to_string(),
                Value::Array(c.iter().map(|z| json!([z.re, z.im])).collect()),
            );
        }
        json!({
            "group": self.group.descriptor(),
            "t": self.t,
            "N": self.n_max(),
            "components": comps,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| HeatlabError::Config(format!("tensor functional: {m}"));
        let group =
            CompactGroup::from_descriptor(v.get("group").ok_or_else(|| bad("missing group"))?)?;
        let t = v
            .get("t")
            .and_then(Value::as_f64)
            .ok_or_else(|| bad("missing t"))?;
        let n_max = v
            .get("N")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing N"))? as usize;
        let comps = v
            .get("components")
            .and_then(Value::as_object)
            .ok_or_else(|| bad("missing components"))?;
        let mut components = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let arr = comps
                .get(&n.to_string())
                .and_then(Value::as_array)
                .ok_or_else(|| bad("missing degree"))?;
            let mut c = Vec::with_capacity(arr.len());
            for z in arr {
                let p = z
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| bad("entries must be [re, im]"))?;
                let re = p[0].as_f64().ok_or_else(|| bad("non-numeric entry"))?;
                let im = p[1].as_f64().ok_or_else(|| bad("non-numeric entry"))?;
                c.push(C64::new(re, im));
            }
            components.push(c);
        }
        Self::new(&group, t, components)
    }
}

pub(crate) fn word_index(d: usize, word: &[usize]) -> usize {
    word.iter().fold(0, |acc, &k| acc * d + k)
}

pub(crate) fn decode_word(d: usize, mut idx: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % d;
        idx /= d;
    }
}

fn scaled_blocks(f: &FourierCoefficients, t: f64) -> Vec<(Irrep, DMatrix<C64>)> {
    f.blocks()
        .iter()
        .map(|(ir, m)| {
            (
                ir.clone(),
                m * C64::from(ir.dim as f64 * (-t * ir.casimir / 2.0).exp()),
            )
        })
        .collect()
}

/// Hermite coefficients `(X_{k_1}..X_{k_n} e^{t Delta/2} f)(e)` up to degree
/// `n_max`, with a rigorous bound on the Fock norm of the higher degrees.
pub fn taylor_map(f: &FourierCoefficients, t: f64, n_max: usize) -> Result<TensorFunctional> {
    if !(t > 0.0) {
        return Err(HeatlabError::InvalidArgument(format!(
            "t must be positive, got {t}"
        )));
    }
    let group = f.group();
    let d = group.dim();
    check_dense(d, n_max)?;
    let mut components: Vec<Vec<C64>> = (0..=n_max)
        .map(|n| vec![C64::from(0.0); d.pow(n as u32)])
        .collect();
    for (ir, t_mat) in scaled_blocks(f, t) {
        // Products T A_{w_1} ... A_{w_n}, grown one slot at a time.
        let mut level = vec![t_mat];
        components[0][0] += level[0].trace();
        for comp in components.iter_mut().skip(1) {
            let mut next = Vec::with_capacity(level.len() * d);
            for m in &level {
                for g in &ir.generators {
                    next.push(m * g);
                }
            }
            for (slot, m) in comp.iter_mut().zip(&next) {
                *slot += m.trace();
            }
            level = next;
        }
    }
    let mut xi = TensorFunctional::new(group, t, components)?;
    xi.tail_bound = hermite_tail(f, t, n_max);
    Ok(xi)
}

/// `sum_{n > N} x^n / n!`.
fn exp_tail(x: f64, n: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let first = ((n + 1) as f64 * x.ln() - ln_factorial(n + 1)).exp();
    let r = x / (n + 2) as f64;
    if r < 1.0 {
        first / (1.0 - r)
    } else {
        let partial: f64 = (0..=n)
            .map(|k| ((k as f64) * x.ln() - ln_factorial(k)).exp())
            .sum();
        (x.exp() - partial).max(first)
    }
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Bound on `sum_{n > N} t^n/n! ||xi_n||^2` for the Hermite coefficients of `f`,
/// from `sum_{|w|=n} pi(X_w) pi(X_w)^* = c^n I`.
pub fn hermite_tail(f: &FourierCoefficients, t: f64, n_max: usize) -> f64 {
    let blocks = scaled_blocks(f, t);
    let nonzero: Vec<_> = blocks
        .iter()
        .filter(|(_, m)| m.iter().any(|z| z.norm() > 0.0))
        .collect();
    let l = nonzero.len() as f64;
    nonzero
        .iter()
        .map(|(ir, m)| {
            let hs = m.iter().map(|z| z.norm_sqr()).sum::<f64>();
            l * ir.dim as f64 * hs * exp_tail(t * ir.casimir, n_max)
        })
        .sum()
}

/// Per-degree sums `sum_{|w|=n} |xi_n(w)|^2` for `n = 0..=n_max`, computed by a
/// Gram recursion so the cost does not grow like `d^n`.
pub fn hermite_degree_norms(f: &FourierCoefficients, t: f64, n_max: usize) -> Vec<f64> {
    let blocks = scaled_blocks(f, t);
    let dim: usize = blocks.iter().map(|(ir, _)| ir.dim * ir.dim).sum();
    if dim == 0 {
        return vec![0.0; n_max + 1];
    }
    let gdim = f.group().dim();
    // Right multiplication by pi(X_k) on the direct sum of the blocks, and the trace functional.
    let mut right: Vec<DMatrix<C64>> = vec![DMatrix::zeros(dim, dim); gdim];
    let mut v0 = DVector::zeros(dim);
    let mut tau = DVector::zeros(dim);
    let mut off = 0;
    for (ir, m) in &blocks {
        let n = ir.dim;
        let at = |i: usize, j: usize| off + i * n + j;
        for i in 0..n {
            for j in 0..n {
                v0[at(i, j)] = m[(i, j)];
                if i == j {
                    tau[at(i, j)] = C64::from(1.0);
                }
                for k in 0..gdim {
                    // (M A)_{ij} = sum_p M_{ip} A_{pj}
                    for p in 0..n {
                        right[k][(at(i, j), at(i, p))] += ir.generators[k][(p, j)];
                    }
                }
            }
        }
        off += n * n;
    }
    let mut phi = &v0 * v0.adjoint();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            let mut next = DMatrix::zeros(dim, dim);
            for r in &right {
                next += r * &phi * r.adjoint();
            }
            phi = next;
        }
        out.push((tau.transpose() * &phi * &tau)[(0, 0)].re.max(0.0));
    }
    out
}

/// Fock norm of the Hermite coefficients of `f` truncated at `n_max`, with tail.
pub fn hermite_norm(f: &FourierCoefficients, t: f64, n_max: usize) -> FockNorm {
    let per = hermite_degree_norms(f, t, n_max);
    let value = per.iter().enumerate().map(|(n, v)| weight(t, n) * v).sum();
    FockNorm {
        value,
        tail: hermite_tail(f, t, n_max),
        degree: n_max,
    }
}

/// Smallest truncation whose tail is below `tol` (absolute), via the Gram route.
pub fn hermite_norm_adaptive(f: &FourierCoefficients, t: f64, tol: f64) -> Result<FockNorm> {
    let mut n = 0;
    while hermite_tail(f, t, n) > tol {
        n += 1;
        if n > GRAM_DEGREE_CAP {
            return Err(HeatlabError::Truncation(format!(
                "Fock tail above {tol:e} even at degree {GRAM_DEGREE_CAP}"
            )));
        }
    }
    Ok(hermite_norm(f, t, n))
}

/// `||f||^2_{L^2(rho_t)}` against the truncated Fock norm of its Hermite coefficients.
pub fn hermite_isometry_check(
    f: &FourierCoefficients,
    t: f64,
    n_max: usize,
    rel_tol: f64,
) -> Result<Comparison> {
    let lhs = crate::transforms::norm_in_position(f, t)?;
    let rhs = hermite_norm(f, t, n_max);
    Ok(Comparison::new(lhs, rhs.value, rel_tol, rhs.tail))
}

/// Recovers band-limited `f` from its Hermite coefficients by least squares
/// over a growing set of irreps. Only groups without torus factors qualify:
/// on a torus the Taylor map is not onto, so the data need not come from any `f`.
pub fn inverse_taylor(
    xi: &TensorFunctional,
    max_twice_spin: u32,
    tol: f64,
) -> Result<FourierCoefficients> {
    let group = xi.group();
    if group.has_torus_factor() {
        return Err(HeatlabError::Unsupported {
            op: "inverse_taylor",
            group: group.name(),
            reason: "the group is not simply connected; Taylor data need not come from a function"
                .into(),
        });
    }
    xi.check_ideal(1e-10 * (1.0 + xi.fock_norm().value.sqrt()))?;
    let t = xi.t;
    let d = group.dim();
    let rows: usize = dense_len(d, xi.n_max());
    let mut target = DVector::zeros(rows);
    let mut row = 0;
    for (n, c) in xi.components().iter().enumerate() {
        let s = weight(t, n).sqrt();
        for z in c {
            target[row] = z * s;
            row += 1;
        }
    }
    let target_norm = target.norm();
    let mut last_residual = f64::INFINITY;
    for twice in 0..=max_twice_spin {
        let band = vec![twice as usize; group.factors().len()];
        let labels = labels_within_band(group, &band);
        let irreps: Vec<Irrep> = labels
            .iter()
            .map(|l| Irrep::new(group, l.clone()))
            .collect::<Result<_>>()?;
        let cols: usize = irreps.iter().map(|ir| ir.dim * ir.dim).sum();
        if cols > rows {
            break;
        }
        let mut m = DMatrix::zeros(rows, cols);
        let mut col = 0;
        for ir in &irreps {
            let scale = ir.dim as f64 * (-t * ir.casimir / 2.0).exp();
            // Column (a,b) holds the coefficients of F(a,b): entries (A_w)_{ba}.
            let mut level = vec![DMatrix::<C64>::identity(ir.dim, ir.dim)];
            let mut r0 = 0;
            for n in 0..=xi.n_max() {
                if n > 0 {
                    let mut next = Vec::with_capacity(level.len() * d);
                    for a in &level {
                        for g in &ir.generators {
                            next.push(a * g);
                        }
                    }
                    level = next;
                }
                let s = weight(t, n).sqrt() * scale;
                for (wi, aw) in level.iter().enumerate() {
                    for a in 0..ir.dim {
                        for b in 0..ir.dim {
                            m[(r0 + wi, col + a * ir.dim + b)] = aw[(b, a)] * s;
                        }
                    }
                }
                r0 += level.len();
            }
            col += ir.dim * ir.dim;
        }
        let svd = m.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let rank = svd.rank(1e-12 * smax.max(f64::MIN_POSITIVE));
        let x = svd
            .solve(&target, 1e-12 * smax)
            .map_err(|e| HeatlabError::Invariant(e.into()))?;
        let residual = (&m * &x - &target).norm() / target_norm.max(f64::MIN_POSITIVE);
        last_residual = residual;
        if residual <= tol {
            if rank < cols {
                return Err(HeatlabError::Truncation(format!(
                    "degree {} data do not determine all {cols} coefficients (rank {rank})",
                    xi.n_max()
                )));
            }
            let mut f = FourierCoefficients::zeros(group);
            let mut col = 0;
            for ir in irreps {
                let n = ir.dim;
                let block = DMatrix::from_fn(n, n, |a, b| x[col + a * n + b]);
                col += n * n;
                f.add_irrep_block(ir, block);
            }
            return Ok(f.pruned_below(1e-13 * (1.0 + target_norm)));
        }
    }
    Err(HeatlabError::ResidualFloor {
        residual: last_residual,
        cutoff: max_twice_spin as f64,
    })
}

/// `(-1)^n (X_{k_n} .. X_{k_1} rho_t)(x) / rho_t(x)`.
pub fn hermite_function(h: &HeatKernel, word: &[usize], x: &GroupPoint) -> Result<f64> {
    let rho = h.rho_checked(x)?;
    let rev: Vec<usize> = word.iter().rev().copied().collect();
    let sign = if word.len().is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * h.derivative(&rev, x) / rho)
}

/// Orthonormal bases of the truncated spaces `J^0_M`, `M = 0..=N`, and the
/// truncated creation operators built from them.
///
/// Internally vectors use scaled coordinates `sqrt(t^n/n!) xi_n` so the
/// Fock inner product is Euclidean. The creation operator on level `M` is
/// the adjoint of `a_X : J^0_M -> J^0_{M-1}`, so
/// `<a_X u, v>_{M-1} = <u, a_X^* v>_M` holds exactly.
#[derive(Clone, Debug)]
pub struct FockSpace {
    group: CompactGroup,
    pub t: f64,
    pub n_max: usize,
    offsets: Vec<usize>,
    /// `bases[M]`: columns are an orthonormal basis of `J^0_M` in scaled coordinates.
    bases: Vec<DMatrix<f64>>,
}

impl FockSpace {
    pub fn new(group: &CompactGroup, t: f64, n_max: usize) -> Result<Self> {
        if !(t > 0.0) {
            return Err(HeatlabError::InvalidArgument(format!(
                "t must be positive, got {t}"
            )));
        }
        let d = group.dim();
        check_dense(d, n_max)?;
        let offsets: Vec<usize> = (0..=n_max + 1)
            .map(|n| dense_len(d, n) - d.pow(n as u32))
            .collect();
        let raw = pbw_basis(group, n_max);
        let mut bases = Vec::with_capacity(n_max + 1);
        for m in 0..=n_max {
            let len = dense_len(d, m);
            let cols: Vec<&(usize, Vec<f64>)> = raw.iter().filter(|(deg, _)| *deg <= m).collect();
            let mut a = DMatrix::zeros(len, cols.len());
            for (j, (_, v)) in cols.iter().enumerate() {
                for n in 0..=m {
                    let s = weight(t, n).sqrt();
                    for i in offsets[n]..offsets[n + 1] {
                        a[(i, j)] = v[i] * s;
                    }
                }
            }
            let q = orthonormalize(a);
            bases.push(q);
        }
        Ok(Self {
            group: group.clone(),
            t,
            n_max,
            offsets,
            bases,
        })
    }

    pub fn group(&self) -> &CompactGroup {
        &self.group
    }

    /// `dim J^0_M`.
    pub fn dim(&self, m: usize) -> usize {
        self.bases[m].ncols()
    }

    fn scaled(&self, xi: &TensorFunctional, m: usize) -> DVector<C64> {
        let len = self.offsets[m + 1];
        let mut v = DVector::zeros(len);
        for n in 0..=m.min(xi.n_max()) {
            let s = weight(self.t, n).sqrt();
            for (i, z) in xi.component(n).iter().enumerate() {
                v[self.offsets[n] + i] = z * s;
            }
        }
        v
    }

    fn unscaled(&self, v: &DVector<C64>, m: usize) -> TensorFunctional {
        let d = self.group.dim();
        let comps = (0..=m)
            .map(|n| {
                let s = weight(self.t, n).sqrt();
                (0..d.pow(n as u32))
                    .map(|i| v[self.offsets[n] + i] / s)
                    .collect()
            })
            .collect();
        TensorFunctional {
            group: self.group.clone(),
            t: self.t,
            components: comps,
            tail_bound: 0.0,
        }
    }

    fn basis_c(&self, m: usize) -> DMatrix<C64> {
        self.bases[m].map(C64::from)
    }

    /// Coordinates of `xi` (restricted to degree `m`) in the orthonormal basis of `J^0_m`.
    pub fn coordinates(&self, xi: &TensorFunctional, m: usize) -> DVector<C64> {
        self.basis_c(m).adjoint() * self.scaled(xi, m)
    }

    pub fn from_coordinates(&self, c: &DVector<C64>, m: usize) -> TensorFunctional {
        self.unscaled(&(self.basis_c(m) * c), m)
    }

    /// Distance from `xi` to `J^0_m` relative to its norm (zero for members).
    pub fn membership_residual(&self, xi: &TensorFunctional, m: usize) -> f64 {
        let v = self.scaled(xi, m);
        let q = self.basis_c(m);
        let p = &q * (q.adjoint() * &v);
        (v - p).norm() / (1e-300 + xi.truncate(m).fock_norm().value.sqrt())
    }

    /// A random element of `J^0_m`.
    pub fn random_state<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> TensorFunctional {
        let c = DVector::from_fn(self.dim(m), |_, _| {
            C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
        });
        self.from_coordinates(&c, m)
    }

    /// Matrix of `a_k` from level `m` to level `m - 1`, scaled coordinates.
    fn annihilation_matrix(&self, k: usize, m: usize) -> DMatrix<f64> {
        let d = self.group.dim();
        let mut a = DMatrix::zeros(self.offsets[m], self.offsets[m + 1]);
        for n in 0..m {
            let s = ((n + 1) as f64 / self.t).sqrt();
            for i in 0..d.pow(n as u32) {
                a[(self.offsets[n] + i, self.offsets[n + 1] + i * d + k)] = s;
            }
        }
        a
    }

    /// `a_k^*` from `J^0_{m-1}` to `J^0_m`, where `m = eta.n_max() + 1 <= N`.
    pub fn create(&self, k: usize, eta: &TensorFunctional) -> Result<TensorFunctional> {
        let m = eta.n_max() + 1;
        if m > self.n_max {
            return Err(HeatlabError::Truncation(format!(
                "creation from degree {} exceeds the truncation N = {}",
                eta.n_max(),
                self.n_max
            )));
        }
        let q = self.basis_c(m);
        let b = self.annihilation_matrix(k, m).map(C64::from) * &q;
        let v = self.scaled(eta, m - 1);
        Ok(self.unscaled(&(q * (b.adjoint() * v)), m))
    }

    /// Adjoint of the restriction `J^0_m -> J^0_{m-1}`, applied to `eta` of degree `m - 1`.
    pub fn extend(&self, eta: &TensorFunctional) -> Result<TensorFunctional> {
        let m = eta.n_max() + 1;
        if m > self.n_max {
            return Err(HeatlabError::Truncation("extension beyond N".into()));
        }
        let q = self.basis_c(m);
        let rows = self.offsets[m];
        let restricted = q.rows(0, rows).into_owned();
        let v = self.scaled(eta, m - 1);
        Ok(self.unscaled(&(q * (restricted.adjoint() * v)), m))
    }

    /// Matrix of `a_k^*` from coordinates on level `m - 1` to coordinates on level `m`.
    fn creation_coords(&self, k: usize, m: usize) -> DMatrix<f64> {
        let b = self.annihilation_matrix(k, m) * &self.bases[m];
        b.transpose() * &self.bases[m - 1]
    }

    /// Dimension of the joint kernel of all `a_k` on `J^0_m`.
    pub fn vacuum_nullity(&self, m: usize) -> usize {
        let d = self.group.dim();
        if m == 0 {
            return 1;
        }
        let rows = self.offsets[m];
        let mut stacked = DMatrix::zeros(d * rows, self.dim(m));
        for k in 0..d {
            let b = self.annihilation_matrix(k, m) * &self.bases[m];
            stacked
                .view_mut((k * rows, 0), (rows, self.dim(m)))
                .copy_from(&b);
        }
        let svd = stacked.svd(false, false);
        let smax = svd.singular_values.max();
        svd.singular_values
            .iter()
            .filter(|&&s| s <= 1e-10 * smax)
            .count()
            + self.dim(m).saturating_sub(d * rows)
    }

    /// `sum_{n <= N} t^n/n! sum_w <u, a*_{k_1}..a*_{k_n} phi_0> <phi_0, a_{k_n}..a_{k_1} v>`
    /// with every creation operator taken on its own truncation level.
    pub fn resolution_sum(&self, u: &TensorFunctional, v: &TensorFunctional) -> C64 {
        let d = self.group.dim();
        let top = self.n_max.min(u.n_max()).min(v.n_max());
        let creators: Vec<Vec<DMatrix<f64>>> = (1..=top)
            .map(|m| (0..d).map(|k| self.creation_coords(k, m)).collect())
            .collect();
        let u_coords: Vec<DVector<C64>> = (0..=top).map(|m| self.coordinates(u, m)).collect();
        // Vacuum coordinates on level 0.
        let vac = DVector::from_element(1, self.bases[0][(0, 0)].signum());
        let mut total = C64::from(0.0);
        // Depth-first over words built by prepending: state(k_1..k_n) = a*_{k_1} state(k_2..k_n).
        let mut stack: Vec<(Vec<usize>, DVector<f64>)> = vec![(Vec::new(), vac)];
        while let Some((word, state)) = stack.pop() {
            let n = word.len();
            let overlap: C64 = u_coords[n]
                .iter()
                .zip(state.iter())
                .map(|(a, b)| a.conj() * *b)
                .sum();
            // <phi_0, a_{k_n}..a_{k_1} v> = v_n(k_n, .., k_1)
            let rev: Vec<usize> = word.iter().rev().copied().collect();
            let vacuum_part = v.get(&rev);
            total += overlap * vacuum_part * weight(self.t, n);
            if n < top {
                for k in 0..d {
                    let next = &creators[n][k] * &state;
                    let mut w = Vec::with_capacity(n + 1);
                    w.push(k);
                    w.extend_from_slice(&word);
                    stack.push((w, next));
                }
            }
        }
        total
    }
}

fn orthonormalize(a: DMatrix<f64>) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return a;
    }
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix signs so the first basis vector (the vacuum) has a positive entry.
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Canonical basis of `J^0_N`: one functional per sorted word `s` (a PBW
/// monomial), equal to 1 on `s`, 0 on every other sorted word, and extended
/// to all words through the commutation relations. Returned as
/// `(degree of s, dense unscaled vector)`.
fn pbw_basis(group: &CompactGroup, n_max: usize) -> Vec<(usize, Vec<f64>)> {
    let d = group.dim();
    let offsets: Vec<usize> = (0..=n_max + 1)
        .map(|n| dense_len(d, n) - d.pow(n as u32))
        .collect();
    let total = dense_len(d, n_max);
    // For every unsorted word: index of the word with its first descent swapped,
    // and the lower-degree words with that pair replaced by each l.
    struct Rule {
        idx: usize,
        swapped: usize,
        lower: Vec<(usize, f64)>,
    }
    let mut order: Vec<Vec<Rule>> = Vec::with_capacity(n_max + 1);
    let mut sorted: Vec<Vec<usize>> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let count = d.pow(n as u32);
        let mut rules = Vec::new();
        let mut sorted_n = Vec::new();
        let mut word = vec![0usize; n];
        let mut by_inv: Vec<(usize, usize)> = Vec::with_capacity(count);
        for idx in 0..count {
            decode_word(d, idx, &mut word);
            let inv = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| word[i] > word[j])
                .count();
            by_inv.push((inv, idx));
        }
        by_inv.sort();
        for (inv, idx) in by_inv {
            decode_word(d, idx, &mut word);
            if inv == 0 {
                sorted_n.push(idx);
                continue;
            }
            let p = (0..n - 1).find(|&p| word[p] > word[p + 1]).unwrap();
            let mut sw = word.clone();
            sw.swap(p, p + 1);
            let mut lower = Vec::new();
            for l in 0..d {
                let c = group.c(l, word[p], word[p + 1]);
                if c != 0.0 {
                    let mut low = Vec::with_capacity(n - 1);
                    low.extend_from_slice(&word[..p]);
                    low.push(l);
                    low.extend_from_slice(&word[p + 2..]);
                    lower.push((offsets[n - 1] + word_index(d, &low), c));
                }
            }
            rules.push(Rule {
                idx: offsets[n] + idx,
                swapped: offsets[n] + word_index(d, &sw),
                lower,
            });
        }
        order.push(rules);
        sorted.push(sorted_n);
    }
    let mut out = Vec::new();
    for deg in 0..=n_max {
        for &s in &sorted[deg] {
            let mut v = vec![0.0; total];
            v[offsets[deg] + s] = 1.0;
            for rules in order.iter().skip(deg) {
                for r in rules {
                    let mut val = v[r.swapped];
                    for &(li, c) in &r.lower {
                        val += c * v[li];
                    }
                    v[r.idx] = val;
                }
            }
            out.push((deg, v));
        }
    }
    out
}
