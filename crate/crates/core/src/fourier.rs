//! Band-limited functions stored by their nonabelian Fourier coefficients.
//!
//! Convention: `f(x) = sum_l d_l tr(F(l) pi_l(x))` with
//! `F(l) = int f(x) pi_l(x)^* dx`. The matrix entry `pi_ij` therefore has
//! `F = E_ji / d`, and the left-invariant derivative `X f` has coefficients
//! `pi(X) F`.

use crate::error::{HeatlabError, Result};
use crate::group::{
    CompactGroup, ComplexGroupPoint, Factor, FactorLabel, FactorPoint, GroupPoint, Irrep,
    IrrepLabel,
};
use crate::numeric::{frob, C64};
use crate::quadrature::{haar_quadrature_with, QuadratureRule, DEFAULT_NODE_CAP};
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct FourierCoefficients {
    group: CompactGroup,
    blocks: Vec<(Irrep, DMatrix<C64>)>,
}

impl FourierCoefficients {
    pub fn zeros(group: &CompactGroup) -> Self {
        Self {
            group: group.clone(),
            blocks: Vec::new(),
        }
    }

    pub fn constant(group: &CompactGroup, c: C64) -> Self {
        let mut f = Self::zeros(group);
        f.add_block(IrrepLabel::trivial(group), DMatrix::from_element(1, 1, c))
            .unwrap();
        f
    }

    /// The matrix entry `x -> pi_l(x)_{ij}`.
    pub fn matrix_entry(
        group: &CompactGroup,
        label: IrrepLabel,
        i: usize,
        j: usize,
    ) -> Result<Self> {
        let ir = Irrep::new(group, label)?;
        if i >= ir.dim || j >= ir.dim {
            return Err(HeatlabError::InvalidArgument(format!(
                "entry ({i},{j}) out of range"
            )));
        }
        let mut m = DMatrix::zeros(ir.dim, ir.dim);
        m[(j, i)] = C64::from(1.0 / ir.dim as f64);
        let mut f = Self::zeros(group);
        f.add_irrep_block(ir, m);
        Ok(f)
    }

    /// The character `chi_l`.
    pub fn character(group: &CompactGroup, label: IrrepLabel) -> Result<Self> {
        let ir = Irrep::new(group, label)?;
        let m = DMatrix::identity(ir.dim, ir.dim) * C64::from(1.0 / ir.dim as f64);
        let mut f = Self::zeros(group);
        f.add_irrep_block(ir, m);
        Ok(f)
    }

    /// `c e^{i n.theta}` on a torus group.
    pub fn torus_mode(group: &CompactGroup, n: &[i64], c: C64) -> Result<Self> {
        let mut f = Self::zeros(group);
        f.add_block(
            IrrepLabel::torus(n.to_vec()),
            DMatrix::from_element(1, 1, c),
        )?;
        Ok(f)
    }

    /// Random combination of all matrix entries with the given labels.
    pub fn random<R: Rng + ?Sized>(
        group: &CompactGroup,
        labels: &[IrrepLabel],
        rng: &mut R,
    ) -> Self {
        let mut f = Self::zeros(group);
        for l in labels {
            let ir = Irrep::new(group, l.clone()).expect("label matches group");
            let d = ir.dim;
            let m = DMatrix::from_fn(d, d, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            f.add_irrep_block(ir, m);
        }
        f
    }

    pub fn group(&self) -> &CompactGroup {
        &self.group
    }

    pub fn blocks(&self) -> &[(Irrep, DMatrix<C64>)] {
        &self.blocks
    }

    pub fn get(&self, label: &IrrepLabel) -> Option<&DMatrix<C64>> {
        self.blocks
            .binary_search_by(|(ir, _)| ir.label.cmp(label))
            .ok()
            .map(|i| &self.blocks[i].1)
    }

    pub fn add_block(&mut self, label: IrrepLabel, m: DMatrix<C64>) -> Result<()> {
        let ir = Irrep::new(&self.group, label)?;
        if m.nrows() != ir.dim || m.ncols() != ir.dim {
            return Err(HeatlabError::InvalidArgument(format!(
                "block for {} must be {}x{}",
                ir.label, ir.dim, ir.dim
            )));
        }
        self.add_irrep_block(ir, m);
        Ok(())
    }

    pub fn add_irrep_block(&mut self, ir: Irrep, m: DMatrix<C64>) {
        match self
            .blocks
            .binary_search_by(|(b, _)| b.label.cmp(&ir.label))
        {
            Ok(i) => self.blocks[i].1 += m,
            Err(i) => self.blocks.insert(i, (ir, m)),
        }
    }

    pub fn labels(&self) -> Vec<IrrepLabel> {
        self.blocks.iter().map(|(ir, _)| ir.label.clone()).collect()
    }

    fn map_blocks<F: Fn(&Irrep, &DMatrix<C64>) -> DMatrix<C64>>(&self, f: F) -> Self {
        Self {
            group: self.group.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|(ir, m)| (ir.clone(), f(ir, m)))
                .collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_blocks(|_, m| m * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (ir, m) in &other.blocks {
            out.add_irrep_block(ir.clone(), m.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::from(-1.0)))
    }

    /// `e^{t Delta/2} f`, valid for any real `t` on band-limited data.
    pub fn heat(&self, t: f64) -> Self {
        self.map_blocks(|ir, m| m * C64::from((-t * ir.casimir / 2.0).exp()))
    }

    /// Left-invariant derivative `X_k f`.
    pub fn derivative(&self, k: usize) -> Self {
        self.map_blocks(|ir, m| &ir.generators[k] * m)
    }

    /// `X_{w_1} ... X_{w_n} f`.
    pub fn derivative_word(&self, word: &[usize]) -> Self {
        self.map_blocks(|ir, m| {
            let mut out = m.clone();
            for &k in word.iter().rev() {
                out = &ir.generators[k] * out;
            }
            out
        })
    }

    /// Derivative along a general algebra vector.
    pub fn derivative_along(&self, y: &[f64]) -> Self {
        self.map_blocks(|ir, m| ir.algebra_element(y) * m)
    }

    pub fn eval(&self, x: &GroupPoint) -> C64 {
        let mut s = C64::from(0.0);
        for (ir, m) in &self.blocks {
            s += trace_against(ir, m, x) * ir.dim as f64;
        }
        s
    }

    /// Holomorphic extension to `K_C`.
    pub fn eval_complex(&self, g: &ComplexGroupPoint) -> C64 {
        let mut s = C64::from(0.0);
        for (ir, m) in &self.blocks {
            let p = ir.eval_complex(g);
            s += (m * p).trace() * ir.dim as f64;
        }
        s
    }

    /// `||f||^2` in `L^2(K, dx)` by Plancherel.
    pub fn l2_norm_sq(&self) -> f64 {
        self.blocks
            .iter()
            .map(|(ir, m)| ir.dim as f64 * frob(m).powi(2))
            .sum()
    }

    /// `<self, other>` in `L^2(K, dx)`, conjugate-linear in `self`.
    pub fn l2_inner(&self, other: &Self) -> C64 {
        let mut s = C64::from(0.0);
        for (ir, m) in &self.blocks {
            if let Some(n) = other.get(&ir.label) {
                s += (m.adjoint() * n).trace() * ir.dim as f64;
            }
        }
        s
    }

    /// Value of `e^{t Delta/2} f` at the identity.
    pub fn heat_at_identity(&self, t: f64) -> C64 {
        self.blocks
            .iter()
            .map(|(ir, m)| m.trace() * (ir.dim as f64 * (-t * ir.casimir / 2.0).exp()))
            .sum()
    }

    /// Largest absolute coefficient change needed to make `self` equal `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = self.sub(other);
        d.blocks
            .iter()
            .map(|(_, m)| m.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// Per-factor degree: max `|n_k|` on torus factors, twice the max spin on SU(2).
    pub fn band(&self) -> Vec<usize> {
        let mut b = vec![0usize; self.group.factors().len()];
        for (ir, m) in &self.blocks {
            if frob(m) == 0.0 {
                continue;
            }
            for (i, l) in ir.label.0.iter().enumerate() {
                b[i] = b[i].max(label_degree(l));
            }
        }
        b
    }

    pub fn max_casimir(&self) -> f64 {
        self.blocks
            .iter()
            .map(|(ir, _)| ir.casimir)
            .fold(0.0, f64::max)
    }

    /// Drops blocks that are identically zero.
    pub fn pruned(&self) -> Self {
        Self {
            group: self.group.clone(),
            blocks: self
                .blocks
                .iter()
                .filter(|(_, m)| frob(m) > 0.0)
                .cloned()
                .collect(),
        }
    }

    /// Coefficients of `f` projected onto the given irreps by quadrature.
    pub fn project<F>(
        group: &CompactGroup,
        labels: &[IrrepLabel],
        rule: &QuadratureRule,
        f: F,
    ) -> Self
    where
        F: Fn(&GroupPoint) -> C64 + Sync,
    {
        let vals: Vec<C64> = rule.nodes.par_iter().map(&f).collect();
        let blocks: Vec<(Irrep, DMatrix<C64>)> = labels
            .par_iter()
            .map(|l| {
                let ir = Irrep::new(group, l.clone()).expect("label matches group");
                let d = ir.dim;
                let partial: Vec<DMatrix<C64>> = rule
                    .nodes
                    .par_chunks(crate::numeric::REDUCE_CHUNK)
                    .enumerate()
                    .map(|(c, chunk)| {
                        let mut acc = DMatrix::<C64>::zeros(d, d);
                        for (o, x) in chunk.iter().enumerate() {
                            let i = c * crate::numeric::REDUCE_CHUNK + o;
                            let w = vals[i] * rule.weights[i];
                            if w == C64::from(0.0) {
                                continue;
                            }
                            acc += ir.eval(x).adjoint() * w;
                        }
                        acc
                    })
                    .collect();
                let mut m = DMatrix::<C64>::zeros(d, d);
                for p in partial {
                    m += p;
                }
                (ir, m)
            })
            .collect();
        let mut out = Self::zeros(group);
        for (ir, m) in blocks {
            out.add_irrep_block(ir, m);
        }
        out
    }

    /// Fourier coefficients of `conj(self) * other`, exact for band-limited data.
    pub fn conj_product(&self, other: &Self) -> Result<Self> {
        let b1 = self.band();
        let b2 = other.band();
        let band: Vec<usize> = b1.iter().zip(&b2).map(|(a, b)| a + b).collect();
        let labels = labels_within_band(&self.group, &band);
        let ex = exactness_for_band(&self.group, &band);
        let rule = haar_quadrature_with(&self.group, &ex, DEFAULT_NODE_CAP)?;
        let p = Self::project(&self.group, &labels, &rule, |x| {
            self.eval(x).conj() * other.eval(x)
        });
        Ok(p.pruned_below(1e-15 * (1.0 + self.l2_norm_sq().sqrt() * other.l2_norm_sq().sqrt())))
    }

    /// Drops blocks with no entry larger than `tol`.
    pub fn pruned_below(&self, tol: f64) -> Self {
        Self {
            group: self.group.clone(),
            blocks: self
                .blocks
                .iter()
                .filter(|(_, m)| m.iter().any(|z| z.norm() > tol))
                .cloned()
                .collect(),
        }
    }
}

/// `tr(M pi(x))` with a fast path for one-dimensional torus characters.
fn trace_against(ir: &Irrep, m: &DMatrix<C64>, x: &GroupPoint) -> C64 {
    if ir.dim == 1 {
        return m[(0, 0)] * ir.character(x);
    }
    let p = ir.eval(x);
    let mut s = C64::from(0.0);
    for i in 0..ir.dim {
        for j in 0..ir.dim {
            s += m[(i, j)] * p[(j, i)];
        }
    }
    s
}

pub(crate) fn label_degree(l: &FactorLabel) -> usize {
    match l {
        FactorLabel::Torus(n) => n
            .iter()
            .map(|v| v.unsigned_abs() as usize)
            .max()
            .unwrap_or(0),
        FactorLabel::Su2(tw) => *tw as usize,
    }
}

/// All labels whose per-factor degree is within `band`.
pub fn labels_within_band(group: &CompactGroup, band: &[usize]) -> Vec<IrrepLabel> {
    let mut out: Vec<Vec<FactorLabel>> = vec![Vec::new()];
    for (f, &b) in group.factors().iter().zip(band) {
        let choices: Vec<FactorLabel> = match f {
            Factor::Torus(d) => {
                let r = b as i64;
                let side = (2 * r + 1) as usize;
                (0..side.pow(*d as u32))
                    .map(|mut idx| {
                        let mut n = vec![0i64; *d];
                        for k in (0..*d).rev() {
                            n[k] = (idx % side) as i64 - r;
                            idx /= side;
                        }
                        FactorLabel::Torus(n)
                    })
                    .collect()
            }
            Factor::Su2 => (0..=b as u32).map(FactorLabel::Su2).collect(),
        };
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for prefix in &out {
            for c in &choices {
                let mut p = prefix.clone();
                p.push(c.clone());
                next.push(p);
            }
        }
        out = next;
    }
    let mut labels: Vec<IrrepLabel> = out.into_iter().map(IrrepLabel).collect();
    labels.sort();
    labels
}

/// Per-factor quadrature exactness that integrates the product of two
/// functions of the given band exactly.
pub fn exactness_for_band(group: &CompactGroup, band: &[usize]) -> Vec<usize> {
    group
        .factors()
        .iter()
        .zip(band)
        .map(|(f, &b)| match f {
            Factor::Torus(_) => b.max(1),
            Factor::Su2 => b.div_ceil(2).max(1),
        })
        .collect()
}

/// Torus angles of a single-factor torus point.
pub fn torus_angles(x: &GroupPoint) -> Vec<f64> {
    let mut out = Vec::new();
    for p in &x.0 {
        if let FactorPoint::Torus(th) = p {
            out.extend_from_slice(th);
        }
    }
    out
}
