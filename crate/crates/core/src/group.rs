//! Compact groups of the form torus^d x SU(2) x ..., their Lie algebras,
//! group points (real and complexified) and irreducible representations.

use crate::error::{HeatlabError, Result};
use crate::numeric::{binomial, factorial, frob, C64};
use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::fmt;

/// A single factor of a product group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    Torus(usize),
    Su2,
}

impl Factor {
    pub fn dim(&self) -> usize {
        match self {
            Factor::Torus(d) => *d,
            Factor::Su2 => 3,
        }
    }

    fn parse(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "su2" || s == "su(2)" {
            return Ok(Factor::Su2);
        }
        let rest = s
            .strip_prefix("torus")
            .ok_or_else(|| HeatlabError::UnsupportedGroup(s.clone()))?;
        let digits = rest
            .trim_start_matches([':', '('])
            .trim_end_matches(')')
            .trim();
        let d = if digits.is_empty() {
            1
        } else {
            digits
                .parse::<usize>()
                .map_err(|_| HeatlabError::UnsupportedGroup(s.clone()))?
        };
        if d == 0 {
            return Err(HeatlabError::UnsupportedGroup(format!(
                "{s}: torus dimension must be >= 1"
            )));
        }
        Ok(Factor::Torus(d))
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Torus(d) => write!(f, "torus({d})"),
            Factor::Su2 => write!(f, "su2"),
        }
    }
}

/// Orthonormal basis of su(2) under `<X,Y> = Re tr(X* Y)`: `X_k = i sigma_k / sqrt 2`.
pub fn su2_basis() -> [Matrix2<C64>; 3] {
    let z = C64::new(0.0, 0.0);
    let s = 1.0 / SQRT_2;
    let i = C64::new(0.0, s);
    let r = C64::new(s, 0.0);
    [
        Matrix2::new(z, i, i, z),
        Matrix2::new(z, r, -r, z),
        Matrix2::new(i, z, z, -i),
    ]
}

/// A connected compact group given as an ordered product of factors.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactGroup {
    factors: Vec<Factor>,
    offsets: Vec<usize>,
    dim: usize,
    structure: Vec<f64>,
    labels: Vec<String>,
}

impl CompactGroup {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(HeatlabError::UnsupportedGroup("empty product".into()));
        }
        let mut offsets = Vec::with_capacity(factors.len());
        let mut dim = 0;
        for f in &factors {
            if let Factor::Torus(0) = f {
                return Err(HeatlabError::UnsupportedGroup("torus(0)".into()));
            }
            offsets.push(dim);
            dim += f.dim();
        }
        let mut structure = vec![0.0; dim * dim * dim];
        let mut labels = Vec::with_capacity(dim);
        for (fi, f) in factors.iter().enumerate() {
            let off = offsets[fi];
            match f {
                Factor::Torus(d) => {
                    for k in 0..*d {
                        labels.push(format!("T{fi}.X{}", k + 1));
                    }
                }
                Factor::Su2 => {
                    let b = su2_basis();
                    for j in 0..3 {
                        for k in 0..3 {
                            let br = b[j] * b[k] - b[k] * b[j];
                            for l in 0..3 {
                                let c = (br.adjoint() * b[l]).trace().re;
                                let c = if c.abs() < 1e-15 { 0.0 } else { c };
                                structure[((off + l) * dim + off + j) * dim + off + k] = c;
                            }
                        }
                    }
                    for k in 0..3 {
                        labels.push(format!("S{fi}.X{}", k + 1));
                    }
                }
            }
        }
        Ok(Self {
            factors,
            offsets,
            dim,
            structure,
            labels,
        })
    }

    pub fn torus(d: usize) -> Self {
        Self::new(vec![Factor::Torus(d)]).expect("torus dimension must be positive")
    }

    pub fn su2() -> Self {
        Self::new(vec![Factor::Su2]).unwrap()
    }

    pub fn product(parts: &[CompactGroup]) -> Result<Self> {
        Self::new(
            parts
                .iter()
                .flat_map(|g| g.factors.iter().copied())
                .collect(),
        )
    }

    /// Parse a descriptor such as `"su2"`, `"torus:2"` or
    /// `{"product": ["torus:2", "su2"]}`.
    pub fn from_descriptor(v: &serde_json::Value) -> Result<Self> {
        match v {
            serde_json::Value::String(s) => Self::new(vec![Factor::parse(s)?]),
            serde_json::Value::Object(m) => {
                if let Some(serde_json::Value::Array(parts)) = m.get("product") {
                    let mut fs = Vec::new();
                    for p in parts {
                        match p {
                            serde_json::Value::String(s) => fs.push(Factor::parse(s)?),
                            other => {
                                let g = Self::from_descriptor(other)?;
                                fs.extend(g.factors);
                            }
                        }
                    }
                    Self::new(fs)
                } else if let Some(d) = m.get("torus").and_then(|d| d.as_u64()) {
                    Self::new(vec![Factor::Torus(d as usize)])
                } else {
                    Err(HeatlabError::UnsupportedGroup(v.to_string()))
                }
            }
            other => Err(HeatlabError::UnsupportedGroup(other.to_string())),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if trimmed.starts_with('{') || trimmed.starts_with('"') {
            let v: serde_json::Value = serde_json::from_str(trimmed)?;
            return Self::from_descriptor(&v);
        }
        let fs: Result<Vec<Factor>> = trimmed.split(['x', '*', ',']).map(Factor::parse).collect();
        Self::new(fs?)
    }

    pub fn descriptor(&self) -> serde_json::Value {
        let names: Vec<String> = self
            .factors
            .iter()
            .map(|f| match f {
                Factor::Torus(d) => format!("torus:{d}"),
                Factor::Su2 => "su2".to_string(),
            })
            .collect();
        if names.len() == 1 {
            serde_json::Value::String(names[0].clone())
        } else {
            serde_json::json!({ "product": names })
        }
    }

    pub fn name(&self) -> String {
        if self.factors.len() == 1 {
            self.factors[0].to_string()
        } else {
            let parts: Vec<String> = self.factors.iter().map(|f| f.to_string()).collect();
            format!("product({})", parts.join(","))
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_abelian(&self) -> bool {
        self.factors.iter().all(|f| matches!(f, Factor::Torus(_)))
    }

    pub fn has_torus_factor(&self) -> bool {
        self.factors.iter().any(|f| matches!(f, Factor::Torus(_)))
    }

    /// `c[l][j][k]` with `[X_j, X_k] = sum_l c[l][j][k] X_l`.
    #[inline]
    pub fn c(&self, l: usize, j: usize, k: usize) -> f64 {
        self.structure[(l * self.dim + j) * self.dim + k]
    }

    pub fn structure_constants(&self) -> &[f64] {
        &self.structure
    }

    /// Coordinates of `[X_j, X_k]`.
    pub fn bracket(&self, j: usize, k: usize) -> Vec<f64> {
        (0..self.dim).map(|l| self.c(l, j, k)).collect()
    }

    /// Returns a copy whose structure constants have been corrupted by `eps`
    /// in one entry. Used to exercise the invariant checks.
    pub fn with_perturbed_structure(&self, eps: f64) -> Self {
        let mut g = self.clone();
        g.structure[0] += eps;
        if g.dim > 1 {
            g.structure[1] += eps;
        }
        g
    }

    /// Verifies antisymmetry, total antisymmetry (Ad-invariance), the Jacobi
    /// identity and block-diagonality across factors.
    pub fn check_invariants(&self) -> Result<()> {
        let d = self.dim;
        let tol = 1e-12;
        for l in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let c = self.c(l, j, k);
                    if c != -self.c(l, k, j) {
                        return Err(HeatlabError::Invariant(format!(
                            "antisymmetry fails at c[{l}][{j}][{k}]"
                        )));
                    }
                    if (c + self.c(j, l, k)).abs() > tol {
                        return Err(HeatlabError::Invariant(format!(
                            "inner product not Ad-invariant at c[{l}][{j}][{k}]"
                        )));
                    }
                    if c != 0.0 && self.factor_of(l) != self.factor_of(j)
                        || c != 0.0 && self.factor_of(j) != self.factor_of(k)
                    {
                        return Err(HeatlabError::Invariant(format!(
                            "structure constants mix factors at c[{l}][{j}][{k}]"
                        )));
                    }
                }
            }
        }
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for m in 0..d {
                        let mut s = 0.0;
                        for l in 0..d {
                            s += self.c(l, b, c) * self.c(m, a, l)
                                + self.c(l, c, a) * self.c(m, b, l)
                                + self.c(l, a, b) * self.c(m, c, l);
                        }
                        if s.abs() > tol {
                            return Err(HeatlabError::Invariant(format!(
                                "Jacobi identity fails for ({a},{b},{c}) component {m}: {s:e}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Index of the factor containing basis vector `k`.
    pub fn factor_of(&self, k: usize) -> usize {
        match self.offsets.binary_search(&k) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint(
            self.factors
                .iter()
                .map(|f| match f {
                    Factor::Torus(d) => FactorPoint::Torus(vec![0.0; *d]),
                    Factor::Su2 => FactorPoint::Su2(Matrix2::identity()),
                })
                .collect(),
        )
    }

    /// Exponential of `sum_k y_k X_k`.
    pub fn exp_map(&self, y: &[f64]) -> GroupPoint {
        assert_eq!(y.len(), self.dim, "algebra vector has wrong length");
        GroupPoint(
            self.factors
                .iter()
                .zip(&self.offsets)
                .map(|(f, &off)| match f {
                    Factor::Torus(d) => FactorPoint::Torus(
                        y[off..off + d]
                            .iter()
                            .map(|v| v.rem_euclid(2.0 * PI))
                            .collect(),
                    ),
                    Factor::Su2 => {
                        let b = su2_basis();
                        let m = b[0] * C64::from(y[off])
                            + b[1] * C64::from(y[off + 1])
                            + b[2] * C64::from(y[off + 2]);
                        FactorPoint::Su2(exp_traceless(&m))
                    }
                })
                .collect(),
        )
    }

    /// Exponential of a complexified algebra element `sum_k w_k X_k`.
    pub fn exp_complex(&self, w: &[C64]) -> ComplexGroupPoint {
        assert_eq!(w.len(), self.dim, "algebra vector has wrong length");
        ComplexGroupPoint(
            self.factors
                .iter()
                .zip(&self.offsets)
                .map(|(f, &off)| match f {
                    Factor::Torus(d) => ComplexFactorPoint::Torus(w[off..off + d].to_vec()),
                    Factor::Su2 => {
                        let b = su2_basis();
                        let m = b[0] * w[off] + b[1] * w[off + 1] + b[2] * w[off + 2];
                        ComplexFactorPoint::Su2(exp_traceless(&m))
                    }
                })
                .collect(),
        )
    }

    /// `x e^{iY}` for `x` in K and `Y` in the Lie algebra.
    pub fn from_polar(&self, x: &GroupPoint, y: &[f64]) -> ComplexGroupPoint {
        let iy: Vec<C64> = y.iter().map(|v| C64::new(0.0, *v)).collect();
        x.complexify().mul(&self.exp_complex(&iy))
    }

    /// Haar-random point (uniform angles, normalized Gaussian quaternion).
    pub fn random_point<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> GroupPoint {
        use rand_distr::{Distribution, StandardNormal};
        GroupPoint(
            self.factors
                .iter()
                .map(|f| match f {
                    Factor::Torus(d) => FactorPoint::Torus(
                        (0..*d).map(|_| rng.random::<f64>() * 2.0 * PI).collect(),
                    ),
                    Factor::Su2 => {
                        let q: Vec<f64> = (0..4).map(|_| StandardNormal.sample(rng)).collect();
                        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                        FactorPoint::Su2(quaternion_to_su2([
                            q[0] / n,
                            q[1] / n,
                            q[2] / n,
                            q[3] / n,
                        ]))
                    }
                })
                .collect(),
        )
    }
}

impl fmt::Display for CompactGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// `exp(M)` for a traceless 2x2 matrix, using `M^2 = -det(M) I`.
pub fn exp_traceless(m: &Matrix2<C64>) -> Matrix2<C64> {
    let mu2 = -m.determinant();
    let mu = mu2.sqrt();
    let (ch, sh) = if mu.norm() < 1e-4 {
        // Taylor series of cosh(mu) and sinh(mu)/mu in mu^2.
        let c = C64::from(1.0) + mu2 / 2.0 + mu2 * mu2 / 24.0 + mu2 * mu2 * mu2 / 720.0;
        let s = C64::from(1.0) + mu2 / 6.0 + mu2 * mu2 / 120.0 + mu2 * mu2 * mu2 / 5040.0;
        (c, s)
    } else {
        (mu.cosh(), mu.sinh() / mu)
    };
    Matrix2::identity() * ch + m * sh
}

/// Unit quaternion `(a,b,c,d)` as `[[a+ib, c+id], [-c+id, a-ib]]`.
pub fn quaternion_to_su2(q: [f64; 4]) -> Matrix2<C64> {
    Matrix2::new(
        C64::new(q[0], q[1]),
        C64::new(q[2], q[3]),
        C64::new(-q[2], q[3]),
        C64::new(q[0], -q[1]),
    )
}

/// Coefficients `w` with `exp(sum w_k X_k) = x`, taking the principal branch
/// (rotation angle below `pi`).
pub fn su2_log(x: &Matrix2<C64>) -> [f64; 3] {
    let b = su2_basis();
    let skew = (x - x.adjoint()) * C64::from(0.5);
    let y: Vec<f64> = b
        .iter()
        .map(|bk| (bk.adjoint() * skew).trace().re)
        .collect();
    let s = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt() / std::f64::consts::SQRT_2;
    let c = x.trace().re / 2.0;
    let theta = s.atan2(c);
    let scale = if s < 1e-300 { 1.0 } else { theta / s };
    [y[0] * scale, y[1] * scale, y[2] * scale]
}

/// Riemannian distance from the identity in SU(2) for the metric `Re tr(X*Y)`.
pub fn su2_distance(x: &Matrix2<C64>) -> f64 {
    let c = (x.trace().re / 2.0).clamp(-1.0, 1.0);
    SQRT_2 * c.acos()
}

#[derive(Clone, Debug, PartialEq)]
pub enum FactorPoint {
    Torus(Vec<f64>),
    Su2(Matrix2<C64>),
}

/// A point of K stored factor by factor.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPoint(pub Vec<FactorPoint>);

#[derive(Clone, Debug, PartialEq)]
pub enum ComplexFactorPoint {
    Torus(Vec<C64>),
    Su2(Matrix2<C64>),
}

/// A point of the complexification `K_C`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexGroupPoint(pub Vec<ComplexFactorPoint>);

impl GroupPoint {
    pub fn torus(theta: Vec<f64>) -> Self {
        GroupPoint(vec![FactorPoint::Torus(theta)])
    }

    pub fn su2(m: Matrix2<C64>) -> Self {
        GroupPoint(vec![FactorPoint::Su2(m)])
    }

    pub fn mul(&self, other: &GroupPoint) -> GroupPoint {
        GroupPoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| match (a, b) {
                    (FactorPoint::Torus(x), FactorPoint::Torus(y)) => FactorPoint::Torus(
                        x.iter()
                            .zip(y)
                            .map(|(p, q)| (p + q).rem_euclid(2.0 * PI))
                            .collect(),
                    ),
                    (FactorPoint::Su2(x), FactorPoint::Su2(y)) => FactorPoint::Su2(x * y),
                    _ => panic!("group points belong to different groups"),
                })
                .collect(),
        )
    }

    pub fn inverse(&self) -> GroupPoint {
        GroupPoint(
            self.0
                .iter()
                .map(|a| match a {
                    FactorPoint::Torus(x) => {
                        FactorPoint::Torus(x.iter().map(|p| (-p).rem_euclid(2.0 * PI)).collect())
                    }
                    FactorPoint::Su2(x) => FactorPoint::Su2(x.adjoint()),
                })
                .collect(),
        )
    }

    pub fn complexify(&self) -> ComplexGroupPoint {
        ComplexGroupPoint(
            self.0
                .iter()
                .map(|a| match a {
                    FactorPoint::Torus(x) => {
                        ComplexFactorPoint::Torus(x.iter().map(|p| C64::new(*p, 0.0)).collect())
                    }
                    FactorPoint::Su2(x) => ComplexFactorPoint::Su2(*x),
                })
                .collect(),
        )
    }

    /// Geodesic distance from the identity.
    pub fn distance_from_identity(&self) -> f64 {
        self.0
            .iter()
            .map(|a| match a {
                FactorPoint::Torus(x) => x.iter().map(|p| wrap_angle(*p).powi(2)).sum::<f64>(),
                FactorPoint::Su2(x) => su2_distance(x).powi(2),
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Max deviation from the point's defining constraints (unitarity, det 1).
    pub fn constraint_error(&self) -> f64 {
        self.0
            .iter()
            .map(|a| match a {
                FactorPoint::Torus(_) => 0.0,
                FactorPoint::Su2(x) => {
                    let u = (x.adjoint() * x - Matrix2::identity())
                        .iter()
                        .map(|z| z.norm())
                        .fold(0.0, f64::max);
                    u.max((x.determinant() - C64::from(1.0)).norm())
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &GroupPoint, tol: f64) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| match (a, b) {
            (FactorPoint::Torus(x), FactorPoint::Torus(y)) => {
                x.iter().zip(y).all(|(p, q)| wrap_angle(p - q).abs() <= tol)
            }
            (FactorPoint::Su2(x), FactorPoint::Su2(y)) => (x - y).iter().all(|z| z.norm() <= tol),
            _ => false,
        })
    }
}

/// Representative of an angle in `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

impl ComplexGroupPoint {
    pub fn torus(z: Vec<C64>) -> Self {
        ComplexGroupPoint(vec![ComplexFactorPoint::Torus(z)])
    }

    pub fn su2(m: Matrix2<C64>) -> Self {
        ComplexGroupPoint(vec![ComplexFactorPoint::Su2(m)])
    }

    pub fn mul(&self, other: &ComplexGroupPoint) -> ComplexGroupPoint {
        ComplexGroupPoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| match (a, b) {
                    (ComplexFactorPoint::Torus(x), ComplexFactorPoint::Torus(y)) => {
                        ComplexFactorPoint::Torus(x.iter().zip(y).map(|(p, q)| p + q).collect())
                    }
                    (ComplexFactorPoint::Su2(x), ComplexFactorPoint::Su2(y)) => {
                        ComplexFactorPoint::Su2(x * y)
                    }
                    _ => panic!("group points belong to different groups"),
                })
                .collect(),
        )
    }

    /// Entrywise complex conjugate (`z -> conj z` on torus factors).
    pub fn conj(&self) -> ComplexGroupPoint {
        ComplexGroupPoint(
            self.0
                .iter()
                .map(|a| match a {
                    ComplexFactorPoint::Torus(z) => {
                        ComplexFactorPoint::Torus(z.iter().map(|v| v.conj()).collect())
                    }
                    ComplexFactorPoint::Su2(g) => ComplexFactorPoint::Su2(g.map(|v| v.conj())),
                })
                .collect(),
        )
    }

    /// Polar decomposition `g = x e^{iY}` with `x` in K and `Y` in the algebra.
    pub fn polar(&self) -> (GroupPoint, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for a in &self.0 {
            match a {
                ComplexFactorPoint::Torus(z) => {
                    xs.push(FactorPoint::Torus(
                        z.iter().map(|v| v.re.rem_euclid(2.0 * PI)).collect(),
                    ));
                    ys.extend(z.iter().map(|v| v.im));
                }
                ComplexFactorPoint::Su2(g) => {
                    let (x, y) = su2_polar(g);
                    xs.push(FactorPoint::Su2(x));
                    ys.extend_from_slice(&y);
                }
            }
        }
        (GroupPoint(xs), ys)
    }

    /// Max deviation from `det = 1` on SU(2) factors.
    pub fn det_error(&self) -> f64 {
        self.0
            .iter()
            .map(|a| match a {
                ComplexFactorPoint::Torus(_) => 0.0,
                ComplexFactorPoint::Su2(g) => (g.determinant() - C64::from(1.0)).norm(),
            })
            .fold(0.0, f64::max)
    }
}

/// Polar decomposition of `g` in SL(2,C): `g = x exp(i sum y_k X_k)`.
pub fn su2_polar(g: &Matrix2<C64>) -> (Matrix2<C64>, [f64; 3]) {
    // g* g = exp(2iY) is positive Hermitian with determinant one.
    let h = g.adjoint() * g;
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let b = h[(0, 1)];
    let half_tr = (a + d) / 2.0;
    let disc = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
    let lam = half_tr + disc;
    // log h = log(lam) * (h - half_tr I)/disc, because the eigenvalues are lam, 1/lam.
    let log_lam = lam.ln();
    let herm = if disc > 1e-14 {
        (h - Matrix2::identity() * C64::from(half_tr)) * C64::from(log_lam / disc)
    } else {
        Matrix2::zeros()
    };
    // i Y = herm / 2, so Y = -i herm / 2.
    let y_mat = herm * C64::new(0.0, -0.5);
    let basis = su2_basis();
    let mut y = [0.0; 3];
    for k in 0..3 {
        y[k] = (y_mat.adjoint() * basis[k]).trace().re;
    }
    let p_inv = exp_traceless(&(herm * C64::from(-0.5)));
    (g * p_inv, y)
}

/// Label of a factor irrep: an integer frequency vector or twice the spin.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FactorLabel {
    Torus(Vec<i64>),
    Su2(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IrrepLabel(pub Vec<FactorLabel>);

impl IrrepLabel {
    pub fn torus(n: Vec<i64>) -> Self {
        IrrepLabel(vec![FactorLabel::Torus(n)])
    }

    /// Spin `twice/2` irrep of SU(2).
    pub fn spin(twice: u32) -> Self {
        IrrepLabel(vec![FactorLabel::Su2(twice)])
    }

    pub fn trivial(g: &CompactGroup) -> Self {
        IrrepLabel(
            g.factors()
                .iter()
                .map(|f| match f {
                    Factor::Torus(d) => FactorLabel::Torus(vec![0; *d]),
                    Factor::Su2 => FactorLabel::Su2(0),
                })
                .collect(),
        )
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|f| match f {
            FactorLabel::Torus(n) => n.iter().all(|v| *v == 0),
            FactorLabel::Su2(n) => *n == 0,
        })
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| match l {
                FactorLabel::Torus(n) => format!("n={n:?}"),
                FactorLabel::Su2(tw) if tw % 2 == 0 => format!("j={}", tw / 2),
                FactorLabel::Su2(tw) => format!("j={tw}/2"),
            })
            .collect();
        f.write_str(&parts.join("x"))
    }
}

/// Matrix of `g` acting on homogeneous polynomials of degree `n` in two
/// variables, in the orthonormal basis `e1^a e2^(n-a) / sqrt(a!(n-a)!)`
/// indexed by `n - a`. Holomorphic in `g`, unitary for unitary `g`.
pub fn sym_power(g: &Matrix2<C64>, n: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(n + 1, n + 1);
    let fact: Vec<f64> = (0..=n).map(factorial).collect();
    for a in 0..=n {
        let b = n - a;
        // (g11 x + g21 y)^a (g12 x + g22 y)^b, coefficients by power of x.
        let mut left = vec![C64::from(0.0); a + 1];
        for p in 0..=a {
            left[p] = binomial(a, p) * g[(0, 0)].powu(p as u32) * g[(1, 0)].powu((a - p) as u32);
        }
        let mut right = vec![C64::from(0.0); b + 1];
        for p in 0..=b {
            right[p] = binomial(b, p) * g[(0, 1)].powu(p as u32) * g[(1, 1)].powu((b - p) as u32);
        }
        let norm_a = (fact[a] * fact[b]).sqrt();
        for (p, l) in left.iter().enumerate() {
            for (q, r) in right.iter().enumerate() {
                let pp = p + q;
                let scale = (fact[pp] * fact[n - pp]).sqrt() / norm_a;
                m[(n - pp, n - a)] += l * r * scale;
            }
        }
    }
    m
}

/// Derivative of `sym_power` at the identity in direction `x` (any 2x2 matrix).
pub fn sym_power_lie(x: &Matrix2<C64>, n: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(n + 1, n + 1);
    let fact: Vec<f64> = (0..=n).map(factorial).collect();
    let basis_norm = |a: usize| (fact[a] * fact[n - a]).sqrt();
    for a in 0..=n {
        let b = n - a;
        let col = n - a;
        let na = basis_norm(a);
        m[(col, col)] += x[(0, 0)] * a as f64 + x[(1, 1)] * b as f64;
        if a > 0 {
            let p = a - 1;
            m[(n - p, col)] += x[(1, 0)] * (a as f64 * basis_norm(p) / na);
        }
        if b > 0 {
            let p = a + 1;
            m[(n - p, col)] += x[(0, 1)] * (b as f64 * basis_norm(p) / na);
        }
    }
    m
}

/// An irreducible unitary representation of a product group: a tensor
/// product of factor irreps, factor 0 most significant in the Kronecker order.
#[derive(Clone, Debug)]
pub struct Irrep {
    pub label: IrrepLabel,
    pub dim: usize,
    pub casimir: f64,
    pub generators: Vec<DMatrix<C64>>,
    factor_dims: Vec<usize>,
}

fn factor_label_dim(l: &FactorLabel) -> usize {
    match l {
        FactorLabel::Torus(_) => 1,
        FactorLabel::Su2(n) => *n as usize + 1,
    }
}

impl Irrep {
    pub fn new(group: &CompactGroup, label: IrrepLabel) -> Result<Self> {
        if label.0.len() != group.factors().len() {
            return Err(HeatlabError::InvalidArgument(format!(
                "irrep label {label} does not match group {group}"
            )));
        }
        for (f, l) in group.factors().iter().zip(&label.0) {
            let ok = match (f, l) {
                (Factor::Torus(d), FactorLabel::Torus(n)) => n.len() == *d,
                (Factor::Su2, FactorLabel::Su2(_)) => true,
                _ => false,
            };
            if !ok {
                return Err(HeatlabError::InvalidArgument(format!(
                    "irrep label {label} does not match group {group}"
                )));
            }
        }
        let factor_dims: Vec<usize> = label.0.iter().map(factor_label_dim).collect();
        let dim: usize = factor_dims.iter().product();
        let mut generators = Vec::with_capacity(group.dim());
        for (fi, (f, l)) in group.factors().iter().zip(&label.0).enumerate() {
            let before: usize = factor_dims[..fi].iter().product();
            let after: usize = factor_dims[fi + 1..].iter().product();
            let local: Vec<DMatrix<C64>> = match (f, l) {
                (Factor::Torus(_), FactorLabel::Torus(n)) => n
                    .iter()
                    .map(|v| DMatrix::from_element(1, 1, C64::new(0.0, *v as f64)))
                    .collect(),
                (Factor::Su2, FactorLabel::Su2(n)) => su2_basis()
                    .iter()
                    .map(|x| sym_power_lie(x, *n as usize))
                    .collect(),
                _ => unreachable!(),
            };
            for a in local {
                let m = DMatrix::<C64>::identity(before, before)
                    .kronecker(&a)
                    .kronecker(&DMatrix::<C64>::identity(after, after));
                generators.push(m);
            }
        }
        let mut cas = DMatrix::<C64>::zeros(dim, dim);
        for a in &generators {
            cas -= a * a;
        }
        let casimir = cas.trace().re / dim as f64;
        Ok(Self {
            label,
            dim,
            casimir,
            generators,
            factor_dims,
        })
    }

    /// Spin `twice/2` irrep of SU(2).
    pub fn spin(twice: u32) -> Self {
        Irrep::new(&CompactGroup::su2(), IrrepLabel::spin(twice)).unwrap()
    }

    pub fn is_trivial(&self) -> bool {
        self.label.is_trivial()
    }

    /// `pi(x)` for a point of K.
    pub fn eval(&self, x: &GroupPoint) -> DMatrix<C64> {
        self.eval_complex(&x.complexify())
    }

    /// Holomorphic extension `pi(g)` for a point of `K_C`.
    pub fn eval_complex(&self, g: &ComplexGroupPoint) -> DMatrix<C64> {
        let mut out = DMatrix::from_element(1, 1, C64::from(1.0));
        for (l, p) in self.label.0.iter().zip(&g.0) {
            let m = match (l, p) {
                (FactorLabel::Torus(n), ComplexFactorPoint::Torus(z)) => {
                    let phase: C64 = n.iter().zip(z).map(|(k, v)| *v * *k as f64).sum();
                    DMatrix::from_element(1, 1, (C64::i() * phase).exp())
                }
                (FactorLabel::Su2(n), ComplexFactorPoint::Su2(m)) => sym_power(m, *n as usize),
                _ => panic!("point does not belong to this irrep's group"),
            };
            out = out.kronecker(&m);
        }
        out
    }

    pub fn character(&self, x: &GroupPoint) -> C64 {
        self.label
            .0
            .iter()
            .zip(&x.0)
            .map(|(l, p)| match (l, p) {
                (FactorLabel::Torus(n), FactorPoint::Torus(th)) => {
                    let phase: f64 = n.iter().zip(th).map(|(k, v)| *k as f64 * v).sum();
                    C64::new(phase.cos(), phase.sin())
                }
                (FactorLabel::Su2(n), FactorPoint::Su2(m)) => {
                    crate::numeric::chebyshev_u(*n as usize, m.trace() / 2.0)[*n as usize]
                }
                _ => panic!("point does not belong to this irrep's group"),
            })
            .product()
    }

    pub fn character_complex(&self, g: &ComplexGroupPoint) -> C64 {
        self.label
            .0
            .iter()
            .zip(&g.0)
            .map(|(l, p)| match (l, p) {
                (FactorLabel::Torus(n), ComplexFactorPoint::Torus(z)) => {
                    let phase: C64 = n.iter().zip(z).map(|(k, v)| *v * *k as f64).sum();
                    (C64::i() * phase).exp()
                }
                (FactorLabel::Su2(n), ComplexFactorPoint::Su2(m)) => {
                    crate::numeric::chebyshev_u(*n as usize, m.trace() / 2.0)[*n as usize]
                }
                _ => panic!("point does not belong to this irrep's group"),
            })
            .product()
    }

    /// `pi(sum_k y_k X_k)`.
    pub fn algebra_element(&self, y: &[f64]) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (a, v) in self.generators.iter().zip(y) {
            if *v != 0.0 {
                m += a * C64::from(*v);
            }
        }
        m
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    /// Largest operator norm among the generator matrices.
    pub fn generator_norm_bound(&self) -> f64 {
        self.generators.iter().map(frob).fold(0.0, f64::max)
    }
}

/// All irreps with Casimir at most `cutoff`, sorted by Casimir then label.
pub fn irreps_up_to(group: &CompactGroup, cutoff: f64) -> Vec<Irrep> {
    let labels = labels_up_to(group, cutoff);
    labels
        .into_iter()
        .map(|l| Irrep::new(group, l).expect("generated label is valid"))
        .collect()
}

/// Labels with Casimir at most `cutoff` (Casimir values computed from a
/// single factor generator set per spin), sorted by Casimir then label.
pub fn labels_up_to(group: &CompactGroup, cutoff: f64) -> Vec<IrrepLabel> {
    let eps = 1e-9;
    // Per-factor candidate lists with their Casimir values.
    let mut per_factor: Vec<Vec<(FactorLabel, f64)>> = Vec::new();
    for f in group.factors() {
        let mut list = Vec::new();
        match f {
            Factor::Torus(d) => {
                let r = cutoff.max(0.0).sqrt().floor() as i64;
                let mut n = vec![-r; *d];
                loop {
                    let c: f64 = n.iter().map(|v| (v * v) as f64).sum();
                    if c <= cutoff + eps {
                        list.push((FactorLabel::Torus(n.clone()), c));
                    }
                    let mut i = 0;
                    loop {
                        if i == *d {
                            break;
                        }
                        n[i] += 1;
                        if n[i] > r {
                            n[i] = -r;
                            i += 1;
                        } else {
                            break;
                        }
                    }
                    if i == *d {
                        break;
                    }
                }
            }
            Factor::Su2 => {
                let mut tw = 0u32;
                loop {
                    let c = su2_casimir_from_generators(tw);
                    if c > cutoff + eps {
                        break;
                    }
                    list.push((FactorLabel::Su2(tw), c));
                    tw += 1;
                }
            }
        }
        per_factor.push(list);
    }
    let mut out: Vec<(f64, IrrepLabel)> = vec![(0.0, IrrepLabel(Vec::new()))];
    for list in per_factor {
        let mut next = Vec::new();
        for (c0, l0) in &out {
            for (fl, c) in &list {
                if c0 + c <= cutoff + eps {
                    let mut l = l0.clone();
                    l.0.push(fl.clone());
                    next.push((c0 + c, l));
                }
            }
        }
        out = next;
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    out.into_iter().map(|(_, l)| l).collect()
}

/// Casimir of the spin `twice/2` irrep computed from its generator matrices.
pub fn su2_casimir_from_generators(twice: u32) -> f64 {
    let n = twice as usize;
    let mut cas = DMatrix::<C64>::zeros(n + 1, n + 1);
    for x in su2_basis().iter() {
        let a = sym_power_lie(x, n);
        cas -= &a * &a;
    }
    cas.trace().re / (n + 1) as f64
}
