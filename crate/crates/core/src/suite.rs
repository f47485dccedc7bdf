//! Named verification suites. Each suite is a sequence of library calls
//! producing [`TestRecord`]s; the run is deterministic given the config.

use crate::config::{Config, SUITES};
use crate::error::{HeatlabError, Result};
use crate::euclid;
use crate::fock::{hermite_norm_adaptive, taylor_map, TensorFunctional};
use crate::fourier::{labels_within_band, FourierCoefficients};
use crate::group::{irreps_up_to, CompactGroup, Factor, FactorLabel, IrrepLabel};
use crate::numeric::C64;
use crate::operators::{
    self, ccr_constant, BargmannRealization, FockRealization, PositionRealization,
};
use crate::report::{Report, TestRecord};
use crate::stochastic;
use crate::transforms::{self, TorusMeasure};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Largest number of dense tensor entries per degree used by the operator suites.
const DENSE_WORDS: usize = 60_000;
/// Fock truncation for the operator and resolution suites.
const OPERATOR_LEVEL: usize = 4;
/// Meshes of the loop-action refinement study.
const LOOP_MESHES: [usize; 3] = [64, 256, 1024];
/// Weak-order mesh ladder.
pub const WEAK_MESHES: [usize; 3] = [250, 1000, 4000];
/// Smallest time at which the order-2 chaos check runs; below it the forward-increment
/// error `t^2 ||xi_2||^2 / (2 mesh)` is comparable to the Fock tail.
pub const CHAOS_MIN_T: f64 = 0.5;

pub struct Context {
    pub group: CompactGroup,
    pub name: String,
    pub config: Config,
}

impl Context {
    pub fn new(config: &Config) -> Result<Self> {
        let group = config.build_group()?;
        group.check_invariants()?;
        Ok(Self {
            name: group.name(),
            group,
            config: config.clone(),
        })
    }

    fn rng(&self, suite: &str, stream: u64) -> ChaCha8Rng {
        let idx = SUITES
            .iter()
            .position(|s| *s == suite)
            .unwrap_or(SUITES.len()) as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream((idx << 32) | stream);
        rng
    }

    fn random_f(&self, band: usize, rng: &mut ChaCha8Rng) -> FourierCoefficients {
        let bands = vec![band; self.group.factors().len()];
        FourierCoefficients::random(&self.group, &labels_within_band(&self.group, &bands), rng)
    }

    fn cmp(&self, suite: &str, test: String, t: f64, c: &crate::check::Comparison) -> TestRecord {
        TestRecord::from_comparison(suite, test, &self.name, Some(t), c)
    }

    fn residual(&self, suite: &str, test: String, t: Option<f64>, r: f64, tol: f64) -> TestRecord {
        TestRecord::residual(suite, test, &self.name, t, r, tol)
    }

    fn is_torus(&self) -> bool {
        self.group
            .factors()
            .iter()
            .all(|f| matches!(f, Factor::Torus(_)))
    }

    /// Largest degree `<= n` whose dense tensors stay small.
    fn dense_degree(&self, n: usize) -> usize {
        Self::dense_degree_for(&self.group, n)
    }

    fn dense_degree_for(group: &CompactGroup, n: usize) -> usize {
        let d = group.dim().max(1);
        (0..=n)
            .rev()
            .find(|&m| d.checked_pow(m as u32).is_some_and(|w| w <= DENSE_WORDS))
            .unwrap_or(0)
    }
}

/// Runs the configured suites in order.
pub fn run(config: &Config) -> Result<Report> {
    config.validate()?;
    if config.suites.is_empty() {
        return Ok(Report::new(Vec::new()));
    }
    let ctx = Context::new(config)?;
    let parts: Vec<Vec<TestRecord>> = config
        .suites
        .par_iter()
        .map(|s| run_suite(&ctx, s))
        .collect::<Result<_>>()?;
    Ok(Report::new(parts.into_iter().flatten().collect()))
}

pub fn run_suite(ctx: &Context, suite: &str) -> Result<Vec<TestRecord>> {
    match suite {
        "transform-unitarity" => transform_unitarity(ctx),
        "taylor-isometry" => taylor_isometry(ctx),
        "hermite" => hermite(ctx),
        "identities" => identities(ctx),
        "operators" => operator_algebra(ctx),
        "ccr" => ccr(ctx),
        "resolution" => resolution(ctx),
        "stochastic" => stochastic_suite(ctx),
        "bounds" => bounds(ctx),
        "phase-density" => phase_density(ctx),
        "euclid" => euclid_suite(ctx),
        other => Err(HeatlabError::Config(format!("unknown suite `{other}`"))),
    }
}

fn transform_unitarity(ctx: &Context) -> Result<Vec<TestRecord>> {
    const S: &str = "transform-unitarity";
    let mut out = Vec::new();
    for (ti, &t) in ctx.config.t_ladder.iter().enumerate() {
        let mut rng = ctx.rng(S, ti as u64);
        for case in 0..ctx.config.cases {
            let f = ctx.random_f(ctx.config.band, &mut rng);
            let pos = transforms::norm_in_position(&f, t)?;
            if ctx.is_torus() {
                let big_f = f.heat(t);
                let b = transforms::bargmann_norm_torus(&big_f, t, TorusMeasure::Mu)?;
                out.push(ctx.cmp(
                    S,
                    format!("B_t norm #{case}"),
                    t,
                    &crate::check::Comparison::new(b, pos, 1e-7, 0.0),
                ));
                let c = transforms::bargmann_norm_torus(&big_f, t, TorusMeasure::Nu)?;
                let l2 = transforms::norm_in_l2(&f)?;
                out.push(ctx.cmp(
                    S,
                    format!("C_t norm #{case}"),
                    t,
                    &crate::check::Comparison::new(c, l2, 1e-7, 0.0),
                ));
            } else {
                let (v, tail) = transforms::holomorphic_norm(&f, t)?;
                out.push(ctx.cmp(
                    S,
                    format!("B_t norm #{case}"),
                    t,
                    &crate::check::Comparison::new(v, pos, 1e-7, tail),
                ));
            }
        }
        // Spectral transform against the convolution integral at one point of K_C.
        let f = ctx.random_f(ctx.config.band.min(2), &mut rng);
        let x = ctx.group.random_point(&mut rng);
        let y: Vec<f64> = (0..ctx.group.dim())
            .map(|k| if k == 0 { 0.3 } else { -0.1 })
            .collect();
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let g = ctx.group.from_polar(&x, &y);
        let exactness = match &ctx.config.exactness {
            Some(e) => e.clone(),
            None => transforms::convolution_exactness(&f, t, y_norm)?,
        };
        let spectral = transforms::segal_bargmann_b(&f, t, &g)?;
        let conv = transforms::segal_bargmann_by_convolution(&f, t, &g, &exactness)?;
        let scale =
            transforms::norm_in_position(&f, t)?.sqrt() * (y_norm * y_norm / (2.0 * t)).exp();
        out.push(ctx.cmp(
            S,
            "B_t by convolution".into(),
            t,
            &crate::check::Comparison::complex(conv, spectral, 1e-8, scale, 0.0),
        ));
    }
    Ok(out)
}

fn taylor_isometry(ctx: &Context) -> Result<Vec<TestRecord>> {
    const S: &str = "taylor-isometry";
    let mut out = Vec::new();
    let dense = ctx.dense_degree(ctx.config.n);
    for (ti, &t) in ctx.config.t_ladder.iter().enumerate() {
        let mut rng = ctx.rng(S, ti as u64);
        for case in 0..ctx.config.cases {
            let f = ctx.random_f(ctx.config.band, &mut rng);
            let pos = transforms::norm_in_position(&f, t)?;
            let fock = hermite_norm_adaptive(&f, t, 1e-8)?;
            let c = crate::check::Comparison::new(pos, fock.value, 1e-6, fock.tail);
            out.push(ctx.cmp(
                S,
                format!("position vs Fock norm #{case} (N={})", fock.degree),
                t,
                &c,
            ));
            let xi = taylor_map(&f, t, dense)?;
            let scale = 1.0 + xi.fock_norm().value.sqrt();
            out.push(ctx.residual(
                S,
                format!("ideal relations #{case} (N={dense})"),
                Some(t),
                xi.ideal_residual() / scale,
                1e-10,
            ));
        }
    }
    Ok(out)
}

fn hermite(ctx: &Context) -> Result<Vec<TestRecord>> {
    const S: &str = "hermite";
    let mut out = Vec::new();
    let n = ctx.dense_degree(ctx.config.n).min(6);
    for (ti, &t) in ctx.config.t_ladder.iter().enumerate() {
        let mut rng = ctx.rng(S, ti as u64);
        for case in 0..ctx.config.cases {
            let f = ctx.random_f(ctx.config.band, &mut rng);
            let xi = taylor_map(&f, t, n)?;
            let scale = 1.0
                + xi.components()
                    .iter()
                    .flatten()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
            let r = operators::intertwining_residual(&f, t, n)?;
            out.push(ctx.residual(
                S,
                format!("Hermite map intertwines a_X #{case}"),
                Some(t),
                r / scale,
                1e-9,
            ));
        }
        let f = ctx.random_f(ctx.config.band, &mut rng);
        let points = transforms::bound_samples(&ctx.group, 4, &mut rng);
        for k in 0..ctx.group.dim() {
            let r = transforms::intertwining_residual(&f, t, k, &points)?;
            out.push(ctx.residual(S, format!("B_t intertwines X_{k}"), Some(t), r, 1e-6));
        }
        let xs: Vec<_> = (0..4).map(|_| ctx.group.random_point(&mut rng)).collect();
        let scale = 1.0 + f.l2_norm_sq().sqrt() * (1.0 + f.max_casimir());
        let r = transforms::heat_equation_residual(&f, t, 1e-4 * t, &xs)? / scale;
        out.push(ctx.residual(S, "heat equation".into(), Some(t), r, 1e-6));
    }
    Ok(out)
}

fn identities(ctx: &Context) -> Result<Vec<TestRecord>> {
    const S: &str = "identities";
    let mut out = Vec::new();
    let irreps = irreps_up_to(&ctx.group, 12.0);
    for (ti, &t) in ctx.config.t_ladder.iter().enumerate() {
        let mut split: f64 = 0.0;
        let mut factored: f64 = 0.0;
        for ir in &irreps {
            split = split.max(transforms::laplacian_split_residual(ir, t));
            factored = factored.max(transforms::factored_heat_residual(ir, t));
        }
        out.push(ctx.residual(
            S,
            format!("Laplacian split on {} irreps", irreps.len()),
            Some(t),
            split,
            0.0,
        ));
        out.push(ctx.residual(
            S,
            "factored heat exponential".into(),
            Some(t),
            factored,
            1e-10,
        ));
        let mut rng = ctx.rng(S, ti as u64);
        for case in 0..ctx.config.cases {
            let f = ctx.random_f(ctx.config.band, &mut rng);
            let c = transforms::doubling_check(&f, t, 1e-8)?;
            out.push(ctx.cmp(S, format!("doubling identity #{case}"), t, &c));
        }
    }
    Ok(out)
}

fn operator_algebra(ctx: &Context) -> Result<Vec<TestRecord>> {
    const S: &str = "operators";
    let mut out = Vec::new();
    let level = ctx.dense_degree(OPERATOR_LEVEL);
    let d = ctx.group.dim();
    for (ti, &t) in ctx.config.t_ladder.iter().enumerate() {
        let mut rng = ctx.rng(S, ti as u64);
        let fr = FockRealization::new(&ctx.group, t, level)?;
        for m in 1..=level {
            let u = fr.space.random_state(m, &mut rng);
            let v = fr.space.random_state(m - 1, &mut rng);
            for k in 0..d {
                out.push(ctx.cmp(
                    S,
                    format!("Fock adjointness a_{k} level {m}"),
                    t,
                    &fr.adjointness(k, &u, &v, 1e-9)?,
                ));
            }
        }
        let xi = fr.space.random_state(level, &mut rng);
        let eta = fr.space.random_state(level.saturating_sub(2), &mut rng);
        for j in 0..d {
            for k in j + 1..d {
                out.push(ctx.residual(
                    S,
                    format!("Fock [a_{j}, a_{k}] = a_[X_{j},X_{k}]"),
                    Some(t),
                    fr.commutator_residual(j, k, &xi),
                    1e-9,
                ));
                if level >= 2 {
                    let r = fr.creation_commutator_residual(j, k, &eta)?;
                    out.push(ctx.residual(S, format!("Fock [a*_{j}, a*_{k}]"), Some(t), r, 1e-9));
                }
            }
        }
        for m in 0..=level {
            let nullity = fr.vacuum_nullity(m) as f64;
            out.push(ctx.residual(
                S,
                format!("vacuum unique at level {m}"),
                Some(t),
                (nullity - 1.0).abs(),
                0.0,
            ));
        }

        let p = PositionRealization::new(&ctx.group, t)?;
        let u = ctx.random_f(1, &mut rng);
        let v = ctx.random_f(1, &mut rng);
        for k in 0..d {
            out.push(ctx.cmp(
                S,
                format!("position adjointness a_{k}"),
                t,
                &p.adjointness(k, &u, &v, 1e-9)?,
            ));
        }
        for j in 0..d {
            for k in j + 1..d {
                out.push(ctx.residual(
                    S,
                    format!("position [a_{j}, a_{k}]"),
                    Some(t),
                    p.commutator_residual(j, k, &u)?,
                    1e-9,
                ));
            }
        }
        if ctx.is_torus() {
            let b = BargmannRealization::new(&ctx.group, t)?;
            let gg = ctx.random_f(ctx.config.band, &mut rng).heat(t);
            let ff = ctx.random_f(ctx.config.band + 1, &mut rng).heat(t);
            for k in 0..d {
                out.push(ctx.cmp(
                    S,
                    format!("Bargmann adjointness a_{k}"),
                    t,
                    &b.adjointness(k, &gg, &ff, 1e-9),
                ));
            }
        }
    }
    Ok(out)
}

fn ccr(ctx: &Context) -> Result<Vec<TestRecord>> {
    const S: &str = "ccr";
    let mut out = Vec::new();
    // L^2(rho_t) of a product is the tensor product of the factor spaces, so the
    // relations are checked factor by factor.
    let factors: Vec<CompactGroup> = ctx
        .group
        .factors()
        .iter()
        .map(|f| CompactGroup::new(vec![*f]))
        .collect::<Result<_>>()?;
    for (ti, &t) in ctx.config.t_ladder.iter().enumerate() {
        let mut rng = ctx.rng(S, ti as u64);
        for g in &factors {
            let on = if factors.len() > 1 {
                format!(" on {}", g.name())
            } else {
                String::new()
            };
            let d = g.dim();
            if g.is_abelian() {
                let level = OPERATOR_LEVEL.min(Context::dense_degree_for(g, OPERATOR_LEVEL));
                let fr = FockRealization::new(g, t, level)?;
                for m in 0..level {
                    let eta = fr.space.random_state(m, &mut rng);
                    let mut worst: f64 = 0.0;
                    for j in 0..d {
                        for k in 0..d {
                            worst = worst.max(fr.ccr_residual(j, k, &eta, ccr_constant(t))?);
                        }
                    }
                    out.push(ctx.residual(
                        S,
                        format!("[a_j, a*_k] = delta_jk / t at level {m}{on}"),
                        Some(t),
                        worst,
                        1e-9,
                    ));
                }
                let one = fr.create(0, &TensorFunctional::vacuum(g, t, 0))?;
                let c = crate::check::Comparison::new(
                    one.fock_norm().value,
                    ccr_constant(t),
                    1e-12,
                    0.0,
                );
                out.push(ctx.cmp(S, format!("single excitation norm{on}"), t, &c));
            } else {
                let p = PositionRealization::new(g, t)?;
                let bands = vec![1; g.factors().len()];
                let u = FourierCoefficients::random(g, &labels_within_band(g, &bands), &mut rng);
                let v = FourierCoefficients::random(g, &labels_within_band(g, &bands), &mut rng);
                for (j, k) in [(0, 1), (1, 1)] {
                    let c = p.mixed_commutator_check(j, k, &u, &v, 1e-6)?;
                    out.push(ctx.cmp(
                        S,
                        format!("[a_{j}, a*_{k}] = -[X,Y] - XY log rho_t{on}"),
                        t,
                        &c,
                    ));
                }
            }
        }
    }
    Ok(out)
}

fn resolution(ctx: &Context) -> Result<Vec<TestRecord>> {
    const S: &str = "resolution";
    let mut out = Vec::new();
    let level = ctx.dense_degree(OPERATOR_LEVEL);
    for (ti, &t) in ctx.config.t_ladder.iter().enumerate() {
        let mut rng = ctx.rng(S, ti as u64);
        let fr = FockRealization::new(&ctx.group, t, level)?;
        for case in 0..ctx.config.cases {
            let u = fr.space.random_state(level.min(2), &mut rng);
            let v = fr.space.random_state(level.min(2), &mut rng);
            out.push(ctx.cmp(
                S,
                format!("resolution of identity, degree <= 2 #{case}"),
                t,
                &fr.resolution_check(&u, &v, 1e-6),
            ));
        }
        let f = ctx.random_f(1, &mut rng);
        let h = ctx.random_f(1, &mut rng);
        let u = taylor_map(&f, t, level)?;
        let v = taylor_map(&h, t, level)?;
        out.push(ctx.cmp(
            S,
            "resolution of identity on Taylor data".into(),
            t,
            &fr.resolution_check(&u, &v, 1e-6),
        ));
    }
    Ok(out)
}

/// Single-factor, single-direction labels of frequency 1 and 2 (torus) or spin 1/2 and 1.
pub fn pushforward_labels(group: &CompactGroup) -> Vec<IrrepLabel> {
    let trivial = IrrepLabel::trivial(group);
    let mut out = Vec::new();
    for (i, f) in group.factors().iter().enumerate() {
        for level in [1u32, 2] {
            let mut l = trivial.clone();
            l.0[i] = match f {
                Factor::Torus(d) => {
                    let mut n = vec![0i64; *d];
                    n[0] = level as i64;
                    FactorLabel::Torus(n)
                }
                Factor::Su2 => FactorLabel::Su2(level),
            };
            out.push(l);
        }
    }
    out
}

/// `cos theta` on the first torus coordinate, otherwise `chi_{1/2}` on the first SU(2) factor.
pub fn chaos_test_function(group: &CompactGroup) -> Result<FourierCoefficients> {
    let trivial = IrrepLabel::trivial(group);
    let (i, f) = group
        .factors()
        .iter()
        .enumerate()
        .next()
        .expect("group has a factor");
    let mut out = FourierCoefficients::zeros(group);
    match f {
        Factor::Torus(d) => {
            for s in [1i64, -1] {
                let mut n = vec![0i64; *d];
                n[0] = s;
                let mut l = trivial.clone();
                l.0[i] = FactorLabel::Torus(n);
                out = out.add(&FourierCoefficients::character(group, l)?.scale(C64::from(0.5)));
            }
        }
        Factor::Su2 => {
            let mut l = trivial.clone();
            l.0[i] = FactorLabel::Su2(1);
            out = FourierCoefficients::character(group, l)?;
        }
    }
    Ok(out)
}

fn stochastic_suite(ctx: &Context) -> Result<Vec<TestRecord>> {
    const S: &str = "stochastic";
    let mut out = Vec::new();
    let mc = &ctx.config.mc;
    let seed = ctx.config.seed;
    let labels = pushforward_labels(&ctx.group);
    for &t in &ctx.config.t_ladder {
        for e in stochastic::pushforward_check(&ctx.group, t, &labels, mc.samples, mc.mesh, seed)? {
            let c = crate::check::Comparison::complex(
                e.mean,
                C64::from(e.expected),
                0.0,
                0.0,
                3.0 * e.std_err,
            );
            let mut r = ctx.cmp(
                S,
                format!("E chi({}) = d e^(-t c/2), z = {:.2}", e.label, e.z),
                t,
                &c,
            );
            r.lhs = e.mean.re;
            r.rhs = e.expected;
            out.push(r);
        }
        if ctx.group.factors().iter().any(|f| matches!(f, Factor::Su2)) {
            for twice in [1u32, 2] {
                let order = stochastic::su2_weak_order(twice, t, &WEAK_MESHES);
                let twice_label = IrrepLabel::spin(twice);
                out.push(TestRecord::at_least(
                    S,
                    format!("weak order for {twice_label}"),
                    &ctx.name,
                    Some(t),
                    order,
                    1.0,
                ));
                let closed = 1.0 + stochastic::su2_step_mean_minus_one(twice, t, WEAK_MESHES[0]);
                let quad = stochastic::su2_step_mean_quadrature(twice, t, WEAK_MESHES[0], 24);
                out.push(ctx.cmp(
                    S,
                    format!("one-step law for {twice_label}"),
                    t,
                    &crate::check::Comparison::new(closed, quad, 1e-12, 0.0),
                ));
            }
            let l = stochastic::LoopElement::trigonometric(&ctx.group, LOOP_MESHES[2], 0.8, 0.5)?;
            let errs = stochastic::loop_invariance_study(
                &ctx.group,
                t,
                &l,
                &LOOP_MESHES,
                mc.samples.min(1000),
                seed,
            )?;
            let order = stochastic::observed_order(&LOOP_MESHES, &errs);
            out.push(TestRecord::at_least(
                S,
                "loop action convergence order",
                &ctx.name,
                Some(t),
                order,
                0.95,
            ));
        }
        if matches!(ctx.group.factors(), [Factor::Torus(1)]) {
            let d = stochastic::ks_statistic_circle(t, mc.samples, mc.mesh.min(10), seed)?;
            out.push(ctx.residual(
                S,
                "KS distance to wrapped Gaussian".into(),
                Some(t),
                d,
                stochastic::ks_critical_001(mc.samples),
            ));
            let l = stochastic::LoopElement::trigonometric(&ctx.group, 64, 0.7, 0.0)?;
            let p = stochastic::NoisePath::sample(&ctx.group, t, 64, seed, 0)?;
            let moved = stochastic::holonomy(&stochastic::loop_action(&l, &p)?);
            let r = stochastic::holonomy(&p)
                .inverse()
                .mul(&moved)
                .distance_from_identity();
            out.push(ctx.residual(
                S,
                "abelian loop action leaves holonomy fixed".into(),
                Some(t),
                r,
                1e-12,
            ));
        }
    }
    let phi = chaos_test_function(&ctx.group)?;
    let mut chaos_ts: Vec<f64> = ctx
        .config
        .t_ladder
        .iter()
        .copied()
        .filter(|&t| t >= CHAOS_MIN_T)
        .collect();
    if chaos_ts.is_empty() {
        chaos_ts.push(CHAOS_MIN_T);
    }
    for t in chaos_ts {
        let r = stochastic::chaos_term_check(&phi, t, mc.samples, mc.mesh, seed)?;
        out.push(TestRecord::statistical(
            S,
            format!("order <= 2 chaos residual, z = {:.2}", r.z),
            &ctx.name,
            Some(t),
            r.residual_mean,
            r.expected_tail,
            r.std_err,
            3.0,
        ));
    }
    Ok(out)
}

fn bounds(ctx: &Context) -> Result<Vec<TestRecord>> {
    const S: &str = "bounds";
    let mut out = Vec::new();
    for (ti, &t) in ctx.config.t_ladder.iter().enumerate() {
        let mut rng = ctx.rng(S, ti as u64);
        let f = ctx.random_f(ctx.config.band, &mut rng);
        let pts = transforms::bound_samples(&ctx.group, ctx.config.bound_samples, &mut rng);
        let rep = transforms::pointwise_bound_check(&f, t, &pts)?;
        out.push(TestRecord {
            suite: S.into(),
            test: format!(
                "|F(g)|^2 <= ||F||^2 e^(|g|^2/t) on {} points, {} violations",
                rep.samples, rep.violations
            ),
            group: ctx.name.clone(),
            t: Some(t),
            lhs: rep.max_ratio,
            rhs: 1.0,
            tolerance: 1e-10,
            tail: rep.norm_tail,
            rel_err: 0.0,
            pass: rep.pass(),
        });
    }
    Ok(out)
}

fn phase_density(ctx: &Context) -> Result<Vec<TestRecord>> {
    const S: &str = "phase-density";
    if !ctx.is_torus() {
        return Ok(Vec::new());
    }
    let d = ctx.group.dim();
    let grid = if d == 1 { 64 } else { 12 };
    let mut out = Vec::new();
    for (ti, &t) in ctx.config.t_ladder.iter().enumerate() {
        let mut rng = ctx.rng(S, ti as u64);
        let f = ctx.random_f(ctx.config.band, &mut rng);
        let f = f.scale(C64::from(1.0 / f.l2_norm_sq().sqrt()));
        let rep = transforms::phase_density_check_torus(&f, t, grid)?;
        out.push(ctx.cmp(
            S,
            "integral of density".into(),
            t,
            &crate::check::Comparison::absolute(rep.integral, 1.0, 1e-6, 0.0),
        ));
        out.push(TestRecord::at_least(
            S,
            "sup density (2 pi t)^d <= measured a_t",
            &ctx.name,
            Some(t),
            rep.measured_a * (1.0 + 1e-9),
            rep.f_constant,
        ));
        out.push(TestRecord::at_least(
            S,
            "measured a_t <= series a_t",
            &ctx.name,
            Some(t),
            rep.oracle_a * (1.0 + 1e-12),
            rep.measured_a,
        ));
    }
    if ctx.config.t_ladder.len() > 1 {
        let (a, ok) = transforms::phase_constant_ladder(d, &ctx.config.t_ladder, 4 * grid);
        let spread = a.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - a.iter().copied().fold(f64::INFINITY, f64::min);
        out.push(TestRecord {
            suite: S.into(),
            test: format!("a_t strictly decreasing toward 1 as t decreases: {a:?}"),
            group: ctx.name.clone(),
            t: None,
            lhs: spread,
            rhs: 0.0,
            tolerance: 0.0,
            tail: 0.0,
            rel_err: 0.0,
            pass: ok,
        });
    }
    Ok(out)
}

fn euclid_suite(ctx: &Context) -> Result<Vec<TestRecord>> {
    const S: &str = "euclid";
    let mut out = Vec::new();
    let n_max = ctx.config.n.min(8) as u32;
    for &t in &ctx.config.t_ladder {
        let tq = euclid::parse_rational(&format!("{t}"))?;
        let mut exact_bad = 0usize;
        let mut quad_err: f64 = 0.0;
        for m in 0..=n_max {
            for n in 0..=n_max {
                let exact = euclid::gaussian_inner(
                    &euclid::hermite_euclid(&[m], tq),
                    &euclid::hermite_euclid(&[n], tq),
                    tq,
                );
                let want = if m == n {
                    euclid::monomial_norm_exact(n, tq)
                } else {
                    euclid::Q::zero()
                };
                if exact != want {
                    exact_bad += 1;
                }
                let scale = euclid::to_f64(euclid::monomial_norm_exact(m.max(n), tq)).max(1.0);
                quad_err = quad_err.max(
                    (euclid::hermite_inner_quadrature(m, n, tq) - euclid::to_f64(want)).abs()
                        / scale,
                );
            }
        }
        out.push(ctx.residual(
            S,
            format!("exact Hermite orthogonality, degree <= {n_max}"),
            Some(t),
            exact_bad as f64,
            0.0,
        ));
        out.push(ctx.residual(
            S,
            "Hermite orthogonality by quadrature".into(),
            Some(t),
            quad_err,
            1e-10,
        ));
        for n in 0..=n_max {
            let (radial, planar) = euclid::monomial_norm_check(n, tq, 1e-10);
            out.push(ctx.cmp(S, format!("|z^{n}|^2 norm, radial"), t, &radial));
            out.push(ctx.cmp(S, format!("|z^{n}|^2 norm, planar"), t, &planar));
        }
        let mut bad = 0usize;
        for d in [1usize, 2] {
            for deg in 0..=6u32 {
                let f = euclid::Poly::from_terms(
                    d,
                    euclid::multi_indices(d, deg)
                        .into_iter()
                        .enumerate()
                        .map(|(i, e)| (e, euclid::Q::new(i as i128 % 5 - 2, 1 + i as i128 % 3))),
                )?;
                if euclid::gaussian_inner(&f, &f, tq)
                    != euclid::fock_norm_sq(&euclid::bt_euclid_poly(&f, tq), tq)
                {
                    bad += 1;
                }
            }
        }
        out.push(ctx.residual(
            S,
            "exact unitarity on polynomials of degree <= 6".into(),
            Some(t),
            bad as f64,
            0.0,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(group: &str, suites: &[&str]) -> Config {
        let mut c = Config::for_group(group);
        c.suites = suites.iter().map(|s| s.to_string()).collect();
        c.t_ladder = vec![0.5, 1.0];
        c.cases = 2;
        c.bound_samples = 500;
        c.mc.samples = 2000;
        c.mc.mesh = 20;
        c
    }

    #[test]
    fn empty_suite_list_passes() {
        let r = run(&quick("su2", &[])).unwrap();
        assert!(r.all_pass && r.tests.is_empty());
    }

    #[test]
    fn perturbed_constants_are_rejected() {
        let mut c = quick("su2", &["euclid"]);
        c.perturb_structure_constants = Some(1e-3);
        assert!(matches!(run(&c), Err(HeatlabError::Invariant(_))));
    }

    #[test]
    fn deterministic_suites_pass_on_circle() {
        let r = run(&quick(
            "torus:1",
            &[
                "transform-unitarity",
                "taylor-isometry",
                "hermite",
                "identities",
                "euclid",
            ],
        ))
        .unwrap();
        for t in &r.tests {
            assert!(t.pass, "{t:?}");
        }
    }

    #[test]
    fn labels_for_pushforward() {
        let g = CompactGroup::parse("torus:2,su2").unwrap();
        let l = pushforward_labels(&g);
        assert_eq!(l.len(), 4);
        assert!(l.iter().all(|x| !x.is_trivial()));
    }
}
