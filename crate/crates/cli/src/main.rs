use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};
use heatlab_core::config::{Config, SUITES};
use heatlab_core::fourier::FourierCoefficients;
use heatlab_core::group::{CompactGroup, FactorLabel, FactorPoint, IrrepLabel};
use heatlab_core::heat::{kernel_csv, HeatKernel};
use heatlab_core::report::{Report, TestRecord};
use heatlab_core::{stochastic, suite, transforms, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "heatlab",
    version,
    about = "Heat-kernel analysis on tori, SU(2) and products"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites from a JSON config.
    Run(RunArgs),
    /// Evaluate the Segal-Bargmann transform of a character at a point of the complexification.
    Transform(TransformArgs),
    /// Sample Brownian holonomies and compare character means with the heat kernel.
    Sample(SampleArgs),
    /// Tabulate the heat kernel at random points as CSV.
    Kernel(KernelArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Where to write the JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Run only these suites (repeatable); overrides the config.
    #[arg(long = "suite")]
    suites: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    group: String,
    #[arg(long)]
    t: f64,
    /// Irrep label: twice the spin for SU(2), comma-separated frequencies for a torus.
    #[arg(long)]
    irrep: String,
    /// Complex Lie algebra coordinates `w` of the point `exp(w)`, as `re:im` pairs separated by commas.
    #[arg(long, allow_hyphen_values = true)]
    at: String,
    /// Also print the Hermite coefficients up to this degree.
    #[arg(long)]
    taylor: Option<usize>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    group: String,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 1000)]
    mesh: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the sampled holonomies as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    group: String,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Transform(a) => transform(a).map(|_| true),
        Command::Sample(a) => sample(a),
        Command::Kernel(a) => kernel(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn finish(report: &Report, path: Option<&PathBuf>) -> Result<bool> {
    if let Some(p) = path {
        report
            .write(p)
            .with_context(|| format!("writing {}", p.display()))?;
    }
    print!("{}", report.summary());
    Ok(report.all_pass)
}

fn run(a: RunArgs) -> Result<bool> {
    let mut config =
        Config::load(&a.config).with_context(|| format!("loading {}", a.config.display()))?;
    if !a.suites.is_empty() {
        config.suites = a.suites;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(bad) = config.suites.iter().find(|s| !SUITES.contains(&s.as_str())) {
        bail!("unknown suite `{bad}`; known suites: {}", SUITES.join(", "));
    }
    let report = suite::run(&config)?;
    finish(&report, a.report.as_ref())
}

fn parse_label(group: &CompactGroup, s: &str) -> Result<IrrepLabel> {
    let parts: Vec<&str> = s.split(';').collect();
    if parts.len() != group.factors().len() {
        bail!("irrep needs one `;`-separated entry per factor");
    }
    let mut out = Vec::new();
    for (f, p) in group.factors().iter().zip(parts) {
        out.push(match f {
            heatlab_core::Factor::Torus(_) => FactorLabel::Torus(
                p.split(',')
                    .map(|v| v.trim().parse())
                    .collect::<Result<_, _>>()?,
            ),
            heatlab_core::Factor::Su2 => FactorLabel::Su2(p.trim().parse()?),
        });
    }
    Ok(IrrepLabel(out))
}

fn parse_point(s: &str) -> Result<Vec<C64>> {
    s.split(',')
        .map(|p| {
            let (re, im) = p.split_once(':').unwrap_or((p, "0"));
            Ok(C64::new(re.trim().parse()?, im.trim().parse()?))
        })
        .collect()
}

fn transform(a: TransformArgs) -> Result<()> {
    let group = CompactGroup::parse(&a.group)?;
    group.check_invariants()?;
    let label = parse_label(&group, &a.irrep)?;
    let f = FourierCoefficients::character(&group, label)?;
    let w = parse_point(&a.at)?;
    if w.len() != group.dim() {
        bail!("point needs {} coordinates", group.dim());
    }
    let g = group.exp_complex(&w);
    let value = transforms::segal_bargmann_b(&f, a.t, &g)?;
    let (hol, tail) = transforms::holomorphic_norm(&f, a.t)?;
    let mut out = serde_json::json!({
        "group": group.descriptor(),
        "t": a.t,
        "value": [value.re, value.im],
        "norm_position": transforms::norm_in_position(&f, a.t)?,
        "norm_holomorphic": hol,
        "norm_holomorphic_tail": tail,
    });
    if let Some(n) = a.taylor {
        out["taylor"] = heatlab_core::taylor_map(&f, a.t, n)?.to_json();
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn sample(a: SampleArgs) -> Result<bool> {
    let group = CompactGroup::parse(&a.group)?;
    group.check_invariants()?;
    let labels = suite::pushforward_labels(&group);
    let entries = stochastic::pushforward_check(&group, a.t, &labels, a.samples, a.mesh, a.seed)?;
    let name = group.name();
    let tests = entries
        .iter()
        .map(|e| {
            TestRecord::statistical(
                "stochastic",
                format!("E chi({}), z = {:.2}", e.label, e.z),
                &name,
                Some(a.t),
                e.mean.re,
                e.expected,
                e.std_err,
                3.0,
            )
        })
        .collect();
    if let Some(p) = &a.csv {
        let mut w = std::io::BufWriter::new(std::fs::File::create(p)?);
        for i in 0..a.samples as u64 {
            let h = stochastic::sample_holonomy(&group, a.t, a.mesh, a.seed, i)?;
            let row: Vec<String> = h
                .0
                .iter()
                .flat_map(|f| match f {
                    FactorPoint::Torus(th) => th.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                    FactorPoint::Su2(m) => {
                        vec![m[(0, 0)].re, m[(0, 0)].im, m[(0, 1)].re, m[(0, 1)].im]
                            .into_iter()
                            .map(|v| v.to_string())
                            .collect()
                    }
                })
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
    }
    finish(&Report::new(tests), a.report.as_ref())
}

fn kernel(a: KernelArgs) -> Result<()> {
    let group = CompactGroup::parse(&a.group)?;
    group.check_invariants()?;
    let h = HeatKernel::new(&group, a.t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let points: Vec<_> = (0..a.points)
        .map(|_| group.random_point(&mut rng))
        .collect();
    let csv = kernel_csv(&h, &points);
    match a.out {
        Some(p) => std::fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
