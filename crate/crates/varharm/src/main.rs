use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use varharm::{checks, ExperimentConfig};
use varharm_core::atoms::{make_atom, validate_atom};
use varharm_core::grid::{Ball, Grid, GridFunction};
use varharm_core::lebesgue::ExponentFunction;
use varharm_core::maximal::{
    discrete_maximal, dyadic_range, fractional_maximal, grand_maximal, hl_maximal, BallFamily, ScaleLadder,
    TestFunctionBank,
};
use varharm_core::potentials::{apply, far_field_check, weak_type_check, OperatorSpec, OperatorSpecFile};
use varharm_core::weights::{a1_constant, ap_constant, apq_constant, rh_constant, rubio_de_francia, Weight, RDF_TOL};
use varharm_core::{maximal, Verdict};

/// Exit status for usage and input errors; verdicts use 0, 1 and 2.
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "varharm", version, about = "Variable-exponent harmonic analysis on grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a maximal operator to a grid function.
    Maximal {
        #[arg(long, value_enum, default_value = "hl")]
        op: MaximalOp,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Weight constants of a grid weight, printed as JSON.
    Weights {
        #[arg(long, value_enum)]
        check: WeightCheck,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
    },
    /// Rubio de Francia iteration of g with respect to the dual exponent.
    Rdf {
        #[arg(long = "in")]
        input: PathBuf,
        /// Exponent CSV on the same grid, or a named exponent.
        #[arg(long)]
        pdual: String,
        #[arg(long)]
        out: PathBuf,
        /// Maximal operator norm to use; estimated (and doubled) if absent.
        #[arg(long)]
        m_norm: Option<f64>,
        #[arg(long, default_value_t = RDF_TOL)]
        tol: f64,
    },
    /// Build and validate an atom.
    Atom {
        /// `cx,r` in one dimension or `cx,cy,r` in two.
        #[arg(long)]
        ball: String,
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = 64.0)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply the generalized potential to a grid function.
    Potential {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Far-field decay of the potential of an atom: CSV rows `radius,value,bound`.
    Farfield {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value_t = 0.0625)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[arg(long, default_value = "const:0.8")]
        p: String,
        #[arg(long, default_value_t = 64.0)]
        q: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weighted weak-type levels: CSV rows `lambda,value,bound`.
    Weaktype {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long = "in")]
        input: PathBuf,
        /// Weight CSV on the same grid; defaults to w = 1.
        #[arg(long)]
        weight: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a registered verification target.
    Verify {
        target: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// List registered verification targets.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum MaximalOp {
    Hl,
    Centered,
    Frac,
    Discrete,
    Grand,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightCheck {
    A1,
    Ap,
    Apq,
    Rh,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 16.0)]
    half_width: f64,
    #[arg(long, default_value_t = 2048)]
    points: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.dim, self.half_width, self.points)?)
    }
}

#[derive(Args)]
struct OperatorArgs {
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// JSON operator file; the Riesz potential if absent.
    #[arg(long)]
    spec: Option<PathBuf>,
}

impl OperatorArgs {
    fn operator(&self, dim: usize) -> Result<OperatorSpec> {
        match &self.spec {
            None => Ok(OperatorSpec::riesz(dim, self.alpha)?),
            Some(path) => {
                let file: OperatorSpecFile = serde_json::from_reader(BufReader::new(
                    File::open(path).with_context(|| format!("opening {}", path.display()))?,
                ))?;
                if (file.alpha - self.alpha).abs() > 1e-12 {
                    bail!(
                        "--alpha {} disagrees with alpha = {} in {}",
                        self.alpha,
                        file.alpha,
                        path.display()
                    );
                }
                if file.dim != dim {
                    bail!("operator dimension {} does not match the input ({dim})", file.dim);
                }
                Ok(OperatorSpec::from_file(&file)?)
            }
        }
    }
}

fn read_grid(path: &Path) -> Result<GridFunction> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    GridFunction::read_csv(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn write_grid(f: &GridFunction, path: &Path) -> Result<()> {
    let out = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(out);
    f.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// A named exponent, or a CSV file on `grid`.
fn exponent(grid: Grid, spec: &str) -> Result<ExponentFunction> {
    if Path::new(spec).is_file() {
        let f = read_grid(Path::new(spec))?;
        if f.grid() != &grid {
            bail!("exponent {spec} lives on another grid");
        }
        return Ok(ExponentFunction::new(f)?);
    }
    Ok(ExponentFunction::from_spec(grid, spec)?)
}

fn parse_ball(dim: usize, s: &str) -> Result<Ball> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("bad ball `{s}`"))?;
    match (dim, v.as_slice()) {
        (1, [c, r]) => Ok(Ball::interval(*c, *r)?),
        (2, [cx, cy, r]) => Ok(Ball::new([*cx, *cy], *r)?),
        _ => bail!(
            "ball `{s}` needs {} comma-separated numbers in dimension {dim}",
            dim + 1
        ),
    }
}

fn run(cli: Cli) -> Result<Option<Verdict>> {
    match cli.command {
        Command::Maximal { op, alpha, input, out } => {
            let f = read_grid(&input)?;
            let g = *f.grid();
            let fam = BallFamily::uncentered(&g);
            let m = match op {
                MaximalOp::Hl => maximal::maximal(&f),
                MaximalOp::Centered => hl_maximal(&f, &fam.with_centering(true))?,
                MaximalOp::Frac => fractional_maximal(&f, alpha, &fam)?,
                MaximalOp::Discrete => {
                    discrete_maximal(&f, TestFunctionBank::standard(g.dim())?.first(), dyadic_range(&g))?
                }
                MaximalOp::Grand => {
                    grand_maximal(&f, &TestFunctionBank::standard(g.dim())?, &ScaleLadder::standard(&g))?
                }
            };
            write_grid(&m, &out)?;
        }
        Command::Weights { check, input, p, q, s } => {
            let w = Weight::new(read_grid(&input)?)?;
            let fam = BallFamily::uncentered(w.grid());
            let need = |v: Option<f64>, name: &str| v.with_context(|| format!("--{name} is required"));
            let (name, value) = match check {
                WeightCheck::A1 => ("a1", a1_constant(&w, &fam)?),
                WeightCheck::Ap => ("ap", ap_constant(&w, need(p, "p")?, &fam)?),
                WeightCheck::Apq => ("apq", apq_constant(&w, need(p, "p")?, need(q, "q")?, &fam)?),
                WeightCheck::Rh => ("rh", rh_constant(&w, need(s, "s")?, &fam)?),
            };
            println!("{}", json!({ "check": name, "value": value, "p": p, "q": q, "s": s }));
        }
        Command::Rdf {
            input,
            pdual,
            out,
            m_norm,
            tol,
        } => {
            let g = read_grid(&input)?;
            let dual = exponent(*g.grid(), &pdual)?;
            let m = match m_norm {
                Some(m) => m,
                None => 2.0 * maximal::estimate_operator_norm(&dual, 8, 42)?,
            };
            let res = rubio_de_francia(&g, &dual, m, tol)?;
            for d in &res.certificate.diagnostics {
                eprintln!("warning: {d}");
            }
            write_grid(res.rg.function(), &out)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "certificate": res.certificate,
                    "passed": res.certificate.passed(),
                    "m_norm": res.m_norm_used,
                    "truncation_index": res.truncation_index,
                    "tail_bound": res.tail_bound,
                }))?
            );
        }
        Command::Atom {
            ball,
            p,
            q,
            degree,
            seed,
            grid,
            out,
        } => {
            let g = grid.grid()?;
            let ball = parse_ball(g.dim(), &ball)?;
            let p = exponent(g, &p)?;
            let a = make_atom(ball, &p, q, degree, seed)?;
            if let Some(path) = out {
                write_grid(&a.values, &path)?;
            }
            let rep = validate_atom(&a);
            println!(
                "{}",
                serde_json::to_string_pretty(
                    &json!({ "passed": rep.passed(), "report": rep, "chi_norm": a.chi_norm() })
                )?
            );
        }
        Command::Potential { op, input, out } => {
            let f = read_grid(&input)?;
            let spec = op.operator(f.grid().dim())?;
            write_grid(&apply(&spec, &f)?, &out)?;
        }
        Command::Farfield {
            op,
            radius,
            degree,
            p,
            q,
            seed,
            grid,
            out,
        } => {
            let g = grid.grid()?;
            let spec = op.operator(g.dim())?;
            let p = exponent(g, &p)?;
            let a = make_atom(Ball::new([0.0; 2], radius)?, &p, q, degree, seed)?;
            let mut radii = Vec::new();
            let mut rho = 2.0 * radius;
            while rho <= 0.95 * g.half_width() {
                radii.push(rho);
                rho *= std::f64::consts::SQRT_2;
            }
            let rep = far_field_check(&spec, &a, &radii)?;
            let n = g.dim() as f64;
            let d = a.moment_degree as f64;
            let envelope = rep.c_fit * radius.powf(n + d + 1.0) / a.chi_norm();
            let mut w = sink(&out)?;
            writeln!(w, "radius,value,bound")?;
            for ray in &rep.rays {
                for (r, v) in ray.radii.iter().zip(&ray.values) {
                    writeln!(w, "{r:e},{v:e},{:e}", envelope * r.powf(rep.predicted_slope))?;
                }
            }
            w.flush()?;
            eprintln!(
                "slope {:.4} (predicted {:.4}), budget ratio {:.2e}",
                rep.slope, rep.predicted_slope, rep.budget_ratio
            );
        }
        Command::Weaktype {
            op,
            input,
            weight,
            levels,
            out,
        } => {
            let f = read_grid(&input)?;
            let g = *f.grid();
            let spec = op.operator(g.dim())?;
            let w = match weight {
                Some(path) => Weight::new(read_grid(&path)?)?,
                None => Weight::new(GridFunction::constant(g, 1.0))?,
            };
            let top = apply(&spec, &f)?.sup_norm();
            anyhow::ensure!(
                top > 0.0 && levels >= 2,
                "need a non-zero input and at least two levels"
            );
            let lambdas: Vec<f64> = (0..levels)
                .map(|k| top * 1e-2f64.powf(1.0 - k as f64 / (levels - 1) as f64) * 1.2)
                .collect();
            let rep = weak_type_check(&spec, &f, &w, &lambdas)?;
            let mut out = sink(&out)?;
            writeln!(out, "lambda,value,bound")?;
            for r in &rep.rows {
                writeln!(out, "{:e},{:e},{:e}", r.lambda, r.level_measure, rep.c_fit * r.bound)?;
            }
            out.flush()?;
            eprintln!("fitted constant {:.6e}, [w]_A1 {:.4}", rep.c_fit, rep.a1);
        }
        Command::Verify {
            target,
            config,
            out,
            csv,
        } => {
            let mut cfg = match &config {
                Some(path) => serde_json::from_reader::<_, ExperimentConfig>(BufReader::new(
                    File::open(path).with_context(|| format!("opening {}", path.display()))?,
                ))
                .with_context(|| format!("parsing {}", path.display()))?,
                None => ExperimentConfig::default(),
            };
            match (target, cfg.target.is_empty()) {
                (Some(t), true) => cfg.target = t,
                (Some(t), false) if t != cfg.target => {
                    bail!("target `{t}` disagrees with `{}` in the config", cfg.target)
                }
                (None, true) => bail!("no target given"),
                _ => {}
            }
            let report = checks::run(&cfg)?;
            print!("{}", report.summary());
            if let Some(path) = out {
                report.write_json(&path)?;
            }
            if let Some(dir) = csv {
                std::fs::create_dir_all(&dir)?;
                let path = dir.join(format!("{}.csv", report.target));
                report.write_csv(BufWriter::new(File::create(&path)?))?;
            }
            return Ok(Some(report.verdict));
        }
        Command::List => {
            for t in checks::targets() {
                println!("{:<20} {}", t.id, t.description);
            }
        }
    }
    Ok(None)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Some(v)) => ExitCode::from(v.exit_code() as u8),
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
