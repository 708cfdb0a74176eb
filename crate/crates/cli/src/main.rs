use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ectkit::ecc::ecc_from_filtration;
use ectkit::ect::{d_ect_parts, default_window, dimension_constant, DirectionScheme, SchemeKind};
use ectkit::filtration::{directional_filtration, Direction};
use ectkit::io::{load_complex_file, load_directions_csv, write_samples_csv, LoadedComplex};
use ectkit::persistence::{persistence_diagram, PersistenceDiagram};
use ectkit::select::{d_select, r_max, SelectField};
use ectkit::stability::{run_batch, BatchConfig, Check};
use ectkit::wasserstein::{total_w_pq, w_pq_by_dim};
use ectkit::{Embedding, GeometricComplex};
use serde_json::{json, Value};

/// Euler characteristic and SELECT transforms of embedded simplicial complexes.
#[derive(Parser, Debug)]
#[command(name = "ectkit", version, about)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, env = "ECTKIT_THREADS")]
    threads: Option<usize>,

    /// Reject embeddings that flatten a simplex.
    #[arg(long, global = true)]
    check_nondegenerate: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Euler characteristic curve of one embedding in one direction, as CSV.
    Ecc {
        #[command(flatten)]
        input: Single,
        /// Direction as comma-separated components; rescaled to unit length.
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sphere-integrated L1 distance between Euler characteristic curves.
    EctDistance {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        quad: Quadrature,
        /// Restrict each curve distance to [-B, B]; `auto` uses the largest vertex norm plus one.
        #[arg(long)]
        window: Option<String>,
        /// Write per-direction integrands to this CSV file.
        #[arg(long)]
        per_direction: Option<PathBuf>,
        /// Output file for the JSON report (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SELECT distance between two embeddings carrying a vertex function.
    SelectDistance {
        #[command(flatten)]
        pair: Pair,
        /// Name of the vertex function in the complex file.
        #[arg(long)]
        phi: String,
        #[command(flatten)]
        quad: Quadrature,
        /// Restrict each curve distance to [-B, B]; `auto` uses the largest vertex norm plus one.
        #[arg(long)]
        window: Option<String>,
        /// Output file for the JSON report (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Persistence diagram of the height filtration in one direction.
    Persistence {
        #[command(flatten)]
        input: Single,
        /// Direction as comma-separated components; rescaled to unit length.
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// (p, q)-Wasserstein distance between two diagram files.
    Wasserstein {
        /// First diagram (JSON).
        a: PathBuf,
        /// Second diagram (JSON).
        b: PathBuf,
        /// Exponent p >= 1.
        #[arg(short, long, default_value_t = 1.0)]
        p: f64,
        /// Ground norm q >= 1, or `inf`.
        #[arg(short, long, default_value = "inf")]
        q: String,
    },
    /// Run randomised checks of the stability bounds.
    VerifyBound {
        /// Which bound to check.
        #[arg(long, value_enum, default_value = "all")]
        which: Which,
        /// Trials per bound.
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Base seed; each trial derives its own.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the number of sphere directions.
        #[arg(long)]
        directions: Option<usize>,
        /// Write the report array to this JSON file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print C_d, C_K and r_max for a complex.
    Constants {
        /// Complex file (JSON or OFF).
        #[arg(long)]
        complex: PathBuf,
        /// Embedding whose ambient dimension sets C_d.
        #[arg(long)]
        embedding: Option<String>,
        /// Ambient dimension, if no embedding is named.
        #[arg(long)]
        dim: Option<usize>,
        /// Vertex function for r_max.
        #[arg(long)]
        phi: Option<String>,
    },
}

#[derive(Args, Debug)]
struct Single {
    /// Complex file (JSON or OFF).
    #[arg(long)]
    complex: PathBuf,
    /// Embedding name in the complex file (`off` for OFF input).
    #[arg(long)]
    embedding: String,
}

#[derive(Args, Debug)]
struct Pair {
    /// Complex file (JSON or OFF).
    #[arg(long)]
    complex: PathBuf,
    /// Take the second embedding and complex from this file instead.
    #[arg(long)]
    other: Option<PathBuf>,
    /// Two embedding names: first and second.
    #[arg(long = "embedding", num_args = 1, required = true)]
    embeddings: Vec<String>,
}

#[derive(Args, Debug)]
struct Quadrature {
    /// Number of sphere directions (default: 1024 for d = 2, else 4096).
    #[arg(long)]
    directions: Option<usize>,
    /// Quadrature rule.
    #[arg(long, value_enum, default_value = "auto")]
    scheme: Scheme,
    /// Seed for the Monte Carlo rule.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV file of unit directions, one per row; overrides --scheme.
    #[arg(long)]
    directions_file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Scheme {
    /// Uniform circle for d = 2, Fibonacci lattice for d = 3, Monte Carlo otherwise.
    Auto,
    UniformCircle,
    Fibonacci,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Which {
    Ect,
    Select,
    Prop2,
    Skraba,
    Turner,
    All,
}

impl From<Which> for Check {
    fn from(w: Which) -> Check {
        match w {
            Which::Ect => Check::Ect,
            Which::Select => Check::Select,
            Which::Prop2 => Check::Prop2,
            Which::Skraba => Check::Skraba,
            Which::Turner => Check::Turner,
            Which::All => Check::All,
        }
    }
}

impl Quadrature {
    fn scheme(&self, dim: usize) -> Result<DirectionScheme> {
        if let Some(path) = &self.directions_file {
            let dirs = load_directions_csv(path)
                .with_context(|| format!("reading directions from {}", path.display()))?;
            if dirs[0].dim() != dim {
                bail!(
                    "directions have dimension {}, embeddings have {dim}",
                    dirs[0].dim()
                );
            }
            return Ok(DirectionScheme::custom(dirs)?);
        }
        let n = match self.directions {
            Some(n) => n,
            None => DirectionScheme::default_for(dim)?.count(),
        };
        let kind = match self.scheme {
            Scheme::Auto => return Ok(DirectionScheme::with_count(dim, n)?),
            Scheme::UniformCircle => SchemeKind::UniformCircle,
            Scheme::Fibonacci => SchemeKind::FibonacciSphere,
            Scheme::MonteCarlo => SchemeKind::MonteCarlo { seed: self.seed },
        };
        Ok(DirectionScheme::new(dim, n, kind)?)
    }
}

fn load(path: &Path) -> Result<LoadedComplex> {
    load_complex_file(path).with_context(|| format!("loading {}", path.display()))
}

fn embedding<'a>(l: &'a LoadedComplex, name: &str, check: bool) -> Result<&'a Embedding> {
    let e = l.embedding(name)?;
    if check {
        let bad = e.degenerate_simplices(&l.complex)?;
        if let Some(s) = bad.first() {
            bail!(
                "embedding {name} is degenerate on {} simplices, first {:?}",
                bad.len(),
                s.vertices()
            );
        }
    }
    Ok(e)
}

fn parse_direction(s: &str) -> Result<Direction> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("bad direction {s:?}"))?;
    Ok(Direction::normalized(v)?)
}

fn parse_window(w: &Option<String>, f: &Embedding, g: &Embedding) -> Result<Option<f64>> {
    match w.as_deref() {
        None => Ok(None),
        Some("auto") => Ok(Some(default_window(f, g))),
        Some(x) => Ok(Some(
            x.parse().with_context(|| format!("bad window {x:?}"))?,
        )),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn pretty(v: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

struct Loaded {
    first: LoadedComplex,
    second: Option<LoadedComplex>,
}

impl Loaded {
    fn new(pair: &Pair) -> Result<Self> {
        if pair.embeddings.len() != 2 {
            bail!(
                "expected exactly two --embedding names, got {}",
                pair.embeddings.len()
            );
        }
        Ok(Loaded {
            first: load(&pair.complex)?,
            second: pair.other.as_deref().map(load).transpose()?,
        })
    }

    fn second(&self) -> &LoadedComplex {
        self.second.as_ref().unwrap_or(&self.first)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let check = cli.check_nondegenerate;
    match cli.command {
        Command::Ecc {
            input,
            direction,
            out,
        } => {
            let l = load(&input.complex)?;
            let gc = GeometricComplex::new(
                l.complex.clone(),
                embedding(&l, &input.embedding, check)?.clone(),
            )?;
            let curve =
                ecc_from_filtration(&directional_filtration(&gc, &parse_direction(&direction)?)?);
            let mut buf = Vec::new();
            curve.write_csv(&mut buf)?;
            emit(&out, std::str::from_utf8(&buf)?)?;
        }
        Command::EctDistance {
            pair,
            quad,
            window,
            per_direction,
            out,
        } => {
            let l = Loaded::new(&pair)?;
            let f = embedding(&l.first, &pair.embeddings[0], check)?;
            let g = embedding(l.second(), &pair.embeddings[1], check)?;
            let scheme = quad.scheme(f.dim())?;
            let window = parse_window(&window, f, g)?;
            let est = d_ect_parts(&l.first.complex, f, &l.second().complex, g, &scheme, window)?;
            if let Some(p) = &per_direction {
                let file =
                    fs::File::create(p).with_context(|| format!("writing {}", p.display()))?;
                write_samples_csv(file, &est.per_direction)?;
            }
            let mut report = serde_json::to_value(est.summary())?;
            report["window"] = window.map_or(Value::Null, |b| json!(b));
            emit(&out, &pretty(&report)?)?;
        }
        Command::SelectDistance {
            pair,
            phi,
            quad,
            window,
            out,
        } => {
            let l = Loaded::new(&pair)?;
            if l.second.is_some() {
                bail!("select-distance compares two embeddings of one complex; --other is not supported");
            }
            let f = embedding(&l.first, &pair.embeddings[0], check)?;
            let g = embedding(&l.first, &pair.embeddings[1], check)?;
            let phi = l.first.phi(&phi)?;
            let scheme = quad.scheme(f.dim())?;
            let window = parse_window(&window, f, g)?;
            let est = d_select(&l.first.complex, phi, f, g, &scheme, window)?;
            emit(&out, &pretty(&serde_json::to_value(&est)?)?)?;
        }
        Command::Persistence {
            input,
            direction,
            out,
        } => {
            let l = load(&input.complex)?;
            let gc = GeometricComplex::new(
                l.complex.clone(),
                embedding(&l, &input.embedding, check)?.clone(),
            )?;
            let dgm =
                persistence_diagram(&directional_filtration(&gc, &parse_direction(&direction)?)?)?;
            emit(&out, &dgm.to_json()?)?;
        }
        Command::Wasserstein { a, b, p, q } => {
            let read = |path: &Path| -> Result<PersistenceDiagram> {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                PersistenceDiagram::from_json(&text)
                    .with_context(|| format!("parsing {}", path.display()))
            };
            let q: f64 = if q == "inf" {
                f64::INFINITY
            } else {
                q.parse().with_context(|| format!("bad q {q:?}"))?
            };
            let (da, db) = (read(&a)?, read(&b)?);
            let by_dim: serde_json::Map<String, Value> = w_pq_by_dim(&da, &db, p, q)?
                .into_iter()
                .map(|(k, w)| (k.to_string(), ext(w)))
                .collect();
            let report = json!({
                "p": p,
                "q": ext(q),
                "total": ext(total_w_pq(&da, &db, p, q)?),
                "by_dim": by_dim,
            });
            emit(&None, &pretty(&report)?)?;
        }
        Command::VerifyBound {
            which,
            trials,
            seed,
            directions,
            out,
        } => {
            let reports = run_batch(
                which.into(),
                &BatchConfig {
                    trials,
                    seed,
                    directions,
                },
            )?;
            let failed = reports.iter().filter(|r| !r.holds).count();
            emit(&out, &pretty(&serde_json::to_value(&reports)?)?)?;
            eprintln!(
                "{} of {} checks hold",
                reports.len() - failed,
                reports.len()
            );
            if failed > 0 {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Constants {
            complex,
            embedding: name,
            dim,
            phi,
        } => {
            let l = load(&complex)?;
            let d = match (&name, dim) {
                (Some(n), _) => Some(embedding(&l, n, check)?.dim()),
                (None, d) => d,
            };
            let mut report = json!({
                "c_k": l.complex.max_vertex_cofaces(),
                "euler_characteristic": l.complex.euler_characteristic(),
            });
            if let Some(d) = d {
                report["d"] = json!(d);
                report["c_d"] = json!(dimension_constant(d)?);
            }
            if let Some(p) = phi {
                let e = match &name {
                    Some(n) => l.embedding(n)?.clone(),
                    None => zero_embedding(&l)?,
                };
                let field = SelectField::new(
                    GeometricComplex::new(l.complex.clone(), e)?,
                    l.phi(&p)?.clone(),
                )?;
                report["r_max"] = json!(r_max(&field)?);
            }
            emit(&None, &pretty(&report)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

// r_max does not depend on the embedding
fn zero_embedding(l: &LoadedComplex) -> Result<Embedding> {
    Ok(Embedding::new(
        1,
        l.complex
            .vertices()
            .iter()
            .map(|&v| (v, vec![0.0]))
            .collect::<Vec<_>>(),
    )?)
}

fn ext(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!("inf")
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
