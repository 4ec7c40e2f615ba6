//! `fbh` command-line interface.
//!
//! Exit codes: 0 on success, 1 when a verification check fails or an
//! evaluation error occurs, 2 on usage or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use fbh_core::autgroup::{self, AutomorphismJson};
use fbh_core::verify::{self, Suite, SuiteSizes};
use fbh_core::{Bergman, DomainParams, Error, Point};
use serde::Serialize;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "fbh", version, about = "Bergman kernel and automorphisms of the Fock-Bargmann-Hartogs domain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact coefficients of A_{n,m}(t), lowest degree first.
    APoly {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Evaluate K(p, q).
    KernelEval {
        /// Domain parameters as n,m,mu.
        #[arg(long)]
        params: DomainParams,
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Diagonal blocks of the metric tensor at the origin.
    MetricOrigin {
        #[arg(long)]
        params: DomainParams,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Apply an automorphism to a point; prints the image as JSON.
    Apply {
        #[arg(long)]
        params: DomainParams,
        #[arg(long)]
        aut: PathBuf,
        #[arg(long)]
        p: PathBuf,
    },
    /// Canonical form of a . b (b applied first); prints JSON.
    Compose {
        /// The group law depends on mu through the Heisenberg phase.
        #[arg(long)]
        params: DomainParams,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Inverse element; prints JSON.
    Inverse {
        /// Optional; dimensions are otherwise read from the element.
        #[arg(long)]
        params: Option<DomainParams>,
        #[arg(long)]
        a: PathBuf,
    },
    /// Run verification suites.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long)]
        params: DomainParams,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Monte-Carlo sample count.
        #[arg(long)]
        samples: Option<usize>,
        /// Emit the reports as a JSON array.
        #[arg(long)]
        json: bool,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure of a subcommand, tagged with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn eval(err: Error) -> Self {
        Failure {
            code: EXIT_FAILURE,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_FAILURE,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure {
            code: EXIT_FAILURE,
            message: e.to_string(),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("invalid JSON in {}: {e}", path.display())))
}

fn read_point(params: &DomainParams, path: &Path) -> Result<Point, Failure> {
    let p: Point = read_json(path)?;
    p.check(params)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok(p)
}

fn read_aut(params: &DomainParams, path: &Path) -> Result<fbh_core::Automorphism, Failure> {
    let raw: AutomorphismJson = read_json(path)?;
    let (dims, a) = raw
        .into_automorphism(params.mu)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    if (dims.n, dims.m) != (params.n, params.m) {
        return Err(Failure::usage(format!(
            "{}: element acts on n={}, m={} but --params has n={}, m={}",
            path.display(),
            dims.n,
            dims.m,
            params.n,
            params.m
        )));
    }
    Ok(a)
}

/// Shortest round-trip representation of an `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Serialize)]
struct KernelJson {
    value: [f64; 2],
    t_arg: [f64; 2],
}

#[derive(Serialize)]
struct MetricOriginJson {
    n: usize,
    m: usize,
    mu: f64,
    z_block: f64,
    zeta_block: f64,
}

/// Executes one parsed command, writing its output to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<u8, Failure> {
    match cli.command {
        Command::APoly { n, m, format } => {
            let poly = fbh_core::a_poly(n, m).map_err(|e| Failure::usage(e.to_string()))?;
            let fields: Vec<String> = poly.coeffs().iter().map(|c| c.to_string()).collect();
            match format {
                Format::Csv => writeln!(out, "{}", fields.join(","))?,
                Format::Json => writeln!(out, "[{}]", fields.join(","))?,
                Format::Text => writeln!(out, "A_{{{n},{m}}}(t) = {poly}")?,
            }
        }
        Command::KernelEval { params, p, q, format } => {
            let p = read_point(&params, &p)?;
            let q = read_point(&params, &q)?;
            let k = Bergman::new(&params)
                .and_then(|b| b.kernel(&p, &q))
                .map_err(Failure::eval)?;
            match format {
                Format::Json => {
                    let body = KernelJson {
                        value: [k.value.re, k.value.im],
                        t_arg: [k.t_arg.re, k.t_arg.im],
                    };
                    writeln!(out, "{}", serde_json::to_string(&body)?)?;
                }
                Format::Csv => {
                    writeln!(out, "value_re,value_im,t_re,t_im")?;
                    writeln!(
                        out,
                        "{},{},{},{}",
                        fmt_float(k.value.re),
                        fmt_float(k.value.im),
                        fmt_float(k.t_arg.re),
                        fmt_float(k.t_arg.im)
                    )?;
                }
                Format::Text => {
                    writeln!(out, "value {} {}", fmt_float(k.value.re), fmt_float(k.value.im))?;
                    writeln!(out, "t_arg {} {}", fmt_float(k.t_arg.re), fmt_float(k.t_arg.im))?;
                }
            }
        }
        Command::MetricOrigin { params, format } => {
            let origin = Point::origin(&params);
            let t = Bergman::new(&params)
                .and_then(|b| b.metric(&origin, &origin))
                .map_err(Failure::eval)?;
            let body = MetricOriginJson {
                n: params.n,
                m: params.m,
                mu: params.mu,
                z_block: t[(0, 0)].re,
                zeta_block: t[(params.n, params.n)].re,
            };
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string(&body)?)?,
                Format::Csv => {
                    writeln!(out, "block,size,value")?;
                    writeln!(out, "z,{},{}", params.n, fmt_float(body.z_block))?;
                    writeln!(out, "zeta,{},{}", params.m, fmt_float(body.zeta_block))?;
                }
                Format::Text => {
                    writeln!(out, "z_block ({}x{}) {} I", params.n, params.n, fmt_float(body.z_block))?;
                    writeln!(out, "zeta_block ({}x{}) {} I", params.m, params.m, fmt_float(body.zeta_block))?;
                }
            }
        }
        Command::Apply { params, aut, p } => {
            let a = read_aut(&params, &aut)?;
            let p = read_point(&params, &p)?;
            let image = autgroup::apply(&params, &a, &p).map_err(Failure::eval)?;
            writeln!(out, "{}", serde_json::to_string(&image)?)?;
        }
        Command::Compose { params, a, b } => {
            let a = read_aut(&params, &a)?;
            let b = read_aut(&params, &b)?;
            let ab = autgroup::compose(&params, &a, &b).map_err(Failure::eval)?;
            writeln!(out, "{}", serde_json::to_string(&ab)?)?;
        }
        Command::Inverse { params, a } => {
            let raw: AutomorphismJson = read_json(&a)?;
            let mu = params.map_or(1.0, |p| p.mu);
            let (dims, elem) = raw
                .into_automorphism(mu)
                .map_err(|e| Failure::usage(format!("{}: {e}", a.display())))?;
            if let Some(p) = params {
                if (p.n, p.m) != (dims.n, dims.m) {
                    return Err(Failure::usage("element dimensions do not match --params"));
                }
            }
            let inv = autgroup::inverse(&dims, &elem).map_err(Failure::eval)?;
            writeln!(out, "{}", serde_json::to_string(&inv)?)?;
        }
        Command::Verify {
            suite,
            params,
            seed,
            samples,
            json,
        } => {
            let mut sizes = SuiteSizes::default();
            if let Some(s) = samples {
                sizes.mc = s;
            }
            let reports = verify::run_suite(suite, &params, seed, &sizes).map_err(|e| match e {
                Error::InvalidParams(_) => Failure::usage(e.to_string()),
                other => Failure::eval(other),
            })?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&reports)?)?;
            } else {
                for r in &reports {
                    writeln!(out, "{r}")?;
                }
            }
            if !reports.iter().all(|r| r.passed) {
                return Ok(EXIT_FAILURE);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
