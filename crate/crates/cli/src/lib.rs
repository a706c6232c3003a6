//! The `pathgeom` command line. `run` is the whole program; `main` only maps
//! its return value to the process exit code.

pub mod suites;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use pathgeom_core::contact_path::{
    expected_ranks, load_spec, parse_rational, Analyzer, ContactError, ODESpec, StepControl,
    DEFAULT_SEED,
};
use pathgeom_core::flat_model::{dims, orbit_dims};
use pathgeom_core::graded_sp::{build, Parabolic};
use pathgeom_core::kostant::{format_table, h2_with, VariantRegistry};
use pathgeom_core::linalg::Q;
use pathgeom_core::split_quaternion::eval_expr;
use pathgeom_expr::{parse_with, FunctionSet};
use thiserror::Error;

use suites::SuiteRegistry;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Output(#[from] std::io::Error),
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "pathgeom", version, about = "Contact path geometry toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TextOrJson {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Harmonic curvature components H^2 via Kostant's algorithm.
    Homology {
        #[arg(long)]
        n: usize,
        /// Crossed Dynkin nodes, e.g. 1,2.
        #[arg(long, value_delimiter = ',', required = true)]
        cross: Vec<usize>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Verify the g_- bracket relations in the matrix realization.
    Brackets {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: TextOrJson,
    },
    /// Run the flat-model identity suites.
    FlatCheck {
        #[arg(long)]
        n: usize,
        /// Restrict to the named suites (repeatable).
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
    /// Dimension data for Q_k and the Sp(n) orbits in Gr(k, 2n).
    Dims {
        #[arg(long)]
        n: usize,
        /// Omit to list every k in 1..=n.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: TextOrJson,
    },
    /// Contact torsion of a spec file.
    Torsion {
        spec: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Write the torsion-free representative of a spec.
    TorsionFree {
        spec: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Filtration ranks at a point, or at the seeded sample points.
    Ranks {
        spec: PathBuf,
        /// Comma-separated rational coordinates.
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Integrate the path ODE and write the trajectory as CSV.
    Integrate {
        spec: PathBuf,
        /// Comma-separated initial state in chart order.
        #[arg(long, allow_hyphen_values = true)]
        init: String,
        #[arg(long, allow_hyphen_values = true)]
        t0: f64,
        #[arg(long, allow_hyphen_values = true)]
        t1: f64,
        #[arg(long)]
        step: f64,
        #[arg(long)]
        adaptive: bool,
        /// Local error tolerance for --adaptive.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a split-quaternion expression in j, e, f.
    Quat {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
}

/// Parses `args` (including the program name) and runs the command.
/// Returns 0 on success, 1 when a verification fails, 2 on usage or I/O errors.
pub fn run<S: AsRef<str>>(args: &[S], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args.iter().map(|a| a.as_ref())) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayVersion};
            let text = e.render().to_string();
            return if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            } else {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(CliError::Contact(e @ ContactError::SingularArc { .. })) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILED
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<bool> {
    match cmd {
        Command::Homology { n, cross, format } => homology(n, &cross, format, out),
        Command::Brackets { n, format } => brackets(n, format, out),
        Command::FlatCheck { n, suites } => flat_check(n, &suites, out),
        Command::Dims { n, k, format } => dims_cmd(n, k, format, out),
        Command::Torsion { spec, json, seed } => torsion(&spec, json, seed, out),
        Command::TorsionFree { spec, output } => torsion_free(&spec, output.as_deref(), out),
        Command::Ranks {
            spec,
            point,
            seed,
            json,
        } => ranks(&spec, point.as_deref(), seed, json, out),
        Command::Integrate {
            spec,
            init,
            t0,
            t1,
            step,
            adaptive,
            tol,
            output,
        } => {
            let control = if adaptive {
                StepControl::Adaptive { initial: step, tol }
            } else {
                StepControl::Fixed(step)
            };
            integrate(&spec, &init, t0, t1, control, output.as_deref(), out)
        }
        Command::Quat { expr } => quat(&expr, out),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn homology(n: usize, cross: &[usize], format: Format, out: &mut dyn Write) -> Result<bool> {
    let reg = VariantRegistry::default();
    let variant = reg.by_crossed(cross).ok_or_else(|| {
        usage(format!(
            "no parabolic crosses nodes {cross:?} (known: {})",
            reg.names().join(", ")
        ))
    })?;
    let comps = h2_with(n, variant).map_err(|e| usage(e.to_string()))?;
    match format {
        Format::Table => out.write_all(format_table(&comps).as_bytes())?,
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&comps)?)?,
    }
    Ok(true)
}

fn brackets(n: usize, format: TextOrJson, out: &mut dyn Write) -> Result<bool> {
    let alg = build(n, Parabolic::P12).map_err(|e| usage(e.to_string()))?;
    let rep = alg.verify_structure_constants();
    match format {
        TextOrJson::Text => {
            for (rel, ok) in &rep.results {
                writeln!(out, "{} {rel}", if *ok { "ok  " } else { "FAIL" })?;
            }
            writeln!(out, "{}/{} relations verified", rep.passed(), rep.total())?;
        }
        TextOrJson::Json => {
            let rows: Vec<_> = rep
                .results
                .iter()
                .map(|(rel, ok)| serde_json::json!({ "relation": rel, "holds": ok }))
                .collect();
            let doc = serde_json::json!({
                "n": n,
                "relations": rows,
                "verified": rep.passed(),
                "total": rep.total(),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(rep.all_pass())
}

fn flat_check(n: usize, only: &[String], out: &mut dyn Write) -> Result<bool> {
    let reg = SuiteRegistry::default();
    for name in only {
        if reg.get(name).is_none() {
            return Err(usage(format!(
                "unknown suite '{name}' (known: {})",
                reg.names().join(", ")
            )));
        }
    }
    let (mut ran, mut passed) = (0, 0);
    for suite in reg.iter() {
        if !only.is_empty() && !only.iter().any(|s| s == suite.name()) {
            continue;
        }
        let res = suite.run(n).map_err(usage)?;
        ran += 1;
        if res.passed {
            passed += 1;
        }
        let tag = if res.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{tag} {}: {}", suite.name(), res.detail)?;
    }
    writeln!(out, "{passed}/{ran} suites passed (n = {n})")?;
    Ok(passed == ran)
}

fn dims_cmd(n: usize, k: Option<usize>, format: TextOrJson, out: &mut dyn Write) -> Result<bool> {
    let ks: Vec<usize> = match k {
        Some(k) => vec![k],
        None => (1..=n).collect(),
    };
    let mut entries = Vec::new();
    for k in ks {
        let d = dims(n, k).map_err(|e| usage(e.to_string()))?;
        let orbits = orbit_dims(n, k).map_err(|e| usage(e.to_string()))?;
        entries.push((d, orbits));
    }
    // the graded pieces of sp(n) only exist in the supported range
    let graded = build(n, Parabolic::P12).ok().map(|alg| {
        let total: usize = alg.bigraded_dims().values().sum();
        total
    });
    let sp_dim = n * (2 * n + 1);
    match format {
        TextOrJson::Text => {
            for (d, orbits) in &entries {
                writeln!(
                    out,
                    "n={} k={}: dim Q_k = {} (fibre k(k+1)/2 = {}, contact rank 2k(n-k) = {})",
                    d.n, d.k, d.dim_qk, d.corank, d.rank_c
                )?;
                let parts: Vec<String> =
                    orbits.iter().map(|(s, dim)| format!("s={s}: {dim}")).collect();
                writeln!(out, "  orbit dims {}", parts.join(", "))?;
            }
            if let Some(total) = graded {
                writeln!(out, "graded components of sp({n}) sum to {total} (n(2n+1) = {sp_dim})")?;
            }
        }
        TextOrJson::Json => {
            let rows: Vec<_> = entries
                .iter()
                .map(|(d, orbits)| {
                    let orbits: Vec<_> = orbits
                        .iter()
                        .map(|(s, dim)| serde_json::json!({ "s": s, "dim": dim }))
                        .collect();
                    serde_json::json!({
                        "k": d.k,
                        "dim_qk": d.dim_qk,
                        "corank": d.corank,
                        "rank_c": d.rank_c,
                        "orbits": orbits,
                    })
                })
                .collect();
            let doc = serde_json::json!({
                "n": n,
                "entries": rows,
                "graded_total": graded,
                "sp_dim": sp_dim,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(graded.is_none_or(|t| t == sp_dim))
}

fn parse_point(src: &str, expected: usize) -> Result<Vec<Q>> {
    let pt = src
        .split(',')
        .map(|s| parse_rational(s.trim()).ok_or_else(|| usage(format!("'{s}' is not a rational number"))))
        .collect::<Result<Vec<Q>>>()?;
    if pt.len() != expected {
        return Err(usage(format!("point has {} coordinates, expected {expected}", pt.len())));
    }
    Ok(pt)
}

fn write_to(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let wrap = |source| CliError::Write {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    body(&mut w).map_err(wrap)?;
    w.flush().map_err(wrap)
}

fn torsion(path: &Path, json: bool, seed: u64, out: &mut dyn Write) -> Result<bool> {
    let spec = load_spec(path)?;
    let an = Analyzer::with_seed(&spec, seed)?;
    let rep = an.torsion()?;
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rep)?)?;
    } else {
        for (i, t) in rep.tau.iter().enumerate() {
            writeln!(out, "tau_{} = {t}", i + 1)?;
        }
        let status = serde_json::to_value(rep.status)?;
        writeln!(out, "status: {}", status.as_str().unwrap_or_default())?;
        if let Some(w) = &rep.witness {
            let coords: Vec<String> = w.iter().map(|x| x.to_string()).collect();
            writeln!(out, "witness: {}", coords.join(","))?;
        }
        writeln!(
            out,
            "closed form and bracket reduction {}",
            if rep.routes_agree { "agree" } else { "DISAGREE" }
        )?;
    }
    Ok(rep.routes_agree)
}

fn torsion_free(path: &Path, output: Option<&Path>, out: &mut dyn Write) -> Result<bool> {
    let spec = load_spec(path)?;
    let fixed = Analyzer::new(&spec)?.torsion_free_representative()?;
    let text = serde_json::to_string_pretty(&fixed.to_json())?;
    match output {
        Some(p) => write_to(p, |w| writeln!(w, "{text}"))?,
        None => writeln!(out, "{text}")?,
    }
    Ok(true)
}

fn ranks(path: &Path, point: Option<&str>, seed: u64, json: bool, out: &mut dyn Write) -> Result<bool> {
    let spec = load_spec(path)?;
    let an = Analyzer::with_seed(&spec, seed)?;
    let points = match point {
        Some(src) => vec![parse_point(src, spec.dim())?],
        None => an.sample_points(),
    };
    let expected = expected_ranks(spec.n);
    let mut all_ok = true;
    let mut rows = Vec::new();
    for pt in &points {
        let coords: Vec<String> = pt.iter().map(|x| x.to_string()).collect();
        match an.filtration_ranks(pt) {
            Ok(rep) => {
                all_ok &= rep.matches_expected();
                rows.push((coords, Some(rep)));
            }
            Err(ContactError::DegeneratePoint) => rows.push((coords, None)),
            Err(e) => return Err(e.into()),
        }
    }
    if json {
        let doc: Vec<_> = rows
            .iter()
            .map(|(p, rep)| serde_json::json!({ "point": p, "ranks": rep }))
            .collect();
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        writeln!(out, "expected U V E dUW Eperp H dE d2E = {expected:?}")?;
        for (p, rep) in &rows {
            match rep {
                Some(r) => writeln!(
                    out,
                    "({}) {:?} {}",
                    p.join(","),
                    r.ranks(),
                    if r.matches_expected() { "ok" } else { "MISMATCH" }
                )?,
                None => writeln!(out, "({}) C = 0, skipped", p.join(","))?,
            }
        }
    }
    Ok(all_ok)
}

fn integrate(
    path: &Path,
    init: &str,
    t0: f64,
    t1: f64,
    control: StepControl,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Result<bool> {
    let spec: ODESpec = load_spec(path)?;
    let state = init
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("'{s}' is not a number"))))
        .collect::<Result<Vec<f64>>>()?;
    let traj = Analyzer::new(&spec)?.integrate(&state, t0, t1, control)?;
    match output {
        Some(p) => {
            write_to(p, |w| traj.write_csv(w))?;
            writeln!(
                out,
                "{} rows written to {}; max |theta(gamma')| = {:.3e}, max |theta12(gamma')| = {:.3e}",
                traj.rows.len(),
                p.display(),
                traj.max_contact_residual(),
                traj.max_secondary_residual()
            )?;
        }
        None => traj.write_csv(&mut *out)?,
    }
    Ok(true)
}

fn quat(src: &str, out: &mut dyn Write) -> Result<bool> {
    let funcs = FunctionSet::Custom(vec!["conj".into(), "norm2".into()]);
    let expr = parse_with(src, &["j", "e", "f"], &funcs).map_err(|e| usage(e.to_string()))?;
    let x = eval_expr(&expr).map_err(|e| usage(e.to_string()))?;
    writeln!(out, "{x}")?;
    let comps: Vec<String> = x.components().iter().map(|c| c.to_string()).collect();
    writeln!(out, "components (1, j, e, f): ({})", comps.join(", "))?;
    let m = x.matrix_rep();
    writeln!(
        out,
        "matrix_rep: [[{}, {}], [{}, {}]]",
        m[0][0], m[0][1], m[1][0], m[1][1]
    )?;
    Ok(true)
}
