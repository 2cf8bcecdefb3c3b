//! Command-line front end: resolve a model, run a computation, emit CSV or
//! JSON with a stable 17-significant-digit float format.

use clap::{Parser, Subcommand};
use fractube_core::{
    builtins, epsilon_grid, montecarlo_tube_area, Averaging, Builtin, ConvexPolygon, Error,
    SelfSimilarSystem, SteinerRep, TilingModel, Window,
};
use fractube_core::builtins::RoundedSquare;
use rayon::prelude::*;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "fractube",
    about = "Complex dimensions and tube formulas of self-similar tilings and fractal sprays",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum TubeMode {
    Formula,
    Oracle,
    Both,
    Montecarlo,
}

impl std::str::FromStr for TubeMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "formula" => Ok(TubeMode::Formula),
            "oracle" => Ok(TubeMode::Oracle),
            "both" => Ok(TubeMode::Both),
            "montecarlo" => Ok(TubeMode::Montecarlo),
            _ => Err(format!("unknown mode {s} (formula|oracle|both|montecarlo)")),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// List the complex dimensions in a band as CSV.
    Dims {
        #[arg(long)]
        model: String,
        #[arg(long)]
        generator: Option<String>,
        #[arg(long, default_value_t = 400.0)]
        im_max: f64,
        /// Left edge of the search window (nonlattice searches only).
        #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
        re_min: f64,
        /// Newton seed spacing for nonlattice searches.
        #[arg(long, default_value_t = 0.25)]
        grid_step: f64,
        #[arg(long, default_value = "-")]
        output: String,
    },
    /// Tube volume curve: truncated formula, exact oracle, and errors.
    Tube {
        #[arg(long)]
        model: String,
        #[arg(long)]
        generator: Option<String>,
        /// Grid spec min:max:count[:log|linear], or a single value.
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 400.0)]
        im_max: f64,
        /// Truncation averaging: none or cesaro.
        #[arg(long, default_value = "cesaro")]
        avg: String,
        #[arg(long, default_value = "both")]
        mode: TubeMode,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "-")]
        output: String,
    },
    /// Tube expansion coefficients as CSV.
    Coeffs {
        #[arg(long)]
        model: String,
        #[arg(long)]
        generator: Option<String>,
        #[arg(long, default_value_t = 400.0)]
        im_max: f64,
        #[arg(long, default_value = "-")]
        output: String,
    },
    /// Measurability classification as JSON.
    Report {
        #[arg(long)]
        model: String,
        #[arg(long)]
        generator: Option<String>,
        #[arg(long, default_value_t = 400.0)]
        im_max: f64,
        #[arg(long, default_value = "-")]
        output: String,
    },
}

/// 17 significant digits; round-trips f64 exactly and is byte-stable.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

enum Model {
    Tiling(TilingModel),
    Pluriphase(RoundedSquare, SteinerRep),
}

fn parse_generator(spec: &str) -> Result<SteinerRep, Error> {
    let (kind, arg) = spec.split_once(':').ok_or_else(|| {
        Error::InvalidModel(format!(
            "generator {spec} must be square:<side>|triangle-eq:<side>|interval:<len>"
        ))
    })?;
    let value: f64 = arg
        .parse()
        .map_err(|_| Error::InvalidModel(format!("bad generator size {arg}")))?;
    match kind {
        "square" => SteinerRep::from_polygon(&ConvexPolygon::square(value)?),
        "triangle-eq" => SteinerRep::from_polygon(&ConvexPolygon::equilateral_triangle(value)?),
        "interval" => SteinerRep::interval(value),
        _ => Err(Error::InvalidModel(format!("unknown generator kind {kind}"))),
    }
}

fn resolve_model(spec: &str, generator: Option<&str>) -> Result<Model, Error> {
    if let Some(list) = spec.strip_prefix("ratios:") {
        let ratios: Vec<f64> = list
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidModel(format!("bad ratio {t}")))
            })
            .collect::<Result<_, _>>()?;
        let gen_spec = generator.unwrap_or("interval:1");
        let rep = parse_generator(gen_spec)?;
        let zeta = fractube_core::ScalingZeta::new(&ratios)?;
        return Ok(Model::Tiling(TilingModel::new(zeta, vec![rep])?));
    }
    if std::path::Path::new(spec).exists() || spec.ends_with(".json") {
        let text = std::fs::read_to_string(spec)
            .map_err(|e| Error::InvalidModel(format!("cannot read {spec}: {e}")))?;
        let system: SelfSimilarSystem = serde_json::from_str(&text)?;
        return Ok(Model::Tiling(TilingModel::from_system(&system)?));
    }
    match builtins::builtin(spec)? {
        Builtin::Tiling { model, .. } => Ok(Model::Tiling(model)),
        Builtin::PluriphaseSquare { sampler, rep } => Ok(Model::Pluriphase(sampler, rep)),
    }
}

fn parse_eps_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |t: &str| -> Result<f64, Error> {
        t.parse::<f64>()
            .map_err(|_| Error::InvalidModel(format!("bad eps value {t}")))
    };
    let grid = match parts.len() {
        1 => vec![parse(parts[0])?],
        3 | 4 => {
            let min = parse(parts[0])?;
            let max = parse(parts[1])?;
            let count: usize = parts[2]
                .parse()
                .map_err(|_| Error::InvalidModel(format!("bad eps count {}", parts[2])))?;
            let log = match parts.get(3).copied().unwrap_or("linear") {
                "log" => true,
                "linear" => false,
                other => {
                    return Err(Error::InvalidModel(format!(
                        "eps spacing must be log or linear, got {other}"
                    )))
                }
            };
            if count == 0 {
                return Err(Error::InvalidModel("eps count must be >= 1".into()));
            }
            epsilon_grid(min, max, count, log)
        }
        _ => {
            return Err(Error::InvalidModel(
                "eps spec is <value> or min:max:count[:log|linear]".into(),
            ))
        }
    };
    if grid.iter().any(|e| !e.is_finite() || *e <= 0.0) {
        return Err(Error::InvalidModel("eps values must be positive".into()));
    }
    Ok(grid)
}

fn parse_avg(spec: &str) -> Result<Averaging, Error> {
    match spec {
        "none" => Ok(Averaging::None),
        "cesaro" => Ok(Averaging::Cesaro),
        other => Err(Error::InvalidModel(format!(
            "averaging must be none or cesaro, got {other}"
        ))),
    }
}

fn write_output(path: &str, content: &str) -> Result<(), Error> {
    if path == "-" {
        print!("{content}");
        std::io::stdout()
            .flush()
            .map_err(|e| Error::InvalidModel(format!("stdout: {e}")))?;
    } else {
        std::fs::write(PathBuf::from(path), content)
            .map_err(|e| Error::InvalidModel(format!("cannot write {path}: {e}")))?;
    }
    Ok(())
}

fn cmd_dims(
    model: &str,
    generator: Option<&str>,
    im_max: f64,
    re_min: f64,
    grid_step: f64,
    output: &str,
) -> Result<(), Error> {
    let model = resolve_model(model, generator)?;
    let tiling = match model {
        Model::Tiling(t) => t,
        Model::Pluriphase(..) => {
            return Err(Error::InvalidModel(
                "pluriphase-square has no scaling zeta function; use tube --mode montecarlo".into(),
            ))
        }
    };
    let zeta = tiling.zeta();
    let win = Window::new(re_min, zeta.similarity_dimension() + 0.5, im_max)?;
    let dims = match zeta.lattice() {
        Some(lat) => zeta.complex_dimensions_lattice(lat, &win)?,
        None => zeta.complex_dimensions_nonlattice(&win, grid_step)?,
    };
    let mut out = String::from("re,im,multiplicity,residue_re,residue_im\n");
    for dim in &dims {
        let (rre, rim) = dim
            .residue
            .map(|r| (fmt(r.re), fmt(r.im)))
            .unwrap_or_else(|| ("nan".into(), "nan".into()));
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(dim.omega.re),
            fmt(dim.omega.im),
            dim.multiplicity,
            rre,
            rim
        ));
    }
    write_output(output, &out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_tube(
    model: &str,
    generator: Option<&str>,
    eps_spec: &str,
    im_max: f64,
    avg: &str,
    mode: TubeMode,
    samples: u64,
    seed: u64,
    output: &str,
) -> Result<(), Error> {
    let grid = parse_eps_grid(eps_spec)?;
    let averaging = parse_avg(avg)?;
    match resolve_model(model, generator)? {
        Model::Pluriphase(sampler, rep) => {
            if mode != TubeMode::Montecarlo {
                return Err(Error::InvalidModel(
                    "pluriphase-square supports only --mode montecarlo".into(),
                ));
            }
            let rows: Vec<String> = grid
                .par_iter()
                .map(|&eps| {
                    let exact = rep.tube(eps.min(rep.inradius() * 2.0));
                    let est = montecarlo_tube_area(&sampler, eps, samples, seed)?;
                    Ok(format!(
                        "{},{},{},{},{}\n",
                        fmt(eps),
                        fmt(exact),
                        fmt(est.estimate),
                        fmt(est.std_error),
                        fmt((est.estimate - exact).abs())
                    ))
                })
                .collect::<Result<_, Error>>()?;
            let mut out = String::from("epsilon,v_exact,v_estimate,std_error,abs_err\n");
            rows.into_iter().for_each(|r| out.push_str(&r));
            write_output(output, &out)
        }
        Model::Tiling(tiling) => {
            if mode == TubeMode::Montecarlo {
                return Err(Error::InvalidModel(
                    "montecarlo mode applies to pluriphase-square only".into(),
                ));
            }
            let rows: Vec<String> = grid
                .par_iter()
                .map(|&eps| {
                    let (formula, oracle) = match mode {
                        TubeMode::Formula => (
                            Some(tiling.tube_volume_formula(eps, im_max, averaging)?),
                            None,
                        ),
                        TubeMode::Oracle => (None, Some(tiling.tube_volume_oracle(eps)?)),
                        _ => (
                            Some(tiling.tube_volume_formula(eps, im_max, averaging)?),
                            Some(tiling.tube_volume_oracle(eps)?),
                        ),
                    };
                    let v_f = formula.map(|f| f.value);
                    let (abs_err, rel_err) = match (v_f, oracle) {
                        (Some(f), Some(o)) => {
                            let abs = (f - o).abs();
                            (Some(abs), Some(abs / o.abs().max(f64::MIN_POSITIVE)))
                        }
                        _ => (None, None),
                    };
                    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_else(|| "nan".into());
                    Ok(format!(
                        "{},{},{},{},{}\n",
                        fmt(eps),
                        opt(v_f),
                        opt(oracle),
                        opt(abs_err),
                        opt(rel_err)
                    ))
                })
                .collect::<Result<_, Error>>()?;
            let mut out = String::from("epsilon,v_formula,v_oracle,abs_err,rel_err\n");
            rows.into_iter().for_each(|r| out.push_str(&r));
            write_output(output, &out)
        }
    }
}

fn cmd_coeffs(model: &str, generator: Option<&str>, im_max: f64, output: &str) -> Result<(), Error> {
    let tiling = match resolve_model(model, generator)? {
        Model::Tiling(t) => t,
        Model::Pluriphase(..) => {
            return Err(Error::InvalidModel(
                "pluriphase-square has no coefficient expansion".into(),
            ))
        }
    };
    let exp = tiling.tube_expansion(im_max)?;
    let mut out = String::from("omega_re,omega_im,c_re,c_im,kind\n");
    for (k, c) in &exp.integer_terms {
        out.push_str(&format!(
            "{},{},{},{},integer\n",
            fmt(*k as f64),
            fmt(0.0),
            fmt(*c),
            fmt(0.0)
        ));
    }
    for (omega, c) in &exp.scaling_terms {
        out.push_str(&format!(
            "{},{},{},{},scaling\n",
            fmt(omega.re),
            fmt(omega.im),
            fmt(c.re),
            fmt(c.im)
        ));
    }
    write_output(output, &out)
}

fn cmd_report(model: &str, generator: Option<&str>, im_max: f64, output: &str) -> Result<(), Error> {
    let tiling = match resolve_model(model, generator)? {
        Model::Tiling(t) => t,
        Model::Pluriphase(..) => {
            return Err(Error::InvalidModel(
                "pluriphase-square has no measurability report".into(),
            ))
        }
    };
    let report = tiling.measurability_report(im_max)?;
    let json = serde_json::to_string_pretty(&report)?;
    write_output(output, &format!("{json}\n"))
}

fn run() -> Result<(), Error> {
    if let Ok(threads) = std::env::var("FRACTUBE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n >= 1 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .ok();
            }
        }
    }
    match Cli::parse().command {
        Command::Dims {
            model,
            generator,
            im_max,
            re_min,
            grid_step,
            output,
        } => cmd_dims(&model, generator.as_deref(), im_max, re_min, grid_step, &output),
        Command::Tube {
            model,
            generator,
            eps,
            im_max,
            avg,
            mode,
            samples,
            seed,
            output,
        } => cmd_tube(
            &model,
            generator.as_deref(),
            &eps,
            im_max,
            &avg,
            mode,
            samples,
            seed,
            &output,
        ),
        Command::Coeffs {
            model,
            generator,
            im_max,
            output,
        } => cmd_coeffs(&model, generator.as_deref(), im_max, &output),
        Command::Report {
            model,
            generator,
            im_max,
            output,
        } => cmd_report(&model, generator.as_deref(), im_max, &output),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
