//! Batch front end: every subcommand reads one TOML config (plus optional
//! dotted-path overrides) and emits CSV, JSON, or plain text, so runs are
//! reproducible from the config file alone.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use config::{resolve, RunConfig};
use jost_core::{
    accuracy_map, bound_state_scan, cross_sections, cross_sections_to_csv, det_fin,
    domain_margin, find_spectral_point, integrate_coefficients, integrate_direct, s_matrix,
    spectral_points_to_csv, ChannelSet, DetSource, ExpansionTable, JostError, Result,
    SheetSelector, SpectralPoint,
};

#[derive(Parser)]
#[command(name = "jost", version, about = "Multichannel Jost-matrix engine")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Bound-state scan plus seeded resonance searches (spectral CSV)
    Spectrum(Common),
    /// Cross sections over a real energy grid (CSV)
    Scan(Common),
    /// Taylor table of the factorized Jost system around a center (JSON)
    Expand(Common),
    /// Evaluate a saved expansion table at one energy and sheet (text)
    Eval(Common),
    /// Relative determinant error of a table against direct solves (CSV)
    AccuracyMap(Common),
    /// Convergence-domain margin over an energy rectangle (CSV)
    Domain(Common),
}

impl Cmd {
    fn common(&self) -> &Common {
        match self {
            Cmd::Spectrum(c) | Cmd::Scan(c) | Cmd::Expand(c) | Cmd::Eval(c)
            | Cmd::AccuracyMap(c) | Cmd::Domain(c) => c,
        }
    }
}

#[derive(Args)]
struct Common {
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,

    /// Override a config key, e.g. --override solver.r_max=40
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads for grid and scan commands (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,

    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(&Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for configuration and usage problems, 3 for numerical failures.
fn exit_code(e: &JostError) -> u8 {
    match e {
        JostError::InvalidInput(_)
        | JostError::Io(_)
        | JostError::Serde(_)
        | JostError::Potential(_)
        | JostError::TooManySheets(_) => 2,
        _ => 3,
    }
}

fn run(cmd: &Cmd) -> Result<()> {
    let args = cmd.common();
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(JostError::InvalidInput("--jobs must be positive".into()));
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let (cfg, base) = RunConfig::load(&args.config, &args.overrides)?;
    let output = match cmd {
        Cmd::Spectrum(_) => cmd_spectrum(&cfg, &base)?,
        Cmd::Scan(_) => cmd_scan(&cfg, &base)?,
        Cmd::Expand(_) => cmd_expand(&cfg, &base)?,
        Cmd::Eval(_) => cmd_eval(&cfg, &base)?,
        Cmd::AccuracyMap(_) => cmd_accuracy_map(&cfg, &base)?,
        Cmd::Domain(_) => cmd_domain(&cfg, &base)?,
    };
    emit(&args.out, &output)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => Ok(std::fs::write(path, content)?),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn need<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T> {
    block.as_ref().ok_or_else(|| {
        JostError::InvalidInput(format!("this command needs a [{name}] section in the config"))
    })
}

fn parse_sheet(s: &str, n_channels: usize) -> Result<SheetSelector> {
    let sheet: SheetSelector = s.parse()?;
    if sheet.len() != n_channels {
        return Err(JostError::InvalidInput(format!(
            "sheet {s:?} has {} signs for {n_channels} channels",
            sheet.len()
        )));
    }
    Ok(sheet)
}

fn cmd_spectrum(cfg: &RunConfig, base: &std::path::Path) -> Result<String> {
    let sp = need(&cfg.spectrum, "spectrum")?;
    let (cs, pot) = cfg.model()?.build(base)?;
    let source = DetSource::Direct { potential: pot.as_ref(), settings: &cfg.solver };

    let mut points: Vec<SpectralPoint> = Vec::new();
    match (sp.e_min, sp.e_max) {
        (Some(e_min), Some(e_max)) => {
            if !(sp.samples_per_unit > 0.0) {
                return Err(JostError::InvalidInput("samples_per_unit must be positive".into()));
            }
            let n = ((e_max - e_min) * sp.samples_per_unit).ceil().max(1.0) as usize + 1;
            points.extend(bound_state_scan(&source, &cs, e_min, e_max, n)?);
        }
        (None, None) => {}
        _ => {
            return Err(JostError::InvalidInput(
                "spectrum needs both e_min and e_max, or neither".into(),
            ));
        }
    }
    for seed in &sp.seeds {
        let sheet = parse_sheet(&seed.sheet, cs.len())?;
        let guess = Complex64::new(seed.guess[0], seed.guess[1]);
        points.push(find_spectral_point(&source, &cs, guess, &sheet, 1e-12, 60)?);
    }
    Ok(spectral_points_to_csv(&points))
}

fn cmd_scan(cfg: &RunConfig, base: &std::path::Path) -> Result<String> {
    let sc = need(&cfg.scan, "scan")?;
    let (cs, pot) = cfg.model()?.build(base)?;
    if !(sc.step > 0.0) || !sc.step.is_finite() {
        return Err(JostError::InvalidInput(format!("scan step must be positive, got {}", sc.step)));
    }
    if !(sc.e_min <= sc.e_max) || !sc.e_min.is_finite() || !sc.e_max.is_finite() {
        return Err(JostError::InvalidInput(format!(
            "bad scan range [{}, {}]",
            sc.e_min, sc.e_max
        )));
    }
    let lowest = cs
        .channels()
        .iter()
        .map(|c| c.threshold)
        .fold(f64::INFINITY, f64::min);
    if sc.e_max <= lowest {
        return Err(JostError::InvalidInput(format!(
            "scan range ends at {} but the lowest threshold is {lowest}: no open channels",
            sc.e_max
        )));
    }
    let n = ((sc.e_max - sc.e_min) / sc.step + 1e-9).floor() as usize + 1;
    let sheet = cs.physical_sheet();
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let e = sc.e_min + i as f64 * sc.step;
            let jp = integrate_direct(&cs, pot.as_ref(), Complex64::new(e, 0.0), &sheet, &cfg.solver)?;
            let s = s_matrix(&cs, &jp)?;
            cross_sections(&cs, e, &s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(cross_sections_to_csv(cs.len(), &rows))
}

fn cmd_expand(cfg: &RunConfig, base: &std::path::Path) -> Result<String> {
    let ex = need(&cfg.expand, "expand")?;
    let (cs, pot) = cfg.model()?.build(base)?;
    let center = Complex64::new(ex.center[0], ex.center[1]);
    let table = integrate_coefficients(&cs, pot.as_ref(), center, ex.order, &cfg.solver)?;
    table.to_json()
}

fn cmd_eval(cfg: &RunConfig, base: &std::path::Path) -> Result<String> {
    let ev = need(&cfg.eval, "eval")?;
    let table = ExpansionTable::load(&resolve(base, &ev.table))?;
    let cs = table.channels().clone();
    let sheet = parse_sheet(&ev.sheet, cs.len())?;
    let energy = Complex64::new(ev.energy[0], ev.energy[1]);

    let jp = table.jost(energy, &sheet)?;
    let det = det_fin(&DetSource::Expansion(&table), &cs, energy, &sheet)?;
    let s = s_matrix(&cs, &jp)?;

    let mut out = String::new();
    out.push_str(&format!(
        "table: center = {}  order = {}  theta = {}\n",
        table.center(),
        table.order(),
        table.theta()
    ));
    out.push_str(&format!("E = {energy}  sheet = {sheet}\n"));
    out.push_str("F_in:\n");
    out.push_str(&format_matrix(&jp.f_in));
    out.push_str("F_out:\n");
    out.push_str(&format_matrix(&jp.f_out));
    out.push_str(&format!("det F_in = {det}\n"));
    out.push_str("S:\n");
    out.push_str(&format_matrix(&s));
    Ok(out)
}

fn format_matrix(m: &DMatrix<Complex64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect();
        out.push_str("  ");
        out.push_str(&row.join("  "));
        out.push('\n');
    }
    out
}

fn cmd_accuracy_map(cfg: &RunConfig, base: &std::path::Path) -> Result<String> {
    let am = need(&cfg.accuracy_map, "accuracy_map")?;
    let (cs, pot) = cfg.model()?.build(base)?;
    let table = ExpansionTable::load(&resolve(base, &am.table))?;
    check_table_model(&table, &cs)?;
    am.grid.validate()?;
    let sheet = parse_sheet(&am.sheet, cs.len())?;
    let map = accuracy_map(&table, pot.as_ref(), &am.grid, &sheet, &cfg.solver)?;
    Ok(map.to_csv())
}

fn check_table_model(table: &ExpansionTable, cs: &ChannelSet) -> Result<()> {
    if table.channels() != cs {
        return Err(JostError::InvalidInput(
            "expansion table was built for a different channel set than [model]".into(),
        ));
    }
    Ok(())
}

fn cmd_domain(cfg: &RunConfig, base: &std::path::Path) -> Result<String> {
    let dm = need(&cfg.domain, "domain")?;
    let (cs, pot) = cfg.model()?.build(base)?;
    dm.grid.validate()?;
    let mut out = String::from("re_E,im_E,margin,inside\n");
    for energy in dm.grid.points() {
        let margin = domain_margin(&cs, pot.as_ref(), energy)?;
        out.push_str(&format!(
            "{},{},{:e},{}\n",
            energy.re,
            energy.im,
            margin,
            u8::from(margin > 0.0)
        ));
    }
    Ok(out)
}
