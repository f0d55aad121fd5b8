//! `giant-atom`: rates inspection, master-equation runs, sweeps, figure
//! bundles and the validation suite.
//!
//! Exit codes: 0 ok, 1 I/O failure, 2 invalid input or degenerate basis,
//! 3 validation failure.

mod config;
mod figures;

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use giant_atom_core::collective::{collective_basis, collective_populations, transition_rates};
use giant_atom_core::lindblad::BASIS_LABELS;
use giant_atom_core::output::{config_hash, format_number, write_footer};
use giant_atom_core::scenarios::{evolve_sampled, run_sweep};
use giant_atom_core::validation::{run_validation, Fault, ValidationConfig};
use giant_atom_core::{derive_rates_closed_form, ConfigKind, EvolveOptions};

use crate::config::RunConfig;
use crate::figures::{figure_panels, render, FigureOptions, FIGURE_IDS};

#[derive(Parser)]
#[command(name = "giant-atom", version, about = "Entanglement dynamics of two giant atoms on a waveguide")]
struct Cli {
    /// Worker threads; falls back to GIANT_ATOM_JOBS, then to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the couplings and decay rates for one configuration.
    Rates {
        kind: ConfigKind,
        #[arg(allow_negative_numbers = true)]
        theta0: f64,
        /// Also print the collective basis and transition rates.
        #[arg(long)]
        collective: bool,
        /// Read theta0 as a multiple of π.
        #[arg(long)]
        pi_units: bool,
    },
    /// Integrate one trajectory from a JSON config and write a CSV.
    Evolve {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a θ₀ sweep from a JSON config; writes a CSV and a `.meta.json` sidecar.
    Sweep {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the CSV bundle of one figure (3, 4, 5, 6, 7 or detuning).
    Figure {
        id: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        theta_points: Option<usize>,
        #[arg(long)]
        t_points: Option<usize>,
        #[arg(long)]
        delta_points: Option<usize>,
    },
    /// Run the cross-validation suite and write its report.
    Validate {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

enum Failure {
    Io(String),
    Invalid(String),
    Acceptance(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Acceptance(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Invalid(m) | Failure::Acceptance(m) => m,
        }
    }
}

impl From<giant_atom_core::Error> for Failure {
    fn from(e: giant_atom_core::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn io_failure(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn configure_threads(jobs: Option<usize>) -> Result<(), Failure> {
    let jobs = match jobs {
        Some(n) => Some(n),
        None => match std::env::var("GIANT_ATOM_JOBS") {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Failure::Invalid(format!("GIANT_ATOM_JOBS must be a positive integer, got '{v}'")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Failure::Invalid("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads(cli.jobs)?;
    match cli.command {
        Command::Rates { kind, theta0, collective, pi_units } => {
            let theta = if pi_units { theta0 * PI } else { theta0 };
            cmd_rates(kind, theta, collective)
        }
        Command::Evolve { config, output } => cmd_evolve(&config, output),
        Command::Sweep { config, output } => cmd_sweep(&config, output),
        Command::Figure { id, out_dir, theta_points, t_points, delta_points } => {
            let mut options = FigureOptions::default();
            options.theta_points = theta_points.unwrap_or(options.theta_points);
            options.t_points = t_points.unwrap_or(options.t_points);
            options.delta_points = delta_points.unwrap_or(options.delta_points);
            cmd_figure(&id, &out_dir, options)
        }
        Command::Validate { out, inject_fault } => cmd_validate(out, inject_fault.as_deref()),
    }
}

/// Twelve significant digits; magnitudes below 1e-12 print as 0.
fn sig12(x: f64) -> String {
    if x.abs() < 1e-12 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format_number(rounded)
}

fn cmd_rates(kind: ConfigKind, theta0: f64, collective: bool) -> Result<(), Failure> {
    if !theta0.is_finite() {
        return Err(Failure::Invalid("theta0 must be finite".into()));
    }
    let rates = derive_rates_closed_form(kind, theta0, 1.0);
    let mut lines = vec![("kind".to_string(), kind.name().to_string()), ("theta0".into(), sig12(theta0))];
    for (name, v) in giant_atom_core::DerivedRates::FIELD_NAMES.iter().zip(rates.as_array()) {
        lines.push((name.to_string(), sig12(v)));
    }
    if collective {
        let basis = collective_basis(&rates)?;
        let tr = transition_rates(&rates)?;
        lines.push(("Omega".into(), sig12(basis.omega)));
        lines.push(("E_plus".into(), sig12(basis.e_plus)));
        lines.push(("E_minus".into(), sig12(basis.e_minus)));
        for (name, v) in giant_atom_core::TransitionRates::FIELD_NAMES.iter().zip(tr.as_array()) {
            lines.push((name.to_string(), sig12(v)));
        }
    }
    let mut out = io::stdout().lock();
    for (k, v) in lines {
        writeln!(out, "{k:<16}{v}").map_err(|e| Failure::Io(e.to_string()))?;
    }
    Ok(())
}

fn read_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(io_failure(path))?;
    Ok(RunConfig::from_json(&text)?)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(io_failure(p)),
        None => io::stdout().lock().write_all(bytes).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn cmd_evolve(path: &Path, output: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = read_config(path)?;
    let theta = cfg.single_theta()?;
    let params = cfg.params(theta);
    let rates = giant_atom_core::rates_for(cfg.kind, &params);
    let initial = cfg.initial.density_matrix()?;
    let times = cfg.t_grid.values();
    let traj = evolve_sampled(&initial, &params, cfg.kind, &times, &EvolveOptions { step: cfg.step() })?;
    traj.check_invariants()?;
    let concurrence = traj.concurrence()?;
    let populations = match collective_basis(&rates) {
        Ok(b) => Some(collective_populations(&traj, &b)),
        Err(e) => {
            eprintln!("warning: {e}; collective population columns left empty");
            None
        }
    };

    let mut header = vec!["t", "C", "rho_22", "rho_pp", "rho_mm", "rho_00"].into_iter().map(String::from).collect::<Vec<_>>();
    for (i, a) in BASIS_LABELS.iter().enumerate() {
        for b in &BASIS_LABELS[i..] {
            let name = format!("rho_{a}_{b}");
            header.push(format!("{name}_re"));
            header.push(format!("{name}_im"));
        }
    }
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(&header).map_err(|e| Failure::Io(e.to_string()))?;
        for (k, (t, rho)) in traj.times.iter().zip(&traj.states).enumerate() {
            let mut row = vec![format_number(*t), format_number(concurrence[k])];
            match &populations {
                Some(p) => row.extend([p[k].rho_22, p[k].rho_pp, p[k].rho_mm, p[k].rho_00].map(format_number)),
                None => row.extend(std::iter::repeat_n(String::new(), 4)),
            }
            for (_, _, z) in rho.upper_triangle() {
                row.push(format_number(z.re));
                row.push(format_number(z.im));
            }
            w.write_record(&row).map_err(|e| Failure::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| Failure::Io(e.to_string()))?;
    }
    write_footer(&mut buf, &config_hash(&cfg)).map_err(|e| Failure::Io(e.to_string()))?;
    write_output(output.or(cfg.output.clone()).as_deref(), &buf)
}

fn cmd_sweep(path: &Path, output: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = read_config(path)?;
    let spec = cfg.sweep_spec()?;
    let result = run_sweep(&spec)?;
    let failed = result.metadata.failed_cells;
    if failed > 0 {
        eprintln!("warning: {failed} of {} cells failed; see the sidecar", result.cells.len());
    }
    let mut buf = Vec::new();
    result.write_csv(&mut buf).map_err(|e| Failure::Io(e.to_string()))?;
    let target = output.or(cfg.output.clone());
    write_output(target.as_deref(), &buf)?;
    match target {
        Some(p) => {
            let mut sidecar = result.sidecar();
            sidecar["run_config"] = serde_json::to_value(&cfg).expect("config serializes");
            let side = p.with_extension("meta.json");
            if side == path {
                return Err(Failure::Invalid(format!("sidecar {} would overwrite the config", side.display())));
            }
            let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
            fs::write(&side, text + "\n").map_err(io_failure(&side))
        }
        None => {
            eprintln!("note: no output path given, JSON sidecar not written");
            Ok(())
        }
    }
}

fn cmd_figure(id: &str, out_dir: &Path, options: FigureOptions) -> Result<(), Failure> {
    let panels = figure_panels(id, &options).ok_or_else(|| {
        Failure::Invalid(format!("unknown figure id '{id}' (expected one of {})", FIGURE_IDS.join(", ")))
    })?;
    if options.theta_points < 2 || options.t_points < 2 || options.delta_points < 1 {
        return Err(Failure::Invalid("grids need at least 2 theta/t points and 1 delta point".into()));
    }
    fs::create_dir_all(out_dir).map_err(io_failure(out_dir))?;
    for panel in &panels {
        let bytes = render(panel)?;
        let path = out_dir.join(panel.file_name());
        fs::write(&path, bytes).map_err(io_failure(&path))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_validate(out: Option<PathBuf>, fault: Option<&str>) -> Result<(), Failure> {
    let fault = match fault {
        None => None,
        Some("gamma-coll-sign") => Some(Fault::FlipCollectiveDecaySign),
        Some(other) => return Err(Failure::Invalid(format!("unknown fault '{other}'"))),
    };
    let cfg = ValidationConfig { fault, ..ValidationConfig::default() };
    let report = run_validation(&cfg);
    let mut buf = Vec::new();
    report.write_csv(&mut buf, &config_hash(&cfg)).map_err(|e| Failure::Io(e.to_string()))?;
    write_output(out.as_deref(), &buf)?;
    let failures = report.failures().count();
    if failures > 0 {
        for r in report.failures().take(10) {
            eprintln!(
                "FAIL {} {} theta0={} deviation={} tolerance={} {}",
                r.check,
                r.kind,
                format_number(r.theta0),
                format_number(r.max_deviation),
                format_number(r.tolerance),
                r.note
            );
        }
        return Err(Failure::Acceptance(format!("{failures} of {} checks failed", report.rows.len())));
    }
    eprintln!("all {} checks passed", report.rows.len());
    Ok(())
}
