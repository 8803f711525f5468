use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use holo_lab::error::LabError;
use holo_lab::lab::{emit_plot_data, run, Experiment, ExperimentConfig, ExperimentReport, PlotSeries};

#[derive(Parser)]
#[command(name = "holo-lab", version, about = "Run holo-lab experiments and export their reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write report.json and report.csv.
    Run {
        /// Experiment config (TOML).
        #[arg(short, long)]
        config: PathBuf,
        /// Output directory; overrides `output` in the config.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Grid override as N_SxN_T, e.g. 400x64.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        /// Cylinder half length override.
        #[arg(long)]
        half_length: Option<f64>,
    },
    /// Write one plot series of a saved report as tab-separated text.
    EmitPlot {
        /// A report.json written by `run`.
        #[arg(short, long)]
        report: PathBuf,
        /// area-vs-lambda or density-vs-s.
        #[arg(short, long)]
        series: String,
        /// Output directory; the file is <series>.tsv. Prints to stdout if absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// List the experiment names accepted in configs.
    ListExperiments,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('x').ok_or("expected N_SxN_T")?;
    let n = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x}: {e}"));
    Ok((n(a)?, n(b)?))
}

/// Exit status: 0 all rows pass, 1 some row failed, 2 config or IO error.
fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("holo-lab: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<bool, LabError> {
    match cmd {
        Command::Run { config, out, seed, grid, half_length } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = Some(s);
            }
            if let Some((n_s, n_t)) = grid {
                cfg.grid.n_s = n_s;
                cfg.grid.n_t = n_t;
            }
            if let Some(h) = half_length {
                cfg.grid.half_length = h;
            }
            let dir = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("."));
            let report = run(&cfg)?;
            for r in &report.rows {
                let status = if r.pass { "pass" } else { "FAIL" };
                let err = r.error.as_deref().map(|e| format!("  ({e})")).unwrap_or_default();
                println!("{status}  {:<40} {:<28} {:>14.6e}  {}{err}", r.case, r.quantity, r.measured, r.check);
            }
            let [json, csv] = report.write(&dir)?;
            println!(
                "{}: {}  ({}, {})",
                cfg.experiment.name(),
                if report.verdict { "PASS" } else { "FAIL" },
                json.display(),
                csv.display()
            );
            Ok(report.verdict)
        }
        Command::EmitPlot { report, series, out } => {
            let what: PlotSeries = series.parse()?;
            let rep = ExperimentReport::from_json(&std::fs::read_to_string(&report)?)?;
            let text = emit_plot_data(&rep, what)?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let path = Path::new(&dir).join(format!("{}.tsv", what.name()));
                    std::fs::write(&path, text)?;
                    println!("{}", path.display());
                }
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<22} {}", e.name(), e.summary());
            }
            Ok(true)
        }
    }
}
