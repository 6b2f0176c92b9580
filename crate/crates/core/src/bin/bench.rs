use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use picard_mg::bench::{
    csv_string, emit_csv, emit_history, history_csv, render_report, run_cell, run_cells, table_config,
    ExperimentConfig, ResultRow,
};
use picard_mg::Result;

#[derive(Parser)]
#[command(name = "bench", about = "Runs Picard/extrapolation experiments and writes CSV tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the CSV (printed to stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of worker threads.
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Run one of the checked-in table configs (1-5).
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        number: u8,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Dump the convergence history of the cells matching a selector.
    History {
        #[arg(long)]
        config: PathBuf,
        /// Cell index or `key=value` terms, e.g. `lambda=7,p=5,grid=32,method=rre(5)`.
        #[arg(long)]
        cell: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn finish(name: &str, rows: &[ResultRow], out: Option<&Path>) -> Result<()> {
    eprint!("{}", render_report(rows));
    match out {
        Some(dir) => {
            let path = dir.join(format!("{name}.csv"));
            emit_csv(rows, &path)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{}", csv_string(rows)),
    }
    Ok(())
}

fn sweep(name: &str, cfg: &ExperimentConfig, out: Option<&Path>, parallel: Option<usize>) -> Result<()> {
    let rows: Vec<ResultRow> = run_cells(cfg, parallel)?.into_iter().map(|r| r.row).collect();
    finish(name, &rows, out)
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "results".into(), |s| s.to_string_lossy().into_owned())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, parallel } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            sweep(&stem(&config), &cfg, out.as_deref(), parallel)
        }
        Command::Table { number, out, parallel } => {
            let cfg = table_config(number)?;
            sweep(&format!("table{number}"), &cfg, out.as_deref(), parallel)
        }
        Command::History { config, cell, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let cells = cfg.cells();
            let selected: Vec<_> = match cell.trim().parse::<usize>() {
                Ok(i) => cells.get(i).copied().into_iter().collect(),
                Err(_) => {
                    let mut v = Vec::new();
                    for c in &cells {
                        if c.matches(&cell)? {
                            v.push(*c);
                        }
                    }
                    v
                }
            };
            if selected.is_empty() {
                return Err(picard_mg::Error::Config(format!("no cell matches '{cell}'")));
            }
            for (i, c) in selected.iter().enumerate() {
                let res = run_cell(&cfg, c);
                eprintln!(
                    "# {} lambda={} p={} grid={} iter={} converged={}",
                    c.method, c.lambda, c.p, c.n, res.row.iter, res.row.converged
                );
                match &out {
                    Some(dir) => {
                        let name = format!("{}_history_{i}.csv", stem(&config));
                        let path = dir.join(name);
                        emit_history(&res.history, &path)?;
                        eprintln!("wrote {}", path.display());
                    }
                    None => print!("{}", history_csv(&res.history)),
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
