use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use vhetnet_cli::{list_presets, preset, run, write_csv, PathKind, RunOptions, Scenario};

/// Coverage and rate of aerial users in vertical heterogeneous networks.
#[derive(Parser)]
#[command(name = "vhetnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a built-in preset and write CSV.
    Run {
        /// Scenario TOML file.
        scenario: Option<PathBuf>,
        /// Built-in preset instead of a file.
        #[arg(long, conflicts_with = "scenario")]
        preset: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo trials per point.
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated subset of analytical_exact, analytical_approx, montecarlo.
        #[arg(long, value_delimiter = ',')]
        paths: Option<Vec<PathKind>>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fill the runtime_ms column.
        #[arg(long)]
        timing: bool,
        /// Worker threads; all cores when unset.
        #[arg(long, env = "VHETNET_WORKERS")]
        workers: Option<usize>,
    },
    /// List the built-in presets and what each one plots.
    ListPresets,
    /// Print the TOML source of a preset.
    ShowPreset { id: String },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::ListPresets => {
            for (id, figure) in list_presets() {
                println!("{id:<20} {figure}");
            }
        }
        Command::ShowPreset { id } => {
            let p = vhetnet_cli::PRESETS
                .iter()
                .find(|p| p.id == id)
                .with_context(|| format!("unknown preset `{id}`"))?;
            print!("{}", p.source);
        }
        Command::Run {
            scenario,
            preset: preset_id,
            seed,
            trials,
            paths,
            out,
            timing,
            workers,
        } => {
            if let Some(n) = workers {
                rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
            }
            let scenario = match (scenario, preset_id) {
                (Some(path), None) => Scenario::from_file(&path)?,
                (None, Some(id)) => preset(&id)?,
                _ => bail!("give a scenario file or --preset"),
            };
            let opts = RunOptions {
                seed,
                n_trials: trials,
                paths,
                timing,
            };
            let rows = run(&scenario, &opts)?;
            match out {
                Some(path) => {
                    let f = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    write_csv(std::io::BufWriter::new(f), &scenario, &rows)?;
                }
                None => {
                    let stdout = std::io::stdout();
                    write_csv(stdout.lock(), &scenario, &rows)?;
                    stdout.lock().flush()?;
                }
            }
        }
    }
    Ok(())
}
