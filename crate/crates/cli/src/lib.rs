//! Command-line driver for `miniprob`: bundled demos, trace summaries and
//! plot-data export.

pub mod data;
pub mod demos;
mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use miniprob::backends::load;
use miniprob::stats::{summary_text, traceplot_data, write_plot_data};

pub use demos::{run_demo, write_outputs, Demo, DemoOptions, DemoRun};
pub use error::{CliError, CliResult, EXIT_DATA, EXIT_NUMERIC, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "miniprob", version, about = "Bayesian models by MCMC")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one of the bundled example models.
    Demo {
        name: Demo,
        /// Draws kept after warm-up.
        #[arg(long)]
        draws: Option<usize>,
        #[arg(long, env = "MINIPROB_SEED", default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// CSV input replacing the bundled data.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Report sampling progress on stderr.
        #[arg(long)]
        progress: bool,
    },
    /// Print posterior summaries from a saved trace.
    Summary {
        dir: PathBuf,
        /// Comma-separated variable names; all variables when absent.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// Export marginal and per-draw plot data of one variable.
    Plotdata {
        dir: PathBuf,
        #[arg(long)]
        var: String,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Execute a parsed command, writing human-readable output to `stdout`.
pub fn execute(cmd: Command, stdout: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Demo {
            name,
            draws,
            seed,
            out,
            data,
            progress,
        } => {
            let opts = DemoOptions {
                draws,
                seed,
                data,
                progress,
            };
            let run = run_demo(name, &opts)?;
            let files = write_outputs(&run, &out)?;
            stdout.write_all(std::fs::read_to_string(&files.summary)?.as_bytes())?;
            writeln!(stdout, "trace written to {}", files.trace_dir.display())?;
        }
        Command::Summary { dir, vars } => {
            let trace = load(&dir)?;
            let vars = if vars.is_empty() {
                trace.var_names().into_iter().map(String::from).collect()
            } else {
                vars
            };
            stdout.write_all(summary_text(&trace, &vars)?.as_bytes())?;
        }
        Command::Plotdata { dir, var, out } => {
            let trace = load(&dir)?;
            let data = traceplot_data(&trace, &[var])?;
            for f in write_plot_data(&data, &out)? {
                writeln!(stdout, "{}", f.display())?;
            }
        }
    }
    Ok(())
}

/// Parse `args`, run the command and return the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(cli.command, &mut std::io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
