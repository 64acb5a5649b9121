//! `thermograph`: entropy, invariant suites and experiment tables for metric graphs.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thermograph::experiments::{
    parse_number_list, parse_tmax, run_experiment, run_verify, Experiment, ExperimentConfig, GraphSource, Suite, Table,
};
use thermograph::graph::format::parse_length_list;
use thermograph::graph::{parse_family, Family, LengthFunction};
use thermograph::spectral::{entropy, normalize_unit_entropy};
use thermograph::{Error, Result};

#[derive(Parser)]
#[command(name = "thermograph", version, about = "Entropy and thermodynamic metrics on moduli spaces of metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the entropy of a metric graph and its unit-entropy rescaling.
    Entropy(Common),
    /// Run invariant suites and write a per-check CSV.
    Verify {
        /// graph, spectral, cycles, metrics, rose, separating, bounds or all.
        #[arg(long, default_value = "all", value_parser = |s: &str| s.parse::<Suite>().map_err(|e| e.to_string()))]
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
    /// Run an experiment and write its CSV table.
    Experiment {
        /// escape-rose, escape-separating, thin-part, shortcut or rank2-bounds.
        #[arg(value_parser = |s: &str| s.parse::<Experiment>().map_err(|e| e.to_string()))]
        name: Experiment,
        #[command(flatten)]
        common: Common,
    },
}

fn family(s: &str) -> std::result::Result<Family, String> {
    parse_family(s).map_err(|e| e.to_string())
}

/// A comma-separated list, kept whole so clap does not treat it as repeated values.
#[derive(Debug, Clone)]
struct List(Vec<f64>);

fn lengths(s: &str) -> std::result::Result<List, String> {
    parse_length_list(s).map(List).map_err(|e| e.to_string())
}

fn numbers(s: &str) -> std::result::Result<List, String> {
    parse_number_list(s).map(List).map_err(|e| e.to_string())
}

fn tmax(s: &str) -> std::result::Result<f64, String> {
    parse_tmax(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct Common {
    /// Standard graph: rose:R, theta:R, barbell, g:N1,N2 or rose_theta:R.
    #[arg(long, value_parser = family, conflicts_with = "graph_file")]
    family: Option<Family>,
    /// Graph file (`graph`, `v`, `e` and `len` lines).
    #[arg(long)]
    graph_file: Option<PathBuf>,
    /// Comma-separated edge lengths; `inf` allowed.
    #[arg(long, value_parser = lengths)]
    len: Option<List>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rose rank.
    #[arg(long)]
    r: Option<usize>,
    /// Pinned edge of the thin-part slice, 1-based.
    #[arg(long)]
    i: Option<usize>,
    /// Comma-separated slice lengths ε.
    #[arg(long, value_parser = numbers)]
    eps: Option<List>,
    /// Comma-separated shortcut offsets δ.
    #[arg(long, value_parser = numbers)]
    delta: Option<List>,
    /// End of the escape path, e.g. `1-1e-8`.
    #[arg(long, value_parser = tmax, allow_hyphen_values = true)]
    tmax: Option<f64>,
    /// Side-2 lift of the shortcut loop.
    #[arg(long)]
    lift: Option<f64>,
    /// Side-2 lengths where the shortcut loop starts.
    #[arg(long, value_parser = numbers)]
    from: Option<List>,
    /// Side-2 lengths where the shortcut loop turns back.
    #[arg(long, value_parser = numbers)]
    to: Option<List>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let graph = match (&self.family, &self.graph_file) {
            (Some(f), _) => Some(GraphSource::Family(*f)),
            (None, Some(path)) => Some(GraphSource::File(
                std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
            )),
            (None, None) => None,
        };
        Ok(ExperimentConfig {
            graph,
            lengths: self.len.clone().map(|l| l.0),
            seed: self.seed,
            tol: self.tol,
            samples: self.samples,
            r: self.r,
            i: self.i,
            eps: self.eps.clone().map(|l| l.0),
            delta: self.delta.clone().map(|l| l.0),
            tmax: self.tmax,
            lift: self.lift,
            from: self.from.clone().map(|l| l.0),
            to: self.to.clone().map(|l| l.0),
        })
    }

    fn write(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
            None => stdout(text),
        }
    }
}

fn cmd_entropy(common: &Common) -> Result<()> {
    let cfg = common.config()?;
    let file =
        cfg.graph.as_ref().ok_or_else(|| Error::Config("entropy needs --family or --graph-file".into()))?.load()?;
    let l = match (cfg.lengths, file.lengths) {
        (Some(v), _) => LengthFunction::extended(v)?,
        (None, Some(l)) => l,
        (None, None) => return Err(Error::Config("entropy needs --len or `len` lines in the graph file".into())),
    };
    let h = entropy(&file.graph, &l)?;
    let unit = normalize_unit_entropy(&file.graph, &l)?;
    let text: Vec<String> = unit.values().iter().map(|x| x.to_string()).collect();
    stdout(&format!("{h}\n{}\n", text.join(",")))
}

/// Writes to standard output; a closed pipe (as with `| head`) is not an error.
fn stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Config(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn status_counts(t: &Table) -> (usize, usize, usize) {
    let col = t.column("status").unwrap_or_default();
    let n = |s: &str| col.iter().filter(|c| matches!(c, thermograph::experiments::Cell::Text(x) if x == s)).count();
    (n("pass"), n("fail"), n("skip"))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Entropy(common) => cmd_entropy(&common).map(|_| true),
        Command::Verify { suite, common } => {
            let table = run_verify(suite, &common.config()?)?;
            common.write(&table.to_csv()?)?;
            let (pass, fail, skip) = status_counts(&table);
            eprintln!("{pass} passed, {fail} failed, {skip} skipped");
            Ok(fail == 0)
        }
        Command::Experiment { name, common } => {
            let table = run_experiment(name, &common.config()?)?;
            common.write(&table.to_csv()?)?;
            Ok(true)
        }
    }
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("THERMOGRAPH_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("THERMOGRAPH_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors, which is also the config-error code.
    let cli = Cli::parse();
    match init_threads().and_then(|_| run(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        // A failed invariant is a numeric failure.
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
