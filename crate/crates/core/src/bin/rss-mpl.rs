use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use rss_mpl::asymptotics::PopulationContext;
use rss_mpl::estimators::estimate_rss;
use rss_mpl::harness::{self, ExperimentConfig, DEFAULT_BATCHES, DEFAULT_REPLICATIONS};
use rss_mpl::io as csvio;
use rss_mpl::{with_threads, Distribution, QuadratureConfig, RankingModel};

#[derive(Parser)]
#[command(name = "rss-mpl", version, about = "Mean past lifetime under ranked set sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact K(t) on a quantile grid: CSV q,t,K
    ExactMpl {
        #[arg(long)]
        dist: Distribution,
        /// q1:q2:step
        #[arg(long, default_value = "0.05:0.95:0.05")]
        grid: String,
    },
    /// Exact asymptotic variances and ARE on a quantile grid
    ExactAre {
        #[arg(long)]
        dist: Distribution,
        #[arg(long, default_value = "perfect")]
        model: String,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "0.05:0.95:0.05")]
        grid: String,
    },
    /// Monte Carlo relative efficiency MSE(K_SRS) / MSE(K_RSS)
    SimulateRe {
        #[arg(long)]
        dist: Distribution,
        #[arg(long, default_value = "perfect")]
        model: String,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BATCHES)]
        batches: usize,
        #[arg(long, default_value = "0.05:0.95:0.05")]
        grid: String,
        /// Worker threads (default: all cores). Output does not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// K_RSS(t) with plug-in variance and normal-approximation CI from a cycle,rank,value CSV
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        /// a:b:count
        #[arg(long)]
        t_grid: String,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// The HIV example: bundled data, or a freshly simulated sample with --seed
    HivDemo {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn stdout() -> BufWriter<std::io::StdoutLock<'static>> {
    BufWriter::new(std::io::stdout().lock())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ExactMpl { dist, grid } => {
            let grid = csvio::parse_step_grid(&grid)?;
            let pts = harness::exact_mpl_curve(&dist, &grid, &QuadratureConfig::default())?;
            csvio::write_mpl_csv(stdout(), &pts)?;
        }
        Command::ExactAre { dist, model, p, k, grid } => {
            let model = RankingModel::from_name(&model, p)?;
            let grid = csvio::parse_step_grid(&grid)?;
            let ctx = PopulationContext::new(dist, model, k)?;
            let pts = harness::exact_are_curve(&ctx, &grid)?;
            csvio::write_are_csv(stdout(), &dist.to_string(), model.name(), model.p(), k, &pts)?;
        }
        Command::SimulateRe { dist, model, p, n, k, reps, seed, batches, grid, threads } => {
            let model = RankingModel::from_name(&model, p)?;
            let cfg = ExperimentConfig::new(dist, model, n, k)
                .replications(reps)
                .seed(seed)
                .batches(batches)
                .grid(csvio::parse_step_grid(&grid)?);
            let report = with_threads(threads, || harness::simulate_re(&cfg))??;
            csvio::write_report_csv(stdout(), &report)?;
        }
        Command::Estimate { input, t_grid, alpha } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                bail!("--alpha must lie in (0, 1), got {alpha}");
            }
            let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let sample = csvio::read_rss_csv(file).with_context(|| format!("reading {}", input.display()))?;
            let estimates = csvio::parse_count_grid(&t_grid)?
                .into_iter()
                .map(|t| estimate_rss(&sample, t, 1.0 - alpha))
                .collect::<rss_mpl::Result<Vec<_>>>()?;
            csvio::write_estimates_csv(stdout(), &estimates)?;
        }
        Command::HivDemo { seed, out } => {
            let demo = harness::hiv_demo(seed)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let sample_path = out.join("hiv_sample.csv");
            let curve_path = out.join("hiv_estimate.csv");
            csvio::write_rss_csv(BufWriter::new(File::create(&sample_path)?), &demo.sample)?;
            csvio::write_estimates_csv(BufWriter::new(File::create(&curve_path)?), &demo.curve)?;
            let mut so = stdout();
            writeln!(so, "{}", sample_path.display())?;
            writeln!(so, "{}", curve_path.display())?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run(Cli::parse())
}
