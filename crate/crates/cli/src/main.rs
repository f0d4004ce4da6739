use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::info;

use maxmean_core::bench::{self, Algorithm, BenchConfig, CutoffTable, ReferenceSet, Tally};
use maxmean_core::instance::{read_instance_file, write_instance_file};
use maxmean_core::memetic::{solve_logged, EventLog};
use maxmean_core::verify::verify_incremental;
use maxmean_core::{
    brute_force, generate, CrossoverKind, GeneratorConfig, InstanceKind, MemeticParams,
};

#[derive(Parser)]
#[command(name = "maxmean", version, about = "Max-mean dispersion solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random Type I or Type II instance.
    Gen {
        #[arg(long)]
        n: usize,
        /// 1: uniform on [-10,10]; 2: uniform on [-10,-5] U [5,10].
        #[arg(long = "type", value_parser = parse_kind, default_value = "1")]
        kind: InstanceKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        decimals: u32,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Wall-clock limit; defaults to the size-based cutoff.
        #[arg(long)]
        timeout: Option<f64>,
        /// Total tabu iteration budget; replaces the wall-clock limit and
        /// makes the output reproducible.
        #[arg(long)]
        iters: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the population event log (memetic only) as CSV.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Exact optimum by enumeration (n <= 24).
    Oracle { file: PathBuf },
    /// Independent runs over a list of instances.
    Bench {
        /// One instance path per line.
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        /// CSV with `instance` and reference columns.
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        /// Reference column to compare against.
        #[arg(long, default_value = "f_best")]
        ref_column: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Same cutoff for every instance instead of the size-based table.
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long)]
        iters: Option<u64>,
        /// Seed of run 0; run r uses seed + r.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
    },
    /// Check incremental move evaluation against recomputation.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value = "mammdp")]
    algo: Algorithm,
    #[arg(long, default_value = "uniform")]
    crossover: CrossoverKind,
    /// Population size.
    #[arg(long, default_value_t = 10)]
    p: usize,
    /// Tabu search depth.
    #[arg(long, default_value_t = 50_000)]
    alpha: u64,
    #[arg(long, default_value_t = 120)]
    tmax: u32,
}

impl SolverArgs {
    fn params(&self, seed: u64, time_limit: Option<f64>, max_iters: Option<u64>) -> MemeticParams {
        MemeticParams {
            p: self.p,
            alpha: self.alpha,
            t_max: self.tmax,
            time_limit,
            max_iters,
            crossover: self.crossover,
            seed,
            target: None,
        }
    }
}

fn parse_kind(s: &str) -> Result<InstanceKind, String> {
    match s {
        "1" => Ok(InstanceKind::TypeI),
        "2" => Ok(InstanceKind::TypeII),
        other => other
            .parse()
            .map_err(|e: maxmean_core::Error| e.to_string()),
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Gen {
            n,
            kind,
            seed,
            decimals,
            name,
            out,
        } => {
            let mut inst = generate(&GeneratorConfig::new(n, kind, seed).decimals(decimals))?;
            if let Some(name) = name {
                inst = inst.with_name(name);
            }
            write_instance_file(&inst, &out)
                .with_context(|| format!("writing {}", out.display()))?;
            info!("wrote {} (n={n})", out.display());
        }
        Command::Solve {
            file,
            solver,
            timeout,
            iters,
            seed,
            events,
        } => {
            let inst =
                read_instance_file(&file).with_context(|| format!("reading {}", file.display()))?;
            let time_limit = match (iters, timeout) {
                (Some(_), t) => t,
                (None, Some(t)) => Some(t),
                (None, None) => Some(CutoffTable::default().seconds_for(inst.n())),
            };
            let params = solver.params(seed, time_limit, iters);
            let mut log = EventLog::new();
            let result = match solver.algo {
                Algorithm::Memetic => solve_logged(&inst, &params, &mut log)?,
                other => {
                    if events.is_some() {
                        bail!("--events is only available with --algo mammdp");
                    }
                    bench::run_algorithm(other, &inst, &params)?
                }
            };
            println!("{}", result.best);
            if iters.is_some() {
                println!("iters_to_best={}", result.iters_to_best);
            } else {
                println!("time_to_best={:.3}", result.time_to_best.as_secs_f64());
            }
            if let Some(path) = events {
                let file =
                    File::create(&path).with_context(|| format!("writing {}", path.display()))?;
                log.write_csv(BufWriter::new(file))?;
            }
        }
        Command::Oracle { file } => {
            let inst =
                read_instance_file(&file).with_context(|| format!("reading {}", file.display()))?;
            let (f, members) = brute_force(&inst)?;
            println!("{f:.6}");
            let shown: Vec<String> = members.iter().map(|i| (i + 1).to_string()).collect();
            info!("M={{{}}}", shown.join(","));
        }
        Command::Bench {
            manifest,
            runs,
            reference,
            ref_column,
            out,
            solver,
            timeout,
            iters,
            seed,
            workers,
        } => {
            let paths = bench::read_manifest(&manifest)
                .with_context(|| format!("reading {}", manifest.display()))?;
            if paths.is_empty() {
                bail!("manifest {} lists no instances", manifest.display());
            }
            let instances = paths
                .iter()
                .map(|p| read_instance_file(p).with_context(|| format!("reading {}", p.display())))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let references = reference
                .map(|p| {
                    ReferenceSet::from_file(&p, &ref_column)
                        .with_context(|| format!("reading {}", p.display()))
                })
                .transpose()?;
            let cfg = BenchConfig {
                params: solver.params(seed, None, iters),
                algorithm: solver.algo,
                runs,
                cutoffs: timeout.map_or_else(CutoffTable::default, CutoffTable::fixed),
                workers,
            };
            let records = bench::run_benchmark(&instances, &cfg)?;
            let reports = bench::aggregate(&records, references.as_ref());
            bench::write_outputs(&out, &records, &reports)?;
            print!("{}", bench::render_markdown(&reports));
            if references.is_some() {
                let t = Tally::of(&reports);
                info!("better={} equal={} worse={}", t.better, t.equal, t.worse);
            }
        }
        Command::Verify { file, cases, seed } => {
            let inst =
                read_instance_file(&file).with_context(|| format!("reading {}", file.display()))?;
            let r = verify_incremental(&inst, cases, seed);
            println!("cases={}", r.cases);
            println!("max_delta_error={:.3e}", r.max_delta_error);
            println!("max_gain_error={:.3e}", r.max_gain_error);
            println!("max_involution_error={:.3e}", r.max_involution_error);
            println!("involution_failures={}", r.involution_failures);
            if r.involution_failures > 0 || r.max_delta_error > 1e-9 {
                bail!("incremental evaluation disagrees with recomputation");
            }
        }
    }
    Ok(())
}
