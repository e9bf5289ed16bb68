//! Benchmark and diagnostics CLI.
//!
//! Exit codes: 0 on success, 1 on configuration errors, 2 on I/O errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use banditbench::error::Error;
use banditbench::harness::{
    self, counterexample_instance, BuiltinInstance, ExperimentConfig, InstanceSpec, PolicySpec,
};
use banditbench::samplers::Schedule;

#[derive(Parser)]
#[command(
    name = "banditbench",
    about = "Multi-armed bandit benchmarks with exact and Langevin-approximate Thompson sampling",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a regret benchmark and emit results.csv, summary.csv and an SVG
    /// regret plot.
    Bench {
        /// good | agnostic | adversarial | custom:<path>
        #[arg(long)]
        instance: String,
        /// Comma list of exact, ula, sgld, ucb, mixture
        #[arg(long, default_value = "exact,ula,sgld,ucb")]
        policies: String,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// theoretical | practical
        #[arg(long, default_value = "practical")]
        schedule: String,
        /// Posterior scale gamma
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long)]
        out: PathBuf,
        /// Mixing exponent for the mixture policy
        #[arg(long, default_value_t = 0.5)]
        mixture_alpha: f64,
        /// Point-mass location for the mixture policy
        #[arg(long, default_value_t = 2.0)]
        mixture_atom: f64,
        /// Comma list of 1-based arms the mixture policy corrupts
        #[arg(long, default_value = "2")]
        mixture_corrupt: String,
    },
    /// Run empirical bound checks and emit diagnostics.csv.
    Diagnose {
        /// concentration | wasserstein | subgaussian
        #[arg(long)]
        check: String,
        /// Comma list of per-arm sample counts
        #[arg(long, default_value = "10,100")]
        n: String,
        /// Monte Carlo size (sampler outputs or trials per check)
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the two-arm corrupted-posterior instance and report the regret
    /// growth exponent.
    Counterexample {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 100_000)]
        horizon: usize,
        #[arg(long, default_value_t = 50)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) => {
            eprintln!("I/O error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Command::Bench {
            instance,
            policies,
            horizon,
            runs,
            seed,
            schedule,
            gamma,
            out,
            mixture_alpha,
            mixture_atom,
            mixture_corrupt,
        } => {
            let instance_spec = parse_instance(&instance)?;
            let corrupted = parse_usize_list(&mixture_corrupt)?;
            let policy_list =
                parse_policies(&policies, mixture_alpha, mixture_atom, &corrupted)?;
            let cfg = ExperimentConfig {
                instance: instance_spec,
                policies: policy_list,
                horizon,
                runs,
                base_seed: seed,
                schedule: parse_schedule(&schedule)?,
                gamma,
            };
            let table = harness::run_experiment(&cfg)?;
            write_bench_outputs(&table, &out)
        }
        Command::Diagnose {
            check,
            n,
            samples,
            seed,
            out,
        } => {
            let ns = parse_usize_list(&n)?;
            if ns.is_empty() {
                return Err(Error::Config("--n needs at least one value".into()));
            }
            let rows = match check.as_str() {
                "concentration" => harness::diagnose::concentration_rows(&ns, samples, seed)?,
                "wasserstein" => harness::diagnose::wasserstein_rows(&ns, samples, seed)?,
                "subgaussian" => harness::diagnose::subgaussian_rows(&ns, samples, seed)?,
                other => {
                    return Err(Error::Config(format!(
                        "unknown check {other:?}; expected concentration, wasserstein or subgaussian"
                    )))
                }
            };
            std::fs::create_dir_all(&out)?;
            banditbench::diagnostics::write_diagnostics_csv(&rows, &out.join("diagnostics.csv"))?;
            print!("{}", banditbench::diagnostics::render_report(&rows));
            let failed = rows.iter().filter(|r| !r.pass).count();
            println!(
                "{} checks, {} failed; wrote {}",
                rows.len(),
                failed,
                out.join("diagnostics.csv").display()
            );
            Ok(())
        }
        Command::Counterexample {
            alpha,
            horizon,
            runs,
            seed,
            out,
        } => {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::Config(format!(
                    "alpha must lie in (0, 1], got {alpha}"
                )));
            }
            let instance = counterexample_instance(horizon);
            let cfg = ExperimentConfig {
                instance: InstanceSpec::Builtin(BuiltinInstance::GoodPriors), // replaced below
                policies: vec![
                    PolicySpec::MixtureTS {
                        alpha,
                        atom: 2.0,
                        corrupted_arms: vec![2],
                    },
                    PolicySpec::ExactTS,
                ],
                horizon,
                runs,
                base_seed: seed,
                schedule: Schedule::Practical,
                gamma: 1.0,
            };
            let table = harness::run_experiment_on(&cfg, "counterexample", &instance)?;
            write_bench_outputs(&table, &out)?;
            if horizon >= 100 {
                let lo = (horizon / 100).max(10);
                for (idx, policy) in table.policies.iter().enumerate() {
                    let points: Vec<(f64, f64)> = log_checkpoints(lo, horizon, 25)
                        .into_iter()
                        .filter_map(|t| {
                            table
                                .mean_cum_regret_at(idx, t)
                                .filter(|r| *r > 0.0)
                                .map(|r| (t as f64, r))
                        })
                        .collect();
                    if points.len() >= 2 {
                        println!(
                            "{}: log-log regret slope over [{lo}, {horizon}] = {:.3}",
                            policy.name(),
                            log_log_slope(&points)
                        );
                    }
                }
            }
            Ok(())
        }
    }
}

fn write_bench_outputs(table: &harness::ResultTable, out: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(out)?;
    harness::emit_csv(table, &out.join("results.csv"))?;
    harness::emit_summary_csv(table, &out.join("summary.csv"))?;
    let svg_path = out.join(format!("regret_{}.svg", table.instance_name));
    let has_aggregates = (0..table.policies.len()).any(|i| table.aggregate(i).is_some());
    if has_aggregates {
        harness::emit_svg(table, &svg_path)?;
    } else {
        eprintln!("no aggregates to plot; skipping {}", svg_path.display());
    }
    for failure in table.failures() {
        eprintln!(
            "run failed: policy={} run={}: {}",
            table.policies[failure.policy_idx].name(),
            failure.run,
            failure.result.as_ref().err().unwrap()
        );
    }
    for (i, policy) in table.policies.iter().enumerate() {
        if let Some(final_regret) = table.mean_final_regret(i) {
            println!(
                "{}: mean final regret {:.2} over {} runs",
                policy.name(),
                final_regret,
                table.traces_for(i).count()
            );
        }
    }
    println!("wrote {}", out.join("results.csv").display());
    Ok(())
}

fn parse_instance(s: &str) -> Result<InstanceSpec, Error> {
    match s {
        "good" => Ok(InstanceSpec::Builtin(BuiltinInstance::GoodPriors)),
        "agnostic" => Ok(InstanceSpec::Builtin(BuiltinInstance::AgnosticPriors)),
        "adversarial" => Ok(InstanceSpec::Builtin(BuiltinInstance::AdversarialPriors)),
        other => match other.strip_prefix("custom:") {
            Some(path) if !path.is_empty() => Ok(InstanceSpec::Custom(PathBuf::from(path))),
            _ => Err(Error::Config(format!(
                "unknown instance {other:?}; expected good, agnostic, adversarial or custom:<path>"
            ))),
        },
    }
}

fn parse_schedule(s: &str) -> Result<Schedule, Error> {
    match s {
        "theoretical" => Ok(Schedule::Theoretical),
        "practical" => Ok(Schedule::Practical),
        other => Err(Error::Config(format!(
            "unknown schedule {other:?}; expected theoretical or practical"
        ))),
    }
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>, Error> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Config(format!("bad integer {t:?}")))
        })
        .collect()
}

fn parse_policies(
    s: &str,
    mixture_alpha: f64,
    mixture_atom: f64,
    corrupted: &[usize],
) -> Result<Vec<PolicySpec>, Error> {
    let mut out = Vec::new();
    for token in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let policy = match token.to_ascii_lowercase().as_str() {
            "exact" | "exactts" => PolicySpec::ExactTS,
            "ula" | "ulats" => PolicySpec::UlaTS,
            "sgld" | "sgldts" => PolicySpec::SgldTS,
            "ucb" => PolicySpec::Ucb,
            "mixture" | "mixturets" => PolicySpec::MixtureTS {
                alpha: mixture_alpha,
                atom: mixture_atom,
                corrupted_arms: corrupted.to_vec(),
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown policy {other:?}; expected exact, ula, sgld, ucb or mixture"
                )))
            }
        };
        if out.iter().any(|p: &PolicySpec| p.name() == policy.name()) {
            return Err(Error::Config(format!("duplicate policy {token:?}")));
        }
        out.push(policy);
    }
    if out.is_empty() {
        return Err(Error::Config("at least one policy is required".into()));
    }
    Ok(out)
}

fn log_checkpoints(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..count {
        let f = i as f64 / (count - 1) as f64;
        let v = ((lo as f64).ln() + f * ((hi as f64).ln() - (lo as f64).ln())).exp();
        let v = (v.round() as usize).clamp(lo, hi);
        if out.last() != Some(&v) {
            out.push(v);
        }
    }
    out
}

fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let lx = x.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
