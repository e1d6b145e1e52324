use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use algonet::config::{Cell, ConfigError, ExperimentConfig, OmegaMethodConfig};
use algonet::experiment::{self, summary_string, ExperimentError};
use algonet::formats::{self, edge_list_string, omega_record, parse_bits, read_records_csv};
use algonet_core::graph::{approx_diameter, degree_ccdf, fit_power_law, generate_ba, NetworkParams};
use algonet_core::machines::{omega_enumerate_with_limit, omega_monte_carlo, DEFAULT_ENUMERATION_LIMIT, MAX_K_MAX};
use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "algonet",
    version,
    about = "Busy-beaver imitation under SIS contagion on scale-free networks"
)]
struct Cli {
    /// JSON configuration; unspecified keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Enumerate,
    MonteCarlo,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Barabási-Albert graph and emit its edge list.
    GenGraph {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        m0: Option<usize>,
    },
    /// Estimate the time-bounded halting probability.
    Omega {
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        t_max: Option<u64>,
        /// Input word as a 0/1 string.
        #[arg(long)]
        w: Option<String>,
        /// Raise the enumeration length guard.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        limit: usize,
    },
    /// Run one cell and emit its trajectory CSV.
    Simulate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Run the full grid and write records, summary and provenance files.
    Sweep,
    /// Re-aggregate an existing records.csv into a summary.
    Report {
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, file: &str, text: &str) -> anyhow::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(file);
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = load_config(&cli)?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::GenGraph { n, m, m0 } => {
            let n = n.unwrap_or(cfg.n[0]);
            let m = m.unwrap_or(cfg.m[0]);
            let mut params = NetworkParams::new(n, m, cfg.master_seed);
            if let Some(m0) = m0 {
                params = params.with_m0(m0);
            }
            params.validate().map_err(invalid)?;
            let g = generate_ba(&params, &mut ChaCha8Rng::seed_from_u64(params.seed))?;
            let fit = fit_power_law(&degree_ccdf(&g), 2 * m)
                .map(|f| format!("{:.3} (r2 {:.3})", f.gamma_hat, f.r2))
                .unwrap_or_else(|e| format!("n/a ({e})"));
            eprintln!(
                "N={} edges={} min_degree={} max_degree={} gamma_hat={} diameter~{}",
                g.n(),
                g.edge_count(),
                g.min_degree(),
                g.max_degree(),
                fit,
                approx_diameter(&g)?
            );
            emit(out, "graph.edges", &edge_list_string(&g, m, params.seed))
        }
        Command::Omega {
            method,
            max_len,
            samples,
            k_max,
            t_max,
            w,
            limit,
        } => {
            let k_max = k_max.unwrap_or(cfg.k_max);
            let t_max = t_max.unwrap_or(cfg.t_max);
            let input = match w {
                Some(w) => parse_bits(&w).map_err(invalid)?,
                None => cfg.input_word(),
            };
            if k_max == 0 || k_max > MAX_K_MAX || t_max == 0 {
                return Err(invalid(format!("need 1 <= k_max <= {MAX_K_MAX} and t_max >= 1")).into());
            }
            let method = method.unwrap_or(match cfg.omega_method {
                OmegaMethodConfig::Enumerate => Method::Enumerate,
                OmegaMethodConfig::MonteCarlo => Method::MonteCarlo,
            });
            let est = match method {
                Method::Enumerate => {
                    omega_enumerate_with_limit(max_len.unwrap_or(cfg.omega_max_len), &input, t_max, k_max, limit)?
                }
                Method::MonteCarlo => {
                    let n = samples.unwrap_or(cfg.omega_samples);
                    if n < experiment::OMEGA_CHUNK {
                        let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
                        omega_monte_carlo(n, &input, t_max, k_max, &mut rng)?
                    } else {
                        experiment::omega_monte_carlo_parallel(n, &input, t_max, k_max, cfg.master_seed)?
                    }
                }
            };
            let record = omega_record(&est, k_max, t_max, &input);
            emit(
                out,
                "omega.json",
                &format!("{}\n", serde_json::to_string_pretty(&record)?),
            )
        }
        Command::Simulate { n, m, nu, delta, steps } => {
            let cell = Cell {
                index: 0,
                n: n.unwrap_or(cfg.n[0]),
                m: m.unwrap_or(cfg.m[0]),
                nu: nu.unwrap_or(cfg.nu[0]),
                delta: delta.unwrap_or(cfg.delta[0]),
            };
            cfg.n = vec![cell.n];
            cfg.m = vec![cell.m];
            cfg.nu = vec![cell.nu];
            cfg.delta = vec![cell.delta];
            if let Some(s) = steps {
                cfg.t_max_steps = s;
            }
            cfg.validate()?;
            let run = experiment::simulate_cell(&cfg, &cell, 0)?;
            match out {
                Some(dir) => {
                    experiment::write_cell_run(&run, dir)?;
                    eprintln!("wrote {}", dir.join("trajectory.csv").display());
                    Ok(())
                }
                None => {
                    let mut buf = Vec::new();
                    formats::write_trajectory_csv(&mut buf, &run.trajectory)?;
                    io::stdout().write_all(&buf)?;
                    Ok(())
                }
            }
        }
        Command::Sweep => {
            let output = experiment::run_experiment(&cfg)?;
            experiment::write_outputs(&cfg, &output, &cfg.out_dir)?;
            eprintln!(
                "{} records, omega_hat={}, written to {}",
                output.records.len(),
                formats::fixed9(output.omega.value),
                cfg.out_dir.display()
            );
            Ok(())
        }
        Command::Report { records } => {
            let path = records.unwrap_or_else(|| cfg.out_dir.join("records.csv"));
            let file = fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            let rows = read_records_csv(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
            emit(out, "summary.json", &summary_string(&experiment::summarize(&rows)))
        }
    }
}

fn is_usage_error(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<ConfigError>().is_some()
            || matches!(e.downcast_ref::<ExperimentError>(), Some(ExperimentError::Config(_)))
    })
}

fn invalid(msg: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid(msg.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let msg: Vec<String> = err.chain().map(|e| e.to_string()).collect();
            eprintln!("error: {}", msg.join(": "));
            if is_usage_error(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
