//! Sweeps over `(N, m, nu, delta)` cells and seeds.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use algonet_core::analysis::{emergence_report, EmergenceReport, ReportParams};
use algonet_core::dynamics::{init_state_from_fitness, population_fitness, run_from_state, Trajectory};
use algonet_core::graph::{generate_ba, Graph, NetworkParams};
use algonet_core::machines::{omega_enumerate, omega_monte_carlo, sample_machine, Machine, OmegaEstimate};
use algonet_core::seed;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Cell, ExperimentConfig, OmegaMethodConfig};
use crate::formats::{
    self, fixed9, json_number, machine_line, omega_record, write_edge_list, write_records_csv, write_trajectory_csv,
    RecordRow,
};

pub const VERSION: &str = concat!("algonet ", env!("CARGO_PKG_VERSION"));

/// Samples per Monte Carlo chunk; each chunk has its own derived stream, so
/// the estimate does not depend on the thread count.
pub const OMEGA_CHUNK: u64 = 16_384;
/// Cell index reserved for the Ω stream in seed derivation.
const OMEGA_STREAM: u64 = u64::MAX;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] algonet_core::Error),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Format(#[from] formats::FormatError),
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn run_seed(master: u64, cell: usize, seed_index: u64) -> u64 {
    seed::derive(master, cell as u64, seed_index)
}

/// Monte Carlo Ω split into fixed-size chunks evaluated in parallel and
/// summed in chunk order.
pub fn omega_monte_carlo_parallel(
    samples: u64,
    input: &[bool],
    t_max: u64,
    k_max: usize,
    master: u64,
) -> Result<OmegaEstimate, ExperimentError> {
    let chunks = samples.div_ceil(OMEGA_CHUNK);
    let halted: Result<Vec<u64>, algonet_core::Error> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = OMEGA_CHUNK.min(samples - c * OMEGA_CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(master, OMEGA_STREAM, c));
            omega_monte_carlo(len, input, t_max, k_max, &mut rng).map(|e| e.halted.unwrap_or(0))
        })
        .collect();
    Ok(OmegaEstimate::from_counts(halted?.iter().sum(), samples)?)
}

pub fn estimate_omega(cfg: &ExperimentConfig) -> Result<OmegaEstimate, ExperimentError> {
    let input = cfg.input_word();
    match cfg.omega_method {
        OmegaMethodConfig::Enumerate => Ok(omega_enumerate(cfg.omega_max_len, &input, cfg.t_max, cfg.k_max)?),
        OmegaMethodConfig::MonteCarlo => {
            omega_monte_carlo_parallel(cfg.omega_samples, &input, cfg.t_max, cfg.k_max, cfg.master_seed)
        }
    }
}

/// Everything one simulated population produced.
pub struct CellRun {
    pub sub_seed: u64,
    pub graph: Graph,
    pub programs: Vec<Machine>,
    pub own_fitness: Vec<u64>,
    pub trajectory: Trajectory,
}

/// Builds the graph, samples one program per node, scores them and runs
/// the contagion for the configured horizon, all from one derived stream.
pub fn simulate_cell(cfg: &ExperimentConfig, cell: &Cell, seed_index: u64) -> Result<CellRun, ExperimentError> {
    let sub_seed = run_seed(cfg.master_seed, cell.index, seed_index);
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
    let graph = generate_ba(&NetworkParams::new(cell.n, cell.m, sub_seed), &mut rng)?;
    let programs = (0..cell.n)
        .map(|_| sample_machine(&mut rng, cfg.k_max))
        .collect::<Result<Vec<_>, _>>()?;
    let own_fitness = population_fitness(&programs, &cfg.input_word(), cfg.t_max);
    let params = cfg.epidemic(cell.nu, cell.delta);
    let state = init_state_from_fitness(&graph, own_fitness.clone(), &params, &mut rng)?;
    let (trajectory, _) = run_from_state(state, &graph, &params, cfg.horizon(cell.n), &mut rng);
    Ok(CellRun {
        sub_seed,
        graph,
        programs,
        own_fitness,
        trajectory,
    })
}

pub fn report_for(
    cfg: &ExperimentConfig,
    cell: &Cell,
    run: &CellRun,
    omega: &OmegaEstimate,
) -> Result<EmergenceReport, ExperimentError> {
    let params = ReportParams {
        m: cell.m,
        lambda: cfg.epidemic(cell.nu, cell.delta).lambda(),
        n: cell.n,
        c_exponent: cfg.c,
        t0: cfg.t0,
        window: cfg.window,
        tol: cfg.tolerance,
    };
    Ok(emergence_report(&run.trajectory, omega, &run.own_fitness, &params)?)
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub cell: usize,
    pub seed_index: u64,
    pub sub_seed: u64,
    pub row: RecordRow,
    pub report: EmergenceReport,
    /// Wall-clock time; excluded from the deterministic outputs.
    pub duration: Duration,
    pub version: &'static str,
}

pub struct ExperimentOutput {
    pub omega: OmegaEstimate,
    pub records: Vec<RunRecord>,
    /// Seed-0 graph per cell, when `export_graphs` is set.
    pub graphs: Vec<(usize, u64, Graph)>,
}

impl ExperimentOutput {
    /// Rows as they read back from `records.csv`, so a summary built here
    /// matches one rebuilt from the file.
    pub fn rows(&self) -> Vec<RecordRow> {
        self.records
            .iter()
            .map(|r| RecordRow::parse(&r.row.to_csv(), 0).expect("own output parses"))
            .collect()
    }

    pub fn summary(&self) -> Value {
        summarize(&self.rows())
    }
}

fn run_one(
    cfg: &ExperimentConfig,
    cell: &Cell,
    seed_index: u64,
    omega: &OmegaEstimate,
) -> Result<(RunRecord, Option<Graph>), ExperimentError> {
    let started = Instant::now();
    let run = simulate_cell(cfg, cell, seed_index)?;
    let report = report_for(cfg, cell, &run, omega)?;
    let lambda = cfg.epidemic(cell.nu, cell.delta).lambda();
    let record = RunRecord {
        cell: cell.index,
        seed_index,
        sub_seed: run.sub_seed,
        row: RecordRow::new(cell.n, cell.m, cell.nu, cell.delta, lambda, cfg.c, &report),
        report,
        duration: started.elapsed(),
        version: VERSION,
    };
    let graph = (cfg.export_graphs && seed_index == 0).then_some(run.graph);
    Ok((record, graph))
}

/// Runs every `(cell, seed)` pair, in parallel, returning records ordered by
/// `(cell, seed)`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    cfg.validate()?;
    let work = || -> Result<ExperimentOutput, ExperimentError> {
        let omega = estimate_omega(cfg)?;
        let tasks: Vec<(Cell, u64)> = cfg
            .cells()
            .into_iter()
            .flat_map(|c| (0..cfg.seeds).map(move |s| (c, s)))
            .collect();
        let results = tasks
            .par_iter()
            .map(|(cell, s)| run_one(cfg, cell, *s, &omega))
            .collect::<Result<Vec<_>, _>>()?;
        let mut records = Vec::with_capacity(results.len());
        let mut graphs = Vec::new();
        for (rec, graph) in results {
            if let Some(g) = graph {
                graphs.push((rec.cell, rec.sub_seed, g));
            }
            records.push(rec);
        }
        Ok(ExperimentOutput { omega, records, graphs })
    };
    if cfg.workers == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .expect("thread pool")
            .install(work)
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Per-`(m, nu, delta)` groups, each listing per-`N` medians and the
/// fraction of runs meeting the emergence condition. Independent of row
/// order.
pub fn summarize(rows: &[RecordRow]) -> Value {
    type Key = (usize, String, String);
    let mut groups: BTreeMap<Key, BTreeMap<usize, Vec<&RecordRow>>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.m, fixed9(r.nu), fixed9(r.delta)))
            .or_default()
            .entry(r.n)
            .or_default()
            .push(r);
    }
    let num = |x: f64| json_number(&fixed9(x));
    let mut out_groups = Vec::new();
    for ((m, nu, delta), by_n) in &groups {
        let mut entries = Vec::new();
        let mut medians = Vec::new();
        for (n, runs) in by_n {
            let mut eeac: Vec<f64> = runs.iter().map(|r| r.eeac_proxy).collect();
            let mut tau: Vec<f64> = runs.iter().map(|r| r.tau_e).collect();
            let mut rho: Vec<f64> = runs.iter().filter_map(|r| r.rho_hat).collect();
            let met = runs.iter().filter(|r| r.condition_met).count();
            let med = median(&mut eeac);
            medians.push(med);
            entries.push(json!({
                "N": n,
                "runs": runs.len(),
                "median_eeac_proxy": num(med),
                "median_tau_E": num(median(&mut tau)),
                "median_rho_hat": if rho.is_empty() { Value::Null } else { num(median(&mut rho)) },
                "stationary_runs": rho.len(),
                "omega_hat": num(runs[0].omega_hat),
                "condition_met_fraction": num(met as f64 / runs.len() as f64),
            }));
        }
        out_groups.push(json!({
            "m": m,
            "nu": json_number(nu),
            "delta": json_number(delta),
            "by_N": entries,
            "median_eeac_proxy_non_decreasing_in_N": medians.windows(2).all(|w| w[0] <= w[1]),
        }));
    }
    json!({
        "version": VERSION,
        "records": rows.len(),
        "eeac_proxy": "tau_E * (bit length of max displayed value at c(N) - mean bit length of own fitness); a computable proxy, not algorithmic complexity",
        "omega_hat": "time-bounded: halting within t_max steps",
        "groups": out_groups,
    })
}

pub fn summary_string(summary: &Value) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("json");
    s.push('\n');
    s
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<(), ExperimentError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

/// Writes `records.csv`, `summary.json`, `omega.json`, `config.json`,
/// `timings.csv` and any exported graphs into `dir`. All but
/// `timings.csv` are byte-identical across re-runs of the same config.
pub fn write_outputs(cfg: &ExperimentConfig, out: &ExperimentOutput, dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let rows = out.rows();
    write_file(&dir.join("records.csv"), |w| write_records_csv(w, &rows))?;
    write_file(&dir.join("summary.json"), |w| {
        w.write_all(summary_string(&out.summary()).as_bytes())
    })?;
    let omega = omega_record(&out.omega, cfg.k_max, cfg.t_max, &cfg.input_word());
    write_file(&dir.join("omega.json"), |w| {
        writeln!(w, "{}", serde_json::to_string_pretty(&omega).expect("json"))
    })?;
    write_file(&dir.join("config.json"), |w| writeln!(w, "{}", cfg.to_json()))?;
    write_file(&dir.join("timings.csv"), |w| {
        writeln!(w, "cell,seed,sub_seed,duration_ms,version")?;
        for r in &out.records {
            writeln!(
                w,
                "{},{},{},{:.3},{}",
                r.cell,
                r.seed_index,
                r.sub_seed,
                r.duration.as_secs_f64() * 1e3,
                r.version
            )?;
        }
        Ok(())
    })?;
    let cells = cfg.cells();
    for (cell, sub_seed, g) in &out.graphs {
        let m = cells[*cell].m;
        write_file(&dir.join(format!("graph_{cell}.edges")), |w| {
            write_edge_list(w, g, m, *sub_seed)
        })?;
    }
    Ok(())
}

/// Writes `trajectory.csv` and `machines.txt` for a single run.
pub fn write_cell_run(run: &CellRun, dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_file(&dir.join("trajectory.csv"), |w| {
        write_trajectory_csv(w, &run.trajectory)
    })?;
    write_file(&dir.join("machines.txt"), |w| {
        for m in &run.programs {
            writeln!(w, "{}", machine_line(m))?;
        }
        Ok(())
    })
}
