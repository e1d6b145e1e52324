//! Text formats: edge lists, machine dumps, trajectory and record CSVs, and
//! the Ω report record.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use algonet_core::analysis::EmergenceReport;
use algonet_core::dynamics::Trajectory;
use algonet_core::graph::Graph;
use algonet_core::machines::{Entry, Machine, Move, Next, OmegaEstimate, OmegaMethod};
use serde_json::{json, Number, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Model(#[from] algonet_core::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { line, msg: msg.into() }
}

/// Fixed 9-decimal rendering used by every float column.
pub fn fixed9(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.9}")
}

/// Decimal rendering with `digits` significant digits.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.*}", digits.saturating_sub(1), x);
    }
    let exponent = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - exponent).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.99.. -> 10.0..).
    let sig = s.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
    if sig > digits && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

/// JSON number token carrying exactly the given decimal text.
pub fn json_number(text: &str) -> Value {
    match Number::from_str(text) {
        Ok(n) => Value::Number(n),
        Err(_) => Value::String(text.to_string()),
    }
}

// --- edge list -----------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeListHeader {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

/// `N m seed`, then one `u v` line per edge with `u < v`, sorted.
pub fn write_edge_list<W: Write>(out: &mut W, g: &Graph, m: usize, seed: u64) -> io::Result<()> {
    writeln!(out, "{} {} {}", g.n(), m, seed)?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

pub fn edge_list_string(g: &Graph, m: usize, seed: u64) -> String {
    let mut buf = Vec::new();
    write_edge_list(&mut buf, g, m, seed).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<(EdgeListHeader, Graph), FormatError> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_err(1, "header must be `N m seed`"));
    }
    let num = |s: &str| s.parse::<u64>().map_err(|e| parse_err(1, e.to_string()));
    let header = EdgeListHeader {
        n: num(fields[0])? as usize,
        m: num(fields[1])? as usize,
        seed: num(fields[2])?,
    };
    let mut edges = Vec::new();
    let mut last: Option<(usize, usize)> = None;
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let mut it = line.split_whitespace();
        let (Some(u), Some(v), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err(lineno, "expected `u v`"));
        };
        let u: usize = u.parse().map_err(|_| parse_err(lineno, "bad node id"))?;
        let v: usize = v.parse().map_err(|_| parse_err(lineno, "bad node id"))?;
        if u >= v {
            return Err(parse_err(lineno, "edges must satisfy u < v"));
        }
        if last.is_some_and(|l| l >= (u, v)) {
            return Err(parse_err(lineno, "edges must be sorted and distinct"));
        }
        last = Some((u, v));
        edges.push((u, v));
    }
    Ok((header, Graph::from_edges(header.n, &edges)?))
}

// --- machine dump ----------------------------------------------------------

/// `k|w m n|w m n|...`: write bit, move `L`/`R`, next state or `H`.
pub fn machine_line(machine: &Machine) -> String {
    let mut s = machine.states().to_string();
    for e in machine.table() {
        let mv = match e.movement {
            Move::Left => 'L',
            Move::Right => 'R',
        };
        let _ = match e.next {
            Next::State(q) => write!(s, "|{} {} {}", e.write as u8, mv, q),
            Next::Halt => write!(s, "|{} {} H", e.write as u8, mv),
        };
    }
    s
}

pub fn parse_machine_line(line: &str) -> Result<Machine, FormatError> {
    let bad = |msg: &str| parse_err(1, msg.to_string());
    let mut parts = line.trim().split('|');
    let k: usize = parts
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| bad("missing state count"))?;
    let mut table = Vec::with_capacity(2 * k);
    for part in parts {
        let f: Vec<&str> = part.split_whitespace().collect();
        if f.len() != 3 {
            return Err(bad("entry must be `w m n`"));
        }
        let write = match f[0] {
            "0" => false,
            "1" => true,
            _ => return Err(bad("write bit must be 0 or 1")),
        };
        let movement = match f[1] {
            "L" => Move::Left,
            "R" => Move::Right,
            _ => return Err(bad("move must be L or R")),
        };
        let next = match f[2] {
            "H" => Next::Halt,
            q => Next::State(q.parse().map_err(|_| bad("bad next state"))?),
        };
        table.push(Entry { write, movement, next });
    }
    if table.len() != 2 * k {
        return Err(bad("entry count does not match 2k"));
    }
    Ok(Machine::new(table)?)
}

// --- trajectory CSV --------------------------------------------------------

pub const TRAJECTORY_HEADER: &str = "t,infected_density,best_carrier_density,max_displayed";

pub fn write_trajectory_csv<W: Write>(out: &mut W, traj: &Trajectory) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for p in &traj.points {
        writeln!(
            out,
            "{},{},{},{}",
            p.t,
            fixed9(p.infected_density),
            fixed9(p.best_carrier_density),
            p.max_displayed
        )?;
    }
    Ok(())
}

// --- records CSV -----------------------------------------------------------

pub const RECORDS_HEADER: &str = "N,m,nu,delta,lambda,C,c_of_N,t_s,rho_hat,rho_theory,tau_E,omega_hat,condition_met,c_best,c_bar_isolated,eeac_proxy";

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub n: usize,
    pub m: usize,
    pub nu: f64,
    pub delta: f64,
    pub lambda: f64,
    pub c: f64,
    pub c_of_n: usize,
    pub t_s: Option<usize>,
    pub rho_hat: Option<f64>,
    pub rho_theory: f64,
    pub tau_e: f64,
    pub omega_hat: f64,
    pub condition_met: bool,
    pub c_best: u32,
    pub c_bar_isolated: f64,
    pub eeac_proxy: f64,
}

impl RecordRow {
    pub fn new(n: usize, m: usize, nu: f64, delta: f64, lambda: f64, c: f64, r: &EmergenceReport) -> Self {
        RecordRow {
            n,
            m,
            nu,
            delta,
            lambda,
            c,
            c_of_n: r.c_of_n,
            t_s: r.stationarity.t_s,
            rho_hat: r.stationarity.rho_hat,
            rho_theory: r.rho_theory,
            tau_e: r.tau_e,
            omega_hat: r.omega_hat,
            condition_met: r.condition_met,
            c_best: r.c_best,
            c_bar_isolated: r.c_bar_isolated,
            eeac_proxy: r.eeac_proxy,
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.m,
            fixed9(self.nu),
            fixed9(self.delta),
            fixed9(self.lambda),
            fixed9(self.c),
            self.c_of_n,
            self.t_s.map(|t| t.to_string()).unwrap_or_default(),
            self.rho_hat.map(fixed9).unwrap_or_default(),
            fixed9(self.rho_theory),
            fixed9(self.tau_e),
            fixed9(self.omega_hat),
            self.condition_met,
            self.c_best,
            fixed9(self.c_bar_isolated),
            fixed9(self.eeac_proxy),
        )
    }

    pub fn parse(line: &str, lineno: usize) -> Result<RecordRow, FormatError> {
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 16 {
            return Err(parse_err(lineno, format!("expected 16 fields, got {}", f.len())));
        }
        fn p<T: FromStr>(s: &str, lineno: usize, col: &str) -> Result<T, FormatError> {
            s.parse()
                .map_err(|_| parse_err(lineno, format!("bad value {s:?} in column {col}")))
        }
        let opt_usize = |s: &str| -> Result<Option<usize>, FormatError> {
            if s.is_empty() {
                Ok(None)
            } else {
                p(s, lineno, "t_s").map(Some)
            }
        };
        let opt_f64 = |s: &str| -> Result<Option<f64>, FormatError> {
            if s.is_empty() {
                Ok(None)
            } else {
                p(s, lineno, "rho_hat").map(Some)
            }
        };
        Ok(RecordRow {
            n: p(f[0], lineno, "N")?,
            m: p(f[1], lineno, "m")?,
            nu: p(f[2], lineno, "nu")?,
            delta: p(f[3], lineno, "delta")?,
            lambda: p(f[4], lineno, "lambda")?,
            c: p(f[5], lineno, "C")?,
            c_of_n: p(f[6], lineno, "c_of_N")?,
            t_s: opt_usize(f[7])?,
            rho_hat: opt_f64(f[8])?,
            rho_theory: p(f[9], lineno, "rho_theory")?,
            tau_e: p(f[10], lineno, "tau_E")?,
            omega_hat: p(f[11], lineno, "omega_hat")?,
            condition_met: p(f[12], lineno, "condition_met")?,
            c_best: p(f[13], lineno, "c_best")?,
            c_bar_isolated: p(f[14], lineno, "c_bar_isolated")?,
            eeac_proxy: p(f[15], lineno, "eeac_proxy")?,
        })
    }
}

pub fn write_records_csv<W: Write>(out: &mut W, rows: &[RecordRow]) -> io::Result<()> {
    writeln!(out, "{RECORDS_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_csv())?;
    }
    Ok(())
}

pub fn read_records_csv<R: BufRead>(input: R) -> Result<Vec<RecordRow>, FormatError> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim_end) != Some(RECORDS_HEADER) {
        return Err(parse_err(1, "missing or unexpected records header"));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(RecordRow::parse(&line, i + 2)?);
    }
    Ok(rows)
}

// --- omega record ----------------------------------------------------------

/// `{method, value, stderr, params}` with 12 significant digits.
pub fn omega_record(est: &OmegaEstimate, k_max: usize, t_max: u64, input: &[bool]) -> Value {
    let w: String = input.iter().map(|&b| if b { '1' } else { '0' }).collect();
    let (method, mut params) = match est.method {
        OmegaMethod::Enumeration { max_len } => ("enumerate", json!({ "max_len": max_len })),
        OmegaMethod::MonteCarlo { samples } => ("monte-carlo", json!({ "samples": samples })),
    };
    let p = params.as_object_mut().expect("object");
    p.insert("k_max".into(), json!(k_max));
    p.insert("t_max".into(), json!(t_max));
    p.insert("w".into(), json!(w));
    if let Some(num) = est.numerator {
        p.insert("numerator".into(), json!(num.to_string()));
    }
    if let Some(h) = est.halted {
        p.insert("halted".into(), json!(h));
    }
    json!({
        "method": method,
        "value": json_number(&significant(est.value, 12)),
        "stderr": json_number(&significant(est.stderr, 12)),
        "params": params,
    })
}

pub fn parse_bits(s: &str) -> Result<Vec<bool>, FormatError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(parse_err(1, format!("input word must be a 0/1 string, found {c:?}"))),
        })
        .collect()
}
