//! Experiment harness: config files, parameter sweeps, CSV output and text
//! reports.
//!
//! A config is a plain `key = value` file; list values are comma separated
//! and `#` starts a comment. Recognised keys:
//!
//! ```text
//! problem     = bratu1d | bratu2d | monge_ampere
//! lambda      = 7                      # list, ignored for monge_ampere
//! degree      = 5                      # list
//! grid        = 8, 16, 32              # elements per direction, list
//! methods     = picard, picard-slu, mpe(5), rre(5), aa(5)
//! tol         = 1e-12
//! maxiter     = 1000
//! wavenumber  = 1                      # k in sin(2kπx), bratu1d only
//! linear_tol  = 1e-2                   # scalar or one value per grid
//! linear_tol.p3 = 1e-2, 1e-3, ...      # per-degree override
//! inner_maxiter = 200
//! residual_norm = euclidean | mass
//! coarsest_size = 16
//! seed        = 0                      # reserved
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extrapolation::{Accelerator, SolveStatus};
use crate::history::IterationHistory;
use crate::multigrid::DIRECT_SOLVE_THRESHOLD;
use crate::nonlinear::{
    run_outer, BratuProblem, InnerSolver, MongeAmpereProblem, OuterConfig, Problem, ResidualNorm,
};

pub const CSV_HEADER: [&str; 13] = [
    "problem",
    "method",
    "lambda",
    "p",
    "h",
    "iter",
    "relative_residual",
    "l2_err",
    "cpu_s",
    "rhs_time_s",
    "mg_time_s",
    "extrapol_time_s",
    "converged",
];

/// Columns holding wall-clock measurements.
pub const TIMING_COLUMNS: [&str; 4] = ["cpu_s", "rhs_time_s", "mg_time_s", "extrapol_time_s"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Bratu1d,
    Bratu2d,
    MongeAmpere,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Bratu1d => "bratu1d",
            ProblemKind::Bratu2d => "bratu2d",
            ProblemKind::MongeAmpere => "monge_ampere",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bratu1d" => Ok(ProblemKind::Bratu1d),
            "bratu2d" => Ok(ProblemKind::Bratu2d),
            "monge_ampere" | "monge-ampere" | "mongeampere" => Ok(ProblemKind::MongeAmpere),
            other => Err(Error::Config(format!("unknown problem '{other}'"))),
        }
    }
}

/// Outer method of one table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Plain Picard with the problem's default multigrid inner solver.
    Picard,
    /// Plain Picard with a direct inner solve.
    PicardSlu,
    Mpe(usize),
    Rre(usize),
    Aa(usize),
}

impl Method {
    pub fn accelerator(self) -> Accelerator {
        match self {
            Method::Picard | Method::PicardSlu => Accelerator::None,
            Method::Mpe(q) => Accelerator::Mpe(q),
            Method::Rre(q) => Accelerator::Rre(q),
            Method::Aa(m) => Accelerator::Anderson(m),
        }
    }

    /// Name in the style of the printed tables, e.g. `RRE(5)-Picard-MG`.
    pub fn label(self) -> String {
        match self {
            Method::Picard => "Picard-MG".into(),
            Method::PicardSlu => "Picard-slu".into(),
            Method::Mpe(q) => format!("MPE({q})-Picard-MG"),
            Method::Rre(q) => format!("RRE({q})-Picard-MG"),
            Method::Aa(m) => format!("AA({m})-Picard-MG"),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Picard => f.write_str("picard"),
            Method::PicardSlu => f.write_str("picard-slu"),
            Method::Mpe(q) => write!(f, "mpe({q})"),
            Method::Rre(q) => write!(f, "rre({q})"),
            Method::Aa(m) => write!(f, "aa({m})"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "picard" | "picard-mg" => return Ok(Method::Picard),
            "picard-slu" | "picard_slu" | "slu" => return Ok(Method::PicardSlu),
            _ => {}
        }
        let bad = || Error::Config(format!("unknown method '{}'", s.trim()));
        let open = t.find('(').ok_or_else(bad)?;
        if !t.ends_with(')') {
            return Err(bad());
        }
        let arg: usize = t[open + 1..t.len() - 1].trim().parse().map_err(|_| bad())?;
        match &t[..open] {
            "mpe" => Ok(Method::Mpe(arg)),
            "rre" => Ok(Method::Rre(arg)),
            "aa" | "anderson" => Ok(Method::Aa(arg)),
            _ => Err(bad()),
        }
    }
}

/// Parsed experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub lambdas: Vec<f64>,
    pub degrees: Vec<usize>,
    pub grids: Vec<usize>,
    pub methods: Vec<Method>,
    pub tol: f64,
    pub maxiter: usize,
    pub wavenumber: u32,
    /// Inner tolerance per grid, shared by all degrees unless overridden.
    pub linear_tol: Vec<f64>,
    pub linear_tol_by_degree: BTreeMap<usize, Vec<f64>>,
    pub inner_maxiter: usize,
    pub residual_norm: ResidualNorm,
    pub coarsest_size: usize,
    pub seed: u64,
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(Error::Config(format!("'{key}' must not be empty")));
    }
    items
        .iter()
        .map(|s| s.parse::<T>().map_err(|_| Error::Config(format!("bad value '{s}' for '{key}'"))))
        .collect()
}

fn parse_scalar<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse::<T>().map_err(|_| Error::Config(format!("bad value '{}' for '{key}'", v.trim())))
}

/// Splits a method list on commas that are not inside parentheses.
fn split_methods(v: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in v.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&v[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&v[start..]);
    out.into_iter().map(str::trim).filter(|s| !s.is_empty()).collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", no + 1)))?;
            let k = k.trim().to_ascii_lowercase();
            if kv.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{k}'", no + 1)));
            }
        }

        let take = |kv: &mut BTreeMap<String, String>, k: &str| kv.remove(k);
        let problem: ProblemKind =
            take(&mut kv, "problem").ok_or_else(|| Error::Config("missing 'problem'".into()))?.parse()?;
        let lambdas = match take(&mut kv, "lambda") {
            Some(v) => parse_list("lambda", &v)?,
            None if problem == ProblemKind::MongeAmpere => vec![0.0],
            None => return Err(Error::Config("missing 'lambda'".into())),
        };
        let degrees = parse_list("degree", &take(&mut kv, "degree").ok_or_else(|| Error::Config("missing 'degree'".into()))?)?;
        let grids = parse_list("grid", &take(&mut kv, "grid").ok_or_else(|| Error::Config("missing 'grid'".into()))?)?;
        let methods = {
            let v = take(&mut kv, "methods").ok_or_else(|| Error::Config("missing 'methods'".into()))?;
            let m: Vec<Method> = split_methods(&v).into_iter().map(str::parse).collect::<Result<_>>()?;
            if m.is_empty() {
                return Err(Error::Config("'methods' must not be empty".into()));
            }
            m
        };
        let tol = match take(&mut kv, "tol") {
            Some(v) => parse_scalar("tol", &v)?,
            None => match problem {
                ProblemKind::Bratu1d => 1e-12,
                ProblemKind::Bratu2d => 1e-8,
                ProblemKind::MongeAmpere => 1e-10,
            },
        };
        let maxiter = take(&mut kv, "maxiter").map(|v| parse_scalar("maxiter", &v)).transpose()?.unwrap_or(1000);
        let wavenumber = take(&mut kv, "wavenumber").map(|v| parse_scalar("wavenumber", &v)).transpose()?.unwrap_or(1);
        let linear_tol = take(&mut kv, "linear_tol").map(|v| parse_list("linear_tol", &v)).transpose()?.unwrap_or_else(|| vec![1e-2]);
        let inner_maxiter =
            take(&mut kv, "inner_maxiter").map(|v| parse_scalar("inner_maxiter", &v)).transpose()?.unwrap_or(200);
        let residual_norm = match take(&mut kv, "residual_norm").as_deref().map(str::trim) {
            None | Some("euclidean") => ResidualNorm::Euclidean,
            Some("mass") => ResidualNorm::Mass,
            Some(o) => return Err(Error::Config(format!("unknown residual_norm '{o}'"))),
        };
        let coarsest_size = take(&mut kv, "coarsest_size")
            .map(|v| parse_scalar("coarsest_size", &v))
            .transpose()?
            .unwrap_or(DIRECT_SOLVE_THRESHOLD);
        let seed = take(&mut kv, "seed").map(|v| parse_scalar("seed", &v)).transpose()?.unwrap_or(0);

        let mut linear_tol_by_degree = BTreeMap::new();
        for (k, v) in std::mem::take(&mut kv) {
            match k.strip_prefix("linear_tol.p") {
                Some(d) => {
                    let d: usize = parse_scalar(&k, d)?;
                    linear_tol_by_degree.insert(d, parse_list(&k, &v)?);
                }
                None => return Err(Error::Config(format!("unknown key '{k}'"))),
            }
        }

        let cfg = Self {
            problem,
            lambdas,
            degrees,
            grids,
            methods,
            tol,
            maxiter,
            wavenumber,
            linear_tol,
            linear_tol_by_degree,
            inner_maxiter,
            residual_norm,
            coarsest_size,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config("'tol' must be positive".into()));
        }
        if self.lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::Config("'lambda' values must be finite and non-negative".into()));
        }
        if self.degrees.iter().any(|&p| p == 0) {
            return Err(Error::Config("'degree' values must be positive".into()));
        }
        if self.problem == ProblemKind::MongeAmpere && self.degrees.iter().any(|&p| p < 2) {
            return Err(Error::Config("monge_ampere needs degree >= 2".into()));
        }
        let coarsest = *self.grids.iter().min().unwrap();
        for &g in &self.grids {
            if g == 0 || g % coarsest != 0 || !(g / coarsest).is_power_of_two() {
                return Err(Error::Config(format!("grid {g} is not a power-of-two multiple of {coarsest}")));
            }
        }
        for tols in std::iter::once(&self.linear_tol).chain(self.linear_tol_by_degree.values()) {
            if tols.len() != 1 && tols.len() != self.grids.len() {
                return Err(Error::Config("linear_tol needs one value or one per grid".into()));
            }
            if tols.iter().any(|t| !(*t > 0.0)) {
                return Err(Error::Config("linear_tol values must be positive".into()));
            }
        }
        Ok(())
    }

    /// Inner linear tolerance for degree `p` on the `grid_index`-th grid.
    pub fn linear_tol_for(&self, p: usize, grid_index: usize) -> f64 {
        let tols = self.linear_tol_by_degree.get(&p).unwrap_or(&self.linear_tol);
        if tols.len() == 1 {
            tols[0]
        } else {
            tols[grid_index]
        }
    }

    /// Lambda values that actually vary the problem.
    fn effective_lambdas(&self) -> Vec<f64> {
        match self.problem {
            ProblemKind::MongeAmpere => vec![0.0],
            _ => self.lambdas.clone(),
        }
    }

    /// All cells in declaration order: lambda, then degree, then grid, then method.
    pub fn cells(&self) -> Vec<CellSpec> {
        let mut out = Vec::new();
        for &lambda in &self.effective_lambdas() {
            for &p in &self.degrees {
                for (gi, &n) in self.grids.iter().enumerate() {
                    for &method in &self.methods {
                        out.push(CellSpec {
                            problem: self.problem,
                            lambda,
                            p,
                            n,
                            method,
                            linear_tol: self.linear_tol_for(p, gi),
                        });
                    }
                }
            }
        }
        out
    }

    /// Outer solver settings for one cell.
    pub fn outer_config(&self, cell: &CellSpec) -> OuterConfig {
        let acc = cell.method.accelerator();
        let mut cfg = match cell.problem {
            ProblemKind::MongeAmpere => OuterConfig::monge_ampere(acc, self.tol, self.maxiter, cell.linear_tol),
            _ => OuterConfig::bratu(acc, self.tol, self.maxiter),
        };
        if let InnerSolver::VCycleToTol { tol, .. } = cfg.inner {
            cfg.inner = InnerSolver::VCycleToTol { tol, maxiter: self.inner_maxiter };
        }
        if cell.method == Method::PicardSlu {
            cfg.inner = InnerSolver::Direct;
        }
        cfg.residual_norm = self.residual_norm;
        cfg.coarsest_size = self.coarsest_size;
        cfg
    }
}

/// One point of the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub problem: ProblemKind,
    pub lambda: f64,
    pub p: usize,
    /// Elements per direction.
    pub n: usize,
    pub method: Method,
    pub linear_tol: f64,
}

impl CellSpec {
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Whether the cell matches a selector such as `lambda=7,p=5,grid=32,method=rre(5)`.
    pub fn matches(&self, selector: &str) -> Result<bool> {
        for part in selector.split(';').flat_map(|s| split_methods(s)) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad selector term '{part}'")))?;
            let ok = match k.trim() {
                "lambda" => (parse_scalar::<f64>("lambda", v)? - self.lambda).abs() <= 1e-12 * self.lambda.abs().max(1.0),
                "p" | "degree" => parse_scalar::<usize>("p", v)? == self.p,
                "grid" | "n" => parse_scalar::<usize>("grid", v)? == self.n,
                "method" => v.parse::<Method>()? == self.method,
                other => return Err(Error::Config(format!("unknown selector key '{other}'"))),
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub problem: ProblemKind,
    pub method: Method,
    pub lambda: f64,
    pub p: usize,
    pub h: f64,
    pub iter: usize,
    pub relative_residual: f64,
    pub l2_err: f64,
    pub cpu_s: f64,
    pub rhs_time_s: f64,
    pub mg_time_s: f64,
    pub extrapol_time_s: f64,
    pub converged: bool,
    /// Failure description when the cell could not run to completion.
    pub note: Option<String>,
}

impl ResultRow {
    fn csv_fields(&self) -> [String; 13] {
        let r = |x: f64| format!("{x:.5e}");
        [
            self.problem.to_string(),
            self.method.to_string(),
            r(self.lambda),
            self.p.to_string(),
            r(self.h),
            self.iter.to_string(),
            r(self.relative_residual),
            r(self.l2_err),
            r(self.cpu_s),
            r(self.rhs_time_s),
            r(self.mg_time_s),
            r(self.extrapol_time_s),
            self.converged.to_string(),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: CellSpec,
    pub row: ResultRow,
    pub history: IterationHistory,
}

fn build_problem(cfg: &ExperimentConfig, cell: &CellSpec) -> Result<Problem> {
    Ok(match cell.problem {
        ProblemKind::Bratu1d => Problem::Bratu(BratuProblem::manufactured_1d(cell.lambda, cell.p, cell.n, cfg.wavenumber)?),
        ProblemKind::Bratu2d => Problem::Bratu(BratuProblem::manufactured_2d(cell.lambda, cell.p, cell.n)?),
        ProblemKind::MongeAmpere => Problem::MongeAmpere(MongeAmpereProblem::manufactured(cell.p, cell.n)?),
    })
}

/// Runs one cell; failures end up in the row instead of an error.
pub fn run_cell(cfg: &ExperimentConfig, cell: &CellSpec) -> CellResult {
    let t0 = Instant::now();
    let outcome = build_problem(cfg, cell).and_then(|prob| run_outer(&prob, &cfg.outer_config(cell)));
    let cpu_s = t0.elapsed().as_secs_f64();
    let mut row = ResultRow {
        problem: cell.problem,
        method: cell.method,
        lambda: cell.lambda,
        p: cell.p,
        h: cell.h(),
        iter: 0,
        relative_residual: f64::NAN,
        l2_err: f64::NAN,
        cpu_s,
        rhs_time_s: 0.0,
        mg_time_s: 0.0,
        extrapol_time_s: 0.0,
        converged: false,
        note: None,
    };
    match outcome {
        Ok(out) => {
            if let Some(last) = out.history.last() {
                row.iter = last.iter;
                row.relative_residual = last.relative_residual;
                row.l2_err = last.l2_error.unwrap_or(f64::NAN);
                row.rhs_time_s = last.rhs_s;
                row.mg_time_s = last.mg_s;
                row.extrapol_time_s = last.extrapolation_s;
            }
            row.converged = out.status == SolveStatus::Converged;
            if out.status == SolveStatus::Diverged {
                row.note = Some("diverged".into());
            }
            CellResult { cell: *cell, row, history: out.history }
        }
        Err(e) => {
            row.note = Some(e.to_string());
            CellResult { cell: *cell, row, history: IterationHistory::new() }
        }
    }
}

/// Runs every cell, sequentially or on `threads` worker threads. Results keep
/// declaration order either way.
pub fn run_cells(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<CellResult>> {
    let cells = cfg.cells();
    match threads {
        Some(n) if n > 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(|| cells.par_iter().map(|c| run_cell(cfg, c)).collect()))
        }
        _ => Ok(cells.iter().map(|c| run_cell(cfg, c)).collect()),
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Vec<ResultRow> {
    cfg.cells().iter().map(|c| run_cell(cfg, c).row).collect()
}

pub fn write_csv<W: std::io::Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record(r.csv_fields()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn emit_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &csv_string(rows))
}

pub fn history_csv(history: &IterationHistory) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iter", "relative_residual", "l2_err"]).unwrap();
    for r in &history.records {
        let err = r.l2_error.map_or_else(|| "NaN".to_string(), |e| format!("{e:.5e}"));
        w.write_record([r.iter.to_string(), format!("{:.5e}", r.relative_residual), err]).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

pub fn emit_history(history: &IterationHistory, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &history_csv(history))
}

/// Plain-text table; unconverged iteration counts carry the `^a` marker.
pub fn render_report(rows: &[ResultRow]) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "{:<13} {:>7} {:>2} {:>9} {:<20} {:>7} {:>11} {:>11} {:>10}\n",
        "problem", "lambda", "p", "h", "method", "iter", "rel.res", "L2-err", "CPU(s)"
    ));
    let mut any_unconverged = false;
    for r in rows {
        let iter = if r.converged {
            r.iter.to_string()
        } else {
            any_unconverged = true;
            format!("{}^a", r.iter)
        };
        s.push_str(&format!(
            "{:<13} {:>7} {:>2} {:>9} {:<20} {:>7} {:>11.2e} {:>11.2e} {:>10.3}",
            r.problem.name(),
            format!("{}", r.lambda),
            r.p,
            format!("1/{}", (1.0 / r.h).round() as usize),
            r.method.label(),
            iter,
            r.relative_residual,
            r.l2_err,
            r.cpu_s
        ));
        if let Some(n) = &r.note {
            s.push_str(&format!("  [{n}]"));
        }
        s.push('\n');
    }
    if any_unconverged {
        s.push_str("^a nonlinear tolerance not attained\n");
    }
    s
}

/// Checked-in configs reproducing the five tables.
pub fn table_config_text(table: u8) -> Option<&'static str> {
    match table {
        1 => Some(include_str!("../../../configs/table1.cfg")),
        2 => Some(include_str!("../../../configs/table2.cfg")),
        3 => Some(include_str!("../../../configs/table3.cfg")),
        4 => Some(include_str!("../../../configs/table4.cfg")),
        5 => Some(include_str!("../../../configs/table5.cfg")),
        _ => None,
    }
}

pub fn table_config(table: u8) -> Result<ExperimentConfig> {
    let text = table_config_text(table).ok_or_else(|| Error::Config(format!("no table {table} (expected 1-5)")))?;
    ExperimentConfig::parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "
        problem = bratu1d   # comment
        lambda = 1, 2
        degree = 2
        grid = 8, 16
        methods = picard, mpe(3), aa(2)
        tol = 1e-8
        maxiter = 50
    ";

    #[test]
    fn parses_config() {
        let c = ExperimentConfig::parse(SMALL).unwrap();
        assert_eq!(c.problem, ProblemKind::Bratu1d);
        assert_eq!(c.lambdas, vec![1.0, 2.0]);
        assert_eq!(c.methods, vec![Method::Picard, Method::Mpe(3), Method::Aa(2)]);
        assert_eq!(c.cells().len(), 2 * 2 * 3);
        assert_eq!(c.maxiter, 50);
    }

    #[test]
    fn method_round_trip() {
        for m in [Method::Picard, Method::PicardSlu, Method::Mpe(5), Method::Rre(8), Method::Aa(3)] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("mpe(x)".parse::<Method>().is_err());
        assert!("foo".parse::<Method>().is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::parse("problem = bratu1d\nlambda = 1\ndegree = 2\ngrid = 8, 12\nmethods = picard").is_err());
        assert!(ExperimentConfig::parse("problem = bratu1d\nlambda = 1\ndegree = 2\ngrid = 8\nmethods = picard\nfoo = 1").is_err());
        assert!(ExperimentConfig::parse("problem = bratu1d\nlambda = 1\ndegree = 2\ngrid = 8\nmethods =").is_err());
        assert!(ExperimentConfig::parse("problem = monge_ampere\ndegree = 1\ngrid = 8\nmethods = picard").is_err());
    }

    #[test]
    fn per_degree_linear_tolerances() {
        let c = ExperimentConfig::parse(
            "problem = monge_ampere\ndegree = 2, 3\ngrid = 8, 16\nmethods = picard\nlinear_tol = 1e-2\nlinear_tol.p3 = 1e-3, 1e-4",
        )
        .unwrap();
        assert_eq!(c.linear_tol_for(2, 1), 1e-2);
        assert_eq!(c.linear_tol_for(3, 0), 1e-3);
        assert_eq!(c.linear_tol_for(3, 1), 1e-4);
    }

    #[test]
    fn selector_matching() {
        let c = ExperimentConfig::parse(SMALL).unwrap();
        let cells = c.cells();
        let hit: Vec<_> = cells.iter().filter(|x| x.matches("lambda=2,grid=16,method=mpe(3)").unwrap()).collect();
        assert_eq!(hit.len(), 1);
        assert_eq!(hit[0].n, 16);
    }

    #[test]
    fn zero_maxiter_gives_unconverged_row() {
        let c = ExperimentConfig::parse("problem = bratu1d\nlambda = 1\ndegree = 2\ngrid = 8\nmethods = picard\nmaxiter = 0").unwrap();
        let rows = run_experiment(&c);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].iter, 0);
        assert!(!rows[0].converged);
    }

    #[test]
    fn empty_csv_is_header_only() {
        assert_eq!(csv_string(&[]), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn report_marks_unconverged_rows() {
        let c = ExperimentConfig::parse(SMALL).unwrap();
        let mut rows = run_experiment(&c);
        assert!(!render_report(&rows).contains("^a"));
        rows[0].converged = false;
        let rep = render_report(&rows);
        assert_eq!(rep.matches("^a").count(), 2);
    }

    #[test]
    fn table_configs_parse() {
        for t in 1..=5 {
            table_config(t).unwrap();
        }
        assert_eq!(table_config(1).unwrap().cells().len(), 35);
        assert!(table_config(6).is_err());
    }
}
