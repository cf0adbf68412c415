use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mhessian::field::io::FieldFile;
use mhessian::inequalities::{
    default_configs, maclaurin_suite, reports_to_csv, run_suites, InequalityKind, Sampling, SuiteOptions,
};
use mhessian::integrals::hessian_integral;
use mhessian::solver::{solve_grid_newton, solve_radial, DirichletProblem, DirichletSolution, NewtonOptions};
use mhessian::symfunc::{cone_membership, m_trace_gradient, traces};
use mhessian::{
    AdmissibilityReport, BallFunction, BallSpace, Domain, Error, InequalityReport, PolarGrid, Result, Space, SymMatrix,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::output::{emit, to_json, write_atomic};

fn usage(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

/// Parses a JSON array of rows, either inline or from `@path`.
fn parse_matrix(source: &str) -> Result<SymMatrix> {
    let text = match source.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))?,
        None => source.to_string(),
    };
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("matrix is not a JSON array of rows: {e}")))?;
    SymMatrix::from_rows(&rows)
}

pub fn trace(source: &str, m: Option<usize>) -> Result<i32> {
    let s = parse_matrix(source)?;
    let n = s.dim();
    let m = m.unwrap_or(n);
    if m == 0 || m > n {
        return Err(usage(format!("order m={m} outside 1..={n}")));
    }
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "n": n,
        "m": m,
        "matrix": s.to_rows(),
        "traces": traces(&s).values,
        "gradient": m_trace_gradient(&s, m)?.to_rows(),
        "cone": cone_membership(&s, m)?,
    });
    emit(&to_json(&out)?)?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct IntegralRow {
    p: usize,
    value: f64,
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    schema_version: u32,
    domain: Domain,
    m: usize,
    l: usize,
    rhs: mhessian::Rhs,
    nr: usize,
    ntheta: Option<usize>,
    residual_inf: f64,
    iterations: usize,
    residual_history: Vec<f64>,
    admissibility: AdmissibilityReport,
    max_value: f64,
    center_value: f64,
    /// `-2 w(0) / R^2`, the coefficient of the matching quadratic on round domains.
    quadratic_coefficient: Option<f64>,
    hessian_integrals: Vec<IntegralRow>,
    solution: PathBuf,
}

fn integral_table<S: Space>(space: &S, w: &S::Function, m: usize) -> Result<Vec<IntegralRow>> {
    (0..=m).map(|p| Ok(IntegralRow { p, value: hessian_integral(space, w, p)? })).collect()
}

pub fn solve(cfg: &RunConfig) -> Result<i32> {
    let (m, l) = (cfg.m.unwrap_or(2), cfg.l.unwrap_or(0));
    let problem = DirichletProblem::new(cfg.domain, m, l, cfg.rhs)?;
    let (file, table, sol_meta, ntheta): (FieldFile, _, DirichletSolution<()>, _) = match cfg.domain {
        Domain::Ball { n, radius } => {
            let mut opts = NewtonOptions::radial();
            opts.tol = cfg.tol.unwrap_or(opts.tol);
            let sol = solve_radial(&problem, cfg.nr, &opts)?;
            let space = BallSpace::new(n, radius, cfg.nr)?;
            let table = integral_table(&space, &BallFunction::radial(sol.w.clone()), m)?;
            (FieldFile::radial(&sol.w), table, strip(sol), None)
        }
        _ => {
            let mut opts = NewtonOptions::grid();
            opts.tol = cfg.tol.unwrap_or(opts.tol);
            let sol = solve_grid_newton(&problem, cfg.nr, cfg.ntheta, &opts)?;
            let table = integral_table(sol.w.grid(), &sol.w, m)?;
            (FieldFile::grid(&sol.w), table, strip(sol), Some(cfg.ntheta))
        }
    };
    let center = match &file {
        FieldFile::Radial { values, .. } | FieldFile::Grid { values, .. } => values[0],
    };
    let quad = cfg.domain.radius().map(|r| -2.0 * center / (r * r));
    let sol_path = cfg.out.join("solution.json");
    let summary = SolveSummary {
        schema_version: SCHEMA_VERSION,
        domain: cfg.domain,
        m,
        l,
        rhs: cfg.rhs,
        nr: cfg.nr,
        ntheta,
        residual_inf: sol_meta.residual_inf,
        iterations: sol_meta.iterations,
        residual_history: sol_meta.residual_history,
        admissibility: sol_meta.admissibility,
        max_value: sol_meta.max_value,
        center_value: center,
        quadratic_coefficient: quad,
        hessian_integrals: table,
        solution: sol_path.clone(),
    };
    write_atomic(&sol_path, &format!("{}\n", file.to_json()?))?;
    write_atomic(&cfg.out.join("solution.csv"), &file.to_csv())?;
    write_atomic(&cfg.out.join("summary.json"), &to_json(&summary)?)?;

    println!("residual {:e} after {} Newton steps", summary.residual_inf, summary.iterations);
    println!("admissible (K_{m}): {}", summary.admissibility.admissible);
    println!("w(0) = {}", center);
    if let Some(a) = quad {
        println!("quadratic coefficient -2 w(0)/R^2 = {a}");
    }
    println!("p  I_p[w]");
    for row in &summary.hessian_integrals {
        println!("{}  {}", row.p, row.value);
    }
    println!("wrote {}", cfg.out.display());
    Ok(0)
}

fn strip<F>(s: DirichletSolution<F>) -> DirichletSolution<()> {
    DirichletSolution {
        w: (),
        residual_inf: s.residual_inf,
        iterations: s.iterations,
        residual_history: s.residual_history,
        admissibility: s.admissibility,
        max_value: s.max_value,
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ReportFile {
    schema_version: u32,
    suite: String,
    seed: u64,
    samples: usize,
    space: Option<String>,
    reports: Vec<InequalityReport>,
}

fn space_reports<S>(space: &S, kinds: &[InequalityKind], cfg: &RunConfig) -> Result<Vec<InequalityReport>>
where
    S: Sampling + Sync,
    S::Function: Send + Sync,
{
    let configs = match (cfg.m, cfg.l) {
        (Some(m), Some(l)) => vec![(m, l)],
        (Some(m), None) => (0..m).map(|l| (m, l)).collect(),
        (None, _) => default_configs(space.dim()),
    };
    for &(m, l) in &configs {
        if l >= m || m > space.dim() || m < 2 {
            return Err(usage(format!("no inequality suite for m={m}, l={l} in dimension {}", space.dim())));
        }
    }
    run_suites(space, kinds, &configs, &SuiteOptions { samples: cfg.samples, seed: cfg.seed })
}

pub fn verify(suite: &str, cfg: &RunConfig) -> Result<i32> {
    let opts = SuiteOptions { samples: cfg.samples, seed: cfg.seed };
    let matrix_kinds = [InequalityKind::Maclaurin, InequalityKind::Monotonicity, InequalityKind::Ellipticity];
    let (with_matrix, kinds): (bool, Vec<InequalityKind>) = match suite {
        "all" => (true, InequalityKind::SPACE_CHECKS.to_vec()),
        name => {
            let kind: InequalityKind = name
                .parse()
                .map_err(|_| usage(format!("unknown suite {name:?}; expected all, maclaurin or a check name")))?;
            if matrix_kinds.contains(&kind) {
                (true, Vec::new())
            } else {
                (false, vec![kind])
            }
        }
    };
    let mut reports = Vec::new();
    if with_matrix {
        let mac = maclaurin_suite(&opts)?;
        reports.extend(mac.into_iter().filter(|r| suite == "all" || r.name.name() == suite || suite == "maclaurin"));
    }
    let mut space_desc = None;
    if !kinds.is_empty() {
        match cfg.domain {
            Domain::Ball { n, radius } => {
                let space = BallSpace::new(n, radius, cfg.nr)?;
                space_desc = Some(space.describe());
                reports.extend(space_reports(&space, &kinds, cfg)?);
            }
            _ => {
                let grid = PolarGrid::new(cfg.domain, cfg.nr, cfg.ntheta)?;
                space_desc = Some(grid.describe());
                reports.extend(space_reports(&grid, &kinds, cfg)?);
            }
        }
    }
    let file = ReportFile {
        schema_version: SCHEMA_VERSION,
        suite: suite.to_string(),
        seed: cfg.seed,
        samples: cfg.samples,
        space: space_desc,
        reports,
    };
    let json_path = cfg.out.join("reports.json");
    write_atomic(&json_path, &to_json(&file)?)?;
    write_atomic(&cfg.out.join("reports.csv"), &reports_to_csv(&file.reports))?;

    let mut by_kind: BTreeMap<&str, (usize, usize, f64)> = BTreeMap::new();
    for r in &file.reports {
        let e = by_kind.entry(r.name.name()).or_insert((0, 0, f64::INFINITY));
        e.0 += 1;
        e.1 += usize::from(!r.passed());
        e.2 = e.2.min(r.margin);
    }
    println!("{:<14} {:>7} {:>6} {:>14}", "inequality", "reports", "fails", "min margin");
    for (name, (count, fails, min)) in &by_kind {
        println!("{name:<14} {count:>7} {fails:>6} {min:>14.6e}");
    }
    let failed = file.reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        eprintln!("FAIL: {failed} of {} reports failed; see {}", file.reports.len(), json_path.display());
        return Ok(1);
    }
    println!("all {} reports pass; wrote {}", file.reports.len(), json_path.display());
    Ok(0)
}

pub fn plotdata(input: &Path, out: Option<&Path>) -> Result<i32> {
    let text = fs::read_to_string(input).map_err(|e| usage(format!("cannot read {}: {e}", input.display())))?;
    let value: Value = serde_json::from_str(&text)?;
    let csv = if value.get("reports").is_some() {
        let file: ReportFile = serde_json::from_value(value)?;
        let mut s = String::from("index,name,m,l,margin,tolerance\n");
        for (i, r) in file.reports.iter().enumerate() {
            let l = r.l.map(|l| l.to_string()).unwrap_or_default();
            s.push_str(&format!("{i},{},{},{l},{},{}\n", r.name.name(), r.m, r.margin, r.tolerance));
        }
        s
    } else {
        FieldFile::from_json(&text)?.to_csv()
    };
    match out {
        Some(p) => write_atomic(p, &csv)?,
        None => emit(&csv)?,
    }
    Ok(0)
}
