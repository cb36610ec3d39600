use std::path::{Path, PathBuf};

use adrkit::adr::{kappa_bound, validate, AdrOperator, AdrParams, IterationTrace, RunStatus};
use adrkit::demiclosedness::{
    check_averaged_premises, check_cocoercive_premises, check_product_premises,
    verify_averaged_conclusion, verify_conclusion, AveragedVariant, CocoerciveMode,
    ConclusionReport, ConditionDiagnostics,
};
use adrkit::operators::{certify, Certificate, PointMap};
use adrkit::resolvents::DerivedConstant;
use adrkit::vecspace::{Euclidean, Vector};
use adrkit::{Error, ValidationReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    self, CertifyConfig, DemiCheckConfig, DemiMode, ExperimentConfig, KappaSpec, SweepConfig,
};
use crate::io::{self, fmt_float};
use crate::{Options, Outcome, UsageError};

macro_rules! say {
    ($opts:expr, $($arg:tt)*) => {
        if !$opts.quiet {
            println!($($arg)*);
        }
    };
}

#[derive(Debug, Serialize)]
struct ClaimCheck {
    operator: &'static str,
    regime: String,
    modulus: f64,
    supported: bool,
}

#[derive(Debug, Serialize)]
struct ValidateOutput {
    report: ValidationReport,
    kappa: Option<f64>,
    lambda: Option<f64>,
    mu: Option<f64>,
    claims: Vec<ClaimCheck>,
}

pub fn cmd_validate(opts: &Options) -> anyhow::Result<Outcome> {
    let cfg: ExperimentConfig = config::load(&opts.config)?;
    let (a, b) = cfg.problem.build()?;
    let problem = cfg.params.problem();
    let report = validate(&problem, cfg.params.kappa.value());
    let claims = vec![
        ClaimCheck {
            operator: "A",
            regime: problem.regime.to_string(),
            modulus: problem.alpha,
            supported: a.supports(problem.regime, problem.alpha),
        },
        ClaimCheck {
            operator: "B",
            regime: problem.regime.to_string(),
            modulus: problem.beta,
            supported: b.supports(problem.regime, problem.beta),
        },
    ];
    let params = AdrParams::new(problem, cfg.params.kappa.value()).ok();

    for c in &report.conditions {
        say!(
            opts,
            "{:<5} {}  (slack {})",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.slack + 0.0
        );
    }
    for c in &claims {
        say!(
            opts,
            "{:<5} {} is {}-{}",
            if c.supported { "pass" } else { "FAIL" },
            c.operator,
            c.modulus,
            c.regime
        );
    }
    match (&params, report.kappa_bar) {
        (Some(p), _) => say!(
            opts,
            "kappa_bar = {}  kappa = {}  lambda = {}  mu = {}",
            p.kappa_bar,
            p.kappa,
            p.lambda,
            p.mu
        ),
        (None, Some(k)) => say!(opts, "kappa_bar = {k}"),
        (None, None) => {}
    }
    let ok = report.pass && claims.iter().all(|c| c.supported);
    let out = ValidateOutput {
        kappa: params.map(|p| p.kappa),
        lambda: params.map(|p| p.lambda),
        mu: params.map(|p| p.mu),
        report,
        claims,
    };
    io::write_json(&opts.out.join("validation.json"), &out)?;
    Ok(Outcome::from_bool(ok))
}

/// Builds and runs one experiment.
pub fn execute(cfg: &ExperimentConfig, seed: u64) -> anyhow::Result<(AdrOperator, IterationTrace)> {
    let op = cfg.build()?;
    let x0 = cfg.run.x0.build(cfg.problem.dim, seed)?;
    let trace = op.run(&x0, cfg.stop_rule())?;
    Ok((op, trace))
}

pub fn cmd_run(opts: &Options) -> anyhow::Result<Outcome> {
    let cfg: ExperimentConfig = config::load(&opts.config)?;
    let seed = opts.seed.unwrap_or(cfg.run.seed);
    let (_, trace) = execute(&cfg, seed)?;
    io::write_trace(&opts.out.join(&cfg.outputs.trace), &trace)?;
    let row = io::summary_row(&trace);
    io::append_summary(&opts.out.join(&cfg.outputs.summary), &row)?;
    say!(
        opts,
        "{} after {} iterations: step residual {}, shadow inclusion residual {}",
        row[0],
        row[1],
        row[2],
        row[3]
    );
    Ok(Outcome::from_bool(trace.status != RunStatus::Diverged))
}

/// Header of the aggregate sweep CSV.
pub const SWEEP_HEADER: [&str; 10] = [
    "cell",
    "gamma",
    "delta",
    "kappa",
    "seed",
    "status",
    "iterations",
    "final_step_residual",
    "final_inclusion_residual",
    "skipped_reason",
];

#[derive(Debug, Clone, Copy)]
enum KappaAxis {
    Base(KappaSpec),
    Absolute(f64),
    Fraction(f64),
}

#[derive(Debug, Clone)]
struct Cell {
    index: usize,
    gamma: f64,
    delta: f64,
    kappa: KappaAxis,
    seed: u64,
}

fn axis(values: &Option<Vec<f64>>, fallback: f64, name: &str) -> anyhow::Result<Vec<f64>> {
    match values {
        Some(v) if v.is_empty() => Err(UsageError(format!("grid.{name} is empty")).into()),
        Some(v) => Ok(v.clone()),
        None => Ok(vec![fallback]),
    }
}

fn cells(cfg: &SweepConfig, base_seed: u64) -> anyhow::Result<Vec<Cell>> {
    let g = &cfg.grid;
    let gammas = axis(&g.gamma, cfg.params.gamma, "gamma")?;
    let deltas = axis(&g.delta, cfg.params.delta, "delta")?;
    let kappas: Vec<KappaAxis> = match (&g.kappa, &g.kappa_fraction) {
        (Some(_), Some(_)) => {
            return Err(
                UsageError("grid.kappa and grid.kappa_fraction are exclusive".into()).into(),
            )
        }
        (Some(k), None) => axis(&Some(k.clone()), 0.0, "kappa")?
            .into_iter()
            .map(KappaAxis::Absolute)
            .collect(),
        (None, Some(f)) => axis(&Some(f.clone()), 0.0, "kappa_fraction")?
            .into_iter()
            .map(KappaAxis::Fraction)
            .collect(),
        (None, None) => vec![KappaAxis::Base(cfg.params.kappa)],
    };
    let total = gammas.len() * deltas.len() * kappas.len();
    if total > cfg.sweep.max_cells {
        return Err(UsageError(format!(
            "sweep has {total} cells, more than max_cells = {}",
            cfg.sweep.max_cells
        ))
        .into());
    }
    let mut out = Vec::with_capacity(total);
    for &gamma in &gammas {
        for &delta in &deltas {
            for &kappa in &kappas {
                let index = out.len();
                out.push(Cell {
                    index,
                    gamma,
                    delta,
                    kappa,
                    seed: base_seed ^ index as u64,
                });
            }
        }
    }
    Ok(out)
}

fn cell_file(index: usize) -> PathBuf {
    PathBuf::from(format!("cell_{index:04}.jsonl"))
}

fn run_cell(base: &ExperimentConfig, cell: &Cell, out: &Path) -> [String; 10] {
    let mut cfg = base.clone();
    cfg.params.gamma = cell.gamma;
    cfg.params.delta = cell.delta;
    let mut row = [
        cell.index.to_string(),
        fmt_float(cell.gamma),
        fmt_float(cell.delta),
        String::new(),
        cell.seed.to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ];
    let outcome = (|| -> anyhow::Result<IterationTrace> {
        cfg.params.kappa = match cell.kappa {
            KappaAxis::Base(k) => k,
            KappaAxis::Absolute(k) => KappaSpec::Value(k),
            KappaAxis::Fraction(f) => KappaSpec::Value(f * kappa_bound(&cfg.params.problem())?),
        };
        let (op, trace) = execute(&cfg, cell.seed)?;
        row[3] = fmt_float(op.params().kappa);
        io::write_trace(&out.join(cell_file(cell.index)), &trace)?;
        Ok(trace)
    })();
    match outcome {
        Ok(trace) => {
            let s = io::summary_row(&trace);
            row[5..9].clone_from_slice(&s);
        }
        Err(e) => {
            if let KappaSpec::Value(k) = cfg.params.kappa {
                row[3] = fmt_float(k);
            }
            row[5] = match e.downcast_ref::<Error>() {
                Some(Error::Validation(_)) => "skipped".into(),
                _ => "error".into(),
            };
            row[9] = match e.downcast_ref::<Error>() {
                Some(Error::Validation(names)) => names.join("; "),
                _ => e.to_string(),
            };
        }
    }
    row
}

pub fn cmd_sweep(opts: &Options) -> anyhow::Result<Outcome> {
    let cfg: SweepConfig = config::load(&opts.config)?;
    let base_seed = opts.seed.or(cfg.sweep.base_seed).unwrap_or(cfg.run.seed);
    let cells = cells(&cfg, base_seed)?;
    let base = cfg.base();
    std::fs::create_dir_all(&opts.out)?;
    let work = || -> Vec<[String; 10]> {
        cells
            .par_iter()
            .map(|c| run_cell(&base, c, &opts.out))
            .collect()
    };
    let rows = match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(work),
        None => work(),
    };
    let mut w = csv::Writer::from_path(opts.out.join("sweep.csv"))?;
    w.write_record(SWEEP_HEADER)?;
    for r in &rows {
        w.write_record(r)?;
    }
    w.flush()?;
    let done = rows.iter().filter(|r| r[5] == "converged").count();
    say!(opts, "{} cells, {} converged", rows.len(), done);
    Ok(Outcome::Success)
}

#[derive(Debug, Serialize)]
struct CertifyOutput {
    map: &'static str,
    operator: &'static str,
    gamma: Option<f64>,
    relaxation: Option<f64>,
    derived: Vec<DerivedConstant>,
    certificate: Certificate,
}

pub fn cmd_certify(opts: &Options) -> anyhow::Result<Outcome> {
    let mut cfg: CertifyConfig = config::load(&opts.config)?;
    if let Some(s) = opts.seed {
        cfg.sampling.seed = s;
    }
    let sampling = cfg.sampling.sampling();
    let op = cfg.target.operator()?;
    let out = match cfg.target.resolvent()? {
        None => CertifyOutput {
            map: "operator",
            operator: op.name(),
            gamma: None,
            relaxation: None,
            derived: vec![],
            certificate: certify(&op, cfg.claim, &sampling, &Euclidean)?,
        },
        Some((h, lambda)) => {
            let certificate = if lambda == 1.0 {
                certify(&h, cfg.claim, &sampling, &Euclidean)?
            } else {
                certify(&h.relaxed(lambda)?, cfg.claim, &sampling, &Euclidean)?
            };
            CertifyOutput {
                map: "resolvent",
                operator: op.name(),
                gamma: Some(h.gamma()),
                relaxation: Some(lambda),
                derived: h.constants().to_vec(),
                certificate,
            }
        }
    };
    let c = &out.certificate;
    say!(
        opts,
        "{} {} {}: {} over {} pairs (worst margin {})",
        out.map,
        c.property.name(),
        c.property.constant(),
        c.verdict,
        c.sample_count,
        c.worst_violation
    );
    io::write_json(&opts.out.join("certificate.json"), &out)?;
    Ok(Outcome::from_bool(c.verdict.passed()))
}

#[derive(Debug, Serialize)]
struct DemiOutput {
    mode: DemiMode,
    rho: Vec<f64>,
    tau: Vec<f64>,
    theta: Vec<f64>,
    diagnostics: ConditionDiagnostics,
    conclusion: ConclusionReport,
}

fn pair(v: &[f64], name: &str) -> anyhow::Result<[f64; 2]> {
    <[f64; 2]>::try_from(v)
        .map_err(|_| UsageError(format!("{name} needs exactly 2 entries, got {}", v.len())).into())
}

pub fn cmd_demi_check(opts: &Options) -> anyhow::Result<Outcome> {
    let cfg: DemiCheckConfig = config::load(&opts.config)?;
    let chk = &cfg.check;
    let lines = io::read_trace(&chk.trace)?;
    let iterates = io::trace_iterates(&lines)?;
    let (a, b) = cfg.problem.build()?;
    let problem = cfg.params.problem();
    let op = AdrOperator::new(AdrParams::new(problem, cfg.params.kappa.value())?, a, b)?;
    if chk.x_star.len() != cfg.problem.dim {
        return Err(UsageError(format!("x_star must have {} entries", cfg.problem.dim)).into());
    }
    let x_star = Vector::from_row_slice(&chk.x_star);
    let mut window = op.shadow_window(&iterates, &x_star)?;
    if let Some(y) = &chk.y {
        let limits = window
            .limits()
            .expect("shadow windows carry limits")
            .0
            .to_vec();
        window = window
            .with_limits(limits, Vector::from_row_slice(y))
            .map_err(|e| UsageError(format!("check.y: {e}")))?;
    }
    let rho = chk.rho.clone().unwrap_or(problem.shadow_rho()?.to_vec());
    let tau = chk
        .tau
        .clone()
        .unwrap_or(problem.cocoercive_taus().to_vec());
    let theta = chk
        .theta
        .clone()
        .unwrap_or(problem.averaged_thetas().to_vec());
    let maps: [&dyn PointMap; 2] = [op.j1(), op.j2()];
    let tol = cfg.tolerance();
    let diagnostics = match chk.mode {
        DemiMode::CocoerciveRaw => {
            check_cocoercive_premises(&window, &maps, &rho, &tau, CocoerciveMode::Raw, tol)?
        }
        DemiMode::CocoerciveBalanced => {
            check_cocoercive_premises(&window, &maps, &rho, &tau, CocoerciveMode::Balanced, tol)?
        }
        DemiMode::AveragedGeneral => {
            check_averaged_premises(&window, &maps, &theta, AveragedVariant::General, tol)?
        }
        DemiMode::AveragedTwoBalanced => check_averaged_premises(
            &window,
            &maps,
            &theta,
            AveragedVariant::TwoBalanced {
                rho: pair(&rho, "rho")?,
            },
            tol,
        )?,
        DemiMode::Product => check_product_premises(&window, &maps, &rho, &tau, tol)?,
    };
    let (xs, y) = window.limits().expect("shadow windows carry limits");
    let conclusion = match chk.mode {
        DemiMode::AveragedGeneral => {
            verify_averaged_conclusion(&maps, xs, y, &theta, chk.conclusion_tol)?
        }
        _ => verify_conclusion(&maps, xs, y, chk.conclusion_tol)?,
    };

    for s in &diagnostics.series {
        let slope = s
            .log_slope
            .map_or("n/a".to_string(), |v| format!("{v:.3e}"));
        let note = match (s.verdict.passed(), s.log_slope) {
            (false, None) => "  plateau",
            (false, Some(v)) if v.abs() < 1e-3 => "  plateau",
            _ => "",
        };
        say!(
            opts,
            "{:<5} {:<5} final-quarter mean {:.3e} (threshold {:.3e}, log slope {}){}",
            s.verdict,
            s.name,
            s.final_quarter_mean,
            s.threshold,
            slope,
            note
        );
    }
    if let Some(b) = &diagnostics.balance {
        say!(
            opts,
            "{:<5} balance  weighted average {} slack {}",
            b.verdict,
            b.weighted_average,
            b.slack
        );
    }
    say!(
        opts,
        "{:<5} conclusion  max residual {:.3e}",
        conclusion.verdict,
        conclusion.max_residual
    );

    let ok = diagnostics.passed() && conclusion.verdict.passed();
    let out = DemiOutput {
        mode: chk.mode,
        rho,
        tau,
        theta,
        diagnostics,
        conclusion,
    };
    io::write_json(&opts.out.join("diagnostics.json"), &out)?;
    Ok(Outcome::from_bool(ok))
}
