use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use solvcirc_core::evolve::{record, subsystem_density, Engine, EvolutionConfig, LeftState};
use solvcirc_core::gates::TwoSiteGate;
use solvcirc_core::mps::ghz_cluster_family;
use solvcirc_core::numerics::von_neumann_entropy;
use solvcirc_core::oracle::{
    default_margin, evolve_chain, renyi_trace_chain, trace_distance, ChainSpec, Closure,
    DEFAULT_CHAIN_CAP,
};
use solvcirc_core::renyi::{entanglement_velocity, renyi_trace_via_transfer};
use solvcirc_core::solvable::{solvability_report, verify_im_fixed_point, DEFAULT_IM_CAP};
use solvcirc_core::{Error as CoreError, Exec};

use crate::config::{capacity, CheckSide, ExperimentConfig};
use crate::error::{CliError, CliResult};

/// Options shared by every subcommand.
pub struct Common {
    pub config_path: PathBuf,
    pub config: ExperimentConfig,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Common {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn sink(&self) -> CliResult<Box<dyn Write>> {
        match self.out.as_ref().or(self.config.output.as_ref()) {
            Some(p) => Ok(Box::new(File::create(p).map_err(|e| {
                CliError::Config(format!("cannot create {}: {e}", p.display()))
            })?)),
            None => Ok(Box::new(io::stdout())),
        }
    }

    fn path(&self) -> &Path {
        &self.config_path
    }
}

/// Shortest round-trip formatting keeps CSV output byte-stable.
fn num(x: f64) -> String {
    format!("{x}")
}

fn write_json<T: Serialize>(common: &Common, value: &T) -> CliResult<()> {
    let mut w = common.sink()?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

#[derive(Serialize)]
struct CheckOutput {
    #[serde(flatten)]
    report: solvcirc_core::solvable::SolvabilityReport,
    tol: f64,
    passed: bool,
}

pub fn check(common: &Common) -> CliResult<()> {
    let gate = common.config.gate(common.path())?;
    let a = common.config.mps(common.path())?;
    let report = solvability_report(&gate, &a, Exec::default())?;
    let tol = common.tol(1e-8);
    let mut failed = Vec::new();
    for side in &common.config.check.require {
        let r = match side {
            CheckSide::Left => report.left_residual,
            CheckSide::Right => report.right_residual,
            CheckSide::Soliton => report.soliton_residual.ok_or_else(|| {
                CliError::Config("the soliton check is defined for q=2 only".into())
            })?,
        };
        // NaN residuals count as failures
        if r.is_nan() || r >= tol {
            failed.push(format!("{side:?} residual {r:e}"));
        }
    }
    write_json(
        common,
        &CheckOutput {
            report,
            tol,
            passed: failed.is_empty(),
        },
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "{} above {tol:e}",
            failed.join(", ")
        )))
    }
}

pub fn gen_gate(common: &Common) -> CliResult<()> {
    let gate: TwoSiteGate = common.config.gate(common.path())?;
    write_json(common, &gate)
}

fn evolution(cfg: &ExperimentConfig, path: &Path, left: LeftState) -> CliResult<EvolutionConfig> {
    let gate = cfg.gate(path)?;
    let kets = cfg.right_kets(&left)?;
    Ok(EvolutionConfig::new(
        gate,
        left,
        kets,
        cfg.tmax,
        cfg.l_r()?,
    )?)
}

pub fn evolve(common: &Common) -> CliResult<()> {
    let cfg = &common.config;
    let runs: Vec<(Option<f64>, LeftState)> = match &cfg.theta_sweep {
        Some(thetas) => {
            let q = cfg.gate(common.path())?.q;
            thetas
                .iter()
                .map(|&th| Ok((Some(th), LeftState::Mps(ghz_cluster_family(th, q)?))))
                .collect::<CliResult<_>>()?
        }
        None => vec![(None, cfg.left_state(common.path())?)],
    };
    let q = runs[0].1.q();
    let observables = cfg.observables(q)?;
    let ops: Vec<(usize, _)> = observables
        .iter()
        .map(|(_, s, m)| (*s, m.clone()))
        .collect();
    let configs = runs
        .into_iter()
        .map(|(th, left)| Ok((th, evolution(cfg, common.path(), left)?)))
        .collect::<CliResult<Vec<_>>>()?;

    // independent runs fan out; rows are merged back in config order
    let tables = Exec::default().map_slice(&configs, |(_, ec)| -> Result<_, CoreError> {
        let engine = Engine::new(ec.clone())?;
        let mut s = engine.initial()?;
        let mut rows = vec![record(&s, &ops)?];
        for _ in 0..ec.tmax {
            s = engine.step(&s)?;
            rows.push(record(&s, &ops)?);
        }
        Ok(rows)
    });

    let mut w = csv::Writer::from_writer(common.sink()?);
    let mut header: Vec<String> = Vec::new();
    if cfg.theta_sweep.is_some() {
        header.push("theta".into());
    }
    header.extend(["t", "S_ent", "trace_residual", "min_eig"].map(String::from));
    header.extend(observables.iter().map(|(n, _, _)| n.clone()));
    w.write_record(&header)?;
    let mut failure = None;
    for ((th, _), table) in configs.iter().zip(tables) {
        let rows = match table {
            Ok(r) => r,
            Err(e) => {
                failure.get_or_insert(e);
                continue;
            }
        };
        for r in rows {
            let mut rec: Vec<String> = Vec::new();
            if let Some(th) = th {
                rec.push(num(*th));
            }
            rec.push(r.t.to_string());
            rec.extend([r.s_ent, r.trace_residual, r.min_eig].map(num));
            rec.extend(r.observables.iter().copied().map(num));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn oracle(common: &Common) -> CliResult<()> {
    let cfg = &common.config;
    let left = cfg.left_state(common.path())?;
    let a = match &left {
        LeftState::Mps(a) => a.clone(),
        _ => {
            return Err(CliError::Config(
                "the oracle needs a single-site MPS".into(),
            ))
        }
    };
    let ec = evolution(cfg, common.path(), left)?;
    let l_left = cfg
        .l_left
        .ok_or_else(|| CliError::Config("oracle config needs l_left".into()))?;
    let mut spec = ChainSpec::new(
        l_left,
        ec.l_r,
        ec.gate.clone(),
        a,
        ec.right_kets.clone(),
        ec.tmax,
    );
    spec.parity = cfg.oracle.parity;
    spec.closure = cfg.oracle.closure.unwrap_or(Closure::Purified);
    spec.cap = capacity(DEFAULT_CHAIN_CAP)?;
    spec.validate()?;
    let chain = evolve_chain(&spec)?;
    let states = Engine::new(ec)?.run()?;

    let tol = common.tol(1e-9);
    let mut w = csv::Writer::from_writer(common.sink()?);
    w.write_record(["t", "trace_distance", "oracle_entropy", "engine_entropy"])?;
    let mut worst: f64 = 0.0;
    for (t, (rho, s)) in chain.iter().zip(&states).enumerate() {
        let engine_rho = subsystem_density(s);
        let d = trace_distance(rho, &engine_rho)?;
        worst = worst.max(d);
        w.write_record([
            t.to_string(),
            num(d),
            num(von_neumann_entropy(rho)?),
            num(von_neumann_entropy(&engine_rho)?),
        ])?;
    }
    w.flush()?;
    if worst < tol {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "max trace distance {worst:e} is not below {tol:e}"
        )))
    }
}

pub fn renyi(common: &Common) -> CliResult<()> {
    let cfg = &common.config;
    let a = cfg.mps(common.path())?;
    let opts = &cfg.renyi;
    if opts.n_list.iter().any(|&n| n < 2) {
        return Err(CliError::Config("n_list entries must be ≥ 2".into()));
    }
    let gate = if opts.with_oracle {
        Some(cfg.gate(common.path())?)
    } else {
        None
    };
    let cap = capacity(DEFAULT_CHAIN_CAP)?;
    let tol = common.tol(1e-8);
    let mut w = csv::Writer::from_writer(common.sink()?);
    w.write_record([
        "n",
        "t",
        "trace_via_transfer",
        "trace_via_oracle",
        "lambda_n",
        "v_E",
    ])?;
    let mut problems = Vec::new();
    for &n in &opts.n_list {
        let vel = match entanglement_velocity(&a, n) {
            Ok(v) => Some(v),
            Err(CoreError::Dominance(msg)) => {
                problems.push(format!("n={n}: {msg}"));
                None
            }
            Err(e) => return Err(e.into()),
        };
        for t in 0..=cfg.tmax {
            let via = renyi_trace_via_transfer(&a, n, t)?;
            let chain = match &gate {
                Some(g) => {
                    let m = opts
                        .margin
                        .unwrap_or(default_margin(t))
                        .max(default_margin(t));
                    let c = renyi_trace_chain(g, &a, n, t, m, cap)?;
                    let gap = (c - via).abs();
                    if gap.is_nan() || gap >= tol {
                        problems.push(format!("n={n} t={t}: transfer {via} vs chain {c}"));
                    }
                    num(c)
                }
                None => String::new(),
            };
            let (lambda, v) = match vel {
                Some(v) => (num(v.lambda), num(v.v)),
                None => ("dominance_error".into(), "dominance_error".into()),
            };
            w.write_record([n.to_string(), t.to_string(), num(via), chain, lambda, v])?;
        }
    }
    w.flush()?;
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(problems.join("; ")))
    }
}

#[derive(Serialize)]
struct FixedPointOutput {
    tsteps: usize,
    residual: f64,
    solvable_residual: f64,
    tol: f64,
    passed: bool,
}

pub fn fixed_point(common: &Common) -> CliResult<()> {
    let cfg = &common.config;
    let gate = cfg.gate(common.path())?;
    let a = cfg.mps(common.path())?;
    let tsteps = cfg.fixed_point.tsteps;
    let cap = capacity(DEFAULT_IM_CAP)?;
    let residual = verify_im_fixed_point(&gate, &a, tsteps, cap)?;
    let solvable_residual = solvability_report(&gate, &a, Exec::default())?.left_residual;
    let tol = common.tol(1e-10);
    let passed = residual < tol;
    write_json(
        common,
        &FixedPointOutput {
            tsteps,
            residual,
            solvable_residual,
            tol,
            passed,
        },
    )?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "fixed-point residual {residual:e} is not below {tol:e}"
        )))
    }
}
