//! Experiment configuration (JSON, schema version "1").
//!
//! Randomness: every sampled object draws from `Rng::new(seed).fork(stream)`
//! with a fixed stream per role, so changing one part of a config never
//! shifts the random numbers of another.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use solvcirc_core::evolve::{mps_tail_right_kets, product_right_kets, LeftState};
use solvcirc_core::gates::{
    cartan_gate, gate_both_chirality_q2, haar_gate, sample, swap_matrix, TwoSiteGate,
};
use solvcirc_core::mps::{
    basis_product_mps, cluster_tensor, ghz_cluster_family, Lpdo, MpsTensor, TwoSiteMps,
};
use solvcirc_core::numerics::pauli;
use solvcirc_core::oracle::{Closure, ParityAnchor};
use solvcirc_core::{CMatrix, Rng, C64};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: &str = "1";

/// Stream used for sampled gates.
pub const GATE_STREAM: u64 = 1;
/// Stream used for random right kets.
pub const RIGHT_STREAM: u64 = 2;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: String,
    #[serde(default)]
    pub seed: u64,
    pub gate: Option<GateSpec>,
    pub mps: Option<MpsSpec>,
    pub right_state: Option<RightSpec>,
    pub l_r: Option<usize>,
    #[serde(default)]
    pub tmax: usize,
    pub l_left: Option<usize>,
    #[serde(default)]
    pub oracle: OracleOptions,
    #[serde(default)]
    pub renyi: RenyiOptions,
    #[serde(default)]
    pub check: CheckOptions,
    #[serde(default)]
    pub fixed_point: FixedPointOptions,
    #[serde(default)]
    pub observables: Vec<ObservableSpec>,
    /// Runs `evolve` once per value with a GHZ–cluster tensor of that angle.
    pub theta_sweep: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GateSpec {
    Cartan {
        j1: f64,
        j2: f64,
        j3: f64,
    },
    Q2Qt1,
    Q2Qt2,
    GeneralQQt {
        q: usize,
        qt: usize,
    },
    /// Explicit angles, or a random member when any angle is omitted.
    BothChiralityQ2 {
        phi: Option<f64>,
        eps: Option<f64>,
        epsp: Option<f64>,
        eta: Option<f64>,
        etap: Option<f64>,
        j3: Option<f64>,
    },
    BothChiralityQ4plus {
        q: usize,
    },
    Haar {
        q: usize,
    },
    /// `e^{iφ}·SWAP`.
    Swap {
        q: usize,
        #[serde(default)]
        phi: f64,
    },
    /// A gate file as written by `gen-gate`.
    File {
        path: PathBuf,
    },
    Inline {
        gate: TwoSiteGate,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MpsSpec {
    GhzCluster {
        theta: f64,
        #[serde(default = "default_q2")]
        q: usize,
    },
    Cluster,
    Product {
        q: usize,
        level: usize,
    },
    File {
        path: PathBuf,
    },
    Inline {
        tensor: MpsTensor,
    },
    TwoSite {
        tensor: TwoSiteMps,
    },
    Lpdo {
        tensor: Lpdo,
    },
}

fn default_q2() -> usize {
    2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RightSpec {
    /// `|level⟩^{⊗L_R}` for every bond index.
    Product { level: usize },
    /// One ket per bond index, entries as `[re, im]`.
    Kets { kets: Vec<Vec<[f64; 2]>> },
    /// Continuation of the left MPS into the right region (needs `χ = q`).
    MpsTail,
    /// Independent complex Gaussian kets.
    Random,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleOptions {
    #[serde(default)]
    pub parity: ParityAnchor,
    pub closure: Option<Closure>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenyiOptions {
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
    /// Also evaluate the finite-chain trace (needs a gate).
    #[serde(default)]
    pub with_oracle: bool,
    pub margin: Option<usize>,
}

fn default_n_list() -> Vec<usize> {
    vec![2]
}

impl Default for RenyiOptions {
    fn default() -> Self {
        RenyiOptions {
            n_list: default_n_list(),
            with_oracle: false,
            margin: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckSide {
    Left,
    Right,
    Soliton,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOptions {
    #[serde(default = "default_sides")]
    pub require: Vec<CheckSide>,
}

fn default_sides() -> Vec<CheckSide> {
    vec![CheckSide::Left]
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            require: default_sides(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointOptions {
    #[serde(default = "default_tsteps")]
    pub tsteps: usize,
}

fn default_tsteps() -> usize {
    2
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            tsteps: default_tsteps(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub site: usize,
    pub op: String,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        if cfg.version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema version {:?}, expected {SCHEMA_VERSION:?}",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    fn base_dir(path: &Path) -> PathBuf {
        path.parent().map(Path::to_path_buf).unwrap_or_default()
    }

    pub fn gate(&self, config_path: &Path) -> CliResult<TwoSiteGate> {
        let spec = self
            .gate
            .as_ref()
            .ok_or_else(|| CliError::Config("config has no gate".into()))?;
        let mut rng = Rng::new(self.seed).fork(GATE_STREAM);
        let gate = match spec {
            GateSpec::Cartan { j1, j2, j3 } => cartan_gate(*j1, *j2, *j3),
            GateSpec::Q2Qt1 => sample::q2_qt1(&mut rng),
            GateSpec::Q2Qt2 => sample::q2_qt2(&mut rng),
            GateSpec::GeneralQQt { q, qt } => sample::general(*q, *qt, &mut rng)?,
            GateSpec::BothChiralityQ2 {
                phi,
                eps,
                epsp,
                eta,
                etap,
                j3,
            } => match (phi, eps, epsp, eta, etap, j3) {
                (Some(a), Some(b), Some(c), Some(d), Some(e), Some(f)) => {
                    gate_both_chirality_q2(*a, *b, *c, *d, *e, *f)
                }
                (None, None, None, None, None, None) => sample::both_chirality_q2(&mut rng),
                _ => {
                    return Err(CliError::Config(
                        "both_chirality_q2 needs all six angles or none".into(),
                    ))
                }
            },
            GateSpec::BothChiralityQ4plus { q } => sample::both_chirality_q4plus(*q, &mut rng)?,
            GateSpec::Haar { q } => haar_gate(*q, &mut rng),
            GateSpec::Swap { q, phi } => {
                TwoSiteGate::custom(*q, swap_matrix(*q).scale(C64::from_polar(1.0, *phi)))?
            }
            GateSpec::File { path } => {
                let p = Self::base_dir(config_path).join(path);
                let text = fs::read_to_string(&p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                validated_gate(serde_json::from_str(&text)?)?
            }
            GateSpec::Inline { gate } => validated_gate(gate.clone())?,
        };
        Ok(gate)
    }

    pub fn left_state(&self, config_path: &Path) -> CliResult<LeftState> {
        let spec = self
            .mps
            .as_ref()
            .ok_or_else(|| CliError::Config("config has no mps".into()))?;
        Ok(match spec {
            MpsSpec::GhzCluster { theta, q } => LeftState::Mps(ghz_cluster_family(*theta, *q)?),
            MpsSpec::Cluster => LeftState::Mps(cluster_tensor()),
            MpsSpec::Product { q, level } => LeftState::Mps(basis_product_mps(*q, *level)?),
            MpsSpec::File { path } => {
                let p = Self::base_dir(config_path).join(path);
                let text = fs::read_to_string(&p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                let t: MpsTensor = serde_json::from_str(&text)?;
                LeftState::Mps(MpsTensor::new(t.q, t.chi, t.mats)?)
            }
            MpsSpec::Inline { tensor } => {
                LeftState::Mps(MpsTensor::new(tensor.q, tensor.chi, tensor.mats.clone())?)
            }
            MpsSpec::TwoSite { tensor } => LeftState::TwoSite(TwoSiteMps::new(
                tensor.q,
                tensor.chi,
                tensor.chip,
                tensor.mats_a.clone(),
                tensor.mats_b.clone(),
            )?),
            MpsSpec::Lpdo { tensor } => LeftState::Lpdo(tensor.clone()),
        })
    }

    /// The left state as a single-site tensor, for commands that need one.
    pub fn mps(&self, config_path: &Path) -> CliResult<MpsTensor> {
        match self.left_state(config_path)? {
            LeftState::Mps(a) => Ok(a),
            _ => Err(CliError::Config(
                "this command needs a single-site MPS tensor".into(),
            )),
        }
    }

    pub fn l_r(&self) -> CliResult<usize> {
        self.l_r
            .ok_or_else(|| CliError::Config("config has no l_r".into()))
    }

    pub fn right_kets(&self, left: &LeftState) -> CliResult<Vec<Vec<C64>>> {
        let l_r = self.l_r()?;
        let (q, chi) = (left.q(), left.chi());
        let dim = q
            .checked_pow(l_r as u32)
            .ok_or_else(|| CliError::Config("q^l_r overflows".into()))?;
        let spec = self
            .right_state
            .as_ref()
            .ok_or_else(|| CliError::Config("config has no right_state".into()))?;
        Ok(match spec {
            RightSpec::Product { level } => product_right_kets(q, chi, l_r, *level)?,
            RightSpec::Kets { kets } => kets
                .iter()
                .map(|k| k.iter().map(|[re, im]| C64::new(*re, *im)).collect())
                .collect(),
            RightSpec::MpsTail => match left {
                LeftState::Mps(a) => mps_tail_right_kets(a, l_r)?,
                _ => {
                    return Err(CliError::Config(
                        "mps_tail right state needs a single-site MPS".into(),
                    ))
                }
            },
            RightSpec::Random => {
                let mut rng = Rng::new(self.seed).fork(RIGHT_STREAM);
                (0..chi)
                    .map(|_| (0..dim).map(|_| rng.complex_normal()).collect())
                    .collect()
            }
        })
    }

    /// `(column name, site, operator)` for each requested observable.
    pub fn observables(&self, q: usize) -> CliResult<Vec<(String, usize, CMatrix)>> {
        self.observables
            .iter()
            .map(|o| {
                let op = parse_operator(&o.op, q)?;
                Ok((format!("{}@{}", o.op, o.site), o.site, op))
            })
            .collect()
    }
}

fn validated_gate(g: TwoSiteGate) -> CliResult<TwoSiteGate> {
    // re-run the shape and unitarity checks on file input
    let seed = g.seed;
    let mut checked = TwoSiteGate::custom(g.q, g.matrix)?;
    checked.family = g.family;
    checked.params = g.params;
    Ok(checked.with_seed(seed))
}

/// Named operators: `proj:k`, `pauli:1|2|3` (q=2 only), `diag:v0,v1,…`.
pub fn parse_operator(name: &str, q: usize) -> CliResult<CMatrix> {
    let bad = || CliError::Config(format!("unknown observable {name:?}"));
    let (kind, arg) = name.split_once(':').ok_or_else(bad)?;
    match kind {
        "proj" => {
            let k: usize = arg.parse().map_err(|_| bad())?;
            if k >= q {
                return Err(CliError::Config(format!("proj:{k} out of range for q={q}")));
            }
            let mut d = vec![C64::new(0.0, 0.0); q];
            d[k] = C64::new(1.0, 0.0);
            Ok(CMatrix::diag(&d))
        }
        "pauli" => {
            if q != 2 {
                return Err(CliError::Config("Pauli observables need q=2".into()));
            }
            match arg {
                "1" | "2" | "3" => Ok(pauli(arg.parse().expect("digit"))),
                _ => Err(bad()),
            }
        }
        "diag" => {
            let vals: Vec<f64> = arg
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?;
            if vals.len() != q {
                return Err(CliError::Config(format!(
                    "diag observable needs {q} entries, got {}",
                    vals.len()
                )));
            }
            let d: Vec<C64> = vals.iter().map(|&v| C64::new(v, 0.0)).collect();
            Ok(CMatrix::diag(&d))
        }
        _ => Err(bad()),
    }
}

/// Capacity cap, overridable through `SOLVCIRC_CAP`.
pub fn capacity(default: usize) -> CliResult<usize> {
    match std::env::var("SOLVCIRC_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("SOLVCIRC_CAP={v:?} is not a positive integer"))),
        Err(_) => Ok(default),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operators() {
        assert_eq!(
            parse_operator("proj:1", 2).unwrap()[(1, 1)],
            C64::new(1.0, 0.0)
        );
        assert!(parse_operator("proj:4", 4).is_err());
        assert!(parse_operator("pauli:3", 4).is_err());
        assert_eq!(
            parse_operator("pauli:3", 2).unwrap()[(1, 1)],
            C64::new(-1.0, 0.0)
        );
        assert_eq!(
            parse_operator("diag:1,2,3", 3).unwrap()[(2, 2)],
            C64::new(3.0, 0.0)
        );
        assert!(parse_operator("diag:1,2", 3).is_err());
        assert!(parse_operator("spin", 2).is_err());
    }

    #[test]
    fn minimal_config_parses() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"version":"1","gate":{"family":"swap","q":2},"mps":{"family":"cluster"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.renyi.n_list, vec![2]);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"version":"1","bogus":1}"#).is_err());
    }
}
