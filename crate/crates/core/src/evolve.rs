//! Hidden-Markov evolution of ancilla ⊗ right subsystem.
//!
//! One Floquet period applies the brickwork unitary restricted to the
//! subsystem (even bonds, then odd bonds, open right edge) followed by the
//! boundary channel on ancilla ⊗ site 0:
//! `ρ̃(t+1) = M[𝕌_R ρ̃(t) 𝕌_R†]`.

use serde::{Deserialize, Serialize};

use crate::channel::{
    apply_superoperator, kraus_from_lpdo, kraus_from_mps, kraus_from_two_site, BoundaryChannel,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gates::TwoSiteGate;
use crate::mps::{Lpdo, MpsTensor, TwoSiteMps};
use crate::numerics::{
    apply_local, eigvalsh, kron_all, partial_trace, von_neumann_entropy, CMatrix, C64,
};
use crate::solvable::solvable_left_kets;

/// Solvable residual above which a configuration is rejected.
pub const SOLVABLE_GATE_TOL: f64 = 1e-8;

/// Initial state of the left region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeftState {
    Mps(MpsTensor),
    TwoSite(TwoSiteMps),
    Lpdo(Lpdo),
}

impl LeftState {
    pub fn q(&self) -> usize {
        match self {
            LeftState::Mps(a) => a.q,
            LeftState::TwoSite(t) => t.q,
            LeftState::Lpdo(l) => l.q,
        }
    }

    /// Ancilla dimension (the bond between sites −1 and 0).
    pub fn chi(&self) -> usize {
        match self {
            LeftState::Mps(a) => a.chi,
            LeftState::TwoSite(t) => t.chi,
            LeftState::Lpdo(l) => l.chi,
        }
    }

    pub fn channel(&self) -> Result<BoundaryChannel> {
        match self {
            LeftState::Mps(a) => kraus_from_mps(a),
            LeftState::TwoSite(t) => kraus_from_two_site(t),
            LeftState::Lpdo(l) => kraus_from_lpdo(l),
        }
    }

    fn kets(&self) -> Vec<Vec<C64>> {
        match self {
            LeftState::Mps(a) => a.kets(),
            LeftState::TwoSite(t) => t.kets(),
            LeftState::Lpdo(l) => l.kets(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    pub gate: TwoSiteGate,
    pub left: LeftState,
    /// `|Ψ_R^j⟩` for `j < χ`, each of dimension `q^{L_R}`.
    pub right_kets: Vec<Vec<C64>>,
    pub tmax: usize,
    pub l_r: usize,
}

impl EvolutionConfig {
    /// Validate dimensions and the solvable condition; an unsound Markov
    /// embedding is never accepted.
    pub fn new(
        gate: TwoSiteGate,
        left: LeftState,
        right_kets: Vec<Vec<C64>>,
        tmax: usize,
        l_r: usize,
    ) -> Result<Self> {
        let q = gate.q;
        if left.q() != q {
            return Err(Error::Argument(format!(
                "gate q={q} but left state q={}",
                left.q()
            )));
        }
        if l_r < 2 {
            return Err(Error::Argument(format!(
                "L_R must be at least 2, got {l_r}"
            )));
        }
        let dim = q
            .checked_pow(l_r as u32)
            .ok_or_else(|| Error::Dimension("q^L_R overflows".into()))?;
        if right_kets.len() != left.chi() {
            return Err(Error::Argument(format!(
                "need χ={} right kets, got {}",
                left.chi(),
                right_kets.len()
            )));
        }
        if let Some(k) = right_kets.iter().find(|k| k.len() != dim) {
            return Err(Error::Argument(format!(
                "right ket has dimension {}, expected q^L_R = {dim}",
                k.len()
            )));
        }
        let r = solvable_left_kets(&gate.matrix, q, &left.kets(), Exec::default())?.max;
        if r > SOLVABLE_GATE_TOL {
            return Err(Error::Precondition {
                what: "gate and left state violate the solvable condition".into(),
                residual: r,
            });
        }
        Ok(EvolutionConfig {
            gate,
            left,
            right_kets,
            tmax,
            l_r,
        })
    }

    pub fn q(&self) -> usize {
        self.gate.q
    }

    pub fn chi(&self) -> usize {
        self.left.chi()
    }
}

/// `|level⟩^{⊗L_R}` for every bond index `j`.
pub fn product_right_kets(q: usize, chi: usize, l_r: usize, level: usize) -> Result<Vec<Vec<C64>>> {
    if level >= q {
        return Err(Error::Argument(format!(
            "level {level} out of range for q={q}"
        )));
    }
    let dim = q.pow(l_r as u32);
    let idx: usize = (0..l_r).fold(0, |acc, _| acc * q + level);
    let mut k = vec![C64::new(0.0, 0.0); dim];
    k[idx] = C64::new(1.0, 0.0);
    Ok(vec![k; chi])
}

/// Right kets continuing a homogeneous MPS: `L_R − 1` physical sites followed
/// by one site that carries the open right bond (needs `χ = q`):
/// `|Ψ_R^j⟩ = Σ (A^{a₀}⋯A^{a_{L_R−2}})_{j r} |a₀…a_{L_R−2}, r⟩`.
pub fn mps_tail_right_kets(a: &MpsTensor, l_r: usize) -> Result<Vec<Vec<C64>>> {
    if a.chi != a.q {
        return Err(Error::Argument(format!(
            "an MPS tail needs χ = q to store the bond on a site, got χ={} q={}",
            a.chi, a.q
        )));
    }
    if l_r < 2 {
        return Err(Error::Argument("MPS tail needs L_R ≥ 2".into()));
    }
    let (q, chi) = (a.q, a.chi);
    // M[j, (a₀…), r] built site by site.
    let mut m: Vec<CMatrix> = (0..chi)
        .map(|j| {
            CMatrix::from_fn(1, chi, |_, r| {
                if r == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    for _ in 0..l_r - 1 {
        m = m
            .iter()
            .map(|rows| {
                let mut out = CMatrix::zeros(rows.rows() * q, chi);
                for s in 0..rows.rows() {
                    let v = CMatrix::from_vec(1, chi, rows.row(s).to_vec()).expect("row");
                    for (x, ax) in a.mats.iter().enumerate() {
                        let p = v.matmul(ax);
                        for r in 0..chi {
                            out[(s * q + x, r)] = p[(0, r)];
                        }
                    }
                }
                out
            })
            .collect();
    }
    Ok(m.into_iter().map(|x| x.into_data()).collect())
}

/// Density matrix on ancilla ⊗ `L_R` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub chi: usize,
    pub q: usize,
    pub l_r: usize,
    pub rho: CMatrix,
    pub t: usize,
}

/// `|Ψ̃⟩ = Σ_j |j) ⊗ |Ψ_R^j⟩`, normalized.
pub fn initial_joint_state(cfg: &EvolutionConfig) -> Result<JointState> {
    let psi: Vec<C64> = cfg.right_kets.concat();
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Argument("all right kets vanish".into()));
    }
    let psi: Vec<C64> = psi.iter().map(|z| z / norm).collect();
    Ok(JointState {
        chi: cfg.chi(),
        q: cfg.q(),
        l_r: cfg.l_r,
        rho: CMatrix::outer(&psi, &psi),
        t: 0,
    })
}

/// Bonds `(x, x+1)` inside the subsystem for the given parity.
fn layer_bonds(l_r: usize, parity: usize) -> impl Iterator<Item = usize> {
    (0..l_r.saturating_sub(1)).filter(move |x| x % 2 == parity)
}

/// `𝕌_R = 𝕌_odd 𝕌_even` on `q^{L_R}`, open right boundary.
pub fn brickwork_unitary(gate: &TwoSiteGate, l_r: usize) -> Result<CMatrix> {
    if l_r < 2 {
        return Err(Error::Argument(format!(
            "L_R must be at least 2, got {l_r}"
        )));
    }
    let q = gate.q;
    let dim = q.pow(l_r as u32);
    let mut total = CMatrix::identity(dim);
    for parity in [0, 1] {
        for x in layer_bonds(l_r, parity) {
            let g = kron_all(&[
                CMatrix::identity(q.pow(x as u32)),
                gate.matrix.clone(),
                CMatrix::identity(q.pow((l_r - x - 2) as u32)),
            ])?;
            total = g.matmul(&total);
        }
    }
    Ok(total)
}

/// Precomputed pieces of one Floquet period.
#[derive(Debug, Clone)]
pub struct Engine {
    cfg: EvolutionConfig,
    gate_conj: CMatrix,
    superop: CMatrix,
    local_dim: usize,
    exec: Exec,
}

impl Engine {
    pub fn new(cfg: EvolutionConfig) -> Result<Self> {
        Self::with_exec(cfg, Exec::default())
    }

    pub fn with_exec(cfg: EvolutionConfig, exec: Exec) -> Result<Self> {
        let ch = cfg.left.channel()?;
        Ok(Engine {
            gate_conj: cfg.gate.matrix.conj(),
            superop: ch.superoperator(),
            local_dim: ch.local_dim(),
            cfg,
            exec,
        })
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.cfg
    }

    pub fn initial(&self) -> Result<JointState> {
        initial_joint_state(&self.cfg)
    }

    /// Conjugate `ρ` by the gate on sites `(x, x+1)`.
    fn apply_gate(&self, rho: &mut CMatrix, x: usize) {
        let q = self.cfg.q();
        let n = rho.rows();
        // factor layout: ancilla, site 0, …, site L_R−1
        let pre = self.cfg.chi() * q.pow(x as u32);
        let post = q.pow((self.cfg.l_r - x - 2) as u32);
        apply_local(
            rho.data_mut(),
            pre,
            post * n,
            &self.cfg.gate.matrix,
            self.exec,
        );
        apply_local(rho.data_mut(), n * pre, post, &self.gate_conj, self.exec);
    }

    /// One period. Fails with a drift error if trace or Hermiticity moved by
    /// more than `1e-8`.
    pub fn step(&self, s: &JointState) -> Result<JointState> {
        let mut rho = s.rho.clone();
        for parity in [0, 1] {
            for x in layer_bonds(self.cfg.l_r, parity) {
                self.apply_gate(&mut rho, x);
            }
        }
        let rho = apply_superoperator(&self.superop, self.local_dim, &rho, self.exec)?;
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::Drift(format!("trace {tr} after step {}", s.t + 1)));
        }
        let h = rho.hermiticity_residual();
        if h > 1e-8 {
            return Err(Error::Drift(format!(
                "Hermiticity residual {h:e} after step {}",
                s.t + 1
            )));
        }
        Ok(JointState {
            rho,
            t: s.t + 1,
            ..*s
        })
    }

    /// States for `t = 0..=tmax`.
    pub fn run(&self) -> Result<Vec<JointState>> {
        let mut out = vec![self.initial()?];
        for _ in 0..self.cfg.tmax {
            let next = self.step(out.last().expect("non-empty"))?;
            out.push(next);
        }
        Ok(out)
    }
}

/// `ρ_R = Tr_ancilla ρ̃`.
pub fn subsystem_density(s: &JointState) -> CMatrix {
    let d = s.rho.rows() / s.chi;
    partial_trace(&s.rho, &[s.chi, d], &[1]).expect("joint state dimensions are consistent")
}

/// Von Neumann entropy of `ρ_R` in nats.
pub fn entanglement_entropy(s: &JointState) -> Result<f64> {
    von_neumann_entropy(&subsystem_density(s))
}

/// `Tr[ρ_R (I⊗…⊗op⊗…⊗I)]`.
pub fn local_expectation(s: &JointState, site: usize, op: &CMatrix) -> Result<f64> {
    if site >= s.l_r {
        return Err(Error::Argument(format!(
            "site {site} outside the {}-site subsystem",
            s.l_r
        )));
    }
    if op.shape() != (s.q, s.q) {
        return Err(Error::Shape(format!("observable must be {0}x{0}", s.q)));
    }
    let dims: Vec<usize> = std::iter::once(s.chi)
        .chain(std::iter::repeat_n(s.q, s.l_r))
        .collect();
    let local = partial_trace(&s.rho, &dims, &[site + 1])?;
    let v = local.matmul(op).trace();
    if v.im.abs() > 1e-10 {
        return Err(Error::Argument(format!(
            "expectation has imaginary part {:e}; observable is not Hermitian",
            v.im
        )));
    }
    Ok(v.re)
}

/// Per-step diagnostics for the results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: usize,
    pub s_ent: f64,
    pub trace_residual: f64,
    pub min_eig: f64,
    pub observables: Vec<f64>,
}

pub fn record(s: &JointState, observables: &[(usize, CMatrix)]) -> Result<StepRecord> {
    let rho_r = subsystem_density(s);
    let min_eig = eigvalsh(&rho_r)?.first().copied().unwrap_or(0.0);
    if min_eig < -1e-8 {
        return Err(Error::Drift(format!(
            "subsystem eigenvalue {min_eig:e} at t={}",
            s.t
        )));
    }
    let observables = observables
        .iter()
        .map(|(site, op)| local_expectation(s, *site, op))
        .collect::<Result<_>>()?;
    Ok(StepRecord {
        t: s.t,
        s_ent: von_neumann_entropy(&rho_r)?,
        trace_residual: (s.rho.trace() - C64::new(1.0, 0.0)).norm(),
        min_eig,
        observables,
    })
}
