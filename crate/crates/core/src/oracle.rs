//! Brute-force chain simulation used to certify the boundary-channel engine.
//!
//! A finite left region of `L_left` MPS sites is materialized next to the
//! right subsystem and the whole pure state is evolved with the full
//! brickwork circuit. The left region is never traced before the end, so
//! this path shares no code with the Kraus construction.
//!
//! Coordinates: `x = 0` is the first right-region site, left sites carry
//! `x = −L_left … −1`. Bond `(x, x+1)` belongs to the even sublayer when
//! `x` is even, so the boundary-crossing bond `(−1, 0)` is odd.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_capacity, Error, Result};
use crate::exec::Exec;
use crate::gates::TwoSiteGate;
use crate::mps::MpsTensor;
use crate::numerics::{apply_local, eigvalsh, renyi_trace, CMatrix, C64, ZERO};

/// Default bound on state-vector amplitudes.
pub const DEFAULT_CHAIN_CAP: usize = 1 << 20;

/// How the leftmost bond of the materialized region is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum Closure {
    /// Keep the bond as an explicit `χ`-dimensional leg.
    Purified,
    /// Project the bond onto basis vector `k`.
    FixedVector(usize),
}

/// Which sublayer holds bonds with even `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityAnchor {
    /// Bond `(x, x+1)` has parity `x mod 2`; the crossing bond is odd.
    #[default]
    CrossingOdd,
    /// Shifted anchoring, parity `(x+1) mod 2`. Kept for comparison only.
    CrossingEven,
}

impl ParityAnchor {
    fn parity(self, x: i64) -> usize {
        match self {
            ParityAnchor::CrossingOdd => x.rem_euclid(2) as usize,
            ParityAnchor::CrossingEven => (x + 1).rem_euclid(2) as usize,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainSpec {
    pub l_left: usize,
    pub l_r: usize,
    pub gate: TwoSiteGate,
    pub mps: MpsTensor,
    pub right_kets: Vec<Vec<C64>>,
    pub tmax: usize,
    pub closure: Closure,
    pub parity: ParityAnchor,
    pub cap: usize,
}

impl ChainSpec {
    /// Spec with the default closure (purified), parity and capacity.
    pub fn new(
        l_left: usize,
        l_r: usize,
        gate: TwoSiteGate,
        mps: MpsTensor,
        right_kets: Vec<Vec<C64>>,
        tmax: usize,
    ) -> Self {
        ChainSpec {
            l_left,
            l_r,
            gate,
            mps,
            right_kets,
            tmax,
            closure: Closure::Purified,
            parity: ParityAnchor::default(),
            cap: DEFAULT_CHAIN_CAP,
        }
    }

    pub fn q(&self) -> usize {
        self.gate.q
    }

    pub fn chi(&self) -> usize {
        self.mps.chi
    }

    fn leg_dim(&self) -> usize {
        match self.closure {
            Closure::Purified => self.chi(),
            Closure::FixedVector(_) => 1,
        }
    }

    /// Smallest `L_left` for which the left boundary cannot influence
    /// `ρ_R(t ≤ tmax)`.
    ///
    /// With the purified leg the left region is exactly the reduced state of
    /// a semi-infinite chain, so only sites that later gates touch must be
    /// present (`2·tmax − 1`). A fixed bond vector is a different state and
    /// needs the strict lightcone margin `2·tmax + 2`.
    pub fn required_l_left(&self) -> usize {
        match self.closure {
            Closure::Purified => (2 * self.tmax).saturating_sub(1),
            Closure::FixedVector(_) => 2 * self.tmax + 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (q, chi) = (self.q(), self.chi());
        if self.mps.q != q {
            return Err(Error::Argument(format!(
                "gate q={q} but MPS q={}",
                self.mps.q
            )));
        }
        if self.l_r < 1 {
            return Err(Error::Argument(
                "right region needs at least one site".into(),
            ));
        }
        if self.l_left < self.required_l_left() {
            return Err(Error::Argument(format!(
                "L_left={} is inside the lightcone; need at least {} for tmax={}",
                self.l_left,
                self.required_l_left(),
                self.tmax
            )));
        }
        if let Closure::FixedVector(k) = self.closure {
            if k >= chi {
                return Err(Error::Argument(format!(
                    "bond vector {k} out of range for χ={chi}"
                )));
            }
        }
        let needed = (self.leg_dim() as u128) * (q as u128).pow((self.l_left + self.l_r) as u32);
        ensure_capacity("chain state vector", needed, self.cap)?;
        let dim = q.pow(self.l_r as u32);
        if self.right_kets.len() != chi {
            return Err(Error::Argument(format!(
                "need χ={chi} right kets, got {}",
                self.right_kets.len()
            )));
        }
        if let Some(k) = self.right_kets.iter().find(|k| k.len() != dim) {
            return Err(Error::Argument(format!(
                "right ket has dimension {}, expected {dim}",
                k.len()
            )));
        }
        Ok(())
    }
}

/// Coefficients of an MPS block `(leg, a₁…a_N, j)`: row `l` of the product
/// `A^{a₁}⋯A^{a_N}` for every leg value `l` in `legs`, flattened row-major.
fn mps_block(a: &MpsTensor, legs: &[usize], n: usize) -> Vec<C64> {
    let (q, chi) = (a.q, a.chi);
    // rows of the running product, each a χ-vector
    let mut rows: Vec<Vec<C64>> = legs
        .iter()
        .map(|&l| {
            let mut v = vec![ZERO; chi];
            v[l] = C64::new(1.0, 0.0);
            v
        })
        .collect();
    for _ in 0..n {
        let mut next = Vec::with_capacity(rows.len() * q);
        for r in &rows {
            for m in &a.mats {
                let mut out = vec![ZERO; chi];
                for (k, rk) in r.iter().enumerate() {
                    if *rk == ZERO {
                        continue;
                    }
                    for (o, mk) in out.iter_mut().zip(m.row(k)) {
                        *o += rk * mk;
                    }
                }
                next.push(out);
            }
        }
        rows = next;
    }
    rows.concat()
}

/// `|Ψ_in⟩ = Σ_{l,j} |l⟩ ⊗ (A⋯A)_{lj} ⊗ |Ψ_R^j⟩`, normalized.
pub fn build_initial_chain(spec: &ChainSpec) -> Result<Vec<C64>> {
    spec.validate()?;
    let chi = spec.chi();
    let legs: Vec<usize> = match spec.closure {
        Closure::Purified => (0..chi).collect(),
        Closure::FixedVector(k) => vec![k],
    };
    let left = mps_block(&spec.mps, &legs, spec.l_left);
    let dim_r = spec.right_kets[0].len();
    let mut psi = Vec::with_capacity(left.len() / chi * dim_r);
    for coeffs in left.chunks(chi) {
        for s in 0..dim_r {
            let mut z = ZERO;
            for (j, c) in coeffs.iter().enumerate() {
                z += c * spec.right_kets[j][s];
            }
            psi.push(z);
        }
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Degenerate("initial chain state vanishes".into()));
    }
    psi.iter_mut().for_each(|z| *z /= norm);
    Ok(psi)
}

/// Apply one brickwork period to a chain whose sites have coordinates
/// `x₀, x₀+1, …` behind a leading leg of dimension `leg`.
#[allow(clippy::too_many_arguments)]
fn brickwork_period(
    psi: &mut [C64],
    leg: usize,
    q: usize,
    nsites: usize,
    x0: i64,
    gate: &CMatrix,
    parity: ParityAnchor,
    exec: Exec,
) {
    for layer in [0, 1] {
        for s in 0..nsites.saturating_sub(1) {
            if parity.parity(x0 + s as i64) != layer {
                continue;
            }
            let pre = leg * q.pow(s as u32);
            let post = psi.len() / (pre * q * q);
            apply_local(psi, pre, post, gate, exec);
        }
    }
}

/// `ρ = Tᵀ T*` for `T` the state reshaped to `(rest) × (kept)`.
fn reduce_right(psi: &[C64], kept: usize) -> CMatrix {
    let rest = psi.len() / kept;
    let t = CMatrix::from_fn(rest, kept, |r, c| psi[r * kept + c]);
    t.transpose().matmul(&t.conj())
}

/// `ρ_R(t)` for `t = 0..=tmax`.
pub fn evolve_chain(spec: &ChainSpec) -> Result<Vec<CMatrix>> {
    evolve_chain_with(spec, Exec::default())
}

pub fn evolve_chain_with(spec: &ChainSpec, exec: Exec) -> Result<Vec<CMatrix>> {
    let mut psi = build_initial_chain(spec)?;
    let q = spec.q();
    let kept = q.pow(spec.l_r as u32);
    let nsites = spec.l_left + spec.l_r;
    let mut out = vec![reduce_right(&psi, kept)];
    for _ in 0..spec.tmax {
        brickwork_period(
            &mut psi,
            spec.leg_dim(),
            q,
            nsites,
            -(spec.l_left as i64),
            &spec.gate.matrix,
            spec.parity,
            exec,
        );
        out.push(reduce_right(&psi, kept));
    }
    Ok(out)
}

/// `½‖r1 − r2‖₁`.
pub fn trace_distance(r1: &CMatrix, r2: &CMatrix) -> Result<f64> {
    if r1.shape() != r2.shape() || !r1.is_square() {
        return Err(Error::Shape(format!(
            "trace distance needs equal square matrices, got {:?} and {:?}",
            r1.shape(),
            r2.shape()
        )));
    }
    let diff = r1 - r2;
    Ok(0.5 * eigvalsh(&diff)?.iter().map(|x| x.abs()).sum::<f64>())
}

/// Translation-invariant chain of `N` sites with both boundary bonds kept as
/// legs: `(l, a₁…a_N, r)` with amplitudes `(A^{a₁}⋯A^{a_N})_{lr}/√χ`.
pub fn chain_state(a: &MpsTensor, n: usize, cap: usize) -> Result<Vec<C64>> {
    let needed = (a.chi as u128).pow(2) * (a.q as u128).pow(n as u32);
    ensure_capacity("chain state", needed, cap)?;
    let legs: Vec<usize> = (0..a.chi).collect();
    let s = 1.0 / (a.chi as f64).sqrt();
    Ok(mps_block(a, &legs, n).into_iter().map(|z| z * s).collect())
}

/// Sites per side used by [`renyi_trace_chain`] when no margin is given.
pub fn default_margin(t: usize) -> usize {
    2 * t + 2
}

/// `ρ_R(t)` for a finite chain of `2m` sites cut in the middle, the right
/// half together with the open right bond leg.
pub fn renyi_chain_density(
    gate: &TwoSiteGate,
    a: &MpsTensor,
    t: usize,
    margin: usize,
    cap: usize,
) -> Result<CMatrix> {
    if gate.q != a.q {
        return Err(Error::Argument(format!(
            "gate q={} but MPS q={}",
            gate.q, a.q
        )));
    }
    if margin < 2 * t + 2 {
        return Err(Error::Argument(format!(
            "margin {margin} is inside the lightcone; need at least {}",
            2 * t + 2
        )));
    }
    let mut psi = chain_state(a, 2 * margin, cap)?;
    let kept = a.q.pow(margin as u32) * a.chi;
    ensure_capacity("chain density matrix", (kept as u128).pow(2), cap)?;
    for _ in 0..t {
        brickwork_period(
            &mut psi,
            a.chi,
            a.q,
            2 * margin,
            -(margin as i64),
            &gate.matrix,
            ParityAnchor::CrossingOdd,
            Exec::default(),
        );
    }
    Ok(reduce_right(&psi, kept))
}

/// `Tr[ρ_R(t)ⁿ]` from the finite chain.
pub fn renyi_trace_chain(
    gate: &TwoSiteGate,
    a: &MpsTensor,
    n: usize,
    t: usize,
    margin: usize,
    cap: usize,
) -> Result<f64> {
    renyi_trace(&renyi_chain_density(gate, a, t, margin, cap)?, n)
}
