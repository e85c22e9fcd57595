//! Two-site gates: the Cartan form, the solvable families and chirality maps.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    expm_hermitian_generator, haar_unitary, kron, pauli, reshuffle, CMatrix, Rng, C64, ONE, ZERO,
};

/// Tolerance for accepting user-supplied unitary blocks.
const INPUT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateFamily {
    Cartan,
    Q2Qt1,
    Q2Qt2,
    GeneralQQt,
    BothChiralityQ2,
    BothChiralityQ4plus,
    Custom,
}

/// Parameters a gate was built from. Stored for provenance only: the matrix
/// is always materialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateParams {
    Cartan {
        j1: f64,
        j2: f64,
        j3: f64,
    },
    Q2Qt1 {
        phi: f64,
        eps: f64,
        eta: f64,
        j: f64,
        u: CMatrix,
        v: CMatrix,
    },
    Q2Qt2 {
        phi: f64,
        u: CMatrix,
    },
    General {
        qt: usize,
        phi: f64,
        v: CMatrix,
        g: Vec<CMatrix>,
        f2: Vec<CMatrix>,
    },
    BothChiralityQ2 {
        phi: f64,
        eps: f64,
        epsp: f64,
        eta: f64,
        etap: f64,
        j3: f64,
    },
    BothChiralityQ4plus {
        phi: f64,
        uplus: CMatrix,
        uminus: CMatrix,
        vplus: CMatrix,
        vminus: CMatrix,
        h: CMatrix,
    },
    Haar,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSiteGate {
    pub q: usize,
    pub family: GateFamily,
    pub params: GateParams,
    pub seed: Option<u64>,
    pub matrix: CMatrix,
}

impl TwoSiteGate {
    /// Wrap an arbitrary `q²×q²` unitary.
    pub fn custom(q: usize, matrix: CMatrix) -> Result<Self> {
        Self::build(q, GateFamily::Custom, GateParams::Explicit, None, matrix)
    }

    fn build(
        q: usize,
        family: GateFamily,
        params: GateParams,
        seed: Option<u64>,
        matrix: CMatrix,
    ) -> Result<Self> {
        if q == 0 || matrix.shape() != (q * q, q * q) {
            return Err(Error::Shape(format!(
                "two-site gate with q={q} must be {0}x{0}, got {1:?}",
                q * q,
                matrix.shape()
            )));
        }
        let res = matrix.unitarity_residual();
        if res > INPUT_TOL {
            return Err(Error::Argument(format!(
                "gate is not unitary (residual {res:e})"
            )));
        }
        Ok(TwoSiteGate {
            q,
            family,
            params,
            seed,
            matrix,
        })
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }
}

/// SWAP on `q⊗q`: `S|c,d⟩ = |d,c⟩`.
pub fn swap_matrix(q: usize) -> CMatrix {
    CMatrix::from_fn(q * q, q * q, |r, c| {
        if r == (c % q) * q + c / q {
            ONE
        } else {
            ZERO
        }
    })
}

pub fn swap_gate(q: usize) -> TwoSiteGate {
    TwoSiteGate::custom(q, swap_matrix(q)).expect("SWAP is unitary")
}

/// `e^{−iεσ³}`.
fn rz(eps: f64) -> CMatrix {
    CMatrix::diag(&[C64::from_polar(1.0, -eps), C64::from_polar(1.0, eps)])
}

fn phase(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

fn require_unitary(name: &str, m: &CMatrix, dim: usize) -> Result<()> {
    if m.shape() != (dim, dim) {
        return Err(Error::Argument(format!(
            "{name} must be {dim}x{dim}, got {:?}",
            m.shape()
        )));
    }
    let r = m.unitarity_residual();
    if r > INPUT_TOL {
        return Err(Error::Argument(format!(
            "{name} is not unitary (residual {r:e})"
        )));
    }
    Ok(())
}

/// `V[J₁,J₂,J₃] = exp[−i(J₁σ¹⊗σ¹ + J₂σ²⊗σ² + J₃σ³⊗σ³)]`.
pub fn cartan_matrix(j1: f64, j2: f64, j3: f64) -> CMatrix {
    let mut h = CMatrix::zeros(4, 4);
    for (alpha, j) in [(1, j1), (2, j2), (3, j3)] {
        let term = kron(&pauli(alpha), &pauli(alpha))
            .expect("4x4")
            .scale_real(j);
        h = &h + &term;
    }
    expm_hermitian_generator(&h).expect("Pauli generator is Hermitian")
}

pub fn cartan_gate(j1: f64, j2: f64, j3: f64) -> TwoSiteGate {
    TwoSiteGate::build(
        2,
        GateFamily::Cartan,
        GateParams::Cartan { j1, j2, j3 },
        None,
        cartan_matrix(j1, j2, j3),
    )
    .expect("Cartan gates are unitary")
}

/// Coefficients of `V[J₁,J₂,J₃] = Σ_α V_α σ^α⊗σ^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliCoefficients {
    pub v: [C64; 4],
}

impl PauliCoefficients {
    pub fn norm_sqr(&self) -> f64 {
        self.v.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Rebuild the gate from the expansion.
    pub fn to_matrix(&self) -> CMatrix {
        (0..4).fold(CMatrix::zeros(4, 4), |acc, a| {
            let t = kron(&pauli(a), &pauli(a)).expect("4x4").scale(self.v[a]);
            &acc + &t
        })
    }
}

pub fn pauli_coefficients(j1: f64, j2: f64, j3: f64) -> PauliCoefficients {
    let (s1, c1) = j1.sin_cos();
    let (s2, c2) = j2.sin_cos();
    let (s3, c3) = j3.sin_cos();
    PauliCoefficients {
        v: [
            C64::new(c1 * c2 * c3, -s1 * s2 * s3),
            C64::new(c1 * s2 * s3, -s1 * c2 * c3),
            C64::new(s1 * c2 * s3, -c1 * s2 * c3),
            C64::new(s1 * s2 * c3, -c1 * c2 * s3),
        ],
    }
}

/// The q=2, q̃=1 family:
/// `U = e^{iφ}(u⊗e^{−iεσ³}) V[π/4,π/4,J] (e^{−iησ³}⊗v)`.
pub fn gate_q2_qt1(
    phi: f64,
    eps: f64,
    eta: f64,
    j: f64,
    u: &CMatrix,
    v: &CMatrix,
) -> Result<TwoSiteGate> {
    require_unitary("u", u, 2)?;
    require_unitary("v", v, 2)?;
    let left = kron(u, &rz(eps))?;
    let right = kron(&rz(eta), v)?;
    let m = left
        .matmul(&cartan_matrix(FRAC_PI_4, FRAC_PI_4, j))
        .matmul(&right)
        .scale(phase(phi));
    TwoSiteGate::build(
        2,
        GateFamily::Q2Qt1,
        GateParams::Q2Qt1 {
            phi,
            eps,
            eta,
            j,
            u: u.clone(),
            v: v.clone(),
        },
        None,
        m,
    )
}

/// The q=2, q̃=2 family: `e^{iφ}(u⊗I)·SWAP`.
pub fn gate_q2_qt2(phi: f64, u: &CMatrix) -> Result<TwoSiteGate> {
    require_unitary("u", u, 2)?;
    let m = kron(u, &CMatrix::identity(2))?
        .matmul(&swap_matrix(2))
        .scale(phase(phi));
    TwoSiteGate::build(
        2,
        GateFamily::Q2Qt2,
        GateParams::Q2Qt2 { phi, u: u.clone() },
        None,
        m,
    )
}

/// One-site controlled gate `Σ_a f[a] ⊗ |a⟩⟨a|` (target left, control right).
fn controlled(f: &[CMatrix], q: usize) -> CMatrix {
    let mut w = CMatrix::zeros(q * q, q * q);
    for (a, fa) in f.iter().enumerate() {
        for t in 0..q {
            for s in 0..q {
                w[(t * q + a, s * q + a)] = fa[(t, s)];
            }
        }
    }
    w
}

/// `I_{qt} ⊕ g`.
fn pad_identity(g: &CMatrix, q: usize, qt: usize) -> CMatrix {
    let mut m = CMatrix::identity(q);
    for i in 0..q - qt {
        for j in 0..q - qt {
            m[(qt + i, qt + j)] = g[(i, j)];
        }
    }
    m
}

/// General family `U = e^{iφ} W₂ S W₁ (I⊗v)` with one-site controlled gates
/// `W_k = Σ_a f_k⁽ᵃ⁾⊗|a⟩⟨a|` and `f₁⁽ᵃ⁾ = I_{q̃} ⊕ g⁽ᵃ⁾`.
///
/// The solvable condition holds exactly only when the `f₂⁽ᵃ⁾` agree for all
/// control values `a < q̃`: a control level inside the MPS ket span is routed
/// to the far site by the SWAP, and any dependence of the dressing on it
/// leaks information back across the boundary. Disagreeing blocks are
/// rejected.
pub fn gate_general(
    q: usize,
    qt: usize,
    phi: f64,
    v: &CMatrix,
    g: &[CMatrix],
    f2: &[CMatrix],
) -> Result<TwoSiteGate> {
    if qt == 0 || qt > q {
        return Err(Error::Argument(format!(
            "need 1 ≤ q̃ ≤ q, got q̃={qt}, q={q}"
        )));
    }
    require_unitary("v", v, q)?;
    if f2.len() != q {
        return Err(Error::Argument(format!(
            "expected {q} f2 blocks, got {}",
            f2.len()
        )));
    }
    let g_owned: Vec<CMatrix>;
    let g = if g.is_empty() && qt == q {
        g_owned = vec![CMatrix::zeros(0, 0); q];
        &g_owned[..]
    } else {
        g
    };
    if g.len() != q {
        return Err(Error::Argument(format!(
            "expected {q} g blocks, got {}",
            g.len()
        )));
    }
    for (a, ga) in g.iter().enumerate() {
        if q > qt {
            require_unitary(&format!("g[{a}]"), ga, q - qt)?;
        } else if ga.rows() != 0 || ga.cols() != 0 {
            return Err(Error::Argument(format!("g[{a}] must be empty when q̃ = q")));
        }
    }
    for (a, fa) in f2.iter().enumerate() {
        require_unitary(&format!("f2[{a}]"), fa, q)?;
    }
    for a in 1..qt {
        let d = f2[a].max_abs_diff(&f2[0]);
        if d > INPUT_TOL {
            return Err(Error::Argument(format!(
                "f2[{a}] differs from f2[0] by {d:e}; the blocks for control values below q̃ must coincide"
            )));
        }
    }
    let f1: Vec<CMatrix> = g.iter().map(|ga| pad_identity(ga, q, qt)).collect();
    let w1 = controlled(&f1, q);
    let w2 = controlled(f2, q);
    let m = w2
        .matmul(&swap_matrix(q))
        .matmul(&w1)
        .matmul(&kron(&CMatrix::identity(q), v)?)
        .scale(phase(phi));
    TwoSiteGate::build(
        q,
        GateFamily::GeneralQQt,
        GateParams::General {
            qt,
            phi,
            v: v.clone(),
            g: g.to_vec(),
            f2: f2.to_vec(),
        },
        None,
        m,
    )
}

/// q=2 gates solvable from both sides with q̃=1 data:
/// `e^{iφ}(e^{−iε′σ³}⊗e^{−iεσ³}) V[π/4,π/4,J₃] (e^{−iησ³}⊗e^{−iη′σ³})`.
pub fn gate_both_chirality_q2(
    phi: f64,
    eps: f64,
    epsp: f64,
    eta: f64,
    etap: f64,
    j3: f64,
) -> TwoSiteGate {
    let left = kron(&rz(epsp), &rz(eps)).expect("4x4");
    let right = kron(&rz(eta), &rz(etap)).expect("4x4");
    let m = left
        .matmul(&cartan_matrix(FRAC_PI_4, FRAC_PI_4, j3))
        .matmul(&right)
        .scale(phase(phi));
    TwoSiteGate::build(
        2,
        GateFamily::BothChiralityQ2,
        GateParams::BothChiralityQ2 {
            phi,
            eps,
            epsp,
            eta,
            etap,
            j3,
        },
        None,
        m,
    )
    .expect("product of unitaries")
}

fn require_block(name: &str, m: &CMatrix, q: usize) -> Result<()> {
    require_unitary(name, m, q)?;
    for r in 0..q {
        for c in 0..q {
            if r < 2 || c < 2 {
                let expect = if r == c { ONE } else { ZERO };
                if (m[(r, c)] - expect).norm() > INPUT_TOL {
                    return Err(Error::Argument(format!(
                        "{name} must have the block form I₂ ⊕ w"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Two-site phase gate `exp(−iH)` with `H` read as a function of the two
/// site levels: `|a,b⟩ ↦ e^{−iH_{ab}}|a,b⟩`.
fn diagonal_phase_gate(h: &CMatrix, q: usize) -> CMatrix {
    let d: Vec<C64> = (0..q * q)
        .map(|k| C64::from_polar(1.0, -h[(k / q, k % q)].re))
        .collect();
    CMatrix::diag(&d)
}

/// Both-chirality family for q ≥ 4 with q̃ = 2:
/// `e^{iφ}(u₊⊗u₋) S exp(−iH) (v₋⊗v₊)`.
///
/// Blocks have the form `I₂ ⊕ w`. `H` is real symmetric with vanishing rows
/// and columns 0 and 1, and `exp(−iH)` is the diagonal two-site phase gate
/// with phases `H_{ab}` on `|a,b⟩`; this embedding is the one verified to
/// satisfy both chirality conditions.
pub fn gate_both_chirality_q4plus(
    q: usize,
    phi: f64,
    uplus: &CMatrix,
    uminus: &CMatrix,
    vplus: &CMatrix,
    vminus: &CMatrix,
    h: &CMatrix,
) -> Result<TwoSiteGate> {
    if q < 4 {
        return Err(Error::Argument(format!("this family needs q ≥ 4, got {q}")));
    }
    for (name, m) in [
        ("uplus", uplus),
        ("uminus", uminus),
        ("vplus", vplus),
        ("vminus", vminus),
    ] {
        require_block(name, m, q)?;
    }
    if h.shape() != (q, q) {
        return Err(Error::Argument(format!("H must be {q}x{q}")));
    }
    for r in 0..q {
        for c in 0..q {
            let z = h[(r, c)];
            if z.im.abs() > INPUT_TOL {
                return Err(Error::Argument("H must be real".into()));
            }
            if (z - h[(c, r)]).norm() > INPUT_TOL {
                return Err(Error::Argument("H must be symmetric".into()));
            }
            if (r < 2 || c < 2) && z.norm() > INPUT_TOL {
                return Err(Error::Argument(
                    "H must vanish on rows and columns 0 and 1".into(),
                ));
            }
        }
    }
    let m = kron(uplus, uminus)?
        .matmul(&swap_matrix(q))
        .matmul(&diagonal_phase_gate(h, q))
        .matmul(&kron(vminus, vplus)?)
        .scale(phase(phi));
    TwoSiteGate::build(
        q,
        GateFamily::BothChiralityQ4plus,
        GateParams::BothChiralityQ4plus {
            phi,
            uplus: uplus.clone(),
            uminus: uminus.clone(),
            vplus: vplus.clone(),
            vminus: vminus.clone(),
            h: h.clone(),
        },
        None,
        m,
    )
}

/// `S U S`: exchanges the roles of the two sites, mapping left-solvable gates
/// to right-solvable ones.
pub fn swap_conjugate(u: &TwoSiteGate) -> TwoSiteGate {
    let s = swap_matrix(u.q);
    TwoSiteGate {
        q: u.q,
        family: GateFamily::Custom,
        params: GateParams::Explicit,
        seed: u.seed,
        matrix: s.matmul(&u.matrix).matmul(&s),
    }
}

/// `‖(U^R)†U^R − I‖_max`.
pub fn is_dual_unitary(u: &TwoSiteGate) -> f64 {
    reshuffle(&u.matrix, u.q)
        .expect("gate shape is checked on construction")
        .unitarity_residual()
}

pub fn haar_gate(q: usize, rng: &mut Rng) -> TwoSiteGate {
    let m = haar_unitary(q * q, rng);
    TwoSiteGate::build(q, GateFamily::Custom, GateParams::Haar, Some(rng.seed()), m)
        .expect("Haar output is unitary")
}

fn angle(rng: &mut Rng) -> f64 {
    rng.uniform(0.0, 2.0 * PI)
}

/// Random members of each family. Angles are uniform on `[0, 2π)` (the Cartan
/// `J` on `[0, π/2)`), blocks are Haar.
pub mod sample {
    use super::*;

    pub fn q2_qt1(rng: &mut Rng) -> TwoSiteGate {
        let u = haar_unitary(2, rng);
        let v = haar_unitary(2, rng);
        let (phi, eps, eta) = (angle(rng), angle(rng), angle(rng));
        let j = rng.uniform(0.0, PI / 2.0);
        gate_q2_qt1(phi, eps, eta, j, &u, &v)
            .expect("Haar blocks are unitary")
            .with_seed(Some(rng.seed()))
    }

    pub fn q2_qt2(rng: &mut Rng) -> TwoSiteGate {
        let u = haar_unitary(2, rng);
        let phi = angle(rng);
        gate_q2_qt2(phi, &u)
            .expect("Haar blocks are unitary")
            .with_seed(Some(rng.seed()))
    }

    /// One shared `f₂` block for control values below q̃, independent blocks
    /// above.
    pub fn general(q: usize, qt: usize, rng: &mut Rng) -> Result<TwoSiteGate> {
        let v = haar_unitary(q, rng);
        let g: Vec<CMatrix> = (0..q).map(|_| haar_unitary(q - qt, rng)).collect();
        let shared = haar_unitary(q, rng);
        let f2: Vec<CMatrix> = (0..q)
            .map(|a| {
                if a < qt {
                    shared.clone()
                } else {
                    haar_unitary(q, rng)
                }
            })
            .collect();
        let phi = angle(rng);
        Ok(gate_general(q, qt, phi, &v, &g, &f2)?.with_seed(Some(rng.seed())))
    }

    pub fn both_chirality_q2(rng: &mut Rng) -> TwoSiteGate {
        let p: Vec<f64> = (0..5).map(|_| angle(rng)).collect();
        let j3 = rng.uniform(0.0, PI / 2.0);
        gate_both_chirality_q2(p[0], p[1], p[2], p[3], p[4], j3).with_seed(Some(rng.seed()))
    }

    pub fn both_chirality_q4plus(q: usize, rng: &mut Rng) -> Result<TwoSiteGate> {
        let mut block = || pad_identity(&haar_unitary(q - 2, rng), q, 2);
        let (up, um, vp, vm) = (block(), block(), block(), block());
        let mut h = CMatrix::zeros(q, q);
        for r in 2..q {
            for c in r..q {
                let x = rng.normal();
                h[(r, c)] = C64::new(x, 0.0);
                h[(c, r)] = C64::new(x, 0.0);
            }
        }
        let phi = angle(rng);
        Ok(gate_both_chirality_q4plus(q, phi, &up, &um, &vp, &vm, &h)?.with_seed(Some(rng.seed())))
    }
}
