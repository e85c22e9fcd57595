//! Initial-state tensors for the left region.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{rank, CMatrix, C64, ZERO};

/// Relative singular-value cutoff used for q̃.
pub const RANK_TOL: f64 = 1e-10;

/// Single-site MPS tensor `{A⁽ᵃ⁾}`, each `χ×χ` with (left, right) bond order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpsTensor {
    pub q: usize,
    pub chi: usize,
    pub mats: Vec<CMatrix>,
}

fn check_mats(mats: &[CMatrix], count: usize, rows: usize, cols: usize, what: &str) -> Result<()> {
    if mats.len() != count {
        return Err(Error::Shape(format!(
            "{what}: expected {count} matrices, got {}",
            mats.len()
        )));
    }
    if let Some(m) = mats.iter().find(|m| m.shape() != (rows, cols)) {
        return Err(Error::Shape(format!(
            "{what}: expected {rows}x{cols} matrices, found {:?}",
            m.shape()
        )));
    }
    Ok(())
}

fn sum_adjoint_products(mats: &[CMatrix], left: bool) -> CMatrix {
    let n = if left { mats[0].cols() } else { mats[0].rows() };
    mats.iter().fold(CMatrix::zeros(n, n), |acc, a| {
        let p = if left {
            a.adjoint().matmul(a)
        } else {
            a.matmul(&a.adjoint())
        };
        &acc + &p
    })
}

impl MpsTensor {
    pub fn new(q: usize, chi: usize, mats: Vec<CMatrix>) -> Result<Self> {
        if q == 0 || chi == 0 {
            return Err(Error::Argument("q and χ must be positive".into()));
        }
        check_mats(&mats, q, chi, chi, "MPS tensor")?;
        Ok(MpsTensor { q, chi, mats })
    }

    /// The vectors `|A_{jk}⟩ = Σ_a A⁽ᵃ⁾_{jk}|a⟩`, ordered by `(j, k)`.
    pub fn kets(&self) -> Vec<Vec<C64>> {
        let mut out = Vec::with_capacity(self.chi * self.chi);
        for j in 0..self.chi {
            for k in 0..self.chi {
                out.push(self.mats.iter().map(|m| m[(j, k)]).collect());
            }
        }
        out
    }

    /// Rotate the physical leg: `A'⁽ᵃ⁾ = Σ_b w_{ab} A⁽ᵇ⁾`.
    pub fn rotate_physical(&self, w: &CMatrix) -> Result<Self> {
        if w.shape() != (self.q, self.q) {
            return Err(Error::Shape("rotation must be q×q".into()));
        }
        let mats = (0..self.q)
            .map(|a| {
                (0..self.q).fold(CMatrix::zeros(self.chi, self.chi), |acc, b| {
                    &acc + &self.mats[b].scale(w[(a, b)])
                })
            })
            .collect();
        MpsTensor::new(self.q, self.chi, mats)
    }

    pub fn scaled(&self, s: f64) -> Self {
        MpsTensor {
            q: self.q,
            chi: self.chi,
            mats: self.mats.iter().map(|m| m.scale_real(s)).collect(),
        }
    }

    /// Rank of the two-site blocking map `(a,b) ↦ A⁽ᵃ⁾A⁽ᵇ⁾`; equal to χ² for
    /// an injective tensor at blocking length two. Diagnostic only.
    pub fn two_site_blocking_rank(&self) -> usize {
        let chi2 = self.chi * self.chi;
        let m = CMatrix::from_fn(self.q * self.q, chi2, |r, c| {
            let p = self.mats[r / self.q].matmul(&self.mats[r % self.q]);
            p[(c / self.chi, c % self.chi)]
        });
        rank(&m, RANK_TOL)
    }
}

/// `‖Σ_a A⁽ᵃ⁾†A⁽ᵃ⁾ − I_χ‖_max`.
pub fn check_left_canonical(t: &MpsTensor) -> f64 {
    sum_adjoint_products(&t.mats, true).max_abs_diff(&CMatrix::identity(t.chi))
}

/// `‖Σ_a A⁽ᵃ⁾A⁽ᵃ⁾† − I_χ‖_max`.
pub fn check_right_canonical(t: &MpsTensor) -> f64 {
    sum_adjoint_products(&t.mats, false).max_abs_diff(&CMatrix::identity(t.chi))
}

/// q̃: numerical rank of the `q×χ²` matrix `M[a,(j,k)] = A⁽ᵃ⁾_{jk}`.
pub fn subspace_dimension(t: &MpsTensor) -> Result<usize> {
    let m = CMatrix::from_fn(t.q, t.chi * t.chi, |a, c| t.mats[a][(c / t.chi, c % t.chi)]);
    if m.max_abs() == 0.0 {
        return Err(Error::Degenerate("all MPS matrices vanish".into()));
    }
    Ok(rank(&m, RANK_TOL))
}

/// χ=2 family interpolating between GHZ (θ→0) and cluster (θ=π/4):
/// `A⁽⁰⁾ = [[c, s], [0, 0]]`, `A⁽¹⁾ = [[0, 0], [−s, c]]`, `A⁽ᵃ⁾ = 0` for a ≥ 2.
pub fn ghz_cluster_family(theta: f64, q: usize) -> Result<MpsTensor> {
    if !(theta > 0.0 && theta <= FRAC_PI_4 + 1e-15) {
        return Err(Error::Argument(format!(
            "θ must lie in (0, π/4], got {theta}"
        )));
    }
    if q < 2 {
        return Err(Error::Argument(format!(
            "GHZ–cluster family needs q ≥ 2, got {q}"
        )));
    }
    let (s, c) = theta.sin_cos();
    let mut mats = vec![CMatrix::zeros(2, 2); q];
    mats[0] = CMatrix::from_real_rows(&[&[c, s], &[0.0, 0.0]]);
    mats[1] = CMatrix::from_real_rows(&[&[0.0, 0.0], &[-s, c]]);
    MpsTensor::new(q, 2, mats)
}

/// The q=2 cluster-state tensor (the θ=π/4 member of the GHZ–cluster family).
pub fn cluster_tensor() -> MpsTensor {
    ghz_cluster_family(FRAC_PI_4, 2).expect("valid parameters")
}

/// χ=1 tensor `A⁽ᵃ⁾ = [ket_a]`.
pub fn product_state_mps(ket: &[C64]) -> Result<MpsTensor> {
    let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Argument("product state ket is zero".into()));
    }
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Argument(format!(
            "product state ket has norm {norm}"
        )));
    }
    let mats = ket
        .iter()
        .map(|z| CMatrix::from_vec(1, 1, vec![*z]).expect("1x1"))
        .collect();
    MpsTensor::new(ket.len(), 1, mats)
}

/// `|level⟩` as a product-state tensor.
pub fn basis_product_mps(q: usize, level: usize) -> Result<MpsTensor> {
    if level >= q {
        return Err(Error::Argument(format!(
            "level {level} out of range for q={q}"
        )));
    }
    let mut ket = vec![ZERO; q];
    ket[level] = C64::new(1.0, 0.0);
    product_state_mps(&ket)
}

/// Alternating two-site MPS `{A⁽ᵃ⁾ (χ×χ′), B⁽ᵇ⁾ (χ′×χ)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSiteMps {
    pub q: usize,
    pub chi: usize,
    pub chip: usize,
    #[serde(rename = "matsA")]
    pub mats_a: Vec<CMatrix>,
    #[serde(rename = "matsB")]
    pub mats_b: Vec<CMatrix>,
}

impl TwoSiteMps {
    pub fn new(
        q: usize,
        chi: usize,
        chip: usize,
        mats_a: Vec<CMatrix>,
        mats_b: Vec<CMatrix>,
    ) -> Result<Self> {
        check_mats(&mats_a, q, chi, chip, "two-site MPS A")?;
        check_mats(&mats_b, q, chip, chi, "two-site MPS B")?;
        Ok(TwoSiteMps {
            q,
            chi,
            chip,
            mats_a,
            mats_b,
        })
    }

    pub fn from_pair(a: &MpsTensor, b: &MpsTensor) -> Result<Self> {
        if a.q != b.q || a.chi != b.chi {
            return Err(Error::Shape("paired tensors must share q and χ".into()));
        }
        Self::new(a.q, a.chi, b.chi, a.mats.clone(), b.mats.clone())
    }

    /// `‖Σ_{a,b}(A⁽ᵃ⁾B⁽ᵇ⁾)†A⁽ᵃ⁾B⁽ᵇ⁾ − I_χ‖_max`.
    pub fn check_canonical(&self) -> f64 {
        let mut acc = CMatrix::zeros(self.chi, self.chi);
        for a in &self.mats_a {
            for b in &self.mats_b {
                let p = a.matmul(b);
                acc = &acc + &p.adjoint().matmul(&p);
            }
        }
        acc.max_abs_diff(&CMatrix::identity(self.chi))
    }

    /// Physical kets spanned by both tensors (used by the solvability gate).
    pub fn kets(&self) -> Vec<Vec<C64>> {
        let mut out = Vec::new();
        for set in [&self.mats_a, &self.mats_b] {
            let (r, c) = set[0].shape();
            for j in 0..r {
                for k in 0..c {
                    out.push(set.iter().map(|m| m[(j, k)]).collect());
                }
            }
        }
        out
    }
}

/// Locally purified density operator with matrices `A^{(a,γ)}`, stored at
/// index `a·D + γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lpdo {
    pub q: usize,
    pub chi: usize,
    pub d: usize,
    pub mats: Vec<CMatrix>,
}

impl Lpdo {
    pub fn new(q: usize, chi: usize, d: usize, mats: Vec<CMatrix>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Argument(
                "purification dimension must be positive".into(),
            ));
        }
        check_mats(&mats, q * d, chi, chi, "LPDO")?;
        Ok(Lpdo { q, chi, d, mats })
    }

    pub fn from_mps(t: &MpsTensor) -> Self {
        Lpdo {
            q: t.q,
            chi: t.chi,
            d: 1,
            mats: t.mats.clone(),
        }
    }

    pub fn mat(&self, a: usize, gamma: usize) -> &CMatrix {
        &self.mats[a * self.d + gamma]
    }

    pub fn kets(&self) -> Vec<Vec<C64>> {
        let mut out = Vec::new();
        for g in 0..self.d {
            for j in 0..self.chi {
                for k in 0..self.chi {
                    out.push((0..self.q).map(|a| self.mat(a, g)[(j, k)]).collect());
                }
            }
        }
        out
    }
}

/// `‖Σ_{γ,a} A^{(a,γ)†}A^{(a,γ)} − I_χ‖_max`.
pub fn lpdo_check_canonical(l: &Lpdo) -> f64 {
    sum_adjoint_products(&l.mats, true).max_abs_diff(&CMatrix::identity(l.chi))
}

/// On-disk LPDO layout: `{"q","chi","d","mats":[{"a","gamma","matrix"}]}`.
#[derive(Serialize, Deserialize)]
struct LpdoEntry {
    a: usize,
    gamma: usize,
    matrix: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct LpdoRepr {
    q: usize,
    chi: usize,
    d: usize,
    mats: Vec<LpdoEntry>,
}

impl Serialize for Lpdo {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut mats = Vec::new();
        for a in 0..self.q {
            for gamma in 0..self.d {
                mats.push(LpdoEntry {
                    a,
                    gamma,
                    matrix: self.mat(a, gamma).clone(),
                });
            }
        }
        LpdoRepr {
            q: self.q,
            chi: self.chi,
            d: self.d,
            mats,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lpdo {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = LpdoRepr::deserialize(d)?;
        let mut slots: Vec<Option<CMatrix>> = vec![None; r.q * r.d];
        for e in r.mats {
            if e.a >= r.q || e.gamma >= r.d {
                return Err(D::Error::custom(format!(
                    "LPDO entry ({}, {}) out of range",
                    e.a, e.gamma
                )));
            }
            slots[e.a * r.d + e.gamma] = Some(e.matrix);
        }
        let mats = slots
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.ok_or_else(|| D::Error::custom(format!("LPDO entry {i} missing"))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Lpdo::new(r.q, r.chi, r.d, mats).map_err(D::Error::custom)
    }
}
