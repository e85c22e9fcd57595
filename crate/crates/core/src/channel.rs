//! Exact boundary channels in Kraus form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::mps::{check_left_canonical, lpdo_check_canonical, Lpdo, MpsTensor, TwoSiteMps};
use crate::numerics::{CMatrix, ZERO};

/// Canonical-form tolerance required before building a channel.
pub const CANONICAL_TOL: f64 = 1e-10;

/// Kraus operators on ancilla ⊗ boundary site (ancilla first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryChannel {
    pub chi: usize,
    pub q: usize,
    pub kraus: Vec<CMatrix>,
}

fn precondition(what: &str, residual: f64) -> Result<()> {
    if residual > CANONICAL_TOL {
        return Err(Error::Precondition {
            what: what.to_string(),
            residual,
        });
    }
    Ok(())
}

/// `X ⊗ |b⟩⟨a′|` on ancilla ⊗ site.
fn place(x: &CMatrix, q: usize, b: usize, ap: usize) -> CMatrix {
    let chi = x.rows();
    let mut k = CMatrix::zeros(chi * q, chi * q);
    for m in 0..chi {
        for n in 0..chi {
            k[(m * q + b, n * q + ap)] = x[(m, n)];
        }
    }
    k
}

/// `K_{a,a′} = Σ_b F(b, a) ⊗ |b⟩⟨a′|`, listed with `a` outer and `a′` inner.
fn kraus_from_products(
    q: usize,
    chi: usize,
    prod: impl Fn(usize, usize) -> CMatrix,
) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(q * q);
    for a in 0..q {
        let blocks: Vec<CMatrix> = (0..q).map(|b| prod(b, a)).collect();
        for ap in 0..q {
            let k = blocks
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(chi * q, chi * q), |acc, (b, x)| {
                    &acc + &place(x, q, b, ap)
                });
            out.push(k);
        }
    }
    out
}

/// `K_{a,a′} = Σ_b A⁽ᵇ⁾A⁽ᵃ⁾ ⊗ |b⟩⟨a′|`.
pub fn kraus_from_mps(a: &MpsTensor) -> Result<BoundaryChannel> {
    precondition("MPS tensor must be left-canonical", check_left_canonical(a))?;
    Ok(BoundaryChannel {
        chi: a.chi,
        q: a.q,
        kraus: kraus_from_products(a.q, a.chi, |b, x| a.mats[b].matmul(&a.mats[x])),
    })
}

/// `K_{a,a′} = Σ_b A⁽ᵇ⁾B⁽ᵃ⁾ ⊗ |b⟩⟨a′|`.
pub fn kraus_from_two_site(t: &TwoSiteMps) -> Result<BoundaryChannel> {
    precondition("two-site MPS must be left-canonical", t.check_canonical())?;
    Ok(BoundaryChannel {
        chi: t.chi,
        q: t.q,
        kraus: kraus_from_products(t.q, t.chi, |b, x| t.mats_a[b].matmul(&t.mats_b[x])),
    })
}

/// `K_{(aγ,a′γ′)} = Σ_b A^{(b,γ′)}A^{(a,γ)} ⊗ |b⟩⟨a′|`, ordered `(a, γ, a′, γ′)`
/// so that D=1 reproduces [`kraus_from_mps`] exactly.
pub fn kraus_from_lpdo(l: &Lpdo) -> Result<BoundaryChannel> {
    precondition("LPDO must be left-canonical", lpdo_check_canonical(l))?;
    let (q, chi, d) = (l.q, l.chi, l.d);
    let mut kraus = Vec::with_capacity(q * q * d * d);
    for a in 0..q {
        for g in 0..d {
            for ap in 0..q {
                for gp in 0..d {
                    let k = (0..q).fold(CMatrix::zeros(chi * q, chi * q), |acc, b| {
                        let x = l.mat(b, gp).matmul(l.mat(a, g));
                        &acc + &place(&x, q, b, ap)
                    });
                    kraus.push(k);
                }
            }
        }
    }
    Ok(BoundaryChannel { chi, q, kraus })
}

/// `‖Σ K†K − I‖_max`.
pub fn check_cptp(c: &BoundaryChannel) -> f64 {
    let n = c.chi * c.q;
    let s = c
        .kraus
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, k| &acc + &k.adjoint().matmul(k));
    s.max_abs_diff(&CMatrix::identity(n))
}

impl BoundaryChannel {
    pub fn local_dim(&self) -> usize {
        self.chi * self.q
    }

    /// Superoperator `S[(i,i′),(k,k′)] = Σ_μ K_μ[i,k] K_μ[i′,k′]*` on the
    /// ancilla ⊗ site space.
    pub fn superoperator(&self) -> CMatrix {
        let n = self.local_dim();
        let mut s = CMatrix::zeros(n * n, n * n);
        for k in &self.kraus {
            for i in 0..n {
                for ip in 0..n {
                    let row = i * n + ip;
                    for kk in 0..n {
                        let a = k[(i, kk)];
                        if a == ZERO {
                            continue;
                        }
                        for kp in 0..n {
                            s[(row, kk * n + kp)] += a * k[(ip, kp)].conj();
                        }
                    }
                }
            }
        }
        s
    }
}

/// Apply a local superoperator to the leading `d`-dimensional factor of a
/// density matrix `ρ` on `d ⊗ rest`.
pub fn apply_superoperator(s: &CMatrix, d: usize, rho: &CMatrix, exec: Exec) -> Result<CMatrix> {
    let n = rho.rows();
    if !rho.is_square() || !n.is_multiple_of(d) || s.shape() != (d * d, d * d) {
        return Err(Error::Argument(format!(
            "superoperator on {d}-dim factor cannot act on {:?} matrix",
            rho.shape()
        )));
    }
    let r = n / d;
    // X[(k,k′),(s,s′)] = ρ[(k s),(k′ s′)]
    let mut x = CMatrix::zeros(d * d, r * r);
    {
        let xd = x.data_mut();
        for k in 0..d {
            for kp in 0..d {
                let row = (k * d + kp) * r * r;
                for s_ in 0..r {
                    let src = &rho.row(k * r + s_)[kp * r..(kp + 1) * r];
                    xd[row + s_ * r..row + (s_ + 1) * r].copy_from_slice(src);
                }
            }
        }
    }
    let y = s.matmul_with(&x, exec);
    let mut out = CMatrix::zeros(n, n);
    {
        let od = out.data_mut();
        for i in 0..d {
            for ip in 0..d {
                let row = (i * d + ip) * r * r;
                for s_ in 0..r {
                    let dst = (i * r + s_) * n + ip * r;
                    od[dst..dst + r].copy_from_slice(&y.data()[row + s_ * r..row + (s_ + 1) * r]);
                }
            }
        }
    }
    Ok(out)
}

/// `Σ_μ (K_μ⊗I) ρ (K_μ⊗I)†` on ancilla ⊗ site 0 ⊗ remaining sites, without
/// materializing the embedded operators.
pub fn apply_channel(c: &BoundaryChannel, rho: &CMatrix) -> Result<CMatrix> {
    apply_superoperator(&c.superoperator(), c.local_dim(), rho, Exec::default())
}
