//! Replica transfer matrix, entanglement velocity and the temporal state.
//!
//! For solvable circuits `Tr[ρ_Rⁿ(t)]` depends only on the MPS tensor. It is
//! a contraction of `2t` copies of the `n`-fold folded tensor dressed
//! alternately with the two pairing rules.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_capacity, Error, Result};
use crate::mps::{check_left_canonical, check_right_canonical, MpsTensor};
use crate::numerics::{eigenvalues, renyi_trace, von_neumann_entropy, CMatrix, C64, ZERO};
use crate::oracle::chain_state;

/// Largest replica bond dimension `χ²ⁿ` accepted.
pub const TRANSFER_DIM_CAP: usize = 4096;
/// Largest temporal state handled, counted as `q^{4t}·χ`.
pub const TEMPORAL_CAP: usize = 1 << 20;
const CANONICAL_TOL: f64 = 1e-10;
const DOMINANCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// `a_m = a'_m` for every replica (the trace).
    Dot,
    /// `a'_m = a_{m+1}` cyclically.
    Diamond,
}

/// Indicator over interleaved tuples `(a₁, a′₁, …, a_n, a′_n)`, row-major.
pub fn pairing_vector(kind: Pairing, n: usize, d: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Argument("pairing needs n ≥ 1".into()));
    }
    let len = d
        .checked_pow(2 * n as u32)
        .ok_or_else(|| Error::Dimension("pairing vector too large".into()))?;
    let mut v = vec![0.0; len];
    for free in 0..d.pow(n as u32) {
        let a = digits(free, d, n);
        v[pairing_index(kind, &a, d)] = 1.0;
    }
    Ok(v)
}

/// Mixed-radix digits, most significant first.
fn digits(mut x: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = x % d;
        x /= d;
    }
    out
}

/// The primed partner of each `a_m` under the given rule.
fn partners(kind: Pairing, a: &[usize]) -> Vec<usize> {
    let n = a.len();
    match kind {
        Pairing::Dot => a.to_vec(),
        Pairing::Diamond => (0..n).map(|m| a[(m + 1) % n]).collect(),
    }
}

fn pairing_index(kind: Pairing, a: &[usize], d: usize) -> usize {
    a.iter()
        .zip(partners(kind, a))
        .fold(0, |acc, (x, y)| (acc * d + x) * d + y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaTransferMatrix {
    pub n: usize,
    pub chi: usize,
    pub q: usize,
    pub matrix: CMatrix,
}

fn check_both_canonical(a: &MpsTensor) -> Result<()> {
    let l = check_left_canonical(a);
    let r = check_right_canonical(a);
    if l.max(r) > CANONICAL_TOL {
        return Err(Error::Precondition {
            what: "replica transfer matrix needs a left- and right-canonical tensor".into(),
            residual: l.max(r),
        });
    }
    Ok(())
}

/// `M_P = Σ_{tuples allowed by P} A^{a₁} ⊗ A^{a′₁}* ⊗ ⋯ ⊗ A^{a_n} ⊗ A^{a′_n}*`,
/// acting on bond replicas ordered `(j₁, j′₁, …, j_n, j′_n)`.
pub fn dressed_site(a: &MpsTensor, kind: Pairing, n: usize) -> CMatrix {
    let conj: Vec<CMatrix> = a.mats.iter().map(CMatrix::conj).collect();
    let dim = a.chi.pow(2 * n as u32);
    let mut total = CMatrix::zeros(dim, dim);
    for free in 0..a.q.pow(n as u32) {
        let idx = digits(free, a.q, n);
        let prime = partners(kind, &idx);
        let mut term = CMatrix::identity(1);
        for (x, y) in idx.iter().zip(&prime) {
            term = term.kron(&a.mats[*x]).kron(&conj[*y]);
        }
        total = &total + &term;
    }
    total
}

/// `𝕋 = M_♦ · M_•`.
pub fn transfer_matrix(a: &MpsTensor, n: usize) -> Result<ReplicaTransferMatrix> {
    if n == 0 {
        return Err(Error::Argument("replica index must be ≥ 1".into()));
    }
    check_both_canonical(a)?;
    ensure_capacity(
        "replica bond space",
        (a.chi as u128).pow(2 * n as u32),
        TRANSFER_DIM_CAP,
    )?;
    let m = dressed_site(a, Pairing::Diamond, n).matmul(&dressed_site(a, Pairing::Dot, n));
    Ok(ReplicaTransferMatrix {
        n,
        chi: a.chi,
        q: a.q,
        matrix: m,
    })
}

/// `Tr[ρ_Rⁿ(t)] = χ^{−n} ⟨•|𝕋^{2t}|♦⟩` with unnormalized indicator boundary
/// vectors on the bond replicas.
///
/// The `χ^{−n}` factor comes from normalizing the semi-infinite state: each
/// replica carries one `1/χ` from the fixed point of the transfer map.
pub fn renyi_trace_via_transfer(a: &MpsTensor, n: usize, t: usize) -> Result<f64> {
    let tm = transfer_matrix(a, n)?;
    let dot = pairing_vector(Pairing::Dot, n, a.chi)?;
    let dia = pairing_vector(Pairing::Diamond, n, a.chi)?;
    let mut v: Vec<C64> = dia.iter().map(|&x| C64::new(x, 0.0)).collect();
    for _ in 0..2 * t {
        v = tm.matrix.matvec(&v);
    }
    let z: C64 =
        dot.iter().zip(&v).map(|(d, x)| x * *d).sum::<C64>() / (a.chi as f64).powi(n as i32);
    if z.im.abs() > 1e-10 {
        return Err(Error::Drift(format!(
            "replica contraction has imaginary part {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// Leading eigenvalue `λₙ` and velocity `v = 2 ln λₙ / ((1−n) ln q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Velocity {
    pub n: usize,
    pub lambda: f64,
    pub v: f64,
}

/// Entanglement velocity in units of `ln q` per period.
///
/// A dominant eigenvalue that is not real-positive, or a different
/// eigenvalue of the same modulus, is a dominance error: the asymptotic rate
/// is then not a single exponential.
pub fn entanglement_velocity(a: &MpsTensor, n: usize) -> Result<Velocity> {
    if n < 2 {
        return Err(Error::Argument(format!("velocity needs n ≥ 2, got {n}")));
    }
    let tm = transfer_matrix(a, n)?;
    let ev = eigenvalues(&tm.matrix)?;
    let lead = ev[0];
    if lead.norm() > 1.0 + DOMINANCE_TOL {
        return Err(Error::Dominance(format!(
            "spectral radius {} exceeds 1",
            lead.norm()
        )));
    }
    if lead.im.abs() > DOMINANCE_TOL || lead.re <= DOMINANCE_TOL {
        return Err(Error::Dominance(format!(
            "leading eigenvalue {lead} is not real-positive"
        )));
    }
    if let Some(rival) = ev[1..].iter().find(|z| {
        (z.norm() - lead.norm()).abs() < DOMINANCE_TOL && (*z - lead).norm() > DOMINANCE_TOL
    }) {
        return Err(Error::Dominance(format!(
            "eigenvalue {rival} has the same modulus as {lead}"
        )));
    }
    let lambda = lead.re;
    let v = 2.0 * lambda.ln() / ((1.0 - n as f64) * (a.q as f64).ln());
    // −0.0 from a unit eigenvalue reads badly in tables
    Ok(Velocity {
        n,
        lambda,
        v: if v == 0.0 { 0.0 } else { v },
    })
}

/// Which entropy of the temporal state to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyOrder {
    VonNeumann,
    Renyi(usize),
}

/// Reduced state `ρ_O` of the temporal state `|φ⟩`.
///
/// `|φ⟩` is the translation-invariant chain of `4t` sites with both boundary
/// bonds kept as legs. Counting sites from 1, `O` holds the odd sites and
/// the right bond leg; `E` holds the left bond leg and the even sites.
pub fn temporal_reduced_state(a: &MpsTensor, t: usize) -> Result<CMatrix> {
    check_both_canonical(a)?;
    let (q, chi) = (a.q, a.chi);
    let nsites = 4 * t;
    ensure_capacity(
        "temporal state",
        (q as u128).pow(nsites as u32) * chi as u128,
        TEMPORAL_CAP,
    )?;
    let psi = chain_state(a, nsites, usize::MAX)?;
    let half = q.pow(2 * t as u32);
    let (rows, cols) = (half * chi, chi * half);
    let mut m = vec![ZERO; rows * cols];
    // flat layout (l, s₁ … s_{4t}, r)
    for (flat, z) in psi.iter().enumerate() {
        let r = flat % chi;
        let mut rest = flat / chi;
        let mut sites = vec![0; nsites];
        for s in sites.iter_mut().rev() {
            *s = rest % q;
            rest /= q;
        }
        let l = rest;
        let o = sites.iter().step_by(2).fold(0, |acc, s| acc * q + s) * chi + r;
        let e = sites
            .iter()
            .skip(1)
            .step_by(2)
            .fold(l, |acc, s| acc * q + s);
        m[o * cols + e] = *z;
    }
    let m = CMatrix::from_vec(rows, cols, m)?;
    Ok(m.matmul(&m.adjoint()))
}

/// Entropy (nats) of the odd/even bipartition of the temporal state.
///
/// At `t = 0` only the two bond legs remain and they are maximally
/// entangled, so the value is `ln χ`, which is also the entropy of the
/// untouched half chain.
pub fn temporal_state_entropy(a: &MpsTensor, order: EntropyOrder, t: usize) -> Result<f64> {
    let rho = temporal_reduced_state(a, t)?;
    match order {
        EntropyOrder::VonNeumann => von_neumann_entropy(&rho),
        EntropyOrder::Renyi(n) => {
            if n < 2 {
                return Err(Error::Argument(format!("Rényi index must be ≥ 2, got {n}")));
            }
            Ok(renyi_trace(&rho, n)?.ln() / (1.0 - n as f64))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::gate_both_chirality_q2;
    use crate::mps::{basis_product_mps, cluster_tensor, ghz_cluster_family};
    use crate::oracle::{default_margin, renyi_trace_chain};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn pairing_counts() {
        for n in 1..=3 {
            let d = pairing_vector(Pairing::Dot, n, 2).unwrap();
            assert_eq!(
                d.iter().filter(|&&x| x == 1.0).count(),
                2usize.pow(n as u32)
            );
            assert!(d.iter().all(|&x| x == 0.0 || x == 1.0));
        }
        assert_eq!(
            pairing_vector(Pairing::Dot, 1, 3).unwrap(),
            pairing_vector(Pairing::Diamond, 1, 3).unwrap()
        );
        let dia = pairing_vector(Pairing::Diamond, 2, 2).unwrap();
        assert_eq!(dia.iter().sum::<f64>(), 4.0);
        // (a₁,a′₁,a₂,a′₂) = (0,1,1,0)
        assert_eq!(dia[0b0110], 1.0);
        assert_eq!(dia[0b0101], 0.0);
        assert!(pairing_vector(Pairing::Dot, 0, 2).is_err());
    }

    #[test]
    fn product_state_transfer_is_one() {
        let a = basis_product_mps(2, 0).unwrap();
        for n in 2..=3 {
            let tm = transfer_matrix(&a, n).unwrap();
            assert_eq!(tm.matrix.shape(), (1, 1));
            assert!((tm.matrix[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
            for t in 0..3 {
                assert!((renyi_trace_via_transfer(&a, n, t).unwrap() - 1.0).abs() < 1e-15);
            }
            let v = entanglement_velocity(&a, n).unwrap();
            assert_eq!(v.v, 0.0);
        }
    }

    #[test]
    fn cluster_values() {
        let a = cluster_tensor();
        let tm = transfer_matrix(&a, 2).unwrap();
        assert_eq!(tm.matrix.shape(), (16, 16));
        assert!(eigenvalues(&tm.matrix).unwrap()[0].norm() <= 1.0 + 1e-10);
        for t in 0..4 {
            let v = renyi_trace_via_transfer(&a, 2, t).unwrap();
            assert!((v - 2f64.powi(-1 - 2 * t as i32)).abs() < 1e-12);
        }
        let v = entanglement_velocity(&a, 2).unwrap();
        assert!((v.v - 2.0).abs() < 1e-8, "{v:?}");
    }

    #[test]
    fn n_one_is_folded_transfer_squared() {
        let a = ghz_cluster_family(0.5, 4).unwrap();
        let tm = transfer_matrix(&a, 1).unwrap();
        let e = dressed_site(&a, Pairing::Dot, 1);
        assert!(tm.matrix.max_abs_diff(&e.matmul(&e)) < 1e-14);
        assert!((eigenvalues(&tm.matrix).unwrap()[0].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn transfer_matches_chain() {
        let a = cluster_tensor();
        let g = gate_both_chirality_q2(0.3, 0.0, 0.0, 0.0, 0.0, FRAC_PI_4);
        for n in 2..=3 {
            for t in 1..=2 {
                let via = renyi_trace_via_transfer(&a, n, t).unwrap();
                let chain = renyi_trace_chain(&g, &a, n, t, default_margin(t), 1 << 20).unwrap();
                assert!((via - chain).abs() < 1e-8, "n={n} t={t}: {via} vs {chain}");
            }
        }
    }

    #[test]
    fn ghz_velocity_in_bounds() {
        for theta in [0.2, 0.5, 0.7] {
            let a = ghz_cluster_family(theta, 4).unwrap();
            for n in 2..=3 {
                match entanglement_velocity(&a, n) {
                    Ok(v) => assert!((-1e-8..=2.0 + 1e-8).contains(&v.v), "{v:?}"),
                    Err(Error::Dominance(_)) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }

    #[test]
    fn temporal_duality_with_transfer() {
        let a = cluster_tensor();
        for t in 1..=2 {
            let s2 = temporal_state_entropy(&a, EntropyOrder::Renyi(2), t).unwrap();
            let via = renyi_trace_via_transfer(&a, 2, t).unwrap();
            assert!((s2 + via.ln()).abs() < 1e-8);
        }
        let s0 = temporal_state_entropy(&a, EntropyOrder::VonNeumann, 0).unwrap();
        assert!((s0 - 2f64.ln()).abs() < 1e-12);
        let p = basis_product_mps(2, 1).unwrap();
        assert!(
            temporal_state_entropy(&p, EntropyOrder::VonNeumann, 0)
                .unwrap()
                .abs()
                < 1e-12
        );
        let s = temporal_state_entropy(&a, EntropyOrder::VonNeumann, 1).unwrap();
        assert!((s - 3.0 * 2f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn rejects_non_canonical() {
        let a = cluster_tensor().scaled(1.1);
        assert!(matches!(
            transfer_matrix(&a, 2),
            Err(Error::Precondition { .. })
        ));
    }
}
