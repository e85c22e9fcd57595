//! Solvable-condition, chirality and soliton checks.

mod influence;

pub use influence::{
    build_influence_matrix_dense, empty_influence_matrix, spatial_transfer, verify_im_fixed_point,
    verify_im_fixed_point_checked, InfluenceMatrix, DEFAULT_IM_CAP,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gates::{is_dual_unitary, swap_conjugate, TwoSiteGate};
use crate::mps::MpsTensor;
use crate::numerics::{kron, pauli, reshuffle, CMatrix, C64};

/// Worst residual over a ket family, with the offending pair `(p, p′)` of
/// indices into that family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairResidual {
    pub max: f64,
    pub frobenius: f64,
    pub worst: (usize, usize),
}

/// Check `U^R(|v⟩⟨w|⊗I)(U^R)† = I⊗|v⟩⟨w|` for every pair of kets.
///
/// Uses `U^R(|v⟩⟨w|⊗I)(U^R)† = X_v X_w†` with `X_v = U^R(|v⟩⊗I)` (a `q²×q`
/// matrix), so each pair costs one small product.
pub fn solvable_left_kets(
    u: &CMatrix,
    q: usize,
    kets: &[Vec<C64>],
    exec: Exec,
) -> Result<PairResidual> {
    if let Some(k) = kets.iter().find(|k| k.len() != q) {
        return Err(Error::Argument(format!(
            "ket of dimension {} does not match gate q={q}",
            k.len()
        )));
    }
    let ur = reshuffle(u, q)?;
    let xs: Vec<CMatrix> = kets
        .iter()
        .map(|v| {
            CMatrix::from_fn(q * q, q, |r, c| {
                (0..q).map(|a| ur[(r, a * q + c)] * v[a]).sum()
            })
        })
        .collect();
    let n = kets.len();
    let id = CMatrix::identity(q);
    let per_pair = exec.map_range(n * n, |p| {
        let (i, j) = (p / n, p % n);
        let lhs = xs[i].matmul(&xs[j].adjoint());
        let rhs = kron(&id, &CMatrix::outer(&kets[i], &kets[j])).expect("small");
        let diff = &lhs - &rhs;
        (diff.max_abs(), diff.frobenius())
    });
    let mut best = PairResidual {
        max: 0.0,
        frobenius: 0.0,
        worst: (0, 0),
    };
    for (p, (m, f)) in per_pair.into_iter().enumerate() {
        if m > best.max {
            best.max = m;
            best.worst = (p / n, p % n);
        }
        best.frobenius = best.frobenius.max(f);
    }
    Ok(best)
}

fn check_q(u: &TwoSiteGate, a: &MpsTensor) -> Result<()> {
    if u.q != a.q {
        return Err(Error::Argument(format!(
            "gate has q={} but MPS has q={}",
            u.q, a.q
        )));
    }
    Ok(())
}

/// Left solvable condition over all `(j,k,j′,k′)`; returns the max-norm
/// residual.
pub fn check_solvable_left(u: &TwoSiteGate, a: &MpsTensor) -> Result<f64> {
    check_q(u, a)?;
    Ok(solvable_left_kets(&u.matrix, u.q, &a.kets(), Exec::default())?.max)
}

/// Right solvable condition, i.e. the left condition for `S U S`.
pub fn check_solvable_right(u: &TwoSiteGate, a: &MpsTensor) -> Result<f64> {
    check_solvable_left(&swap_conjugate(u), a)
}

/// Soliton residual `‖U(σ³⊗I)U† − I⊗σ³‖_max` for q=2.
///
/// With the basis convention of this crate (left site first, `U` acting on
/// kets) the q̃=1 family satisfies `U(σ³⊗I)U† = I⊗σ³`; the form with `U†` on
/// the left describes the transposed gate.
pub fn check_soliton(u: &TwoSiteGate) -> Result<f64> {
    if u.q != 2 {
        return Err(Error::Argument(format!(
            "soliton condition is defined for q=2, got q={}",
            u.q
        )));
    }
    let z1 = kron(&pauli(3), &CMatrix::identity(2))?;
    let z2 = kron(&CMatrix::identity(2), &pauli(3))?;
    let lhs = u.matrix.matmul(&z1).matmul(&u.matrix.adjoint());
    Ok(lhs.max_abs_diff(&z2))
}

/// Index tuple `(j, j′, k, k′)` for a pair of kets from [`MpsTensor::kets`].
fn tuple(a: &MpsTensor, (p, pp): (usize, usize)) -> (usize, usize, usize, usize) {
    (p / a.chi, pp / a.chi, p % a.chi, pp % a.chi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityReport {
    pub left_residual: f64,
    pub right_residual: f64,
    pub soliton_residual: Option<f64>,
    pub dual_unitarity_residual: f64,
    pub left_frobenius: f64,
    pub right_frobenius: f64,
    /// `(j, j′, k, k′)` of the largest left violation.
    pub worst_left: (usize, usize, usize, usize),
    pub worst_right: (usize, usize, usize, usize),
}

pub fn solvability_report(u: &TwoSiteGate, a: &MpsTensor, exec: Exec) -> Result<SolvabilityReport> {
    check_q(u, a)?;
    let kets = a.kets();
    let left = solvable_left_kets(&u.matrix, u.q, &kets, exec)?;
    let right = solvable_left_kets(&swap_conjugate(u).matrix, u.q, &kets, exec)?;
    Ok(SolvabilityReport {
        left_residual: left.max,
        right_residual: right.max,
        soliton_residual: if u.q == 2 {
            Some(check_soliton(u)?)
        } else {
            None
        },
        dual_unitarity_residual: is_dual_unitary(u),
        left_frobenius: left.frobenius,
        right_frobenius: right.frobenius,
        worst_left: tuple(a, left.worst),
        worst_right: tuple(a, right.worst),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{haar_gate, sample, swap_gate};
    use crate::mps::{basis_product_mps, cluster_tensor, ghz_cluster_family};
    use crate::numerics::{haar_unitary, Rng};

    #[test]
    fn swap_is_solvable_for_any_q2_tensor() {
        let s = swap_gate(2);
        let c = cluster_tensor();
        assert!(check_solvable_left(&s, &c).unwrap() < 1e-12);
        assert!(check_solvable_right(&s, &c).unwrap() < 1e-12);
        assert_eq!(check_soliton(&s).unwrap(), 0.0);
    }

    #[test]
    fn family_residuals() {
        let mut rng = Rng::new(17);
        let p0 = basis_product_mps(2, 0).unwrap();
        let p1 = basis_product_mps(2, 1).unwrap();
        let c = cluster_tensor();
        for _ in 0..10 {
            let g = sample::q2_qt1(&mut rng);
            assert!(check_solvable_left(&g, &p0).unwrap() < 1e-10);
            assert!(check_solvable_left(&g, &p1).unwrap() < 1e-10);
            assert!(check_soliton(&g).unwrap() < 1e-10);
            // the swapped gate is right-solvable instead
            assert!(check_solvable_right(&swap_conjugate(&g), &p0).unwrap() < 1e-10);
            let g = sample::q2_qt2(&mut rng);
            assert!(check_solvable_left(&g, &c).unwrap() < 1e-10);
            let g = sample::both_chirality_q2(&mut rng);
            assert!(check_solvable_left(&g, &p0).unwrap() < 1e-10);
            assert!(check_solvable_right(&g, &p0).unwrap() < 1e-10);
        }
        let ghz = ghz_cluster_family(0.5, 4).unwrap();
        for _ in 0..5 {
            let g = sample::general(4, 2, &mut rng).unwrap();
            assert!(check_solvable_left(&g, &ghz).unwrap() < 1e-10);
            let g = sample::both_chirality_q4plus(4, &mut rng).unwrap();
            assert!(check_solvable_left(&g, &ghz).unwrap() < 1e-10);
            assert!(check_solvable_right(&g, &ghz).unwrap() < 1e-10);
        }
    }

    #[test]
    fn generic_gates_fail() {
        let mut rng = Rng::new(5);
        let p0 = basis_product_mps(2, 0).unwrap();
        let mut right_fail = 0;
        for _ in 0..20 {
            let h = haar_gate(2, &mut rng);
            assert!(check_solvable_left(&h, &p0).unwrap() > 1e-3);
            assert!(check_soliton(&h).unwrap() > 1e-2);
            let g = sample::q2_qt1(&mut rng);
            if check_solvable_right(&g, &p0).unwrap() > 1e-3 {
                right_fail += 1;
            }
        }
        assert!(right_fail >= 18);
    }

    #[test]
    fn residual_depends_only_on_span() {
        // A bond-space rotation leaves span{|A_jk⟩} unchanged.
        let mut rng = Rng::new(21);
        let ghz = ghz_cluster_family(0.4, 4).unwrap();
        let w = haar_unitary(2, &mut rng);
        let rotated = MpsTensor::new(
            4,
            2,
            ghz.mats
                .iter()
                .map(|m| w.matmul(m).matmul(&w.adjoint()))
                .collect(),
        )
        .unwrap();
        let g = sample::general(4, 2, &mut rng).unwrap();
        let a = check_solvable_left(&g, &ghz).unwrap();
        let b = check_solvable_left(&g, &rotated).unwrap();
        assert!(a < 1e-10 && b < 1e-10);
    }

    #[test]
    fn report_and_errors() {
        let mut rng = Rng::new(2);
        let g = sample::q2_qt1(&mut rng);
        let r =
            solvability_report(&g, &basis_product_mps(2, 0).unwrap(), Exec::Sequential).unwrap();
        assert!(r.left_residual < 1e-10);
        assert!(r.soliton_residual.unwrap() < 1e-10);
        assert!(r.dual_unitarity_residual < 1e-10);
        let ghz = ghz_cluster_family(0.5, 4).unwrap();
        assert!(check_solvable_left(&g, &ghz).is_err());
        assert!(check_soliton(&swap_gate(3)).is_err());
    }
}
