//! Dense influence matrices and the spatial fixed-point check.
//!
//! The influence matrix (IM) of the bath `x < 0` on site 0 over `T` periods
//! is stored with an open bond pair `(j, j′)` (the MPS bond between sites −1
//! and 0, ket and bra copies) and four legs per period `t`:
//! `i_t, i′_t` (site-0 state entering the boundary gate) and `o_t, o′_t`
//! (state leaving it).
//!
//! For a left-canonical tensor the exact IM follows from the boundary channel:
//!
//! `IM = Tr[E_{o_T o′_T} ∘ … ∘ E_{o_1 o′_1}(|j)(j′|)] · Π_t δ(i_t, i′_t)`
//!
//! with `E_{bb′}(X) = Σ_a A⁽ᵇ⁾A⁽ᵃ⁾ X (A⁽ᵇ′⁾A⁽ᵃ⁾)†`.
//!
//! The spatial transfer map rebuilds the IM two sites further out: it takes an
//! IM for site −2, adds sites −2 and −1 in their MPS initial state, applies
//! the even-layer gate on (−2, −1) and the boundary gate on (−1, 0) each
//! period, and traces the two sites at the end. The exact IM is a fixed point
//! of this map precisely when the solvable condition holds.

use crate::error::{ensure_capacity, Error, Result};
use crate::gates::TwoSiteGate;
use crate::mps::{check_left_canonical, MpsTensor};
use crate::numerics::{CMatrix, Tensor, C64, ONE, ZERO};

use super::check_solvable_left;

/// Default cap on dense IM intermediates (entries).
pub const DEFAULT_IM_CAP: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceMatrix {
    pub q: usize,
    pub chi: usize,
    pub tsteps: usize,
    /// Axes in [`InfluenceMatrix::labels`] order.
    pub tensor: Tensor,
}

fn leg(name: &str, t: usize) -> String {
    format!("{name}{t}")
}

fn canonical_labels(tsteps: usize) -> Vec<String> {
    let mut l = vec!["j".to_string(), "jp".to_string()];
    for t in 0..tsteps {
        for n in ["i", "ip", "o", "op"] {
            l.push(leg(n, t));
        }
    }
    l
}

impl InfluenceMatrix {
    fn from_tensor(q: usize, chi: usize, tsteps: usize, t: Tensor) -> Result<Self> {
        let labels = canonical_labels(tsteps);
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        Ok(InfluenceMatrix {
            q,
            chi,
            tsteps,
            tensor: t.permuted(&refs)?,
        })
    }

    pub fn labels(&self) -> Vec<String> {
        canonical_labels(self.tsteps)
    }

    /// Vector over the `4T` period legs after closing the bond with the
    /// normalized maximally correlated pair `(1/χ) Σ_j |j)(j|`.
    pub fn closed_vector(&self) -> Vec<C64> {
        let data = self.tensor.data();
        let block = data.len() / (self.chi * self.chi);
        let mut out = vec![ZERO; block];
        for j in 0..self.chi {
            let base = (j * self.chi + j) * block;
            for (o, x) in out.iter_mut().zip(&data[base..base + block]) {
                *o += *x / self.chi as f64;
            }
        }
        out
    }

    /// Max-norm distance between two IMs of the same shape.
    pub fn distance(&self, other: &InfluenceMatrix) -> Result<f64> {
        self.tensor.max_abs_diff(&other.tensor)
    }
}

fn require_left_canonical(a: &MpsTensor) -> Result<()> {
    let r = check_left_canonical(a);
    if r > 1e-10 {
        return Err(Error::Precondition {
            what: "MPS tensor must be left-canonical".into(),
            residual: r,
        });
    }
    Ok(())
}

fn pow(base: usize, e: usize) -> u128 {
    (base as u128).pow(e as u32)
}

/// Exact IM of the MPS bath over `tsteps` periods.
pub fn build_influence_matrix_dense(
    a: &MpsTensor,
    tsteps: usize,
    cap: usize,
) -> Result<InfluenceMatrix> {
    require_left_canonical(a)?;
    let (q, chi) = (a.q, a.chi);
    ensure_capacity(
        "dense influence matrix",
        pow(chi, 4) * pow(q, 4 * tsteps + 2),
        cap,
    )?;
    // C[m, n, j, jp, …]: ancilla ket m, bra n, initial bond j, jp.
    let mut id = vec![ZERO; chi.pow(4)];
    for m in 0..chi {
        for n in 0..chi {
            id[((m * chi + n) * chi + m) * chi + n] = ONE;
        }
    }
    let mut c = Tensor::new(&["m", "n", "j", "jp"], &[chi, chi, chi, chi], id)?;
    // AA[a, o, M, k] = (A[o] A[a])_{M k}
    let mut aa = Vec::with_capacity(q * q * chi * chi);
    for x in 0..q {
        for o in 0..q {
            let p = a.mats[o].matmul(&a.mats[x]);
            aa.extend_from_slice(p.data());
        }
    }
    let delta: Vec<C64> = (0..q * q)
        .map(|k| if k / q == k % q { ONE } else { ZERO })
        .collect();
    for t in 0..tsteps {
        let (o, op) = (leg("o", t), leg("op", t));
        let k = Tensor::new(&["a", &o, "M", "k"], &[q, q, chi, chi], aa.clone())?;
        let kc = Tensor::new(&["a2", &op, "N", "kp"], &[q, q, chi, chi], aa.clone())?.conj();
        c = c.contract(&k, &[("m", "k")])?;
        c = c.contract(&kc, &[("n", "kp")])?;
        c = c.trace_pair("a", "a2")?;
        c.rename("M", "m")?;
        c.rename("N", "n")?;
        let d = Tensor::new(&[&leg("i", t), &leg("ip", t)], &[q, q], delta.clone())?;
        c = c.outer(&d)?;
    }
    let c = c.trace_pair("m", "n")?;
    InfluenceMatrix::from_tensor(q, chi, tsteps, c)
}

/// IM of an empty bath: the bond is closed by `δ_{jj′}` and site 0 passes
/// through the boundary unchanged every period.
pub fn empty_influence_matrix(q: usize, chi: usize, tsteps: usize) -> Result<InfluenceMatrix> {
    let mut t = Tensor::new(
        &["j", "jp"],
        &[chi, chi],
        CMatrix::identity(chi).into_data(),
    )?;
    // δ(i, o) δ(i′, o′) over labels (i, ip, o, op)
    let mut pass = vec![ZERO; q.pow(4)];
    for i in 0..q {
        for ip in 0..q {
            pass[((i * q + ip) * q + i) * q + ip] = ONE;
        }
    }
    for s in 0..tsteps {
        let p = Tensor::new(
            &[&leg("i", s), &leg("ip", s), &leg("o", s), &leg("op", s)],
            &[q, q, q, q],
            pass.clone(),
        )?;
        t = t.outer(&p)?;
    }
    InfluenceMatrix::from_tensor(q, chi, tsteps, t)
}

/// One application of the two-site spatial transfer map.
pub fn spatial_transfer(
    u: &TwoSiteGate,
    a: &MpsTensor,
    im: &InfluenceMatrix,
    cap: usize,
) -> Result<InfluenceMatrix> {
    if u.q != a.q || im.q != a.q || im.chi != a.chi {
        return Err(Error::Argument(
            "gate, MPS and IM dimensions disagree".into(),
        ));
    }
    let (q, chi, tsteps) = (a.q, a.chi, im.tsteps);
    ensure_capacity(
        "spatial transfer intermediate",
        pow(chi, 2) * pow(q, 4 * tsteps + 4),
        cap,
    )?;
    // Old IM with its legs renamed out of the way.
    let mut x = im.tensor.clone();
    x.rename("j", "L")?;
    x.rename("jp", "Lp")?;
    for t in 0..tsteps {
        for n in ["i", "ip", "o", "op"] {
            x.rename(&leg(n, t), &format!("x{}", leg(n, t)))?;
        }
    }
    // P[l, s2, s1, j] = (A[s2] A[s1])_{l j}
    let mut pd = Vec::with_capacity(chi * q * q * chi);
    for l in 0..chi {
        for s2 in 0..q {
            for s1 in 0..q {
                let m = a.mats[s2].matmul(&a.mats[s1]);
                pd.extend_from_slice(m.row(l));
            }
        }
    }
    let p = Tensor::new(&["l", "s2", "s1", "j"], &[chi, q, q, chi], pd.clone())?;
    let pc = Tensor::new(&["lp", "s2p", "s1p", "jp"], &[chi, q, q, chi], pd)?.conj();
    x = x.contract(&p, &[("L", "l")])?;
    x = x.contract(&pc, &[("Lp", "lp")])?;

    let ud = u.matrix.data().to_vec();
    let shape = [q, q, q, q];
    for t in 0..tsteps {
        // even layer: gate on (−2, −1)
        let g = Tensor::new(&["n2", "n1", "a2", "a1"], &shape, ud.clone())?;
        x = x.contract(&g, &[("s2", "a2"), ("s1", "a1")])?;
        x.rename("n2", "s2")?;
        x.rename("n1", "s1")?;
        let g = Tensor::new(&["n2p", "n1p", "a2p", "a1p"], &shape, ud.clone())?.conj();
        x = x.contract(&g, &[("s2p", "a2p"), ("s1p", "a1p")])?;
        x.rename("n2p", "s2p")?;
        x.rename("n1p", "s1p")?;
        // odd layer, far side: site −2 passes through the old IM
        x = x.trace_pair("s2", &format!("x{}", leg("i", t)))?;
        x.rename(&format!("x{}", leg("o", t)), "s2")?;
        x = x.trace_pair("s2p", &format!("x{}", leg("ip", t)))?;
        x.rename(&format!("x{}", leg("op", t)), "s2p")?;
        // odd layer, near side: boundary gate on (−1, 0)
        let g = Tensor::new(&["z", &leg("o", t), "y", &leg("i", t)], &shape, ud.clone())?;
        x = x.contract(&g, &[("s1", "y")])?;
        x.rename("z", "s1")?;
        let g = Tensor::new(
            &["zp", &leg("op", t), "yp", &leg("ip", t)],
            &shape,
            ud.clone(),
        )?
        .conj();
        x = x.contract(&g, &[("s1p", "yp")])?;
        x.rename("zp", "s1p")?;
    }
    let x = x.trace_pair("s2", "s2p")?.trace_pair("s1", "s1p")?;
    InfluenceMatrix::from_tensor(q, chi, tsteps, x)
}

/// `‖T_spatial(IM) − IM‖_max` for the exact IM, compared bond-to-bond.
///
/// No solvability precondition is imposed, so non-solvable controls return
/// their (large) residual; see [`verify_im_fixed_point_checked`].
pub fn verify_im_fixed_point(
    u: &TwoSiteGate,
    a: &MpsTensor,
    tsteps: usize,
    cap: usize,
) -> Result<f64> {
    let im = build_influence_matrix_dense(a, tsteps, cap)?;
    let next = spatial_transfer(u, a, &im, cap)?;
    next.distance(&im)
}

/// As [`verify_im_fixed_point`], but first requires the solvable condition
/// (residual below `1e-8`).
pub fn verify_im_fixed_point_checked(
    u: &TwoSiteGate,
    a: &MpsTensor,
    tsteps: usize,
    cap: usize,
) -> Result<f64> {
    let r = check_solvable_left(u, a)?;
    if r > 1e-8 {
        return Err(Error::Precondition {
            what: "gate does not satisfy the solvable condition".into(),
            residual: r,
        });
    }
    verify_im_fixed_point(u, a, tsteps, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{haar_gate, sample};
    use crate::mps::{basis_product_mps, cluster_tensor};
    use crate::numerics::Rng;

    #[test]
    fn empty_horizon_is_scalar_one() {
        let im = build_influence_matrix_dense(&cluster_tensor(), 0, DEFAULT_IM_CAP).unwrap();
        let v = im.closed_vector();
        assert_eq!(v.len(), 1);
        assert!((v[0] - ONE).norm() < 1e-15);
    }

    #[test]
    fn product_state_gives_reset_pattern() {
        let im = build_influence_matrix_dense(&basis_product_mps(2, 0).unwrap(), 2, DEFAULT_IM_CAP)
            .unwrap();
        let v = im.closed_vector();
        // legs per period (i, ip, o, op): δ(i, ip) |0⟩⟨0|(o, op)
        for (idx, z) in v.iter().enumerate() {
            let mut k = idx;
            let mut expect = 1.0;
            for _ in 0..2 {
                let op = k % 2;
                let o = (k / 2) % 2;
                let ip = (k / 4) % 2;
                let i = (k / 8) % 2;
                k /= 16;
                if !(i == ip && o == 0 && op == 0) {
                    expect = 0.0;
                }
            }
            assert!((z.re - expect).abs() < 1e-15 && z.im.abs() < 1e-15);
        }
    }

    #[test]
    fn fixed_point_for_solvable_pairs() {
        let mut rng = Rng::new(12);
        let c = cluster_tensor();
        let p0 = basis_product_mps(2, 0).unwrap();
        for t in 1..=2 {
            let g = sample::q2_qt2(&mut rng);
            assert!(verify_im_fixed_point_checked(&g, &c, t, DEFAULT_IM_CAP).unwrap() < 1e-10);
            let g = sample::q2_qt1(&mut rng);
            assert!(verify_im_fixed_point(&g, &p0, t, DEFAULT_IM_CAP).unwrap() < 1e-10);
        }
        let h = haar_gate(2, &mut rng);
        assert!(verify_im_fixed_point(&h, &p0, 2, DEFAULT_IM_CAP).unwrap() > 1e-3);
        assert!(matches!(
            verify_im_fixed_point_checked(&h, &p0, 2, DEFAULT_IM_CAP),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn iteration_from_empty_bath_converges() {
        let mut rng = Rng::new(3);
        let c = cluster_tensor();
        let g = sample::q2_qt2(&mut rng);
        let exact = build_influence_matrix_dense(&c, 2, DEFAULT_IM_CAP).unwrap();
        let mut im = empty_influence_matrix(2, 2, 2).unwrap();
        for _ in 0..2 {
            im = spatial_transfer(&g, &c, &im, DEFAULT_IM_CAP).unwrap();
        }
        assert!(im.distance(&exact).unwrap() < 1e-12);
    }

    #[test]
    fn capacity_is_enforced() {
        let c = cluster_tensor();
        assert!(matches!(
            build_influence_matrix_dense(&c, 6, 1 << 20),
            Err(Error::Capacity { .. })
        ));
    }
}
