//! Dense complex linear algebra and sampling primitives.

mod linalg;
mod matrix;
mod rng;
pub mod tensor;

pub use linalg::{determinant, eigenvalues, eigh, eigvalsh, qr, rank, singular_values};
pub use matrix::{complex_vec, CMatrix, C64, I, ONE, ZERO};
pub use rng::Rng;
pub use tensor::Tensor;

use crate::error::{Error, Result};
use crate::exec::Exec;

/// Default per-axis limit for [`kron`].
pub const KRON_AXIS_CAP: usize = 1 << 18;

/// Default absolute tolerance for structural checks.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Kronecker product with the default per-axis cap.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.kron_capped(b, KRON_AXIS_CAP)
}

/// Kronecker product of a list of factors (empty list gives `[[1]]`).
pub fn kron_all(factors: &[CMatrix]) -> Result<CMatrix> {
    factors
        .iter()
        .try_fold(CMatrix::identity(1), |acc, f| kron(&acc, f))
}

/// Reduced matrix on the factors listed in `keep` (any order; output follows
/// ascending factor order).
pub fn partial_trace(rho: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    if !rho.is_square() {
        return Err(Error::Shape(format!(
            "partial trace of {:?} matrix",
            rho.shape()
        )));
    }
    let total: usize = dims.iter().product();
    if total != rho.rows() {
        return Err(Error::Shape(format!(
            "factor dims {dims:?} multiply to {total}, matrix is {}",
            rho.rows()
        )));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Argument(format!(
            "keep index {bad} out of range for {} factors",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let dk: usize = keep.iter().map(|&i| dims[i]).product();
    let dt: usize = traced.iter().map(|&i| dims[i]).product();

    // Row-major strides of the full index.
    let mut stride = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * dims[i + 1];
    }
    let offsets = |which: &[usize], count: usize| -> Vec<usize> {
        (0..count)
            .map(|mut flat| {
                let mut off = 0;
                for &f in which.iter().rev() {
                    off += (flat % dims[f]) * stride[f];
                    flat /= dims[f];
                }
                off
            })
            .collect()
    };
    let ko = offsets(&keep, dk);
    let to = offsets(&traced, dt);

    let mut out = CMatrix::zeros(dk, dk);
    for r in 0..dk {
        for c in 0..dk {
            let mut s = ZERO;
            for t in &to {
                s += rho[(ko[r] + t, ko[c] + t)];
            }
            out[(r, c)] = s;
        }
    }
    Ok(out)
}

/// Realignment `U^R[(a,b),(c,d)] = U[(a,c),(b,d)]` of a `q²×q²` matrix.
pub fn reshuffle(u: &CMatrix, q: usize) -> Result<CMatrix> {
    if u.shape() != (q * q, q * q) {
        return Err(Error::Shape(format!(
            "reshuffle needs a {0}x{0} matrix, got {1:?}",
            q * q,
            u.shape()
        )));
    }
    Ok(CMatrix::from_fn(q * q, q * q, |r, c| {
        let (a, b) = (r / q, r % q);
        let (cc, d) = (c / q, c % q);
        u[(a * q + cc, b * q + d)]
    }))
}

/// `exp(−i h)` for Hermitian `h`, through its eigendecomposition.
pub fn expm_hermitian_generator(h: &CMatrix) -> Result<CMatrix> {
    let herm = h.hermiticity_residual();
    if herm > 1e-10 {
        return Err(Error::Argument(format!(
            "generator is not Hermitian (residual {herm:e})"
        )));
    }
    let (vals, vecs) = eigh(h)?;
    let phases: Vec<C64> = vals.iter().map(|&l| C64::from_polar(1.0, -l)).collect();
    let n = h.rows();
    Ok(CMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| vecs[(i, k)] * phases[k] * vecs[(j, k)].conj())
            .sum()
    }))
}

/// Eigenvalues of a density matrix after validating positivity; entries in
/// `[−1e-10, 0)` are clamped to zero, anything below `−1e-6` is an error.
fn density_spectrum(rho: &CMatrix) -> Result<Vec<f64>> {
    let vals = eigvalsh(rho)?;
    if let Some(&min) = vals.first() {
        if min < -1e-6 {
            return Err(Error::Positivity(min));
        }
    }
    Ok(vals.into_iter().map(|l| l.clamp(0.0, 1.0)).collect())
}

/// `−Tr ρ ln ρ` in nats, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &CMatrix) -> Result<f64> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::Argument(format!("density matrix has trace {tr}")));
    }
    let vals = density_spectrum(rho)?;
    Ok(vals
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum())
}

/// `Tr ρⁿ` by repeated multiplication.
pub fn renyi_trace(rho: &CMatrix, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Argument(format!("Rényi index must be ≥ 2, got {n}")));
    }
    if !rho.is_square() {
        return Err(Error::Shape("Rényi trace of a non-square matrix".into()));
    }
    let mut p = rho.clone();
    for _ in 1..n - 1 {
        p = p.matmul(rho);
    }
    // Tr(P ρ) without forming the last product.
    let d = rho.rows();
    let mut s = ZERO;
    for i in 0..d {
        for k in 0..d {
            s += p[(i, k)] * rho[(k, i)];
        }
    }
    if s.im.abs() > 1e-10 * s.re.abs().max(1.0) {
        return Err(Error::Argument(format!(
            "Tr ρ^{n} has imaginary part {:e}; input is not Hermitian",
            s.im
        )));
    }
    Ok(s.re)
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary(dim: usize, rng: &mut Rng) -> CMatrix {
    if dim == 0 {
        return CMatrix::zeros(0, 0);
    }
    let z = CMatrix::from_fn(dim, dim, |_, _| ZERO);
    let mut z = z;
    for v in z.data_mut() {
        *v = rng.complex_normal();
    }
    let (q, r) = qr(&z);
    let phase: Vec<C64> = (0..dim)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                ONE
            }
        })
        .collect();
    CMatrix::from_fn(dim, dim, |i, j| q[(i, j)] * phase[j])
}

/// Haar unitary rescaled to unit determinant.
pub fn haar_special_unitary(dim: usize, rng: &mut Rng) -> CMatrix {
    let u = haar_unitary(dim, rng);
    if dim == 0 {
        return u;
    }
    let det = determinant(&u);
    let fix = C64::from_polar(1.0, -det.arg() / dim as f64);
    u.scale(fix)
}

/// Apply `op` (a `mid×mid` matrix) to the middle factor of a flat array
/// viewed as `pre × mid × post`: `x[p,·,s] ← op · x[p,·,s]`.
///
/// This is the workhorse for gates on state vectors and, with the column
/// index folded into `post` or `pre`, for one-sided products on density
/// matrices.
pub fn apply_local(data: &mut [C64], pre: usize, post: usize, op: &CMatrix, exec: Exec) {
    let mid = op.rows();
    debug_assert_eq!(op.cols(), mid);
    assert_eq!(data.len(), pre * mid * post, "apply_local shape mismatch");
    let block = mid * post;
    let exec = exec.worth_it(data.len() * mid);
    if pre >= 4 || post == 1 {
        exec.for_each_chunk_mut(data, block, |_, chunk| {
            let mut tmp = vec![ZERO; block];
            local_kernel(chunk, &mut tmp, op, post, 0, post);
            chunk.copy_from_slice(&tmp);
        });
    } else {
        // Few outer blocks: split each block along `post` instead.
        let tile = post.div_ceil(16).max(1);
        for chunk in data.chunks_mut(block) {
            let src = chunk.to_vec();
            let ntiles = post.div_ceil(tile);
            let tiles = exec.map_range(ntiles, |t| {
                let lo = t * tile;
                let hi = (lo + tile).min(post);
                let mut out = vec![ZERO; mid * (hi - lo)];
                for r in 0..mid {
                    let orow = &mut out[r * (hi - lo)..(r + 1) * (hi - lo)];
                    for m in 0..mid {
                        let w = op[(r, m)];
                        if w == ZERO {
                            continue;
                        }
                        let srow = &src[m * post + lo..m * post + hi];
                        for (o, s) in orow.iter_mut().zip(srow) {
                            *o += w * s;
                        }
                    }
                }
                out
            });
            for (t, out) in tiles.into_iter().enumerate() {
                let lo = t * tile;
                let w = out.len() / mid;
                for r in 0..mid {
                    chunk[r * post + lo..r * post + lo + w]
                        .copy_from_slice(&out[r * w..(r + 1) * w]);
                }
            }
        }
    }
}

fn local_kernel(src: &[C64], out: &mut [C64], op: &CMatrix, post: usize, lo: usize, hi: usize) {
    let mid = op.rows();
    for r in 0..mid {
        let orow = &mut out[r * post + lo..r * post + hi];
        for m in 0..mid {
            let w = op[(r, m)];
            if w == ZERO {
                continue;
            }
            let srow = &src[m * post + lo..m * post + hi];
            for (o, s) in orow.iter_mut().zip(srow) {
                *o += w * s;
            }
        }
    }
}

/// Pauli matrices σ¹, σ², σ³.
pub fn pauli(alpha: usize) -> CMatrix {
    match alpha {
        0 => CMatrix::identity(2),
        1 => CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
        2 => CMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap(),
        3 => CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]),
        _ => panic!("Pauli index {alpha} out of range"),
    }
}
