//! Small dense tensors with named axes.
//!
//! Only what the influence-matrix contractions need: permutation, pairwise
//! contraction via matrix multiplication, partial traces and renaming.

use super::matrix::{CMatrix, C64, ZERO};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    labels: Vec<String>,
    shape: Vec<usize>,
    data: Vec<C64>,
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

impl Tensor {
    pub fn new(labels: &[&str], shape: &[usize], data: Vec<C64>) -> Result<Self> {
        if labels.len() != shape.len() {
            return Err(Error::Shape("one label per axis required".into()));
        }
        if shape.iter().product::<usize>() != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} does not hold {} entries",
                data.len()
            )));
        }
        let mut seen = labels.to_vec();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != labels.len() {
            return Err(Error::Argument(format!("duplicate labels in {labels:?}")));
        }
        Ok(Tensor {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn scalar(z: C64) -> Self {
        Tensor {
            labels: vec![],
            shape: vec![],
            data: vec![z],
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn axis(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Argument(format!("no axis labelled {label:?}")))
    }

    pub fn dim(&self, label: &str) -> Result<usize> {
        Ok(self.shape[self.axis(label)?])
    }

    pub fn rename(&mut self, from: &str, to: &str) -> Result<()> {
        if from != to && self.labels.iter().any(|l| l == to) {
            return Err(Error::Argument(format!("label {to:?} already present")));
        }
        let a = self.axis(from)?;
        self.labels[a] = to.to_string();
        Ok(())
    }

    pub fn conj(&self) -> Tensor {
        Tensor {
            labels: self.labels.clone(),
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Reorder axes to the given label order.
    pub fn permuted(&self, order: &[&str]) -> Result<Tensor> {
        if order.len() != self.labels.len() {
            return Err(Error::Argument(format!(
                "permutation {order:?} does not cover {:?}",
                self.labels
            )));
        }
        let perm: Vec<usize> = order.iter().map(|l| self.axis(l)).collect::<Result<_>>()?;
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let old_strides = strides(&self.shape);
        let src_strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; new_shape.len()];
        let mut off = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[off]);
            for ax in (0..idx.len()).rev() {
                idx[ax] += 1;
                off += src_strides[ax];
                if idx[ax] < new_shape[ax] {
                    break;
                }
                off -= src_strides[ax] * new_shape[ax];
                idx[ax] = 0;
            }
        }
        Ok(Tensor {
            labels: order.iter().map(|s| s.to_string()).collect(),
            shape: new_shape,
            data,
        })
    }

    /// Contract the listed axis pairs `(self_label, other_label)`.
    /// Result axes: remaining axes of `self`, then remaining axes of `other`.
    pub fn contract(&self, other: &Tensor, pairs: &[(&str, &str)]) -> Result<Tensor> {
        let mine: Vec<&str> = pairs.iter().map(|p| p.0).collect();
        let theirs: Vec<&str> = pairs.iter().map(|p| p.1).collect();
        for (a, b) in pairs {
            if self.dim(a)? != other.dim(b)? {
                return Err(Error::Shape(format!("cannot contract {a:?} with {b:?}")));
            }
        }
        let keep_a: Vec<&str> = self
            .labels
            .iter()
            .map(String::as_str)
            .filter(|l| !mine.contains(l))
            .collect();
        let keep_b: Vec<&str> = other
            .labels
            .iter()
            .map(String::as_str)
            .filter(|l| !theirs.contains(l))
            .collect();
        for l in &keep_b {
            if keep_a.contains(l) {
                return Err(Error::Argument(format!("label {l:?} would be duplicated")));
            }
        }
        let a = self.permuted(&[keep_a.as_slice(), mine.as_slice()].concat())?;
        let b = other.permuted(&[theirs.as_slice(), keep_b.as_slice()].concat())?;
        let inner: usize = mine.iter().map(|l| self.dim(l).unwrap()).product();
        let ra = a.data.len() / inner.max(1);
        let cb = b.data.len() / inner.max(1);
        let ma = CMatrix::from_vec(ra, inner, a.data)?;
        let mb = CMatrix::from_vec(inner, cb, b.data)?;
        let prod = ma.matmul(&mb);
        let labels: Vec<&str> = keep_a.iter().chain(keep_b.iter()).copied().collect();
        let shape: Vec<usize> = a.shape[..keep_a.len()]
            .iter()
            .chain(b.shape[theirs.len()..].iter())
            .copied()
            .collect();
        Tensor::new(&labels, &shape, prod.into_data())
    }

    /// Tensor product; labels must be disjoint.
    pub fn outer(&self, other: &Tensor) -> Result<Tensor> {
        self.contract(other, &[])
    }

    /// Sum over the diagonal of two equally sized axes.
    pub fn trace_pair(&self, a: &str, b: &str) -> Result<Tensor> {
        let (da, db) = (self.dim(a)?, self.dim(b)?);
        if da != db {
            return Err(Error::Shape(format!(
                "trace over {a:?}({da}) and {b:?}({db})"
            )));
        }
        let rest: Vec<&str> = self
            .labels
            .iter()
            .map(String::as_str)
            .filter(|l| *l != a && *l != b)
            .collect();
        let p = self.permuted(&[rest.as_slice(), &[a, b]].concat())?;
        let block = da * da;
        let n_rest = p.data.len() / block.max(1);
        let mut data = vec![ZERO; n_rest];
        for (r, out) in data.iter_mut().enumerate() {
            let base = r * block;
            for k in 0..da {
                *out += p.data[base + k * da + k];
            }
        }
        Tensor::new(&rest, &p.shape[..rest.len()], data)
    }

    /// Max-norm difference after aligning `other` to this axis order.
    pub fn max_abs_diff(&self, other: &Tensor) -> Result<f64> {
        let order: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        let o = other.permuted(&order)?;
        if o.shape != self.shape {
            return Err(Error::Shape("tensor shapes differ".into()));
        }
        Ok(self
            .data
            .iter()
            .zip(&o.data)
            .fold(0.0, |m, (x, y)| m.max((x - y).norm())))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}
