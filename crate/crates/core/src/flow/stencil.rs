//! Fourth-order central differences on periodic tensor-product grids.

use crate::error::{Error, Result};

const D1_OFFSETS: [isize; 4] = [-2, -1, 1, 2];
const D1_WEIGHTS: [f64; 4] = [1.0, -8.0, 8.0, -1.0];
const D2_OFFSETS: [isize; 5] = [-2, -1, 0, 1, 2];
const D2_WEIGHTS: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];

/// A periodic grid on `Π_a [0, L_a)` with `m_a` nodes per axis, row-major node order
/// (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    shape: Vec<usize>,
    lengths: Vec<f64>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(shape: Vec<usize>, lengths: Vec<f64>) -> Result<Self> {
        if shape.len() != lengths.len() {
            return Err(Error::DimensionMismatch { expected: shape.len(), found: lengths.len() });
        }
        if let Some(m) = shape.iter().find(|&&m| m < 5) {
            return Err(Error::InvalidParameter(format!("grid needs at least 5 nodes per axis, got {m}")));
        }
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidParameter("grid lengths must be positive".into()));
        }
        let mut strides = vec![1; shape.len()];
        for a in (0..shape.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        Ok(Self { shape, lengths, strides })
    }

    /// `[0, 2π)^n` with the given node counts.
    pub fn torus(shape: Vec<usize>) -> Result<Self> {
        let n = shape.len();
        Self::new(shape, vec![std::f64::consts::TAU; n])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.shape[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(f64::INFINITY, f64::min)
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        self.strides.iter().zip(&self.shape).map(|(s, m)| (node / s) % m).collect()
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        self.multi_index(node).iter().enumerate().map(|(a, &i)| i as f64 * self.spacing(a)).collect()
    }

    /// Node reached from `node` by `offset` steps along `axis`, wrapping around.
    pub fn shift(&self, node: usize, axis: usize, offset: isize) -> usize {
        let m = self.shape[axis] as isize;
        let i = ((node / self.strides[axis]) % self.shape[axis]) as isize;
        let j = (i + offset).rem_euclid(m);
        (node as isize + (j - i) * self.strides[axis] as isize) as usize
    }

    /// `∂_axis` of component `comp` of a node-major field with `width` components.
    pub fn d1(&self, field: &[f64], width: usize, comp: usize, node: usize, axis: usize) -> f64 {
        let h = self.spacing(axis);
        let mut s = 0.0;
        for (o, w) in D1_OFFSETS.iter().zip(D1_WEIGHTS) {
            s += w * field[self.shift(node, axis, *o) * width + comp];
        }
        s / (12.0 * h)
    }

    /// `∂_a ∂_b`; the pure second derivative for `a = b`, a product of two
    /// first-derivative stencils otherwise.
    pub fn d2(&self, field: &[f64], width: usize, comp: usize, node: usize, a: usize, b: usize) -> f64 {
        if a == b {
            let h = self.spacing(a);
            let mut s = 0.0;
            for (o, w) in D2_OFFSETS.iter().zip(D2_WEIGHTS) {
                s += w * field[self.shift(node, a, *o) * width + comp];
            }
            return s / (12.0 * h * h);
        }
        let mut s = 0.0;
        for (oa, wa) in D1_OFFSETS.iter().zip(D1_WEIGHTS) {
            let na = self.shift(node, a, *oa);
            for (ob, wb) in D1_OFFSETS.iter().zip(D1_WEIGHTS) {
                s += wa * wb * field[self.shift(na, b, *ob) * width + comp];
            }
        }
        s / (144.0 * self.spacing(a) * self.spacing(b))
    }
}
