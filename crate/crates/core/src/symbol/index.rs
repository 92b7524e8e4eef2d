use ndarray::Array2;

/// Ordering of the independent components of a symmetric 2-tensor:
/// `h_11, h_12, …, h_1n, h_22, h_23, …, h_nn` (0-based internally).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMap {
    dim: usize,
    pairs: Vec<(usize, usize)>,
    lookup: Array2<usize>,
}

impl IndexMap {
    pub fn new(dim: usize) -> Self {
        let mut pairs = Vec::with_capacity(dim * (dim + 1) / 2);
        let mut lookup = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in i..dim {
                lookup[[i, j]] = pairs.len();
                lookup[[j, i]] = pairs.len();
                pairs.push((i, j));
            }
        }
        Self { dim, pairs, lookup }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `N = n(n+1)/2`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair(&self, a: usize) -> (usize, usize) {
        self.pairs[a]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Position of `h_ij` (order of `i`, `j` is irrelevant).
    pub fn index(&self, i: usize, j: usize) -> usize {
        self.lookup[[i, j]]
    }

    /// Symmetric tensor with `h_ab = h_ba = 1` for the pair at position `b`.
    pub fn basis_tensor(&self, b: usize) -> Array2<f64> {
        let (i, j) = self.pairs[b];
        let mut h = Array2::zeros((self.dim, self.dim));
        h[[i, j]] = 1.0;
        h[[j, i]] = 1.0;
        h
    }

    pub fn to_vector(&self, h: &Array2<f64>) -> Vec<f64> {
        self.pairs.iter().map(|&(i, j)| h[[i, j]]).collect()
    }

    pub fn to_tensor(&self, v: &[f64]) -> Array2<f64> {
        let mut h = Array2::zeros((self.dim, self.dim));
        for (&(i, j), x) in self.pairs.iter().zip(v) {
            h[[i, j]] = *x;
            h[[j, i]] = *x;
        }
        h
    }

    /// 1-based label such as `h23`.
    pub fn label(&self, a: usize) -> String {
        let (i, j) = self.pairs[a];
        format!("h{}{}", i + 1, j + 1)
    }
}
