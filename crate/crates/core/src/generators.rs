//! Antisymmetric generators of SO(N) and their tensor products.
//!
//! Each generator is indexed by a pair `(i, j)` with `i < j` and has exactly
//! two nonzero entries: `+1` at `(i, j)` and `-1` at `(j, i)`. Pairs are
//! enumerated lexicographically. A product generator `S = L_left (x) L_right`
//! is real symmetric with exactly four nonzero entries, which is what the
//! concurrence machinery exploits.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// The `N(N-1)/2` antisymmetric generators of SO(N).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    dim: usize,
    pairs: Vec<(usize, usize)>,
}

impl GeneratorSet {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Invalid(format!(
                "SO(N) generators need N >= 2, got {dim}"
            )));
        }
        let mut pairs = Vec::with_capacity(dim * (dim - 1) / 2);
        for i in 0..dim {
            for j in (i + 1)..dim {
                pairs.push((i, j));
            }
        }
        Ok(Self { dim, pairs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Dense matrix of the generator at `idx`.
    pub fn matrix(&self, idx: usize) -> DMatrix<f64> {
        let (i, j) = self.pairs[idx];
        let mut m = DMatrix::zeros(self.dim, self.dim);
        m[(i, j)] = 1.0;
        m[(j, i)] = -1.0;
        m
    }
}

/// One `L_left (x) L_right` term, stored by its index pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductGenerator {
    pub left: (usize, usize),
    pub right: (usize, usize),
}

impl ProductGenerator {
    /// The four nonzero entries `(row, col, value)` of the product in the
    /// grouped two-party index space (left slot slow, right slot fast).
    pub fn support(&self, right_dim: usize) -> [(usize, usize, f64); 4] {
        let (i1, j1) = self.left;
        let (i2, j2) = self.right;
        let u = i1 * right_dim + i2;
        let v = j1 * right_dim + j2;
        let w = i1 * right_dim + j2;
        let x = j1 * right_dim + i2;
        [(u, v, 1.0), (v, u, 1.0), (w, x, -1.0), (x, w, -1.0)]
    }

    /// Grouped indices `(u, v, w, x)` such that the product generator is
    /// `+1` at `(u,v),(v,u)` and `-1` at `(w,x),(x,w)`.
    pub fn corners(&self, right_dim: usize) -> (usize, usize, usize, usize) {
        let (i1, j1) = self.left;
        let (i2, j2) = self.right;
        (
            i1 * right_dim + i2,
            j1 * right_dim + j2,
            i1 * right_dim + j2,
            j1 * right_dim + i2,
        )
    }
}

/// All products `L_alpha (x) L_beta`, left index slow, right index fast.
#[derive(Debug, Clone)]
pub struct ProductGeneratorSet {
    left: GeneratorSet,
    right: GeneratorSet,
    items: Vec<ProductGenerator>,
}

impl ProductGeneratorSet {
    pub fn new(left_dim: usize, right_dim: usize) -> Result<Self> {
        let left = GeneratorSet::new(left_dim)?;
        let right = GeneratorSet::new(right_dim)?;
        let mut items = Vec::with_capacity(left.len() * right.len());
        for &l in left.pairs() {
            for &r in right.pairs() {
                items.push(ProductGenerator { left: l, right: r });
            }
        }
        Ok(Self { left, right, items })
    }

    pub fn left(&self) -> &GeneratorSet {
        &self.left
    }

    pub fn right(&self) -> &GeneratorSet {
        &self.right
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ProductGenerator> {
        self.items.iter()
    }

    pub fn get(&self, idx: usize) -> &ProductGenerator {
        &self.items[idx]
    }

    /// Dense matrix of the product generator at `idx`, side
    /// `left_dim * right_dim`.
    pub fn matrix(&self, idx: usize) -> DMatrix<f64> {
        let side = self.left.dim() * self.right.dim();
        let mut m = DMatrix::zeros(side, side);
        for (r, c, val) in self.items[idx].support(self.right.dim()) {
            m[(r, c)] = val;
        }
        m
    }
}
