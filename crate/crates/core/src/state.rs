//! State representations and tensor-index bookkeeping.
//!
//! Multi-party states are stored densely with a row-major index convention:
//! the linear index of the basis state `|i_0 i_1 ... i_{n-1}>` is
//! `sum_k i_k * prod_{l>k} d_l`, i.e. the last party varies fastest.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Max elementwise deviation tolerated when checking Hermiticity.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Tolerance on |trace - 1| for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Tolerance on |norm - 1| for pure-state amplitude vectors.
pub const NORM_TOL: f64 = 1e-10;
/// Most negative eigenvalue tolerated before a matrix is rejected as non-PSD.
pub const PSD_TOL: f64 = 1e-10;
/// Default eigenvalue truncation threshold, relative to the trace.
pub const RANK_EPS: f64 = 1e-12;

fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d < 2) {
        return Err(Error::InvalidDims(dims.to_vec()));
    }
    Ok(())
}

fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// `strides[k] = prod_{l>k} d_l`, so `index = sum_k digit[k] * strides[k]`.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn index_to_digits(mut index: usize, dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut digits = vec![0usize; dims.len()];
    for k in 0..dims.len() {
        digits[k] = index / strides[k];
        index %= strides[k];
    }
    digits
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidPermutation {
            perm: perm.to_vec(),
            n_parties: n,
        });
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation {
                perm: perm.to_vec(),
                n_parties: n,
            });
        }
        seen[p] = true;
    }
    Ok(())
}

/// A bipartition of the parties into a focus set and the rest.
///
/// Both sides are kept sorted ascending; the grouped object has dimensions
/// `(focus_dim, rest_dim)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    focus: Vec<usize>,
    rest: Vec<usize>,
    focus_dim: usize,
    rest_dim: usize,
}

impl Bipartition {
    pub fn new(focus: &[usize], dims: &[usize]) -> Result<Self> {
        validate_dims(dims)?;
        let n = dims.len();
        let mut sorted: Vec<usize> = focus.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != focus.len() || sorted.iter().any(|&p| p >= n) {
            return Err(Error::InvalidParties {
                indices: focus.to_vec(),
                n_parties: n,
            });
        }
        if sorted.is_empty() || sorted.len() == n {
            return Err(Error::EmptyBipartition {
                focus: focus.to_vec(),
                n_parties: n,
            });
        }
        let rest: Vec<usize> = (0..n).filter(|p| !sorted.contains(p)).collect();
        let focus_dim = sorted.iter().map(|&p| dims[p]).product();
        let rest_dim = rest.iter().map(|&p| dims[p]).product();
        Ok(Self {
            focus: sorted,
            rest,
            focus_dim,
            rest_dim,
        })
    }

    pub fn focus(&self) -> &[usize] {
        &self.focus
    }

    pub fn rest(&self) -> &[usize] {
        &self.rest
    }

    pub fn focus_dim(&self) -> usize {
        self.focus_dim
    }

    pub fn rest_dim(&self) -> usize {
        self.rest_dim
    }

    /// Party permutation that puts the focus first, each side in ascending
    /// order: `perm[t]` is the original index of the party in slot `t`.
    pub fn permutation(&self) -> Vec<usize> {
        let mut perm = self.focus.clone();
        perm.extend_from_slice(&self.rest);
        perm
    }
}

/// A normalized pure state of one or more parties.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        validate_dims(&dims)?;
        let expected = total_dim(&dims);
        if amplitudes.len() != expected {
            return Err(Error::LengthMismatch {
                dims,
                expected,
                got: amplitudes.len(),
            });
        }
        let amplitudes = DVector::from_vec(amplitudes);
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized {
                norm,
                tol: NORM_TOL,
            });
        }
        Ok(Self { dims, amplitudes })
    }

    /// Builds a state from unnormalized amplitudes by rescaling them.
    pub fn from_unnormalized(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        validate_dims(&dims)?;
        let expected = total_dim(&dims);
        if amplitudes.len() != expected {
            return Err(Error::LengthMismatch {
                dims,
                expected,
                got: amplitudes.len(),
            });
        }
        let mut v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized {
                norm,
                tol: NORM_TOL,
            });
        }
        v /= C64::new(norm, 0.0);
        Ok(Self {
            dims,
            amplitudes: v,
        })
    }

    /// `|b_0 b_1 ... b_{n-1}>` computational basis state.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        validate_dims(&dims)?;
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(&b, &d)| b >= d) {
            return Err(Error::InvalidParties {
                indices: digits.to_vec(),
                n_parties: dims.len(),
            });
        }
        let s = strides(&dims);
        let index: usize = digits.iter().zip(&s).map(|(&b, &st)| b * st).sum();
        let mut amps = vec![C64::ZERO; total_dim(&dims)];
        amps[index] = C64::ONE;
        Ok(Self {
            dims,
            amplitudes: DVector::from_vec(amps),
        })
    }

    /// `(|0...0> + |1...1>)/sqrt(2)` on `n` qubits.
    pub fn ghz(n: usize) -> Self {
        assert!(n >= 2, "GHZ needs at least two parties");
        let dim = 1usize << n;
        let mut amps = vec![C64::ZERO; dim];
        let x = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[0] = x;
        amps[dim - 1] = x;
        Self {
            dims: vec![2; n],
            amplitudes: DVector::from_vec(amps),
        }
    }

    /// Single-excitation state `sum_k c_k |0..1..0>` on `coeffs.len()` qubits,
    /// with the excitation of term `k` on qubit `k`. Coefficients are
    /// normalized.
    pub fn w_state(coeffs: &[C64]) -> Result<Self> {
        let n = coeffs.len();
        if n < 2 {
            return Err(Error::InvalidDims(vec![2; n]));
        }
        let dim = 1usize << n;
        let mut amps = vec![C64::ZERO; dim];
        for (k, &c) in coeffs.iter().enumerate() {
            amps[1 << (n - 1 - k)] = c;
        }
        Self::from_unnormalized(vec![2; n], amps)
    }

    /// `(|00> + |11>)/sqrt(2)`.
    pub fn bell() -> Self {
        Self::ghz(2)
    }

    /// `(|01> - |10>)/sqrt(2)`.
    pub fn singlet() -> Self {
        let x = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(
            vec![2, 2],
            vec![C64::ZERO, C64::new(x, 0.0), C64::new(-x, 0.0), C64::ZERO],
        )
        .expect("singlet amplitudes are normalized")
    }

    /// Tensor product `self (x) other`, parties of `other` appended.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut amps = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in self.amplitudes.iter() {
            for b in other.amplitudes.iter() {
                amps.push(a * b);
            }
        }
        PureState {
            dims,
            amplitudes: DVector::from_vec(amps),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dim_total(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Reorders parties: slot `t` of the result holds old party `perm[t]`.
    /// Amplitudes are moved, never recomputed, so the map is exact and the
    /// inverse permutation restores the input bit for bit.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<PureState> {
        check_permutation(perm, self.dims.len())?;
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let old_strides = strides(&self.dims);
        let new_strides = strides(&new_dims);
        let mut amps = vec![C64::ZERO; self.amplitudes.len()];
        for old_index in 0..self.amplitudes.len() {
            let digits = index_to_digits(old_index, &self.dims, &old_strides);
            let new_index: usize = perm
                .iter()
                .zip(&new_strides)
                .map(|(&p, &st)| digits[p] * st)
                .sum();
            amps[new_index] = self.amplitudes[old_index];
        }
        Ok(PureState {
            dims: new_dims,
            amplitudes: DVector::from_vec(amps),
        })
    }

    /// Regroups the parties as a two-party object `(focus | rest)`.
    ///
    /// Focus parties form the slow (first) tensor slot; both sides keep
    /// ascending party order internally.
    pub fn group(&self, bip: &Bipartition) -> Result<PureState> {
        let permuted = self.permute_parties(&bip.permutation())?;
        Ok(PureState {
            dims: vec![bip.focus_dim(), bip.rest_dim()],
            amplitudes: permuted.amplitudes,
        })
    }
}

/// A Hermitian, positive semidefinite, trace-one matrix over the parties.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positive semidefiniteness.
    pub fn new(dims: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        validate_dims(&dims)?;
        let expected = total_dim(&dims);
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::NotSquare {
                expected,
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let dev = hermiticity_deviation(&matrix);
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::TraceNotOne {
                trace: trace.re,
                tol: TRACE_TOL,
            });
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let min = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotPositive { eigenvalue: min });
        }
        Ok(Self { dims, matrix })
    }

    /// Constructor for matrices valid by construction (projectors of
    /// normalized states, partial traces of valid inputs, ...).
    pub(crate) fn trusted(dims: Vec<usize>, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), total_dim(&dims));
        debug_assert!(hermiticity_deviation(&matrix) <= 1e-8);
        Self { dims, matrix }
    }

    /// Rank-one projector `|psi><psi|`.
    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.amplitudes();
        let matrix = v * v.adjoint();
        Self::trusted(psi.dims().to_vec(), matrix)
    }

    /// Builds and validates a density matrix from row-major entries.
    pub fn from_row_major(dims: Vec<usize>, entries: Vec<C64>) -> Result<Self> {
        validate_dims(&dims)?;
        let side = total_dim(&dims);
        if entries.len() != side * side {
            return Err(Error::LengthMismatch {
                dims,
                expected: side * side,
                got: entries.len(),
            });
        }
        let matrix = DMatrix::from_fn(side, side, |i, j| entries[i * side + j]);
        Self::new(dims, matrix)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dim_total(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Re Tr(rho^2)`; equals 1 exactly for projectors.
    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum_ij rho_ij rho_ji = sum_ij |rho_ij|^2 for Hermitian rho.
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Traces out the listed parties; the remaining parties keep their
    /// relative order.
    pub fn partial_trace(&self, traced: &[usize]) -> Result<DensityMatrix> {
        let n = self.dims.len();
        let mut tr: Vec<usize> = traced.to_vec();
        tr.sort_unstable();
        tr.dedup();
        if tr.len() != traced.len() || tr.iter().any(|&p| p >= n) {
            return Err(Error::InvalidParties {
                indices: traced.to_vec(),
                n_parties: n,
            });
        }
        if tr.len() == n {
            return Err(Error::InvalidParties {
                indices: traced.to_vec(),
                n_parties: n,
            });
        }
        if tr.is_empty() {
            return Ok(self.clone());
        }
        let keep: Vec<usize> = (0..n).filter(|p| !tr.contains(p)).collect();
        let keep_dims: Vec<usize> = keep.iter().map(|&p| self.dims[p]).collect();
        let tr_dims: Vec<usize> = tr.iter().map(|&p| self.dims[p]).collect();
        let keep_total = total_dim(&keep_dims);
        let tr_total = total_dim(&tr_dims);

        let full_strides = strides(&self.dims);
        let keep_strides = strides(&keep_dims);
        let tr_strides = strides(&tr_dims);

        // Precompute the full-index contribution of each side.
        let keep_offsets: Vec<usize> = (0..keep_total)
            .map(|a| {
                index_to_digits(a, &keep_dims, &keep_strides)
                    .iter()
                    .zip(&keep)
                    .map(|(&digit, &party)| digit * full_strides[party])
                    .sum()
            })
            .collect();
        let tr_offsets: Vec<usize> = (0..tr_total)
            .map(|t| {
                index_to_digits(t, &tr_dims, &tr_strides)
                    .iter()
                    .zip(&tr)
                    .map(|(&digit, &party)| digit * full_strides[party])
                    .sum()
            })
            .collect();

        let mut out = DMatrix::<C64>::zeros(keep_total, keep_total);
        for (a, &ra) in keep_offsets.iter().enumerate() {
            for (b, &rb) in keep_offsets.iter().enumerate() {
                let mut acc = C64::ZERO;
                for &rt in &tr_offsets {
                    acc += self.matrix[(ra + rt, rb + rt)];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(DensityMatrix::trusted(keep_dims, out))
    }

    /// Reorders parties; see [`PureState::permute_parties`].
    pub fn permute_parties(&self, perm: &[usize]) -> Result<DensityMatrix> {
        check_permutation(perm, self.dims.len())?;
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let old_strides = strides(&self.dims);
        let new_strides = strides(&new_dims);
        let d = self.matrix.nrows();
        let map: Vec<usize> = (0..d)
            .map(|old| {
                let digits = index_to_digits(old, &self.dims, &old_strides);
                perm.iter()
                    .zip(&new_strides)
                    .map(|(&p, &st)| digits[p] * st)
                    .sum()
            })
            .collect();
        let mut out = DMatrix::<C64>::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                out[(map[i], map[j])] = self.matrix[(i, j)];
            }
        }
        Ok(DensityMatrix {
            dims: new_dims,
            matrix: out,
        })
    }

    /// Regroups the parties as a two-party object `(focus | rest)`.
    pub fn group(&self, bip: &Bipartition) -> Result<DensityMatrix> {
        let permuted = self.permute_parties(&bip.permutation())?;
        Ok(DensityMatrix {
            dims: vec![bip.focus_dim(), bip.rest_dim()],
            matrix: permuted.matrix,
        })
    }
}

pub(crate) fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// A pure state or a density matrix, as accepted by the multipartite
/// measures and the file front end.
#[derive(Debug, Clone)]
pub enum State {
    Pure(PureState),
    Density(DensityMatrix),
}

impl State {
    pub fn dims(&self) -> &[usize] {
        match self {
            State::Pure(p) => p.dims(),
            State::Density(d) => d.dims(),
        }
    }

    pub fn n_parties(&self) -> usize {
        self.dims().len()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, State::Pure(_))
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            State::Pure(p) => DensityMatrix::from_pure(p),
            State::Density(d) => d.clone(),
        }
    }

    pub fn permute_parties(&self, perm: &[usize]) -> Result<State> {
        Ok(match self {
            State::Pure(p) => State::Pure(p.permute_parties(perm)?),
            State::Density(d) => State::Density(d.permute_parties(perm)?),
        })
    }
}

/// Spectral decomposition of a PSD matrix: eigenvalues clipped at zero and
/// sorted descending, the matching unitary of column eigenvectors, and the
/// rank after truncation.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<C64>,
    pub rank: usize,
}

impl EigDecomposition {
    /// `Phi M Phi^dag` over the full spectrum.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let n = self.eigenvectors.nrows();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for (k, &ev) in self.eigenvalues.iter().enumerate() {
            let col = self.eigenvectors.column(k);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += C64::new(ev, 0.0) * col[i] * col[j].conj();
                }
            }
        }
        m
    }

    /// Columns of `Phi M^{1/2}` for the retained spectrum; the state is the
    /// sum of projectors onto these subnormalized vectors.
    pub fn subnormalized_vectors(&self) -> DMatrix<C64> {
        let n = self.eigenvectors.nrows();
        let mut sub = DMatrix::<C64>::zeros(n, self.rank);
        for k in 0..self.rank {
            let w = self.eigenvalues[k].sqrt();
            for i in 0..n {
                sub[(i, k)] = self.eigenvectors[(i, k)] * w;
            }
        }
        sub
    }
}

/// Eigendecomposition of a Hermitian PSD matrix with clipping and rank
/// truncation. `threshold` is relative to the trace; eigenvalues at or below
/// it do not count towards the rank. Rejects matrices whose Hermiticity
/// deviation exceeds [`HERMITICITY_TOL`].
pub fn eig_psd(matrix: &DMatrix<C64>, threshold: f64) -> Result<EigDecomposition> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::NotSquare {
            expected: matrix.nrows(),
            rows: matrix.nrows(),
            cols: matrix.ncols(),
        });
    }
    let dev = hermiticity_deviation(matrix);
    if dev > HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let eig = SymmetricEigen::new(matrix.clone());
    let n = matrix.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues of a Hermitian matrix are finite")
    });
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = DMatrix::<C64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[src].max(0.0));
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    let cutoff = threshold * matrix.trace().re;
    let rank = eigenvalues.iter().filter(|&&ev| ev > cutoff).count();
    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors,
        rank,
    })
}

fn gaussian_complex_vec(len: usize, rng: &mut StdRng) -> Vec<C64> {
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect()
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of the R diagonal absorbed into Q.
pub(crate) fn haar_unitary_with(rng: &mut StdRng, n: usize) -> DMatrix<C64> {
    let g = DMatrix::from_vec(n, n, gaussian_complex_vec(n * n, rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / C64::new(d.norm(), 0.0)
        } else {
            C64::ONE
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random unitary matrix of the given dimension, deterministic per seed.
pub fn random_unitary(dim: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = StdRng::seed_from_u64(seed);
    haar_unitary_with(&mut rng, dim)
}

/// Haar-distributed pure state: complex standard normal amplitudes,
/// normalized. Deterministic for a fixed seed.
pub fn random_pure(dims: &[usize], seed: u64) -> Result<PureState> {
    validate_dims(dims)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let amps = gaussian_complex_vec(total_dim(dims), &mut rng);
    PureState::from_unnormalized(dims.to_vec(), amps)
}

/// Random mixed state obtained as the partial trace of a Haar-random
/// purification with an environment of dimension `env_dim`; the result has
/// rank `min(prod dims, env_dim)` almost surely.
pub fn random_density(dims: &[usize], env_dim: usize, seed: u64) -> Result<DensityMatrix> {
    validate_dims(dims)?;
    if env_dim < 2 {
        return Err(Error::InvalidDims(vec![env_dim]));
    }
    let mut ext = dims.to_vec();
    ext.push(env_dim);
    let psi = random_pure(&ext, seed)?;
    DensityMatrix::from_pure(&psi).partial_trace(&[dims.len()])
}
