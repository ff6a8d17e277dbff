//! State algebra: density matrices, pure states, product bases, and the
//! entropic functionals everything else is built from.
//!
//! Conventions: subsystem order is fixed at construction and all index sets
//! refer to it; tensor layout is row-major Kronecker. All logarithms are
//! base 2, entropies are in bits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Max-abs tolerance on Hermiticity, unitarity, trace and normalization.
pub const VALIDATION_TOL: f64 = 1e-10;
/// Eigenvalues in [-EIG_CLIP, 0) are treated as exact zeros inside entropic
/// functionals; anything more negative is a validation error, not noise.
pub const EIG_CLIP: f64 = 1e-10;
/// Support-membership cutoff for relative entropy.
pub const SUPPORT_CUTOFF: f64 = 1e-10;
/// Maximum rho-weight tolerated outside sigma's support before reporting
/// infinite relative entropy.
pub const SUPPORT_WEIGHT_TOL: f64 = 1e-8;

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Flat offsets of every multi-index over the listed subsystems, with all
/// other subsystem digits zero. Row-major in the order `subs` is given.
pub(crate) fn subsystem_offsets(subs: &[usize], dims: &[usize]) -> Vec<usize> {
    let strides = strides(dims);
    let mut offs = vec![0usize];
    for &s in subs {
        let mut next = Vec::with_capacity(offs.len() * dims[s]);
        for &o in &offs {
            for k in 0..dims[s] {
                next.push(o + k * strides[s]);
            }
        }
        offs = next;
    }
    offs
}

/// Largest entrywise magnitude; the norm used by the validation checks.
pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// the matrix whose columns are the eigenvectors.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    // Symmetrize first so round-off in the input cannot leak into complex
    // eigenvalues.
    let h = (m + m.adjoint()).scale(0.5);
    let se = nalgebra::SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..se.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let n = se.eigenvectors.nrows();
    let mut vecs = CMatrix::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Shannon entropy in bits of a probability vector, with the clipping policy
/// applied: values in [-EIG_CLIP, 0) become 0, 0*log2(0) = 0, and a result
/// within -1e-9 of zero is reported as 0.
pub fn shannon_bits<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    let mut s = 0.0;
    for p in probs {
        let p = if p < 0.0 { 0.0 } else { p.min(1.0) };
        if p > 0.0 {
            s -= p * p.log2();
        }
    }
    s.max(0.0)
}

/// Sum of singular values.
pub fn trace_norm(x: &CMatrix) -> f64 {
    x.clone().svd(false, false).singular_values.iter().sum()
}

/// A bipartition of the subsystems into two nonempty groups, identified by
/// the sorted index lists of each side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Bipartition {
    /// Build the bipartition with `left` on one side and every remaining
    /// subsystem (out of `n_subsystems`) on the other.
    pub fn new(left: &[usize], n_subsystems: usize) -> Result<Self> {
        let mut l = left.to_vec();
        l.sort_unstable();
        l.dedup();
        if l.len() != left.len() {
            return Err(Error::BadCut("duplicate subsystem index".into()));
        }
        if let Some(&bad) = l.iter().find(|&&i| i >= n_subsystems) {
            return Err(Error::BadCut(format!(
                "index {bad} out of range for {n_subsystems} subsystems"
            )));
        }
        let r: Vec<usize> = (0..n_subsystems).filter(|i| !l.contains(i)).collect();
        if l.is_empty() || r.is_empty() {
            return Err(Error::BadCut("both sides must be nonempty".into()));
        }
        Ok(Self { left: l, right: r })
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }
}

/// A validated Hermitian, positive-semidefinite, trace-one operator with an
/// attached list of subsystem dimensions.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    data: CMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validate and wrap a raw matrix. Checks dims, Hermiticity, trace and
    /// positivity, reporting the first violated invariant with its measured
    /// deviation.
    pub fn new(data: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimMismatch(format!(
                "matrix is {}x{}, not square",
                data.nrows(),
                data.ncols()
            )));
        }
        if dims.is_empty() {
            return Err(Error::DimMismatch("dims must be nonempty".into()));
        }
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::DimMismatch(format!(
                "every subsystem dimension must be >= 2, got {dims:?}"
            )));
        }
        let prod: usize = dims.iter().product();
        if prod != data.nrows() {
            return Err(Error::DimMismatch(format!(
                "product of dims {dims:?} = {prod} does not match matrix dimension {}",
                data.nrows()
            )));
        }
        let herm_dev = max_abs_entry(&(&data - data.adjoint()));
        if herm_dev > VALIDATION_TOL {
            return Err(Error::NotHermitian { deviation: herm_dev });
        }
        let tr: Complex64 = data.diagonal().iter().sum();
        let tr_dev = (tr - Complex64::new(1.0, 0.0)).norm();
        if tr_dev > VALIDATION_TOL {
            return Err(Error::TraceNotOne { deviation: tr_dev });
        }
        let (eigs, _) = hermitian_eigen(&data);
        let min_eig = eigs.first().copied().unwrap_or(0.0);
        if min_eig < -VALIDATION_TOL {
            return Err(Error::NotPsd { min_eigenvalue: min_eig });
        }
        Ok(Self { data, dims })
    }

    /// Wrap without re-validating; for internal operations that preserve
    /// validity by construction (partial trace, dephasing, tensor products).
    pub(crate) fn trusted(data: CMatrix, dims: Vec<usize>) -> Self {
        Self { data, dims }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = &psi.amplitudes;
        Self::trusted(v * v.adjoint(), psi.dims.clone())
    }

    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let d: usize = dims.iter().product();
        let data = CMatrix::identity(d, d).scale(1.0 / d as f64);
        Self::trusted(data, dims.to_vec())
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.data).0
    }

    /// Kronecker product; subsystem lists concatenate, `self` first.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let data = self.data.kronecker(&other.data);
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix::trusted(data, dims)
    }

    /// Reduced state on the kept subsystems, in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.dims.len();
        if keep.is_empty() {
            return Err(Error::BadSubsystemIndex { index: n, count: n });
        }
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.len() != keep.len() {
            return Err(Error::BadCut("duplicate subsystem index in keep set".into()));
        }
        if let Some(&bad) = kept.iter().find(|&&i| i >= n) {
            return Err(Error::BadSubsystemIndex { index: bad, count: n });
        }
        let traced: Vec<usize> = (0..n).filter(|i| !kept.contains(i)).collect();
        let kept_dims: Vec<usize> = kept.iter().map(|&i| self.dims[i]).collect();
        if traced.is_empty() {
            return Ok(self.clone());
        }
        let offs_keep = subsystem_offsets(&kept, &self.dims);
        let offs_tr = subsystem_offsets(&traced, &self.dims);
        let dk = offs_keep.len();
        let mut out = CMatrix::zeros(dk, dk);
        for a in 0..dk {
            for b in 0..dk {
                let mut s = Complex64::new(0.0, 0.0);
                for &t in &offs_tr {
                    s += self.data[(offs_keep[a] + t, offs_keep[b] + t)];
                }
                out[(a, b)] = s;
            }
        }
        Ok(DensityMatrix::trusted(out, kept_dims))
    }

    /// Partial transpose over the listed subsystems. The result is Hermitian
    /// and trace one but may fail positivity, so it is returned as a raw
    /// matrix; the subsystem dimensions are unchanged.
    pub fn partial_transpose(&self, transposed: &[usize]) -> Result<CMatrix> {
        let n = self.dims.len();
        let mut tset = transposed.to_vec();
        tset.sort_unstable();
        tset.dedup();
        if tset.len() != transposed.len() {
            return Err(Error::BadCut("duplicate subsystem index".into()));
        }
        if let Some(&bad) = tset.iter().find(|&&i| i >= n) {
            return Err(Error::BadSubsystemIndex { index: bad, count: n });
        }
        let rest: Vec<usize> = (0..n).filter(|i| !tset.contains(i)).collect();
        let offs_t = subsystem_offsets(&tset, &self.dims);
        let offs_r = if rest.is_empty() {
            vec![0usize]
        } else {
            subsystem_offsets(&rest, &self.dims)
        };
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for &a in &offs_t {
            for &b in &offs_t {
                for &x in &offs_r {
                    for &y in &offs_r {
                        out[(a + x, b + y)] = self.data[(b + x, a + y)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Von Neumann entropy in bits, with the eigenvalue clipping policy.
    pub fn von_neumann_entropy(&self) -> f64 {
        shannon_bits(self.eigenvalues())
    }
}

/// S(rho || sigma) in bits, or +infinity when rho's support is not contained
/// in sigma's (decided with eigenvalue cutoff `SUPPORT_CUTOFF`).
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dims != sigma.dims {
        return Err(Error::DimMismatch(format!(
            "dims {:?} vs {:?}",
            rho.dims, sigma.dims
        )));
    }
    let tr_rho_log_rho = -rho.von_neumann_entropy();
    let (svals, svecs) = hermitian_eigen(&sigma.data);
    let mut tr_rho_log_sigma = 0.0;
    let mut outside_weight = 0.0;
    for (j, &s) in svals.iter().enumerate() {
        let v = svecs.column(j);
        let w = (v.adjoint() * &rho.data * v)[(0, 0)].re.max(0.0);
        if s <= SUPPORT_CUTOFF {
            outside_weight += w;
        } else {
            tr_rho_log_sigma += w * s.log2();
        }
    }
    if outside_weight > SUPPORT_WEIGHT_TOL {
        return Ok(f64::INFINITY);
    }
    Ok((tr_rho_log_rho - tr_rho_log_sigma).max(0.0))
}

/// Mutual information across the cut, I = S(X) + S(Y) - S(XY), in bits.
pub fn mutual_information(rho: &DensityMatrix, cut: &Bipartition) -> Result<f64> {
    if cut.left().len() + cut.right().len() != rho.n_subsystems() {
        return Err(Error::BadCut(format!(
            "cut covers {} subsystems, state has {}",
            cut.left().len() + cut.right().len(),
            rho.n_subsystems()
        )));
    }
    let sx = rho.partial_trace(cut.left())?.von_neumann_entropy();
    let sy = rho.partial_trace(cut.right())?.von_neumann_entropy();
    Ok((sx + sy - rho.von_neumann_entropy()).max(0.0))
}

/// Remove all off-diagonal elements of `rho` in the given product basis:
/// rho^B = sum_k |B(k)><B(k)| rho |B(k)><B(k)|.
pub fn dephase(rho: &DensityMatrix, basis: &ProductBasis) -> Result<DensityMatrix> {
    if basis.dims() != rho.dims {
        return Err(Error::DimMismatch(format!(
            "basis dims {:?} vs state dims {:?}",
            basis.dims(),
            rho.dims
        )));
    }
    let u = basis.joint_unitary();
    let m = &u * &rho.data * u.adjoint();
    let d = m.nrows();
    let mut diag = CMatrix::zeros(d, d);
    for k in 0..d {
        diag[(k, k)] = Complex64::new(m[(k, k)].re, 0.0);
    }
    let out = u.adjoint() * diag * u;
    Ok(DensityMatrix::trusted(out, rho.dims.clone()))
}

/// Diagonal of rho in the given product basis: p_k = <B(k)| rho |B(k)>.
/// Cheaper than `dephase` when only the dephased spectrum is needed.
pub fn dephased_diagonal(rho: &DensityMatrix, basis: &ProductBasis) -> Result<Vec<f64>> {
    if basis.dims() != rho.dims {
        return Err(Error::DimMismatch(format!(
            "basis dims {:?} vs state dims {:?}",
            basis.dims(),
            rho.dims
        )));
    }
    let u = basis.joint_unitary();
    let m = &u * &rho.data * u.adjoint();
    Ok((0..m.nrows()).map(|k| m[(k, k)].re).collect())
}

/// Matrix of rho in the given product basis: M_kl = <B(k)| rho |B(l)>.
pub fn in_basis(rho: &DensityMatrix, basis: &ProductBasis) -> Result<CMatrix> {
    if basis.dims() != rho.dims {
        return Err(Error::DimMismatch(format!(
            "basis dims {:?} vs state dims {:?}",
            basis.dims(),
            rho.dims
        )));
    }
    let u = basis.joint_unitary();
    Ok(&u * &rho.data * u.adjoint())
}

/// A normalized state vector with subsystem dimensions attached.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: CVector,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: CVector, dims: Vec<usize>) -> Result<Self> {
        let prod: usize = dims.iter().product();
        if dims.is_empty() || prod != amplitudes.len() {
            return Err(Error::DimMismatch(format!(
                "product of dims {dims:?} does not match vector length {}",
                amplitudes.len()
            )));
        }
        let dev = (amplitudes.norm() - 1.0).abs();
        if dev > VALIDATION_TOL {
            return Err(Error::NotNormalized { deviation: dev });
        }
        Ok(Self { amplitudes, dims })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// Computational basis state |k> over the given dims.
    pub fn basis_state(k: usize, dims: &[usize]) -> Self {
        let d: usize = dims.iter().product();
        let mut v = CVector::zeros(d);
        v[k] = Complex64::new(1.0, 0.0);
        Self { amplitudes: v, dims: dims.to_vec() }
    }
}

/// One local unitary per subsystem. Row k of the i-th unitary is the bra
/// <B_i(k)|, so the basis vectors are |B_i(k)> = U_i^dag |k>.
#[derive(Debug, Clone)]
pub struct ProductBasis {
    locals: Vec<CMatrix>,
}

impl ProductBasis {
    pub fn new(locals: Vec<CMatrix>) -> Result<Self> {
        if locals.is_empty() {
            return Err(Error::DimMismatch("a product basis needs at least one local unitary".into()));
        }
        for u in &locals {
            if u.nrows() != u.ncols() {
                return Err(Error::DimMismatch("local unitary is not square".into()));
            }
            let d = u.nrows();
            let dev = max_abs_entry(&(u * u.adjoint() - CMatrix::identity(d, d)));
            if dev > VALIDATION_TOL {
                return Err(Error::NotUnitary { deviation: dev });
            }
        }
        Ok(Self { locals })
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self {
            locals: dims.iter().map(|&d| CMatrix::identity(d, d)).collect(),
        }
    }

    /// Wrap without the unitarity check; for locals that are unitary by
    /// construction (matrix exponentials, Haar samples, grid angles).
    pub(crate) fn trusted(locals: Vec<CMatrix>) -> Self {
        Self { locals }
    }

    pub fn locals(&self) -> &[CMatrix] {
        &self.locals
    }

    pub fn dims(&self) -> Vec<usize> {
        self.locals.iter().map(|u| u.nrows()).collect()
    }

    /// Kronecker product of the local unitaries, in subsystem order.
    pub fn joint_unitary(&self) -> CMatrix {
        let mut u = self.locals[0].clone();
        for v in &self.locals[1..] {
            u = u.kronecker(v);
        }
        u
    }
}
