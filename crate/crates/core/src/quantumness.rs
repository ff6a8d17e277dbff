//! Quantumness measures built on the activation protocol: relative entropy
//! of quantumness (REQ), negativity of quantumness, the generic minimum
//! entanglement potential, and classicality detection.

use crate::error::{Error, Result};
use crate::optimize::{
    grid_certify_two_qubits, minimize, GridObjective, OptimizerConfig, OptimizerReport,
};
use crate::state::{
    dephased_diagonal, hermitian_eigen, in_basis, relative_entropy, shannon_bits, Bipartition,
    CMatrix, CVector, DensityMatrix, ProductBasis, PureState,
};

/// Whether an estimate is certified or only an upper bound on the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Produced by the exhaustive qubit grid oracle or a closed form.
    Exact,
    /// Produced by the multi-start optimizer; one-sided error.
    UpperBound,
}

impl BoundKind {
    pub fn label(&self) -> &'static str {
        match self {
            BoundKind::Exact => "exact",
            BoundKind::UpperBound => "upper_bound",
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuantumnessEstimate {
    /// Bits for entropy-based measures, dimensionless for negativity.
    pub value: f64,
    pub best_basis: ProductBasis,
    pub bound_kind: BoundKind,
    pub report: OptimizerReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalityMethod {
    SpectralCertificate,
    ThresholdOnQ,
}

impl ClassicalityMethod {
    pub fn label(&self) -> &'static str {
        match self {
            ClassicalityMethod::SpectralCertificate => "spectral_certificate",
            ClassicalityMethod::ThresholdOnQ => "threshold_on_Q",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassicalityVerdict {
    pub is_classical: bool,
    /// Eigen-product-basis when spectrally certified.
    pub certificate: Option<ProductBasis>,
    pub method: ClassicalityMethod,
    /// Max off-diagonal magnitude in the certified basis, or the Q estimate
    /// in the fallback.
    pub residual: f64,
}

/// Entanglement monotone selecting the objective of Eq.-potential
/// minimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotone {
    /// Distillable entanglement of the maximally correlated output;
    /// reproduces the REQ.
    DistillableMc,
    /// Negativity of the output; reproduces the negativity of quantumness.
    Negativity,
}

fn req_objective(rho: &DensityMatrix) -> impl Fn(&ProductBasis) -> f64 + Sync + '_ {
    let s_rho = rho.von_neumann_entropy();
    move |b: &ProductBasis| {
        (shannon_bits(dephased_diagonal(rho, b).expect("dims checked")) - s_rho).max(0.0)
    }
}

fn coherence_objective(rho: &DensityMatrix) -> impl Fn(&ProductBasis) -> f64 + Sync + '_ {
    move |b: &ProductBasis| {
        let m = in_basis(rho, b).expect("dims checked");
        let d = m.nrows();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += m[(i, j)].norm();
                }
            }
        }
        s / 2.0
    }
}

/// Product of the local marginal eigenbases. For pure states this is a
/// Schmidt basis, and in general the dephased entropy at this start is at
/// most S(rho_X) + S(rho_Y) by subadditivity, which keeps every estimate
/// below the mutual information.
fn local_eigenbasis_product(rho: &DensityMatrix) -> Result<ProductBasis> {
    let mut locals = Vec::with_capacity(rho.n_subsystems());
    for i in 0..rho.n_subsystems() {
        let marginal = rho.partial_trace(&[i])?;
        let (_, vecs) = hermitian_eigen(marginal.data());
        locals.push(vecs.adjoint());
    }
    Ok(ProductBasis::new(locals)?)
}

/// Split a vector over `dims` into per-subsystem factors, or None if it is
/// not a product vector (any cut with rank-1 residual above 1e-8 relative
/// to the vector norm).
fn product_factors(v: &CVector, dims: &[usize]) -> Option<Vec<CVector>> {
    let mut rest = v.clone();
    let mut rest_dims = dims.to_vec();
    let mut factors = Vec::with_capacity(dims.len());
    while rest_dims.len() > 1 {
        let d0 = rest_dims[0];
        let dr: usize = rest_dims[1..].iter().product();
        let m = CMatrix::from_fn(d0, dr, |a, r| rest[a * dr + r]);
        // Rank-1 split without an SVD: seed the tail factor from the
        // heaviest row, recover the head factor by contraction, then
        // check the outer-product residual.
        let a_star = (0..d0).max_by(|&a, &b| {
            let na: f64 = (0..dr).map(|r| m[(a, r)].norm_sqr()).sum();
            let nb: f64 = (0..dr).map(|r| m[(b, r)].norm_sqr()).sum();
            na.partial_cmp(&nb).unwrap()
        })?;
        let mut w = CVector::from_fn(dr, |r, _| m[(a_star, r)]);
        let wn = w.norm();
        if wn < 1e-12 {
            return None;
        }
        w /= num_complex::Complex64::new(wn, 0.0);
        let f = CVector::from_fn(d0, |a, _| {
            (0..dr).map(|r| m[(a, r)] * w[r].conj()).sum()
        });
        let residual: f64 = (0..d0)
            .map(|a| (0..dr).map(|r| (m[(a, r)] - f[a] * w[r]).norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        if residual > 1e-8 * rest.norm().max(1e-12) {
            return None;
        }
        let fn_ = f.norm();
        if fn_ < 1e-12 {
            return None;
        }
        factors.push(f.unscale(fn_));
        rest = w.scale(fn_);
        rest_dims.remove(0);
    }
    let n = rest.norm();
    if n < 1e-12 {
        return None;
    }
    rest /= num_complex::Complex64::new(n, 0.0);
    factors.push(rest);
    Some(factors)
}

/// Try to assemble a product basis in which rho is diagonal, from its
/// eigendecomposition. Requires a nondegenerate spectrum (gaps > 1e-8) and
/// product-form eigenvectors whose local factors form orthonormal sets.
fn spectral_product_certificate(rho: &DensityMatrix) -> Option<(ProductBasis, f64)> {
    let (vals, vecs) = hermitian_eigen(rho.data());
    for w in vals.windows(2) {
        if (w[1] - w[0]).abs() <= 1e-8 {
            return None;
        }
    }
    let dims = rho.dims();
    let d = rho.dim();
    let mut per_subsystem: Vec<Vec<CVector>> = vec![Vec::new(); dims.len()];
    for col in 0..d {
        let v = CVector::from_fn(d, |r, _| vecs[(r, col)]);
        let factors = product_factors(&v, dims)?;
        for (i, f) in factors.into_iter().enumerate() {
            let known = per_subsystem[i]
                .iter()
                .any(|g| (g.adjoint() * &f)[(0, 0)].norm() > 1.0 - 1e-6);
            if !known {
                per_subsystem[i].push(f);
            }
        }
    }
    let mut locals = Vec::with_capacity(dims.len());
    for (i, set) in per_subsystem.iter().enumerate() {
        if set.len() != dims[i] {
            return None;
        }
        for a in 0..set.len() {
            for b in 0..set.len() {
                let g = (set[a].adjoint() * &set[b])[(0, 0)].norm();
                let expect = if a == b { 1.0 } else { 0.0 };
                if (g - expect).abs() > 1e-8 {
                    return None;
                }
            }
        }
        let mut u = CMatrix::zeros(dims[i], dims[i]);
        for (k, g) in set.iter().enumerate() {
            for a in 0..dims[i] {
                u[(k, a)] = g[a].conj();
            }
        }
        locals.push(u);
    }
    let basis = ProductBasis::new(locals).ok()?;
    let m = in_basis(rho, &basis).ok()?;
    let mut residual = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                residual = residual.max(m[(i, j)].norm());
            }
        }
    }
    if residual > 1e-8 {
        return None;
    }
    Some((basis, residual))
}

fn default_starts(rho: &DensityMatrix) -> Result<Vec<ProductBasis>> {
    let mut starts = Vec::with_capacity(3);
    if let Some((cert, _)) = spectral_product_certificate(rho) {
        starts.push(cert);
    }
    starts.push(ProductBasis::identity(rho.dims()));
    starts.push(local_eigenbasis_product(rho)?);
    Ok(starts)
}

/// Relative entropy of quantumness: min over product bases of
/// S(rho^B) - S(rho), in bits. Upper-bound estimate; see
/// `req_grid_certified` for the two-qubit exact oracle.
pub fn req(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<QuantumnessEstimate> {
    let obj = req_objective(rho);
    let starts = default_starts(rho)?;
    let (basis, value, report) = minimize(&obj, rho.dims(), cfg, &starts)?;
    Ok(QuantumnessEstimate {
        value: value.max(0.0),
        best_basis: basis,
        bound_kind: BoundKind::UpperBound,
        report,
    })
}

/// REQ by exhaustive grid over two-qubit product bases; exact to about 2e-3.
pub fn req_grid_certified(rho: &DensityMatrix, resolution_deg: f64) -> Result<QuantumnessEstimate> {
    let (basis, value) = grid_certify_two_qubits(&GridObjective::EntropyGap(rho), resolution_deg)?;
    Ok(QuantumnessEstimate {
        value,
        best_basis: basis,
        bound_kind: BoundKind::Exact,
        report: OptimizerReport {
            converged: true,
            ..OptimizerReport::default()
        },
    })
}

/// S(rho || sigma) for a certified classical sigma; an upper-bound witness
/// for the geometric form of the REQ.
pub fn req_closest_classical_gap(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let verdict = is_classical(sigma, 1e-6)?;
    if !verdict.is_classical {
        return Err(Error::NotClassical(verdict.residual));
    }
    relative_entropy(rho, sigma)
}

/// Negativity of quantumness: min over product bases of half the sum of
/// absolute off-diagonal coherences.
pub fn negativity_of_quantumness(
    rho: &DensityMatrix,
    cfg: &OptimizerConfig,
) -> Result<QuantumnessEstimate> {
    let obj = coherence_objective(rho);
    let starts = default_starts(rho)?;
    let (basis, value, report) = minimize(&obj, rho.dims(), cfg, &starts)?;
    Ok(QuantumnessEstimate {
        value: value.max(0.0),
        best_basis: basis,
        bound_kind: BoundKind::UpperBound,
        report,
    })
}

/// Negativity of quantumness by the two-qubit grid oracle.
pub fn negativity_of_quantumness_grid_certified(
    rho: &DensityMatrix,
    resolution_deg: f64,
) -> Result<QuantumnessEstimate> {
    let (basis, value) =
        grid_certify_two_qubits(&GridObjective::CoherenceSum(rho), resolution_deg)?;
    Ok(QuantumnessEstimate {
        value,
        best_basis: basis,
        bound_kind: BoundKind::Exact,
        report: OptimizerReport {
            converged: true,
            ..OptimizerReport::default()
        },
    })
}

/// Minimum entanglement potential with respect to the chosen monotone on
/// the protocol output. Requires uniform qudit dimensions, matching the
/// domain where the protocol is defined.
pub fn entanglement_potential(
    rho: &DensityMatrix,
    monotone: Monotone,
    cfg: &OptimizerConfig,
) -> Result<QuantumnessEstimate> {
    let dims = rho.dims();
    if dims.iter().any(|&x| x != dims[0]) {
        return Err(Error::NonUniformDims(dims.to_vec()));
    }
    match monotone {
        Monotone::DistillableMc => req(rho, cfg),
        Monotone::Negativity => negativity_of_quantumness(rho, cfg),
    }
}

/// Decide whether rho is strictly classically correlated: first try the
/// spectral product-basis certificate, otherwise fall back to thresholding
/// the REQ estimate at `tol` (bits).
pub fn is_classical(rho: &DensityMatrix, tol: f64) -> Result<ClassicalityVerdict> {
    if let Some((basis, residual)) = spectral_product_certificate(rho) {
        return Ok(ClassicalityVerdict {
            is_classical: true,
            certificate: Some(basis),
            method: ClassicalityMethod::SpectralCertificate,
            residual,
        });
    }
    let est = req(rho, &OptimizerConfig::default())?;
    Ok(ClassicalityVerdict {
        is_classical: est.value < tol,
        certificate: None,
        method: ClassicalityMethod::ThresholdOnQ,
        residual: est.value,
    })
}

/// Entropy of entanglement of a pure state across the cut, in bits.
pub fn entropy_of_entanglement(psi: &PureState, cut: &Bipartition) -> Result<f64> {
    if cut.left().len() + cut.right().len() != psi.dims().len() {
        return Err(Error::BadCut(format!(
            "cut covers {} subsystems, state has {}",
            cut.left().len() + cut.right().len(),
            psi.dims().len()
        )));
    }
    let rho = psi.to_density();
    Ok(rho.partial_trace(cut.left())?.von_neumann_entropy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{haar_pure_state, haar_unitary, RngStream};
    use crate::state::{dephase, max_abs_entry};
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell() -> DensityMatrix {
        let inv = 1.0 / 2f64.sqrt();
        let v = CVector::from_vec(vec![c(inv), c(0.0), c(0.0), c(inv)]);
        PureState::new(v, vec![2, 2]).unwrap().to_density()
    }

    fn diag_state(probs: &[f64], dims: &[usize]) -> DensityMatrix {
        let v = CVector::from_iterator(probs.len(), probs.iter().map(|&p| c(p)));
        DensityMatrix::new(CMatrix::from_diagonal(&v), dims.to_vec()).unwrap()
    }

    fn werner(p: f64) -> DensityMatrix {
        let mm = DensityMatrix::maximally_mixed(&[2, 2]);
        let b = bell();
        let data = mm.data().scale(1.0 - p) + b.data().scale(p);
        DensityMatrix::new(data, vec![2, 2]).unwrap()
    }

    fn quick_cfg() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 5,
            max_evals_per_restart: 2000,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn req_of_classical_rotated_state_is_zero() {
        let mut rng = RngStream::new(31, 0).rng();
        let base = diag_state(&[0.4, 0.3, 0.2, 0.1], &[2, 2]);
        let u = ProductBasis::new(vec![haar_unitary(2, &mut rng), haar_unitary(2, &mut rng)])
            .unwrap()
            .joint_unitary();
        let rotated =
            DensityMatrix::new(u.adjoint() * base.data() * &u, vec![2, 2]).unwrap();
        let est = req(&rotated, &quick_cfg()).unwrap();
        assert!(est.value < 1e-6, "value = {}", est.value);
    }

    #[test]
    fn req_of_bell_is_one_bit() {
        let est = req(&bell(), &quick_cfg()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-4, "value = {}", est.value);
    }

    #[test]
    fn req_of_pure_state_is_binary_entropy_of_schmidt_squares() {
        let v = CVector::from_vec(vec![c(0.9f64.sqrt()), c(0.0), c(0.0), c(0.1f64.sqrt())]);
        let psi = PureState::new(v, vec![2, 2]).unwrap().to_density();
        let est = req(&psi, &quick_cfg()).unwrap();
        assert!((est.value - 0.46899559358928133).abs() < 1e-4, "value = {}", est.value);
    }

    #[test]
    fn req_gap_to_dephased_best_basis_matches() {
        let mut rng = RngStream::new(32, 0).rng();
        let rho = crate::sampling::random_lowrank_thm3(2, 2, &mut rng).unwrap();
        let est = req(&rho, &quick_cfg()).unwrap();
        let sigma = dephase(&rho, &est.best_basis).unwrap();
        let gap = req_closest_classical_gap(&rho, &sigma).unwrap();
        assert!(gap >= est.value - 1e-8);
        assert!((gap - est.value).abs() < 1e-6, "gap={gap} value={}", est.value);
    }

    #[test]
    fn classical_gap_identity_cases() {
        let rho = diag_state(&[0.4, 0.3, 0.2, 0.1], &[2, 2]);
        assert!(req_closest_classical_gap(&rho, &rho).unwrap() < 1e-9);

        let sigma = diag_state(&[0.5, 1e-4, 1e-4, 0.4998], &[2, 2]);
        let gap = req_closest_classical_gap(&bell(), &sigma).unwrap();
        assert!(gap > 0.9, "gap = {gap}");

        assert!(matches!(
            req_closest_classical_gap(&diag_state(&[0.4, 0.3, 0.2, 0.1], &[2, 2]), &bell()),
            Err(Error::NotClassical(_))
        ));
    }

    #[test]
    fn qneg_of_classical_is_zero_and_of_werner_is_half_p() {
        let rho = diag_state(&[0.4, 0.3, 0.2, 0.1], &[2, 2]);
        let est = negativity_of_quantumness(&rho, &quick_cfg()).unwrap();
        assert!(est.value < 1e-8);

        for p in [0.3, 0.7] {
            let est = negativity_of_quantumness(&werner(p), &quick_cfg()).unwrap();
            assert!((est.value - p / 2.0).abs() < 1e-3, "p={p} value={}", est.value);
        }
    }

    #[test]
    fn qneg_of_pure_state_equals_negativity() {
        let v = CVector::from_vec(vec![c(0.9f64.sqrt()), c(0.0), c(0.0), c(0.1f64.sqrt())]);
        let psi = PureState::new(v, vec![2, 2]).unwrap().to_density();
        let est = negativity_of_quantumness(&psi, &quick_cfg()).unwrap();
        assert!((est.value - 0.3).abs() < 2e-3, "value = {}", est.value);
    }

    #[test]
    fn entanglement_potential_dispatch() {
        let cfg = quick_cfg();
        let e = entanglement_potential(&bell(), Monotone::DistillableMc, &cfg).unwrap();
        assert!((e.value - 1.0).abs() < 1e-4);
        let n = entanglement_potential(&bell(), Monotone::Negativity, &cfg).unwrap();
        assert!((n.value - 0.5).abs() < 1e-4);

        let rho = diag_state(&[0.4, 0.3, 0.2, 0.1], &[2, 2]);
        assert!(entanglement_potential(&rho, Monotone::DistillableMc, &cfg).unwrap().value < 1e-6);

        let mut rng = RngStream::new(33, 0).rng();
        let uneven = haar_pure_state(&[2, 3], &mut rng).to_density();
        assert!(matches!(
            entanglement_potential(&uneven, Monotone::DistillableMc, &cfg),
            Err(Error::NonUniformDims(_))
        ));
    }

    #[test]
    fn classicality_verdicts() {
        let rho = diag_state(&[0.5, 0.3, 0.15, 0.05], &[2, 2]);
        let v = is_classical(&rho, 1e-6).unwrap();
        assert!(v.is_classical);
        assert_eq!(v.method, ClassicalityMethod::SpectralCertificate);
        let cert = v.certificate.unwrap();
        let dephased = dephase(&rho, &cert).unwrap();
        assert!(max_abs_entry(&(dephased.data() - rho.data())) < 1e-8);

        let v = is_classical(&bell(), 1e-6).unwrap();
        assert!(!v.is_classical);
    }

    #[test]
    fn rotated_classical_state_is_certified() {
        let mut rng = RngStream::new(34, 0).rng();
        let base = diag_state(&[0.45, 0.3, 0.2, 0.05], &[2, 2]);
        let u = ProductBasis::new(vec![haar_unitary(2, &mut rng), haar_unitary(2, &mut rng)])
            .unwrap()
            .joint_unitary();
        let rotated = DensityMatrix::new(u.adjoint() * base.data() * &u, vec![2, 2]).unwrap();
        let v = is_classical(&rotated, 1e-6).unwrap();
        assert!(v.is_classical);
        assert_eq!(v.method, ClassicalityMethod::SpectralCertificate);
    }

    #[test]
    fn mix2_is_not_classical() {
        // 1/2 (|00><00| + |++><++|): separable but nonclassical
        let zero2 = PureState::basis_state(0, &[2, 2]).to_density();
        let inv = 0.5;
        let plusplus = PureState::new(
            CVector::from_vec(vec![c(inv), c(inv), c(inv), c(inv)]),
            vec![2, 2],
        )
        .unwrap()
        .to_density();
        let mix = DensityMatrix::new(
            zero2.data().scale(0.5) + plusplus.data().scale(0.5),
            vec![2, 2],
        )
        .unwrap();
        let v = is_classical(&mix, 1e-6).unwrap();
        assert!(!v.is_classical);
        assert!(v.residual > 1e-4);
    }

    #[test]
    fn entropy_of_entanglement_values() {
        let cut = Bipartition::new(&[0], 2).unwrap();
        let mut rng = RngStream::new(35, 0).rng();
        let prod = {
            let a = haar_pure_state(&[2], &mut rng);
            let b = haar_pure_state(&[2], &mut rng);
            let mut v = CVector::zeros(4);
            for i in 0..2 {
                for j in 0..2 {
                    v[i * 2 + j] = a.amplitudes()[i] * b.amplitudes()[j];
                }
            }
            PureState::new(v, vec![2, 2]).unwrap()
        };
        assert!(entropy_of_entanglement(&prod, &cut).unwrap() < 1e-9);

        let inv = 1.0 / 2f64.sqrt();
        let bell_psi =
            PureState::new(CVector::from_vec(vec![c(inv), c(0.0), c(0.0), c(inv)]), vec![2, 2])
                .unwrap();
        assert!((entropy_of_entanglement(&bell_psi, &cut).unwrap() - 1.0).abs() < 1e-9);

        let inv3 = 1.0 / 3f64.sqrt();
        let mut v = CVector::zeros(9);
        for j in 0..3 {
            v[j * 3 + j] = c(inv3);
        }
        let maxent3 = PureState::new(v, vec![3, 3]).unwrap();
        let e = entropy_of_entanglement(&maxent3, &cut).unwrap();
        assert!((e - 3f64.log2()).abs() < 1e-9);

        // S(rho_X) = S(rho_Y) for pure states
        let psi = haar_pure_state(&[2, 3], &mut rng);
        let sx = entropy_of_entanglement(&psi, &cut).unwrap();
        let sy = psi.to_density().partial_trace(&[1]).unwrap().von_neumann_entropy();
        assert!((sx - sy).abs() < 1e-9);
    }
}
