//! The activation protocol: generalized CNOTs, the system+ancilla isometry,
//! the maximally correlated output form, and the closed-form entanglement
//! quantities of that output.
//!
//! Output subsystem order is fixed: all system qudits first (A_1..A_n), then
//! all ancillas (A'_1..A'_n), so the system:ancilla cut is the contiguous
//! bipartition {0..n-1} : {n..2n-1}.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{
    dephase, dephased_diagonal, hermitian_eigen, in_basis, shannon_bits, Bipartition, CMatrix,
    DensityMatrix, ProductBasis,
};

/// Final state of the protocol together with the inputs that produced it and
/// the closed-form entanglement quantities across the system:ancilla cut.
#[derive(Debug, Clone)]
pub struct ActivationOutcome {
    /// State over A_1..A_n, A'_1..A'_n.
    pub final_state: DensityMatrix,
    /// The adversary's local unitaries (as the product basis they select).
    pub adversary: ProductBasis,
    /// rho dephased in the adversary's basis, on the system alone.
    pub dephased_input: DensityMatrix,
    /// Distillable entanglement of the output across A:A', in bits.
    pub e_distillable: f64,
    /// Negativity of the output across A:A'.
    pub negativity_value: f64,
}

/// Generalized CNOT on C^d (x) C^d: C|j>|j'> = |j>|j' + j mod d>, control
/// first.
pub fn qudit_cnot(d: usize) -> Result<CMatrix> {
    if d < 2 {
        return Err(Error::BadDimension(format!("d = {d} must be >= 2")));
    }
    let mut c = CMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for jp in 0..d {
            c[(j * d + (jp + j) % d, j * d + jp)] = Complex64::new(1.0, 0.0);
        }
    }
    Ok(c)
}

fn check_protocol_input(rho: &DensityMatrix, adversary: &ProductBasis) -> Result<usize> {
    let dims = rho.dims();
    let d = dims[0];
    if dims.iter().any(|&x| x != d) {
        return Err(Error::NonUniformDims(dims.to_vec()));
    }
    if adversary.dims() != dims {
        return Err(Error::DimMismatch(format!(
            "adversary dims {:?} vs state dims {:?}",
            adversary.dims(),
            dims
        )));
    }
    Ok(d)
}

/// Build the protocol output directly from matrix elements in the adversary
/// basis: rho~ = sum_kl rho^B_kl |k><l|_A (x) |k><l|_A'.
pub fn maximally_correlated_form(
    rho: &DensityMatrix,
    basis: &ProductBasis,
) -> Result<DensityMatrix> {
    check_protocol_input(rho, basis)?;
    let m = in_basis(rho, basis)?;
    let big_d = rho.dim();
    let mut out = CMatrix::zeros(big_d * big_d, big_d * big_d);
    for k in 0..big_d {
        for l in 0..big_d {
            out[(k * big_d + k, l * big_d + l)] = m[(k, l)];
        }
    }
    let mut dims = rho.dims().to_vec();
    dims.extend_from_slice(rho.dims());
    Ok(DensityMatrix::trusted(out, dims))
}

/// Gate-level simulation of the protocol isometry: rotate, append |0>
/// ancillas, apply the pairwise CNOT permutation. Retained as the cross
/// check for `maximally_correlated_form`; quadratically larger intermediate.
pub fn run_activation_gates(rho: &DensityMatrix, adversary: &ProductBasis) -> Result<DensityMatrix> {
    let d = check_protocol_input(rho, adversary)?;
    let n = rho.n_subsystems();
    let u = adversary.joint_unitary();
    let rotated = &u * rho.data() * u.adjoint();
    let big_d = rho.dim();
    // initial = rotated (x) |0..0><0..0|, then conjugate by the CNOT
    // permutation (a, b) -> (a, b + a) digit-wise mod d.
    let perm = |idx: usize| -> usize {
        let (a, b) = (idx / big_d, idx % big_d);
        let mut out_b = 0usize;
        let mut pa = a;
        let mut pb = b;
        let mut scale = 1usize;
        for _ in 0..n {
            let ai = pa % d;
            let bi = pb % d;
            out_b += ((ai + bi) % d) * scale;
            pa /= d;
            pb /= d;
            scale *= d;
        }
        a * big_d + out_b
    };
    let mut out = CMatrix::zeros(big_d * big_d, big_d * big_d);
    for x in 0..big_d {
        for y in 0..big_d {
            // only ancilla index 0 is populated initially
            out[(perm(x * big_d), perm(y * big_d))] = rotated[(x, y)];
        }
    }
    let mut dims = rho.dims().to_vec();
    dims.extend_from_slice(rho.dims());
    Ok(DensityMatrix::trusted(out, dims))
}

/// Run the activation protocol and fill in the closed-form output
/// quantities.
pub fn run_activation(rho: &DensityMatrix, adversary: &ProductBasis) -> Result<ActivationOutcome> {
    check_protocol_input(rho, adversary)?;
    let final_state = maximally_correlated_form(rho, adversary)?;
    let dephased_input = dephase(rho, adversary)?;
    let e_distillable = distillable_entanglement_mc(rho, adversary)?;
    let negativity_value = negativity_mc_closed_form(rho, adversary)?;
    Ok(ActivationOutcome {
        final_state,
        adversary: adversary.clone(),
        dephased_input,
        e_distillable,
        negativity_value,
    })
}

/// Distillable entanglement of the protocol output across A:A', via the
/// maximally correlated closed form S(rho^B) - S(rho), in bits.
pub fn distillable_entanglement_mc(rho: &DensityMatrix, basis: &ProductBasis) -> Result<f64> {
    check_protocol_input(rho, basis)?;
    let diag = dephased_diagonal(rho, basis)?;
    Ok((shannon_bits(diag) - rho.von_neumann_entropy()).max(0.0))
}

/// Negativity across the cut: (||rho^{T_left}||_1 - 1) / 2.
pub fn negativity(rho: &DensityMatrix, cut: &Bipartition) -> Result<f64> {
    if cut.left().len() + cut.right().len() != rho.n_subsystems() {
        return Err(Error::BadCut(format!(
            "cut covers {} subsystems, state has {}",
            cut.left().len() + cut.right().len(),
            rho.n_subsystems()
        )));
    }
    let pt = rho.partial_transpose(cut.left())?;
    // partial transpose is Hermitian, so the trace norm is the sum of
    // absolute eigenvalues
    let (eigs, _) = hermitian_eigen(&pt);
    let tn: f64 = eigs.iter().map(|e| e.abs()).sum();
    Ok(((tn - 1.0) / 2.0).max(0.0))
}

/// Negativity of the protocol output across A:A' via the coherence sum
/// (sum_{i != j} |rho^B_ij|) / 2, without building the output state.
pub fn negativity_mc_closed_form(rho: &DensityMatrix, basis: &ProductBasis) -> Result<f64> {
    check_protocol_input(rho, basis)?;
    let m = in_basis(rho, basis)?;
    let d = m.nrows();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += m[(i, j)].norm();
            }
        }
    }
    Ok(s / 2.0)
}

/// The A:A' cut of a protocol output with `n` system qudits.
pub fn system_ancilla_cut(n: usize) -> Bipartition {
    let left: Vec<usize> = (0..n).collect();
    Bipartition::new(&left, 2 * n).expect("n >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{haar_pure_state, haar_unitary, RngStream};
    use crate::state::{max_abs_entry, CVector, PureState};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell() -> DensityMatrix {
        let inv = 1.0 / 2f64.sqrt();
        let v = CVector::from_vec(vec![c(inv), c(0.0), c(0.0), c(inv)]);
        PureState::new(v, vec![2, 2]).unwrap().to_density()
    }

    fn random_basis(dims: &[usize], rng: &mut rand_chacha::ChaCha12Rng) -> ProductBasis {
        ProductBasis::new(dims.iter().map(|&d| haar_unitary(d, rng)).collect()).unwrap()
    }

    #[test]
    fn cnot_d2_matches_standard() {
        let cm = qudit_cnot(2).unwrap();
        // |10> -> |11>, |11> -> |10>, |00> and |01> fixed
        assert_eq!(cm[(3, 2)], c(1.0));
        assert_eq!(cm[(2, 3)], c(1.0));
        assert_eq!(cm[(0, 0)], c(1.0));
        assert_eq!(cm[(1, 1)], c(1.0));
    }

    #[test]
    fn cnot_d3_addition_mod_3() {
        let cm = qudit_cnot(3).unwrap();
        // |2>|2> -> |2>|1>
        assert_eq!(cm[(2 * 3 + 1, 2 * 3 + 2)], c(1.0));
    }

    #[test]
    fn cnot_copies_zero_target() {
        for d in 2..=5 {
            let cm = qudit_cnot(d).unwrap();
            for j in 0..d {
                assert_eq!(cm[(j * d + j, j * d)], c(1.0));
            }
        }
        assert!(matches!(qudit_cnot(1), Err(Error::BadDimension(_))));
    }

    #[test]
    fn cnot_is_unitary() {
        for d in 2..=7 {
            let cm = qudit_cnot(d).unwrap();
            let dev = max_abs_entry(&(&cm * cm.adjoint() - CMatrix::identity(d * d, d * d)));
            assert!(dev < 1e-12);
        }
    }

    #[test]
    fn classical_input_identity_adversary_is_separable() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.7), c(0.3)]));
        let rho = DensityMatrix::new(m, vec![2]).unwrap();
        let out = run_activation(&rho, &ProductBasis::identity(&[2])).unwrap();
        assert!(out.e_distillable < 1e-12);
        assert!(out.negativity_value < 1e-12);
        // sum p_i |ii><ii|
        let mut expect = CMatrix::zeros(4, 4);
        expect[(0, 0)] = c(0.7);
        expect[(3, 3)] = c(0.3);
        assert!(max_abs_entry(&(out.final_state.data() - &expect)) < 1e-12);
    }

    #[test]
    fn plus_state_activates_to_bell() {
        let inv = 1.0 / 2f64.sqrt();
        let plus = PureState::new(CVector::from_vec(vec![c(inv), c(inv)]), vec![2])
            .unwrap()
            .to_density();
        let out = run_activation(&plus, &ProductBasis::identity(&[2])).unwrap();
        assert!((out.e_distillable - 1.0).abs() < 1e-10);
        assert!(max_abs_entry(&(out.final_state.data() - bell().data())) < 1e-12);
    }

    #[test]
    fn mc_form_matches_gate_level_on_random_inputs() {
        let mut rng = RngStream::new(21, 0).rng();
        for _ in 0..10 {
            let rho = crate::sampling::random_lowrank_thm3(2, 3, &mut rng).unwrap();
            let basis = random_basis(&[2, 2], &mut rng);
            let fast = maximally_correlated_form(&rho, &basis).unwrap();
            let slow = run_activation_gates(&rho, &basis).unwrap();
            assert!(max_abs_entry(&(fast.data() - slow.data())) < 1e-10);
        }
    }

    #[test]
    fn output_spectrum_is_padded_input_spectrum() {
        let mut rng = RngStream::new(22, 0).rng();
        let rho = crate::sampling::random_lowrank_thm3(2, 2, &mut rng).unwrap();
        let basis = random_basis(&[2, 2], &mut rng);
        let out = run_activation(&rho, &basis).unwrap();
        let mut in_eigs = rho.eigenvalues();
        in_eigs.resize(16, 0.0);
        in_eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let out_eigs = out.final_state.eigenvalues();
        for (a, b) in in_eigs.iter().zip(out_eigs.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn output_has_maximally_correlated_structure() {
        let mut rng = RngStream::new(23, 0).rng();
        let rho = crate::sampling::random_lowrank_thm3(2, 2, &mut rng).unwrap();
        let basis = random_basis(&[2, 2], &mut rng);
        let out = maximally_correlated_form(&rho, &basis).unwrap();
        let big_d = 4;
        for k in 0..big_d {
            for kp in 0..big_d {
                for l in 0..big_d {
                    for lp in 0..big_d {
                        if k != kp || l != lp {
                            let v = out.data()[(k * big_d + kp, l * big_d + lp)].norm();
                            assert!(v <= 1e-10);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bell_closed_forms() {
        let id = ProductBasis::identity(&[2, 2]);
        let b = bell();
        assert!((distillable_entanglement_mc(&b, &id).unwrap() - 1.0).abs() < 1e-10);
        assert!((negativity_mc_closed_form(&b, &id).unwrap() - 0.5).abs() < 1e-10);
        // the input is pure, so the output is pure too
        let out = maximally_correlated_form(&b, &id).unwrap();
        assert!((out.data()[(0, 15)].norm() - 0.5).abs() < 1e-12);
        let rank = out.eigenvalues().iter().filter(|&&e| e > 1e-10).count();
        assert_eq!(rank, 1);
    }

    #[test]
    fn negativity_values() {
        let cut = Bipartition::new(&[0], 2).unwrap();
        assert!((negativity(&bell(), &cut).unwrap() - 0.5).abs() < 1e-10);

        let prod = DensityMatrix::maximally_mixed(&[2]).tensor(&DensityMatrix::maximally_mixed(&[2]));
        assert!(negativity(&prod, &cut).unwrap() < 1e-12);

        // Schmidt coefficients (sqrt(0.9), sqrt(0.1)) -> N = sqrt(0.09) = 0.3
        let v = CVector::from_vec(vec![c(0.9f64.sqrt()), c(0.0), c(0.0), c(0.1f64.sqrt())]);
        let psi = PureState::new(v, vec![2, 2]).unwrap().to_density();
        assert!((negativity(&psi, &cut).unwrap() - 0.3).abs() < 1e-10);
    }

    #[test]
    fn closed_form_negativity_matches_gate_level_on_qutrits() {
        let mut rng = RngStream::new(24, 0).rng();
        let cut = system_ancilla_cut(2);
        for _ in 0..5 {
            let psi = haar_pure_state(&[3, 3, 3], &mut rng);
            let rho = psi.to_density().partial_trace(&[0, 1]).unwrap();
            let basis = random_basis(&[3, 3], &mut rng);
            let closed = negativity_mc_closed_form(&rho, &basis).unwrap();
            let out = run_activation_gates(&rho, &basis).unwrap();
            let gate = negativity(&out, &cut).unwrap();
            assert!((closed - gate).abs() < 1e-8, "closed={closed} gate={gate}");
        }
    }

    #[test]
    fn mixed_dims_rejected() {
        let mut rng = RngStream::new(25, 0).rng();
        let psi = haar_pure_state(&[2, 3], &mut rng);
        let rho = psi.to_density();
        let basis = ProductBasis::identity(&[2, 3]);
        assert!(matches!(
            run_activation(&rho, &basis),
            Err(Error::NonUniformDims(_))
        ));
    }
}
