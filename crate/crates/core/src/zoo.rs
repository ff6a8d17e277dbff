//! Named example states used by the CLI and the test suites.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{CMatrix, CVector, DensityMatrix, PureState};

/// Maximally entangled two-qudit pure state (sum_j |jj>) / sqrt(d).
pub fn maximally_entangled(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::BadDimension(format!("d = {d} must be >= 2")));
    }
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = CVector::zeros(d * d);
    for j in 0..d {
        v[j * d + j] = amp;
    }
    PureState::new(v, vec![d, d])
}

/// The two-qubit Bell state (|00> + |11>) / sqrt(2) as a density matrix.
pub fn bell() -> DensityMatrix {
    maximally_entangled(2).expect("d = 2 is valid").to_density()
}

/// Werner-like mixture (1 - p) I / d^2 + p |psi><psi| with |psi| maximally
/// entangled.
pub fn werner(d: usize, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadDimension(format!("p = {p} must be in [0, 1]")));
    }
    let psi = maximally_entangled(d)?.to_density();
    let mixed = DensityMatrix::maximally_mixed(&[d, d]);
    DensityMatrix::new(
        mixed.data().scale(1.0 - p) + psi.data().scale(p),
        vec![d, d],
    )
}

/// Diagonal state with the given spectrum over the given subsystem dims.
pub fn classical_diagonal(probs: &[f64], dims: &[usize]) -> Result<DensityMatrix> {
    let d: usize = dims.iter().product();
    if probs.len() != d {
        return Err(Error::LengthMismatch {
            got: probs.len(),
            expected: d,
        });
    }
    let mut m = CMatrix::zeros(d, d);
    for (i, p) in probs.iter().enumerate() {
        m[(i, i)] = Complex64::new(*p, 0.0);
    }
    DensityMatrix::new(m, dims.to_vec())
}

/// The separable but nonclassical mixture (|00><00| + |++><++|) / 2.
pub fn mix2() -> DensityMatrix {
    let zero = PureState::basis_state(0, &[2, 2]).to_density();
    let h = Complex64::new(0.5, 0.0);
    let plus = PureState::new(CVector::from_vec(vec![h, h, h, h]), vec![2, 2])
        .expect("normalized")
        .to_density();
    DensityMatrix::new(zero.data().scale(0.5) + plus.data().scale(0.5), vec![2, 2])
        .expect("convex mixture of states")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::mutual_information;
    use crate::state::Bipartition;

    #[test]
    fn named_states_are_valid() {
        let cut = Bipartition::new(&[0], 2).unwrap();
        assert!((mutual_information(&bell(), &cut).unwrap() - 2.0).abs() < 1e-10);

        let w0 = werner(2, 0.0).unwrap();
        assert!((w0.data()[(0, 0)].re - 0.25).abs() < 1e-12);
        assert!(w0.data()[(0, 3)].norm() < 1e-12);

        let m3 = maximally_entangled(3).unwrap().to_density();
        assert!((m3.von_neumann_entropy()).abs() < 1e-10);

        let c = classical_diagonal(&[0.5, 0.3, 0.15, 0.05], &[2, 2]).unwrap();
        assert!((c.von_neumann_entropy() - crate::state::shannon_bits(vec![0.5, 0.3, 0.15, 0.05])).abs() < 1e-10);

        assert!(werner(2, 1.5).is_err());
        assert!(classical_diagonal(&[1.0], &[2]).is_err());
    }

    #[test]
    fn mix2_marginal_and_purity() {
        let m = mix2();
        assert!((m.data().map(|z| z.re).trace() - 1.0).abs() < 1e-12);
        let evs = m.eigenvalues();
        assert!(evs.iter().filter(|&&e| e > 1e-10).count() == 2);
    }
}
