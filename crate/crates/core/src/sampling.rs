//! Seeded Haar samplers and the random separable / low-rank ensembles.
//!
//! Every sampler is a pure function of an explicit RNG. Reproducibility
//! contract: a `ChaCha12` generator keyed by (seed, stream_id) yields the
//! same draws on every platform, and distinct stream ids give independent
//! streams, so samples can be generated in any order or in parallel.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::state::{CMatrix, CVector, DensityMatrix, PureState};

/// A (seed, stream_id) pair naming one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Which random-state construction an experiment draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    /// Mixture of locally Haar-rotated classical states; separable by
    /// construction, rank at most d*m.
    SeparableThm2,
    /// Partial trace of a Haar pure state over an m-dimensional environment;
    /// rank at most m.
    LowrankThm3,
}

impl EnsembleKind {
    pub fn label(&self) -> &'static str {
        match self {
            EnsembleKind::SeparableThm2 => "separable_thm2",
            EnsembleKind::LowrankThm3 => "lowrank_thm3",
        }
    }
}

/// Full description of a random-state sweep; identical specs reproduce
/// identical states bit for bit.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub d: usize,
    pub m: usize,
    pub samples: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::BadDimension(format!("d = {} must be >= 2", self.d)));
        }
        if self.m < 1 || self.samples < 1 {
            return Err(Error::BadDimension(
                "m and samples must both be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Generate sample `index`; each sample uses its own stream.
    pub fn generate(&self, index: usize) -> Result<DensityMatrix> {
        let mut rng = RngStream::new(self.seed, index as u64).rng();
        match self.kind {
            EnsembleKind::SeparableThm2 => random_separable_thm2(self.d, self.m, &mut rng),
            EnsembleKind::LowrankThm3 => random_lowrank_thm3(self.d, self.m, &mut rng),
        }
    }
}

/// Default environment size m = ceil((log2 d)^4).
pub fn default_m(d: usize) -> Result<usize> {
    if d < 2 {
        return Err(Error::BadDimension(format!("d = {d} must be >= 2")));
    }
    Ok((d as f64).log2().powi(4).ceil() as usize)
}

fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn ginibre<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary: Ginibre sample, QR factorization, and the
/// R-diagonal phase correction. The correction makes the result
/// independent of the factorization's phase convention; a raw Q whose R
/// diagonal carries data-dependent phases is *not* Haar (see
/// `haar_unitary_uncorrected`).
pub fn haar_unitary<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Raw Q of a Householder QR of a Ginibre sample, with the pivot-phase
/// reflector convention (r_jj = -e^{i arg x_j} |x|) and no correction.
/// Deliberately biased; kept as a statistical negative control.
pub fn haar_unitary_uncorrected<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    let mut a = ginibre(d, rng);
    let mut q = CMatrix::identity(d, d);
    for k in 0..d {
        let x_norm: f64 = (k..d).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if x_norm < 1e-300 {
            continue;
        }
        let x0 = a[(k, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * x_norm;
        // v = x - alpha e_1, normalized
        let mut v = CVector::zeros(d - k);
        for i in k..d {
            v[i - k] = a[(i, k)];
        }
        v[0] -= alpha;
        let vn = v.norm();
        if vn < 1e-300 {
            continue;
        }
        v /= Complex64::new(vn, 0.0);
        // apply H = I - 2 v v^dag to the trailing block of A and to Q
        for col in k..d {
            let dot: Complex64 = (k..d).map(|i| v[i - k].conj() * a[(i, col)]).sum();
            for i in k..d {
                a[(i, col)] -= 2.0 * v[i - k] * dot;
            }
        }
        for row in 0..d {
            let dot: Complex64 = (k..d).map(|i| q[(row, i)] * v[i - k]).sum();
            for i in k..d {
                q[(row, i)] -= 2.0 * dot * v[i - k].conj();
            }
        }
    }
    q
}

/// Haar-random pure state: a normalized vector of independent complex
/// Gaussians.
pub fn haar_pure_state<R: Rng>(dims: &[usize], rng: &mut R) -> PureState {
    let d: usize = dims.iter().product();
    let mut v = CVector::from_fn(d, |_, _| complex_gaussian(rng));
    let n = v.norm();
    v /= Complex64::new(n, 0.0);
    PureState::new(v, dims.to_vec()).expect("normalized by construction")
}

/// sigma_AB = (1/dm) sum_{i,j} |i><i|_A (x) (U_j |i><i| U_j^dag)_B with m
/// independent Haar unitaries U_j. Separable, rank <= d*m, Tr_B sigma = I/d.
pub fn random_separable_thm2<R: Rng>(d: usize, m: usize, rng: &mut R) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::BadDimension(format!("d = {d} must be >= 2")));
    }
    if m < 1 {
        return Err(Error::BadDimension(format!("m = {m} must be >= 1")));
    }
    let unitaries: Vec<CMatrix> = (0..m).map(|_| haar_unitary(d, rng)).collect();
    let mut out = CMatrix::zeros(d * d, d * d);
    let w = 1.0 / (d * m) as f64;
    for i in 0..d {
        for u in &unitaries {
            // B-side projector U|i><i|U^dag from the i-th column of U.
            let col = u.column(i);
            for x in 0..d {
                for y in 0..d {
                    out[(i * d + x, i * d + y)] += col[x] * col[y].conj() * w;
                }
            }
        }
    }
    Ok(DensityMatrix::new(out, vec![d, d])?)
}

/// rho_AB = Tr_C |psi><psi| for a Haar pure state on C^d (x) C^d (x) C^m.
pub fn random_lowrank_thm3<R: Rng>(d: usize, m: usize, rng: &mut R) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::BadDimension(format!("d = {d} must be >= 2")));
    }
    if m < 1 {
        return Err(Error::BadDimension(format!("m = {m} must be >= 1")));
    }
    if m == 1 {
        let psi = haar_pure_state(&[d, d], rng);
        return Ok(psi.to_density());
    }
    let psi = haar_pure_state(&[d, d, m], rng);
    psi.to_density().partial_trace(&[0, 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::max_abs_entry;

    #[test]
    fn default_m_values() {
        assert_eq!(default_m(2).unwrap(), 1);
        assert_eq!(default_m(3).unwrap(), 7);
        assert_eq!(default_m(4).unwrap(), 16);
        assert!(default_m(1).is_err());
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = RngStream::new(1, 0).rng();
        for d in 1..=5 {
            let u = haar_unitary(d, &mut rng);
            let dev = max_abs_entry(&(&u * u.adjoint() - CMatrix::identity(d, d)));
            assert!(dev < 1e-10, "d={d} dev={dev}");
        }
    }

    #[test]
    fn d1_haar_is_a_phase() {
        let mut rng = RngStream::new(2, 0).rng();
        let u = haar_unitary(1, &mut rng);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn streams_are_independent_and_reproducible() {
        let a1 = haar_pure_state(&[2, 2], &mut RngStream::new(42, 0).rng());
        let a2 = haar_pure_state(&[2, 2], &mut RngStream::new(42, 0).rng());
        let b = haar_pure_state(&[2, 2], &mut RngStream::new(42, 1).rng());
        assert_eq!(a1.amplitudes(), a2.amplitudes());
        assert!(max_abs_entry(&CMatrix::from_fn(4, 1, |i, _| {
            a1.amplitudes()[i] - b.amplitudes()[i]
        })) > 1e-6);
    }

    #[test]
    fn thm2_structure() {
        let mut rng = RngStream::new(3, 0).rng();
        let sigma = random_separable_thm2(3, 2, &mut rng).unwrap();
        let s = sigma.von_neumann_entropy();
        assert!(s <= 3f64.log2() + 1.0 + 1e-9);
        let ra = sigma.partial_trace(&[0]).unwrap();
        let dev = max_abs_entry(&(ra.data() - CMatrix::identity(3, 3).scale(1.0 / 3.0)));
        assert!(dev < 1e-10);
    }

    #[test]
    fn thm3_rank_and_entropy() {
        let mut rng = RngStream::new(4, 0).rng();
        let pure = random_lowrank_thm3(2, 1, &mut rng).unwrap();
        assert!(pure.von_neumann_entropy() < 1e-9);
        for _ in 0..20 {
            let rho = random_lowrank_thm3(2, 2, &mut rng).unwrap();
            let rank = rho.eigenvalues().iter().filter(|&&e| e > 1e-10).count();
            assert!(rank <= 2);
            assert!(rho.von_neumann_entropy() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn ensemble_spec_determinism() {
        let spec = EnsembleSpec {
            kind: EnsembleKind::SeparableThm2,
            d: 2,
            m: 2,
            samples: 3,
            seed: 99,
        };
        let a = spec.generate(1).unwrap();
        let b = spec.generate(1).unwrap();
        assert_eq!(a.data(), b.data());
    }
}
