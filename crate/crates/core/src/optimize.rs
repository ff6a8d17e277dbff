//! Minimization of basis-dependent objectives over products of local
//! unitary groups.
//!
//! The engine is a deterministic multi-start coordinate direct search on
//! generator coefficients (derivative-free; the objectives contain
//! eigenvalue functions with kinks at spectral crossings). An exhaustive
//! grid oracle certifies two-qubit results.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sampling::{haar_unitary, RngStream};
use crate::state::{hermitian_eigen, shannon_bits, CMatrix, DensityMatrix, ProductBasis};

/// Step size below which a coordinate search counts as converged.
const STEP_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    /// Total restarts; seeded starts come first, Haar-random starts fill the
    /// remainder. Should grow with the total parameter count sum(d_i^2).
    pub restarts: usize,
    pub max_evals_per_restart: usize,
    /// A full coordinate sweep improving by less than this halves the step;
    /// also the early-exit floor, since objectives are bounded below by 0.
    pub objective_tol: f64,
    pub seed: u64,
    /// Initial perturbation of a single generator coefficient, in radians.
    pub initial_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_evals_per_restart: 5000,
            objective_tol: 1e-8,
            seed: 0,
            initial_step: 0.3,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 || self.max_evals_per_restart < 1 {
            return Err(Error::BadDimension(
                "restarts and max_evals_per_restart must be >= 1".into(),
            ));
        }
        if self.objective_tol <= 0.0 || self.initial_step <= 0.0 {
            return Err(Error::BadDimension(
                "objective_tol and initial_step must be > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OptimizerReport {
    pub restarts_used: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// A point in the over-parameterized search space: sum(d_i^2) generator
/// coefficients, concatenated over subsystems.
#[derive(Debug, Clone)]
pub struct BasisPoint {
    pub params: Vec<f64>,
}

/// Hermitian matrix from d^2 real coefficients in the fixed generator
/// basis: d diagonal units, then (sym, antisym) pairs for each k < l,
/// orthonormal under the Frobenius inner product.
fn hermitian_from_params(params: &[f64], d: usize) -> CMatrix {
    let mut h = CMatrix::zeros(d, d);
    for k in 0..d {
        h[(k, k)] = Complex64::new(params[k], 0.0);
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut idx = d;
    for k in 0..d {
        for l in (k + 1)..d {
            let a = params[idx] * inv_sqrt2;
            let b = params[idx + 1] * inv_sqrt2;
            idx += 2;
            h[(k, l)] = Complex64::new(a, -b);
            h[(l, k)] = Complex64::new(a, b);
        }
    }
    h
}

/// exp(i H) for Hermitian H, via eigendecomposition.
fn exp_i_hermitian(h: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let d = h.nrows();
    let mut out = CMatrix::zeros(d, d);
    for j in 0..d {
        let phase = Complex64::new(0.0, vals[j]).exp();
        let col = vecs.column(j);
        for r in 0..d {
            for c in 0..d {
                out[(r, c)] += col[r] * phase * col[c].conj();
            }
        }
    }
    out
}

/// Decode a parameter vector into a product basis, U_i = exp(i H(params_i)).
pub fn decode(point: &BasisPoint, dims: &[usize]) -> Result<ProductBasis> {
    let expected: usize = dims.iter().map(|d| d * d).sum();
    if point.params.len() != expected {
        return Err(Error::LengthMismatch {
            got: point.params.len(),
            expected,
        });
    }
    let mut locals = Vec::with_capacity(dims.len());
    let mut off = 0;
    for &d in dims {
        let h = hermitian_from_params(&point.params[off..off + d * d], d);
        locals.push(exp_i_hermitian(&h));
        off += d * d;
    }
    ProductBasis::new(locals)
}

struct RestartResult {
    index: usize,
    basis: ProductBasis,
    value: f64,
    evaluations: usize,
    converged: bool,
}

/// Coordinate direct search started at `base`, exploring U_i = exp(i H_i) *
/// base_i. One coefficient is perturbed by +-step at a time; a sweep that
/// fails to improve by `objective_tol` halves the step.
fn coordinate_search<F>(
    objective: &F,
    base: &ProductBasis,
    cfg: &OptimizerConfig,
    index: usize,
) -> RestartResult
where
    F: Fn(&ProductBasis) -> f64 + Sync,
{
    let dims = base.dims();
    let nsub = dims.len();
    let nparams: usize = dims.iter().map(|d| d * d).sum();
    // param index -> owning subsystem
    let mut owner = Vec::with_capacity(nparams);
    let mut sub_offset = vec![0usize; nsub];
    {
        let mut off = 0;
        for (i, &d) in dims.iter().enumerate() {
            sub_offset[i] = off;
            for _ in 0..d * d {
                owner.push(i);
            }
            off += d * d;
        }
    }
    let mut params = vec![0.0f64; nparams];
    let mut locals: Vec<CMatrix> = base.locals().to_vec();
    let rebuild = |params: &[f64], i: usize| -> CMatrix {
        let d = dims[i];
        let h = hermitian_from_params(&params[sub_offset[i]..sub_offset[i] + d * d], d);
        exp_i_hermitian(&h) * &base.locals()[i]
    };
    let mut best = objective(&ProductBasis::trusted(locals.clone()));
    let mut evals = 1usize;
    let mut step = cfg.initial_step;
    loop {
        let mut sweep_gain = 0.0;
        for c in 0..nparams {
            for sgn in [1.0, -1.0] {
                if evals >= cfg.max_evals_per_restart {
                    return RestartResult {
                        index,
                        basis: ProductBasis::trusted(locals),
                        value: best,
                        evaluations: evals,
                        converged: false,
                    };
                }
                let i = owner[c];
                params[c] += sgn * step;
                let candidate_local = rebuild(&params, i);
                let previous = std::mem::replace(&mut locals[i], candidate_local);
                let v = objective(&ProductBasis::trusted(locals.clone()));
                evals += 1;
                if v < best {
                    sweep_gain += best - v;
                    best = v;
                } else {
                    params[c] -= sgn * step;
                    locals[i] = previous;
                }
            }
        }
        if sweep_gain < cfg.objective_tol {
            step *= 0.5;
            if step < STEP_FLOOR {
                return RestartResult {
                    index,
                    basis: ProductBasis::trusted(locals),
                    value: best,
                    evaluations: evals,
                    converged: true,
                };
            }
        }
    }
}

/// Minimize a basis objective. Seeded `starts` occupy the first restarts
/// (supply the eigenbasis-aligned start here); Haar-random bases fill the
/// rest, each drawn from the stream (cfg.seed, restart_index) so the result
/// is identical for a fixed config at any degree of concurrency. The winner
/// is the minimum by (value, restart index).
pub fn minimize<F>(
    objective: &F,
    dims: &[usize],
    cfg: &OptimizerConfig,
    starts: &[ProductBasis],
) -> Result<(ProductBasis, f64, OptimizerReport)>
where
    F: Fn(&ProductBasis) -> f64 + Sync,
{
    cfg.validate()?;
    for s in starts {
        if s.dims() != dims {
            return Err(Error::DimMismatch(format!(
                "start basis dims {:?} vs {:?}",
                s.dims(),
                dims
            )));
        }
    }
    let mut results: Vec<RestartResult> = Vec::new();
    let mut reached_floor = false;
    for (r, s) in starts.iter().enumerate() {
        let res = coordinate_search(objective, s, cfg, r);
        reached_floor = res.value <= cfg.objective_tol;
        results.push(res);
        if reached_floor {
            break;
        }
    }
    if !reached_floor && cfg.restarts > starts.len() {
        let first_haar = starts.len();
        let mut haar: Vec<RestartResult> = (first_haar..cfg.restarts)
            .into_par_iter()
            .map(|r| {
                let mut rng = RngStream::new(cfg.seed, r as u64).rng();
                let base = ProductBasis::trusted(
                    dims.iter().map(|&d| haar_unitary(d, &mut rng)).collect(),
                );
                coordinate_search(objective, &base, cfg, r)
            })
            .collect();
        results.append(&mut haar);
    }
    let evaluations: usize = results.iter().map(|r| r.evaluations).sum();
    let restarts_used = results.len();
    let winner = results
        .into_iter()
        .min_by(|a, b| {
            (a.value, a.index)
                .partial_cmp(&(b.value, b.index))
                .unwrap()
        })
        .expect("at least one restart");
    let converged = winner.converged || winner.value <= cfg.objective_tol;
    Ok((
        winner.basis,
        winner.value,
        OptimizerReport {
            restarts_used,
            evaluations,
            converged,
        },
    ))
}

/// Objectives the two-qubit grid oracle can certify. Both are Lipschitz
/// functions of the basis angles, so a 3 degree scan plus a 0.3 degree
/// refinement pins the minimum to about 2e-3.
pub enum GridObjective<'a> {
    /// S(rho^B) - S(rho): the relative entropy of quantumness objective.
    EntropyGap(&'a DensityMatrix),
    /// sum_{i<j} |rho^B_ij|: the negativity of quantumness objective.
    CoherenceSum(&'a DensityMatrix),
}

impl<'a> GridObjective<'a> {
    fn state(&self) -> &'a DensityMatrix {
        match self {
            GridObjective::EntropyGap(r) | GridObjective::CoherenceSum(r) => r,
        }
    }
}

type Qubit = [Complex64; 2];

/// Both basis vectors for a point on the half Bloch sphere.
fn qubit_basis(theta: f64, phi: f64) -> (Qubit, Qubit) {
    let (s, c) = theta.sin_cos();
    let e = Complex64::new(0.0, phi).exp();
    (
        [Complex64::new(c, 0.0), e * s],
        [-e.conj() * s, Complex64::new(c, 0.0)],
    )
}

/// R_{kk'}[x][y] = sum_ab conj(bk[a]) rho[(a,x),(b,y)] bk'[b].
fn contract_first([bk, bkp]: [&Qubit; 2], rho: &[[Complex64; 4]; 4]) -> [[Complex64; 2]; 2] {
    let mut r = [[Complex64::new(0.0, 0.0); 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            let mut s = Complex64::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    s += bk[a].conj() * rho[a * 2 + x][b * 2 + y] * bkp[b];
                }
            }
            r[x][y] = s;
        }
    }
    r
}

fn quad_form(c_l: &Qubit, r: &[[Complex64; 2]; 2], c_lp: &Qubit) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for x in 0..2 {
        for y in 0..2 {
            s += c_l[x].conj() * r[x][y] * c_lp[y];
        }
    }
    s
}

/// Angular distance between candidate angle pairs: max over the four
/// angles, with the phases compared modulo 2 pi.
fn candidate_distance(a: &((f64, f64), (f64, f64)), b: &((f64, f64), (f64, f64))) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let wrap = |x: f64| {
        let r = x.rem_euclid(two_pi);
        r.min(two_pi - r)
    };
    (a.0 .0 - b.0 .0)
        .abs()
        .max(wrap(a.0 .1 - b.0 .1))
        .max((a.1 .0 - b.1 .0).abs())
        .max(wrap(a.1 .1 - b.1 .1))
}

/// Product-basis angle pairs over the Cartesian product of two angle
/// lists whose objective value is within `margin` of the best found,
/// sorted by value and capped at `keep` entries. Candidates closer than
/// `sep` (radians) collapse to the better of the two, so the list holds
/// distinct basins rather than neighbors of the single best cell. A coarse
/// scan under-samples every basin, so the global minimum can hide in a
/// basin whose coarse sample loses to several others; refining everything
/// within the sampling-error margin guards against that.
fn scan_angles(
    rho: &[[Complex64; 4]; 4],
    s_rho: f64,
    coherence: bool,
    pts1: &[(f64, f64)],
    pts2: &[(f64, f64)],
    keep: usize,
    sep: f64,
    margin: f64,
) -> Vec<((f64, f64), (f64, f64), f64)> {
    let bases2: Vec<(Qubit, Qubit)> = pts2.iter().map(|&(t, p)| qubit_basis(t, p)).collect();
    let mut top: Vec<((f64, f64), (f64, f64), f64)> = Vec::with_capacity(keep + 1);
    let mut cutoff = f64::INFINITY;
    for &(t1, p1) in pts1 {
        let (b0, b1) = qubit_basis(t1, p1);
        let r00 = contract_first([&b0, &b0], rho);
        let r11 = contract_first([&b1, &b1], rho);
        let r01 = if coherence {
            Some(contract_first([&b0, &b1], rho))
        } else {
            None
        };
        for (j, (c0, c1)) in bases2.iter().enumerate() {
            let v = if let Some(r01) = &r01 {
                // sum_{i<j} |M_ij| over the 4x4 matrix in the rotated basis
                let m01 = quad_form(c0, &r00, c1);
                let m23 = quad_form(c0, &r11, c1);
                let m02 = quad_form(c0, r01, c0);
                let m03 = quad_form(c0, r01, c1);
                let m12 = quad_form(c1, r01, c0);
                let m13 = quad_form(c1, r01, c1);
                m01.norm() + m23.norm() + m02.norm() + m03.norm() + m12.norm() + m13.norm()
            } else {
                let p00 = quad_form(c0, &r00, c0).re;
                let p01 = quad_form(c1, &r00, c1).re;
                let p10 = quad_form(c0, &r11, c0).re;
                let p11 = quad_form(c1, &r11, c1).re;
                shannon_bits([p00, p01, p10, p11]) - s_rho
            };
            if v < cutoff {
                let cand = ((t1, p1), pts2[j]);
                if let Some(i) = top
                    .iter()
                    .position(|e| candidate_distance(&(e.0, e.1), &cand) < sep)
                {
                    if v < top[i].2 {
                        top.remove(i);
                        let pos = top.partition_point(|e| e.2 <= v);
                        top.insert(pos, (cand.0, cand.1, v));
                    }
                } else {
                    let pos = top.partition_point(|e| e.2 <= v);
                    top.insert(pos, (cand.0, cand.1, v));
                }
                while top.len() > keep {
                    top.pop();
                }
                while top.len() > 1 && top.last().unwrap().2 > top[0].2 + margin {
                    top.pop();
                }
                cutoff = top[0].2 + margin;
                if top.len() == keep {
                    cutoff = cutoff.min(top[keep - 1].2);
                }
            }
        }
    }
    top
}

fn angle_grid(res_deg: f64) -> Vec<(f64, f64)> {
    let res = res_deg.to_radians();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let two_pi = std::f64::consts::TAU;
    let mut pts = Vec::new();
    let n_theta = (half_pi / res).ceil() as usize;
    let n_phi = (two_pi / res).ceil() as usize;
    for it in 0..=n_theta {
        let theta = (it as f64 * res).min(half_pi);
        for ip in 0..n_phi {
            pts.push((theta, ip as f64 * res));
        }
    }
    pts
}

fn refine_grid(center: (f64, f64), span: f64, step: f64) -> Vec<(f64, f64)> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let two_pi = std::f64::consts::TAU;
    let n = (span / step).ceil() as i64;
    let mut pts = Vec::new();
    for it in -n..=n {
        let theta = (center.0 + it as f64 * step).clamp(0.0, half_pi);
        for ip in -n..=n {
            let phi = (center.1 + ip as f64 * step).rem_euclid(two_pi);
            pts.push((theta, phi));
        }
    }
    pts
}

fn basis_from_angles(q1: (f64, f64), q2: (f64, f64)) -> ProductBasis {
    let to_local = |(t, p): (f64, f64)| -> CMatrix {
        let (b0, b1) = qubit_basis(t, p);
        // rows are the bras
        CMatrix::from_row_slice(
            2,
            2,
            &[b0[0].conj(), b0[1].conj(), b1[0].conj(), b1[1].conj()],
        )
    };
    ProductBasis::trusted(vec![to_local(q1), to_local(q2)])
}

/// Exhaustively scan product bases of a two-qubit system at the given
/// angular resolution (degrees), then refine the best coarse candidates in
/// two stages (a tenth and a hundredth of the resolution). The result is
/// exact to about +-2e-3 on the objective.
pub fn grid_certify_two_qubits(
    objective: &GridObjective,
    resolution_deg: f64,
) -> Result<(ProductBasis, f64)> {
    let rho = objective.state();
    if rho.dims() != [2, 2] {
        return Err(Error::NotTwoQubits(rho.dims().to_vec()));
    }
    let coherence = matches!(objective, GridObjective::CoherenceSum(_));
    let s_rho = if coherence {
        0.0
    } else {
        rho.von_neumann_entropy()
    };
    let mut arr = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            arr[i][j] = rho.data()[(i, j)];
        }
    }
    let coarse = angle_grid(resolution_deg);
    let span = resolution_deg.to_radians();
    let step = (resolution_deg / 10.0).to_radians();
    // A coarse cell can over-read its basin minimum by roughly the
    // objective's Lipschitz constant times the cell half-diagonal, so every
    // distinct basin within that margin of the best coarse value gets
    // refined.
    let margin = 0.025 * resolution_deg;
    let candidates = scan_angles(&arr, s_rho, coherence, &coarse, &coarse, 96, 3.0 * span, margin);
    let mut best: Option<((f64, f64), (f64, f64), f64)> = None;
    for &(c1, c2, _) in &candidates {
        let fine1 = refine_grid(c1, span, step);
        let fine2 = refine_grid(c2, span, step);
        let found = scan_angles(&arr, s_rho, coherence, &fine1, &fine2, 1, 0.0, 0.0)[0];
        if best.is_none_or(|b| found.2 < b.2) {
            best = Some(found);
        }
    }
    let (c1, c2, _) = best.expect("candidate list is nonempty");
    let finer1 = refine_grid(c1, step, step / 10.0);
    let finer2 = refine_grid(c2, step, step / 10.0);
    let (f1, f2, value) = scan_angles(&arr, s_rho, coherence, &finer1, &finer2, 1, 0.0, 0.0)[0];
    Ok((basis_from_angles(f1, f2), value.max(0.0)))
}
