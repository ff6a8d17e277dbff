//! Python bindings: density matrices, product bases, the activation
//! protocol, and the quantumness measures.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nonclassical::optimize::OptimizerConfig;
use nonclassical::sampling::{
    haar_pure_state, random_lowrank_thm3, random_separable_thm2, RngStream,
};
use nonclassical::state::{mutual_information, Bipartition, CMatrix};
use nonclassical::{protocol, quantumness, zoo};

fn err(e: nonclassical::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_cmatrix(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(CMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

fn from_cmatrix(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

/// Density matrix over qudit subsystems with fixed dimensions.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct DensityMatrix {
    inner: nonclassical::DensityMatrix,
}

#[pymethods]
impl DensityMatrix {
    /// Validates Hermiticity, unit trace, and positivity.
    #[new]
    fn new(matrix: Vec<Vec<Complex64>>, dims: Vec<usize>) -> PyResult<Self> {
        let data = to_cmatrix(matrix)?;
        Ok(Self {
            inner: nonclassical::DensityMatrix::new(data, dims).map_err(err)?,
        })
    }

    fn dims(&self) -> Vec<usize> {
        self.inner.dims().to_vec()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        from_cmatrix(self.inner.data())
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues()
    }

    fn von_neumann_entropy(&self) -> f64 {
        self.inner.von_neumann_entropy()
    }

    fn partial_trace(&self, keep: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.partial_trace(&keep).map_err(err)?,
        })
    }

    /// Mutual information in bits across left-subsystems : rest.
    fn mutual_information(&self, left: Vec<usize>) -> PyResult<f64> {
        let cut = Bipartition::new(&left, self.inner.n_subsystems()).map_err(err)?;
        mutual_information(&self.inner, &cut).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dims={:?})", self.inner.dims())
    }
}

/// Product of local orthonormal bases; row k of each local unitary is the
/// bra of basis vector k.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct ProductBasis {
    inner: nonclassical::ProductBasis,
}

#[pymethods]
impl ProductBasis {
    #[new]
    fn new(locals_: Vec<Vec<Vec<Complex64>>>) -> PyResult<Self> {
        let locals_ = locals_
            .into_iter()
            .map(to_cmatrix)
            .collect::<PyResult<Vec<CMatrix>>>()?;
        Ok(Self {
            inner: nonclassical::ProductBasis::new(locals_).map_err(err)?,
        })
    }

    #[staticmethod]
    fn identity(dims: Vec<usize>) -> Self {
        Self {
            inner: nonclassical::ProductBasis::identity(&dims),
        }
    }

    fn locals(&self) -> Vec<Vec<Vec<Complex64>>> {
        self.inner.locals().iter().map(from_cmatrix).collect()
    }

    fn __repr__(&self) -> String {
        format!("ProductBasis(dims={:?})", self.inner.dims())
    }
}

fn opt_config(seed: u64, restarts: usize, max_evals: usize, tol: f64) -> OptimizerConfig {
    OptimizerConfig {
        seed,
        restarts,
        max_evals_per_restart: max_evals,
        objective_tol: tol,
        ..OptimizerConfig::default()
    }
}

fn estimate_dict<'py>(
    py: Python<'py>,
    est: quantumness::QuantumnessEstimate,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", est.value)?;
    d.set_item("bound_kind", est.bound_kind.label())?;
    d.set_item(
        "best_basis",
        ProductBasis {
            inner: est.best_basis,
        }
        .into_pyobject(py)?,
    )?;
    d.set_item("converged", est.report.converged)?;
    d.set_item("evaluations", est.report.evaluations)?;
    Ok(d)
}

/// Relative entropy of quantumness in bits (minimum dephasing entropy gap).
#[pyfunction]
#[pyo3(signature = (state, seed=0, restarts=20, max_evals=5000, tol=1e-8, grid=false))]
fn req<'py>(
    py: Python<'py>,
    state: &DensityMatrix,
    seed: u64,
    restarts: usize,
    max_evals: usize,
    tol: f64,
    grid: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let est = if grid && state.inner.dims() == [2, 2] {
        quantumness::req_grid_certified(&state.inner, 3.0)
    } else {
        quantumness::req(&state.inner, &opt_config(seed, restarts, max_evals, tol))
    }
    .map_err(err)?;
    estimate_dict(py, est)
}

/// Negativity of quantumness (minimum coherence sum / 2).
#[pyfunction]
#[pyo3(signature = (state, seed=0, restarts=20, max_evals=5000, tol=1e-8, grid=false))]
fn negativity_of_quantumness<'py>(
    py: Python<'py>,
    state: &DensityMatrix,
    seed: u64,
    restarts: usize,
    max_evals: usize,
    tol: f64,
    grid: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let est = if grid && state.inner.dims() == [2, 2] {
        quantumness::negativity_of_quantumness_grid_certified(&state.inner, 3.0)
    } else {
        quantumness::negativity_of_quantumness(
            &state.inner,
            &opt_config(seed, restarts, max_evals, tol),
        )
    }
    .map_err(err)?;
    estimate_dict(py, est)
}

/// Run the activation protocol against a fixed adversary basis.
#[pyfunction]
#[pyo3(signature = (state, adversary=None))]
fn run_activation<'py>(
    py: Python<'py>,
    state: &DensityMatrix,
    adversary: Option<&ProductBasis>,
) -> PyResult<Bound<'py, PyDict>> {
    let basis = match adversary {
        Some(b) => b.inner.clone(),
        None => nonclassical::ProductBasis::identity(state.inner.dims()),
    };
    let outcome = protocol::run_activation(&state.inner, &basis).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("e_distillable", outcome.e_distillable)?;
    d.set_item("negativity", outcome.negativity_value)?;
    d.set_item(
        "final_state",
        DensityMatrix {
            inner: outcome.final_state,
        }
        .into_pyobject(py)?,
    )?;
    d.set_item(
        "dephased_input",
        DensityMatrix {
            inner: outcome.dephased_input,
        }
        .into_pyobject(py)?,
    )?;
    Ok(d)
}

/// Decide whether a state is strictly classically correlated.
#[pyfunction]
#[pyo3(signature = (state, tol=1e-6))]
fn is_classical<'py>(
    py: Python<'py>,
    state: &DensityMatrix,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let v = quantumness::is_classical(&state.inner, tol).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("is_classical", v.is_classical)?;
    d.set_item("method", v.method.label())?;
    d.set_item("residual", v.residual)?;
    d.set_item(
        "certificate",
        v.certificate
            .map(|b| ProductBasis { inner: b }.into_pyobject(py))
            .transpose()?,
    )?;
    Ok(d)
}

#[pyfunction]
fn bell() -> DensityMatrix {
    DensityMatrix { inner: zoo::bell() }
}

#[pyfunction]
fn mix2() -> DensityMatrix {
    DensityMatrix { inner: zoo::mix2() }
}

#[pyfunction]
fn werner(d: usize, p: f64) -> PyResult<DensityMatrix> {
    Ok(DensityMatrix {
        inner: zoo::werner(d, p).map_err(err)?,
    })
}

#[pyfunction]
fn maximally_entangled(d: usize) -> PyResult<DensityMatrix> {
    Ok(DensityMatrix {
        inner: zoo::maximally_entangled(d).map_err(err)?.to_density(),
    })
}

#[pyfunction]
fn classical_diagonal(probs: Vec<f64>, dims: Vec<usize>) -> PyResult<DensityMatrix> {
    Ok(DensityMatrix {
        inner: zoo::classical_diagonal(&probs, &dims).map_err(err)?,
    })
}

/// Seeded sample from the locally-rotated separable ensemble.
#[pyfunction]
fn random_thm2(d: usize, m: usize, seed: u64) -> PyResult<DensityMatrix> {
    let mut rng = RngStream::new(seed, 0).rng();
    Ok(DensityMatrix {
        inner: random_separable_thm2(d, m, &mut rng).map_err(err)?,
    })
}

/// Seeded rank-m sample (partial trace of a Haar pure state).
#[pyfunction]
fn random_thm3(d: usize, m: usize, seed: u64) -> PyResult<DensityMatrix> {
    let mut rng = RngStream::new(seed, 0).rng();
    Ok(DensityMatrix {
        inner: random_lowrank_thm3(d, m, &mut rng).map_err(err)?,
    })
}

/// Seeded Haar-random pure state over the given dims, as a density matrix.
#[pyfunction]
fn random_pure(dims: Vec<usize>, seed: u64) -> DensityMatrix {
    let mut rng = RngStream::new(seed, 0).rng();
    DensityMatrix {
        inner: haar_pure_state(&dims, &mut rng).to_density(),
    }
}

/// Default environment size ceil((log2 d)^4).
#[pyfunction]
fn default_m(d: usize) -> PyResult<usize> {
    nonclassical::sampling::default_m(d).map_err(err)
}

#[pymodule]
fn nonclassical_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<DensityMatrix>()?;
    m.add_class::<ProductBasis>()?;
    m.add_function(wrap_pyfunction!(req, m)?)?;
    m.add_function(wrap_pyfunction!(negativity_of_quantumness, m)?)?;
    m.add_function(wrap_pyfunction!(run_activation, m)?)?;
    m.add_function(wrap_pyfunction!(is_classical, m)?)?;
    m.add_function(wrap_pyfunction!(bell, m)?)?;
    m.add_function(wrap_pyfunction!(mix2, m)?)?;
    m.add_function(wrap_pyfunction!(werner, m)?)?;
    m.add_function(wrap_pyfunction!(maximally_entangled, m)?)?;
    m.add_function(wrap_pyfunction!(classical_diagonal, m)?)?;
    m.add_function(wrap_pyfunction!(random_thm2, m)?)?;
    m.add_function(wrap_pyfunction!(random_thm3, m)?)?;
    m.add_function(wrap_pyfunction!(random_pure, m)?)?;
    m.add_function(wrap_pyfunction!(default_m, m)?)?;
    m.add("VERSION", nonclassical::VERSION)?;
    Ok(())
}
