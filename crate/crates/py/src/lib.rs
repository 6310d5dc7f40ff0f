use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use apriesz_core::bohrint::{mean_abs, Budget, IntegralEstimate};
use apriesz_core::criteria::{self, ScanStrategy};
use apriesz_core::flatness::{self as flat, PolyFamilySpec};
use apriesz_core::riesz::{self, StageConfig};
use apriesz_core::{Error, Frequency, SymbolBasis};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::SupportCap { .. }
        | Error::Budget(_)
        | Error::TensorDimension { .. }
        | Error::ExponentOverflow
        | Error::Integration(_)
        | Error::Inconsistency(_)
        | Error::NonFinite => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_json<T: Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Tensor quadrature when `samples` is None, otherwise grid-or-Monte-Carlo.
fn budget(samples: Option<u64>, seed: u64) -> Budget {
    match samples {
        Some(n) => Budget::auto(n, seed),
        None => Budget::tensor(),
    }
}

fn estimate(e: IntegralEstimate) -> (f64, f64) {
    let err = e.uncertainty();
    (e.value, err)
}

/// Symbols with real values; the unit symbol `1` is always present.
#[pyclass(name = "Basis", frozen)]
struct PyBasis {
    inner: Arc<SymbolBasis>,
}

#[pymethods]
impl PyBasis {
    #[new]
    #[pyo3(signature = (symbols = Vec::new()))]
    fn new(symbols: Vec<(String, f64)>) -> PyResult<Self> {
        Ok(PyBasis {
            inner: SymbolBasis::with_unit(symbols).map_err(py_err)?,
        })
    }

    fn names(&self) -> Vec<String> {
        self.inner.symbols().iter().map(|s| s.name.clone()).collect()
    }

    /// Canonical form and real value of a frequency expression.
    fn frequency(&self, text: &str) -> PyResult<(String, f64)> {
        let f = Frequency::parse(&self.inner, text).map_err(py_err)?;
        Ok((f.to_string(), f.real_value()))
    }
}

#[pyclass(name = "RankOneParams", frozen)]
struct PyRankOneParams {
    inner: riesz::RankOneParams,
}

#[pymethods]
impl PyRankOneParams {
    /// Stages as `(p, [spacer, ...])` with `p + 1` spacers each.
    #[new]
    fn new(basis: &PyBasis, stages: Vec<(usize, Vec<String>)>) -> PyResult<Self> {
        let stages: Vec<StageConfig> = stages.into_iter().map(|(p, spacers)| StageConfig { p, spacers }).collect();
        Ok(PyRankOneParams {
            inner: riesz::RankOneParams::from_config(&basis.inner, &stages).map_err(py_err)?,
        })
    }

    /// Stages whose spacers are distinct independent symbols.
    #[staticmethod]
    fn independent(ps: Vec<usize>) -> PyResult<Self> {
        Ok(PyRankOneParams {
            inner: riesz::RankOneParams::independent(&ps).map_err(py_err)?,
        })
    }

    fn num_stages(&self) -> usize {
        self.inner.num_stages()
    }

    fn height(&self, k: usize) -> PyResult<String> {
        Ok(self.inner.height(k).map_err(py_err)?.to_string())
    }

    /// Terms of `P_k` as `(frequency, real, imag)`.
    fn polynomial(&self, k: usize) -> PyResult<Vec<(String, f64, f64)>> {
        let p = self.inner.build_polynomial(k).map_err(py_err)?;
        Ok(p.terms().map(|(f, c)| (f.to_string(), c.re, c.im)).collect())
    }

    /// Exact `mean(|P_k|^2)` as a rational string.
    fn mean_abs2(&self, k: usize) -> PyResult<String> {
        Ok(self.inner.abs2_exact(k).map_err(py_err)?.mean().re.to_string())
    }

    /// `(value, error)` of `mean |P_k|`.
    #[pyo3(signature = (k, samples = None, seed = 0))]
    fn mean_abs(&self, k: usize, samples: Option<u64>, seed: u64) -> PyResult<(f64, f64)> {
        let p = self.inner.build_polynomial(k).map_err(py_err)?;
        Ok(estimate(mean_abs(&p, budget(samples, seed)).map_err(py_err)?))
    }

    fn stages_json(&self) -> PyResult<String> {
        to_json(&self.inner.to_config())
    }
}

/// Exact mean of `prod_j |P_{n_j}|^2` as a rational string.
#[pyfunction]
fn riesz_property_check(params: &PyRankOneParams, indices: Vec<usize>) -> PyResult<String> {
    Ok(riesz::riesz_property_check(&params.inner, &indices).map_err(py_err)?.to_string())
}

/// `(frequency, sigma_hat)` rows of `|P_0 ... P_{n-1}|^2`.
#[pyfunction]
fn sigma_hat(params: &PyRankOneParams, stages: usize) -> PyResult<Vec<(String, f64)>> {
    let state = riesz::riesz_state(&params.inner, stages).map_err(py_err)?;
    Ok(state
        .sigma_table()
        .iter()
        .map(|(f, v)| (f.to_string(), criteria::rational_to_f64(v)))
        .collect())
}

/// Degree report as JSON.
#[pyfunction]
fn degree_report(params: &PyRankOneParams, indices: Vec<usize>) -> PyResult<String> {
    to_json(&riesz::degree_report(&params.inner, &indices).map_err(py_err)?)
}

/// Greedy subsequence scan; the report is returned as JSON.
#[pyfunction]
#[pyo3(signature = (params, k_max, samples, seed, window = 3))]
fn bourgain_scan(params: &PyRankOneParams, k_max: usize, samples: u64, seed: u64, window: usize) -> PyResult<String> {
    let report = criteria::bourgain_scan(
        &params.inner,
        ScanStrategy::Greedy { window },
        k_max,
        Budget::auto(samples, seed),
    )
    .map_err(py_err)?;
    to_json(&report)
}

#[pyfunction]
#[pyo3(signature = (params, k, samples = None, seed = 0))]
fn guenais_sum(params: &PyRankOneParams, k: usize, samples: Option<u64>, seed: u64) -> PyResult<String> {
    to_json(&criteria::guenais_sum(&params.inner, k, budget(samples, seed)).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (params, q_indices, m, samples = None, seed = 0))]
fn fejer_factorization_check(
    params: &PyRankOneParams,
    q_indices: Vec<usize>,
    m: usize,
    samples: Option<u64>,
    seed: u64,
) -> PyResult<String> {
    let check =
        criteria::fejer_factorization_check(&params.inner, &q_indices, m, budget(samples, seed)).map_err(py_err)?;
    to_json(&check)
}

#[pyfunction]
fn kac_clt(q: usize, samples: u64, seed: u64) -> PyResult<String> {
    to_json(&criteria::kac_clt_diagnostics(q, samples, seed).map_err(py_err)?)
}

/// Joint cosine moment as a rational string; both exact routes must agree.
#[pyfunction]
fn kac_moment(l: Vec<u32>) -> PyResult<String> {
    Ok(criteria::kac_moment_identity(&l).map_err(py_err)?.formula.to_string())
}

/// `(ratio, error, ultraflat deviation)` of a family given as a JSON spec.
#[pyfunction]
#[pyo3(signature = (basis, spec_json, samples = None, seed = 0))]
fn flatness(basis: &PyBasis, spec_json: &str, samples: Option<u64>, seed: u64) -> PyResult<(f64, f64, f64)> {
    let spec: PolyFamilySpec = serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let poly = flat::build_family(&spec, &basis.inner, None).map_err(py_err)?;
    let (ratio, err) = estimate(flat::flatness_ratio(&poly, budget(samples, seed)).map_err(py_err)?);
    let dev = flat::ultraflat_deviation(&poly).map_err(py_err)?;
    Ok((ratio, err, dev))
}

#[pyfunction]
fn prikhodko_frequencies(m: u64, p: u64, epsilon: &str) -> PyResult<Vec<f64>> {
    flat::prikhodko_frequencies(m, p, epsilon).map_err(py_err)
}

/// `(local distortion on [a, b], global mean |P|)` under the independence model.
#[pyfunction]
#[pyo3(signature = (m, p, epsilon, a, b, samples, seed = 0))]
fn local_vs_global(m: u64, p: u64, epsilon: &str, a: f64, b: f64, samples: u64, seed: u64) -> PyResult<(f64, f64)> {
    let r = flat::local_vs_global_flatness(m, p, epsilon, a, b, Budget::auto(samples, seed)).map_err(py_err)?;
    Ok((r.local.value, r.global_mean_abs.value))
}

#[pymodule]
fn apriesz(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", apriesz_core::VERSION)?;
    m.add_class::<PyBasis>()?;
    m.add_class::<PyRankOneParams>()?;
    m.add_function(wrap_pyfunction!(riesz_property_check, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_hat, m)?)?;
    m.add_function(wrap_pyfunction!(degree_report, m)?)?;
    m.add_function(wrap_pyfunction!(bourgain_scan, m)?)?;
    m.add_function(wrap_pyfunction!(guenais_sum, m)?)?;
    m.add_function(wrap_pyfunction!(fejer_factorization_check, m)?)?;
    m.add_function(wrap_pyfunction!(kac_clt, m)?)?;
    m.add_function(wrap_pyfunction!(kac_moment, m)?)?;
    m.add_function(wrap_pyfunction!(flatness, m)?)?;
    m.add_function(wrap_pyfunction!(prikhodko_frequencies, m)?)?;
    m.add_function(wrap_pyfunction!(local_vs_global, m)?)?;
    Ok(())
}
