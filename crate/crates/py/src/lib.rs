//! Python bindings for `hom_core`.

use hom_core::closedform::{self, InterferenceModel};
use hom_core::engine::{self, DelayPair, QuadRule, QuadratureSpec};
use hom_core::experiments::{self, EvalPath, LinearRange, SweepSpec};
use hom_core::model::{self, GridSpectrum, ReducedSpectrum};
use hom_core::oracle::{self, OracleMethod, ParameterGrid};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: hom_core::Error) -> PyErr {
    use hom_core::Error::*;
    match e {
        Domain(_) | Spectrum(_) | Usage(_) | Unsupported(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_model(name: &str) -> PyResult<InterferenceModel> {
    match name {
        "full" | "entangled-full" => Ok(InterferenceModel::EntangledFull),
        "literature" | "entangled-literature" => Ok(InterferenceModel::EntangledLiterature),
        "detuned" => Ok(InterferenceModel::Detuned),
        _ => Err(PyValueError::new_err(format!(
            "unknown model '{name}', expected full, literature or detuned"
        ))),
    }
}

fn parse_path(name: &str) -> PyResult<EvalPath> {
    match name {
        "closed" => Ok(EvalPath::ClosedForm),
        "numeric" => Ok(EvalPath::Engine),
        _ => Err(PyValueError::new_err(format!("unknown engine '{name}', expected closed or numeric"))),
    }
}

/// Source and beam-splitter parameters; phases are reduced to [0, 2π).
#[pyclass(name = "SourceParams", frozen, from_py_object)]
#[derive(Clone)]
struct PySourceParams(model::SourceParams);

#[pymethods]
impl PySourceParams {
    #[new]
    #[pyo3(signature = (mu, xi, phi, theta=0.0, pump=0.0))]
    fn new(mu: f64, xi: f64, phi: f64, theta: f64, pump: f64) -> PyResult<Self> {
        model::SourceParams::new(pump, mu, xi, phi, theta).map(Self).map_err(to_py)
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.detuning_mu()
    }

    #[getter]
    fn xi(&self) -> f64 {
        self.0.bandwidth_xi()
    }

    #[getter]
    fn phi(&self) -> f64 {
        self.0.symmetry_phase_phi()
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.bs_phase_theta()
    }

    fn __repr__(&self) -> String {
        format!(
            "SourceParams(mu={}, xi={}, phi={}, theta={})",
            self.0.detuning_mu(),
            self.0.bandwidth_xi(),
            self.0.symmetry_phase_phi(),
            self.0.bs_phase_theta()
        )
    }
}

/// Two-photon state after the beam splitter.
#[pyclass(name = "WaveFunction", frozen)]
struct PyWaveFunction(model::JointWaveFunction);

#[pymethods]
impl PyWaveFunction {
    #[staticmethod]
    fn entangled(params: &PySourceParams) -> Self {
        Self(model::apply_beamsplitter(&model::make_entangled_spectrum(&params.0), &params.0))
    }

    #[staticmethod]
    fn detuned(params: &PySourceParams) -> Self {
        Self(model::apply_beamsplitter(&model::make_detuned_spectrum(&params.0), &params.0))
    }

    /// Tabulated spectrum: strictly increasing `omega` with complex samples `re + i·im`.
    #[staticmethod]
    fn from_samples(omega: Vec<f64>, re: Vec<f64>, im: Vec<f64>, params: &PySourceParams) -> PyResult<Self> {
        if omega.len() != re.len() || omega.len() != im.len() {
            return Err(PyValueError::new_err("omega, re and im must have equal length"));
        }
        let samples = omega
            .into_iter()
            .zip(re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)))
            .collect();
        let grid = GridSpectrum::new(samples).map_err(to_py)?;
        Ok(Self(model::apply_beamsplitter(&ReducedSpectrum::Grid(grid), &params.0)))
    }

    /// Joint detection probabilities `[[P_UU, P_UL], [P_LU, P_LL]]` and the quadrature error bound.
    #[pyo3(signature = (tau1, tau2=0.0, window=None, points=None))]
    fn joint_probability(
        &self,
        tau1: f64,
        tau2: f64,
        window: Option<f64>,
        points: Option<usize>,
    ) -> PyResult<([[f64; 2]; 2], f64)> {
        let default = QuadratureSpec::default_for(&self.0);
        let quad = QuadratureSpec::new(
            window.unwrap_or(default.window_halfwidth),
            points.unwrap_or(default.points),
            QuadRule::GaussLegendreComposite,
        )
        .map_err(to_py)?;
        let delays = DelayPair::new(tau1, tau2).map_err(to_py)?;
        let m = engine::joint_probability(&self.0, delays, &quad).map_err(to_py)?;
        Ok((m.as_array(), m.error_bound()))
    }

    fn coincidence(&self, dtau: f64) -> PyResult<f64> {
        let quad = QuadratureSpec::default_for(&self.0);
        let delays = DelayPair::from_difference(dtau).map_err(to_py)?;
        engine::coincidence_probability(&self.0, delays, &quad).map_err(to_py)
    }

    /// Coincidence probability from the exact time-domain overlap, with its error bound.
    fn oracle_coincidence(&self, dtau: f64) -> PyResult<(f64, f64)> {
        let delays = DelayPair::from_difference(dtau).map_err(to_py)?;
        let r = oracle::oracle_coincidence(&self.0, delays, OracleMethod::TimeDomainExact).map_err(to_py)?;
        Ok((r.value, r.error_bound))
    }
}

/// Closed-form coincidence probability for `model` in {full, literature, detuned}.
#[pyfunction]
#[pyo3(signature = (mu, xi, phi, dtau, model="full"))]
fn coincidence(mu: f64, xi: f64, phi: f64, dtau: f64, model: &str) -> PyResult<f64> {
    parse_model(model)?.coincidence(mu, xi, phi, dtau).map_err(to_py)
}

/// Interference visibility term of the entangled source.
#[pyfunction]
fn d_full(mu: f64, xi: f64, phi: f64, dtau: f64) -> PyResult<f64> {
    closedform::d_full(mu, xi, phi, dtau).map_err(to_py)
}

#[pyfunction]
fn mu_zero_limit(xi: f64, phi: f64, dtau: f64) -> f64 {
    closedform::mu_zero_limit(xi, phi, dtau)
}

/// `(Δτ, P^c)` pairs over `start..=end`.
#[pyfunction]
#[pyo3(signature = (params, start=-3.0, end=3.0, steps=601, model="full", engine="closed"))]
fn sweep_delay(
    params: &PySourceParams,
    start: f64,
    end: f64,
    steps: usize,
    model: &str,
    engine: &str,
) -> PyResult<Vec<(f64, f64)>> {
    let mut spec = SweepSpec::with_defaults(parse_model(model)?, params.0);
    spec.dtau_range = LinearRange::new(start, end, steps).map_err(to_py)?;
    spec.path = parse_path(engine)?;
    Ok(experiments::sweep_delay(&spec).map_err(to_py)?.points)
}

/// `(ν, Δτ_max, max|ΔP^c|)` rows comparing the full and literature models.
#[pyfunction]
#[pyo3(signature = (xi, phi, nu_start, nu_end, nu_steps, dtau_start=-3.0, dtau_end=3.0, dtau_steps=601))]
#[allow(clippy::too_many_arguments)]
fn discrepancy_scan(
    xi: f64,
    phi: f64,
    nu_start: f64,
    nu_end: f64,
    nu_steps: usize,
    dtau_start: f64,
    dtau_end: f64,
    dtau_steps: usize,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let params = model::SourceParams::sinc_source(0.0, xi, phi).map_err(to_py)?;
    let mut spec = SweepSpec::with_defaults(InterferenceModel::EntangledFull, params);
    spec.nu_range = Some(LinearRange::new(nu_start, nu_end, nu_steps).map_err(to_py)?);
    spec.dtau_range = LinearRange::new(dtau_start, dtau_end, dtau_steps).map_err(to_py)?;
    let table = experiments::discrepancy_scan(&spec).map_err(to_py)?;
    Ok(table
        .rows
        .into_iter()
        .map(|r| (r.nu_thz, r.dtau_max_ps, r.max_abs_dpc))
        .collect())
}

/// Runs the default closed-form vs oracle grid; returns `(all_passed, max_abs_err, rows)`.
#[pyfunction]
#[pyo3(signature = (model="full"))]
fn validate(model: &str) -> PyResult<(bool, f64, usize)> {
    let report = oracle::compare_closed_forms(&ParameterGrid::default_grid(), parse_model(model)?).map_err(to_py)?;
    Ok((report.all_passed(), report.max_abs_err(), report.rows.len()))
}

#[pymodule]
fn hom_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySourceParams>()?;
    m.add_class::<PyWaveFunction>()?;
    m.add_function(wrap_pyfunction!(coincidence, m)?)?;
    m.add_function(wrap_pyfunction!(d_full, m)?)?;
    m.add_function(wrap_pyfunction!(mu_zero_limit, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_delay, m)?)?;
    m.add_function(wrap_pyfunction!(discrepancy_scan, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
