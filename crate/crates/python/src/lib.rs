//! Python bindings for the memcap core library.

use memcap::drift::{DriftChannelMatrix, ReferenceDrift};
use memcap::signal::AlignmentConfig;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: memcap::Error) -> PyErr {
    match e {
        memcap::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        e if e.is_invalid_input() => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for memcap::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Device model parameters; omitted keywords take the default device.
#[pyclass(name = "DeviceParams", get_all, set_all, from_py_object)]
#[derive(Clone)]
struct PyDeviceParams {
    g_m: f64,
    alpha_1: f64,
    alpha_2: f64,
    beta_1: f64,
    beta_2: f64,
    r_series: f64,
}

impl From<&PyDeviceParams> for memcap::DeviceParams {
    fn from(p: &PyDeviceParams) -> Self {
        memcap::DeviceParams {
            g_m: p.g_m,
            alpha_1: p.alpha_1,
            alpha_2: p.alpha_2,
            beta_1: p.beta_1,
            beta_2: p.beta_2,
            r_series: p.r_series,
        }
    }
}

#[pymethods]
impl PyDeviceParams {
    #[new]
    #[pyo3(signature = (g_m=None, alpha_1=None, alpha_2=None, beta_1=None, beta_2=None, r_series=None))]
    fn new(
        g_m: Option<f64>,
        alpha_1: Option<f64>,
        alpha_2: Option<f64>,
        beta_1: Option<f64>,
        beta_2: Option<f64>,
        r_series: Option<f64>,
    ) -> Self {
        let d = memcap::DeviceParams::default();
        Self {
            g_m: g_m.unwrap_or(d.g_m),
            alpha_1: alpha_1.unwrap_or(d.alpha_1),
            alpha_2: alpha_2.unwrap_or(d.alpha_2),
            beta_1: beta_1.unwrap_or(d.beta_1),
            beta_2: beta_2.unwrap_or(d.beta_2),
            r_series: r_series.unwrap_or(d.r_series),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "DeviceParams(g_m={}, alpha_1={}, alpha_2={}, beta_1={}, beta_2={}, r_series={})",
            self.g_m, self.alpha_1, self.alpha_2, self.beta_1, self.beta_2, self.r_series
        )
    }
}

fn device(params: Option<&PyDeviceParams>) -> memcap::DeviceParams {
    params.map(Into::into).unwrap_or_default()
}

fn trace(t: Vec<f64>, v: Vec<f64>, i: Vec<f64>) -> PyResult<memcap::VITrace> {
    memcap::VITrace::new(t, v, i).py()
}

#[pyclass(name = "StateEstimate", get_all, frozen, skip_from_py_object)]
struct PyStateEstimate {
    x: f64,
    r_reported: f64,
    variance_proxy: f64,
    pairs_used: usize,
    pairs_excluded: usize,
}

#[pymethods]
impl PyStateEstimate {
    fn __repr__(&self) -> String {
        format!("StateEstimate(x={}, r_reported={}, pairs_used={})", self.x, self.r_reported, self.pairs_used)
    }
}

#[pyclass(name = "OffsetCorrection", get_all, frozen, skip_from_py_object)]
struct PyOffsetCorrection {
    /// Volts added to every voltage sample.
    dv: f64,
    /// Amps added to every current sample.
    di: f64,
    objective_before: f64,
    objective_after: f64,
    iterations: usize,
    v: Vec<f64>,
    i: Vec<f64>,
}

/// Cost model `E(r) = |a ln|b / r||`.
#[pyclass(name = "EnergyCostModel", frozen, from_py_object)]
#[derive(Clone)]
struct PyEnergyCostModel(memcap::EnergyCostModel);

#[pymethods]
impl PyEnergyCostModel {
    #[new]
    #[pyo3(signature = (a=memcap::energy::DEFAULT_A, b=memcap::energy::DEFAULT_B))]
    fn new(a: f64, b: f64) -> PyResult<Self> {
        memcap::EnergyCostModel::new(a, b).py().map(Self)
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.0.b
    }

    /// SET energy in joules for a state of `r` ohms.
    fn cost(&self, r: f64) -> PyResult<f64> {
        memcap::energy_cost(r, &self.0).py()
    }

    fn __repr__(&self) -> String {
        format!("EnergyCostModel(a={}, b={})", self.0.a, self.0.b)
    }
}

/// Row-stochastic channel with one cost per input.
#[pyclass(name = "ChannelSpec", frozen, from_py_object)]
#[derive(Clone)]
struct PyChannelSpec(memcap::ChannelSpec);

#[pymethods]
impl PyChannelSpec {
    #[new]
    #[pyo3(signature = (rows, costs=None))]
    fn new(rows: Vec<Vec<f64>>, costs: Option<Vec<f64>>) -> PyResult<Self> {
        let costs = costs.unwrap_or_else(|| vec![0.0; rows.len()]);
        memcap::ChannelSpec::from_rows(&rows, costs).py().map(Self)
    }

    #[getter]
    fn q_in(&self) -> usize {
        self.0.q_in()
    }

    #[getter]
    fn q_out(&self) -> usize {
        self.0.q_out()
    }

    #[getter]
    fn costs(&self) -> Vec<f64> {
        self.0.costs().to_vec()
    }

    fn row(&self, x: usize) -> PyResult<Vec<f64>> {
        if x >= self.0.q_in() {
            return Err(PyValueError::new_err(format!("row {x} out of range for {} inputs", self.0.q_in())));
        }
        Ok(self.0.row(x).to_vec())
    }

    fn __repr__(&self) -> String {
        format!("ChannelSpec(q_in={}, q_out={})", self.0.q_in(), self.0.q_out())
    }
}

#[pyclass(name = "CapacityPoint", get_all, frozen, skip_from_py_object)]
struct PyCapacityPoint {
    s: f64,
    avg_energy: f64,
    capacity: f64,
    input_distribution: Vec<f64>,
    iterations: usize,
    gap: f64,
    converged: bool,
}

impl From<memcap::CapacityCurvePoint> for PyCapacityPoint {
    fn from(p: memcap::CapacityCurvePoint) -> Self {
        Self {
            s: p.s,
            avg_energy: p.avg_energy,
            capacity: p.capacity,
            input_distribution: p.input_distribution,
            iterations: p.iterations,
            gap: p.gap,
            converged: p.converged,
        }
    }
}

#[pymethods]
impl PyCapacityPoint {
    fn __repr__(&self) -> String {
        format!(
            "CapacityPoint(s={}, avg_energy={}, capacity={}, converged={})",
            self.s, self.avg_energy, self.capacity, self.converged
        )
    }
}

/// Drift transition matrix between quantised states at one delay.
#[pyclass(name = "DriftChannel", frozen, skip_from_py_object)]
struct PyDriftChannel(DriftChannelMatrix);

#[pymethods]
impl PyDriftChannel {
    #[getter]
    fn delay(&self) -> f64 {
        self.0.delay
    }

    #[getter]
    fn input_centroids(&self) -> Vec<f64> {
        self.0.input_grid.centroids().to_vec()
    }

    #[getter]
    fn output_centroids(&self) -> Vec<f64> {
        self.0.output_grid.centroids().to_vec()
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.0.q_in()).map(|x| self.0.row(x).to_vec()).collect()
    }

    #[getter]
    fn costs(&self) -> Vec<f64> {
        self.0.costs.clone()
    }

    fn to_channel_spec(&self) -> PyResult<PyChannelSpec> {
        self.0.to_channel_spec().py().map(PyChannelSpec)
    }

    fn __repr__(&self) -> String {
        format!("DriftChannel(delay={}, q_in={}, q_out={})", self.0.delay, self.0.q_in(), self.0.q_out())
    }
}

/// Current through the device at state `x` and voltage `v`.
#[pyfunction]
#[pyo3(signature = (x, v, params=None))]
fn memristor_current(x: f64, v: f64, params: Option<&PyDeviceParams>) -> PyResult<f64> {
    memcap::memristor_current(x, v, &device(params)).py()
}

/// Minimum-variance state estimate from one READ trace.
#[pyfunction]
#[pyo3(signature = (t, v, i, params=None))]
fn estimate_state(t: Vec<f64>, v: Vec<f64>, i: Vec<f64>, params: Option<&PyDeviceParams>) -> PyResult<PyStateEstimate> {
    let e = memcap::estimate_state(&trace(t, v, i)?, &device(params)).py()?;
    Ok(PyStateEstimate {
        x: e.x,
        r_reported: e.r_reported,
        variance_proxy: e.variance_proxy,
        pairs_used: e.pairs_used,
        pairs_excluded: e.pairs_excluded,
    })
}

/// Removes constant voltage and current offsets from a passive trace.
#[pyfunction]
fn correct_offset(t: Vec<f64>, v: Vec<f64>, i: Vec<f64>) -> PyResult<PyOffsetCorrection> {
    let c = memcap::signal::correct_offset(&trace(t, v, i)?, &AlignmentConfig::default()).py()?;
    Ok(PyOffsetCorrection {
        dv: c.dv,
        di: c.di,
        objective_before: c.objective_before,
        objective_after: c.objective_after,
        iterations: c.iterations,
        v: c.trace.v().to_vec(),
        i: c.trace.i().to_vec(),
    })
}

/// Least-squares fit of the cost model to `(r, e)` observations.
#[pyfunction]
fn fit_energy_model(r: Vec<f64>, e: Vec<f64>) -> PyResult<PyEnergyCostModel> {
    if r.len() != e.len() {
        return Err(PyValueError::new_err(format!("{} states but {} energies", r.len(), e.len())));
    }
    let obs: Vec<memcap::EnergyObservation> = r.into_iter().zip(e).map(|(r, e)| memcap::EnergyObservation { r, e }).collect();
    memcap::fit_energy_model(&obs, None).py().map(|(m, _)| PyEnergyCostModel(m))
}

/// Mutual information in bits.
#[pyfunction]
fn mutual_information(p_input: Vec<f64>, channel: &PyChannelSpec) -> PyResult<f64> {
    memcap::mutual_information(&p_input, &channel.0).py()
}

fn ba_options(tol: f64, max_iter: usize, accelerate: bool) -> memcap::BaOptions {
    memcap::BaOptions { tol, max_iter, accelerate }
}

/// One point of the capacity-cost curve at tilt `s`.
#[pyfunction]
#[pyo3(signature = (channel, s=0.0, tol=1e-6, max_iter=10000, accelerate=true))]
fn blahut_arimoto(
    py: Python<'_>,
    channel: &PyChannelSpec,
    s: f64,
    tol: f64,
    max_iter: usize,
    accelerate: bool,
) -> PyResult<PyCapacityPoint> {
    let opts = ba_options(tol, max_iter, accelerate);
    py.detach(|| memcap::blahut_arimoto(&channel.0, s, &opts)).py().map(Into::into)
}

/// Capacity-cost curve over `s_values`, sorted by average energy.
#[pyfunction]
#[pyo3(signature = (channel, s_values, tol=1e-6, max_iter=10000, accelerate=true))]
fn capacity_cost_curve(
    py: Python<'_>,
    channel: &PyChannelSpec,
    s_values: Vec<f64>,
    tol: f64,
    max_iter: usize,
    accelerate: bool,
) -> PyResult<Vec<PyCapacityPoint>> {
    let opts = ba_options(tol, max_iter, accelerate);
    let points = py.detach(|| memcap::capacity_cost_curve(&channel.0, &s_values, &opts)).py()?;
    Ok(points.into_iter().map(Into::into).collect())
}

fn reference_sampler(equilibrium: f64, reversion_rate: f64, volatility: f64) -> PyResult<ReferenceDrift> {
    ReferenceDrift::new(memcap::ReferenceDriftParams { equilibrium, reversion_rate, volatility }).py()
}

/// State after `delay` minutes of reference log-OU drift from `r0`.
#[pyfunction]
#[pyo3(signature = (r0, delay, seed, equilibrium=memcap::energy::DEFAULT_B, reversion_rate=0.05, volatility=0.1))]
fn reference_drift_sample(
    r0: f64,
    delay: f64,
    seed: u64,
    equilibrium: f64,
    reversion_rate: f64,
    volatility: f64,
) -> PyResult<f64> {
    let params = memcap::ReferenceDriftParams { equilibrium, reversion_rate, volatility };
    memcap::reference_drift_sample(r0, delay, &params, seed).py()
}

/// Monte-Carlo drift channel under the reference drift model.
#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(signature = (
    delay, n, seed,
    input_grid=(1e5, 1e6, 100), output_grid=(1e5, 2e7, 100), model=None,
    equilibrium=memcap::energy::DEFAULT_B, reversion_rate=0.05, volatility=0.1,
))]
fn reference_channel(
    py: Python<'_>,
    delay: f64,
    n: usize,
    seed: u64,
    input_grid: (f64, f64, usize),
    output_grid: (f64, f64, usize),
    model: Option<&PyEnergyCostModel>,
    equilibrium: f64,
    reversion_rate: f64,
    volatility: f64,
) -> PyResult<PyDriftChannel> {
    let sampler = reference_sampler(equilibrium, reversion_rate, volatility)?;
    let g_in = memcap::make_grid(input_grid.0, input_grid.1, input_grid.2).py()?;
    let g_out = memcap::make_grid(output_grid.0, output_grid.1, output_grid.2).py()?;
    let model = model.map(|m| m.0).unwrap_or_default();
    let m = py.detach(|| memcap::estimate_channel(&sampler, &g_in, &g_out, delay, n, &model, seed)).py()?;
    Ok(PyDriftChannel(m))
}

/// Reads a channel matrix file written by the command-line tool.
#[pyfunction]
fn read_channel(path: std::path::PathBuf) -> PyResult<PyDriftChannel> {
    memcap::drift::io::read_channel(&path).py().map(PyDriftChannel)
}

#[pymodule]
#[pyo3(name = "memcap")]
fn memcap_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DEFAULT_A", memcap::energy::DEFAULT_A)?;
    m.add("DEFAULT_B", memcap::energy::DEFAULT_B)?;
    m.add_class::<PyDeviceParams>()?;
    m.add_class::<PyStateEstimate>()?;
    m.add_class::<PyOffsetCorrection>()?;
    m.add_class::<PyEnergyCostModel>()?;
    m.add_class::<PyChannelSpec>()?;
    m.add_class::<PyCapacityPoint>()?;
    m.add_class::<PyDriftChannel>()?;
    m.add_function(wrap_pyfunction!(memristor_current, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_state, m)?)?;
    m.add_function(wrap_pyfunction!(correct_offset, m)?)?;
    m.add_function(wrap_pyfunction!(fit_energy_model, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(blahut_arimoto, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_cost_curve, m)?)?;
    m.add_function(wrap_pyfunction!(reference_drift_sample, m)?)?;
    m.add_function(wrap_pyfunction!(reference_channel, m)?)?;
    m.add_function(wrap_pyfunction!(read_channel, m)?)?;
    Ok(())
}
