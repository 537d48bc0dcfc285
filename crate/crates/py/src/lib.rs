//! Python bindings: the main types (Species, Gas) and the scalar
//! operations, with SI units throughout.

use becgrav::constants::CODATA_2018;
use becgrav::cube::FourierMode;
use becgrav::spectrum::{GravityTheory, Spectrum};
use becgrav::{GasParameters, ModeIndex};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py_err(e: becgrav::Error) -> PyErr {
    match &e {
        becgrav::Error::UnknownSpecies(_) | becgrav::Error::InvalidParameter(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_theory(name: &str) -> PyResult<GravityTheory> {
    match name {
        "quantum" => Ok(GravityTheory::Quantum),
        "classical" => Ok(GravityTheory::Classical),
        other => Err(PyValueError::new_err(format!(
            "theory must be 'quantum' or 'classical', got '{other}'"
        ))),
    }
}

fn parse_mode(mode: (i32, i32, i32)) -> PyResult<ModeIndex> {
    ModeIndex::new(mode.0, mode.1, mode.2).map_err(to_py_err)
}

/// Atomic species record (SI units).
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Species {
    inner: becgrav::Species,
}

#[pymethods]
impl Species {
    /// Custom species from table units (u, nm, m^6/s).
    #[new]
    #[pyo3(signature = (name, mass_u, a_s_nm=0.0, three_body_rate_m6_per_s=0.0))]
    fn new(
        name: &str,
        mass_u: f64,
        a_s_nm: f64,
        three_body_rate_m6_per_s: f64,
    ) -> PyResult<Self> {
        becgrav::Species::from_table_units(name, mass_u, a_s_nm, three_body_rate_m6_per_s)
            .map(|inner| Species { inner })
            .map_err(to_py_err)
    }

    /// Fetch a registered species (e.g. "Yb-174", "H-1").
    #[staticmethod]
    fn lookup(name: &str) -> PyResult<Self> {
        becgrav::lookup_species(name)
            .map(|inner| Species { inner })
            .map_err(to_py_err)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }
    #[getter]
    fn mass_kg(&self) -> f64 {
        self.inner.mass
    }
    #[getter]
    fn a_s_m(&self) -> f64 {
        self.inner.scattering_length
    }
    #[getter]
    fn three_body_rate_m6_per_s(&self) -> f64 {
        self.inner.three_body_rate
    }

    fn __repr__(&self) -> String {
        format!(
            "Species({}, m={:e} kg, a_s={:e} m)",
            self.inner.name, self.inner.mass, self.inner.scattering_length
        )
    }
}

/// A boxed uniform gas configuration.
#[pyclass(frozen)]
struct Gas {
    params: GasParameters,
}

impl Gas {
    fn spectrum(&self) -> PyResult<Spectrum> {
        Spectrum::new(&self.params).map_err(to_py_err)
    }
}

#[pymethods]
impl Gas {
    #[new]
    #[pyo3(signature = (species, atom_count, box_length_m, g_em_override_j_m3=None))]
    fn new(
        species: Species,
        atom_count: f64,
        box_length_m: f64,
        g_em_override_j_m3: Option<f64>,
    ) -> PyResult<Self> {
        GasParameters::new(species.inner, atom_count, box_length_m, g_em_override_j_m3)
            .map(|params| Gas { params })
            .map_err(to_py_err)
    }

    #[getter]
    fn volume_m3(&self) -> f64 {
        self.params.volume()
    }
    #[getter]
    fn density_per_m3(&self) -> f64 {
        self.params.density()
    }
    #[getter]
    fn g_em_j_m3(&self) -> f64 {
        self.params.g_em()
    }
    #[getter]
    fn g_g0_j_m3(&self) -> PyResult<f64> {
        Ok(self.spectrum()?.couplings.g_g0())
    }
    #[getter]
    fn regime(&self) -> PyResult<String> {
        Ok(self.spectrum()?.couplings.regime.to_string())
    }

    /// Chemical potential (J) under the gapless condition.
    fn chemical_potential_j(&self, theory: &str) -> PyResult<f64> {
        let th = parse_theory(theory)?;
        Ok(becgrav::chemical_potential(&self.spectrum()?.couplings, th).mu)
    }

    /// Excitation energy (J) at an integer mode (nx, ny, nz).
    fn dispersion_j(&self, theory: &str, mode: (i32, i32, i32)) -> PyResult<f64> {
        let th = parse_theory(theory)?;
        let m = parse_mode(mode)?;
        self.spectrum()?
            .dispersion(th, &m)
            .map(|d| d.epsilon)
            .map_err(to_py_err)
    }

    /// Bogolyubov coefficients (u, v) at a mode.
    fn bogolyubov(&self, theory: &str, mode: (i32, i32, i32)) -> PyResult<(f64, f64)> {
        let th = parse_theory(theory)?;
        let m = parse_mode(mode)?;
        self.spectrum()?
            .bogolyubov_coefficients(th, &m)
            .map(|b| (b.u, b.v))
            .map_err(to_py_err)
    }

    /// Heat capacity at temperature t_k; returns a dict with c_v_j_per_k,
    /// c_v_over_kb, internal_energy_thermal_j, shells_used, converged.
    #[pyo3(signature = (theory, t_k, rel_tol=1e-9))]
    fn heat_capacity<'py>(
        &self,
        py: Python<'py>,
        theory: &str,
        t_k: f64,
        rel_tol: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let th = parse_theory(theory)?;
        let r = becgrav::thermo::heat_capacity(&self.params, th, t_k, rel_tol).map_err(to_py_err)?;
        let d = PyDict::new(py);
        d.set_item("c_v_j_per_k", r.c_v)?;
        d.set_item("c_v_over_kb", r.c_v_over_kb)?;
        d.set_item("internal_energy_thermal_j", r.internal_energy_thermal)?;
        d.set_item("shells_used", r.shells_used)?;
        d.set_item("converged", r.converged)?;
        Ok(d)
    }

    /// Percentage deviation of the quantum-theory heat capacity from the
    /// classical one at t_k.
    #[pyo3(signature = (t_k, rel_tol=1e-9))]
    fn heatcap_deviation_percent(&self, t_k: f64, rel_tol: f64) -> PyResult<f64> {
        becgrav::experiment::heatcap_deviation(&self.params, t_k, rel_tol)
            .map(|d| d.rel_deviation_percent)
            .map_err(to_py_err)
    }

    /// Percentage deviation of the excitation energies at a mode.
    fn energy_deviation_percent(&self, mode: (i32, i32, i32)) -> PyResult<f64> {
        let m = parse_mode(mode)?;
        becgrav::experiment::energy_deviation(&self.params, &m)
            .map(|d| d.rel_deviation_percent)
            .map_err(to_py_err)
    }

    /// Low-k classification of the excitation branch: dict with class
    /// ("type-A" | "type-B" | "indeterminate") and the fitted slope.
    fn classify_ngb<'py>(&self, py: Python<'py>, theory: &str) -> PyResult<Bound<'py, PyDict>> {
        let th = parse_theory(theory)?;
        let r = becgrav::classify_ngb(&self.params, th).map_err(to_py_err)?;
        let d = PyDict::new(py);
        d.set_item("class", r.class.to_string())?;
        d.set_item("slope", r.slope)?;
        Ok(d)
    }

    /// Validity diagnostics as a dict (diluteness, schwarzschild_ratio,
    /// three_body_half_life_s, estimated_velocity_m_per_s, checks).
    fn validity<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let v = becgrav::experiment::validity_report(&self.params);
        let d = PyDict::new(py);
        d.set_item("diluteness", v.diluteness)?;
        d.set_item("schwarzschild_ratio", v.schwarzschild_ratio)?;
        d.set_item("three_body_half_life_s", v.three_body_half_life)?;
        d.set_item("estimated_velocity_m_per_s", v.estimated_velocity)?;
        let checks = PyDict::new(py);
        for c in &v.checks {
            checks.set_item(c.name, c.pass)?;
        }
        d.set_item("checks", checks)?;
        Ok(d)
    }
}

/// CODATA 2018 constants as a dict.
#[pyfunction]
fn constants(py: Python<'_>) -> PyResult<Bound<'_, PyDict>> {
    let c = CODATA_2018;
    let d = PyDict::new(py);
    d.set_item("hbar_j_s", c.hbar)?;
    d.set_item("g_m3_per_kg_s2", c.g)?;
    d.set_item("k_b_j_per_k", c.k_b)?;
    d.set_item("c_m_per_s", c.c)?;
    d.set_item("u_kg", c.u)?;
    Ok(d)
}

/// Exact zero-mode coefficient of the box potential (J*m^3).
#[pyfunction]
fn v0_closed_form(mass_kg: f64, box_length_m: f64) -> f64 {
    becgrav::v0_closed_form(mass_kg, box_length_m)
}

/// Dimensionless closed-form coefficient |V_0|/(G m^2 L^2) ~ 2.3801.
#[pyfunction]
fn v0_coefficient() -> f64 {
    becgrav::cube::v0_coefficient()
}

/// Isotropic coefficient -4 pi G m^2 / k^2 at a mode (J*m^3).
#[pyfunction]
fn gk_approx(mode: (i32, i32, i32), mass_kg: f64, box_length_m: f64) -> PyResult<f64> {
    Ok(becgrav::gk_approx(&parse_mode(mode)?, mass_kg, box_length_m))
}

/// Full box-integral coefficient by adaptive radial quadrature (J*m^3).
#[pyfunction]
#[pyo3(signature = (mode, mass_kg, box_length_m, rel_tol=1e-8))]
fn gk_oracle_1d(
    mode: (i32, i32, i32),
    mass_kg: f64,
    box_length_m: f64,
    rel_tol: f64,
) -> PyResult<f64> {
    becgrav::gk_oracle_1d(&parse_mode(mode)?, mass_kg, box_length_m, rel_tol).map_err(to_py_err)
}

/// Full box-integral coefficient by 3D quadrature; mode None is the zero
/// mode (J*m^3).
#[pyfunction]
#[pyo3(signature = (mode, mass_kg, box_length_m, grid=32))]
fn gk_oracle_3d(
    mode: Option<(i32, i32, i32)>,
    mass_kg: f64,
    box_length_m: f64,
    grid: usize,
) -> PyResult<f64> {
    let fm = match mode {
        None => FourierMode::Zero,
        Some(m) => FourierMode::Excitation(parse_mode(m)?),
    };
    becgrav::gk_oracle_3d(fm, mass_kg, box_length_m, grid).map_err(to_py_err)
}

/// Re[erf(x + i y)].
#[pyfunction]
fn re_erf(x: f64, y: f64) -> PyResult<f64> {
    becgrav::numerics::erf::re_erf(x, y).map_err(to_py_err)
}

/// Minimum N*L product (m) for a given mode shell and deviation level.
#[pyfunction]
fn nl_threshold(species: &Species, n_k2: i64, deviation_percent: f64) -> PyResult<f64> {
    becgrav::experiment::nl_threshold(&species.inner, n_k2, deviation_percent).map_err(to_py_err)
}

/// Fit the contact coupling to a target classical c_V/k_B; returns a dict
/// with g_em_fitted_j_m3, cv_classical_over_kb, quantum_deviation_percent.
#[pyfunction]
#[pyo3(signature = (species, atom_count, box_length_m, t_k, cv_target_over_kb, rel_tol=1e-9))]
fn reconcile_cv_target<'py>(
    py: Python<'py>,
    species: &Species,
    atom_count: f64,
    box_length_m: f64,
    t_k: f64,
    cv_target_over_kb: f64,
    rel_tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = becgrav::experiment::reconcile_cv_target(
        &species.inner,
        atom_count,
        box_length_m,
        t_k,
        cv_target_over_kb,
        rel_tol,
    )
    .map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("g_em_fitted_j_m3", r.g_em_fitted)?;
    d.set_item("cv_classical_over_kb", r.cv_classical_over_kb)?;
    d.set_item("quantum_deviation_percent", r.quantum_deviation_percent)?;
    d.set_item("iterations", r.iterations)?;
    Ok(d)
}

#[pymodule]
fn becgrav_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Species>()?;
    m.add_class::<Gas>()?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(v0_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(v0_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(gk_approx, m)?)?;
    m.add_function(wrap_pyfunction!(gk_oracle_1d, m)?)?;
    m.add_function(wrap_pyfunction!(gk_oracle_3d, m)?)?;
    m.add_function(wrap_pyfunction!(re_erf, m)?)?;
    m.add_function(wrap_pyfunction!(nl_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(reconcile_cv_target, m)?)?;
    m.add("__version__", becgrav::cli::TOOL_VERSION)?;
    Ok(())
}
