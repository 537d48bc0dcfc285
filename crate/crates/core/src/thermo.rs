//! Heat capacity and internal energy as lattice mode sums.
//!
//! The extensive heat capacity of the quasiparticle gas is
//!
//! ```text
//! c_V = k_B * sum over shells s of r3(s) * f(eps_s / (k_B T)),
//! f(x) = x^2 e^{-x} / (1 - e^{-x})^2
//! ```
//!
//! evaluated once per shell (the dispersion depends on the mode only
//! through n^2) in the overflow-safe e^{-x} form. Shells accumulate in
//! increasing s with compensated summation until five consecutive shells
//! each contribute less than `rel_tol` of the running total; the run length
//! exists because shells with s = 4^a(8b+7) are empty and a single small
//! shell must not end the sum.

use crate::constants::{GasParameters, CODATA_2018};
use crate::error::{Error, Result};
use crate::lattice::shell_multiplicities;
use crate::numerics::kahan::CompensatedSum;
use crate::spectrum::{chemical_potential, GravityTheory, GroundStateEnergy, Spectrum};

/// Default convergence tolerance for the shell sum.
pub const DEFAULT_REL_TOL: f64 = 1e-9;
/// Largest shell index the sum may reach before reporting no convergence.
pub const SHELL_BUDGET: i64 = 1_000_000;
const CONVERGENCE_RUN: u32 = 5;

/// Dimensionless heat-capacity summand f(x) = x^2 e^{-x} / (1 - e^{-x})^2.
///
/// Series 1 - x^2/12 below x = 1e-4; exactly 0 above x = 745 (the Bose
/// factor underflows); each soft mode contributes k_B in the x -> 0 limit.
pub fn mode_term_x(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 1e-4 {
        1.0 - x * x / 12.0
    } else if x > 745.0 {
        0.0
    } else {
        let em = (-x).exp();
        let denom = 1.0 - em;
        x * x * em / (denom * denom)
    }
}

/// Contribution of one mode of energy `epsilon` to c_V / k_B.
pub fn mode_term(epsilon: f64, temperature: f64) -> f64 {
    mode_term_x(epsilon / (CODATA_2018.k_b * temperature))
}

/// Bose occupancy 1/(e^x - 1) in the e^{-x} form.
fn bose_x(x: f64) -> f64 {
    if x > 745.0 {
        0.0
    } else {
        let em = (-x).exp();
        em / (1.0 - em)
    }
}

/// Result of a converged mode sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoResult {
    /// (K)
    pub temperature: f64,
    /// Extensive heat capacity (J/K)
    pub c_v: f64,
    /// c_V / k_B
    pub c_v_over_kb: f64,
    /// Thermal quasiparticle energy sum over eps * n_B (J)
    pub internal_energy_thermal: f64,
    /// Highest shell index included
    pub shells_used: i64,
    /// Convergence criterion met (budget exhaustion is an error instead)
    pub converged: bool,
    pub theory: GravityTheory,
}

fn check_temperature(temperature: f64) -> Result<()> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be > 0, got {temperature:e}"
        )));
    }
    Ok(())
}

/// Shell-grouped heat capacity and thermal energy for a prepared spectrum.
pub fn heat_capacity_for(
    spectrum: &Spectrum,
    theory: GravityTheory,
    temperature: f64,
    rel_tol: f64,
) -> Result<ThermoResult> {
    check_temperature(temperature)?;
    if !(rel_tol.is_finite() && rel_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rel_tol must be > 0, got {rel_tol:e}"
        )));
    }
    let kt = CODATA_2018.k_b * temperature;
    let mut cv = CompensatedSum::new();
    let mut u_thermal = CompensatedSum::new();
    let mut run = 0u32;
    let mut s = 0i64;
    const CHUNK: i64 = 8192;
    let mut buf: Vec<u32> = Vec::new();
    let mut buf_lo = 1i64;
    while s < SHELL_BUDGET {
        s += 1;
        if buf.is_empty() || s >= buf_lo + buf.len() as i64 {
            buf = shell_multiplicities(s as u64, (s + CHUNK - 1) as u64);
            buf_lo = s;
        }
        let r = f64::from(buf[(s - buf_lo) as usize]);
        let contrib = if r == 0.0 {
            0.0
        } else {
            let eps = spectrum.epsilon_shell(theory, s)?;
            let x = eps / kt;
            let f = mode_term_x(x);
            u_thermal.add(r * eps * bose_x(x));
            r * f
        };
        cv.add(contrib);
        if contrib == 0.0 || contrib < rel_tol * cv.value() {
            run += 1;
            if run >= CONVERGENCE_RUN {
                let c_v_over_kb = cv.value();
                return Ok(ThermoResult {
                    temperature,
                    c_v: CODATA_2018.k_b * c_v_over_kb,
                    c_v_over_kb,
                    internal_energy_thermal: u_thermal.value(),
                    shells_used: s,
                    converged: true,
                    theory,
                });
            }
        } else {
            run = 0;
        }
    }
    Err(Error::NoConvergence(format!(
        "heat capacity shell sum still above rel_tol {rel_tol:e} at the \
         shell budget {SHELL_BUDGET} (T = {temperature:e} K)"
    )))
}

/// Heat capacity of the gas under the requested gravity treatment.
pub fn heat_capacity(
    params: &GasParameters,
    theory: GravityTheory,
    temperature: f64,
    rel_tol: f64,
) -> Result<ThermoResult> {
    heat_capacity_for(&Spectrum::new(params)?, theory, temperature, rel_tol)
}

/// Internal energy split into the thermal part and the constants that are
/// reported alongside but never differentiated: mu N exactly, and the
/// UV-divergent ground-state partial sum only on explicit request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalEnergyReport {
    pub temperature: f64,
    /// Thermal quasiparticle part sum eps * n_B (J); its temperature
    /// derivative matches [`heat_capacity`]
    pub thermal: f64,
    /// mu * N (J)
    pub mu_n: f64,
    /// Partial ground-state sum with its cutoff; non-convergent diagnostic
    pub ground_state: Option<GroundStateEnergy>,
    pub shells_used: i64,
    pub converged: bool,
    pub theory: GravityTheory,
}

/// Thermal internal energy plus the separate constants.
pub fn internal_energy(
    params: &GasParameters,
    theory: GravityTheory,
    temperature: f64,
    rel_tol: f64,
    ground_state_cutoff: Option<i64>,
) -> Result<InternalEnergyReport> {
    let spectrum = Spectrum::new(params)?;
    let t = heat_capacity_for(&spectrum, theory, temperature, rel_tol)?;
    let mu = chemical_potential(&spectrum.couplings, theory).mu;
    let ground_state = match ground_state_cutoff {
        Some(cutoff) => Some(spectrum.ground_state_energy(theory, cutoff)?),
        None => None,
    };
    Ok(InternalEnergyReport {
        temperature,
        thermal: t.internal_energy_thermal,
        mu_n: mu * params.atom_count,
        ground_state,
        shells_used: t.shells_used,
        converged: t.converged,
        theory,
    })
}

/// Fixed-cutoff depletion diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepletionReport {
    /// Number of atoms outside the condensate, N_T
    pub n_t_atoms: f64,
    pub shell_cutoff: i64,
    pub temperature: f64,
    pub theory: GravityTheory,
}

/// N_T = sum over shells of r3 * (v^2 + (u^2 + v^2) n_B) up to the cutoff.
///
/// Quasiparticle-vacuum depletion v^2 plus the thermally occupied part;
/// diagnostic for the Bogolyubov validity condition N_T << N and for the
/// constant term n_T N_T g_g0.
pub fn depletion(
    params: &GasParameters,
    temperature: f64,
    theory: GravityTheory,
    shell_cutoff: i64,
) -> Result<DepletionReport> {
    if shell_cutoff < 1 {
        return Err(Error::InvalidParameter(
            "depletion shell cutoff must be >= 1".into(),
        ));
    }
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::InvalidParameter("temperature must be >= 0".into()));
    }
    let spectrum = Spectrum::new(params)?;
    let kt = CODATA_2018.k_b * temperature;
    let mut acc = CompensatedSum::new();
    let mults = shell_multiplicities(1, shell_cutoff as u64);
    for s in 1..=shell_cutoff {
        let r = f64::from(mults[(s - 1) as usize]);
        if r == 0.0 {
            continue;
        }
        let (u, v, eps) = spectrum.bogolyubov_shell(theory, s)?;
        let nb = if temperature == 0.0 { 0.0 } else { bose_x(eps / kt) };
        acc.add(r * (v * v + (u * u + v * v) * nb));
    }
    Ok(DepletionReport {
        n_t_atoms: acc.value(),
        shell_cutoff,
        temperature,
        theory,
    })
}

/// Shell-grouped partial sum up to a fixed shell (oracle support).
pub fn heat_capacity_shells_up_to(
    spectrum: &Spectrum,
    theory: GravityTheory,
    temperature: f64,
    max_n2: i64,
) -> Result<f64> {
    check_temperature(temperature)?;
    let kt = CODATA_2018.k_b * temperature;
    let mut cv = CompensatedSum::new();
    let mults = shell_multiplicities(1, max_n2 as u64);
    for s in 1..=max_n2 {
        let r = f64::from(mults[(s - 1) as usize]);
        if r == 0.0 {
            continue;
        }
        let eps = spectrum.epsilon_shell(theory, s)?;
        cv.add(r * mode_term_x(eps / kt));
    }
    Ok(cv.value())
}

/// Brute-force lattice enumeration of the same sum: every integer vector
/// with 0 < n^2 <= max_n2 contributes individually, in a fixed loop order.
pub fn heat_capacity_direct_enumeration(
    spectrum: &Spectrum,
    theory: GravityTheory,
    temperature: f64,
    max_n2: i64,
) -> Result<f64> {
    check_temperature(temperature)?;
    let kt = CODATA_2018.k_b * temperature;
    let reach = (max_n2 as f64).sqrt() as i64 + 1;
    let mut cv = CompensatedSum::new();
    for nx in -reach..=reach {
        for ny in -reach..=reach {
            for nz in -reach..=reach {
                let s = nx * nx + ny * ny + nz * nz;
                if s == 0 || s > max_n2 {
                    continue;
                }
                let eps = spectrum.epsilon_shell(theory, s)?;
                cv.add(mode_term_x(eps / kt));
            }
        }
    }
    Ok(cv.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::lookup_species;
    use crate::spectrum::build_couplings_gravity_zeroed;

    fn yb_params(n: f64, l: f64, g: Option<f64>) -> GasParameters {
        GasParameters::new(lookup_species("Yb-174").unwrap(), n, l, g).unwrap()
    }

    #[test]
    fn mode_term_limits_and_closed_point() {
        // soft-mode limit: each mode contributes one k_B
        assert!((mode_term_x(1e-9) - 1.0).abs() < 1e-12);
        // closed-form point: f(ln 2) = 2 (ln 2)^2
        let want = 2.0 * std::f64::consts::LN_2 * std::f64::consts::LN_2;
        assert!((mode_term_x(std::f64::consts::LN_2) - want).abs() < 1e-14);
        // frozen-out guard, no overflow
        assert_eq!(mode_term_x(1000.0), 0.0);
    }

    #[test]
    fn mode_term_series_crossover_continuous() {
        let x = 1e-4;
        let series = 1.0 - x * x / 12.0;
        let em = (-x_exact()).exp();
        let exact = x_exact() * x_exact() * em / ((1.0 - em) * (1.0 - em));
        assert!((series - exact).abs() < 1e-12);
        fn x_exact() -> f64 {
            1e-4
        }
    }

    #[test]
    fn classical_heat_capacity_ignores_gravity_bitwise() {
        // T in the phonon regime for the default coupling so c_v > 0
        let p = yb_params(1e16, 0.01, None);
        let with_gravity = heat_capacity(&p, GravityTheory::Classical, 2e-11, 1e-9).unwrap();
        let zeroed = Spectrum::with_couplings(&p, build_couplings_gravity_zeroed(&p).unwrap());
        let without =
            heat_capacity_for(&zeroed, GravityTheory::Classical, 2e-11, 1e-9).unwrap();
        assert!(with_gravity.c_v > 0.0);
        assert_eq!(with_gravity.c_v.to_bits(), without.c_v.to_bits());
        assert_eq!(with_gravity.shells_used, without.shells_used);
    }

    #[test]
    fn frozen_gas_converges_to_zero() {
        // x at the first shell far beyond 745
        let p = yb_params(1e16, 0.01, None);
        let r = heat_capacity(&p, GravityTheory::Classical, 1e-20, 1e-9).unwrap();
        assert_eq!(r.c_v, 0.0);
        assert!(r.converged);
        assert_eq!(r.shells_used, 5);
    }

    #[test]
    fn scenario_heat_capacity_value() {
        // free gas at the headline scenario, pinned from an independent
        // evaluation of the same sum
        let p = yb_params(1e16, 0.01, Some(0.0));
        let r = heat_capacity(&p, GravityTheory::Classical, 1e-14, 1e-9).unwrap();
        assert!(
            (r.c_v_over_kb - 2168.911).abs() / 2168.911 < 1e-4,
            "got {}",
            r.c_v_over_kb
        );
        assert!(r.converged);
        assert!(r.c_v > 0.0);
    }

    #[test]
    fn shell_sum_equals_direct_enumeration() {
        let p = yb_params(1e16, 0.01, None);
        let s = Spectrum::new(&p).unwrap();
        let a =
            heat_capacity_shells_up_to(&s, GravityTheory::Quantum, 1e-14, 100).unwrap();
        let b = heat_capacity_direct_enumeration(&s, GravityTheory::Quantum, 1e-14, 100)
            .unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn cv_decreases_toward_zero_temperature() {
        let p = yb_params(1e16, 0.01, None);
        let t0 = 2e-11; // phonon regime for the default coupling
        let mut last = f64::INFINITY;
        for temp in [t0, t0 / 2.0, t0 / 4.0] {
            let r = heat_capacity(&p, GravityTheory::Classical, temp, 1e-9).unwrap();
            assert!(r.c_v >= 0.0);
            assert!(r.c_v < last, "c_v not decreasing at T = {temp:e}");
            last = r.c_v;
        }
    }

    #[test]
    fn internal_energy_derivative_matches_heat_capacity() {
        let p = yb_params(1e16, 0.01, Some(0.0));
        let t = 1e-14;
        let h = 0.005 * t;
        let up = internal_energy(&p, GravityTheory::Quantum, t + h, 1e-11, None).unwrap();
        let dn = internal_energy(&p, GravityTheory::Quantum, t - h, 1e-11, None).unwrap();
        let fd = (up.thermal - dn.thermal) / (2.0 * h);
        let cv = heat_capacity(&p, GravityTheory::Quantum, t, 1e-11).unwrap().c_v;
        assert!((fd - cv).abs() / cv < 1e-4, "fd {fd:e} vs cv {cv:e}");
    }

    #[test]
    fn internal_energy_constants() {
        let p = yb_params(1e16, 0.01, None);
        let r = internal_energy(&p, GravityTheory::Classical, 1e-14, 1e-9, Some(10)).unwrap();
        let s = Spectrum::new(&p).unwrap();
        let mu = chemical_potential(&s.couplings, GravityTheory::Classical).mu;
        assert_eq!(r.mu_n, mu * 1e16);
        let g = r.ground_state.unwrap();
        assert_eq!(g.shell_cutoff, 10);
    }

    #[test]
    fn thermal_energy_vanishes_at_low_temperature() {
        let p = yb_params(1e16, 0.01, None);
        let r = internal_energy(&p, GravityTheory::Classical, 1e-20, 1e-9, None).unwrap();
        assert_eq!(r.thermal, 0.0);
    }

    #[test]
    fn depletion_limits() {
        // free classical gas at T -> 0: no mixing, no occupation (up to
        // the rounding floor of the v^2 radicand)
        let p = yb_params(1e16, 0.01, Some(0.0));
        let d = depletion(&p, 0.0, GravityTheory::Classical, 50).unwrap();
        assert!(d.n_t_atoms.abs() < 1e-10, "N_T = {:e}", d.n_t_atoms);

        // monotone in T at fixed cutoff
        let d1 = depletion(&p, 1e-14, GravityTheory::Quantum, 50).unwrap();
        let d2 = depletion(&p, 2e-14, GravityTheory::Quantum, 50).unwrap();
        assert!(d2.n_t_atoms > d1.n_t_atoms);

        // Bogolyubov validity at the acceptance parameters: N_T << N
        let d = depletion(&p, 1e-14, GravityTheory::Quantum, 2000).unwrap();
        assert!(d.n_t_atoms < 1e-6 * p.atom_count, "N_T = {}", d.n_t_atoms);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        // hot enough that the free-gas sum needs more shells than the budget
        let p = yb_params(1e16, 0.01, Some(0.0));
        let r = heat_capacity(&p, GravityTheory::Classical, 1e-10, 1e-9);
        assert!(matches!(r, Err(Error::NoConvergence(_))));
    }
}
