//! Coupling sets, chemical potentials, quasiparticle dispersion relations,
//! and Bogolyubov coefficients for the two gravity treatments.
//!
//! With gravity treated classically (field sourced by the expectation of
//! the density), the diagonalized spectrum is the textbook one,
//!
//! ```text
//! eps_CG(k) = hbar k sqrt( hbar^2 k^2 / (4 m^2) + n g_em / m )
//! ```
//!
//! independent of the gravitational couplings. With gravity quantized, the
//! mode-dependent coupling g_gk enters. The chemical potential is fixed by
//! requiring the spectrum to be gapless:
//!
//! * g_em > |g_g0| (EM-dominated):  mu = n (g_em + g_g0) and
//!   `eps_QG(k) = hbar k sqrt(hbar^2 k^2/(4 m^2) + n g_em/m + n g_gk/m)`;
//! * g_em < |g_g0| (gravity-dominated):  mu = 3 n (g_em + g_g0) and
//!   `eps_QG(k) = sqrt( (hbar^2 k^2/(2m) - 2n(g_em+g_g0))
//!                      (hbar^2 k^2/(2m) - 2n(g_g0-g_gk)) )`,
//!   which stays real for the physical couplings (g_g0 < 0, |g_gk| < |g_g0|).
//!
//! A negative radicand is reported as `DynamicalInstability`, never as NaN.

use crate::constants::{derived_quantities, GasParameters, CODATA_2018};
use crate::cube::{GravityCoupling, ModeIndex};
use crate::error::{Error, Result};
use crate::lattice::shell_multiplicity;
use std::f64::consts::PI;

/// Which treatment of the gravitational self-interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GravityTheory {
    Quantum,
    Classical,
}

impl std::fmt::Display for GravityTheory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GravityTheory::Quantum => write!(f, "quantum"),
            GravityTheory::Classical => write!(f, "classical"),
        }
    }
}

/// Which coupling dominates the zero mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    EmDominated,
    GravityDominated,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::EmDominated => write!(f, "em-dominated"),
            Regime::GravityDominated => write!(f, "gravity-dominated"),
        }
    }
}

/// Interaction strengths entering the spectrum, with the regime classified
/// at construction. Exact equality g_em = |g_g0| is rejected: the analysis
/// holds for strict inequalities only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSet {
    /// Contact coupling (J*m^3)
    pub g_em: f64,
    /// Gravitational couplings (zero mode + mode-indexed coefficients)
    pub gravity: GravityCoupling,
    pub regime: Regime,
    /// Number density n = N/V (1/m^3)
    pub density: f64,
}

impl CouplingSet {
    pub fn from_parts(g_em: f64, gravity: GravityCoupling, density: f64) -> Result<Self> {
        if g_em == gravity.g_g0.abs() {
            return Err(Error::DegenerateRegime(g_em));
        }
        let regime = if g_em > gravity.g_g0.abs() {
            Regime::EmDominated
        } else {
            Regime::GravityDominated
        };
        Ok(CouplingSet {
            g_em,
            gravity,
            regime,
            density,
        })
    }

    pub fn g_g0(&self) -> f64 {
        self.gravity.g_g0
    }

    pub fn g_gk_shell(&self, n2: i64) -> f64 {
        self.gravity.g_gk_shell(n2)
    }
}

/// Assemble the coupling set for a gas: g_em from the derived quantities,
/// g_g0 and g_gk from the box potential.
pub fn build_couplings(params: &GasParameters) -> Result<CouplingSet> {
    let d = derived_quantities(params);
    let gravity = GravityCoupling::from_mass_box(params.species.mass, params.box_length);
    CouplingSet::from_parts(d.g_em, gravity, d.density)
}

/// Same gas, gravity switched off entirely (both g_g0 and g_gk zero).
pub fn build_couplings_gravity_zeroed(params: &GasParameters) -> Result<CouplingSet> {
    let d = derived_quantities(params);
    CouplingSet::from_parts(d.g_em, GravityCoupling::zeroed(), d.density)
}

/// mu fixed by the gapless condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChemicalPotential {
    /// (J)
    pub mu: f64,
    pub theory: GravityTheory,
    pub regime: Regime,
}

pub fn chemical_potential(couplings: &CouplingSet, theory: GravityTheory) -> ChemicalPotential {
    let n = couplings.density;
    let base = n * (couplings.g_em + couplings.g_g0());
    let mu = match (theory, couplings.regime) {
        (GravityTheory::Classical, _) => base,
        (GravityTheory::Quantum, Regime::EmDominated) => base,
        (GravityTheory::Quantum, Regime::GravityDominated) => 3.0 * base,
    };
    ChemicalPotential {
        mu,
        theory,
        regime: couplings.regime,
    }
}

/// One point of a dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub mode: ModeIndex,
    /// (1/m)
    pub k: f64,
    /// Excitation energy (J), finite and >= 0
    pub epsilon: f64,
    pub theory: GravityTheory,
}

/// Quasiparticle transformation coefficients, real positive branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogolyubovCoefficients {
    pub u: f64,
    pub v: f64,
    pub mode: ModeIndex,
}

/// Classification of the gapless excitation branch by its low-k exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NgbClass {
    /// Linear (phonon-like) dispersion
    TypeA,
    /// Quadratic dispersion
    TypeB,
    /// Fitted exponent outside both windows
    Indeterminate,
}

impl std::fmt::Display for NgbClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NgbClass::TypeA => write!(f, "type-A"),
            NgbClass::TypeB => write!(f, "type-B"),
            NgbClass::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NgbReport {
    pub class: NgbClass,
    /// Fitted d ln(eps) / d ln(k) over the lowest shells
    pub slope: f64,
}

/// Diagnostic partial ground-state sum; UV-divergent by construction, so
/// the cutoff is part of the result and the value is excluded from all
/// thermodynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateEnergy {
    /// Partial sum (J)
    pub energy: f64,
    pub shell_cutoff: i64,
    pub theory: GravityTheory,
}

/// Ready-to-evaluate spectrum for one gas configuration.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub mass: f64,
    pub box_length: f64,
    pub atom_count: f64,
    pub couplings: CouplingSet,
}

impl Spectrum {
    pub fn new(params: &GasParameters) -> Result<Self> {
        Ok(Spectrum {
            mass: params.species.mass,
            box_length: params.box_length,
            atom_count: params.atom_count,
            couplings: build_couplings(params)?,
        })
    }

    /// Spectrum with explicit couplings (synthetic sets, zeroed gravity).
    pub fn with_couplings(params: &GasParameters, couplings: CouplingSet) -> Self {
        Spectrum {
            mass: params.species.mass,
            box_length: params.box_length,
            atom_count: params.atom_count,
            couplings,
        }
    }

    pub fn wavenumber(&self, n2: i64) -> f64 {
        2.0 * PI * (n2 as f64).sqrt() / self.box_length
    }

    /// Kinetic energy hbar^2 k^2 / (2m) of shell s (J).
    pub fn kinetic_shell(&self, n2: i64) -> f64 {
        let hbar = CODATA_2018.hbar;
        let k = self.wavenumber(n2);
        hbar * hbar * k * k / (2.0 * self.mass)
    }

    /// Excitation energy on shell s = n^2 for the requested theory.
    pub fn epsilon_shell(&self, theory: GravityTheory, n2: i64) -> Result<f64> {
        debug_assert!(n2 >= 1);
        let hbar = CODATA_2018.hbar;
        let m = self.mass;
        let n = self.couplings.density;
        let k = self.wavenumber(n2);
        let quantum_pressure = hbar * hbar * k * k / (4.0 * m * m);
        match (theory, self.couplings.regime) {
            (GravityTheory::Classical, _) => {
                let radicand = quantum_pressure + n * self.couplings.g_em / m;
                if radicand < 0.0 {
                    return Err(Error::DynamicalInstability { n2, radicand });
                }
                Ok(hbar * k * radicand.sqrt())
            }
            (GravityTheory::Quantum, Regime::EmDominated) => {
                let radicand = quantum_pressure
                    + n * self.couplings.g_em / m
                    + n * self.couplings.g_gk_shell(n2) / m;
                if radicand < 0.0 {
                    return Err(Error::DynamicalInstability { n2, radicand });
                }
                Ok(hbar * k * radicand.sqrt())
            }
            (GravityTheory::Quantum, Regime::GravityDominated) => {
                let t = hbar * hbar * k * k / (2.0 * m);
                let f1 = t - 2.0 * n * (self.couplings.g_em + self.couplings.g_g0());
                let f2 = t - 2.0 * n * (self.couplings.g_g0() - self.couplings.g_gk_shell(n2));
                let radicand = f1 * f2;
                if radicand < 0.0 {
                    return Err(Error::DynamicalInstability { n2, radicand });
                }
                Ok(radicand.sqrt())
            }
        }
    }

    pub fn dispersion(&self, theory: GravityTheory, mode: &ModeIndex) -> Result<DispersionPoint> {
        let epsilon = self.epsilon_shell(theory, mode.n2())?;
        Ok(DispersionPoint {
            mode: *mode,
            k: mode.k(self.box_length),
            epsilon,
            theory,
        })
    }

    /// The diagonal coefficient of the pre-diagonalization quadratic form,
    /// with the gapless mu substituted. For the classical theory the g_gk
    /// terms are absent.
    fn diagonal_coefficient(&self, theory: GravityTheory, n2: i64) -> f64 {
        let n = self.couplings.density;
        let t = self.kinetic_shell(n2);
        let mu = chemical_potential(&self.couplings, theory).mu;
        match theory {
            GravityTheory::Classical => {
                t - mu + 2.0 * n * self.couplings.g_em + n * self.couplings.g_g0()
            }
            GravityTheory::Quantum => {
                t - mu
                    + n * (2.0 * self.couplings.g_em
                        + self.couplings.g_g0()
                        + self.couplings.g_gk_shell(n2))
            }
        }
    }

    /// Off-diagonal coefficient of the same form.
    fn offdiagonal_coefficient(&self, theory: GravityTheory, n2: i64) -> f64 {
        let n = self.couplings.density;
        match theory {
            GravityTheory::Classical => n * self.couplings.g_em,
            GravityTheory::Quantum => {
                n * (self.couplings.g_em + self.couplings.g_gk_shell(n2))
            }
        }
    }

    /// Dispersion evaluated from the pre-gapless form
    /// sqrt((A - B)(A + B)); exists to cross-check that substituting the
    /// chosen mu reproduces the canonical expressions.
    pub fn epsilon_shell_pre_gapless(&self, theory: GravityTheory, n2: i64) -> Result<f64> {
        let a = self.diagonal_coefficient(theory, n2);
        let b = self.offdiagonal_coefficient(theory, n2);
        let radicand = (a - b) * (a + b);
        if radicand < 0.0 {
            return Err(Error::DynamicalInstability { n2, radicand });
        }
        Ok(radicand.sqrt())
    }

    /// u, v on shell s: u = sqrt(A/(2 eps) + 1/2), v = sqrt(A/(2 eps) - 1/2).
    pub fn bogolyubov_shell(&self, theory: GravityTheory, n2: i64) -> Result<(f64, f64, f64)> {
        let epsilon = self.epsilon_shell(theory, n2)?;
        let a = self.diagonal_coefficient(theory, n2);
        let ratio = a / (2.0 * epsilon);
        let u = (ratio + 0.5).sqrt();
        let v2 = ratio - 0.5;
        // rounding can leave v^2 at -1e-17 for a free gas where A = eps
        let v = if v2 >= 0.0 {
            v2.sqrt()
        } else if v2 > -1e-10 * ratio.abs().max(1.0) {
            0.0
        } else {
            return Err(Error::NonFinite("bogolyubov v^2 < 0"));
        };
        Ok((u, v, epsilon))
    }

    pub fn bogolyubov_coefficients(
        &self,
        theory: GravityTheory,
        mode: &ModeIndex,
    ) -> Result<BogolyubovCoefficients> {
        let (u, v, _) = self.bogolyubov_shell(theory, mode.n2())?;
        Ok(BogolyubovCoefficients { u, v, mode: *mode })
    }

    /// log-log slope of eps(k) over shells n^2 in {1,2,3,4}, mapped to the
    /// Nambu-Goldstone classes: [0.9, 1.1] -> TypeA, [1.9, 2.1] -> TypeB.
    pub fn classify_ngb(&self, theory: GravityTheory) -> Result<NgbReport> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in 1..=4i64 {
            let eps = self.epsilon_shell(theory, s)?;
            xs.push(self.wavenumber(s).ln());
            ys.push(eps.ln());
        }
        let nf = xs.len() as f64;
        let xm = xs.iter().sum::<f64>() / nf;
        let ym = ys.iter().sum::<f64>() / nf;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
        let slope = sxy / sxx;
        let class = if (0.9..=1.1).contains(&slope) {
            NgbClass::TypeA
        } else if (1.9..=2.1).contains(&slope) {
            NgbClass::TypeB
        } else {
            NgbClass::Indeterminate
        };
        Ok(NgbReport { class, slope })
    }

    /// Partial ground-state sums over shells s <= cutoff (diagnostic only;
    /// UV-divergent, regularization-dependent, excluded from heat capacity).
    pub fn ground_state_energy(
        &self,
        theory: GravityTheory,
        shell_cutoff: i64,
    ) -> Result<GroundStateEnergy> {
        if shell_cutoff < 1 {
            return Err(Error::InvalidParameter(
                "ground-state shell cutoff must be >= 1".into(),
            ));
        }
        let n = self.couplings.density;
        let big_n = self.atom_count;
        let g_em = self.couplings.g_em;
        let g_g0 = self.couplings.g_g0();
        let mu = chemical_potential(&self.couplings, theory).mu;

        let mut base = 0.5 * n * big_n * g_em;
        let mut main = match theory {
            GravityTheory::Quantum => 0.5 * n * big_n * g_g0,
            GravityTheory::Classical => {
                // constant term n_T N_T g_g0 with the zero-temperature
                // depletion N_T = sum r3 v^2 over the same cutoff
                let mut n_t = 0.0;
                for s in 1..=shell_cutoff {
                    let r = shell_multiplicity(s as u64) as f64;
                    if r == 0.0 {
                        continue;
                    }
                    let (_, v, _) = self.bogolyubov_shell(theory, s)?;
                    n_t += r * v * v;
                }
                let volume = self.box_length.powi(3);
                (n_t / volume) * n_t * g_g0
            }
        };
        for s in 1..=shell_cutoff {
            let r = shell_multiplicity(s as u64) as f64;
            if r == 0.0 {
                continue;
            }
            let t = self.kinetic_shell(s);
            base += 0.5 * r * (mu - t - 2.0 * n * g_em - n * g_g0);
            match theory {
                GravityTheory::Quantum => {
                    let eps = self.epsilon_shell(theory, s)?;
                    main += 0.5 * r * (eps - n * self.couplings.g_gk_shell(s));
                }
                GravityTheory::Classical => {
                    let eps = self.epsilon_shell(theory, s)?;
                    main += 0.5 * r * eps;
                }
            }
        }
        Ok(GroundStateEnergy {
            energy: base + main,
            shell_cutoff,
            theory,
        })
    }
}

/// Dispersion at a mode, building couplings from the gas parameters.
pub fn dispersion(
    params: &GasParameters,
    theory: GravityTheory,
    mode: &ModeIndex,
) -> Result<DispersionPoint> {
    Spectrum::new(params)?.dispersion(theory, mode)
}

/// Bogolyubov coefficients at a mode.
pub fn bogolyubov_coefficients(
    params: &GasParameters,
    theory: GravityTheory,
    mode: &ModeIndex,
) -> Result<BogolyubovCoefficients> {
    Spectrum::new(params)?.bogolyubov_coefficients(theory, mode)
}

/// Diagnostic partial ground-state energy.
pub fn ground_state_energy(
    params: &GasParameters,
    theory: GravityTheory,
    shell_cutoff: i64,
) -> Result<GroundStateEnergy> {
    Spectrum::new(params)?.ground_state_energy(theory, shell_cutoff)
}

/// Slope-based Nambu-Goldstone classification.
pub fn classify_ngb(params: &GasParameters, theory: GravityTheory) -> Result<NgbReport> {
    Spectrum::new(params)?.classify_ngb(theory)
}
