//! Physical constants (CODATA 2018), the species registry, and the gas
//! configuration shared by every other module.
//!
//! Everything is SI doubles. All magnitudes that occur in the scenarios of
//! interest stay within ~1e-90..1e+90, so intermediate squares never
//! underflow. An optional nondimensional energy scale E0 = hbar^2/(2 m L^2)
//! is exposed for reporting only; nothing is stored nondimensionally.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Fundamental constants, CODATA 2018. Immutable for the process lifetime.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalConstants {
    /// Reduced Planck constant (J*s)
    pub hbar: f64,
    /// Newtonian gravitational constant (m^3 kg^-1 s^-2)
    pub g: f64,
    /// Boltzmann constant (J/K)
    pub k_b: f64,
    /// Speed of light (m/s)
    pub c: f64,
    /// Atomic mass unit (kg)
    pub u: f64,
}

/// CODATA 2018 values.
pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    g: 6.674_30e-11,
    k_b: 1.380_649e-23,
    c: 299_792_458.0,
    u: 1.660_539_066_60e-27,
};

/// Label written into provenance headers.
pub const CONSTANTS_LABEL: &str = "CODATA-2018";

/// An atomic species: identity plus the three numbers the model needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub name: String,
    /// Atomic mass (kg)
    pub mass: f64,
    /// s-wave scattering length (m); may be Feshbach-tuned to either sign
    pub scattering_length: f64,
    /// Three-body loss rate coefficient (m^6/s) in dn/dt = -rate * n^3
    pub three_body_rate: f64,
}

impl Species {
    /// Build from the conventional experimental units (u, nm, m^6/s).
    pub fn from_table_units(
        name: &str,
        mass_u: f64,
        a_s_nm: f64,
        three_body_rate: f64,
    ) -> Result<Self> {
        let s = Species {
            name: name.to_string(),
            mass: mass_u * CODATA_2018.u,
            scattering_length: a_s_nm * 1e-9,
            three_body_rate,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "species mass must be > 0, got {:e}",
                self.mass
            )));
        }
        if !(self.three_body_rate.is_finite() && self.three_body_rate >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "three-body rate must be >= 0, got {:e}",
                self.three_body_rate
            )));
        }
        if !self.scattering_length.is_finite() {
            return Err(Error::InvalidParameter(
                "scattering length must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// One row of a species registry file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeciesFileEntry {
    pub name: String,
    pub mass_u: f64,
    pub a_s_nm: f64,
    pub three_body_rate_m6_per_s: f64,
}

/// Built-in registry rows. Yb-174 defaults: a_s = 5.55 nm (~105 Bohr radii,
/// configurable; recorded in all outputs) and a three-body rate of 1e-41
/// m^6/s. H-1 ships with the spin-polarized triplet scattering length.
pub fn builtin_species() -> Vec<SpeciesFileEntry> {
    vec![
        SpeciesFileEntry {
            name: "Yb-174".into(),
            mass_u: 174.0,
            a_s_nm: 5.55,
            three_body_rate_m6_per_s: 1e-41,
        },
        SpeciesFileEntry {
            name: "H-1".into(),
            mass_u: 1.008,
            a_s_nm: 0.0648,
            three_body_rate_m6_per_s: 0.0,
        },
    ]
}

/// Look a species up in the built-in registry.
pub fn lookup_species(name: &str) -> Result<Species> {
    lookup_species_in(name, &builtin_species())
}

/// Look a species up in an explicit registry (e.g. loaded from file).
pub fn lookup_species_in(name: &str, registry: &[SpeciesFileEntry]) -> Result<Species> {
    registry
        .iter()
        .find(|e| e.name == name)
        .map(|e| Species::from_table_units(&e.name, e.mass_u, e.a_s_nm, e.three_body_rate_m6_per_s))
        .unwrap_or_else(|| Err(Error::UnknownSpecies(name.to_string())))
}

/// Load a JSON registry file (array of entries) and append it to the
/// built-ins; file entries shadow built-ins with the same name.
pub fn load_registry(path: &std::path::Path) -> Result<Vec<SpeciesFileEntry>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    let loaded: Vec<SpeciesFileEntry> = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("bad registry {}: {e}", path.display())))?;
    let mut merged = loaded;
    for b in builtin_species() {
        if !merged.iter().any(|e| e.name == b.name) {
            merged.push(b);
        }
    }
    Ok(merged)
}

/// The experiment configuration: species, atom number, box size, and an
/// optional electromagnetic-coupling override modelling Feshbach tuning.
///
/// Volume and density are always derived from these fields, never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct GasParameters {
    pub species: Species,
    /// Atom number N (>= 1). Kept as f64: the scenarios run to 1e16 atoms.
    pub atom_count: f64,
    /// Box side L (m)
    pub box_length: f64,
    /// Replaces 4 pi hbar^2 a_s / m when present (J*m^3)
    pub g_em_override: Option<f64>,
}

/// Derived bundle returned by [`derived_quantities`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derived {
    /// Box volume L^3 (m^3)
    pub volume: f64,
    /// Number density N/L^3 (m^-3)
    pub density: f64,
    /// Contact coupling (J*m^3): the override if present, else 4 pi hbar^2 a_s / m
    pub g_em: f64,
}

impl GasParameters {
    pub fn new(
        species: Species,
        atom_count: f64,
        box_length: f64,
        g_em_override: Option<f64>,
    ) -> Result<Self> {
        species.validate()?;
        if !(atom_count.is_finite() && atom_count >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "atom count must be >= 1, got {atom_count:e}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "box length must be > 0, got {box_length:e}"
            )));
        }
        if let Some(g) = g_em_override {
            if !g.is_finite() {
                return Err(Error::InvalidParameter("g_em override must be finite".into()));
            }
        }
        Ok(GasParameters {
            species,
            atom_count,
            box_length,
            g_em_override,
        })
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    pub fn density(&self) -> f64 {
        self.atom_count / self.volume()
    }

    pub fn g_em(&self) -> f64 {
        match self.g_em_override {
            Some(g) => g,
            None => {
                let c = CODATA_2018;
                4.0 * std::f64::consts::PI * c.hbar * c.hbar * self.species.scattering_length
                    / self.species.mass
            }
        }
    }

    /// Reporting-only energy scale E0 = hbar^2 / (2 m L^2) (J).
    pub fn energy_scale(&self) -> f64 {
        let c = CODATA_2018;
        c.hbar * c.hbar / (2.0 * self.species.mass * self.box_length * self.box_length)
    }
}

/// volume = L^3, density = N/L^3, g_em = override or 4 pi hbar^2 a_s / m.
/// Pure: identical inputs give bit-identical outputs.
pub fn derived_quantities(params: &GasParameters) -> Derived {
    Derived {
        volume: params.volume(),
        density: params.density(),
        g_em: params.g_em(),
    }
}
