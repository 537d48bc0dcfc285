//! Shared fixture plumbing for the integration suites.
#![allow(dead_code)] // each test binary uses a different subset

use becgrav::constants::lookup_species;
use becgrav::GasParameters;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const FIXTURE_REL_TOL: f64 = 1e-9;
pub const FIXTURE_L_M: f64 = 0.01;

#[derive(Debug, Serialize, Deserialize)]
pub struct GkFixture {
    pub generated_by: String,
    pub oracle: String,
    pub species: String,
    pub mass_kg: f64,
    pub l_m: f64,
    pub rel_tol: f64,
    pub note: String,
    pub rows: Vec<GkFixtureRow>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GkFixtureRow {
    pub n: [i32; 3],
    pub n2: i64,
    pub g_approx: f64,
    pub g_oracle_1d: f64,
    pub rel_err: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReferencePoints {
    pub generated_by: String,
    pub note: String,
    /// Yb-174 defaults, N = 1e16, L = 0.01 m, shell cutoff 10
    pub ground_state_quantum_j: f64,
    pub ground_state_classical_j: f64,
    /// Yb-174, N = 1e15, L = 0.01 m, contact coupling off, mode (1,0,0)
    pub energy_deviation_percent_n1e15: f64,
    /// Inverse problem at N = 1e16, L = 0.01 m, T = 1e-14 K, target 3.164
    pub reconciled_g_em_j_m3: f64,
    pub reconciled_cv_over_kb: f64,
    pub reconciled_quantum_deviation_percent: f64,
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn load_gk_fixture() -> GkFixture {
    let path = fixture_dir().join("gk_oracle_n2_27.json");
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("fixture {} missing ({e}); run the ignored fixtures::regenerate test", path.display()));
    serde_json::from_str(&text).expect("fixture parses")
}

pub fn load_reference_points() -> ReferencePoints {
    let path = fixture_dir().join("reference_points.json");
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("fixture {} missing ({e}); run the ignored fixtures::regenerate test", path.display()));
    serde_json::from_str(&text).expect("fixture parses")
}

pub fn yb_params(atom_count: f64, box_length: f64, g_em_override: Option<f64>) -> GasParameters {
    GasParameters::new(
        lookup_species("Yb-174").unwrap(),
        atom_count,
        box_length,
        g_em_override,
    )
    .unwrap()
}
