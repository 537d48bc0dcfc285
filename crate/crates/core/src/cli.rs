//! Command-line front end. Every capability is a subcommand; outputs are
//! CSV (comma-separated, '.' decimal, '#'-prefixed provenance lines, then a
//! header row) or JSON (one object with "meta" and "rows"). Exit codes:
//! 0 success, 1 physics/numerics failure (machine-readable object on
//! stderr), 2 usage or configuration error.

use crate::constants::{
    builtin_species, load_registry, lookup_species_in, GasParameters, Species, CONSTANTS_LABEL,
};
use crate::cube::{
    gk_approx, gk_oracle_1d, gk_oracle_3d, orbit_representatives, v0_closed_form, FourierMode,
};
use crate::error::{Error, Result};
use crate::experiment::{
    geomspace, heatcap_deviation_for, nl_threshold_report, reconcile_cv_target, scan,
    validity_report, ScanGrid,
};
use crate::spectrum::{chemical_potential, GravityTheory, Spectrum};
use crate::thermo::{
    heat_capacity_direct_enumeration, heat_capacity_for, heat_capacity_shells_up_to,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoryArg {
    Quantum,
    Classical,
    Both,
}

#[derive(Debug, Parser)]
#[command(
    name = "becgrav",
    version = TOOL_VERSION,
    about = "Self-gravitating Bose gas: box-potential Fourier coefficients, \
             quasiparticle spectra, heat-capacity mode sums, experiment design"
)]
pub struct Cli {
    /// Cap on worker threads (results are identical for any cap)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct SpeciesOpts {
    /// Registered species name (or a label for a custom species)
    #[arg(long, default_value = "Yb-174")]
    pub species: String,
    /// JSON registry file; entries shadow the built-ins
    #[arg(long)]
    pub species_file: Option<PathBuf>,
    /// Custom/override atomic mass (u)
    #[arg(long)]
    pub mass_u: Option<f64>,
    /// Custom/override scattering length (nm)
    #[arg(long)]
    pub a_s_nm: Option<f64>,
    /// Custom/override three-body loss rate (m^6/s)
    #[arg(long)]
    pub three_body_rate: Option<f64>,
}

impl SpeciesOpts {
    pub fn resolve(&self) -> Result<Species> {
        let registry = match &self.species_file {
            Some(p) => load_registry(p)?,
            None => builtin_species(),
        };
        let base = match lookup_species_in(&self.species, &registry) {
            Ok(s) => s,
            Err(Error::UnknownSpecies(name)) => {
                // a fully custom species needs at least a mass
                match self.mass_u {
                    Some(_) => Species::from_table_units(&name, 1.0, 0.0, 0.0)?,
                    None => return Err(Error::UnknownSpecies(name)),
                }
            }
            Err(e) => return Err(e),
        };
        let mut s = base;
        if let Some(mu) = self.mass_u {
            s.mass = mu * crate::constants::CODATA_2018.u;
        }
        if let Some(a) = self.a_s_nm {
            s.scattering_length = a * 1e-9;
        }
        if let Some(r) = self.three_body_rate {
            s.three_body_rate = r;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GasOpts {
    #[command(flatten)]
    pub species: SpeciesOpts,
    /// Atom number N
    #[arg(long = "N", visible_alias = "atom-count")]
    pub atom_count: f64,
    /// Box side length (m)
    #[arg(long)]
    pub l_m: f64,
    /// Contact-coupling override (J*m^3), e.g. 0 for Feshbach-tuned off
    #[arg(long)]
    pub g_em_override_j_m3: Option<f64>,
}

impl GasOpts {
    pub fn resolve(&self) -> Result<GasParameters> {
        GasParameters::new(
            self.species.resolve()?,
            self.atom_count,
            self.l_m,
            self.g_em_override_j_m3,
        )
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximation-vs-oracle table for the box-potential coefficients
    Potential {
        #[command(flatten)]
        species: SpeciesOpts,
        /// Box side length (m)
        #[arg(long, default_value_t = 0.01)]
        l_m: f64,
        /// Largest shell n^2 to tabulate
        #[arg(long, default_value_t = 27)]
        max_n2: i64,
        /// Oracle quadrature tolerance
        #[arg(long, default_value_t = 1e-8)]
        rel_tol: f64,
    },
    /// Dispersion relations for both theories over the lowest shells
    Spectrum {
        #[command(flatten)]
        gas: GasOpts,
        /// Largest shell n^2 to tabulate
        #[arg(long, default_value_t = 30)]
        max_n2: i64,
    },
    /// Heat capacity at one temperature or a geometric sweep
    Heatcap {
        #[command(flatten)]
        gas: GasOpts,
        /// Temperature (K)
        #[arg(long, required_unless_present = "t_start_k")]
        t_k: Option<f64>,
        /// Sweep start (K)
        #[arg(long, requires = "t_stop_k", requires = "t_points")]
        t_start_k: Option<f64>,
        /// Sweep stop (K)
        #[arg(long)]
        t_stop_k: Option<f64>,
        /// Sweep points (geometric)
        #[arg(long)]
        t_points: Option<usize>,
        #[arg(long, value_enum, default_value = "both")]
        theory: TheoryArg,
        #[arg(long, default_value_t = crate::thermo::DEFAULT_REL_TOL)]
        rel_tol: f64,
    },
    /// Deviation observables over an (N, L, T) grid
    Scan {
        /// JSON config mirroring the scan options; flags override it
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        species: SpeciesOpts,
        /// N range start,stop,points (geometric)
        #[arg(long, num_args = 3, value_names = ["START", "STOP", "POINTS"])]
        n_range: Option<Vec<f64>>,
        /// L range start,stop,points in meters (geometric)
        #[arg(long, num_args = 3, value_names = ["START", "STOP", "POINTS"])]
        l_m_range: Option<Vec<f64>>,
        /// T range start,stop,points in kelvin (geometric)
        #[arg(long, num_args = 3, value_names = ["START", "STOP", "POINTS"])]
        t_k_range: Option<Vec<f64>>,
        #[arg(long)]
        g_em_override_j_m3: Option<f64>,
        #[arg(long, default_value_t = crate::thermo::DEFAULT_REL_TOL)]
        rel_tol: f64,
    },
    /// Validity-of-approximations report
    Validate {
        #[command(flatten)]
        gas: GasOpts,
    },
    /// Detectability threshold N*L for a given mode and deviation level
    NlThreshold {
        #[command(flatten)]
        species: SpeciesOpts,
        /// Mode shell |n_k|^2
        #[arg(long, default_value_t = 1)]
        n_k2: i64,
        /// Target deviation (%)
        #[arg(long, default_value_t = 0.1)]
        deviation_percent: f64,
    },
    /// Fit the contact coupling to a target classical heat capacity
    ReconcileCv {
        #[command(flatten)]
        species: SpeciesOpts,
        #[arg(long = "N")]
        atom_count: f64,
        #[arg(long)]
        l_m: f64,
        #[arg(long)]
        t_k: f64,
        /// Target c_V / k_B
        #[arg(long)]
        cv_target: f64,
        #[arg(long, default_value_t = crate::thermo::DEFAULT_REL_TOL)]
        rel_tol: f64,
    },
    /// Cross-check independent computation routes against each other
    CompareOracle {
        /// Which pair of routes to compare
        #[arg(long, value_enum)]
        op: OracleOp,
        #[command(flatten)]
        gas: GasOpts,
        #[arg(long, default_value_t = 100)]
        max_n2: i64,
        /// Temperature for the heatcap comparison (K)
        #[arg(long, default_value_t = 1e-14)]
        t_k: f64,
        /// Grid for the 3D quadrature in the potential comparison
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long, default_value_t = 1e-8)]
        rel_tol: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleOp {
    /// Shell-grouped heat capacity vs direct lattice enumeration
    Heatcap,
    /// 1D radial oracle vs 3D box quadrature (and the closed form at k=0)
    Potential,
}

/// Declarative run configuration; the JSON mirror of the scan options.
/// Round-trips exactly: parse(serialize(config)) == config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub species: SpeciesConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_range: Option<GeomRange>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub l_m_range: Option<GeomRange>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_k_range: Option<GeomRange>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g_em_override_j_m3: Option<f64>,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpeciesConfig {
    Custom {
        name: String,
        mass_u: f64,
        a_s_nm: f64,
        three_body_rate_m6_per_s: f64,
    },
    Named {
        name: String,
    },
}

impl SpeciesConfig {
    pub fn resolve(&self) -> Result<Species> {
        match self {
            SpeciesConfig::Named { name } => crate::constants::lookup_species(name),
            SpeciesConfig::Custom {
                name,
                mass_u,
                a_s_nm,
                three_body_rate_m6_per_s,
            } => Species::from_table_units(name, *mass_u, *a_s_nm, *three_body_rate_m6_per_s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GeomRange {
    fn values(&self) -> Result<Vec<f64>> {
        geomspace(self.start, self.stop, self.points)
    }

    fn from_flag(v: &[f64]) -> Result<Self> {
        if v.len() != 3 || v[2].fract() != 0.0 || v[2] < 1.0 {
            return Err(Error::InvalidParameter(
                "range flags take start stop points".into(),
            ));
        }
        Ok(GeomRange {
            start: v[0],
            stop: v[1],
            points: v[2] as usize,
        })
    }
}

// ---------------------------------------------------------------------------
// output plumbing

struct Output {
    meta: Vec<(String, String)>,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn species_meta(s: &Species) -> Vec<(String, String)> {
    vec![
        ("species".into(), s.name.clone()),
        ("mass_kg".into(), fmt(s.mass)),
        ("a_s_m".into(), fmt(s.scattering_length)),
        ("three_body_rate_m6_per_s".into(), fmt(s.three_body_rate)),
    ]
}

fn base_meta(command: &str) -> Vec<(String, String)> {
    vec![
        ("tool".into(), format!("becgrav {TOOL_VERSION}")),
        ("constants".into(), CONSTANTS_LABEL.into()),
        ("command".into(), command.into()),
    ]
}

fn render(output: &Output, format: OutputFormat, sink: &mut dyn Write) -> std::io::Result<()> {
    match format {
        OutputFormat::Csv => {
            for (k, v) in &output.meta {
                writeln!(sink, "# {k} = {v}")?;
            }
            writeln!(sink, "{}", output.header.join(","))?;
            for row in &output.rows {
                writeln!(sink, "{}", row.join(","))?;
            }
        }
        OutputFormat::Json => {
            let meta: serde_json::Map<String, serde_json::Value> = output
                .meta
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect();
            let rows: Vec<serde_json::Value> = output
                .rows
                .iter()
                .map(|row| {
                    let obj: serde_json::Map<String, serde_json::Value> = output
                        .header
                        .iter()
                        .zip(row)
                        .map(|(k, v)| ((*k).to_string(), serde_json::Value::String(v.clone())))
                        .collect();
                    serde_json::Value::Object(obj)
                })
                .collect();
            let doc = serde_json::json!({ "meta": meta, "rows": rows });
            writeln!(sink, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}

fn emit(output: Output, format: OutputFormat, out: &Option<PathBuf>) -> Result<()> {
    let io_err =
        |e: std::io::Error| Error::InvalidParameter(format!("cannot write output: {e}"));
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path).map_err(io_err)?;
            render(&output, format, &mut f).map_err(io_err)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            render(&output, format, &mut lock).map_err(io_err)
        }
    }
}

fn flag(b: bool) -> String {
    if b { "true".into() } else { "false".into() }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// subcommand bodies

fn run_potential(species: &Species, l_m: f64, max_n2: i64, rel_tol: f64) -> Result<Output> {
    let mut meta = base_meta("potential");
    meta.extend(species_meta(species));
    meta.push(("l_m".into(), fmt(l_m)));
    meta.push(("rel_tol".into(), fmt(rel_tol)));
    let mut rows = Vec::new();
    for mode in orbit_representatives(max_n2) {
        let [a, b, c] = mode.components();
        let approx = gk_approx(&mode, species.mass, l_m);
        let oracle = gk_oracle_1d(&mode, species.mass, l_m, rel_tol)?;
        let rel_err = (approx - oracle).abs() / oracle.abs();
        rows.push(vec![
            a.to_string(),
            b.to_string(),
            c.to_string(),
            mode.n2().to_string(),
            fmt(approx),
            fmt(oracle),
            fmt(rel_err),
        ]);
    }
    Ok(Output {
        meta,
        header: vec!["n_x", "n_y", "n_z", "n2", "g_approx", "g_oracle1d", "rel_err"],
        rows,
    })
}

fn run_spectrum(params: &GasParameters, max_n2: i64) -> Result<Output> {
    let spectrum = Spectrum::new(params)?;
    let mut meta = base_meta("spectrum");
    meta.extend(species_meta(&params.species));
    meta.push(("atom_count".into(), fmt(params.atom_count)));
    meta.push(("l_m".into(), fmt(params.box_length)));
    meta.push(("g_em_j_m3".into(), fmt(params.g_em())));
    meta.push(("g_g0_j_m3".into(), fmt(spectrum.couplings.g_g0())));
    meta.push(("regime".into(), spectrum.couplings.regime.to_string()));
    for theory in [GravityTheory::Classical, GravityTheory::Quantum] {
        meta.push((
            format!("mu_{theory}_j"),
            fmt(chemical_potential(&spectrum.couplings, theory).mu),
        ));
    }
    let mut rows = Vec::new();
    for s in 1..=max_n2 {
        if crate::lattice::shell_multiplicity(s as u64) == 0 {
            continue;
        }
        let k = spectrum.wavenumber(s);
        let cg = spectrum.epsilon_shell(GravityTheory::Classical, s);
        let qg = spectrum.epsilon_shell(GravityTheory::Quantum, s);
        let dev = match (&cg, &qg) {
            (Ok(c), Ok(q)) => Some(100.0 * (q - c).abs() / c.abs()),
            _ => None,
        };
        rows.push(vec![
            s.to_string(),
            fmt(k),
            cg.as_ref().map(|&v| fmt(v)).unwrap_or_default(),
            qg.as_ref().map(|&v| fmt(v)).unwrap_or_default(),
            dev.map(fmt).unwrap_or_default(),
            flag(cg.is_ok()),
            flag(qg.is_ok()),
        ]);
    }
    Ok(Output {
        meta,
        header: vec![
            "n2",
            "k_per_m",
            "epsilon_cg_j",
            "epsilon_qg_j",
            "rel_deviation_percent",
            "stable_cg",
            "stable_qg",
        ],
        rows,
    })
}

fn run_heatcap(
    params: &GasParameters,
    temperatures: &[f64],
    theory: TheoryArg,
    rel_tol: f64,
) -> Result<Output> {
    let spectrum = Spectrum::new(params)?;
    let mut meta = base_meta("heatcap");
    meta.extend(species_meta(&params.species));
    meta.push(("atom_count".into(), fmt(params.atom_count)));
    meta.push(("l_m".into(), fmt(params.box_length)));
    meta.push(("g_em_j_m3".into(), fmt(params.g_em())));
    meta.push(("rel_tol".into(), fmt(rel_tol)));
    let mut rows = Vec::new();
    match theory {
        TheoryArg::Both => {
            for &t in temperatures {
                let d = heatcap_deviation_for(&spectrum, t, rel_tol)?;
                let c = heat_capacity_for(&spectrum, GravityTheory::Classical, t, rel_tol)?;
                let q = heat_capacity_for(&spectrum, GravityTheory::Quantum, t, rel_tol)?;
                rows.push(vec![
                    fmt(t),
                    fmt(d.classical),
                    fmt(d.quantum),
                    fmt(d.rel_deviation_percent),
                    c.shells_used.to_string(),
                    q.shells_used.to_string(),
                    flag(c.converged && q.converged),
                ]);
            }
            Ok(Output {
                meta,
                header: vec![
                    "t_k",
                    "cv_classical_over_kb",
                    "cv_quantum_over_kb",
                    "rel_deviation_percent",
                    "shells_classical",
                    "shells_quantum",
                    "converged",
                ],
                rows,
            })
        }
        TheoryArg::Classical | TheoryArg::Quantum => {
            let th = match theory {
                TheoryArg::Classical => GravityTheory::Classical,
                _ => GravityTheory::Quantum,
            };
            for &t in temperatures {
                let r = heat_capacity_for(&spectrum, th, t, rel_tol)?;
                rows.push(vec![
                    fmt(t),
                    fmt(r.c_v_over_kb),
                    r.shells_used.to_string(),
                    flag(r.converged),
                    th.to_string(),
                ]);
            }
            Ok(Output {
                meta,
                header: vec!["t_k", "cv_over_kb", "shells_used", "converged", "theory"],
                rows,
            })
        }
    }
}

fn run_scan(
    species: &Species,
    g_em_override: Option<f64>,
    grid: &ScanGrid,
    rel_tol: f64,
) -> Result<Output> {
    let mut meta = base_meta("scan");
    meta.extend(species_meta(species));
    meta.push(("g_em_override_j_m3".into(), opt(g_em_override)));
    meta.push(("rel_tol".into(), fmt(rel_tol)));
    meta.push((
        "grid".into(),
        format!(
            "{}x{}x{}",
            grid.atom_counts.len(),
            grid.box_lengths.len(),
            grid.temperatures.len()
        ),
    ));
    let rows = scan(species, g_em_override, grid, rel_tol)
        .into_iter()
        .map(|r| {
            vec![
                fmt(r.atom_count),
                fmt(r.box_length),
                fmt(r.temperature),
                opt(r.cv_classical_over_kb),
                opt(r.cv_quantum_over_kb),
                opt(r.cv_deviation_percent),
                opt(r.energy_deviation_percent),
                r.dilute.map(flag).unwrap_or_default(),
                r.size_nonrelativistic.map(flag).unwrap_or_default(),
                r.velocity_nonrelativistic.map(flag).unwrap_or_default(),
                r.error.unwrap_or_default().replace(',', ";"),
            ]
        })
        .collect();
    Ok(Output {
        meta,
        header: vec![
            "atom_count",
            "l_m",
            "t_k",
            "cv_classical_over_kb",
            "cv_quantum_over_kb",
            "cv_deviation_percent",
            "energy_deviation_percent",
            "dilute",
            "size_nonrelativistic",
            "velocity_nonrelativistic",
            "error",
        ],
        rows,
    })
}

fn run_validate(params: &GasParameters) -> Result<Output> {
    let v = validity_report(params);
    let mut meta = base_meta("validate");
    meta.extend(species_meta(&params.species));
    meta.push(("atom_count".into(), fmt(params.atom_count)));
    meta.push(("l_m".into(), fmt(params.box_length)));
    let mut row = vec![
        fmt(v.diluteness),
        fmt(v.schwarzschild_ratio),
        fmt(v.three_body_half_life),
        fmt(v.estimated_velocity),
    ];
    for check in &v.checks {
        row.push(flag(check.pass));
    }
    Ok(Output {
        meta,
        header: vec![
            "diluteness",
            "schwarzschild_ratio",
            "three_body_half_life_s",
            "estimated_velocity_m_per_s",
            "dilute",
            "size_nonrelativistic",
            "velocity_nonrelativistic",
        ],
        rows: vec![row],
    })
}

fn run_nl_threshold(species: &Species, n_k2: i64, deviation_percent: f64) -> Result<Output> {
    let r = nl_threshold_report(species, n_k2, deviation_percent)?;
    let mut meta = base_meta("nl-threshold");
    meta.extend(species_meta(species));
    Ok(Output {
        meta,
        header: vec![
            "n_k2",
            "deviation_percent",
            "nl_product_m",
            "reported_value_m",
            "consistent_with_reported",
        ],
        rows: vec![vec![
            r.n_k2.to_string(),
            fmt(r.deviation_percent),
            fmt(r.nl_product_m),
            opt(r.reported_value_m),
            r.consistent_with_reported.map(flag).unwrap_or_default(),
        ]],
    })
}

fn run_reconcile(
    species: &Species,
    atom_count: f64,
    l_m: f64,
    t_k: f64,
    cv_target: f64,
    rel_tol: f64,
) -> Result<Output> {
    let r = reconcile_cv_target(species, atom_count, l_m, t_k, cv_target, rel_tol)?;
    let mut meta = base_meta("reconcile-cv");
    meta.extend(species_meta(species));
    meta.push(("atom_count".into(), fmt(atom_count)));
    meta.push(("l_m".into(), fmt(l_m)));
    meta.push(("t_k".into(), fmt(t_k)));
    meta.push(("cv_target_over_kb".into(), fmt(cv_target)));
    Ok(Output {
        meta,
        header: vec![
            "g_em_fitted_j_m3",
            "cv_classical_over_kb",
            "quantum_deviation_percent",
            "iterations",
        ],
        rows: vec![vec![
            fmt(r.g_em_fitted),
            fmt(r.cv_classical_over_kb),
            fmt(r.quantum_deviation_percent),
            r.iterations.to_string(),
        ]],
    })
}

fn run_compare_oracle(
    op: OracleOp,
    params: &GasParameters,
    max_n2: i64,
    t_k: f64,
    grid: usize,
    rel_tol: f64,
) -> Result<Output> {
    let mut meta = base_meta("compare-oracle");
    meta.extend(species_meta(&params.species));
    meta.push(("max_n2".into(), max_n2.to_string()));
    match op {
        OracleOp::Heatcap => {
            let spectrum = Spectrum::new(params)?;
            meta.push(("t_k".into(), fmt(t_k)));
            let mut rows = Vec::new();
            for theory in [GravityTheory::Classical, GravityTheory::Quantum] {
                let shell = heat_capacity_shells_up_to(&spectrum, theory, t_k, max_n2)?;
                let direct = heat_capacity_direct_enumeration(&spectrum, theory, t_k, max_n2)?;
                let rel = (shell - direct).abs() / shell.abs().max(1e-300);
                rows.push(vec![
                    theory.to_string(),
                    fmt(shell),
                    fmt(direct),
                    fmt(rel),
                ]);
            }
            Ok(Output {
                meta,
                header: vec!["theory", "shell_sum_over_kb", "direct_sum_over_kb", "rel_diff"],
                rows,
            })
        }
        OracleOp::Potential => {
            meta.push(("grid".into(), grid.to_string()));
            let m = params.species.mass;
            let l = params.box_length;
            let mut rows = Vec::new();
            let closed = v0_closed_form(m, l);
            let zero3d = gk_oracle_3d(FourierMode::Zero, m, l, grid)?;
            rows.push(vec![
                "0,0,0".into(),
                fmt(closed),
                fmt(zero3d),
                fmt((closed - zero3d).abs() / closed.abs()),
            ]);
            for mode in orbit_representatives(max_n2) {
                let v1 = gk_oracle_1d(&mode, m, l, rel_tol)?;
                let v3 = gk_oracle_3d(FourierMode::Excitation(mode), m, l, grid)?;
                let [a, b, c] = mode.components();
                rows.push(vec![
                    format!("{a},{b},{c}"),
                    fmt(v1),
                    fmt(v3),
                    fmt((v1 - v3).abs() / v3.abs()),
                ]);
            }
            Ok(Output {
                meta,
                header: vec!["mode", "route_a", "route_b", "rel_diff"],
                rows,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// dispatch

fn execute(cli: Cli) -> Result<()> {
    let format = cli.format;
    let out = cli.out.clone();
    let output = match &cli.command {
        Command::Potential {
            species,
            l_m,
            max_n2,
            rel_tol,
        } => run_potential(&species.resolve()?, *l_m, *max_n2, *rel_tol)?,
        Command::Spectrum { gas, max_n2 } => run_spectrum(&gas.resolve()?, *max_n2)?,
        Command::Heatcap {
            gas,
            t_k,
            t_start_k,
            t_stop_k,
            t_points,
            theory,
            rel_tol,
        } => {
            let temperatures = match (t_k, t_start_k) {
                (Some(t), _) => vec![*t],
                (None, Some(start)) => geomspace(
                    *start,
                    t_stop_k.ok_or_else(|| {
                        Error::InvalidParameter("sweep needs --t-stop-k".into())
                    })?,
                    t_points.ok_or_else(|| {
                        Error::InvalidParameter("sweep needs --t-points".into())
                    })?,
                )?,
                (None, None) => {
                    return Err(Error::InvalidParameter(
                        "give --t-k or a sweep (--t-start-k/--t-stop-k/--t-points)".into(),
                    ))
                }
            };
            run_heatcap(&gas.resolve()?, &temperatures, *theory, *rel_tol)?
        }
        Command::Scan {
            config,
            species,
            n_range,
            l_m_range,
            t_k_range,
            g_em_override_j_m3,
            rel_tol,
        } => {
            let cfg: Option<RunConfig> = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        Error::InvalidParameter(format!("cannot read {}: {e}", path.display()))
                    })?;
                    Some(serde_json::from_str(&text).map_err(|e| {
                        Error::InvalidParameter(format!("bad config {}: {e}", path.display()))
                    })?)
                }
                None => None,
            };
            let resolved_species = match &cfg {
                Some(c) => c.species.resolve()?,
                None => species.resolve()?,
            };
            let pick = |flag: &Option<Vec<f64>>,
                        from_cfg: Option<&GeomRange>,
                        what: &str|
             -> Result<Vec<f64>> {
                if let Some(v) = flag {
                    return GeomRange::from_flag(v)?.values();
                }
                if let Some(r) = from_cfg {
                    return r.values();
                }
                Err(Error::InvalidParameter(format!(
                    "scan needs a {what} range (flag or config)"
                )))
            };
            let grid = ScanGrid {
                atom_counts: pick(n_range, cfg.as_ref().and_then(|c| c.n_range.as_ref()), "N")?,
                box_lengths: pick(
                    l_m_range,
                    cfg.as_ref().and_then(|c| c.l_m_range.as_ref()),
                    "L",
                )?,
                temperatures: pick(
                    t_k_range,
                    cfg.as_ref().and_then(|c| c.t_k_range.as_ref()),
                    "T",
                )?,
            };
            let g_override =
                g_em_override_j_m3.or(cfg.as_ref().and_then(|c| c.g_em_override_j_m3));
            let tol = cfg.as_ref().map_or(*rel_tol, |c| c.rel_tol);
            run_scan(&resolved_species, g_override, &grid, tol)?
        }
        Command::Validate { gas } => run_validate(&gas.resolve()?)?,
        Command::NlThreshold {
            species,
            n_k2,
            deviation_percent,
        } => run_nl_threshold(&species.resolve()?, *n_k2, *deviation_percent)?,
        Command::ReconcileCv {
            species,
            atom_count,
            l_m,
            t_k,
            cv_target,
            rel_tol,
        } => run_reconcile(
            &species.resolve()?,
            *atom_count,
            *l_m,
            *t_k,
            *cv_target,
            *rel_tol,
        )?,
        Command::CompareOracle {
            op,
            gas,
            max_n2,
            t_k,
            grid,
            rel_tol,
        } => run_compare_oracle(*op, &gas.resolve()?, *max_n2, *t_k, *grid, *rel_tol)?,
    };
    emit(output, format, &out)
}

fn report_error(e: &Error) -> i32 {
    let code = e.exit_code();
    let obj = serde_json::json!({
        "error": {
            "kind": format!("{e:?}").split(['(', '{', ' ']).next().unwrap_or("Error"),
            "message": e.to_string(),
            "exit_code": code,
        }
    });
    eprintln!("{obj}");
    code
}

/// Parse argv and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap renders help/usage itself
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(cli)),
            Err(e) => Err(Error::InvalidParameter(format!("thread pool: {e}"))),
        },
        None => execute(cli),
    };
    match result {
        Ok(()) => 0,
        Err(e) => report_error(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_round_trips() {
        let cfg = RunConfig {
            species: SpeciesConfig::Named {
                name: "Yb-174".into(),
            },
            n_range: Some(GeomRange {
                start: 1e14,
                stop: 1e16,
                points: 3,
            }),
            l_m_range: Some(GeomRange {
                start: 0.01,
                stop: 0.01,
                points: 1,
            }),
            t_k_range: Some(GeomRange {
                start: 1e-14,
                stop: 1e-13,
                points: 2,
            }),
            g_em_override_j_m3: Some(0.0),
            rel_tol: 1e-9,
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);

        let custom = RunConfig {
            species: SpeciesConfig::Custom {
                name: "X-1".into(),
                mass_u: 1.5,
                a_s_nm: 2.0,
                three_body_rate_m6_per_s: 0.0,
            },
            n_range: None,
            l_m_range: None,
            t_k_range: None,
            g_em_override_j_m3: None,
            rel_tol: 1e-8,
        };
        let text = serde_json::to_string(&custom).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, custom);
    }

    #[test]
    fn scientific_notation_forms_parse() {
        for s in ["1e16", "1.0e16", "1E16"] {
            let v: f64 = s.parse().unwrap();
            assert_eq!(v, 1e16);
        }
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run(["becgrav", "frobnicate"]), 2);
    }

    #[test]
    fn unknown_species_is_usage_error() {
        assert_eq!(
            run([
                "becgrav",
                "nl-threshold",
                "--species",
                "unobtainium",
            ]),
            2
        );
    }
}
