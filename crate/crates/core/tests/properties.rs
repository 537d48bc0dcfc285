//! Property suite: the per-module invariants, runnable as one target.
//! `cargo test -p becgrav --test properties`

mod common;

use becgrav::constants::{lookup_species, GasParameters, CODATA_2018};
use becgrav::cube::{gk_approx_shell, v0_coefficient, GravityCoupling, ModeIndex};
use becgrav::experiment::{energy_deviation_for, heatcap_deviation_for, nl_threshold};
use becgrav::numerics::erf::re_erf;
use becgrav::spectrum::{build_couplings_gravity_zeroed, CouplingSet, GravityTheory, Spectrum};
use becgrav::thermo::{
    heat_capacity_direct_enumeration, heat_capacity_for, heat_capacity_shells_up_to, mode_term_x,
};
use common::*;
use proptest::prelude::*;

// ---------------------------------------------------------------------------
// constants-units

proptest! {
    #[test]
    fn g_em_linear_in_scattering_length_inverse_in_mass(
        a_s_nm in 0.1f64..100.0,
        mass_u in 1.0f64..300.0,
        factor in 1.5f64..4.0,
    ) {
        let spec = |a: f64, m: f64| {
            becgrav::Species::from_table_units("X", m, a, 0.0).unwrap()
        };
        let g = |s: becgrav::Species| {
            GasParameters::new(s, 1e10, 0.01, None).unwrap().g_em()
        };
        let base = g(spec(a_s_nm, mass_u));
        let double_a = g(spec(a_s_nm * factor, mass_u));
        prop_assert!((double_a / base - factor).abs() < 1e-12);
        let double_m = g(spec(a_s_nm, mass_u * factor));
        prop_assert!((double_m / base - 1.0 / factor).abs() < 1e-12);
    }
}

// ---------------------------------------------------------------------------
// cube-potential

#[test]
fn v0_coefficient_closed_form_identity() {
    // (pi/2)((12/pi) asinh(1/sqrt 2) - 1), 16-digit reference
    assert!((v0_coefficient() - 2.3800773639795535).abs() < 1e-12 * 2.38);
}

proptest! {
    #[test]
    fn gk_approx_parity_and_permutation(
        a in -6i32..=6,
        b in -6i32..=6,
        c in -6i32..=6,
    ) {
        prop_assume!(a != 0 || b != 0 || c != 0);
        let yb = lookup_species("Yb-174").unwrap();
        let base = gk_approx_shell(
            ModeIndex::new(a, b, c).unwrap().n2(),
            yb.mass,
            0.01,
        );
        for perm in [[a, b, c], [b, c, a], [c, a, b], [-a, b, -c], [b, -a, c]] {
            let m = ModeIndex::new(perm[0], perm[1], perm[2]).unwrap();
            let v = becgrav::gk_approx(&m, yb.mass, 0.01);
            prop_assert_eq!(v.to_bits(), base.to_bits());
        }
    }
}

#[test]
fn gk_approx_magnitude_strictly_decreasing_in_shell() {
    let yb = lookup_species("Yb-174").unwrap();
    let mut last = f64::INFINITY;
    for s in 1..=200i64 {
        let v = gk_approx_shell(s, yb.mass, 0.01).abs();
        assert!(v < last, "not strictly decreasing at s={s}");
        last = v;
    }
}

#[test]
fn oracle_and_approx_negative_on_all_shells() {
    let fixture = load_gk_fixture();
    for row in &fixture.rows {
        assert!(row.g_approx < 0.0, "{:?}", row.n);
        assert!(row.g_oracle_1d < 0.0, "{:?}", row.n);
    }
}

#[test]
fn approximation_error_improves_along_the_diagonal_family() {
    // measured structure of the committed fixture: for orbits with all
    // components nonzero the isotropic stand-in converges quickly; the
    // axis family (n,0,0) does not (17-48%), which is why the shell-level
    // 5% bound fails (see the acceptance suite)
    let fixture = load_gk_fixture();
    let err_of = |n: [i32; 3]| {
        fixture
            .rows
            .iter()
            .find(|r| r.n == n)
            .unwrap_or_else(|| panic!("{n:?} in fixture"))
            .rel_err
    };
    let diag = [err_of([1, 1, 1]), err_of([2, 2, 2]), err_of([3, 3, 3])];
    assert!(diag[0] > diag[1] && diag[1] > diag[2], "{diag:?}");
    assert!(diag[0] < 0.05, "all-nonzero family stays below 5%: {diag:?}");
    // axis modes measured far outside 5%
    assert!(err_of([1, 0, 0]) > 0.15);
    assert!(err_of([2, 0, 0]) > 0.4);
}

#[test]
fn coupling_magnitude_bound() {
    // |g_gk| < |g_g0| for every nonzero mode
    let yb = lookup_species("Yb-174").unwrap();
    let c = GravityCoupling::from_mass_box(yb.mass, 0.01);
    for s in 1..=1000 {
        assert!(c.g_gk_shell(s).abs() < c.g_g0.abs());
    }
}

// ---------------------------------------------------------------------------
// spectrum

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn theory_reduction_bitwise(
        log_n in 10.0f64..16.0,
        log_l in -2.5f64..-1.5,
        log_g in -60.0f64..-50.0,
        s in 1i64..400,
    ) {
        let params = yb_params(10f64.powf(log_n), 10f64.powf(log_l), Some(10f64.powf(log_g)));
        let zeroed = Spectrum::with_couplings(
            &params,
            build_couplings_gravity_zeroed(&params).unwrap(),
        );
        let eq = zeroed.epsilon_shell(GravityTheory::Quantum, s).unwrap();
        let ec = zeroed.epsilon_shell(GravityTheory::Classical, s).unwrap();
        prop_assert_eq!(eq.to_bits(), ec.to_bits());
    }

    #[test]
    fn dispersion_monotone_in_shell(
        log_n in 10.0f64..16.0,
        g_choice in 0usize..3,
    ) {
        let g = [None, Some(0.0), Some(1e-55)][g_choice];
        let params = yb_params(10f64.powf(log_n), 0.01, g);
        let spectrum = Spectrum::new(&params).unwrap();
        for theory in [GravityTheory::Classical, GravityTheory::Quantum] {
            let e1 = spectrum.epsilon_shell(theory, 1).unwrap();
            let e2 = spectrum.epsilon_shell(theory, 2).unwrap();
            let e3 = spectrum.epsilon_shell(theory, 3).unwrap();
            prop_assert!(e1 < e2 && e2 < e3);
        }
    }
}

#[test]
fn gapless_trend_phonon_regime() {
    // with the contact term dominating, eps/k is nearly flat over the
    // lowest shells and eps falls toward zero with k
    let params = yb_params(1e16, 0.01, None);
    let s = Spectrum::new(&params).unwrap();
    let ratios: Vec<f64> = [1i64, 2, 3, 4]
        .iter()
        .map(|&n2| {
            s.epsilon_shell(GravityTheory::Classical, n2).unwrap() / s.wavenumber(n2)
        })
        .collect();
    for r in &ratios[1..] {
        assert!((r / ratios[0] - 1.0).abs() < 1e-3, "{ratios:?}");
    }
}

#[test]
fn gravity_dominated_radicand_never_negative() {
    for log_n in [12.0, 14.0, 16.0, 18.0] {
        let params = yb_params(10f64.powf(log_n), 0.01, Some(0.0));
        let s = Spectrum::new(&params).unwrap();
        for n2 in 1..=100i64 {
            assert!(
                s.epsilon_shell(GravityTheory::Quantum, n2).is_ok(),
                "N=1e{log_n}, n2={n2}"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// thermo

#[test]
fn heat_capacity_nonnegative_and_vanishing_with_temperature() {
    let params = yb_params(1e16, 0.01, None);
    let t0 = 2e-11;
    let mut last = f64::INFINITY;
    for t in [t0, t0 / 2.0, t0 / 4.0] {
        let r = heat_capacity_for(
            &Spectrum::new(&params).unwrap(),
            GravityTheory::Quantum,
            t,
            1e-9,
        )
        .unwrap();
        assert!(r.c_v >= 0.0);
        assert!(r.c_v < last);
        last = r.c_v;
    }
}

#[test]
fn mode_term_crossover_continuity() {
    let x = 1e-4f64;
    let em = (-x).exp();
    let exact = x * x * em / ((1.0 - em) * (1.0 - em));
    let series = 1.0 - x * x / 12.0;
    assert!((series - exact).abs() < 1e-12);
    assert!((mode_term_x(x.next_down()) - mode_term_x(x.next_up())).abs() < 1e-12);
}

#[test]
fn shell_sum_matches_enumeration_random_draws() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..3 {
        let params = yb_params(
            10f64.powf(rng.random_range(12.0..16.0)),
            10f64.powf(rng.random_range(-2.3..-1.7)),
            None,
        );
        let s = Spectrum::new(&params).unwrap();
        let e1 = s.epsilon_shell(GravityTheory::Classical, 1).unwrap();
        let t = e1 / CODATA_2018.k_b * rng.random_range(0.2..5.0);
        let a = heat_capacity_shells_up_to(&s, GravityTheory::Classical, t, 100).unwrap();
        let b = heat_capacity_direct_enumeration(&s, GravityTheory::Classical, t, 100).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300));
    }
}

#[test]
fn heat_capacity_depends_only_on_mode_energies() {
    // halving the density while doubling the contact coupling leaves every
    // classical epsilon bit-identical, and therefore c_V too
    let yb = lookup_species("Yb-174").unwrap();
    let g = 2.5e-55;
    let p1 = GasParameters::new(yb.clone(), 1e16, 0.01, Some(g)).unwrap();
    let p2 = GasParameters::new(yb, 0.5e16, 0.01, Some(2.0 * g)).unwrap();
    let s1 = Spectrum::new(&p1).unwrap();
    let s2 = Spectrum::new(&p2).unwrap();
    let t = 1e-13;
    for n2 in [1i64, 2, 3, 5, 10] {
        let e1 = s1.epsilon_shell(GravityTheory::Classical, n2).unwrap();
        let e2 = s2.epsilon_shell(GravityTheory::Classical, n2).unwrap();
        assert_eq!(e1.to_bits(), e2.to_bits());
    }
    let c1 = heat_capacity_for(&s1, GravityTheory::Classical, t, 1e-9).unwrap();
    let c2 = heat_capacity_for(&s2, GravityTheory::Classical, t, 1e-9).unwrap();
    assert_eq!(c1.c_v.to_bits(), c2.c_v.to_bits());
}

#[test]
fn quantum_classical_gap_grows_with_atom_number() {
    let mut last = -1.0;
    for n in [1e14, 1e15, 1e16] {
        let params = yb_params(n, 0.01, Some(0.0));
        let d = heatcap_deviation_for(&Spectrum::new(&params).unwrap(), 1e-14, 1e-9).unwrap();
        assert!(
            d.rel_deviation_percent > last,
            "deviation not growing at N={n:e}"
        );
        last = d.rel_deviation_percent;
    }
    assert!(last > 0.0);
}

// ---------------------------------------------------------------------------
// experiment

#[test]
fn deviations_vanish_without_gravity() {
    let params = yb_params(1e16, 0.01, None);
    let s = Spectrum::with_couplings(&params, build_couplings_gravity_zeroed(&params).unwrap());
    let mode = ModeIndex::new(1, 0, 0).unwrap();
    assert_eq!(
        energy_deviation_for(&s, &mode).unwrap().rel_deviation_percent,
        0.0
    );
    assert_eq!(
        heatcap_deviation_for(&s, 2e-11, 1e-9)
            .unwrap()
            .rel_deviation_percent,
        0.0
    );
}

proptest! {
    #[test]
    fn nl_threshold_scalings(
        n_k2 in 1i64..50,
        dev in 0.01f64..10.0,
        mass_factor in 1.1f64..5.0,
    ) {
        let yb = lookup_species("Yb-174").unwrap();
        let base = nl_threshold(&yb, 1, 0.1).unwrap();
        let v = nl_threshold(&yb, n_k2, dev).unwrap();
        let expect = base * n_k2 as f64 * dev / 0.1;
        prop_assert!((v / expect - 1.0).abs() < 1e-12);
        let mut heavy = yb.clone();
        heavy.mass *= mass_factor;
        let vh = nl_threshold(&heavy, n_k2, dev).unwrap();
        prop_assert!((vh / v - mass_factor.powi(-3)).abs() < 1e-9);
    }

    #[test]
    fn half_life_inverse_in_rate_and_density_squared(
        rate_factor in 1.1f64..10.0,
        n_factor in 1.1f64..4.0,
    ) {
        let p0 = yb_params(1e16, 0.01, None);
        let v0 = becgrav::experiment::validity_report(&p0).three_body_half_life;
        let mut fast = p0.species.clone();
        fast.three_body_rate *= rate_factor;
        let p1 = GasParameters::new(fast, 1e16, 0.01, None).unwrap();
        let v1 = becgrav::experiment::validity_report(&p1).three_body_half_life;
        prop_assert!((v1 / v0 - 1.0 / rate_factor).abs() < 1e-12);
        let p2 = yb_params(1e16 * n_factor, 0.01, None);
        let v2 = becgrav::experiment::validity_report(&p2).three_body_half_life;
        prop_assert!((v2 / v0 - n_factor.powi(-2)).abs() < 1e-9);
    }
}

#[test]
fn threshold_deviation_self_consistency() {
    // at N L = threshold (contact off, gravity-dominated), the lowest-mode
    // deviation is within a factor 3 of the requested level
    let yb = lookup_species("Yb-174").unwrap();
    for request in [0.05, 0.1, 0.3] {
        let nl = nl_threshold(&yb, 1, request).unwrap();
        let l = 0.01;
        let params = GasParameters::new(yb.clone(), nl / l, l, Some(0.0)).unwrap();
        let d = energy_deviation_for(
            &Spectrum::new(&params).unwrap(),
            &ModeIndex::new(1, 0, 0).unwrap(),
        )
        .unwrap();
        let ratio = d.rel_deviation_percent / request;
        assert!(
            (1.0 / 3.0..=3.0).contains(&ratio),
            "request {request}%: got {}%",
            d.rel_deviation_percent
        );
    }
}

// ---------------------------------------------------------------------------
// numerics

proptest! {
    #[test]
    fn re_erf_symmetries(x in 0.01f64..10.0, y in 0.0f64..8.0) {
        let v = re_erf(x, y).unwrap();
        prop_assert_eq!(re_erf(-x, y).unwrap(), -v);
        prop_assert_eq!(re_erf(x, -y).unwrap(), v);
        prop_assert!(v.is_finite());
    }
}

#[test]
fn synthetic_coupling_regime_guard() {
    // exact tie is rejected however the set is built
    let grav = GravityCoupling {
        g_g0: -3.0,
        gk_prefactor: 1.0,
    };
    assert!(CouplingSet::from_parts(3.0, grav, 1.0).is_err());
    assert!(CouplingSet::from_parts(3.0000001, grav, 1.0).is_ok());
}
