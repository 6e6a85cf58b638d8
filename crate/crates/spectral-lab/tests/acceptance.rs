//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `--nocapture` to see them). Tolerances are pinned here.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectral_lab::measure::{
    ContinuousDensity, DensityFamily, SpectralAtom, SpectralMeasure, SumRuleVerdict, Support,
    DEFAULT_ATOM_TOL, DEFAULT_SUM_RULE_TOL,
};
use spectral_lab::scaling::{self, ScalingGridSpec, SingularityKind};
use spectral_lab::{
    ftscale, kernel, schwinger, ConfinementKind, DipoleProfile, PowerLawSpec, ShellShape,
    TestFunction,
};

fn verdict(criterion: u32, name: &str, started: std::time::Instant, ok: bool, detail: String) {
    let status = if ok { "PASS" } else { "FAIL" };
    let secs = started.elapsed().as_secs_f64();
    println!("ACCEPTANCE {criterion} ({name}): {status} — {detail} [{secs:.2} s]");
    assert!(ok, "criterion {criterion} ({name}) failed: {detail}");
}

fn flat_unbounded() -> SpectralMeasure {
    SpectralMeasure::from_continuum(
        ContinuousDensity::new(
            DensityFamily::Constant { level: 1.0 },
            Support::from_lower(0.0),
        )
        .unwrap(),
    )
}

#[test]
fn criterion_1_free_field_scaling_degree() {
    let started = std::time::Instant::now();
    let m = SpectralMeasure::free_field(1.0);
    let f = TestFunction::centered(1.0).unwrap();
    let fit = scaling::estimate_scaling_degree(&m, &f, &ScalingGridSpec::default()).unwrap();
    verdict(
        1,
        "free-field scaling degree",
        started,
        (fit.degree - 2.0).abs() <= 0.05,
        format!(
            "degree {:.6} (stderr {:.2e}) within 2.00 +/- 0.05",
            fit.degree, fit.stderr
        ),
    );
}

#[test]
fn criterion_2_degree_bound_over_random_finite_measures() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_2026);
    let f = TestFunction::centered(1.0).unwrap();
    let mut worst_excess = f64::NEG_INFINITY;
    for trial in 0..50 {
        let n_atoms = rng.random_range(1..=3);
        let mut atoms = Vec::with_capacity(n_atoms);
        for _ in 0..n_atoms {
            let mass_sq = rng.random_range(0.3..8.0);
            let weight = rng.random_range(0.1..2.0);
            atoms.push(SpectralAtom::new(mass_sq, weight));
        }
        atoms.sort_by(|a, b| a.mass_sq.total_cmp(&b.mass_sq));
        atoms.dedup_by(|a, b| (a.mass_sq - b.mass_sq).abs() < 1e-9);
        let continuum = if rng.random_bool(0.5) {
            let lo = rng.random_range(0.5..4.0);
            let hi = lo + rng.random_range(0.5..4.0);
            let mass = rng.random_range(0.1..2.0);
            ContinuousDensity::new(DensityFamily::Bump { mass }, Support::bounded(lo, hi)).unwrap()
        } else {
            ContinuousDensity::zero()
        };
        let measure = SpectralMeasure::new(atoms, continuum).unwrap();
        assert!(measure.total_mass().unwrap().is_finite());

        let fit = scaling::estimate_scaling_degree(&measure, &f, &ScalingGridSpec::default())
            .unwrap_or_else(|e| panic!("trial {trial}: degree estimation failed: {e}"));
        let excess = fit.degree - 2.0 - 3.0 * fit.stderr;
        worst_excess = worst_excess.max(excess);
        assert!(
            excess <= 0.0,
            "trial {trial}: degree {} > 2 + 3 * {}",
            fit.degree,
            fit.stderr
        );
    }
    verdict(
        2,
        "degree bound over 50 random finite measures",
        started,
        worst_excess <= 0.0,
        format!("max(degree - 2 - 3 stderr) = {worst_excess:.3e} <= 0"),
    );
}

#[test]
fn criterion_3_singularity_hypothesis_witness() {
    let started = std::time::Instant::now();
    let m = flat_unbounded();
    let f = TestFunction::centered(1.0).unwrap();
    let fit = scaling::estimate_scaling_degree(&m, &f, &ScalingGridSpec::default()).unwrap();
    let v = scaling::classify(&m, &f).unwrap();
    let ok = (fit.degree - 4.0).abs() <= 0.1
        && v.kind == SingularityKind::SatisfiesSingularityHypothesis
        && !v.sigma_mass_finite;
    verdict(
        3,
        "flat-density singularity witness",
        started,
        ok,
        format!(
            "degree {:.6} within 4.0 +/- 0.1, verdict {:?}, sigma mass finite = {}",
            fit.degree, v.kind, v.sigma_mass_finite
        ),
    );
}

#[test]
fn criterion_4_propagator_cross_check() {
    let started = std::time::Instant::now();
    let grid = [0.1, 0.31622776601683794, 1.0, 3.1622776601683795, 10.0];
    let mut worst: f64 = 0.0;
    for &mass in &grid {
        for &r in &grid {
            let got = kernel::free_two_point_spacelike(mass, r).unwrap().value;
            let want = common::propagator_direct(mass, r);
            let rel = ((got - want) / want).abs();
            worst = worst.max(rel);
            assert!(
                rel <= 1e-8,
                "mass {mass}, r {r}: impl {got}, direct {want}, rel {rel:.3e}"
            );
        }
    }
    verdict(
        4,
        "propagator vs direct quadrature on 5x5 grid",
        started,
        worst <= 1e-8,
        format!("max relative deviation {worst:.3e} <= 1e-8"),
    );
}

#[test]
fn criterion_5_schwinger_energy_closed_form() {
    let started = std::time::Instant::now();
    let couplings = [0.0, 1.0, 2.0];
    let plateaus = [1.0, 3.1622776601683795, 10.0, 31.622776601683793, 100.0];
    let ramps = [0.1, 1.0, 5.0];
    let mut worst: f64 = 0.0;
    for &e in &couplings {
        for &r in &plateaus {
            for &eps in &ramps {
                let profile = DipoleProfile::new(r, eps).unwrap();
                let got = schwinger::dipole_energy(e, &profile).unwrap().energy;
                let want = common::linear_dipole_energy(e, r, eps);
                let rel = ((got - want) / want).abs();
                worst = worst.max(rel);
                assert!(
                    rel <= 1e-8,
                    "e {e}, R {r}, eps {eps}: {got} vs {want}, rel {rel:.3e}"
                );
            }
        }
    }
    verdict(
        5,
        "dipole energy vs closed form on 3x5x3 grid",
        started,
        worst <= 1e-8,
        format!("max relative deviation {worst:.3e} <= 1e-8"),
    );
}

#[test]
fn criterion_6_confinement_slope_and_verdicts() {
    let started = std::time::Instant::now();
    let r_grid: Vec<f64> = (1..=10).map(|i| 10.0 * i as f64).collect();
    let coupled = schwinger::confinement_verdict(1.0, 1.0, &r_grid).unwrap();
    let free = schwinger::confinement_verdict(0.0, 1.0, &r_grid).unwrap();
    let ok = coupled.kind == ConfinementKind::Confined
        && (coupled.growth_slope - 0.5).abs() <= 0.005
        && free.kind == ConfinementKind::FiniteEnergy;
    verdict(
        6,
        "confinement verdicts",
        started,
        ok,
        format!(
            "e=1: {:?} slope {:.6} within 0.500 +/- 0.005; e=0: {:?}",
            coupled.kind, coupled.growth_slope, free.kind
        ),
    );
}

#[test]
fn criterion_7_fourier_scaling_exponents() {
    let started = std::time::Instant::now();
    let cases: [(f64, u32, f64); 3] = [(-2.0, 1, 1.0), (-2.0, 3, -1.0), (-4.0, 3, 1.0)];
    let radii = ftscale::log_radii(1.0, 16.0, 9);
    let mut details = Vec::new();
    let mut ok = true;
    for (lam, dim, want) in cases {
        let spec = PowerLawSpec::new(lam, dim).unwrap();
        let fit = ftscale::fit_position_exponent(
            &spec,
            &radii,
            ftscale::DEFAULT_REL_WIDTH,
            ShellShape::Gaussian,
        )
        .unwrap();
        let good = (fit.fitted_exponent - want).abs() <= 0.05;
        ok &= good;
        details.push(format!(
            "(lambda={lam}, s={dim}): {:.4} vs {want} {}",
            fit.fitted_exponent,
            if good { "ok" } else { "BAD" }
        ));
    }
    verdict(
        7,
        "Fourier scaling exponents",
        started,
        ok,
        details.join("; ") + " (tol 0.05)",
    );
}

#[test]
fn criterion_8_etcr_sum_rule() {
    let started = std::time::Instant::now();
    let free = SpectralMeasure::free_field(1.0);
    let free_verdict = free.check_etcr_sum_rule(DEFAULT_SUM_RULE_TOL).unwrap();
    let z = free.z_at(1.0, DEFAULT_ATOM_TOL).unwrap();
    let flat_verdict = flat_unbounded()
        .check_etcr_sum_rule(DEFAULT_SUM_RULE_TOL)
        .unwrap();
    let ok = free_verdict == SumRuleVerdict::Holds
        && (z - 1.0).abs() <= DEFAULT_SUM_RULE_TOL
        && z <= 1.0 + DEFAULT_SUM_RULE_TOL
        && flat_verdict == SumRuleVerdict::Divergent;
    verdict(
        8,
        "ETCR sum rule",
        started,
        ok,
        format!("free field: {free_verdict:?} with Z = {z} <= 1; flat density: {flat_verdict:?}"),
    );
}

#[test]
fn criterion_9_decomposition_and_renormalization() {
    let started = std::time::Instant::now();
    let atoms = vec![SpectralAtom::new(1.0, 0.5)];
    let continuum = ContinuousDensity::new(
        DensityFamily::Constant { level: 0.5 },
        Support::bounded(2.0, 3.0),
    )
    .unwrap();
    let m = SpectralMeasure::new(atoms.clone(), continuum.clone()).unwrap();

    // compose -> decompose roundtrip: exact atoms, pointwise densities
    let (got_atoms, got_continuum) = m.decompose();
    let atoms_exact = got_atoms == atoms.as_slice();
    let mut density_dev: f64 = 0.0;
    for i in 0..=200 {
        let m_sq = 5.0 * i as f64 / 200.0;
        density_dev = density_dev.max((got_continuum.eval(m_sq) - continuum.eval(m_sq)).abs());
    }

    // renormalized total mass = 1/Z
    let renorm = m.renormalize().unwrap();
    let total = renorm.total_mass().unwrap();
    let renorm_dev = (total.value - 2.0).abs();

    let ok = atoms_exact && density_dev <= 1e-12 && renorm_dev <= 1e-10;
    verdict(
        9,
        "decomposition roundtrip and renormalization",
        started,
        ok,
        format!(
            "atoms exact: {atoms_exact}; max density deviation {density_dev:.2e} <= 1e-12; \
             |renormalized total - 1/Z| = {renorm_dev:.2e} <= 1e-10"
        ),
    );
}
