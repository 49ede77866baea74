use magspec::corpus::{corpus_entry, load_corpus};
use magspec::disk_spectrum::disk_eigenvalues;
use magspec::fem::{solve_extrapolated, solve_with_vectors, SolverConfig};
use magspec::functionals::BoundInputs;
use magspec::geometry::RadiusProfile;
use magspec::perturbation::{corollary_bound, PerturbationProfile};
use magspec::spectrum::BoundaryCondition;
use magspec::transplant::sum_bound_chain;

#[test]
fn extrapolated_disk_matches_analytic() {
    for beta in [0.0, 4.0, 12.0] {
        let cfg = SolverConfig::new(BoundaryCondition::Dirichlet, beta, 6).with_mesh(48, 96);
        let ex = solve_extrapolated(&RadiusProfile::disk(), &cfg).unwrap();
        let exact = disk_eigenvalues(beta, 6).unwrap();
        for (j, (fem, disk)) in ex.spectrum.eigenvalues.iter().zip(&exact.eigenvalues).enumerate() {
            let rel = (fem - disk).abs() / disk;
            assert!(rel < 2e-4, "beta {beta} j {j}: {fem} vs {disk}");
            assert!((fem - disk).abs() <= ex.error_bars[j], "beta {beta} j {j}: error bar too tight");
        }
    }
}

#[test]
fn sum_bound_chain_holds_on_corpus_shapes() {
    let cfg = SolverConfig::new(BoundaryCondition::Dirichlet, 5.0, 5).with_mesh(32, 64);
    for name in ["ellipse_0.3", "ellipse_0.6", "flower_5", "oscillatory_8"] {
        let e = corpus_entry(name).unwrap();
        let chain = sum_bound_chain(&e.profile, 5.0, 5, &cfg).unwrap();
        assert!(chain.holds(), "{name}: {chain:?}");
        assert!(chain.lhs <= chain.rhs + chain.error_bar, "{name}");
        assert!(chain.alphas.iter().all(|a| (0.0..=1.0).contains(a)));
    }
}

#[test]
fn corollary_sandwich_on_harmonic_entries() {
    let cfg = SolverConfig::new(BoundaryCondition::Dirichlet, 5.0, 1).with_mesh(32, 64);
    for e in load_corpus().into_iter().filter(|e| e.name.starts_with("harmonic_")) {
        let eps: f64 = e.name.rsplit('_').next().unwrap().parse().unwrap();
        let p = PerturbationProfile::from_harmonics(e.profile.harmonics(), eps).unwrap();
        let bound = corollary_bound(&p, eps).unwrap();
        assert!((bound.upper - e.reference.g).abs() < 1e-9, "{}", e.name);
        assert!(bound.upper >= 1.0 && bound.surrogate >= 1.0);
        assert!(
            (bound.upper - bound.surrogate).abs() <= 0.05 * (bound.surrogate - 1.0),
            "{}: G {} surrogate {}",
            e.name,
            bound.upper,
            bound.surrogate
        );
        let s = BoundInputs::compute(&e.profile, 5.0, BoundaryCondition::Dirichlet, 1, &cfg)
            .unwrap()
            .sandwich();
        assert!(s.lower_holds && s.upper_holds, "{}: {s:?}", e.name);
    }
}

#[test]
fn neumann_ground_mode_climbs_with_field() {
    let disk = RadiusProfile::disk();
    let mut last = 0;
    for beta in [2.0, 8.0, 18.0, 28.0] {
        let cfg = SolverConfig::new(BoundaryCondition::Neumann, beta, 1).with_mesh(32, 64);
        let m = solve_with_vectors(&disk, &cfg).unwrap().dominant_angular_mode(0);
        assert!(m >= last, "beta {beta}: mode {m} after {last}");
        last = m;
    }
    assert!(last >= 2, "ground state still at mode {last}");
}

#[test]
fn perturbation_coefficients_are_finite_and_c_positive() {
    use magspec::perturbation::{coefficient_c, q_coefficient};
    for beta in [0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
        assert!(coefficient_c(beta).unwrap() > 0.0, "beta {beta}");
        for n in 1..=60 {
            assert!(q_coefficient(beta, n).unwrap().is_finite(), "beta {beta} n {n}");
        }
    }
}

#[test]
fn disk_ground_state_is_radial_over_field_range() {
    for beta in [0.0, 1.0, 5.0, 10.0, 20.0, 30.0, 40.0] {
        assert!(magspec::disk_spectrum::ground_state_is_radial(beta).unwrap(), "beta {beta}");
    }
}
