//! End-to-end solver and estimator behavior on the reference fixtures: the
//! subcritical line scan stays at zero, converged energies are insensitive
//! to doubling the truncation, and the tadpole quotient estimate approaches
//! the half-line constant through the spread family.

use nlsgraph::fixtures;
use nlsgraph::gn::{maximize_quotient, GnConfig};
use nlsgraph::grid::{Discretization, GridSpec};
use nlsgraph::reference;
use nlsgraph::solver::{default_inits, energy_scan, minimize_at_mass, SolveStatus, SolverConfig};

#[test]
fn line_scan_below_critical_mass_is_flat_zero() {
    let disc = Discretization::new(&fixtures::line(), GridSpec::new(2e-2, 40.0)).unwrap();
    let cfg = SolverConfig {
        max_iters: 6000,
        inits_cap: 8,
        ..SolverConfig::default()
    };
    let masses = [1.0, 1.5, 2.0, 2.5];
    let scan = energy_scan(&disc, &masses, &cfg).unwrap();
    assert!(scan.budget <= 1e-3 + 1e-12);
    for p in &scan.points {
        assert_eq!(p.status, SolveStatus::Converged, "mu = {}", p.mass);
        assert!(
            p.energy.abs() <= scan.budget,
            "E({}) = {:+.3e} should sit at zero within {:.1e}",
            p.mass,
            p.energy,
            scan.budget
        );
    }
    assert_eq!(scan.bracket, None);
    assert_eq!(scan.unbounded_onset, None);
}

#[test]
fn converged_energy_insensitive_to_truncation_doubling() {
    let g = fixtures::tadpole(2.0 * std::f64::consts::PI);
    let cfg = SolverConfig::default();
    let mu = 2.0;
    let mut energies = Vec::new();
    for trunc in [60.0, 120.0] {
        let disc = Discretization::new(&g, GridSpec::new(2e-2, trunc)).unwrap();
        let inits = default_inits(&disc, mu, &cfg);
        let r = minimize_at_mass(&disc, mu, &cfg, &inits).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        energies.push(r.energy.total);
    }
    let drift = (energies[0] - energies[1]).abs();
    assert!(drift < 1e-6, "truncation drift {drift:.2e} (E = {energies:?})");
}

#[test]
fn tadpole_quotient_estimate_reaches_half_line_constant() {
    // the maximizing family spreads along the half-line, so the bound is
    // limited by the truncation; at L = 200 it must come within 5e-2
    let g = fixtures::tadpole(2.0 * std::f64::consts::PI);
    let disc = Discretization::new(&g, GridSpec::new(2e-2, 200.0)).unwrap();
    let cfg = GnConfig {
        max_iters: 400,
        ..GnConfig::default()
    };
    let est = maximize_quotient(&disc, &cfg).unwrap();
    let c = reference::constants();
    assert!(
        (est.k_lower - c.k_r_plus).abs() <= 5e-2,
        "K estimate {:.4} vs K_R+ {:.4}",
        est.k_lower,
        c.k_r_plus
    );
    // never above the true constant: discrete functions are admissible
    assert!(est.k_lower <= c.k_r_plus + 1e-9);
    assert!(
        est.diagnostics.winning_init.contains("spread") || est.diagnostics.spreading_eps.is_some(),
        "spread family should win, got {}",
        est.diagnostics.winning_init
    );
    assert_eq!(est.exact, Some(c.mu_r_plus));
}

#[test]
fn tip_fixture_blows_up_between_the_critical_masses() {
    // between mu_R+ and mu_R a graph with a tip has no finite infimum
    let g = fixtures::meshed_tip();
    let disc = Discretization::new(&g, GridSpec::new(5e-2, 30.0)).unwrap();
    let cfg = SolverConfig::default();
    let c = reference::constants();
    let mu = 0.5 * (c.mu_r_plus + c.mu_r);
    let inits = default_inits(&disc, mu, &cfg);
    let r = minimize_at_mass(&disc, mu, &cfg, &inits).unwrap();
    assert_eq!(r.status, SolveStatus::UnboundedBelowDetected);
    let probe = r.probe.expect("tip probe");
    assert!(probe.anchor.contains("tip"));
}
