//! The acceptance suite: every shipped tolerance pinned in one place, each
//! criterion returning a pass/fail outcome with its measured numbers. Run
//! through the `selftest` CLI subcommand or the `acceptance` test target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fixtures;
use crate::function::{soliton_on, GraphFunction};
use crate::gn::{self, GnConfig};
use crate::graph::{EdgeEnds, EdgeId, MetricGraph, TopologyTag};
use crate::grid::{Discretization, GridSpec};
use crate::reference::{self, soliton};
use crate::solver::{
    concentration_probe, default_inits, energy_scan, minimize_at_mass, SolveStatus, SolverConfig,
};
use crate::transforms::{
    bridge_double, bridge_doubling_bound_check, decreasing_rearrangement, modified_gn_check,
    symmetric_rearrangement, tail_regularize,
};

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: usize,
    pub label: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
}

impl CriterionOutcome {
    fn new(id: usize, label: &'static str) -> Self {
        CriterionOutcome {
            id,
            label,
            passed: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        if !ok {
            self.passed = false;
        }
        self.details
            .push(format!("{} {detail}", if ok { "ok  " } else { "FAIL" }));
    }

    pub fn summary_line(&self) -> String {
        format!(
            "criterion {:2} [{}] {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.label
        )
    }
}

fn line_soliton(lambda: f64, h: f64, trunc: f64) -> GraphFunction {
    let disc = Discretization::new(&fixtures::line(), GridSpec::new(h, trunc)).unwrap();
    soliton_on(&disc, EdgeId(0), 0.0, lambda)
}

/// 1. Quadrature mass of the discretized soliton matches pi sqrt(3)/2.
pub fn criterion_1() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(1, "soliton mass");
    let u = line_soliton(1.0, 1e-3, 40.0);
    let mass = u.mass();
    let err = (mass - reference::mu_r()).abs();
    out.check(
        err <= 1e-6,
        format!("|mass - mu_R| = {err:.3e} <= 1e-6 (mass {mass:.9})"),
    );
    out
}

/// 2. Discrete soliton energy vanishes; the defect scales with the square of
/// the concentration scale.
pub fn criterion_2() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(2, "soliton zero energy");
    let e1 = line_soliton(1.0, 1e-3, 40.0).energy().total.abs();
    out.check(e1 <= 1e-6, format!("|E(phi_1)| = {e1:.3e} <= 1e-6"));
    let e2 = line_soliton(2.0, 1e-3, 40.0).energy().total.abs();
    out.check(e2 <= 4e-6, format!("|E(phi_2)| = {e2:.3e} <= 4e-6"));
    out
}

/// 3. GN quotients of the discretized soliton and half-soliton.
pub fn criterion_3() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(3, "GN constants");
    let c = reference::constants();
    let q = line_soliton(1.0, 1e-3, 40.0).gn_quotient().unwrap();
    out.check(
        (q - c.k_r).abs() <= 1e-4,
        format!("line quotient {q:.7} vs 4/pi^2 {:.7} (tol 1e-4)", c.k_r),
    );
    let disc = Discretization::new(&fixtures::half_line(), GridSpec::new(1e-3, 40.0)).unwrap();
    let qh = soliton_on(&disc, EdgeId(0), 0.0, 1.0).gn_quotient().unwrap();
    out.check(
        (qh - c.k_r_plus).abs() <= 1e-3,
        format!(
            "half-line quotient {qh:.7} vs 16/pi^2 {:.7} (tol 1e-3)",
            c.k_r_plus
        ),
    );
    out
}

/// 4. Directional derivatives of the energy match central differences on 100
/// random functions per fixture.
pub fn criterion_4() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(4, "gradient correctness");
    let graphs = [
        ("line", fixtures::line()),
        ("half_line", fixtures::half_line()),
        ("tadpole", fixtures::tadpole(2.0 * std::f64::consts::PI)),
        ("signpost", fixtures::signpost(1.0, 1.0)),
    ];
    let eps = 1e-5;
    for (name, g) in graphs {
        let disc = Discretization::new(&g, GridSpec::new(1e-2, 40.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut worst = 0.0_f64;
        for _ in 0..100 {
            let u = GraphFunction::from_values(
                &disc,
                (0..disc.ndof()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let v: Vec<f64> = (0..disc.ndof()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let raw = u.raw_energy_gradient();
            let dd: f64 = raw.iter().zip(&v).map(|(a, b)| a * b).sum();
            let mut up = u.values().to_vec();
            let mut dn = u.values().to_vec();
            for i in 0..v.len() {
                up[i] += eps * v[i];
                dn[i] -= eps * v[i];
            }
            let ep = GraphFunction::from_values(&disc, up).unwrap().energy().total;
            let en = GraphFunction::from_values(&disc, dn).unwrap().energy().total;
            let fd = (ep - en) / (2.0 * eps);
            let rel = (dd - fd).abs() / dd.abs().max(fd.abs());
            worst = worst.max(rel);
        }
        out.check(
            worst <= 1e-6,
            format!("{name}: worst relative deviation {worst:.3e} <= 1e-6"),
        );
    }
    out
}

/// 5. The six figure fixtures classify as captioned and their bridge sets
/// match the hand-derived oracles.
pub fn criterion_5() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(5, "topology classification");
    let expected: [(&str, TopologyTag, &[&str]); 6] = [
        ("tip_mesh", TopologyTag::Tip, &["pendant"]),
        ("covered_mesh", TopologyTag::CycleCovered, &[]),
        ("single_halfline_mesh", TopologyTag::OneHalfLineNoTip, &["west"]),
        ("signpost", TopologyTag::Other, &["post"]),
        ("tadpole", TopologyTag::OneHalfLineNoTip, &["tail"]),
        ("half_line", TopologyTag::Tip, &["ray"]),
    ];
    for ((name, g), (ename, tag, bridges)) in fixtures::figure_fixtures().iter().zip(expected) {
        assert_eq!(*name, ename);
        let tc = g.classify();
        out.check(
            tc.tag == tag,
            format!("{name}: case ({}) = ({})", tc.tag.case_letter(), tag.case_letter()),
        );
        let got: Vec<&str> = tc.bridges.iter().map(|&e| g.edge(e).name.as_str()).collect();
        out.check(got == bridges, format!("{name}: bridges {got:?} = {bridges:?}"));
    }
    out
}

/// 6. Tadpole existence window: nonnegative energies below the half-line
/// critical mass, strictly negative converged states above it, and a scan
/// bracket containing mu_R+ with width at most 0.2.
pub fn criterion_6() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(6, "tadpole existence window");
    let g = fixtures::tadpole(2.0 * std::f64::consts::PI);
    let disc = Discretization::new(&g, GridSpec::new(1e-2, 200.0)).unwrap();
    let cfg = SolverConfig {
        scan_budget_floor: 1e-6,
        ..SolverConfig::default()
    };
    let masses = [1.0, 1.2, 1.3, 1.35, 1.45, 1.6, 1.8, 2.0, 2.2, 2.4, 2.6, 2.7207];
    let scan = energy_scan(&disc, &masses, &cfg).unwrap();
    out.check(
        scan.budget <= 1e-4,
        format!("near-onset scan budget {:.2e}", scan.budget),
    );
    for p in &scan.points {
        if p.mass <= 1.21 {
            out.check(
                p.energy >= -scan.budget,
                format!("E({}) = {:+.3e} >= -budget", p.mass, p.energy),
            );
        }
    }
    for &(mu, label) in &[(1.8, "1.8"), (2.2, "2.2"), (2.7207, "2.7207")] {
        let p = scan
            .points
            .iter()
            .find(|p| (p.mass - mu).abs() < 1e-9)
            .unwrap();
        out.check(
            p.status == SolveStatus::Converged && p.energy <= -1e-3,
            format!("E({label}) = {:+.4e} <= -1e-3, {:?}", p.energy, p.status),
        );
        out.check(
            p.residual <= 1e-3,
            format!("residual({label}) = {:.2e} <= 1e-3", p.residual),
        );
        out.check(p.omega < 0.0, format!("omega({label}) = {:+.4} < 0", p.omega));
    }
    match scan.bracket {
        Some((lo, hi)) => {
            let mu_rp = reference::mu_r_plus();
            out.check(
                lo <= mu_rp && mu_rp <= hi && hi - lo <= 0.2,
                format!(
                    "bracket [{lo}, {hi}] contains {mu_rp:.4}, width {:.2} <= 0.2",
                    hi - lo
                ),
            );
        }
        None => out.check(false, "no bracket detected".into()),
    }
    out
}

/// 7. Unboundedness detection above the line critical mass on every fixture,
/// with the probe's quadratic scaling verified over one doubling.
pub fn criterion_7() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(7, "unboundedness detection");
    let mu = 1.1 * reference::mu_r();
    let cfg = SolverConfig::default();
    let mut graphs = fixtures::figure_fixtures();
    graphs.push(("line", fixtures::line()));
    for (name, g) in graphs {
        let disc = Discretization::new(&g, GridSpec::new(2e-2, 40.0)).unwrap();
        match concentration_probe(&disc, mu, &cfg) {
            Some((probe, _)) => {
                let ok = probe.e_lambda < -cfg.energy_cutoff
                    && probe.e_double < -cfg.energy_cutoff
                    && (probe.ratio - 4.0).abs() <= 0.2;
                out.check(
                    ok,
                    format!(
                        "{name}: E({:.0}x) = {:.1}, E({:.0}x) = {:.1}, ratio {:.3} in [3.8, 4.2]",
                        probe.lambda,
                        probe.e_lambda,
                        2.0 * probe.lambda,
                        probe.e_double,
                        probe.ratio
                    ),
                );
            }
            None => out.check(false, format!("{name}: probe failed to certify")),
        }
    }
    // the full solve reports the status end to end
    let g = fixtures::tadpole(2.0 * std::f64::consts::PI);
    let disc = Discretization::new(&g, GridSpec::new(2e-2, 40.0)).unwrap();
    let inits = default_inits(&disc, mu, &cfg);
    let r = minimize_at_mass(&disc, mu, &cfg, &inits).unwrap();
    out.check(
        r.status == SolveStatus::UnboundedBelowDetected,
        format!("tadpole solve status {:?}", r.status),
    );
    out
}

/// 8. Bridge-doubling norm identities at roundoff and the doubled-graph GN
/// bound on 200 random functions per fixture.
pub fn criterion_8() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(8, "bridge doubling identities");
    let mut graphs = fixtures::figure_fixtures();
    graphs.push(("line", fixtures::line()));
    for (name, g) in graphs {
        let disc = Discretization::new(&g, GridSpec::new(5e-2, 15.0)).unwrap();
        let bridges: Vec<EdgeId> = g.bridge_set().into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut worst_id = 0.0_f64;
        let mut bound_ok = true;
        for _ in 0..200 {
            let u = GraphFunction::from_values(
                &disc,
                (0..disc.ndof()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let d = bridge_double(&u).unwrap();
            let m_err = (d.u.mass() - (u.mass() + 3.0 * u.lp_on_edges(2, &bridges))).abs()
                / (1.0 + u.mass());
            let p_err = (d.u.lp_norm_p(6)
                - (u.lp_norm_p(6) + 3.0 * u.lp_on_edges(6, &bridges)))
            .abs()
                / (1.0 + u.lp_norm_p(6));
            let k_err = (d.u.kinetic() - u.kinetic()).abs() / (1.0 + u.kinetic());
            worst_id = worst_id.max(m_err).max(p_err).max(k_err);
            let bc = bridge_doubling_bound_check(&u);
            bound_ok &= bc.lhs <= bc.rhs * (1.0 + 1e-9) + 1e-12;
        }
        out.check(
            worst_id <= 1e-12,
            format!("{name}: worst identity error {worst_id:.2e} <= 1e-12"),
        );
        out.check(bound_ok, format!("{name}: GN bound holds on all samples"));
    }
    out
}

/// 9. Signpost with unit lengths: negative energy at the line critical mass
/// and a GN upper bound on the critical mass strictly below mu_R.
pub fn criterion_9() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(9, "signpost below line critical mass");
    let g = fixtures::signpost(1.0, 1.0);
    let mu_r = reference::mu_r();
    let disc = Discretization::new(&g, GridSpec::new(1e-2, 100.0)).unwrap();
    let cfg = SolverConfig::default();
    let inits = default_inits(&disc, mu_r, &cfg);
    let r = minimize_at_mass(&disc, mu_r, &cfg, &inits).unwrap();
    out.check(
        r.status == SolveStatus::Converged && r.energy.total <= -1e-3,
        format!(
            "E(mu_R) = {:+.4e} <= -1e-3, {:?}, residual {:.2e}",
            r.energy.total, r.status, r.residual
        ),
    );
    let gdisc = Discretization::new(&g, GridSpec::new(2e-2, 60.0)).unwrap();
    let est = gn::maximize_quotient(&gdisc, &GnConfig::default()).unwrap();
    let report = gn::consistency_report(&est, &g.classify(), 1e-3);
    out.check(
        report.certified_below_mu_r && report.mu_r_margin > 0.0,
        format!(
            "mu_upper = {:.4} < mu_R = {mu_r:.4}, margin {:.4} (K_lower {:.4})",
            est.mu_upper, report.mu_r_margin, est.k_lower
        ),
    );
    out
}

/// 10. Rearrangements: exact cell-model norm preservation and kinetic
/// non-increase; the symmetric comparison only on cycle-covered fixtures.
pub fn criterion_10() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(10, "rearrangement properties");
    let tol_rearr = 5e-3;
    let mut graphs = fixtures::figure_fixtures();
    graphs.push(("line", fixtures::line()));
    for (name, g) in graphs {
        let covered = g.has_cycle_covering();
        let disc = Discretization::new(&g, GridSpec::new(2e-2, 15.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut worst_norm = 0.0_f64;
        let mut kin_ok = true;
        let mut sym_ok = true;
        for _ in 0..200 {
            let u = GraphFunction::from_values(
                &disc,
                (0..disc.ndof()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            // input cell norms, computed independently of the sort
            let mut in2 = 0.0;
            let mut in6 = 0.0;
            for (_, eg) in disc.edge_grids() {
                for i in 0..eg.n {
                    let a = u.node_value(eg.node(i)).abs();
                    let b = u.node_value(eg.node(i + 1)).abs();
                    let c = (a + b) / 2.0;
                    in2 += c * c * eg.h;
                    in6 += c.powi(6) * eg.h;
                }
            }
            let r = decreasing_rearrangement(&u);
            worst_norm = worst_norm
                .max((r.lp_cells(2) - in2).abs() / (1.0 + in2))
                .max((r.lp_cells(6) - in6).abs() / (1.0 + in6));
            kin_ok &= r.kinetic_reinterp() <= u.kinetic() * (1.0 + tol_rearr);
            if covered {
                let s = symmetric_rearrangement(&u);
                worst_norm = worst_norm.max((s.lp_cells(2) - in2).abs() / (1.0 + in2));
                sym_ok &= s.kinetic_reinterp() <= u.kinetic() * (1.0 + tol_rearr);
            }
        }
        out.check(
            worst_norm <= 1e-8,
            format!("{name}: worst cell-norm drift {worst_norm:.2e} <= 1e-8"),
        );
        out.check(kin_ok, format!("{name}: decreasing rearrangement kinetic bound"));
        if covered {
            out.check(
                sym_ok,
                format!("{name}: symmetric rearrangement kinetic bound (covered)"),
            );
        }
    }
    out
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels * 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Frozen per-fixture caps on the measured modified-GN constant, from
/// development runs at these exact grids; boundedness is the assertion, the
/// caps the regression guard. The constant depends only on the graph; the
/// signpost's short loop (continuation length 1/2) makes its constant much
/// larger than the tadpole's.
const MODGN_C_CAP_TADPOLE: f64 = 1.0;
const MODGN_C_CAP_SIGNPOST: f64 = 20.0;

/// 11. Tail regularization certificates on fifty nonincreasing profiles and
/// the modified-GN pipeline on the no-terminal-point fixtures.
pub fn criterion_11() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(11, "modified GN pipeline");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_quad = 0.0_f64;
    let mut worst_identity = 0.0_f64;
    let mut certs_ok = true;
    let mut zero_branches = 0;
    for i in 0..50 {
        let ell = [0.5, 1.0, std::f64::consts::PI][i % 3];
        let n = 257;
        let psi: Vec<f64> = match i % 5 {
            0 => (0..=n)
                .map(|k| soliton(0.5 + 0.1 * (i % 7) as f64, ell * k as f64 / n as f64))
                .collect(),
            1 => {
                let a = rng.gen_range(0.5..2.0);
                let b = rng.gen_range(0.3..4.0);
                (0..=n)
                    .map(|k| a * (-b * ell * k as f64 / n as f64).exp())
                    .collect()
            }
            2 => {
                // ramp hitting zero before l/2: exercises the zero branch
                let cut = rng.gen_range(0.25..0.45);
                (0..=n)
                    .map(|k| {
                        let x = k as f64 / n as f64;
                        if x < cut {
                            (cut - x) / cut
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
            3 => {
                let mut vals: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.0..1.5)).collect();
                vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
                vals
            }
            _ => {
                let plateau = rng.gen_range(0.3..0.7);
                (0..=n)
                    .map(|k| {
                        let x = k as f64 / n as f64;
                        if x < plateau {
                            1.0
                        } else {
                            (1.0 - x) / (1.0 - plateau)
                        }
                    })
                    .collect()
            }
        };
        let tr = match tail_regularize(&psi, ell) {
            Ok(tr) => tr,
            Err(e) => {
                out.check(false, format!("profile {i}: scan failed: {e}"));
                continue;
            }
        };
        certs_ok &= tr.certificate.lhs <= tr.certificate.rhs;
        certs_ok &= tr.props.v0 == psi[0];
        let h = ell / n as f64;
        let mass_psi: f64 = (0..n)
            .map(|k| crate::function::interval_p2(psi[k], psi[k + 1], h))
            .sum();
        worst_identity = worst_identity.max(tr.props.l2_identity_error / (1.0 + mass_psi));
        if tr.theta == 0.0 {
            zero_branches += 1;
            continue;
        }
        // derivation-chain bounds on the measured constants, in integral form
        // with an absolute allowance for roundoff in the near-cancelling
        // differences
        let psi_kin = tr.props.kinetic_of_v - tr.props.kinetic_increase;
        let psi_l6 = tr.props.sextic_of_v + tr.props.sextic_drop;
        let c3_bound = 32.0 * (2.0 * tr.certificate.m_half).sqrt() / (ell * ell);
        certs_ok &= tr.props.kinetic_increase
            <= c3_bound * tr.theta.sqrt() * (1.0 + 1e-9) + 1e-13 * (1.0 + psi_kin);
        certs_ok &= tr.props.sextic_drop
            <= 2.0 * tr.amp.powi(4) * tr.theta * (1.0 + 1e-9) + 1e-13 * (1.0 + psi_l6);
        // closed-form tail integrals against an independent Simpson rule
        let (amp, lam) = (tr.amp, tr.lambda);
        let span = 45.0 / lam;
        let q2 = simpson(|x| (amp * (-lam * x).exp()).powi(2), 0.0, span, 1 << 14);
        let q6 = simpson(|x| (amp * (-lam * x).exp()).powi(6), 0.0, span, 1 << 14);
        let qk = simpson(|x| (lam * amp * (-lam * x).exp()).powi(2), 0.0, span, 1 << 14);
        worst_quad = worst_quad
            .max((q2 - amp * amp / (2.0 * lam)).abs() / (amp * amp / (2.0 * lam)))
            .max(
                (q6 - amp.powi(6) / (6.0 * lam)).abs()
                    / (amp.powi(6) / (6.0 * lam)).max(1e-300),
            )
            .max((qk - amp * amp * lam / 2.0).abs() / (amp * amp * lam / 2.0));
    }
    out.check(certs_ok, "scan certificates and property bounds i)-iv) hold".into());
    out.check(
        worst_identity <= 1e-13,
        format!("worst L2 identity error {worst_identity:.2e}"),
    );
    out.check(
        worst_quad <= 1e-10,
        format!("closed-form tails vs quadrature: worst {worst_quad:.2e} <= 1e-10"),
    );
    out.check(
        zero_branches > 0,
        format!("{zero_branches} zero-extension branches exercised"),
    );

    // pipeline on the no-terminal-point fixtures, two independent sample
    // draws per fixture for the window stability statement
    for (name, g, loop_edge, loop_len, c_cap) in [
        (
            "tadpole",
            fixtures::tadpole(2.0 * std::f64::consts::PI),
            EdgeId(0),
            2.0 * std::f64::consts::PI,
            MODGN_C_CAP_TADPOLE,
        ),
        (
            "signpost",
            fixtures::signpost(1.0, 1.0),
            EdgeId(1),
            1.0,
            MODGN_C_CAP_SIGNPOST,
        ),
    ] {
        let disc = Discretization::new(&g, GridSpec::new(1e-2, 60.0)).unwrap();
        let family = |seed: u64| -> Vec<GraphFunction> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut fam = Vec::new();
            // spread states (maximum at the junction vertex)
            for k in 0..4 {
                let eps = 0.5_f64.powi(k);
                let u = GraphFunction::from_nodal(&disc, |e, x| match g.edge(e).ends {
                    EdgeEnds::HalfLine { .. } => soliton(eps, x),
                    EdgeEnds::Finite { .. } => eps.sqrt(),
                });
                for mu in [1.5, 2.2] {
                    fam.push(u.rescaled_to_mass(mu).unwrap());
                }
            }
            // loop-centered bumps
            for lam in [1.0, 2.0, 3.0] {
                let u = soliton_on(&disc, loop_edge, loop_len / 2.0, lam);
                fam.push(u.rescaled_to_mass(2.0).unwrap());
            }
            // random fields dominated by a loop bump so the maximum stays on
            // the loop
            for _ in 0..3 {
                let base = soliton_on(&disc, loop_edge, loop_len / 2.0, 2.0);
                let vals: Vec<f64> = base
                    .values()
                    .iter()
                    .map(|b| b * (1.0 + rng.gen_range(0.0..0.2)))
                    .collect();
                fam.push(
                    GraphFunction::from_values(&disc, vals)
                        .unwrap()
                        .rescaled_to_mass(2.0)
                        .unwrap(),
                );
            }
            fam
        };
        let run = |fam: &[GraphFunction]| -> Option<(f64, usize, usize)> {
            let mut cmax = 0.0_f64;
            let mut supported = 0;
            let mut positives = 0;
            for u in fam {
                match modified_gn_check(u) {
                    Ok(chk) => {
                        supported += 1;
                        if !(chk.lhs
                            <= chk.rhs_kinetic_part + chk.measured_c * chk.theta.sqrt() + 1e-9)
                            || !chk.measured_c.is_finite()
                        {
                            return None;
                        }
                        if chk.measured_c > 0.0 {
                            positives += 1;
                            cmax = cmax.max(chk.measured_c);
                        }
                    }
                    Err(crate::error::TransformError::UnsupportedContinuation { .. }) => {}
                    Err(_) => return None,
                }
            }
            Some((cmax, supported, positives))
        };
        let a = run(&family(100));
        let b = run(&family(200));
        match (a, b) {
            (Some((ca, sa, pa)), Some((cb, _, _))) => {
                out.check(
                    sa >= 5,
                    format!("{name}: {sa} supported inputs ({pa} with positive C)"),
                );
                out.check(
                    ca <= c_cap && cb <= c_cap,
                    format!("{name}: measured C bounded: {ca:.3} / {cb:.3} <= {c_cap}"),
                );
                let top = ca.max(cb);
                let stable = top == 0.0 || (ca - cb).abs() <= 0.5 * top;
                out.check(
                    stable,
                    format!("{name}: window stable across draws: {ca:.3} vs {cb:.3}"),
                );
            }
            _ => out.check(false, format!("{name}: inequality violated or non-finite C")),
        }
    }
    out
}

/// 12. Sandwich between the half-line and the line: per-mass best energies
/// are ordered across the common grid, with detected blow-up as -infinity.
pub fn criterion_12() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(12, "energy sandwich");
    let cfg = SolverConfig {
        residual_tol: 1e-4,
        max_iters: 4000,
        inits_cap: 8,
        triage_keep: 1,
        triage_iters: 200,
        ..SolverConfig::default()
    };
    let masses = [1.2, 1.6, 2.0, 2.4, 2.7207];
    let h = 2.5e-2;
    let trunc = 60.0;
    let budget = cfg
        .scan_budget_floor
        .max(10.0 * reference::soliton_energy_defect(1.0, 40.0, h));

    let value = |g: &MetricGraph| -> Vec<f64> {
        let disc = Discretization::new(g, GridSpec::new(h, trunc)).unwrap();
        masses
            .iter()
            .map(|&mu| {
                let inits = default_inits(&disc, mu, &cfg);
                let r = minimize_at_mass(&disc, mu, &cfg, &inits).unwrap();
                if r.status == SolveStatus::UnboundedBelowDetected {
                    f64::NEG_INFINITY
                } else {
                    r.energy.total
                }
            })
            .collect()
    };
    let line = value(&fixtures::line());
    let half = value(&fixtures::half_line());
    for (name, g) in fixtures::figure_fixtures() {
        let mid = value(&g);
        for (i, &mu) in masses.iter().enumerate() {
            let lower_ok = half[i] <= mid[i] + budget;
            let upper_ok = mid[i] <= line[i] + 2.0 * budget;
            out.check(
                lower_ok && upper_ok,
                format!(
                    "{name} mu={mu}: {:.3e} <= {:.3e} (+b) <= {:.3e} (+2b)",
                    half[i], mid[i], line[i]
                ),
            );
        }
    }
    out
}

pub fn run_all() -> Vec<CriterionOutcome> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
        criterion_12(),
    ]
}
