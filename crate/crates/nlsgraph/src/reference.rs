//! Closed-form reference objects: the soliton family on the line, the
//! critical masses of the line and half-line, and the best constants in the
//! corresponding Gagliardo-Nirenberg inequalities.

use serde::Serialize;

use crate::graph::{TopologyClass, TopologyTag};

/// Critical masses and best constants for the two extremal graphs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Constants {
    /// pi*sqrt(3)/2, the critical mass of the line.
    pub mu_r: f64,
    /// pi*sqrt(3)/4, the critical mass of the half-line.
    pub mu_r_plus: f64,
    /// 4/pi^2 = 3/mu_r^2.
    pub k_r: f64,
    /// 16/pi^2 = 3/mu_r_plus^2.
    pub k_r_plus: f64,
}

pub fn constants() -> Constants {
    let mu_r = std::f64::consts::PI * 3.0_f64.sqrt() / 2.0;
    Constants {
        mu_r,
        mu_r_plus: mu_r / 2.0,
        k_r: 3.0 / (mu_r * mu_r),
        k_r_plus: 12.0 / (mu_r * mu_r),
    }
}

pub fn mu_r() -> f64 {
    constants().mu_r
}

pub fn mu_r_plus() -> f64 {
    constants().mu_r_plus
}

/// The soliton `phi_lambda(x) = sqrt(lambda) sech^(1/2)(2 lambda x / sqrt 3)`.
///
/// Even in `x`, strictly decreasing for `x > 0`, mass `pi sqrt(3)/2` for every
/// `lambda`. Evaluated through exponentials so that large arguments underflow
/// to zero instead of overflowing.
pub fn soliton(lambda: f64, x: f64) -> f64 {
    assert!(lambda > 0.0, "soliton scale must be positive, got {lambda}");
    let t = (2.0 * lambda * x.abs()) / 3.0_f64.sqrt();
    // sech(t)^(1/2) = sqrt(2) e^(-t/2) / sqrt(1 + e^(-2t))
    let e = (-t / 2.0).exp();
    lambda.sqrt() * std::f64::consts::SQRT_2 * e / (1.0 + (-2.0 * t).exp()).sqrt()
}

/// Quadrature value of `|E(phi_lambda)|` over the window `[-trunc, trunc]`
/// sampled at step `h`, using the same exact piecewise-linear per-interval
/// formulas as the discrete functionals. Tends to zero as `h -> 0` and
/// `trunc -> infinity`; serves as the discretization budget for tests at a
/// given resolution.
pub fn soliton_energy_defect(lambda: f64, trunc: f64, h: f64) -> f64 {
    assert!(lambda > 0.0 && trunc > 0.0 && h > 0.0);
    let n = ((2.0 * trunc / h).round() as usize).max(2);
    let hh = 2.0 * trunc / n as f64;
    let mut kinetic = 0.0;
    let mut sextic = 0.0;
    let mut prev = soliton(lambda, -trunc);
    for i in 1..=n {
        let x = -trunc + hh * i as f64;
        let cur = soliton(lambda, x);
        kinetic += (cur - prev) * (cur - prev) / hh;
        sextic += hh / 7.0 * power_sum(prev, cur, 6);
        prev = cur;
    }
    (0.5 * kinetic - sextic / 6.0).abs()
}

/// sum_{k=0}^{p} a^k b^(p-k), the divided difference (b^(p+1)-a^(p+1))/(b-a)
/// in cancellation-free form.
pub(crate) fn power_sum(a: f64, b: f64, p: usize) -> f64 {
    let mut apow = 1.0;
    let mut sum = 0.0;
    for k in 0..=p {
        sum += apow * b.powi((p - k) as i32);
        apow *= a;
    }
    sum
}

/// Exact critical mass implied by topology, or the universal bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CriticalMass {
    Exact(f64),
    Bracket(f64, f64),
}

impl CriticalMass {
    pub fn lower(&self) -> f64 {
        match *self {
            CriticalMass::Exact(m) => m,
            CriticalMass::Bracket(a, _) => a,
        }
    }
    pub fn upper(&self) -> f64 {
        match *self {
            CriticalMass::Exact(m) => m,
            CriticalMass::Bracket(_, b) => b,
        }
    }
}

/// Tip and one-half-line graphs have the half-line critical mass, covered
/// graphs the line critical mass; everything else is only bracketed.
pub fn critical_mass_exact(tc: &TopologyClass) -> CriticalMass {
    let c = constants();
    match tc.tag {
        TopologyTag::Tip => CriticalMass::Exact(c.mu_r_plus),
        TopologyTag::CycleCovered => CriticalMass::Exact(c.mu_r),
        TopologyTag::OneHalfLineNoTip => CriticalMass::Exact(c.mu_r_plus),
        TopologyTag::Other => CriticalMass::Bracket(c.mu_r_plus, c.mu_r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;

    #[test]
    fn constants_identities() {
        let c = constants();
        assert_eq!(c.mu_r, 2.0 * c.mu_r_plus);
        assert_relative_eq!(c.k_r_plus, 4.0 * c.k_r, max_relative = 1e-15);
        assert_relative_eq!(c.k_r * c.mu_r * c.mu_r, 3.0, max_relative = 1e-15);
        assert_relative_eq!(c.k_r_plus * c.mu_r_plus * c.mu_r_plus, 3.0, max_relative = 1e-15);
        assert_relative_eq!(c.mu_r, std::f64::consts::PI * 3.0_f64.sqrt() / 2.0);
        assert_relative_eq!(c.k_r, 4.0 / (std::f64::consts::PI * std::f64::consts::PI));
    }

    #[test]
    fn soliton_values() {
        assert_eq!(soliton(1.0, 0.0), 1.0);
        assert_eq!(soliton(4.0, 0.0), 2.0);
        assert_eq!(soliton(1.0, 3.0), soliton(1.0, -3.0));
        assert!(soliton(1.0, 1.0) > soliton(1.0, 2.0));
        // graceful underflow far out
        assert_eq!(soliton(1.0, 5000.0), 0.0);
        assert!(soliton(1.0, 500.0) > 0.0);
    }

    #[test]
    #[should_panic(expected = "positive")]
    fn soliton_rejects_nonpositive_scale() {
        soliton(0.0, 1.0);
    }

    #[test]
    fn soliton_mass_closed_form() {
        // trapezoid-free check of int sech(a x) dx = pi/a with a = 2/sqrt(3):
        // mass of phi_1 = pi sqrt(3)/2
        let n = 400_000;
        let trunc = 40.0;
        let h = 2.0 * trunc / n as f64;
        let mut mass = 0.0;
        let mut prev = soliton(1.0, -trunc);
        for i in 1..=n {
            let cur = soliton(1.0, -trunc + h * i as f64);
            mass += h / 3.0 * (prev * prev + prev * cur + cur * cur);
            prev = cur;
        }
        assert_relative_eq!(mass, mu_r(), max_relative = 1e-6);
    }

    #[test]
    fn defect_vanishes_with_resolution_and_window() {
        assert!(soliton_energy_defect(1.0, 40.0, 1e-3) < 1e-6);
        assert!(soliton_energy_defect(2.0, 40.0, 1e-3) < 1e-5);
        // short window: pure truncation error, order of the sech^3 tail
        let d = soliton_energy_defect(1.0, 2.0, 1e-3);
        assert!(d > 1e-3 && d < 1.0, "window truncation defect {d}");
        // halving h reduces the h-driven part
        let fine = soliton_energy_defect(1.0, 40.0, 5e-4);
        let coarse = soliton_energy_defect(1.0, 40.0, 1e-3);
        assert!(fine < coarse);
    }

    #[test]
    fn exact_masses_by_topology() {
        let c = constants();
        let tip = fixtures::half_line().classify();
        assert_eq!(critical_mass_exact(&tip), CriticalMass::Exact(c.mu_r_plus));
        let cover = fixtures::line().classify();
        assert_eq!(critical_mass_exact(&cover), CriticalMass::Exact(c.mu_r));
        let tad = fixtures::tadpole(1.0).classify();
        assert_eq!(critical_mass_exact(&tad), CriticalMass::Exact(c.mu_r_plus));
        let sp = fixtures::signpost(1.0, 1.0).classify();
        assert_eq!(
            critical_mass_exact(&sp),
            CriticalMass::Bracket(c.mu_r_plus, c.mu_r)
        );
    }
}
