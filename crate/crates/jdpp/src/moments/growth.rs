use serde::Serialize;

use crate::error::Result;
use crate::fock::FockSpace;
use crate::sites::SiteSet;
use crate::space::{growth_bound_constant, GrowthConstant, JKernelBundle};

use super::cycle::cycle_trace_moment;
use super::routes::{correlation_measure, factorial, MAX_FOCK_D, MAX_FOCK_N};

/// Absolute slack for rounding when comparing θ⁽ⁿ⁾ with Cⁿ.
pub const GROWTH_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    pub theta: f64,
    pub general_bound: f64,
    pub refined_bound: Option<f64>,
    pub holds_general: bool,
    pub holds_refined: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub delta: SiteSet,
    pub constant: GrowthConstant,
    pub rows: Vec<GrowthRow>,
    pub violations: usize,
}

/// Checks θ⁽ⁿ⁾(Δⁿ) ≤ C_Δⁿ for 1 ≤ n ≤ n_max. θ comes from the Fock Wick
/// product when feasible and from the cycle-trace formula otherwise.
pub fn growth_bound_check(bundle: &JKernelBundle, delta: SiteSet, n_max: usize) -> Result<GrowthReport> {
    let constant = growth_bound_constant(bundle, delta)?;
    let fs = if bundle.d() <= MAX_FOCK_D { Some(FockSpace::new(bundle.d())?) } else { None };
    let mut rows = Vec::new();
    let mut violations = 0;
    for n in 1..=n_max {
        let deltas = vec![delta; n];
        let theta = match &fs {
            Some(fs) if n <= MAX_FOCK_N => correlation_measure(bundle, &deltas, fs)?,
            _ => cycle_trace_moment(bundle, &deltas)? / factorial(n),
        };
        let general_bound = constant.general.powi(n as i32);
        let refined_bound = constant.refined.map(|c| c.powi(n as i32));
        let holds_general = theta <= general_bound + GROWTH_SLACK;
        let holds_refined = refined_bound.map(|b| theta <= b + GROWTH_SLACK);
        violations += usize::from(!holds_general) + usize::from(holds_refined == Some(false));
        rows.push(GrowthRow { n, theta, general_bound, refined_bound, holds_general, holds_refined });
    }
    Ok(GrowthReport { delta, constant, rows, violations })
}
