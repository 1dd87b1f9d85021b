use serde::Serialize;

use crate::error::Result;
use crate::fock::FockSpace;
use crate::sites::{format_tuple, SiteSet};
use crate::space::JKernelBundle;

use super::cycle::{cycle_trace_moment, MAX_CYCLE_N};
use super::routes::{
    determinant_moment_sum, pairing_expansion_moment, wick_moment, MAX_DET_N, MAX_DET_TUPLES, MAX_FOCK_D, MAX_FOCK_N,
    MAX_PAIRING_D, MAX_PAIRING_N,
};

/// All route values of τ(:ρ(Δ₁)⋯ρ(Δₙ):) = n!·θ⁽ⁿ⁾(Δ₁×⋯×Δₙ).
/// Routes whose size caps are exceeded are `None`.
#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub n: usize,
    pub deltas: Vec<SiteSet>,
    pub label: String,
    pub value_fock: Option<f64>,
    pub value_cycle: f64,
    pub value_det: Option<f64>,
    pub value_pairing: Option<f64>,
    pub max_discrepancy: f64,
}

pub fn moment_report(bundle: &JKernelBundle, deltas: &[SiteSet]) -> Result<MomentReport> {
    let n = deltas.len();
    let d = bundle.d();
    let value_cycle = cycle_trace_moment(bundle, deltas)?;
    let tuples: usize = deltas.iter().map(|s| s.len()).product();
    let value_det =
        if n <= MAX_DET_N && tuples <= MAX_DET_TUPLES { Some(determinant_moment_sum(bundle, deltas)?) } else { None };
    let fs = FockSpace::new(d.min(MAX_FOCK_D))?;
    let value_fock = if d <= MAX_FOCK_D && n <= MAX_FOCK_N { Some(wick_moment(bundle, deltas, &fs)?) } else { None };
    let value_pairing = if d <= MAX_PAIRING_D && n <= MAX_PAIRING_N {
        Some(pairing_expansion_moment(bundle, deltas, &fs)?)
    } else {
        None
    };
    let values: Vec<f64> = [Some(value_cycle), value_fock, value_det, value_pairing].into_iter().flatten().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MomentReport {
        n,
        deltas: deltas.to_vec(),
        label: format_tuple(deltas),
        value_fock,
        value_cycle,
        value_det,
        value_pairing,
        max_discrepancy: max - min,
    })
}

/// Caps checked before any route runs; `Err` names the violated cap.
pub fn check_moment_caps(n: usize) -> Result<()> {
    if n == 0 {
        return Err(crate::error::Error::Empty("subset list"));
    }
    if n > MAX_CYCLE_N {
        return Err(crate::error::Error::Infeasible {
            what: "cycle-trace moment order",
            requested: n,
            cap: MAX_CYCLE_N,
        });
    }
    Ok(())
}
