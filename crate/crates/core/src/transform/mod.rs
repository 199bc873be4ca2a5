//! Program rewrites that prepare a model for SMC: turning dynamic weights
//! into `dweight`, and conversion to continuation-passing style so that
//! execution can pause at the remaining weights.

mod align;
mod cps;

pub use align::align_weights;
pub use cps::cps_transform;

use crate::ast::CoreTerm;
use crate::cfa::{analyze, Analysis};

/// Analyze, align and CPS-convert: the program aligned SMC runs.
pub fn aligned_cps(t: &CoreTerm) -> (Analysis, CoreTerm) {
    let a = analyze(t);
    let aligned = align_weights(&a.labeled, &a.dynamic);
    let cps = cps_transform(&aligned);
    (a, cps)
}

/// CPS-convert without alignment, so every weight pauses: the program
/// unaligned SMC runs.
pub fn unaligned_cps(t: &CoreTerm) -> CoreTerm {
    cps_transform(t)
}
