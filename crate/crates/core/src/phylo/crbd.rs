use std::fmt::Write as _;

use super::{PhyloError, PhyloTree};
use crate::ast::CoreTerm;
use crate::surface::parse_core;

/// Speciation and extinction rates, events per lineage per Ma.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrbdParams {
    pub birth: f64,
    pub death: f64,
}

impl CrbdParams {
    pub fn new(birth: f64, death: f64) -> Result<Self, PhyloError> {
        let p = CrbdParams { birth, death };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PhyloError> {
        let CrbdParams { birth, death } = *self;
        if !(birth > 0.0 && birth.is_finite()) || !(death >= 0.0 && death.is_finite()) {
            return Err(PhyloError::Params(format!(
                "need birth > 0 and death >= 0, got birth {birth}, death {death}"
            )));
        }
        if birth == death {
            return Err(PhyloError::Params(
                "equal birth and death rates are not supported".into(),
            ));
        }
        Ok(())
    }

    /// Probability that a lineage alive at age `t` has no descendants today.
    pub fn p0(&self, t: f64) -> f64 {
        let (l, m) = (self.birth, self.death);
        let e = (-(l - m) * t).exp();
        m * (1.0 - e) / (l - m * e)
    }

    /// Log-probability that a lineage alive at age `t` has exactly one
    /// descendant today.
    pub fn log_p1(&self, t: f64) -> f64 {
        let (l, m) = (self.birth, self.death);
        let r = l - m;
        let e = (-r * t).exp();
        2.0 * r.abs().ln() - r * t - 2.0 * (l - m * e).abs().ln()
    }
}

fn check_tree(t: &PhyloTree) -> Result<(), PhyloError> {
    if t.leaf_count() < 2 {
        return Err(PhyloError::Shape("the tree needs at least two leaves".into()));
    }
    if !t.is_binary() {
        return Err(PhyloError::Shape(
            "the tree has polytomies; resolve them first".into(),
        ));
    }
    Ok(())
}

/// Log-density of the reconstructed tree under the constant-rate
/// birth-death process, starting from two lineages at the root and
/// conditioned on both leaving descendants. Every branching, the root
/// included, contributes `log λ`; the root's own stem is ignored.
pub fn crbd_exact_log_likelihood(t: &PhyloTree, p: CrbdParams) -> Result<f64, PhyloError> {
    p.validate()?;
    check_tree(t)?;
    let root = t.root_age();
    let mut ll = 2.0 * p.log_p1(root) - 2.0 * (1.0 - p.p0(root)).ln();
    for i in t.internal() {
        ll += p.birth.ln();
        if i != PhyloTree::ROOT {
            ll += p.log_p1(t.nodes[i].age);
        }
    }
    Ok(ll)
}

/// Source text of the CRBD program for `t`: a straight-line walk over the
/// observed branchings and edges, with hidden speciations simulated along
/// each edge. The first comment lines record the exact log-likelihood.
pub fn crbd_source(t: &PhyloTree, p: CrbdParams) -> Result<String, PhyloError> {
    let exact = crbd_exact_log_likelihood(t, p)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "// Constant-rate birth-death model of a {}-leaf time tree, crown age {} Ma.",
        t.leaf_count(),
        t.root_age()
    );
    let _ = writeln!(s, "// exact_log_z = {exact}");
    let _ = write!(
        s,
        "lambda = {}\nmu = {}\n\n{}",
        p.birth, p.death, PRELUDE
    );
    let _ = writeln!(s, "weight(0 - 2 * log(1 - p0({})))", t.root_age());
    for i in t.preorder() {
        if t.is_leaf(i) {
            continue;
        }
        let _ = writeln!(s, "speciation()");
        for &c in &t.nodes[i].children {
            let _ = write!(s, "branch({}, {})", t.nodes[i].age, t.nodes[c].age);
            match &t.nodes[c].name {
                Some(name) if t.is_leaf(c) => {
                    let _ = writeln!(s, "  // {name}");
                }
                _ => s.push('\n'),
            }
        }
    }
    s.push_str("0\n");
    Ok(s)
}

const PRELUDE: &str = "\
// probability that a lineage alive at age t leaves no descendants
function p0(t) {
  e = exp(mu * t - lambda * t)
  mu * (1 - e) / (lambda - mu * e)
}

// hidden speciations between ages start and stop; every side branch
// must die out before the present
function hidden(start, stop) {
  t = start - sample(exponential(lambda))
  if t <= stop then 0 else {
    weight(log(2 * p0(t)))
    hidden(t, stop)
  }
}

// an observed edge: no extinction along it, plus its hidden side branches
function branch(start, stop) {
  weight(mu * (stop - start))
  hidden(start, stop)
}

function speciation() {
  weight(log(lambda))
}

";

pub fn crbd_program(t: &PhyloTree, p: CrbdParams) -> Result<CoreTerm, PhyloError> {
    let src = crbd_source(t, p)?;
    Ok(parse_core(&src).expect("generated CRBD source parses"))
}

/// The `exact_log_z` recorded in a generated program's header, if any.
pub fn recorded_log_z(source: &str) -> Option<f64> {
    source
        .lines()
        .take_while(|l| l.starts_with("//"))
        .find_map(|l| l.strip_prefix("// exact_log_z = "))
        .and_then(|v| v.trim().parse().ok())
}
