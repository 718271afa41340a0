//! Dense verification battery for a single graph.

use std::fmt;

use condtest_core::metrics::{cut_stats, graph_conductance_bruteforce, BRUTE_FORCE_MAX_N};
use condtest_core::spectral::{
    direct_discrepancy, mixing_upper_bound, normalized_walk_eigendecomposition, sparse_cut_partition,
    summed_discrepancy, verify_walk_decomposition, verify_weak_set_lemma, walk_endpoint_distribution,
    WeakSetOutcome, EIGEN_MAX_N, PARTITION_MAX_N,
};
use condtest_core::{Graph, VertexSet};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// Largest graph on which every vertex subset is fed to the weak-set check.
pub const WEAK_SET_MAX_N: usize = 12;

pub const IDENTITY_TOL: f64 = 1e-11;
pub const DECOMPOSITION_TOL: f64 = 1e-9;
pub const MIXING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    /// Largest violation-side quantity the check measured, if any.
    pub residual: Option<f64>,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
        };
        write!(f, "{tag} {:<14}", self.name)?;
        if let Some(r) = self.residual {
            write!(f, " residual={r:.3e}")?;
        }
        write!(f, " {}", self.detail)
    }
}

fn check(name: &str, ok: bool, residual: Option<f64>, detail: String) -> CheckResult {
    let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
    CheckResult { name: name.into(), status, residual, detail }
}

fn skipped(name: &str, detail: impl Into<String>) -> CheckResult {
    CheckResult { name: name.into(), status: CheckStatus::Skipped, residual: None, detail: detail.into() }
}

/// Runs the identity, decomposition, mixing, weak-set and partition checks
/// at walk length `steps`, with `phi_target` for the partition.
pub fn oracle_battery(g: &Graph, steps: usize, phi_target: f64) -> Result<Vec<CheckResult>, HarnessError> {
    if g.m() == 0 {
        return Err(HarnessError::Spec("oracle checks need at least one edge".into()));
    }
    let n = g.n();
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for v in 0..n {
        let p = walk_endpoint_distribution(g, v, steps)?;
        worst = worst.max((summed_discrepancy(g, &p) - direct_discrepancy(g, &p)).abs());
    }
    out.push(check("identity", worst <= IDENTITY_TOL, Some(worst), format!("tol={IDENTITY_TOL:e}")));

    if n <= EIGEN_MAX_N {
        let dec = normalized_walk_eigendecomposition(g)?;
        let r = verify_walk_decomposition(g, &dec, steps)?;
        out.push(check("decomposition", r <= DECOMPOSITION_TOL, Some(r), format!("tol={DECOMPOSITION_TOL:e}")));
    } else {
        out.push(skipped("decomposition", format!("n={n} exceeds {EIGEN_MAX_N}")));
    }

    let conductance = (n >= 2 && n <= BRUTE_FORCE_MAX_N).then(|| graph_conductance_bruteforce(g)).transpose()?;
    match conductance {
        Some(c) if c.value > 0.0 => {
            let bound = mixing_upper_bound(c.value, steps)?;
            let mut excess = f64::NEG_INFINITY;
            for v in 0..n {
                let p = walk_endpoint_distribution(g, v, steps)?;
                excess = excess.max(direct_discrepancy(g, &p).sqrt() - bound);
            }
            out.push(check(
                "mixing",
                excess <= MIXING_TOL,
                Some(excess.max(0.0)),
                format!("conductance={:.6} bound={bound:.6e}", c.value),
            ));
        }
        Some(_) => out.push(skipped("mixing", "graph is disconnected")),
        None => out.push(skipped("mixing", format!("n={n} exceeds {BRUTE_FORCE_MAX_N}"))),
    }

    if n <= WEAK_SET_MAX_N {
        let (mut checked, mut witnesses, mut failures) = (0usize, 0usize, 0usize);
        for mask in 1u64..(1 << n) - 1 {
            let s = VertexSet::from_mask(mask);
            let st = cut_stats(g, &s)?;
            if st.vol_s == 0 || st.vol_s > st.vol_complement {
                continue;
            }
            let report = verify_weak_set_lemma(g, &s, steps, 0.1)?;
            match report.outcome {
                WeakSetOutcome::NonBinding => continue,
                WeakSetOutcome::Witness(_) => witnesses += 1,
                WeakSetOutcome::NoWitness => failures += 1,
            }
            checked += 1;
        }
        out.push(check(
            "weak-set",
            failures == 0,
            None,
            format!("binding_sets={checked} witnesses={witnesses} failures={failures}"),
        ));
    } else {
        out.push(skipped("weak-set", format!("n={n} exceeds {WEAK_SET_MAX_N}")));
    }

    if n <= PARTITION_MAX_N {
        let part = sparse_cut_partition(g, phi_target)?;
        let ok = part.cut_p as f64 <= phi_target * part.vol_p as f64 && 2 * part.vol_p <= 2 * g.m();
        out.push(check(
            "partition",
            ok,
            None,
            format!(
                "target={phi_target} pieces={} cut={} vol={} remainder_conductance={}",
                part.pieces.len(),
                part.cut_p,
                part.vol_p,
                part.remainder_conductance.map_or("n/a".into(), |x| format!("{x:.4}"))
            ),
        ));
    } else {
        out.push(skipped("partition", format!("n={n} exceeds {PARTITION_MAX_N}")));
    }
    Ok(out)
}
