//! Dense linear-algebra ground truth for the lazy random walk.
//!
//! `W = (I + A D⁻¹) / 2` acts on column vectors of probability mass, so
//! `W^ℓ e_v` is the endpoint distribution of an ℓ-step lazy walk from `v`.
//! `N = D^{-1/2} W D^{1/2}` is its symmetric similarity transform.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId, VertexSet};
use crate::metrics::{self, adjacency_masks, sparsest_subset};

/// Largest graph the dense eigensolver accepts.
pub const EIGEN_MAX_N: usize = 2000;
/// Largest graph `sparse_cut_partition` accepts.
pub const PARTITION_MAX_N: usize = 20;

/// `π(v) = deg(v) / 2m`.
pub fn stationary_distribution(g: &Graph) -> Result<Vec<f64>> {
    if g.m() == 0 {
        return Err(Error::InvalidInput("stationary distribution needs an edge".into()));
    }
    let two_m = 2.0 * g.m() as f64;
    Ok((0..g.n()).map(|v| g.degree(v) as f64 / two_m).collect())
}

/// One application of `W`. Isolated vertices keep their mass.
pub fn lazy_walk_step(g: &Graph, p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; g.n()];
    for (v, &mass) in p.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let d = g.degree(v);
        if d == 0 {
            out[v] += mass;
            continue;
        }
        out[v] += mass / 2.0;
        let share = mass / (2.0 * d as f64);
        for &u in g.neighbors(v) {
            out[u] += share;
        }
    }
    out
}

pub fn point_mass(n: usize, v: VertexId) -> Vec<f64> {
    let mut p = vec![0.0; n];
    p[v] = 1.0;
    p
}

/// `W^ℓ e_v`.
pub fn walk_endpoint_distribution(g: &Graph, v: VertexId, steps: usize) -> Result<Vec<f64>> {
    g.check_vertex(v)?;
    let mut p = point_mass(g.n(), v);
    for _ in 0..steps {
        p = lazy_walk_step(g, &p);
    }
    Ok(p)
}

/// `[W^0 e_v, W^1 e_v, ..., W^max_steps e_v]`.
pub fn walk_trajectory(g: &Graph, v: VertexId, max_steps: usize) -> Result<Vec<Vec<f64>>> {
    g.check_vertex(v)?;
    let mut out = Vec::with_capacity(max_steps + 1);
    out.push(point_mass(g.n(), v));
    for i in 0..max_steps {
        let next = lazy_walk_step(g, &out[i]);
        out.push(next);
    }
    Ok(out)
}

/// Expanded per-vertex discrepancy term `p_u² − p_u·d(u)/m + d(u)²/4m²`.
/// Summed over `u` it equals `‖p − π‖²`.
pub fn discrepancy_term(p_u: f64, deg_u: usize, m: usize) -> f64 {
    let d = deg_u as f64;
    let m = m as f64;
    p_u * p_u - p_u * d / m + d * d / (4.0 * m * m)
}

/// `‖p − π‖²` through the expanded summed form.
pub fn summed_discrepancy(g: &Graph, p: &[f64]) -> f64 {
    p.iter()
        .enumerate()
        .map(|(u, &x)| discrepancy_term(x, g.degree(u), g.m()))
        .sum()
}

/// `‖p − π‖²` computed directly from the difference vector.
pub fn direct_discrepancy(g: &Graph, p: &[f64]) -> f64 {
    let two_m = 2.0 * g.m() as f64;
    p.iter()
        .enumerate()
        .map(|(u, &x)| {
            let diff = x - g.degree(u) as f64 / two_m;
            diff * diff
        })
        .sum()
}

/// `‖W^ℓ e_v − π‖²` via the expanded summed form.
pub fn l2_discrepancy_squared(g: &Graph, v: VertexId, steps: usize) -> Result<f64> {
    stationary_distribution(g)?;
    let p = walk_endpoint_distribution(g, v, steps)?;
    Ok(summed_discrepancy(g, &p))
}

/// Per-vertex `‖W^ℓ e_v − π‖²` using the direct (cancellation-free) form.
pub fn discrepancies(g: &Graph, steps: usize) -> Result<Vec<f64>> {
    stationary_distribution(g)?;
    (0..g.n())
        .map(|v| Ok(direct_discrepancy(g, &walk_endpoint_distribution(g, v, steps)?)))
        .collect()
}

/// `(1 − Φ²/2)^ℓ`.
pub fn mixing_upper_bound(phi: f64, steps: usize) -> Result<f64> {
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::InvalidInput(format!("conductance {phi} not in (0, 1]")));
    }
    Ok((1.0 - phi * phi / 2.0).powi(steps as i32))
}

/// Eigenpairs of `N`, eigenvalues descending, eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Second-largest eigenvalue μ₂ (0 for a single vertex).
    pub fn mu2(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }

    /// `max |F^T F − I|` over entries.
    pub fn orthonormality_error(&self) -> f64 {
        let f = &self.eigenvectors;
        let gram = f.transpose() * f;
        let mut worst: f64 = 0.0;
        for i in 0..self.n() {
            for j in 0..self.n() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// `N = D^{-1/2} W D^{1/2}` as a dense matrix.
pub fn normalized_walk_matrix(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut a = DMatrix::zeros(n, n);
    for v in 0..n {
        a[(v, v)] = 0.5;
        for &u in g.neighbors(v) {
            let w = 0.5 / ((g.degree(u) * g.degree(v)) as f64).sqrt();
            a[(u, v)] = w;
        }
    }
    a
}

pub fn normalized_walk_eigendecomposition(g: &Graph) -> Result<SpectralDecomposition> {
    let n = g.n();
    if n > EIGEN_MAX_N {
        return Err(Error::CapacityExceeded { what: "eigendecomposition", limit: EIGEN_MAX_N, n });
    }
    if g.m() == 0 || !g.is_connected() {
        return Err(Error::InvalidInput("eigendecomposition needs a connected graph with an edge".into()));
    }
    let eig = SymmetricEigen::new(normalized_walk_matrix(g));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        let flip = if k == 0 {
            col.sum() < 0.0
        } else {
            // Largest-magnitude entry (first on ties) made positive.
            let mut best = 0;
            for r in 1..n {
                if col[r].abs() > col[best].abs() + 1e-12 {
                    best = r;
                }
            }
            col[best] < 0.0
        };
        if flip {
            col.neg_mut();
        }
        vecs.set_column(k, &col);
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors: vecs })
}

/// Max over `(u, v)` of the residual of
/// `W^ℓ(u→v)/π(v) = 1 + Σ_{i≥2} μ_i^ℓ f_i(u) f_i(v) · 2m / sqrt(d(u) d(v))`.
pub fn verify_walk_decomposition(
    g: &Graph,
    dec: &SpectralDecomposition,
    steps: usize,
) -> Result<f64> {
    let n = g.n();
    if dec.n() != n {
        return Err(Error::InvalidInput("decomposition does not match graph".into()));
    }
    let pi = stationary_distribution(g)?;
    let two_m = 2.0 * g.m() as f64;
    let powers: Vec<f64> = dec.eigenvalues.iter().map(|mu| mu.powi(steps as i32)).collect();
    let f = &dec.eigenvectors;
    let mut worst: f64 = 0.0;
    for u in 0..n {
        let p = walk_endpoint_distribution(g, u, steps)?;
        for v in 0..n {
            let scale = two_m / ((g.degree(u) * g.degree(v)) as f64).sqrt();
            let spectral: f64 = (1..n).map(|i| powers[i] * f[(u, i)] * f[(v, i)]).sum();
            let residual = p[v] / pi[v] - 1.0 - spectral * scale;
            worst = worst.max(residual.abs());
        }
    }
    Ok(worst)
}

/// Vertices whose walk distribution stays farther than `threshold` (in L2
/// norm, not squared) from π after ℓ steps.
pub fn weak_vertices(g: &Graph, steps: usize, threshold: f64) -> Result<VertexSet> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::InvalidInput("weakness threshold must be positive".into()));
    }
    let disc = discrepancies(g, steps)?;
    Ok((0..g.n()).filter(|&v| disc[v].sqrt() > threshold).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeakSetOutcome {
    /// `T` with the required volume, every member above the bound.
    Witness(VertexSet),
    /// Members above the bound do not reach the required volume.
    NoWitness,
    /// `δ ≥ 1/4`: the bound's base `1 − 4δ` is non-positive, so the
    /// statement carries no information.
    NonBinding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakSetReport {
    pub delta: f64,
    /// `ln((1 − 4δ)^{2ℓ} / (80 m⁷))`, absent when non-binding.
    pub log_bound: Option<f64>,
    pub required_volume: f64,
    pub outcome: WeakSetOutcome,
}

impl WeakSetReport {
    pub fn holds(&self) -> bool {
        !matches!(self.outcome, WeakSetOutcome::NoWitness)
    }
}

/// Searches for `T ⊆ S` with `vol(T) ≥ θ·vol(S)` whose members all have
/// `‖W^ℓ e_v − π‖² > (1 − 4δ)^{2ℓ} / (80 m⁷)`, where `δ = φ(S)`. Members are
/// taken greedily in order of decreasing discrepancy.
pub fn verify_weak_set_lemma(
    g: &Graph,
    s: &VertexSet,
    steps: usize,
    theta: f64,
) -> Result<WeakSetReport> {
    if !(theta > 0.0 && theta <= 0.1) {
        return Err(Error::InvalidInput(format!("theta {theta} not in (0, 1/10]")));
    }
    let delta = metrics::set_conductance(g, s)
        .map_err(|e| Error::InvalidInput(format!("weak-set check: {e}")))?;
    let vol_s = metrics::volume(g, s)? as f64;
    let required_volume = theta * vol_s;
    if delta >= 0.25 {
        return Ok(WeakSetReport { delta, log_bound: None, required_volume, outcome: WeakSetOutcome::NonBinding });
    }
    let m = g.m() as f64;
    let log_bound = -(80.0f64).ln() - 7.0 * m.ln() + 2.0 * steps as f64 * (1.0 - 4.0 * delta).ln();
    let disc = discrepancies(g, steps)?;
    let mut ranked: Vec<VertexId> = s.members().to_vec();
    ranked.sort_by(|&a, &b| disc[b].total_cmp(&disc[a]).then(a.cmp(&b)));
    let mut chosen = Vec::new();
    let mut vol = 0.0;
    for v in ranked {
        if vol >= required_volume {
            break;
        }
        if !(disc[v] > 0.0 && disc[v].ln() > log_bound) {
            break;
        }
        chosen.push(v);
        vol += g.degree(v) as f64;
    }
    let outcome = if vol >= required_volume {
        WeakSetOutcome::Witness(VertexSet::new(chosen))
    } else {
        WeakSetOutcome::NoWitness
    };
    Ok(WeakSetReport { delta, log_bound: Some(log_bound), required_volume, outcome })
}

/// Result of recursively peeling sparse cuts.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Removed pieces `C_1, C_2, ...` in order.
    pub pieces: Vec<VertexSet>,
    /// Union of the pieces.
    pub p: VertexSet,
    pub cut_p: usize,
    pub vol_p: usize,
    /// Conductance of `G[V \ P]`; `None` when it has fewer than two
    /// vertices or no edges.
    pub remainder_conductance: Option<f64>,
}

/// Repeatedly removes the sparsest cut `C` of the remaining induced
/// subgraph while its ratio (in induced degrees) is at most `phi_target`
/// and `vol(P ∪ C) ≤ vol(V \ (P ∪ C))` in `G`. Guarantees
/// `|E(P, P̄)| ≤ phi_target · vol(P)`.
pub fn sparse_cut_partition(g: &Graph, phi_target: f64) -> Result<Partition> {
    let n = g.n();
    if n > PARTITION_MAX_N {
        return Err(Error::CapacityExceeded { what: "sparse-cut partition", limit: PARTITION_MAX_N, n });
    }
    if phi_target.is_nan() || phi_target < 0.0 {
        return Err(Error::InvalidInput("target conductance must be nonnegative".into()));
    }
    let adj = adjacency_masks(g);
    let total_vol = 2 * g.m();
    let deg_mask = |mask: u32| -> usize {
        (0..n).filter(|&v| mask >> v & 1 == 1).map(|v| g.degree(v)).sum()
    };
    let full: u32 = if n == 0 { 0 } else { u32::MAX >> (32 - n) };
    let mut rest = full;
    let mut p_mask = 0u32;
    let mut pieces = Vec::new();
    while let Some(c) = sparsest_subset(&adj, rest) {
        if c.cut as f64 > phi_target * c.vol as f64 {
            break;
        }
        let vol_new = deg_mask(p_mask | c.mask);
        if 2 * vol_new > total_vol {
            break;
        }
        p_mask |= c.mask;
        rest &= !c.mask;
        pieces.push(VertexSet::from_mask(c.mask as u64));
    }
    let p = VertexSet::from_mask(p_mask as u64);
    let stats = metrics::cut_stats(g, &p)?;
    let remainder = VertexSet::from_mask(rest as u64);
    let sub = g.induced(remainder.members());
    let remainder_conductance = if sub.n() >= 2 && sub.m() > 0 {
        Some(metrics::graph_conductance_bruteforce(&sub)?.value)
    } else {
        None
    };
    Ok(Partition { pieces, p, cut_p: stats.cut_edges, vol_p: stats.vol_s, remainder_conductance })
}

/// Spectral sandwich on the conductance: `1 − μ₂ ≤ Φ(G) ≤ φ(sweep set)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductanceBounds {
    pub lower: f64,
    pub upper: f64,
    pub sweep_set: VertexSet,
}

/// Lower bound from the spectral gap of `N`, upper bound from the best
/// prefix cut of the second eigenvector scaled by `D^{-1/2}`.
pub fn conductance_bounds(g: &Graph) -> Result<ConductanceBounds> {
    let dec = normalized_walk_eigendecomposition(g)?;
    let n = g.n();
    let lower = (1.0 - dec.mu2()).max(0.0);
    let embed: Vec<f64> = (0..n)
        .map(|v| dec.eigenvectors[(v, 1.min(n - 1))] / (g.degree(v) as f64).sqrt())
        .collect();
    let mut order: Vec<VertexId> = (0..n).collect();
    order.sort_by(|&a, &b| embed[a].total_cmp(&embed[b]).then(a.cmp(&b)));
    let total = 2 * g.m();
    let mut inside = vec![false; n];
    let (mut cut, mut vol) = (0usize, 0usize);
    let mut best: Option<(f64, usize)> = None;
    for (k, &v) in order.iter().enumerate().take(n - 1) {
        let into = g.neighbors(v).iter().filter(|&&w| inside[w]).count();
        cut = cut + g.degree(v) - 2 * into;
        vol += g.degree(v);
        inside[v] = true;
        let small = vol.min(total - vol);
        if small == 0 {
            continue;
        }
        let ratio = cut as f64 / small as f64;
        if best.is_none_or(|(b, _)| ratio < b) {
            best = Some((ratio, k));
        }
    }
    let (upper, k) = best.unwrap_or((1.0, 0));
    let prefix: VertexSet = order[..=k].iter().copied().collect();
    let sweep_set = if 2 * metrics::volume(g, &prefix)? <= total {
        prefix
    } else {
        prefix.complement(n)
    };
    Ok(ConductanceBounds { lower, upper, sweep_set })
}
