use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkMode {
    /// Propagate exact probability mass (double-double precision).
    Exact,
    /// Propagate sampled walk counts.
    Sampled,
}

impl FromStr for WalkMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(WalkMode::Exact),
            "sampled" => Ok(WalkMode::Sampled),
            _ => Err(Error::InvalidInput(format!("unknown mode `{s}` (exact|sampled)"))),
        }
    }
}

impl fmt::Display for WalkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WalkMode::Exact => "exact",
            WalkMode::Sampled => "sampled",
        })
    }
}

/// Floor on a nonzero walk estimate below which a vertex rejects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RejectThreshold {
    /// `2 m⁻²`.
    Paper,
    Value(f64),
}

/// Ceiling on the aggregated discrepancy `s_v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AcceptThreshold {
    /// `Paper` in exact mode, `Mixing` in sampled mode.
    Auto,
    /// `m⁻¹⁵`.
    Paper,
    /// `(1 − Φ²/2)^{2ℓ}`, plus `3η²` with `η = sqrt(ln 200 / 2N)` in
    /// sampled mode.
    Mixing,
    /// An explicit natural-log value.
    Ln(f64),
}

impl FromStr for RejectThreshold {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "paper" {
            return Ok(RejectThreshold::Paper);
        }
        match s.parse::<f64>() {
            Ok(x) if x > 0.0 => Ok(RejectThreshold::Value(x)),
            _ => Err(Error::InvalidInput(format!("reject threshold `{s}`: expected `paper` or a positive number"))),
        }
    }
}

impl fmt::Display for RejectThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectThreshold::Paper => f.write_str("paper"),
            RejectThreshold::Value(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for AcceptThreshold {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(AcceptThreshold::Auto),
            "paper" => Ok(AcceptThreshold::Paper),
            "mixing" => Ok(AcceptThreshold::Mixing),
            _ => s
                .strip_prefix("ln:")
                .and_then(|x| x.parse::<f64>().ok())
                .filter(|x| !x.is_nan())
                .map(AcceptThreshold::Ln)
                .ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "accept threshold `{s}`: expected auto, paper, mixing or ln:<value>"
                    ))
                }),
        }
    }
}

impl fmt::Display for AcceptThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcceptThreshold::Auto => f.write_str("auto"),
            AcceptThreshold::Paper => f.write_str("paper"),
            AcceptThreshold::Mixing => f.write_str("mixing"),
            AcceptThreshold::Ln(x) => write!(f, "ln:{x}"),
        }
    }
}

macro_rules! string_serde {
    ($t:ty) => {
        impl TryFrom<String> for $t {
            type Error = Error;
            fn try_from(s: String) -> Result<Self> {
                s.parse()
            }
        }
        impl From<$t> for String {
            fn from(x: $t) -> String {
                x.to_string()
            }
        }
    };
}
string_serde!(RejectThreshold);
string_serde!(AcceptThreshold);

/// Tunable constants of the tester. `None` depths take the default
/// formulas in `n`; see [`TesterConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TesterConfig {
    pub phi: f64,
    pub eps: f64,
    /// Default `⌈(6/Φ) ln n⌉`.
    pub bfs_depth: Option<usize>,
    /// Default `⌈(12/Φ) ln n⌉`.
    pub aggregate_depth: Option<usize>,
    /// Default `⌈(40/Φ²) ln n⌉`.
    pub walk_length: Option<usize>,
    /// Walks per source in sampled mode.
    pub walk_count: u64,
    /// Vertex `v` is marked with probability `min(1, scale·d(v)/(2εm))`.
    pub sample_scale: f64,
    /// Default `⌊10·scale/ε⌋`.
    pub set_cap: Option<usize>,
    pub reject_threshold: RejectThreshold,
    pub accept_threshold: AcceptThreshold,
    pub mode: WalkMode,
    pub seed: u64,
    /// Per-message budget is `congestion_lanes · ⌈log2(n+m)⌉` bits.
    pub congestion_lanes: usize,
    /// Abort on the first over-budget message instead of recording it.
    pub strict: bool,
    /// The `n` every vertex is told; defaults to the true vertex count.
    pub declared_n: Option<usize>,
}

impl Default for TesterConfig {
    fn default() -> Self {
        TesterConfig {
            phi: 0.5,
            eps: 0.5,
            bfs_depth: None,
            aggregate_depth: None,
            walk_length: None,
            walk_count: 1_000_000,
            sample_scale: 1.0,
            set_cap: None,
            reject_threshold: RejectThreshold::Paper,
            accept_threshold: AcceptThreshold::Auto,
            mode: WalkMode::Exact,
            seed: 0,
            congestion_lanes: 512,
            strict: false,
            declared_n: None,
        }
    }
}

/// Concrete round counts and caps for a given network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub n: usize,
    pub m: usize,
    pub bfs_depth: usize,
    pub aggregate_depth: usize,
    pub walk_length: usize,
    pub set_cap: usize,
    pub reject_threshold: f64,
    /// Natural log of the acceptance ceiling.
    pub log_accept: f64,
}

impl Schedule {
    /// Round at which the tree-registration messages are read.
    pub fn registration_round(&self) -> usize {
        self.bfs_depth + 2
    }

    pub fn count_start(&self) -> usize {
        self.registration_round()
    }

    pub fn sample_start(&self) -> usize {
        self.count_start() + 2 * self.aggregate_depth
    }

    pub fn walk_start(&self) -> usize {
        self.sample_start() + 2 * self.aggregate_depth
    }

    pub fn discrepancy_start(&self) -> usize {
        self.walk_start() + self.walk_length
    }

    /// Round in which every surviving vertex decides and halts.
    pub fn final_round(&self) -> usize {
        self.discrepancy_start() + 2 * self.aggregate_depth
    }
}

fn ceil_at_least_one(x: f64) -> usize {
    (x.ceil() as usize).max(1)
}

impl TesterConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.into()));
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            return bad("phi must lie in (0, 1]");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad("eps must lie in (0, 1)");
        }
        if !(self.sample_scale >= 0.0 && self.sample_scale.is_finite()) {
            return bad("sample_scale must be a nonnegative number");
        }
        if self.walk_count == 0 && self.mode == WalkMode::Sampled {
            return bad("walk_count must be positive in sampled mode");
        }
        if [self.bfs_depth, self.aggregate_depth, self.walk_length].contains(&Some(0)) {
            return bad("depths and walk length must be at least 1");
        }
        if self.congestion_lanes == 0 {
            return bad("congestion_lanes must be positive");
        }
        Ok(())
    }

    /// Fills in defaults for a network with `n` vertices (as declared) and
    /// `m` edges.
    pub fn resolve(&self, n: usize, m: usize) -> Result<Schedule> {
        self.validate()?;
        let ln_n = (n.max(2) as f64).ln();
        let phi = self.phi;
        let walk_length = self
            .walk_length
            .unwrap_or_else(|| ceil_at_least_one(40.0 / (phi * phi) * ln_n));
        let mf = m.max(1) as f64;
        let reject_threshold = match self.reject_threshold {
            RejectThreshold::Paper => 2.0 / (mf * mf),
            RejectThreshold::Value(x) => x,
        };
        let mixing = 2.0 * walk_length as f64 * (1.0 - phi * phi / 2.0).ln();
        let log_accept = match (self.accept_threshold, self.mode) {
            (AcceptThreshold::Ln(x), _) => x,
            (AcceptThreshold::Paper, _) | (AcceptThreshold::Auto, WalkMode::Exact) => -15.0 * mf.ln(),
            (AcceptThreshold::Mixing, WalkMode::Exact) => mixing,
            (AcceptThreshold::Mixing | AcceptThreshold::Auto, WalkMode::Sampled) => {
                let eta_sq = (200f64).ln() / (2.0 * self.walk_count as f64);
                log_add_exp(mixing, (3.0 * eta_sq).ln())
            }
        };
        Ok(Schedule {
            n,
            m,
            bfs_depth: self.bfs_depth.unwrap_or_else(|| ceil_at_least_one(6.0 / phi * ln_n)),
            aggregate_depth: self
                .aggregate_depth
                .unwrap_or_else(|| ceil_at_least_one(12.0 / phi * ln_n)),
            walk_length,
            set_cap: self
                .set_cap
                .unwrap_or_else(|| (10.0 * self.sample_scale / self.eps).floor() as usize),
            reject_threshold,
            log_accept,
        })
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}
