//! Seed diffusions producing the mass vector handed to the sweep cut.
//!
//! | algorithm | sequential mode | parallel mode |
//! |-----------|-----------------|---------------|
//! | Nibble | same frontier loop, run serially | `vertex_map` + `edge_map` per iteration |
//! | PR-Nibble | FIFO queue of above-threshold vertices | all above-threshold vertices pushed per iteration |
//! | HK-PR | FIFO queue of `(vertex, level)` entries | one frontier per level |
//! | rand-HK-PR | walks run one after another | walks run concurrently |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontier::Execution;
use crate::graph::{Graph, VertexId};
use crate::sparse::SparseVec;

mod hkpr;
mod nibble;
mod pr_nibble;
mod rand_hkpr;

pub use hkpr::{compute_psi, hkpr, hkpr_with, PsiTable};
pub use nibble::{nibble, nibble_with};
pub use pr_nibble::{pr_nibble, pr_nibble_with, PushRule};
pub use rand_hkpr::{
    rand_hkpr, sample_endpoints, sample_walk_length, tally_endpoints, walk_length_pmf, walk_rng,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Nibble,
    #[serde(alias = "pr_nibble", alias = "pr-nibble")]
    PrNibbleOriginal,
    #[serde(alias = "pr_nibble_opt", alias = "pr-nibble-opt")]
    PrNibbleOptimized,
    Hkpr,
    #[serde(alias = "rand-hkpr")]
    RandHkpr,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Nibble,
        Algorithm::PrNibbleOriginal,
        Algorithm::PrNibbleOptimized,
        Algorithm::Hkpr,
        Algorithm::RandHkpr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nibble => "nibble",
            Algorithm::PrNibbleOriginal => "pr_nibble_original",
            Algorithm::PrNibbleOptimized => "pr_nibble_optimized",
            Algorithm::Hkpr => "hkpr",
            Algorithm::RandHkpr => "rand_hkpr",
        }
    }

    pub fn is_pr_nibble(self) -> bool {
        matches!(self, Algorithm::PrNibbleOriginal | Algorithm::PrNibbleOptimized)
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "nibble" => Ok(Algorithm::Nibble),
            "pr_nibble" | "pr_nibble_original" | "pr_nibble_orig" => Ok(Algorithm::PrNibbleOriginal),
            "pr_nibble_opt" | "pr_nibble_optimized" => Ok(Algorithm::PrNibbleOptimized),
            "hkpr" | "hk_pr" => Ok(Algorithm::Hkpr),
            "rand_hkpr" | "rand_hk_pr" => Ok(Algorithm::RandHkpr),
            other => Err(Error::param("algorithm", format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Algorithm selector plus every tunable. Only the fields the selected
/// algorithm reads are validated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiffusionParams {
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Truncation / push threshold per unit degree.
    pub epsilon: f64,
    /// Teleportation probability (PR-Nibble).
    pub alpha: f64,
    /// Iteration cap T (Nibble).
    pub max_iters: u32,
    /// Heat-kernel temperature (HK-PR, rand-HK-PR).
    pub t: f64,
    /// Taylor degree N (HK-PR).
    pub taylor_degree: u32,
    /// Number of random walks (rand-HK-PR).
    pub num_walks: u64,
    /// Maximum walk length K (rand-HK-PR).
    pub max_walk_len: u32,
    pub rng_seed: u64,
    /// Use `e^t` instead of `e^-t` in the HK-PR push threshold.
    pub hkpr_threshold_uses_exp_t: bool,
}

impl Default for DiffusionParams {
    fn default() -> Self {
        DiffusionParams {
            algorithm: Algorithm::PrNibbleOptimized,
            seed: 0,
            epsilon: 1e-7,
            alpha: 0.01,
            max_iters: 20,
            t: 10.0,
            taylor_degree: 20,
            num_walks: 100_000,
            max_walk_len: 10,
            rng_seed: 0,
            hkpr_threshold_uses_exp_t: false,
        }
    }
}

impl DiffusionParams {
    /// Checks the fields used by `algorithm` and returns the seed as a vertex id.
    pub fn validate(&self, g: &Graph) -> Result<VertexId> {
        self.validate_ranges()?;
        g.check_vertex(self.seed)
    }

    /// Graph-independent range checks.
    pub fn validate_ranges(&self) -> Result<()> {
        use Algorithm::*;
        let needs_epsilon = !matches!(self.algorithm, RandHkpr);
        if needs_epsilon && !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::param("epsilon", "must be a finite value > 0"));
        }
        match self.algorithm {
            Nibble => {
                if self.max_iters < 1 {
                    return Err(Error::param("max_iters", "must be >= 1"));
                }
            }
            PrNibbleOriginal | PrNibbleOptimized => {
                if !(self.alpha > 0.0 && self.alpha < 1.0) {
                    return Err(Error::param("alpha", "must lie strictly between 0 and 1"));
                }
            }
            Hkpr => {
                if !(self.t > 0.0 && self.t.is_finite()) {
                    return Err(Error::param("t", "must be a finite value > 0"));
                }
                if self.taylor_degree < 1 {
                    return Err(Error::param("taylor_degree", "must be >= 1"));
                }
            }
            RandHkpr => {
                if !(self.t > 0.0 && self.t.is_finite()) {
                    return Err(Error::param("t", "must be a finite value > 0"));
                }
                if self.num_walks < 1 {
                    return Err(Error::param("num_walks", "must be >= 1"));
                }
            }
        }
        Ok(())
    }

    /// `1 / (alpha * epsilon)`, the PR-Nibble bound on total pushed volume.
    pub fn work_bound(&self) -> f64 {
        1.0 / (self.alpha * self.epsilon)
    }
}

/// The diffusion output plus work counters.
#[derive(Clone, Debug)]
pub struct DiffusionResult {
    pub p: SparseVec,
    /// Final residual vector (PR-Nibble only).
    pub residual: Option<SparseVec>,
    /// Parallel rounds, or individual pushes for the queue-based sequential modes.
    pub iterations: u64,
    /// Vertices pushed (frontier sizes summed), or walks for rand-HK-PR.
    pub push_count: u64,
    /// Sum of `d(v)` over every push.
    pub pushed_volume: u64,
    /// `edge_map` callbacks, or walk steps for rand-HK-PR.
    pub edges_touched: u64,
    /// Keys created across every state vector (`p`, residuals, next-iteration buffers).
    pub entries_created: u64,
    pub params: DiffusionParams,
    pub execution: Execution,
}

impl DiffusionResult {
    fn new(params: &DiffusionParams, execution: Execution) -> Self {
        DiffusionResult {
            p: SparseVec::new(),
            residual: None,
            iterations: 0,
            push_count: 0,
            pushed_volume: 0,
            edges_touched: 0,
            entries_created: 0,
            params: params.clone(),
            execution,
        }
    }

    /// Result for a seed without neighbors: all mass stays on the seed.
    fn isolated_seed(seed: VertexId, params: &DiffusionParams, execution: Execution) -> Self {
        let mut r = Self::new(params, execution);
        r.p = SparseVec::from_entries([(seed, 1.0)]);
        r.entries_created = 1;
        if params.algorithm.is_pr_nibble() {
            r.residual = Some(SparseVec::new());
        }
        r
    }
}

/// State visible to an observer after each iteration (or push, in queue modes).
pub struct IterationView<'a> {
    pub iteration: u64,
    /// Current mass vector. For Nibble, the freshly computed next vector.
    pub p: &'a SparseVec,
    /// Current residual, where the algorithm has one.
    pub residual: Option<&'a SparseVec>,
    /// Vertices selected to be processed next (Nibble, parallel PR-Nibble, HK-PR)
    /// or the vertex just pushed (sequential PR-Nibble).
    pub frontier: &'a [VertexId],
}

pub type Observer<'o> = &'o mut dyn FnMut(&IterationView<'_>);

/// Runs the selected diffusion.
pub fn run(g: &Graph, params: &DiffusionParams, exec: Execution) -> Result<DiffusionResult> {
    run_with(g, params, exec, &mut |_| {})
}

pub fn run_with(
    g: &Graph,
    params: &DiffusionParams,
    exec: Execution,
    observer: Observer<'_>,
) -> Result<DiffusionResult> {
    match params.algorithm {
        Algorithm::Nibble => nibble_with(g, params, exec, observer),
        Algorithm::PrNibbleOriginal | Algorithm::PrNibbleOptimized => {
            pr_nibble_with(g, params, exec, observer)
        }
        Algorithm::Hkpr => hkpr_with(g, params, exec, observer),
        Algorithm::RandHkpr => rand_hkpr(g, params, exec),
    }
}
