//! JSON wire types for the HTTP service and the `cluster` subcommand.
//!
//! Every top-level body carries `"v": 1`. Field names are snake_case. The
//! same shapes are described in `schema/api.v1.schema.json`.

use lgc::{Algorithm, DiffusionParams, Error, VertexId};
use serde::{Deserialize, Serialize};

pub const API_VERSION: u32 = 1;

fn version() -> u32 {
    API_VERSION
}

fn yes() -> bool {
    true
}

/// Parameters mirror [`DiffusionParams`]; absent fields take its defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterRequest {
    pub algorithm: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taylor_degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_walks: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_walk_len: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hkpr_threshold_uses_exp_t: Option<bool>,
    #[serde(default = "yes")]
    pub run_sweep: bool,
    /// Use the single-threaded reference kernels.
    #[serde(default)]
    pub sequential: bool,
    /// Also sweep the intermediate `p` after every round.
    #[serde(default)]
    pub sweep_each_iteration: bool,
}

/// Spellings accepted in `ClusterRequest::algorithm`. The schema's enum lists the same strings.
pub const ALGORITHM_NAMES: [&str; 13] = [
    "nibble",
    "pr_nibble",
    "pr-nibble",
    "pr_nibble_original",
    "pr-nibble-original",
    "pr_nibble_opt",
    "pr-nibble-opt",
    "pr_nibble_optimized",
    "pr-nibble-optimized",
    "hkpr",
    "rand_hkpr",
    "rand-hkpr",
    "rand_hk_pr",
];

fn check(ok: bool, field: &str, rule: &str) -> Result<(), ApiError> {
    if ok {
        Ok(())
    } else {
        Err(ApiError::bad_request("invalid_param", format!("{field} {rule}"), Some(field)))
    }
}

impl ClusterRequest {
    /// Builds diffusion parameters and checks their ranges. Every field that is
    /// present must be in range, whether or not the chosen algorithm reads it.
    /// Seed range is checked later against the loaded graph.
    pub fn to_params(&self) -> Result<DiffusionParams, ApiError> {
        if !ALGORITHM_NAMES.contains(&self.algorithm.as_str()) {
            return Err(ApiError::bad_request(
                "invalid_param",
                format!("unknown algorithm `{}`", self.algorithm),
                Some("algorithm"),
            ));
        }
        let algorithm: Algorithm = self.algorithm.parse().map_err(ApiError::from)?;
        let positive = |x: Option<f64>| x.is_none_or(|x| x > 0.0 && x.is_finite());
        check(self.alpha.is_none_or(|a| a > 0.0 && a < 1.0), "alpha", "must lie strictly between 0 and 1")?;
        check(positive(self.epsilon), "epsilon", "must be a finite value > 0")?;
        check(positive(self.t), "t", "must be a finite value > 0")?;
        check(self.max_iters != Some(0), "max_iters", "must be >= 1")?;
        check(self.taylor_degree != Some(0), "taylor_degree", "must be >= 1")?;
        check(self.num_walks != Some(0), "num_walks", "must be >= 1")?;
        let d = DiffusionParams::default();
        let params = DiffusionParams {
            algorithm,
            seed: self.seed,
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            alpha: self.alpha.unwrap_or(d.alpha),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            t: self.t.unwrap_or(d.t),
            taylor_degree: self.taylor_degree.unwrap_or(d.taylor_degree),
            num_walks: self.num_walks.unwrap_or(d.num_walks),
            max_walk_len: self.max_walk_len.unwrap_or(d.max_walk_len),
            rng_seed: self.rng_seed.unwrap_or(d.rng_seed),
            hkpr_threshold_uses_exp_t: self.hkpr_threshold_uses_exp_t.unwrap_or(false),
        };
        params.validate_ranges()?;
        Ok(params)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub prefix_size: usize,
    pub conductance: f64,
}

/// Best cut of one intermediate vector. `conductance` is `None` when nothing was sweepable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationSweep {
    pub iteration: u64,
    pub best_prefix_size: usize,
    pub conductance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    pub iterations: u64,
    pub push_count: u64,
    pub pushed_volume: u64,
    pub edges_touched: u64,
    pub entries_created: u64,
}

/// `|p|_1 + |r|_1` after a PR-Nibble run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassCheck {
    pub p_mass: f64,
    pub residual_mass: f64,
    pub conserved: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub diffusion: f64,
    pub sweep: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterResponse {
    #[serde(default = "version")]
    pub v: u32,
    pub algorithm: Algorithm,
    pub params: DiffusionParams,
    /// Sorted vertex ids. The best sweep prefix, or the support of `p` without a sweep.
    pub cluster: Vec<VertexId>,
    /// `None` iff `cluster` is empty.
    pub conductance: Option<f64>,
    pub cluster_volume: u64,
    /// Nonzero entries of `p`.
    pub support_size: usize,
    pub sweep_curve: Vec<CurvePoint>,
    /// 1-based prefix size of the chosen cut, when a sweep ran.
    pub best_prefix_size: Option<usize>,
    pub counters: Counters,
    pub mass_check: Option<MassCheck>,
    /// Empty unless `sweep_each_iteration` was requested.
    pub iteration_sweeps: Vec<IterationSweep>,
    pub wall_time_ms: Timings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRequest {
    /// `[vertex, mass]` pairs.
    pub entries: Vec<(u64, f64)>,
    #[serde(default)]
    pub sequential: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResponse {
    #[serde(default = "version")]
    pub v: u32,
    pub order: Vec<VertexId>,
    pub prefix_volume: Vec<u64>,
    pub prefix_crossing: Vec<u64>,
    pub prefix_conductance: Vec<f64>,
    /// 0-based index into `order` of the last vertex of the best prefix.
    pub best_index: usize,
    pub best_set: Vec<VertexId>,
    pub best_conductance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeBucket {
    pub min_degree: u64,
    pub max_degree: u64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    #[serde(default = "version")]
    pub v: u32,
    pub n: u64,
    pub m: u64,
    pub max_degree: u64,
    /// Buckets `{0}`, `{1}`, `[2,3]`, `[4,7]`, ... Empty buckets are omitted.
    pub degree_histogram: Vec<DegreeBucket>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborsResponse {
    #[serde(default = "version")]
    pub v: u32,
    pub vertex: VertexId,
    pub degree: u64,
    pub neighbors: Vec<VertexId>,
    pub truncated: bool,
}

/// Error body: `{"v":1,"code":...,"message":...,"field":...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(default = "version")]
    pub v: u32,
    pub code: String,
    pub message: String,
    pub field: Option<String>,
    #[serde(skip)]
    pub status: u16,
}

impl ApiError {
    pub fn bad_request(code: &str, message: impl Into<String>, field: Option<&str>) -> Self {
        ApiError {
            v: API_VERSION,
            code: code.to_string(),
            message: message.into(),
            field: field.map(str::to_string),
            status: 400,
        }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.field {
            Some(field) => write!(f, "{} ({field}): {}", self.code, self.message),
            None => write!(f, "{}: {}", self.code, self.message),
        }
    }
}

impl std::error::Error for ApiError {}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let field = e.field();
        let (code, status) = match &e {
            Error::InvalidParam { .. } => ("invalid_param", 400),
            Error::VertexOutOfRange { .. } => ("out_of_range", 400),
            Error::EmptySweep => ("empty_sweep", 400),
            Error::EmptySet => ("empty_set", 400),
            Error::WorkBoundExceeded { .. } => ("work_bound_exceeded", 500),
            Error::Parse { .. } | Error::Format(_) | Error::Io(_) => ("internal", 500),
        };
        ApiError {
            v: API_VERSION,
            code: code.to_string(),
            message: e.to_string(),
            field: field.map(str::to_string),
            status,
        }
    }
}
