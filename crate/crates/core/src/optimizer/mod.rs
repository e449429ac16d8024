//! Expected entanglement of stage schedules and their numerical optimization.
//!
//! All searches work in reduced variables: `α ∈ [0, π/4]` (the cost is even in
//! `α` and symmetric under `α ↦ π/2 − α`), `t = tan α`, `b = tan β`. A stage
//! then costs `E(β)`, fails with probability
//! `(b⁴ + t²) / ((1 + b²)(b² + t²))` and leaves `α + arctan(b²/t)` to do.

mod cdkl;
mod search;
mod table;

pub use cdkl::{cdkl_cost, cdkl_power_cost};

use crate::angle::{fold, is_local, reduce};
use crate::linalg::resource_entanglement;
use crate::protocol::{StageKind, StageSchedule};
use crate::{Error, Result};
use search::grid_then_golden;
pub(crate) use search::grid_then_golden as minimize_1d;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_10, LN_2};
use std::sync::OnceLock;
use table::UniformPchip;

/// Smallest tabulated angle; below it costs are extrapolated linearly.
pub const MEMO_MIN_ALPHA: f64 = 1e-8;

/// The β search starts at `ln tan β = ln tan α − 3`; below that a stage
/// almost never succeeds and only moves the target by rounding noise.
const BETA_SPAN_BELOW: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerConfig {
    /// `L`: the last stage is the deterministic one-ebit stage.
    pub max_stages: usize,
    /// Coarse samples of `ln tan β` per minimization.
    pub beta_grid: usize,
    /// Final golden-section bracket width in `ln tan β` (bounds the error in β).
    pub refine_tol: f64,
    /// Memo grid density over `[MEMO_MIN_ALPHA, π/4]`.
    pub points_per_decade: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { max_stages: 25, beta_grid: 1024, refine_tol: 1e-10, points_per_decade: 2048 }
    }
}

impl OptimizerConfig {
    /// A coarse configuration that builds in well under a second.
    pub fn fast() -> Self {
        Self { beta_grid: 256, points_per_decade: 128, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_stages == 0 {
            return Err(Error::InvalidArgument("max_stages must be at least 1".into()));
        }
        if self.beta_grid < 8 {
            return Err(Error::InvalidArgument("beta_grid must be at least 8".into()));
        }
        if !(self.refine_tol > 0.0 && self.refine_tol <= 1e-9) {
            return Err(Error::InvalidArgument(format!("refine_tol must lie in (0, 1e-9], got {}", self.refine_tol)));
        }
        if self.points_per_decade < 4 {
            return Err(Error::InvalidArgument("points_per_decade must be at least 4".into()));
        }
        Ok(())
    }
}

/// Expected resource usage of a schedule.
#[derive(Debug, Clone, Serialize)]
pub struct CostProfile {
    pub alpha: f64,
    pub expected_ebits: f64,
    pub schedule: StageSchedule,
    /// `p(l)`: probability that stage `l` is executed.
    pub stage_reach_probs: Vec<f64>,
    /// Uncompressed: one bit per executed stage.
    pub expected_bits_leader: f64,
    /// Uncompressed, per worker: one bit per executed stage.
    pub expected_bits_worker: f64,
}

/// Analytic expectation over the branch tree of `schedule`.
pub fn expected_cost(schedule: &StageSchedule) -> CostProfile {
    let mut reach = Vec::with_capacity(schedule.stages.len());
    let mut p = 1.0;
    let mut ebits = 0.0;
    for st in &schedule.stages {
        reach.push(p);
        ebits += p * st.entanglement();
        if st.kind == StageKind::Deterministic {
            break;
        }
        p *= 1.0 - st.success_probability();
    }
    let bits: f64 = reach.iter().sum();
    CostProfile {
        alpha: schedule.alpha,
        expected_ebits: ebits,
        schedule: schedule.clone(),
        stage_reach_probs: reach,
        expected_bits_leader: bits,
        expected_bits_worker: bits,
    }
}

/// `h(b²/(1+b²))` without cancellation for small `b`.
fn entanglement_of_tan(b2: f64) -> f64 {
    let p = b2 / (1.0 + b2);
    let q = 1.0 / (1.0 + b2);
    let ln_q = -b2.ln_1p();
    let plog = if p > 0.0 { p * p.ln() } else { 0.0 };
    -(plog + q * ln_q) / LN_2
}

/// Cost of one stage at reduced angle `alpha` (`t = tan alpha`) with
/// `b = exp(ln_b)`, given the cost `next` of the remaining chain.
#[inline]
fn stage_value(alpha: f64, t: f64, ln_b: f64, next: &impl Fn(f64) -> f64) -> f64 {
    let b2 = (2.0 * ln_b).exp();
    let t2 = t * t;
    let pf = (b2 * b2 + t2) / ((1.0 + b2) * (b2 + t2));
    entanglement_of_tan(b2) + pf * next(reduce(alpha + (b2 / t).atan()))
}

/// Cost-to-go tables `G_k`, `k = 1..L−2`, where `G_k(α)` is the optimal cost
/// with `k + 1` stages available (`G_0 = 1`).
#[derive(Debug, Clone)]
pub struct CostOptimizer {
    config: OptimizerConfig,
    grid: Vec<f64>,
    tables: Vec<UniformPchip>,
}

/// Optimal choice for one stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageChoice {
    /// Resource parameter for the reduced angle, in `(0, π/2)`.
    pub beta: f64,
    pub value: f64,
}

impl CostOptimizer {
    pub fn new(config: OptimizerConfig) -> Result<Self> {
        config.validate()?;
        let ln_min = MEMO_MIN_ALPHA.ln();
        let ln_max = FRAC_PI_4.ln();
        let decades = (ln_max - ln_min) / LN_10;
        let intervals = (decades * config.points_per_decade as f64).ceil() as usize;
        let h = (ln_max - ln_min) / intervals as f64;
        let mut grid: Vec<f64> = (0..=intervals).map(|i| (ln_min + h * i as f64).exp()).collect();
        grid[intervals] = FRAC_PI_4;
        let mut opt = Self { config, grid, tables: Vec::new() };
        for k in 1..=opt.config.max_stages.saturating_sub(2) {
            let ratios = opt.grid.iter().map(|&a| opt.minimize(a, k - 1).1 / a).collect();
            opt.tables.push(UniformPchip::new(ln_min, h, ratios));
        }
        Ok(opt)
    }

    /// The default configuration, built once per process.
    pub fn shared_default() -> &'static CostOptimizer {
        static SHARED: OnceLock<CostOptimizer> = OnceLock::new();
        SHARED.get_or_init(|| CostOptimizer::new(OptimizerConfig::default()).expect("default config is valid"))
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    /// Tabulated angles.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// `G_k` at a reduced angle.
    fn cost_to_go(&self, k: usize, alpha: f64) -> f64 {
        if is_local(alpha) {
            return 0.0;
        }
        if k == 0 {
            return 1.0;
        }
        let table = &self.tables[k - 1];
        if alpha <= MEMO_MIN_ALPHA {
            return table.values()[0] * alpha;
        }
        table.eval(alpha.ln()) * alpha
    }

    /// Minimizes over the full β range; returns `(ln tan β, value)`.
    fn minimize(&self, alpha: f64, next_level: usize) -> (f64, f64) {
        let t = alpha.tan();
        let next = |x: f64| self.cost_to_go(next_level, x);
        let mut f = |ln_b: f64| stage_value(alpha, t, ln_b, &next);
        let lo = t.ln() - BETA_SPAN_BELOW;
        let hi = 100f64.ln();
        let best = grid_then_golden(lo, hi, self.config.beta_grid, self.config.refine_tol, &mut f);
        let det = f(0.0);
        if det <= best.1 {
            (0.0, det)
        } else {
            best
        }
    }

    /// Best stage for reduced angle `alpha` when `stages_left` stages
    /// (including this one) remain.
    pub fn best_stage(&self, alpha: f64, stages_left: usize) -> StageChoice {
        let alpha = reduce(alpha);
        if stages_left <= 1 || is_local(alpha) {
            return StageChoice { beta: FRAC_PI_4, value: if is_local(alpha) { 0.0 } else { 1.0 } };
        }
        let (ln_b, value) = self.minimize(alpha, stages_left - 2);
        StageChoice { beta: ln_b.exp().atan(), value }
    }

    /// Optimal expected entanglement `𝓔(α)` with `max_stages` stages.
    pub fn value(&self, alpha: f64) -> f64 {
        self.best_stage(alpha, self.config.max_stages).value
    }

    /// Table value `G_k(α)` (used for consistency checks).
    pub fn tabulated(&self, stages: usize, alpha: f64) -> f64 {
        match stages {
            0 => 0.0,
            s => self.cost_to_go(s - 1, reduce(alpha)),
        }
    }

    /// Extracts the optimal schedule for `alpha` and evaluates it exactly.
    pub fn optimize_schedule(&self, alpha: f64) -> Result<CostProfile> {
        if !alpha.is_finite() {
            return Err(Error::AngleOutOfDomain { angle: alpha, domain: "finite angles" });
        }
        Ok(expected_cost(&self.schedule_with_stages(alpha, self.config.max_stages)?))
    }

    /// Optimal chain when at most `stages` (≤ `max_stages`) stages may run.
    pub fn schedule_with_stages(&self, alpha: f64, stages: usize) -> Result<StageSchedule> {
        if stages == 0 || stages > self.config.max_stages {
            return Err(Error::InvalidArgument(format!(
                "stages must be in 1..={}, got {stages}",
                self.config.max_stages
            )));
        }
        StageSchedule::build(alpha, stages, |index, a| lift_beta(a, self.best_stage(a, stages + 1 - index).beta))
    }

    /// `[𝓔(A) + Σ_{k≥1} 2^k E(A 2^{-k})] / A`, the tail truncated once a term
    /// of the normalized series drops below `tail_tol`.
    pub fn asymptotic_bound(&self, a: f64, tail_tol: f64) -> Result<f64> {
        if !(a > 0.0 && a <= FRAC_PI_4) {
            return Err(Error::AngleOutOfDomain { angle: a, domain: "(0, π/4]" });
        }
        let head = self.optimize_schedule(a)?.expected_ebits;
        Ok(head / a + doubling_tail(a, tail_tol) / a)
    }

    /// Rows `(α, optimized, CDKL)`.
    pub fn sweep(&self, alphas: &[f64]) -> Result<Vec<CurveRow>> {
        alphas
            .iter()
            .map(|&a| {
                if !(a > 0.0 && a <= FRAC_PI_4) {
                    return Err(Error::AngleOutOfDomain { angle: a, domain: "(0, π/4]" });
                }
                Ok(CurveRow { alpha: a, optimized: self.optimize_schedule(a)?.expected_ebits, cdkl: cdkl_cost(a)? })
            })
            .collect()
    }
}

/// `Σ_{k≥1} 2^k E(a 2^{-k})`, stopping after the first term below `tail_tol·a`.
pub fn doubling_tail(a: f64, tail_tol: f64) -> f64 {
    let mut sum = 0.0;
    let mut scale = 1.0;
    loop {
        scale *= 2.0;
        let term = scale * resource_entanglement(a / scale);
        sum += term;
        if term < tail_tol * a || scale > 1e300 {
            break;
        }
    }
    sum
}

/// Maps a β chosen for `reduce(alpha)` back to the actual angle.
pub(crate) fn lift_beta(alpha: f64, beta_reduced: f64) -> f64 {
    let a = fold(alpha);
    let beta = if a.abs() <= FRAC_PI_4 { beta_reduced } else { FRAC_PI_2 - beta_reduced };
    beta.copysign(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub alpha: f64,
    pub optimized: f64,
    pub cdkl: f64,
}

/// Optimizes with `config`, reusing the process-wide table for the default.
pub fn optimize_schedule(alpha: f64, config: &OptimizerConfig) -> Result<CostProfile> {
    if *config == OptimizerConfig::default() {
        CostOptimizer::shared_default().optimize_schedule(alpha)
    } else {
        CostOptimizer::new(config.clone())?.optimize_schedule(alpha)
    }
}

pub fn asymptotic_bound(a: f64, tail_tol: f64) -> Result<f64> {
    CostOptimizer::shared_default().asymptotic_bound(a, tail_tol)
}

pub fn sweep_entanglement_curve(alphas: &[f64]) -> Result<Vec<CurveRow>> {
    CostOptimizer::shared_default().sweep(alphas)
}
