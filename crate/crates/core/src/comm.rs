//! Classical communication: typical-set compression of worker messages, the
//! leader's branch announcements, and the single-stage scheme that minimizes
//! the leader's traffic.

use crate::angle::{is_local, reduce};
use crate::linalg::{apply_local, h, project_subsystem, StateVector, C64};
use crate::optimizer::{expected_cost, lift_beta, CostProfile};
use crate::protocol::{StageKind, StageSchedule};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_4, PI};

/// Longest block enumerated exhaustively.
pub const MAX_BLOCK: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommProfile {
    pub alpha: f64,
    /// Per use, for each of parties 1..N−1.
    pub worker_bits_rate: f64,
    /// Per use, party N.
    pub leader_bits_rate: f64,
    pub delta: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypicalSetReport {
    pub block_len: usize,
    pub p: f64,
    pub delta: f64,
    pub set_size: u64,
    pub mass: f64,
}

impl TypicalSetReport {
    /// `log₂` of the size bound `2^{M(h(p)+δ)}`.
    pub fn log2_bound(&self) -> f64 {
        self.block_len as f64 * (h(self.p) + self.delta)
    }
}

fn check_block(m: usize, p: f64) -> Result<()> {
    if m > MAX_BLOCK {
        return Err(Error::BlockTooLong(m));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(())
}

/// `log₂ Pr` of a sequence with `ones` ones, `−∞` for impossible ones.
fn log2_prob(m: usize, ones: u32, p: f64) -> f64 {
    let k = ones as f64;
    let z = (m as f64) - k;
    let term = |count: f64, q: f64| if count == 0.0 { 0.0 } else { count * q.log2() };
    term(k, p) + term(z, 1.0 - p)
}

fn is_typical(m: usize, ones: u32, p: f64, delta: f64) -> bool {
    let lp = log2_prob(m, ones, p);
    lp.is_finite() && (-lp / m as f64 - h(p)).abs() <= delta + 1e-12
}

/// Sequences whose per-symbol log-probability is within `delta` of `h(p)`,
/// by enumeration of all `2^M` sequences.
pub fn typical_set(m: usize, p: f64, delta: f64) -> Result<TypicalSetReport> {
    check_block(m, p)?;
    let mut size = 0u64;
    let mut mass = 0.0;
    for seq in 0u64..1 << m {
        let ones = seq.count_ones();
        if is_typical(m, ones, p, delta) {
            size += 1;
            mass += log2_prob(m, ones, p).exp2();
        }
    }
    Ok(TypicalSetReport { block_len: m, p, delta, set_size: size, mass })
}

/// Size of the smallest set of sequences with total probability `≥ 1 − epsilon`.
pub fn smallest_high_probability_set(m: usize, p: f64, epsilon: f64) -> Result<u64> {
    check_block(m, p)?;
    let mut probs: Vec<f64> = (0u64..1 << m).map(|s| log2_prob(m, s.count_ones(), p).exp2()).collect();
    probs.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut mass = 0.0;
    for (i, q) in probs.iter().enumerate() {
        mass += q;
        if mass >= 1.0 - epsilon {
            return Ok(i as u64 + 1);
        }
    }
    Ok(probs.len() as u64)
}

/// `|⟨Ψ̃|Ψ⟩|²` for `M` copies of `cos β|0⟩ + i sin β|1⟩` truncated to the typical set.
pub fn compressed_state_fidelity(m: usize, beta: f64, delta: f64) -> Result<f64> {
    let (s, c) = beta.sin_cos();
    let p = s * s;
    check_block(m, p)?;
    let mut kept = 0.0;
    let mut overlap = C64::new(0.0, 0.0);
    for seq in 0u64..1 << m {
        let ones = seq.count_ones();
        if !is_typical(m, ones, p, delta) {
            continue;
        }
        let amp = C64::new(0.0, s).powu(ones) * c.powi(m as i32 - ones as i32);
        kept += amp.norm_sqr();
        overlap += amp.conj() * amp;
    }
    if kept == 0.0 {
        return Ok(0.0);
    }
    Ok((overlap / kept.sqrt()).norm_sqr())
}

/// Forced-outcome simulation of the joint Fourier measurement over the
/// typical set: parties 1..N−1 measure `outcomes`, party N undoes the phase
/// `ω^{S·k}` with `S` the outcome sum mod `|S|`. Returns the outcome
/// probability and the distance of the leader's state (with a reference copy
/// of the sequence label) from the ideal `Σ μ_k |k⟩|k⟩`.
pub fn joint_measurement_check(
    m: usize,
    beta: f64,
    delta: f64,
    parties: usize,
    outcomes: &[usize],
) -> Result<(f64, f64)> {
    if m > 8 {
        return Err(Error::BlockTooLong(m));
    }
    if parties < 2 || outcomes.len() != parties - 1 {
        return Err(Error::InvalidArgument("one outcome per worker required".into()));
    }
    let (s, c) = beta.sin_cos();
    let p = s * s;
    let amps: Vec<C64> = (0u64..1 << m)
        .filter(|q| is_typical(m, q.count_ones(), p, delta))
        .map(|q| C64::new(0.0, s).powu(q.count_ones()) * c.powi(m as i32 - q.count_ones() as i32))
        .collect();
    let n = amps.len();
    if outcomes.iter().any(|&o| o >= n) {
        return Err(Error::InvalidArgument(format!("outcome out of range for a set of size {n}")));
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    // every party plus a reference register holds the label k
    let dims = vec![n; parties + 1];
    let total = n.pow(parties as u32 + 1);
    let mut joint = DVector::zeros(total);
    let stride: usize = (0..=parties).map(|j| n.pow(j as u32)).sum();
    for (k, a) in amps.iter().enumerate() {
        joint[k * stride] = a / norm;
    }
    let mut state = StateVector::new(dims, joint)?;
    let omega = |e: usize| C64::from_polar(1.0, 2.0 * PI * (e % n) as f64 / n as f64);
    let scale = 1.0 / (n as f64).sqrt();
    let mut prob = 1.0;
    for &o in outcomes {
        let fourier: Vec<C64> = (0..n).map(|k| omega(o * k) * scale).collect();
        let onto = StateVector::from_slice(vec![n], &fourier)?;
        let pr = project_subsystem(&state, 0, &onto)?;
        prob *= pr.probability;
        state = pr.state.ok_or(Error::ZeroProbabilityBranch(o))?;
    }
    let sum: usize = outcomes.iter().sum();
    let correction = DMatrix::from_fn(n, n, |r, c| if r == c { omega(sum * r) } else { C64::new(0.0, 0.0) });
    let mut data = DMatrix::from_column_slice(n * n, 1, state.amps().as_slice());
    apply_local(&mut data, &[n, n], 0, &correction);
    let mut ideal = DVector::zeros(n * n);
    for (k, a) in amps.iter().enumerate() {
        ideal[k * (n + 1)] = a / norm;
    }
    let got = data.column(0).into_owned();
    let phase = ideal.dotc(&got);
    let phase = if phase.norm() > 0.0 { phase / phase.norm() } else { C64::new(1.0, 0.0) };
    let dist = (got - ideal * phase).norm();
    Ok((prob, dist))
}

/// `(1+δ)² Σ_l p(l) E(β_l)`, the deterministic stage's one-bit message included.
pub fn worker_comm_rate(profile: &CostProfile, delta: f64) -> f64 {
    let base: f64 =
        profile.schedule.stages.iter().zip(&profile.stage_reach_probs).map(|(s, p)| p * s.entanglement()).sum();
    (1.0 + delta).powi(2) * base
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderMode {
    /// One bit per executed stage.
    Uncompressed,
    /// `Σ_l p(l) h(p_success(l))`.
    EntropyBound,
}

pub fn leader_comm_rate(profile: &CostProfile, mode: LeaderMode) -> f64 {
    profile
        .schedule
        .stages
        .iter()
        .zip(&profile.stage_reach_probs)
        .map(|(s, p)| match mode {
            LeaderMode::Uncompressed => *p,
            LeaderMode::EntropyBound => p * h(s.success_probability()),
        })
        .sum()
}

pub fn comm_profile(profile: &CostProfile, delta: f64, epsilon: f64) -> CommProfile {
    CommProfile {
        alpha: profile.alpha,
        worker_bits_rate: worker_comm_rate(profile, delta),
        leader_bits_rate: leader_comm_rate(profile, LeaderMode::Uncompressed),
        delta,
        epsilon,
    }
}

/// Single stage maximizing the success probability, then the deterministic stage.
#[derive(Debug, Clone, Serialize)]
pub struct LeaderOptimized {
    pub beta: f64,
    pub fail_probability: f64,
    pub ebits: f64,
    pub comm: CommProfile,
    pub schedule: StageSchedule,
}

/// Failure probability of a stage at reduced angle with `t = tan α`, `b = tan β`.
fn fail_probability(t: f64, b: f64) -> f64 {
    let (b2, t2) = (b * b, t * t);
    (b2 * b2 + t2) / ((1.0 + b2) * (b2 + t2))
}

pub fn optimize_leader_comm(alpha: f64, delta: f64, epsilon: f64) -> Result<LeaderOptimized> {
    if !(alpha > 0.0 && alpha <= FRAC_PI_4) {
        return Err(Error::AngleOutOfDomain { angle: alpha, domain: "(0, π/4]" });
    }
    let t = alpha.tan();
    let mut f = |ln_b: f64| fail_probability(t, ln_b.exp());
    let (ln_b, _) = crate::optimizer::minimize_1d(t.ln() - 8.0, 100f64.ln(), 1024, 1e-12, &mut f);
    let beta = ln_b.exp().atan();
    let schedule = StageSchedule::build(alpha, 2, |_, a| lift_beta(a, beta))?;
    let profile = expected_cost(&schedule);
    let first = schedule.stages[0];
    let pf = 1.0 - first.success_probability();
    // branch announcement, plus the fallback stage's bit when it can run
    let fallback = if first.kind == StageKind::Deterministic { 0.0 } else { pf };
    let leader = if is_local(reduce(alpha)) { 0.0 } else { h(pf) + fallback };
    Ok(LeaderOptimized {
        beta,
        fail_probability: pf,
        ebits: profile.expected_ebits,
        comm: CommProfile {
            alpha,
            worker_bits_rate: worker_comm_rate(&profile, delta),
            leader_bits_rate: leader,
            delta,
            epsilon,
        },
        schedule,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    LinearFit { slope, intercept: my - slope * mx, r_squared: if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) } }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeaderRatioRow {
    pub alpha: f64,
    pub leader_rate: f64,
    pub ratio: f64,
}

/// Rows `(α, leader rate, rate/α)` and the fit of `rate/α` against `log₂(1/α)`.
pub fn leader_ratio_curve(alphas: &[f64]) -> Result<(Vec<LeaderRatioRow>, LinearFit)> {
    let rows = alphas
        .iter()
        .map(|&a| {
            let r = optimize_leader_comm(a, 0.0, 0.0)?.comm.leader_bits_rate;
            Ok(LeaderRatioRow { alpha: a, leader_rate: r, ratio: r / a })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| (1.0 / r.alpha).log2()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    Ok((rows, linear_fit(&xs, &ys)))
}
