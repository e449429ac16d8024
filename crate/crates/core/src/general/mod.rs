//! Implementing `U = Σ_k λ_k V_k^{(1)} ⊗ … ⊗ V_k^{(N)}` with the resource
//! `Σ_k μ_k |k⟩^{⊗N}`, controlled-`V` operations, Fourier-basis worker
//! measurements, a leader phase correction and a projection onto `ν`.

use crate::angle::fold;
use crate::linalg::{tensor, DenseStator, OperatorMatrix, StateVector, C64};
use crate::protocol::OutcomeSource;
use crate::{Error, Result};
use nalgebra::DVector;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct DecompTerm {
    pub lambda: C64,
    /// One unitary per party.
    pub ops: Vec<OperatorMatrix>,
}

#[derive(Debug, Clone)]
pub struct TensorDecomposition {
    terms: Vec<DecompTerm>,
}

const REASSEMBLY_TOL: f64 = 1e-9;

impl TensorDecomposition {
    /// Term 0 must be the identity term and carry the largest `|λ|`.
    pub fn new(terms: Vec<DecompTerm>) -> Result<Self> {
        let first =
            terms.first().ok_or_else(|| Error::InvalidArgument("decomposition needs at least one term".into()))?;
        let dims: Vec<usize> = first.ops.iter().map(|o| o.dim()).collect();
        if dims.len() < 2 {
            return Err(Error::InvalidArgument("at least two parties required".into()));
        }
        for (k, t) in terms.iter().enumerate() {
            if t.ops.iter().map(|o| o.dim()).collect::<Vec<_>>() != dims {
                return Err(Error::DimensionMismatch(format!("term {k} acts on different dimensions")));
            }
            for o in &t.ops {
                let dev = o.unitarity_deviation();
                if dev > 1e-10 {
                    return Err(Error::NotUnitary(dev));
                }
            }
        }
        if first.ops.iter().any(|o| o.max_abs_diff(&OperatorMatrix::identity(&[o.dim()])) > 1e-12) {
            return Err(Error::InvalidArgument("term 0 must be the identity term".into()));
        }
        let max = terms.iter().map(|t| t.lambda.norm()).fold(0.0, f64::max);
        if first.lambda.norm() < max - 1e-12 {
            return Err(Error::InvalidArgument("the identity term must have the largest |λ|".into()));
        }
        let d = Self { terms };
        let dev = d.unitary()?.unitarity_deviation();
        if dev > REASSEMBLY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(d)
    }

    pub fn terms(&self) -> &[DecompTerm] {
        &self.terms
    }

    pub fn parties(&self) -> usize {
        self.terms[0].ops.len()
    }

    /// `d`, the number of terms.
    pub fn resource_dim(&self) -> usize {
        self.terms.len()
    }

    pub fn system_dims(&self) -> Vec<usize> {
        self.terms[0].ops.iter().map(|o| o.dim()).collect()
    }

    pub fn lambdas(&self) -> Vec<C64> {
        self.terms.iter().map(|t| t.lambda).collect()
    }

    /// `Σ_k λ_k ⊗_j V_k^{(j)}`.
    pub fn unitary(&self) -> Result<OperatorMatrix> {
        let mut acc: Option<OperatorMatrix> = None;
        for t in &self.terms {
            let term = tensor(&t.ops)?.scale(t.lambda);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        Ok(acc.expect("at least one term"))
    }
}

/// `exp(i Σ_j θ_j σ_j⊗σ_j)` as `Σ_k λ_k σ_k⊗σ_k`, `k = 0, x, y, z`.
pub fn canonical_two_qubit(theta: [f64; 3]) -> Result<TensorDecomposition> {
    if theta.iter().any(|t| t.is_nan() || t.abs() > PI / 4.0 + 1e-12) {
        return Err(Error::AngleOutOfDomain {
            angle: theta.iter().fold(0.0, |m: f64, t| m.max(t.abs())),
            domain: "[−π/4, π/4]",
        });
    }
    let (sx, cx) = theta[0].sin_cos();
    let (sy, cy) = theta[1].sin_cos();
    let (sz, cz) = theta[2].sin_cos();
    let lambda = [
        C64::new(cx * cy * cz, sx * sy * sz),
        C64::new(cx * sy * sz, sx * cy * cz),
        C64::new(sx * cy * sz, sy * cx * cz),
        C64::new(sx * sy * cz, sz * cx * cy),
    ];
    let terms =
        (0..4).map(|k| DecompTerm { lambda: lambda[k], ops: vec![crate::linalg::pauli::sigma(k); 2] }).collect();
    TensorDecomposition::new(terms)
}

/// `Π_g exp(iθ_g Z_{S_g})` for commuting Z-strings `S_g` (party lists),
/// expanded and grouped by Z-string, identity first.
pub fn z_string_family(parties: usize, generators: &[(Vec<usize>, f64)]) -> Result<TensorDecomposition> {
    if generators.len() > 16 {
        return Err(Error::InvalidArgument("at most 16 generators".into()));
    }
    let mut strings: Vec<(u64, C64)> = Vec::new();
    for subset in 0u32..1 << generators.len() {
        let mut mask = 0u64;
        let mut coeff = C64::new(1.0, 0.0);
        for (g, (support, theta)) in generators.iter().enumerate() {
            if support.iter().any(|&p| p >= parties) {
                return Err(Error::InvalidArgument(format!("generator {g} names a party out of range")));
            }
            if subset >> g & 1 == 1 {
                mask ^= support.iter().fold(0u64, |m, &p| m | 1 << p);
                coeff *= C64::new(0.0, theta.sin());
            } else {
                coeff *= theta.cos();
            }
        }
        match strings.iter_mut().find(|(m, _)| *m == mask) {
            Some((_, c)) => *c += coeff,
            None => strings.push((mask, coeff)),
        }
    }
    strings.retain(|(m, c)| *m == 0 || c.norm() > 1e-15);
    strings.sort_by_key(|(m, _)| *m != 0);
    let terms = strings
        .into_iter()
        .map(|(mask, lambda)| DecompTerm {
            lambda,
            ops: (0..parties)
                .map(|p| if mask >> p & 1 == 1 { crate::linalg::pauli::z() } else { crate::linalg::pauli::i() })
                .collect(),
        })
        .collect();
    TensorDecomposition::new(terms)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DesignPolicy {
    /// `μ_k ∝ √|λ_k|`, `ν_k ∝ conj(λ_k)/√|λ_k|`.
    Sqrt,
    /// Given `μ`; `ν` is solved from the constraint.
    Custom(Vec<C64>),
}

/// Resource amplitudes `μ` and success projector `ν`, with `μ_k ν_k* ∝ λ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceDesign {
    pub mu: Vec<C64>,
    pub nu: Vec<C64>,
}

fn normalize(v: Vec<C64>) -> Result<Vec<C64>> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n == 0.0 {
        return Err(Error::UnsatisfiableDesign("zero vector".into()));
    }
    Ok(v.into_iter().map(|z| z / n).collect())
}

pub fn design_resource(decomp: &TensorDecomposition, policy: &DesignPolicy) -> Result<ResourceDesign> {
    let lambda = decomp.lambdas();
    if lambda.iter().all(|l| l.norm() == 0.0) {
        return Err(Error::UnsatisfiableDesign("all λ_k vanish".into()));
    }
    let (mu, nu) = match policy {
        DesignPolicy::Sqrt => {
            let mu = lambda.iter().map(|l| C64::new(l.norm().sqrt(), 0.0)).collect();
            let nu = lambda
                .iter()
                .map(|l| if l.norm() == 0.0 { C64::new(0.0, 0.0) } else { l.conj() / l.norm().sqrt() })
                .collect();
            (normalize(mu)?, normalize(nu)?)
        }
        DesignPolicy::Custom(mu) => {
            if mu.len() != lambda.len() {
                return Err(Error::DimensionMismatch(format!("μ has {} entries for {} terms", mu.len(), lambda.len())));
            }
            let norm: f64 = mu.iter().map(|z| z.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::NotNormalized(norm));
            }
            let mut nu = Vec::with_capacity(mu.len());
            for (k, (m, l)) in mu.iter().zip(&lambda).enumerate() {
                if l.norm() == 0.0 {
                    nu.push(C64::new(0.0, 0.0));
                } else if m.norm() == 0.0 {
                    return Err(Error::UnsatisfiableDesign(format!("μ_{k} = 0 but λ_{k} ≠ 0")));
                } else {
                    nu.push((l / m).conj());
                }
            }
            (mu.clone(), normalize(nu)?)
        }
    };
    Ok(ResourceDesign { mu, nu })
}

impl ResourceDesign {
    /// Largest deviation of `μ_k ν_k*` from `c·λ_k` with the best complex `c`.
    pub fn constraint_residual(&self, decomp: &TensorDecomposition) -> f64 {
        let lambda = decomp.lambdas();
        let prod: Vec<C64> = self.mu.iter().zip(&self.nu).map(|(m, n)| m * n.conj()).collect();
        let ll: f64 = lambda.iter().map(|l| l.norm_sqr()).sum();
        let c = lambda.iter().zip(&prod).map(|(l, p)| l.conj() * p).sum::<C64>() / ll;
        lambda.iter().zip(&prod).map(|(l, p)| (p - c * l).norm()).fold(0.0, f64::max)
    }

    /// `|c|²` where `Σ_k μ_k ν_k* V_k = c U`: the state-independent success probability.
    pub fn success_probability(&self, decomp: &TensorDecomposition) -> f64 {
        let lambda = decomp.lambdas();
        let ll: f64 = lambda.iter().map(|l| l.norm_sqr()).sum();
        let c = lambda.iter().zip(self.mu.iter().zip(&self.nu)).map(|(l, (m, n))| l.conj() * m * n.conj()).sum::<C64>()
            / ll;
        c.norm_sqr()
    }

    /// Entanglement of `Σ_k μ_k |k⟩^{⊗N}` in ebits.
    pub fn entanglement(&self) -> f64 {
        let probs: Vec<f64> = self.mu.iter().map(|z| z.norm_sqr()).collect();
        crate::linalg::shannon_entropy(&probs)
    }
}

/// `ν` completed to an orthonormal basis by Gram–Schmidt over `e_0, e_1, …`.
pub fn leader_basis(nu: &[C64]) -> Vec<Vec<C64>> {
    let d = nu.len();
    let mut basis: Vec<DVector<C64>> = vec![DVector::from_column_slice(nu)];
    for e in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = DVector::from_fn(d, |r, _| if r == e { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        let n = v.norm();
        if n > 1e-9 {
            basis.push(v / C64::new(n, 0.0));
        }
    }
    basis.into_iter().map(|v| v.as_slice().to_vec()).collect()
}

#[derive(Debug, Clone)]
pub struct GeneralOutcome {
    pub state: StateVector,
    pub success: bool,
    pub worker_outcomes: Vec<usize>,
    /// Index into [`leader_basis`]; 0 is success.
    pub leader_outcome: usize,
    /// Probability of the realized branch.
    pub probability: f64,
    /// Branch operator on the system (unnormalized Kraus operator).
    pub kraus: OperatorMatrix,
}

fn fourier(d: usize, s: usize) -> Vec<C64> {
    // ⟨f_s|k⟩ = ω^{sk}/√d
    let scale = 1.0 / (d as f64).sqrt();
    (0..d).map(|k| C64::from_polar(scale, -2.0 * PI * ((s * k) % d) as f64 / d as f64)).collect()
}

pub fn run_general_protocol(
    decomp: &TensorDecomposition,
    design: &ResourceDesign,
    system: &StateVector,
    source: &mut dyn OutcomeSource,
) -> Result<GeneralOutcome> {
    let n = decomp.parties();
    let d = decomp.resource_dim();
    if d > 8 {
        return Err(Error::InvalidArgument(format!("resource dimension {d} exceeds 8")));
    }
    if system.dims() != decomp.system_dims().as_slice() {
        return Err(Error::DimensionMismatch(format!(
            "system dims {:?}, decomposition acts on {:?}",
            system.dims(),
            decomp.system_dims()
        )));
    }
    let stride: usize = (0..n).map(|j| d.pow(j as u32)).sum();
    let mut amps = DVector::zeros(d.pow(n as u32));
    for (k, m) in design.mu.iter().enumerate() {
        amps[k * stride] = *m;
    }
    let resource = StateVector::new(vec![d; n], amps)?;
    let mut st = DenseStator::identity(system.dims())?.prepend(&resource)?;
    for j in 0..n {
        let ops: Vec<_> = decomp.terms().iter().map(|t| t.ops[j].entries().clone()).collect();
        st.apply_controlled(j, n + j, &ops);
    }
    let mut weight = st.weight(system)?;
    let mut probability = 1.0;
    let mut outcomes = Vec::with_capacity(n - 1);
    for _ in 0..n - 1 {
        let cands: Vec<DenseStator> = (0..d).map(|s| st.project(0, &fourier(d, s))).collect();
        let ws = cands.iter().map(|c| c.weight(system)).collect::<Result<Vec<_>>>()?;
        let probs: Vec<f64> = ws.iter().map(|w| w / weight).collect();
        let s = source.choose(&probs)?;
        probability *= probs[s];
        weight = ws[s];
        outcomes.push(s);
        st = cands[s].clone();
    }
    let total = outcomes.iter().sum::<usize>() % d;
    let correction = nalgebra::DMatrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::from_polar(1.0, -2.0 * PI * ((r * total) % d) as f64 / d as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    st.apply_local(0, &correction);
    let basis = leader_basis(&design.nu);
    let cands: Vec<DenseStator> = basis.iter().map(|b| st.project(0, b)).collect();
    let ws = cands.iter().map(|c| c.weight(system)).collect::<Result<Vec<_>>>()?;
    let probs: Vec<f64> = ws.iter().map(|w| w / weight).collect();
    let b = source.choose(&probs)?;
    probability *= probs[b];
    let kraus = cands[b].as_operator()?;
    let out = kraus.apply(system)?;
    let state = StateVector::normalized(system.dims().to_vec(), out)?.ok_or(Error::ZeroProbabilityBranch(b))?;
    Ok(GeneralOutcome { state, success: b == 0, worker_outcomes: outcomes, leader_outcome: b, probability, kraus })
}

impl GeneralOutcome {
    /// `kraus` rescaled so that `‖K‖_F² = dim`; unitary branches come out unitary.
    pub fn rescaled(&self) -> OperatorMatrix {
        let k = self.kraus.entries();
        let s = (self.kraus.dim() as f64 / k.norm_squared()).sqrt();
        self.kraus.scale(C64::new(s, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailurePolicy {
    /// Correct the residual rotation with another round (two-term decompositions).
    Iterate,
    /// Teleport parties 1..N−1's systems to party N.
    Teleport,
}

/// Next round after a failure, in the two-term rotation picture `exp(iα V)`.
#[derive(Debug, Clone)]
pub struct IterateStep {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub alpha_next: f64,
    pub next: Option<(TensorDecomposition, ResourceDesign)>,
}

#[derive(Debug, Clone)]
pub struct FailureCost {
    pub fail_probability: f64,
    pub resource_ebits: f64,
    /// Cost of the fallback on failure (teleport policy).
    pub fallback_ebits: f64,
    pub fallback_bits: f64,
    /// `resource_ebits + p_fail · fallback_ebits` for teleport.
    pub expected_ebits: f64,
    pub iterate: Option<IterateStep>,
}

/// Angle of a two-term `a·I + b·V ∝ exp(iθV)`; fails unless `b/a` is imaginary.
fn rotation_angle(a: C64, b: C64) -> Result<f64> {
    if a.norm() == 0.0 {
        return Ok(fold(std::f64::consts::FRAC_PI_2));
    }
    let r = b / a;
    if r.re.abs() > 1e-9 * (1.0 + r.norm()) {
        return Err(Error::Unsupported("residual is not a rotation exp(iθV)".into()));
    }
    Ok(fold(r.im.atan()))
}

pub fn failure_policy_cost(
    decomp: &TensorDecomposition,
    design: &ResourceDesign,
    policy: FailurePolicy,
) -> Result<FailureCost> {
    let pf = (1.0 - design.success_probability(decomp)).max(0.0);
    let resource = design.entanglement();
    match policy {
        FailurePolicy::Teleport => {
            let dims = decomp.system_dims();
            let ebits: f64 = 2.0 * dims[..dims.len() - 1].iter().map(|&d| (d as f64).log2()).sum::<f64>();
            Ok(FailureCost {
                fail_probability: pf,
                resource_ebits: resource,
                fallback_ebits: ebits,
                fallback_bits: 2.0 * ebits,
                expected_ebits: resource + pf * ebits,
                iterate: None,
            })
        }
        FailurePolicy::Iterate => {
            if decomp.resource_dim() != 2 {
                return Err(Error::Unsupported(format!(
                    "iteration is defined for two-term decompositions, got {}",
                    decomp.resource_dim()
                )));
            }
            let l = decomp.lambdas();
            let alpha = rotation_angle(l[0], l[1])?;
            let failure = &leader_basis(&design.nu)[1];
            let r0 = design.mu[0] * failure[0].conj();
            let r1 = design.mu[1] * failure[1].conj();
            let alpha_prime = rotation_angle(r0, r1)?;
            let alpha_next = fold(alpha - alpha_prime);
            let next = if crate::angle::is_local(alpha_next) {
                None
            } else {
                let terms = vec![
                    DecompTerm { lambda: C64::new(alpha_next.cos(), 0.0), ops: decomp.terms()[0].ops.clone() },
                    DecompTerm { lambda: C64::new(0.0, alpha_next.sin()), ops: decomp.terms()[1].ops.clone() },
                ];
                match TensorDecomposition::new(terms) {
                    Ok(dn) => {
                        let dsn = design_resource(&dn, &DesignPolicy::Sqrt)?;
                        Some((dn, dsn))
                    }
                    // |α_next| > π/4: the identity term no longer dominates
                    Err(_) => None,
                }
            };
            Ok(FailureCost {
                fail_probability: pf,
                resource_ebits: resource,
                fallback_ebits: 0.0,
                fallback_bits: 0.0,
                expected_ebits: resource,
                iterate: Some(IterateStep { alpha, alpha_prime, alpha_next, next }),
            })
        }
    }
}

/// Rows `(s, p_fail)` for a family with `family(0) = I`, √λ design.
pub fn failure_vanishing_check(
    family: impl Fn(f64) -> Result<TensorDecomposition>,
    ss: &[f64],
) -> Result<Vec<(f64, f64)>> {
    ss.iter()
        .map(|&s| {
            let d = family(s)?;
            let design = design_resource(&d, &DesignPolicy::Sqrt)?;
            Ok((s, (1.0 - design.success_probability(&d)).max(0.0)))
        })
        .collect()
}

/// The two-term decomposition `cos α·I + i sin α·Z⊗…⊗Z`.
pub fn collective_z(parties: usize, alpha: f64) -> Result<TensorDecomposition> {
    z_string_family(parties, &[((0..parties).collect(), alpha)])
}
