use crate::linalg::{expm_oracle, tensor, OperatorMatrix, C64};
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Which exponential is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `exp(+itH)`, matching `U(α) = exp(iα σz⊗N)`.
    #[default]
    Plus,
    /// `exp(−itH)`.
    Minus,
}

impl Convention {
    pub fn sign(self) -> f64 {
        match self {
            Convention::Plus => 1.0,
            Convention::Minus => -1.0,
        }
    }
}

/// `H_1 ⊗ … ⊗ H_N`.
#[derive(Debug, Clone)]
pub struct TensorTerm {
    pub factors: Vec<OperatorMatrix>,
}

impl TensorTerm {
    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim()).collect()
    }

    pub fn dense(&self) -> Result<OperatorMatrix> {
        tensor(&self.factors)
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    pub terms: Vec<TensorTerm>,
    pub time: f64,
    pub slices: usize,
    pub convention: Convention,
}

/// Largest factor dimension accepted.
pub const MAX_FACTOR_DIM: usize = 8;

fn check_factor(term: usize, j: usize, f: &OperatorMatrix) -> Result<()> {
    if f.dim() == 0 || f.dim() > MAX_FACTOR_DIM {
        return Err(Error::Hamiltonian(format!(
            "term {term} factor {j}: dimension {} outside 1..={MAX_FACTOR_DIM}",
            f.dim()
        )));
    }
    let dev = f.hermiticity_deviation();
    if dev > 1e-10 {
        return Err(Error::Hamiltonian(format!("term {term} factor {j} is not hermitian (deviation {dev:.3e})")));
    }
    Ok(())
}

impl HamiltonianSpec {
    pub fn sum(terms: Vec<TensorTerm>, time: f64, slices: usize) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Hamiltonian("no terms given".into()));
        }
        if !time.is_finite() {
            return Err(Error::Hamiltonian(format!("time must be finite, got {time}")));
        }
        if slices == 0 {
            return Err(Error::Hamiltonian("slices must be at least 1".into()));
        }
        let dims = terms[0].dims();
        if dims.is_empty() {
            return Err(Error::Hamiltonian("term 0 has no factors".into()));
        }
        for (k, t) in terms.iter().enumerate() {
            if t.dims() != dims {
                return Err(Error::Hamiltonian(format!(
                    "term {k} has factor dimensions {:?}, term 0 has {dims:?}",
                    t.dims()
                )));
            }
            for (j, f) in t.factors.iter().enumerate() {
                check_factor(k, j, f)?;
            }
        }
        let working: Vec<usize> = dims.iter().map(|d| 2 * d).collect();
        crate::linalg::joint_dim(&working)?;
        Ok(Self { terms, time, slices, convention: Convention::Plus })
    }

    pub fn product(factors: Vec<OperatorMatrix>, time: f64) -> Result<Self> {
        Self::sum(vec![TensorTerm { factors }], time, 1)
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn dims(&self) -> Vec<usize> {
        self.terms[0].dims()
    }

    /// `Σ_k H_k` as a dense matrix.
    pub fn dense(&self) -> Result<OperatorMatrix> {
        let mut acc = self.terms[0].dense()?;
        for t in &self.terms[1..] {
            acc = acc.add(&t.dense()?)?;
        }
        Ok(acc)
    }

    /// The exact evolution `exp(±itH)`.
    pub fn target(&self) -> Result<OperatorMatrix> {
        expm_oracle(&self.dense()?, self.convention.sign() * self.time)
    }

    /// Parses `{"factors": [...], "terms": [{"factors": [...]}, ...], "time": t,
    /// "slices": m, "convention": "plus"|"minus"}`. Matrices are lists of rows
    /// of `[re, im]` pairs. The Hamiltonian is the sum of the top-level product
    /// (if given) and every listed term.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSpec =
            serde_json::from_str(text).map_err(|e| Error::Hamiltonian(format!("invalid Hamiltonian JSON: {e}")))?;
        let mut raw_terms = Vec::new();
        if let Some(f) = raw.factors {
            raw_terms.push(f);
        }
        raw_terms.extend(raw.terms.unwrap_or_default().into_iter().map(|t| t.factors));
        if raw_terms.is_empty() {
            return Err(Error::Hamiltonian("need \"factors\" or \"terms\"".into()));
        }
        let terms = raw_terms
            .into_iter()
            .enumerate()
            .map(|(k, fs)| {
                let factors = fs
                    .into_iter()
                    .enumerate()
                    .map(|(j, rows)| matrix_from_rows(k, j, rows))
                    .collect::<Result<Vec<_>>>()?;
                Ok(TensorTerm { factors })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = Self::sum(terms, raw.time, raw.slices.unwrap_or(1))?;
        Ok(spec.with_convention(raw.convention.unwrap_or_default()))
    }
}

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    factors: Vec<RawMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    factors: Option<Vec<RawMatrix>>,
    terms: Option<Vec<RawTerm>>,
    time: f64,
    slices: Option<usize>,
    convention: Option<Convention>,
}

fn matrix_from_rows(term: usize, j: usize, rows: RawMatrix) -> Result<OperatorMatrix> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Hamiltonian(format!("term {term} factor {j} is not a square matrix")));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Hamiltonian(format!("term {term} factor {j} has non-finite entries")));
    }
    let m = DMatrix::from_fn(d, d, |r, c| C64::new(rows[r][c][0], rows[r][c][1]));
    OperatorMatrix::new(vec![d], m)
}

/// Normalized eigenvalues this close to ±1 are taken as exactly ±1.
const SNAP_TOL: f64 = 1e-12;

/// Per-factor eigendecomposition `H_j = ‖H_j‖ Q_j diag(a_j) Q_j†`.
#[derive(Debug, Clone)]
pub struct DiagonalizedForm {
    pub locals: Vec<OperatorMatrix>,
    /// `a_{l,j}` in `[−1, 1]`, sorted descending.
    pub diagonals: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    /// `Δ = Π_j ‖H_j‖`.
    pub delta: f64,
}

pub fn diagonalize(term: &TensorTerm) -> Result<DiagonalizedForm> {
    let mut locals = Vec::new();
    let mut diagonals = Vec::new();
    let mut norms = Vec::new();
    for (j, f) in term.factors.iter().enumerate() {
        check_factor(0, j, f)?;
        let herm = (f.entries() + f.entries().adjoint()) * C64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        let d = f.dim();
        let mut order: Vec<usize> = (0..d).collect();
        // descending, ties by original index
        order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));
        let mut q = DMatrix::zeros(d, d);
        for (col, &src) in order.iter().enumerate() {
            let v = eig.eigenvectors.column(src);
            let lead = (0..d).fold(0, |b, r| if v[r].norm() > v[b].norm() + 1e-12 { r } else { b });
            let phase = v[lead].conj() / v[lead].norm();
            q.set_column(col, &(v * phase));
        }
        let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let a = if norm > 0.0 {
            vals.iter()
                .map(|v| {
                    let a = (v / norm).clamp(-1.0, 1.0);
                    if (a.abs() - 1.0).abs() < SNAP_TOL {
                        a.signum()
                    } else {
                        a
                    }
                })
                .collect()
        } else {
            vec![0.0; d]
        };
        locals.push(OperatorMatrix::new(vec![d], q)?);
        diagonals.push(a);
        norms.push(norm);
    }
    let delta = norms.iter().product();
    Ok(DiagonalizedForm { locals, diagonals, norms, delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    fn single(f: OperatorMatrix) -> DiagonalizedForm {
        diagonalize(&TensorTerm { factors: vec![f] }).unwrap()
    }

    #[test]
    fn diagonalize_examples() {
        let z = single(pauli::z());
        assert_eq!(z.diagonals[0], vec![1.0, -1.0]);
        assert!(z.locals[0].max_abs_diff(&pauli::i()) < 1e-12);
        assert!((z.delta - 1.0).abs() < 1e-15);
        let x = single(pauli::x());
        assert!((x.diagonals[0][0] - 1.0).abs() < 1e-12 && (x.diagonals[0][1] + 1.0).abs() < 1e-12);
        assert!(x.locals[0].max_abs_diff(&pauli::hadamard()) < 1e-12);
        let d = single(OperatorMatrix::from_real_diagonal(&[2.0, 1.0]));
        assert!((d.diagonals[0][0] - 1.0).abs() < 1e-15 && (d.diagonals[0][1] - 0.5).abs() < 1e-15);
        assert!((d.norms[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn reconstructs_factors() {
        let h = OperatorMatrix::from_rows(&[
            vec![C64::new(0.3, 0.0), C64::new(0.1, -0.4), C64::new(0.0, 0.2)],
            vec![C64::new(0.1, 0.4), C64::new(-1.2, 0.0), C64::new(0.5, 0.0)],
            vec![C64::new(0.0, -0.2), C64::new(0.5, 0.0), C64::new(0.7, 0.0)],
        ])
        .unwrap();
        let form = single(h.clone());
        let a = &form.diagonals[0];
        assert!(a.windows(2).all(|w| w[0] >= w[1]));
        assert!(a.iter().any(|v| (v.abs() - 1.0).abs() < 1e-15));
        let q = &form.locals[0];
        assert!(q.is_unitary(1e-12));
        let diag = OperatorMatrix::from_real_diagonal(&a.iter().map(|v| v * form.norms[0]).collect::<Vec<_>>());
        let back = q.compose(&diag).unwrap().compose(&q.adjoint()).unwrap();
        assert!(back.max_abs_diff(&h) < 1e-9);
    }

    #[test]
    fn json_parsing_and_errors() {
        let text = r#"{"factors": [[[[0,0],[1,0]],[[1,0],[0,0]]], [[[1,0],[0,0]],[[0,0],[-1,0]]]],
                       "terms": [{"factors": [[[[1,0],[0,0]],[[0,0],[-1,0]]], [[[1,0],[0,0]],[[0,0],[1,0]]]]}],
                       "time": 0.4, "slices": 8, "convention": "minus"}"#;
        let spec = HamiltonianSpec::from_json(text).unwrap();
        assert_eq!(spec.terms.len(), 2);
        assert_eq!(spec.slices, 8);
        assert_eq!(spec.convention, Convention::Minus);
        let bad = r#"{"factors": [[[[0,0],[0,1]],[[0,1],[0,0]]]], "time": 1.0}"#;
        let err = HamiltonianSpec::from_json(bad).unwrap_err().to_string();
        assert!(err.contains("factor 0") && err.contains("hermitian"), "{err}");
        let ragged = r#"{"factors": [[[[0,0],[1,0]]]], "time": 1.0}"#;
        assert!(HamiltonianSpec::from_json(ragged).unwrap_err().to_string().contains("square"));
        assert!(HamiltonianSpec::from_json(r#"{"time": 1.0}"#).is_err());
        let mismatch =
            r#"{"factors": [[[[1,0]]]], "terms": [{"factors": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}], "time": 1}"#;
        assert!(HamiltonianSpec::from_json(mismatch).unwrap_err().to_string().contains("term 1"));
    }
}
