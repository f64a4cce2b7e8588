//! Labeled multi-qubit pure states and density operators.
//!
//! Qubits are always addressed by party label. The first label is the most
//! significant bit of the amplitude index.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigenvalues, inner, norm_sqr, re, ComplexMatrix, C64, STRUCTURAL_TOL};

/// The four Bell states, with Φ± = (|00⟩ ± |11⟩)/√2 and Ψ± = (|01⟩ ± |10⟩)/√2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellKind {
    #[serde(rename = "Phi+")]
    PhiPlus,
    #[serde(rename = "Phi-")]
    PhiMinus,
    #[serde(rename = "Psi+")]
    PsiPlus,
    #[serde(rename = "Psi-")]
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    pub fn amplitudes(self) -> [C64; 4] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = re(0.0);
        match self {
            BellKind::PhiPlus => [re(s), z, z, re(s)],
            BellKind::PhiMinus => [re(s), z, z, re(-s)],
            BellKind::PsiPlus => [z, re(s), re(s), z],
            BellKind::PsiMinus => [z, re(s), re(-s), z],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Two classical bits announcing this outcome.
    pub fn bits(self) -> &'static str {
        match self {
            BellKind::PhiPlus => "00",
            BellKind::PhiMinus => "01",
            BellKind::PsiPlus => "10",
            BellKind::PsiMinus => "11",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BellKind::PhiPlus => "Phi+",
            BellKind::PhiMinus => "Phi-",
            BellKind::PsiPlus => "Psi+",
            BellKind::PsiMinus => "Psi-",
        }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The Bell basis in [`BellKind::ALL`] order.
pub fn bell_basis() -> [[C64; 4]; 4] {
    BellKind::ALL.map(BellKind::amplitudes)
}

fn check_labels(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

fn owned(labels: &[&str]) -> Vec<String> {
    labels.iter().map(|s| s.to_string()).collect()
}

/// Unit-norm amplitude vector over labeled qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState")]
pub struct PureState {
    labels: Vec<String>,
    amplitudes: Vec<C64>,
}

#[derive(Deserialize)]
struct RawState {
    labels: Vec<String>,
    amplitudes: Vec<C64>,
}

impl TryFrom<RawState> for PureState {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        PureState::new(raw.labels, raw.amplitudes)
    }
}

/// Result of a projective two-qubit measurement.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub outcome: usize,
    pub probability: f64,
    pub post_state: PureState,
}

/// How [`PureState::measure_in_basis`] picks the outcome.
pub enum OutcomeChoice<'a> {
    Fixed(usize),
    Sampled(&'a mut dyn RngCore),
}

impl PureState {
    pub fn new(labels: Vec<String>, amplitudes: Vec<C64>) -> Result<Self> {
        check_labels(&labels)?;
        let expected = 1usize << labels.len();
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: amplitudes.len(),
            });
        }
        let n2 = norm_sqr(&amplitudes);
        if !n2.is_finite() || (n2 - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { labels, amplitudes })
    }

    /// Normalizes `amplitudes` and returns the state with its squared norm
    /// before normalization.
    pub fn normalize(labels: Vec<String>, amplitudes: Vec<C64>) -> Result<(Self, f64)> {
        let n2 = norm_sqr(&amplitudes);
        if n2 < 1e-300 || !n2.is_finite() {
            return Err(Error::Degenerate(n2));
        }
        let k = 1.0 / n2.sqrt();
        let scaled = amplitudes.into_iter().map(|z| z * k).collect();
        Ok((Self::new(labels, scaled)?, n2))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    /// Amplitude of the basis ket written as a bitstring in label order.
    pub fn amplitude(&self, bits: &str) -> Result<C64> {
        Ok(self.amplitudes[parse_bits(bits, self.n_qubits())?])
    }

    pub fn with_labels(self, labels: &[&str]) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.labels.len(),
                found: labels.len(),
            });
        }
        Self::new(owned(labels), self.amplitudes)
    }

    fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    fn positions(&self, on: &[&str]) -> Result<Vec<usize>> {
        let pos = on.iter().map(|l| self.position(l)).collect::<Result<Vec<_>>>()?;
        let distinct: HashSet<_> = pos.iter().collect();
        if distinct.len() != pos.len() {
            return Err(Error::DuplicateLabel(on.join(",")));
        }
        Ok(pos)
    }

    /// Permutes qubits so that labels appear in `order`.
    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.n_qubits() {
            return Err(Error::BadPermutation(format!(
                "{} labels given for a {}-qubit state",
                order.len(),
                self.n_qubits()
            )));
        }
        let old_pos = self
            .positions(order)
            .map_err(|e| Error::BadPermutation(e.to_string()))?;
        let n = self.n_qubits();
        let mut out = vec![C64::default(); self.amplitudes.len()];
        for (x, &amp) in self.amplitudes.iter().enumerate() {
            let mut y = 0usize;
            for (j, &p) in old_pos.iter().enumerate() {
                let bit = (x >> (n - 1 - p)) & 1;
                y |= bit << (n - 1 - j);
            }
            out[y] = amp;
        }
        Ok(Self {
            labels: owned(order),
            amplitudes: out,
        })
    }

    /// Applies `op` (dimension 2^k) to the qubits `on`, where `on[0]` is the
    /// most significant qubit of the operator. The result is returned in this
    /// state's label order and is not renormalized.
    pub fn apply_operator(&self, on: &[&str], op: &ComplexMatrix) -> Result<Vec<C64>> {
        let k = on.len();
        let dim = 1usize << k;
        if op.rows() != dim || op.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: op.rows(),
            });
        }
        let pos = self.positions(on)?;
        let n = self.n_qubits();
        let masks: Vec<usize> = pos.iter().map(|&p| 1usize << (n - 1 - p)).collect();
        let target_mask: usize = masks.iter().sum();
        let spread = |s: usize| -> usize {
            (0..k)
                .filter(|t| (s >> (k - 1 - t)) & 1 == 1)
                .map(|t| masks[t])
                .sum()
        };
        let offsets: Vec<usize> = (0..dim).map(spread).collect();

        let mut out = vec![C64::default(); self.amplitudes.len()];
        let mut sub = vec![C64::default(); dim];
        for rest in (0..self.amplitudes.len()).filter(|x| x & target_mask == 0) {
            for (s, &o) in offsets.iter().enumerate() {
                sub[s] = self.amplitudes[rest | o];
            }
            let mapped = op.apply(&sub)?;
            for (s, &o) in offsets.iter().enumerate() {
                out[rest | o] = mapped[s];
            }
        }
        Ok(out)
    }

    /// Applies a unitary to the qubits `on`.
    pub fn apply_unitary(&self, on: &[&str], u: &ComplexMatrix) -> Result<Self> {
        let amps = self.apply_operator(on, u)?;
        Self::new(self.labels.clone(), amps)
    }

    pub fn overlap(&self, other: &PureState) -> Result<C64> {
        let order: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        let other = other.reorder(&order)?;
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// |⟨self|other⟩|², insensitive to global phase.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    /// Largest amplitude difference after aligning the global phase on the
    /// largest-magnitude amplitude of `self`.
    pub fn max_diff_up_to_phase(&self, other: &PureState) -> Result<f64> {
        let order: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        let other = other.reorder(&order)?;
        let (k, _) = self
            .amplitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("state has at least one amplitude");
        let (a, b) = (self.amplitudes[k], other.amplitudes[k]);
        let phase = if b.norm() > 0.0 { (a / b) / (a / b).norm() } else { re(1.0) };
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| (x - y * phase).norm())
            .fold(0.0, f64::max))
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            matrix: ComplexMatrix::projector(&self.amplitudes),
            dims: vec![2; self.n_qubits()],
            labels: self.labels.clone(),
        }
    }

    /// Reduced density operator on `keep`, with factors in the given order.
    pub fn reduced(&self, keep: &[&str]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("reduced state needs at least one label".into()));
        }
        let kept: HashSet<&str> = keep.iter().copied().collect();
        let mut order: Vec<&str> = keep.to_vec();
        order.extend(self.labels.iter().map(String::as_str).filter(|l| !kept.contains(l)));
        let moved = self.reorder(&order)?;
        let kd = 1usize << keep.len();
        let rest = moved.amplitudes.len() / kd;
        let a = &moved.amplitudes;
        let matrix = ComplexMatrix::from_fn(kd, kd, |i, j| {
            (0..rest).map(|r| a[i * rest + r] * a[j * rest + r].conj()).sum()
        });
        Ok(DensityOperator {
            matrix,
            dims: vec![2; keep.len()],
            labels: owned(keep),
        })
    }

    /// Projects the pair `on` onto `vector` (a 2-qubit amplitude vector).
    /// Returns the outcome probability and the normalized remainder.
    pub fn project_pair(&self, on: [&str; 2], vector: &[C64; 4]) -> Result<(f64, Option<PureState>)> {
        let mut order: Vec<&str> = on.to_vec();
        order.extend(
            self.labels
                .iter()
                .map(String::as_str)
                .filter(|l| *l != on[0] && *l != on[1]),
        );
        let moved = self.reorder(&order)?;
        let rest = moved.amplitudes.len() / 4;
        let remainder: Vec<C64> = (0..rest)
            .map(|r| (0..4).map(|s| vector[s].conj() * moved.amplitudes[s * rest + r]).sum())
            .collect();
        let probability = norm_sqr(&remainder);
        let labels = owned(&order[2..]);
        if labels.is_empty() {
            return Ok((probability, None));
        }
        if probability <= 1e-14 {
            return Ok((probability, None));
        }
        let (post, _) = PureState::normalize(labels, remainder)?;
        Ok((probability, Some(post)))
    }

    /// Outcome probabilities of measuring `on` in an orthonormal basis.
    pub fn outcome_probabilities(&self, on: [&str; 2], basis: &[[C64; 4]; 4]) -> Result<[f64; 4]> {
        check_basis(basis)?;
        let mut p = [0.0; 4];
        for (k, b) in basis.iter().enumerate() {
            p[k] = self.project_pair(on, b)?.0;
        }
        Ok(p)
    }

    /// Projective measurement of the pair `on` in `basis`. The post-state
    /// lives on the remaining labels in their original order.
    pub fn measure_in_basis(
        &self,
        on: [&str; 2],
        basis: &[[C64; 4]; 4],
        choice: OutcomeChoice<'_>,
    ) -> Result<Measurement> {
        if self.n_qubits() < 3 {
            return Err(Error::InvalidArgument(
                "measurement must leave at least one unmeasured qubit".into(),
            ));
        }
        let probs = self.outcome_probabilities(on, basis)?;
        let outcome = match choice {
            OutcomeChoice::Fixed(k) => {
                if k >= 4 {
                    return Err(Error::InvalidArgument(format!("outcome index {k} out of range")));
                }
                k
            }
            OutcomeChoice::Sampled(rng) => sample_index(&probs, rng.random::<f64>()),
        };
        let (probability, post) = self.project_pair(on, &basis[outcome])?;
        match post {
            Some(post_state) => Ok(Measurement {
                outcome,
                probability,
                post_state,
            }),
            None => Err(Error::ZeroProbability {
                outcome: format!("basis vector {outcome}"),
                probability,
            }),
        }
    }
}

pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = k;
        acc += p / total;
        if u < acc {
            return k;
        }
    }
    last
}

fn check_basis(basis: &[[C64; 4]; 4]) -> Result<()> {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let g = inner(&basis[i], &basis[j]);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - re(target)).norm());
        }
    }
    if worst > STRUCTURAL_TOL {
        return Err(Error::BasisNotOrthonormal(worst));
    }
    Ok(())
}

fn parse_bits(bits: &str, n: usize) -> Result<usize> {
    if bits.len() != n || !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::InvalidArgument(format!("`{bits}` is not a {n}-bit string")));
    }
    Ok(usize::from_str_radix(bits, 2).unwrap_or(0))
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("q{i}")).collect()
}

/// Computational basis state on `n` qubits labeled `q0..`.
pub fn basis_state(n: usize, bits: &str) -> Result<PureState> {
    let index = parse_bits(bits, n)?;
    let mut amps = vec![C64::default(); 1 << n];
    amps[index] = re(1.0);
    PureState::new(default_labels(n), amps)
}

/// Bell state on qubits labeled `q0`, `q1`.
pub fn bell_state(kind: BellKind) -> PureState {
    PureState {
        labels: default_labels(2),
        amplitudes: kind.amplitudes().to_vec(),
    }
}

/// `α|00⟩ + β|11⟩` on labels `(a1, b1)`.
pub fn initial_pair(alpha: C64, beta: C64) -> Result<PureState> {
    let n2 = alpha.norm_sqr() + beta.norm_sqr();
    if (n2 - 1.0).abs() > STRUCTURAL_TOL {
        return Err(Error::NotNormalized(n2));
    }
    let z = C64::default();
    PureState::new(owned(&["a1", "b1"]), vec![alpha, z, z, beta])
}

/// Tensor product with labels concatenated in order.
pub fn tensor(states: &[&PureState]) -> Result<PureState> {
    let mut labels = Vec::new();
    let mut amps = vec![re(1.0)];
    for s in states {
        labels.extend(s.labels.iter().cloned());
        amps = linalg::kron_vec(&amps, &s.amplitudes);
    }
    check_labels(&labels)?;
    PureState::new(labels, amps)
}

/// Hermitian, positive semidefinite, unit-trace operator over labeled qubits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl DensityOperator {
    /// Validates Hermiticity, trace and positivity within 1e-10.
    pub fn new(matrix: ComplexMatrix, labels: &[&str]) -> Result<Self> {
        let labels = owned(labels);
        check_labels(&labels)?;
        let dim = 1usize << labels.len();
        if !matrix.is_square() || matrix.rows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.rows(),
            });
        }
        let herm = matrix.hermiticity_error();
        if herm > STRUCTURAL_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr - re(1.0)).norm() > STRUCTURAL_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = hermitian_eigenvalues(&matrix)?[0];
        if min < -STRUCTURAL_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self {
            matrix,
            dims: vec![2; labels.len()],
            labels,
        })
    }

    /// Maximally mixed state on the given labels.
    pub fn maximally_mixed(labels: &[&str]) -> Self {
        let dim = 1usize << labels.len();
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
            dims: vec![2; labels.len()],
            labels: owned(labels),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix).expect("density operators are Hermitian")
    }

    /// Partial trace keeping `keep`, in the given order.
    pub fn reduce(&self, keep: &[&str]) -> Result<Self> {
        let mut idx = Vec::with_capacity(keep.len());
        for l in keep {
            let p = self
                .labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
            idx.push(p);
        }
        let matrix = linalg::partial_trace(&self.matrix, &self.dims, &idx)?;
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        let ascending: Vec<&str> = sorted.iter().map(|&i| self.labels[i].as_str()).collect();
        let reduced = Self {
            matrix,
            dims: vec![2; keep.len()],
            labels: owned(&ascending),
        };
        reduced.reorder(keep)
    }

    /// Permutes tensor factors so labels appear in `order`.
    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        let n = self.n_qubits();
        if order.len() != n {
            return Err(Error::BadPermutation(format!("{} labels for {n} qubits", order.len())));
        }
        let mut old_pos = Vec::with_capacity(n);
        for l in order {
            let p = self
                .labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::BadPermutation(format!("unknown label `{l}`")))?;
            if old_pos.contains(&p) {
                return Err(Error::BadPermutation(format!("label `{l}` repeated")));
            }
            old_pos.push(p);
        }
        let map = |x: usize| -> usize {
            old_pos
                .iter()
                .enumerate()
                .map(|(j, &p)| ((x >> (n - 1 - p)) & 1) << (n - 1 - j))
                .sum()
        };
        let dim = 1usize << n;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(map(i), map(j))] = self.matrix[(i, j)];
            }
        }
        Ok(Self {
            matrix: m,
            dims: self.dims.clone(),
            labels: owned(order),
        })
    }

    /// `⟨ψ|ρ|ψ⟩`, with `psi` reordered to this operator's labels.
    pub fn fidelity_with(&self, psi: &PureState) -> Result<f64> {
        let order: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        let psi = psi.reorder(&order)?;
        linalg::pure_fidelity(&self.matrix, psi.amplitudes())
    }

    pub fn max_abs_diff(&self, other: &DensityOperator) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }
}
