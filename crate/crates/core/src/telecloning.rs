//! Telecloning of an entangled pair: two senders holding `α|00⟩ + β|11⟩` on
//! (A1, A2) share an eight-qubit channel with six receivers. After two Bell
//! measurements and four classical bits the receivers hold the output of an
//! asymmetric d = 4 cloner, without any receiver-side interaction.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cloning::{apply_cloner_d4, eta, CloneParams, RECEIVERS};
use crate::error::{Error, Result};
use crate::linalg::{pauli, re, ComplexMatrix, C64};
use crate::protocol::ProtocolTranscript;
use crate::states::{bell_basis, initial_pair, tensor, BellKind, DensityOperator, OutcomeChoice, PureState};

pub const SENDERS: [&str; 2] = ["A1", "A2"];
pub const SENDER_CHANNEL: [&str; 2] = ["A1'", "A2'"];

#[derive(Clone, Debug, Serialize)]
pub struct TelecloningChannel {
    pub params: CloneParams,
    /// `(|00⟩η₀ + |11⟩η₁)/√2` on A1', A2', B1..B6.
    pub state: PureState,
}

pub fn build_channel(params: CloneParams) -> Result<TelecloningChannel> {
    let (e0, e1) = (eta(params, 0)?, eta(params, 1)?);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![C64::default(); 256];
    for i in 0..64 {
        amps[i] = e0.amplitudes()[i] * s;
        amps[(0b11 << 6) | i] = e1.amplitudes()[i] * s;
    }
    let labels = SENDER_CHANNEL.iter().chain(RECEIVERS.iter()).map(|l| l.to_string()).collect();
    Ok(TelecloningChannel {
        params,
        state: PureState::new(labels, amps)?,
    })
}

/// Single-qubit recovery operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Recovery {
    I,
    Z,
    X,
    /// The product `σ_x σ_z`.
    XZ,
}

impl Recovery {
    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Recovery::I => pauli::identity(),
            Recovery::Z => pauli::z(),
            Recovery::X => pauli::x(),
            Recovery::XZ => &pauli::x() * &pauli::z(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Recovery::I => "I",
            Recovery::Z => "sigma_z",
            Recovery::X => "sigma_x",
            Recovery::XZ => "sigma_x sigma_z",
        }
    }
}

impl fmt::Display for Recovery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryPlan {
    /// Outcomes on (A1, A1') and (A2, A2').
    pub outcome: (BellKind, BellKind),
    /// Operations for B1..B6.
    pub operators: [Recovery; 6],
    /// False for the mixed Φ/Ψ pairs, which never occur.
    pub possible: bool,
}

impl RecoveryPlan {
    pub fn describe(&self) -> String {
        self.operators.iter().map(|r| r.name()).collect::<Vec<_>>().join(" ⊗ ")
    }
}

fn is_phi(k: BellKind) -> bool {
    matches!(k, BellKind::PhiPlus | BellKind::PhiMinus)
}

fn is_plus(k: BellKind) -> bool {
    matches!(k, BellKind::PhiPlus | BellKind::PsiPlus)
}

pub fn recovery_plan(outcome: (BellKind, BellKind)) -> RecoveryPlan {
    use Recovery::*;
    let (first, second) = outcome;
    let possible = is_phi(first) == is_phi(second);
    let same_sign = is_plus(first) == is_plus(second);
    let operators = match (possible, is_phi(first), same_sign) {
        (false, _, _) => [I; 6],
        (true, true, true) => [I; 6],
        (true, true, false) => [Z, I, Z, I, Z, I],
        (true, false, true) => [X; 6],
        (true, false, false) => [XZ, X, XZ, X, XZ, X],
    };
    RecoveryPlan {
        outcome,
        operators,
        possible,
    }
}

/// The eight outcome pairs that can occur.
pub fn possible_outcomes() -> Vec<(BellKind, BellKind)> {
    let mut v = Vec::new();
    for a in BellKind::ALL {
        for b in BellKind::ALL {
            if recovery_plan((a, b)).possible {
                v.push((a, b));
            }
        }
    }
    v
}

pub enum OutcomeSource {
    EnumerateAll,
    Seeded(u64),
}

#[derive(Clone, Debug, Serialize)]
pub struct TelecloneOutcome {
    pub outcome: (BellKind, BellKind),
    pub probability: f64,
    pub plan: RecoveryPlan,
    pub pre_recovery: PureState,
    pub receiver_state: PureState,
    /// `|⟨Π|receivers⟩|²` with `|Π⟩ = αη₀ + βη₁`.
    pub fidelity: f64,
    pub transcript: ProtocolTranscript,
}

/// Runs the protocol on `α|00⟩ + β|11⟩`, either over all outcomes with
/// nonzero probability or for one seeded random outcome.
pub fn run_telecloning(
    alpha: C64,
    beta: C64,
    params: CloneParams,
    source: OutcomeSource,
) -> Result<Vec<TelecloneOutcome>> {
    let input = initial_pair(alpha, beta)?.with_labels(&SENDERS)?;
    let channel = build_channel(params)?;
    let joint = tensor(&[&input, &channel.state])?;
    let target = apply_cloner_d4(params, alpha, beta)?;
    let basis = bell_basis();
    let first_pair = [SENDERS[0], SENDER_CHANNEL[0]];
    let second_pair = [SENDERS[1], SENDER_CHANNEL[1]];

    let mut runs = Vec::new();
    match source {
        OutcomeSource::EnumerateAll => {
            for k1 in 0..4 {
                let m1 = joint.measure_in_basis(first_pair, &basis, OutcomeChoice::Fixed(k1))?;
                for k2 in 0..4 {
                    let m2 = match m1.post_state.measure_in_basis(second_pair, &basis, OutcomeChoice::Fixed(k2)) {
                        Ok(m) => m,
                        Err(Error::ZeroProbability { .. }) => continue,
                        Err(e) => return Err(e),
                    };
                    runs.push(finish(
                        None,
                        (k1, m1.probability),
                        (k2, m2.probability),
                        m2.post_state,
                        &target,
                    )?);
                }
            }
        }
        OutcomeSource::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m1 = joint.measure_in_basis(first_pair, &basis, OutcomeChoice::Sampled(&mut rng))?;
            let m2 = m1
                .post_state
                .measure_in_basis(second_pair, &basis, OutcomeChoice::Sampled(&mut rng))?;
            runs.push(finish(
                Some(seed),
                (m1.outcome, m1.probability),
                (m2.outcome, m2.probability),
                m2.post_state,
                &target,
            )?);
        }
    }
    Ok(runs)
}

fn finish(
    seed: Option<u64>,
    (k1, p1): (usize, f64),
    (k2, p2): (usize, f64),
    receivers: PureState,
    target: &PureState,
) -> Result<TelecloneOutcome> {
    let outcome = (BellKind::ALL[k1], BellKind::ALL[k2]);
    let plan = recovery_plan(outcome);
    let mut t = ProtocolTranscript::new(seed);
    t.measurement(SENDERS[0], "bell(A1,A1')", outcome.0.name(), p1);
    t.measurement(SENDERS[1], "bell(A2,A2')", outcome.1.name(), p2);
    for (sender, kind) in SENDERS.iter().zip([outcome.0, outcome.1]) {
        for rx in RECEIVERS {
            t.message(sender, rx, kind.bits());
        }
    }
    let mut state = receivers.clone();
    for (rx, op) in RECEIVERS.iter().zip(plan.operators) {
        t.local_op(rx, op.name());
        state = state.apply_unitary(&[rx], &op.matrix())?;
    }
    let fidelity = state.fidelity(target)?;
    Ok(TelecloneOutcome {
        outcome,
        probability: p1 * p2,
        plan,
        pre_recovery: receivers,
        receiver_state: state,
        fidelity,
        transcript: t,
    })
}

/// Reduced states of the two clone pairs (B1, B2) and (B3, B4).
pub fn output_clones(alpha: C64, beta: C64, params: CloneParams) -> Result<(DensityOperator, DensityOperator)> {
    let pi = apply_cloner_d4(params, alpha, beta)?;
    Ok((pi.reduced(&["B1", "B2"])?, pi.reduced(&["B3", "B4"])?))
}

/// `[(1 - q² + 3p²)|ψ⟩⟨ψ| + q² I] / (1 + 3(p² + q²))` and its `p ↔ q` partner.
pub fn closed_form_clones(
    alpha: C64,
    beta: C64,
    params: CloneParams,
) -> Result<(DensityOperator, DensityOperator)> {
    let (p, q) = (params.p(), params.q());
    let n = 1.0 + 3.0 * (p * p + q * q);
    let psi = ComplexMatrix::projector(&[alpha, re(0.0), re(0.0), beta]);
    let id = ComplexMatrix::identity(4);
    let make = |a: f64, b: f64| &psi.scale_real(a / n) + &id.scale_real(b / n);
    Ok((
        DensityOperator::new(make(1.0 - q * q + 3.0 * p * p, q * q), &["B1", "B2"])?,
        DensityOperator::new(make(1.0 - p * p + 3.0 * q * q, p * p), &["B3", "B4"])?,
    ))
}

/// Clone fidelities `((1 + 3p²)/n, (1 + 3q²)/n)` with `n = 1 + 3(p² + q²)`.
pub fn clone_fidelities(params: CloneParams) -> (f64, f64) {
    let (p, q) = (params.p(), params.q());
    let n = 1.0 + 3.0 * (p * p + q * q);
    ((1.0 + 3.0 * p * p) / n, (1.0 + 3.0 * q * q) / n)
}

#[derive(Clone, Debug, Serialize)]
pub struct CloneReport {
    pub p: f64,
    #[serde(rename = "fidelity_B1B2")]
    pub fidelity_b1b2: f64,
    #[serde(rename = "fidelity_B3B4")]
    pub fidelity_b3b4: f64,
    pub closed_form_match: bool,
}

pub fn clone_report(alpha: C64, beta: C64, params: CloneParams) -> Result<CloneReport> {
    let (b12, b34) = output_clones(alpha, beta, params)?;
    let (c12, c34) = closed_form_clones(alpha, beta, params)?;
    let psi = [alpha, re(0.0), re(0.0), beta];
    let f12 = crate::linalg::pure_fidelity(b12.matrix(), &psi)?;
    let f34 = crate::linalg::pure_fidelity(b34.matrix(), &psi)?;
    let (g12, g34) = clone_fidelities(params);
    let closed_form_match = b12.max_abs_diff(&c12) < 1e-10
        && b34.max_abs_diff(&c34) < 1e-10
        && (f12 - g12).abs() < 1e-10
        && (f34 - g34).abs() < 1e-10;
    Ok(CloneReport {
        p: params.p(),
        fidelity_b1b2: f12,
        fidelity_b3b4: f34,
        closed_form_match,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Resources {
    pub ebits: u32,
    pub cbits: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ResourceReport {
    /// Teleport the pair to one party, clone locally, teleport the clones on.
    pub naive: Resources,
    pub telecloning: Resources,
}

pub fn resource_report() -> ResourceReport {
    ResourceReport {
        naive: Resources { ebits: 5, cbits: 10 },
        telecloning: Resources { ebits: 1, cbits: 4 },
    }
}
