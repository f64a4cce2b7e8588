//! Party-level bookkeeping and the standard teleportation protocol over a
//! mixed two-qubit channel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pauli, pure_fidelity, ComplexMatrix, C64, STRUCTURAL_TOL};
use crate::states::{BellKind, DensityOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    LocalOp,
    Measurement,
    ClassicalSend,
    ClassicalReceive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub step: usize,
    pub actor: String,
    pub action: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical_message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operation: Option<String>,
    /// Receiver of a send, or sender of a receive.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peer: Option<String>,
}

impl Event {
    fn bare(step: usize, actor: &str, action: EventKind) -> Self {
        Self {
            step,
            actor: actor.to_string(),
            action,
            outcome: None,
            probability: None,
            classical_message: None,
            operation: None,
            peer: None,
        }
    }
}

/// Ordered log of one protocol run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub seed: Option<u64>,
    pub events: Vec<Event>,
}

impl ProtocolTranscript {
    pub fn new(seed: Option<u64>) -> Self {
        Self { seed, events: Vec::new() }
    }

    fn push(&mut self, mut event: Event) {
        event.step = self.events.len();
        self.events.push(event);
    }

    pub fn local_op(&mut self, actor: &str, operation: &str) {
        let mut e = Event::bare(0, actor, EventKind::LocalOp);
        e.operation = Some(operation.to_string());
        self.push(e);
    }

    pub fn measurement(&mut self, actor: &str, operation: &str, outcome: &str, probability: f64) {
        let mut e = Event::bare(0, actor, EventKind::Measurement);
        e.operation = Some(operation.to_string());
        e.outcome = Some(outcome.to_string());
        e.probability = Some(probability);
        self.push(e);
    }

    /// Logs a send from `from` to `to` immediately followed by its receipt.
    pub fn message(&mut self, from: &str, to: &str, payload: &str) {
        let mut send = Event::bare(0, from, EventKind::ClassicalSend);
        send.peer = Some(to.to_string());
        send.classical_message = Some(payload.to_string());
        self.push(send);
        let mut recv = Event::bare(0, to, EventKind::ClassicalReceive);
        recv.peer = Some(from.to_string());
        recv.classical_message = Some(payload.to_string());
        self.push(recv);
    }

    /// Checks step numbering, that every receive has an earlier matching
    /// send, and that measurements carry an outcome and probability.
    pub fn validate(&self) -> Result<()> {
        let mut pending: Vec<(&str, &str, &str)> = Vec::new();
        for (i, e) in self.events.iter().enumerate() {
            if e.step != i {
                return Err(Error::InvalidArgument(format!("event {i} has step {}", e.step)));
            }
            match e.action {
                EventKind::Measurement => {
                    if e.outcome.is_none() || e.probability.is_none() {
                        return Err(Error::InvalidArgument(format!(
                            "measurement at step {i} lacks outcome or probability"
                        )));
                    }
                }
                EventKind::ClassicalSend => {
                    let (to, msg) = (e.peer.as_deref(), e.classical_message.as_deref());
                    match (to, msg) {
                        (Some(to), Some(msg)) => pending.push((e.actor.as_str(), to, msg)),
                        _ => {
                            return Err(Error::InvalidArgument(format!(
                                "send at step {i} lacks a peer or payload"
                            )))
                        }
                    }
                }
                EventKind::ClassicalReceive => {
                    let key = (
                        e.peer.as_deref().unwrap_or(""),
                        e.actor.as_str(),
                        e.classical_message.as_deref().unwrap_or(""),
                    );
                    match pending.iter().position(|p| *p == key) {
                        Some(k) => {
                            pending.remove(k);
                        }
                        None => {
                            return Err(Error::InvalidArgument(format!(
                                "receive at step {i} has no matching earlier send"
                            )))
                        }
                    }
                }
                EventKind::LocalOp => {}
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcripts always serialize")
    }
}

/// Pauli frame of a Bell state: `|B⟩ = (I ⊗ P)|Φ⁺⟩`.
pub fn bell_frame(kind: BellKind) -> ComplexMatrix {
    match kind {
        BellKind::PhiPlus => pauli::identity(),
        BellKind::PhiMinus => pauli::z(),
        BellKind::PsiPlus => pauli::x(),
        BellKind::PsiMinus => &pauli::x() * &pauli::z(),
    }
}

/// Bell state with the largest weight in `channel`.
pub fn channel_frame(channel: &DensityOperator) -> Result<BellKind> {
    require_pair(channel)?;
    let mut best = (f64::NEG_INFINITY, BellKind::PhiPlus);
    for kind in BellKind::ALL {
        let w = pure_fidelity(channel.matrix(), &kind.amplitudes())?;
        if w > best.0 + 1e-12 {
            best = (w, kind);
        }
    }
    Ok(best.1)
}

fn require_pair(channel: &DensityOperator) -> Result<()> {
    if channel.dims() != [2, 2] {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: channel.matrix().rows(),
        });
    }
    Ok(())
}

/// The receiver's correction for each Bell outcome, relative to the
/// channel's frame `c`: `P_k† P_c†`, i.e. an element of {I, σ_z, σ_x, σ_xσ_z}
/// up to phase.
pub fn corrections(frame: BellKind) -> [ComplexMatrix; 4] {
    let pc = bell_frame(frame).adjoint();
    BellKind::ALL.map(|k| &bell_frame(k).adjoint() * &pc)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TeleportationRun {
    /// Outcome probabilities in [`BellKind::ALL`] order.
    pub probabilities: [f64; 4],
    /// `Σ_k p_k ⟨φ|ρ_k|φ⟩` after correction.
    pub average_fidelity: f64,
}

/// Teleports `input` through `channel`: the sender Bell-measures the input
/// with the channel's first qubit, the receiver applies the correction from
/// [`corrections`] to the second.
pub fn simulate_standard_teleportation(channel: &DensityOperator, input: &[C64; 2]) -> Result<TeleportationRun> {
    let frame = channel_frame(channel)?;
    teleport_with_frame(channel, input, &corrections(frame))
}

fn teleport_with_frame(
    channel: &DensityOperator,
    input: &[C64; 2],
    fixes: &[ComplexMatrix; 4],
) -> Result<TeleportationRun> {
    require_pair(channel)?;
    let n2 = input[0].norm_sqr() + input[1].norm_sqr();
    if (n2 - 1.0).abs() > STRUCTURAL_TOL {
        return Err(Error::NotNormalized(n2));
    }
    let rho = channel.matrix();
    let mut probabilities = [0.0; 4];
    let mut average_fidelity = 0.0;
    for (k, kind) in BellKind::ALL.into_iter().enumerate() {
        let b = kind.amplitudes();
        // v[a] = Σ_i conj(B[i a]) φ[i]
        let v = [0, 1].map(|a| b[a].conj() * input[0] + b[2 + a].conj() * input[1]);
        let post = ComplexMatrix::from_fn(2, 2, |r, s| {
            let mut acc = C64::default();
            for a in 0..2 {
                for ap in 0..2 {
                    acc += v[a] * v[ap].conj() * rho[(2 * a + r, 2 * ap + s)];
                }
            }
            acc
        });
        probabilities[k] = post.trace().re;
        let corrected = &(&fixes[k] * &post) * &fixes[k].adjoint();
        let f = corrected.apply(input)?;
        average_fidelity += (input[0].conj() * f[0] + input[1].conj() * f[1]).re;
    }
    Ok(TeleportationRun {
        probabilities,
        average_fidelity,
    })
}

/// Haar-uniform single-qubit state from four standard normal draws.
pub fn haar_random_qubit<R: Rng + ?Sized>(rng: &mut R) -> [C64; 2] {
    loop {
        let g: [f64; 4] = [0; 4].map(|_| rng.sample(StandardNormal));
        let n = (g.iter().map(|x| x * x).sum::<f64>()).sqrt();
        if n > 1e-12 {
            return [C64::new(g[0] / n, g[1] / n), C64::new(g[2] / n, g[3] / n)];
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

const CHUNK: usize = 4096;

/// Mean teleportation fidelity over Haar-random inputs. Samples are drawn in
/// fixed-size chunks, each from its own ChaCha stream derived from `seed`, so
/// the result does not depend on thread count.
pub fn monte_carlo_teleportation_fidelity(
    channel: &DensityOperator,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if n_samples < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 samples, got {n_samples}")));
    }
    let fixes = corrections(channel_frame(channel)?);
    let chunks = n_samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|ci| -> Result<(f64, f64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ci as u64);
            let count = CHUNK.min(n_samples - ci * CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let phi = haar_random_qubit(&mut rng);
                let f = teleport_with_frame(channel, &phi, &fixes)?.average_fidelity;
                s += f;
                s2 += f * f;
            }
            Ok((s, s2))
        })
        .collect::<Result<_>>()?;
    let (s, s2) = partial.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let n = n_samples as f64;
    let mean = s / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(MonteCarloEstimate {
        mean,
        stderr: (var / n).sqrt(),
        samples: n_samples,
        seed,
    })
}

/// `p |Ψ⁻⟩⟨Ψ⁻| + (1 - p) I/4`.
pub fn werner_state(p: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            allowed: "[0, 1]",
        });
    }
    let singlet = ComplexMatrix::projector(&BellKind::PsiMinus.amplitudes());
    let m = &singlet.scale_real(p) + &ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
    DensityOperator::new(m, &["x", "y"])
}

/// Report of a Monte-Carlo check of the `ℱ_max` formula.
#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloReport {
    pub channel: String,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "F_max_formula")]
    pub f_max_formula: f64,
    #[serde(rename = "F_mc")]
    pub f_mc: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

pub fn monte_carlo_report(
    descriptor: &str,
    channel: &DensityOperator,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    let tele = crate::criteria::teleportation_n(channel)?;
    let mc = monte_carlo_teleportation_fidelity(channel, n_samples, seed)?;
    Ok(MonteCarloReport {
        channel: descriptor.to_string(),
        n: tele.n,
        f_max_formula: tele.f_max,
        f_mc: mc.mean,
        stderr: mc.stderr,
        samples: mc.samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use crate::states::bell_state;
    use proptest::prelude::*;

    fn singlet() -> DensityOperator {
        bell_state(BellKind::PsiMinus).to_density()
    }

    #[test]
    fn corrections_are_standard_set() {
        let xz = &pauli::x() * &pauli::z();
        let allowed = [pauli::identity(), pauli::z(), pauli::x(), xz];
        for frame in BellKind::ALL {
            for u in corrections(frame) {
                // equal to an allowed operator up to a global phase
                let ok = allowed.iter().any(|a| {
                    let overlap = (&a.adjoint() * &u).trace() / 2.0;
                    (overlap.norm() - 1.0).abs() < 1e-12
                });
                assert!(ok);
            }
        }
    }

    #[test]
    fn every_bell_channel_teleports_perfectly() {
        for kind in BellKind::ALL {
            let ch = bell_state(kind).to_density();
            assert_eq!(channel_frame(&ch).unwrap(), kind);
            let phi = [re(0.6), C64::new(0.0, 0.8)];
            let run = simulate_standard_teleportation(&ch, &phi).unwrap();
            assert!((run.average_fidelity - 1.0).abs() < 1e-12);
            for p in run.probabilities {
                assert!((p - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn maximally_mixed_channel_gives_half() {
        let ch = DensityOperator::maximally_mixed(&["x", "y"]);
        let run = simulate_standard_teleportation(&ch, &[re(1.0), re(0.0)]).unwrap();
        assert!((run.average_fidelity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let three = DensityOperator::maximally_mixed(&["x", "y", "z"]);
        assert!(simulate_standard_teleportation(&three, &[re(1.0), re(0.0)]).is_err());
        assert!(simulate_standard_teleportation(&singlet(), &[re(1.0), re(1.0)]).is_err());
        assert!(monte_carlo_teleportation_fidelity(&singlet(), 99, 1).is_err());
        assert!(werner_state(1.5).is_err());
    }

    #[test]
    fn werner_channel_beats_classical() {
        let w = werner_state(0.8).unwrap();
        let mc = monte_carlo_teleportation_fidelity(&w, 20_000, 11).unwrap();
        // ½(1 + p)
        assert!((mc.mean - 0.9).abs() < 3.0 * mc.stderr + 1e-12);
        assert!(mc.mean > 2.0 / 3.0);
    }

    #[test]
    fn singlet_monte_carlo_is_exact() {
        let mc = monte_carlo_teleportation_fidelity(&singlet(), 1000, 3).unwrap();
        assert!((mc.mean - 1.0).abs() < 1e-12);
        assert!(mc.stderr < 1e-12);
    }

    #[test]
    fn haar_samples_are_uniform_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut mean = [0.0; 3];
        for _ in 0..n {
            let [a, b] = haar_random_qubit(&mut rng);
            assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-12);
            let ab = a.conj() * b;
            mean[0] += 2.0 * ab.re;
            mean[1] += 2.0 * ab.im;
            mean[2] += a.norm_sqr() - b.norm_sqr();
        }
        let m = (mean.iter().map(|x| (x / n as f64).powi(2)).sum::<f64>()).sqrt();
        assert!(m < 0.02);
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(haar_random_qubit(&mut r1), haar_random_qubit(&mut r2));
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let w = werner_state(0.5).unwrap();
        let a = monte_carlo_teleportation_fidelity(&w, 10_000, 42).unwrap();
        let b = monte_carlo_teleportation_fidelity(&w, 10_000, 42).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn transcript_validation() {
        let mut t = ProtocolTranscript::new(Some(1));
        t.measurement("A1", "bell(A1,A1')", "Phi+", 0.25);
        t.message("A1", "B1", "00");
        t.local_op("B1", "I");
        assert!(t.validate().is_ok());
        let json = t.to_json();
        let back: ProtocolTranscript = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert!(json.contains("\"classical_send\""));

        let mut bad = t.clone();
        bad.events.remove(1);
        for (i, e) in bad.events.iter_mut().enumerate() {
            e.step = i;
        }
        assert!(bad.validate().is_err());

        let mut bad = t.clone();
        bad.events[0].probability = None;
        assert!(bad.validate().is_err());

        let mut bad = t;
        bad.events[2].classical_message = Some("01".into());
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn outcome_probabilities_sum_to_one(
            seed in prop::collection::vec(-1.0f64..1.0, 32),
            theta in 0.0f64..3.2,
            phase in 0.0f64..6.3,
        ) {
            prop_assume!(seed.iter().map(|x| x * x).sum::<f64>() > 0.5);
            let a = ComplexMatrix::from_fn(4, 4, |i, j| C64::new(seed[2 * (4 * i + j)], seed[2 * (4 * i + j) + 1]));
            let m = &a * &a.adjoint();
            let tr = m.trace().re;
            let ch = DensityOperator::new(m.scale_real(1.0 / tr), &["x", "y"]).unwrap();
            let phi = [re((theta / 2.0).cos()), C64::from_polar((theta / 2.0).sin(), phase)];
            let run = simulate_standard_teleportation(&ch, &phi).unwrap();
            prop_assert!((run.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&run.average_fidelity));
        }
    }
}
