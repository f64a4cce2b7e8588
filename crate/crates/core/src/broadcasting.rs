//! Conditional broadcasting of an entangled pair through two unbalanced beam
//! splitters, post-selected on photons leaving by different ports.
//!
//! Alice holds `a1` (half of `α|00⟩ + β|11⟩`, partner `b1` at Bob) and `a2`
//! (half of a singlet shared with Charlie's `c`). Bob symmetrically holds `b1`
//! and `b2`, with `b2` entangled with Daniel's `d`.

use serde::Serialize;

use crate::cloning::Reflectivity;
use crate::error::{Error, Result};
use crate::linalg::{norm_sqr, re, ComplexMatrix, C64};
use crate::states::{bell_state, initial_pair, tensor, BellKind, DensityOperator, PureState};

/// Label order used for the six-qubit input and output states.
pub const LABELS: [&str; 6] = ["a1", "a2", "c", "b1", "b2", "d"];

/// Below this the post-selected branch cannot be normalized.
pub const MIN_LAMBDA_D: f64 = 1e-14;

/// Coincidence-basis action of one beam splitter:
/// `(1 - 2R) I + 2R |Ψ⁻⟩⟨Ψ⁻|`, i.e. `(1 - R) I - R SWAP`.
pub fn pi_operator(refl: Reflectivity) -> ComplexMatrix {
    let r = refl.r();
    let singlet = ComplexMatrix::projector(&BellKind::PsiMinus.amplitudes());
    &ComplexMatrix::identity(4).scale_real(1.0 - 2.0 * r) + &singlet.scale_real(2.0 * r)
}

/// `|ψ⟩_{a1b1} |Ψ⁻⟩_{a2c} |Ψ⁻⟩_{b2d}` in [`LABELS`] order.
pub fn build_input_state(alpha: C64, beta: C64) -> Result<PureState> {
    let psi = initial_pair(alpha, beta)?;
    let ac = bell_state(BellKind::PsiMinus).with_labels(&["a2", "c"])?;
    let bd = bell_state(BellKind::PsiMinus).with_labels(&["b2", "d"])?;
    tensor(&[&psi, &ac, &bd])?.reorder(&LABELS)
}

#[derive(Clone, Debug, Serialize)]
pub struct BroadcastResult {
    pub refl: Reflectivity,
    pub alpha: C64,
    pub beta: C64,
    /// Probability of the post-selected branch.
    pub lambda_d: f64,
    pub lambda_s: f64,
    pub phi_d: PureState,
    pub rho_a1b1: DensityOperator,
    pub rho_cd: DensityOperator,
    pub rho_a1c: DensityOperator,
    pub rho_b1d: DensityOperator,
}

pub fn run_broadcast(alpha: C64, beta: C64, refl: Reflectivity) -> Result<BroadcastResult> {
    run_broadcast_with_pi(alpha, beta, refl, &pi_operator(refl))
}

/// Same as [`run_broadcast`] with a caller-supplied two-qubit operator in
/// place of the beam-splitter action.
pub fn run_broadcast_with_pi(
    alpha: C64,
    beta: C64,
    refl: Reflectivity,
    pi: &ComplexMatrix,
) -> Result<BroadcastResult> {
    let input = build_input_state(alpha, beta)?;
    // apply the two senders' operators one at a time, renormalizing in between
    let raw_a = input.apply_operator(&["a1", "a2"], pi)?;
    let lambda_a = norm_sqr(&raw_a);
    if lambda_a < MIN_LAMBDA_D {
        return Err(Error::Degenerate(lambda_a));
    }
    let (mid, _) = PureState::normalize(input.labels().to_vec(), raw_a)?;
    let raw = mid.apply_operator(&["b1", "b2"], pi)?;
    let lambda_d = lambda_a * norm_sqr(&raw);
    if lambda_d < MIN_LAMBDA_D {
        return Err(Error::Degenerate(lambda_d));
    }
    let (phi_d, _) = PureState::normalize(input.labels().to_vec(), raw)?;
    let rho_a1b1 = phi_d.reduced(&["a1", "b1"])?;
    let rho_cd = phi_d.reduced(&["c", "d"])?;
    let rho_a1c = phi_d.reduced(&["a1", "c"])?;
    let rho_b1d = phi_d.reduced(&["b1", "d"])?;
    Ok(BroadcastResult {
        refl,
        alpha,
        beta,
        lambda_d,
        lambda_s: 1.0 - lambda_d,
        phi_d,
        rho_a1b1,
        rho_cd,
        rho_a1c,
        rho_b1d,
    })
}

/// `1 - 3R + 3R²`, the common denominator of every closed form below.
fn den(r: f64) -> f64 {
    1.0 - 3.0 * r + 3.0 * r * r
}

/// The post-selected state written term by term in the basis
/// `|a1 a2⟩|b1 b2⟩|c d⟩`, returned in [`LABELS`] order. The coefficient list
/// has norm `2(1 - 3R + 3R²)`, which is divided out.
pub fn phi_d_explicit(alpha: C64, beta: C64, refl: Reflectivity) -> Result<PureState> {
    let r = refl.r();
    let (u, t, v) = (1.0 - 2.0 * r, 1.0 - r, r);
    // (weight, a1a2, b1b2, cd)
    let alpha_terms: [(f64, usize, usize, usize); 9] = [
        (u * u, 0b00, 0b00, 0b11),
        (t * t, 0b01, 0b01, 0b00),
        (v * v, 0b10, 0b10, 0b00),
        (-u * t, 0b00, 0b01, 0b10),
        (-u * t, 0b01, 0b00, 0b01),
        (v * u, 0b00, 0b10, 0b10),
        (v * u, 0b10, 0b00, 0b01),
        (-v * t, 0b01, 0b10, 0b00),
        (-v * t, 0b10, 0b01, 0b00),
    ];
    let beta_terms: [(f64, usize, usize, usize); 9] = [
        (u * u, 0b11, 0b11, 0b00),
        (t * t, 0b10, 0b10, 0b11),
        (v * v, 0b01, 0b01, 0b11),
        (-u * t, 0b11, 0b10, 0b01),
        (-u * t, 0b10, 0b11, 0b10),
        (v * u, 0b11, 0b01, 0b01),
        (v * u, 0b01, 0b11, 0b10),
        (-v * t, 0b10, 0b01, 0b11),
        (-v * t, 0b01, 0b10, 0b11),
    ];
    let norm = 2.0 * den(r);
    if norm < MIN_LAMBDA_D {
        return Err(Error::Degenerate(norm));
    }
    let mut amps = vec![C64::default(); 64];
    for (coef, terms) in [(alpha, alpha_terms), (beta, beta_terms)] {
        for (w, a, b, cd) in terms {
            amps[(a << 4) | (b << 2) | cd] += coef * (w / norm);
        }
    }
    let labels = ["a1", "a2", "b1", "b2", "c", "d"];
    PureState::new(labels.iter().map(|s| s.to_string()).collect(), amps)?.reorder(&LABELS)
}

fn psi_projector(alpha: C64, beta: C64) -> ComplexMatrix {
    ComplexMatrix::projector(&[alpha, re(0.0), re(0.0), beta])
}

/// Closed form of the Alice-Bob output.
pub fn closed_form_rho_a1b1(alpha: C64, beta: C64, refl: Reflectivity) -> Result<DensityOperator> {
    let r = refl.r();
    let (a2, b2) = (alpha.norm_sqr(), beta.norm_sqr());
    let k = 4.0 * den(r) * den(r);
    let coherent = 4.0 * (1.0 - 2.0 * r).powi(2) * (1.0 - r).powi(2);
    let mix = 4.0 * (1.0 - 2.0 * r) * (1.0 - r) * r * r;
    let r4 = r.powi(4);
    let odd = r * r * (2.0 - 6.0 * r + 5.0 * r * r);
    let diag = ComplexMatrix::from_real_diag(&[r4 + mix * a2, odd, odd, r4 + mix * b2]);
    let m = &psi_projector(alpha, beta).scale_real(coherent) + &diag;
    DensityOperator::new(m.scale_real(1.0 / k), &["a1", "b1"])
}

/// Closed form of the Charlie-Daniel output.
pub fn closed_form_rho_cd(alpha: C64, beta: C64, refl: Reflectivity) -> Result<DensityOperator> {
    let r = refl.r();
    let (a2, b2) = (alpha.norm_sqr(), beta.norm_sqr());
    let k = 4.0 * den(r) * den(r);
    let coherent = 4.0 * r * r * (1.0 - r).powi(2);
    let u2 = (1.0 - 2.0 * r).powi(2);
    let mix = 4.0 * r * (1.0 - r) * u2;
    let u4 = u2 * u2;
    let odd = u2 * (1.0 - 2.0 * r + 2.0 * r * r);
    let diag = ComplexMatrix::from_real_diag(&[u4 + mix * a2, odd, odd, u4 + mix * b2]);
    let m = &psi_projector(alpha, beta).scale_real(coherent) + &diag;
    DensityOperator::new(m.scale_real(1.0 / k), &["c", "d"])
}

/// Closed form of the cross pair (a1, c). The pair (b1, d) is identical.
pub fn closed_form_rho_a1c(alpha: C64, beta: C64, refl: Reflectivity) -> Result<DensityOperator> {
    let r = refl.r();
    let (a2, b2) = (alpha.norm_sqr(), beta.norm_sqr());
    let t2 = (1.0 - r).powi(2);
    let lin = 1.0 - 4.0 * r + 3.0 * r * r;
    let off = r * (3.0 * r - 1.0);
    let diag = ComplexMatrix::from_real_diag(&[t2 * a2, lin * a2 + off, lin * b2 + off, t2 * b2]);
    let psi_plus = ComplexMatrix::projector(&BellKind::PsiPlus.amplitudes());
    let m = &diag + &psi_plus.scale_real(2.0 * r * (1.0 - 2.0 * r));
    DensityOperator::new(m.scale_real(1.0 / (2.0 * den(r))), &["a1", "c"])
}

/// Closed-form fidelities `(F_a1b1, F_cd)` of the outputs with the input pair.
pub fn broadcast_fidelities(alpha: C64, beta: C64, refl: Reflectivity) -> (f64, f64) {
    let r = refl.r();
    let k = 4.0 * den(r) * den(r);
    let quartic = alpha.norm_sqr().powi(2) + beta.norm_sqr().powi(2);
    let u = 1.0 - 2.0 * r;
    let t = 1.0 - r;
    let f_ab = (4.0 * u * u * t * t + r.powi(4) + 4.0 * u * t * r * r * quartic) / k;
    let f_cd = (4.0 * r * r * t * t + u.powi(4) + 4.0 * r * t * u * u * quartic) / k;
    (f_ab, f_cd)
}

/// `α = |α| e^{iφ}`, `β = √(1 - |α|²)`.
pub fn alpha_beta(alpha_abs: f64, phase: f64) -> Result<(C64, C64)> {
    if !(0.0..=1.0).contains(&alpha_abs) {
        return Err(Error::OutOfRange {
            name: "|alpha|",
            value: alpha_abs,
            allowed: "[0, 1]",
        });
    }
    if !phase.is_finite() {
        return Err(Error::InvalidArgument(format!("phase must be finite, got {phase}")));
    }
    Ok((C64::from_polar(alpha_abs, phase), re((1.0 - alpha_abs * alpha_abs).max(0.0).sqrt())))
}

/// Fidelity of `ρ` (on two qubits) with `α|00⟩ + β|11⟩`.
pub fn fidelity_with_input(rho: &DensityOperator, alpha: C64, beta: C64) -> Result<f64> {
    crate::linalg::pure_fidelity(rho.matrix(), &[alpha, re(0.0), re(0.0), beta])
}
