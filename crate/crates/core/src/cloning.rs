//! Universal asymmetric cloners and the beam-splitter fidelity correspondence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::states::PureState;

/// Cloner asymmetry. `q = 1 - p` is always derived, never stored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloneParams {
    p: f64,
}

impl CloneParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange {
                name: "p",
                value: p,
                allowed: "[0, 1]",
            });
        }
        Ok(Self { p })
    }

    pub fn symmetric() -> Self {
        Self { p: 0.5 }
    }

    pub fn p(self) -> f64 {
        self.p
    }

    pub fn q(self) -> f64 {
        1.0 - self.p
    }
}

/// Beam-splitter reflectivity restricted to `[0, 1/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reflectivity {
    r: f64,
}

impl Reflectivity {
    pub fn new(r: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&r) {
            return Err(Error::OutOfRange {
                name: "R",
                value: r,
                allowed: "[0, 1/2]",
            });
        }
        Ok(Self { r })
    }

    /// The symmetric point `R = 1/3`.
    pub fn symmetric() -> Self {
        Self { r: 1.0 / 3.0 }
    }

    pub fn r(self) -> f64 {
        self.r
    }

    pub fn t(self) -> f64 {
        1.0 - self.r
    }
}

/// Fidelities `(F_A, F_B)` of the two outputs of partial teleportation
/// through an unbalanced beam splitter.
pub fn filip_fidelities(refl: Reflectivity) -> (f64, f64) {
    let r = refl.r();
    let den = 2.0 * (1.0 - 3.0 * r + 3.0 * r * r);
    (
        (2.0 - 6.0 * r + 5.0 * r * r) / den,
        (1.0 - 2.0 * r + 2.0 * r * r) / den,
    )
}

/// Fidelities `(F_A, F_B)` of the d = 2 asymmetric cloner. `F_A` belongs to
/// the second output register of [`cloner_isometry`], `F_B` to the first.
pub fn asym_cloner_fidelities(params: CloneParams) -> (f64, f64) {
    let p = params.p();
    let den = 2.0 * (1.0 - p + p * p);
    ((2.0 - 2.0 * p + p * p) / den, (1.0 + p * p) / den)
}

/// `p = R / (1 - R)`.
pub fn p_from_r(refl: Reflectivity) -> CloneParams {
    CloneParams {
        p: (refl.r() / refl.t()).min(1.0),
    }
}

/// The cloner as a `d³ × d` isometry acting on `|j⟩|00⟩`. Output registers are
/// ordered (first clone, second clone, ancilla).
pub fn cloner_isometry(params: CloneParams, d: usize) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("cloner dimension must be at least 2, got {d}")));
    }
    let (p, q) = (params.p(), params.q());
    let norm = 1.0 / (1.0 + (d - 1) as f64 * (p * p + q * q)).sqrt();
    let idx = |a: usize, b: usize, c: usize| (a * d + b) * d + c;
    let mut u = ComplexMatrix::zeros(d * d * d, d);
    for j in 0..d {
        u[(idx(j, j, j), j)] += C64::new(norm, 0.0);
        for r in 1..d {
            let k = (j + r) % d;
            u[(idx(j, k, k), j)] += C64::new(p * norm, 0.0);
            u[(idx(k, j, k), j)] += C64::new(q * norm, 0.0);
        }
    }
    Ok(u)
}

pub const RECEIVERS: [&str; 6] = ["B1", "B2", "B3", "B4", "B5", "B6"];

/// The d = 4 cloner applied to `|0⟩` (branch 0) or `|3⟩` (branch 1), with each
/// qudit written as two qubits (0→00, 1→01, 2→10, 3→11) on receivers B1..B6.
pub fn eta(params: CloneParams, branch: usize) -> Result<PureState> {
    let j = match branch {
        0 => 0,
        1 => 3,
        _ => return Err(Error::InvalidArgument(format!("branch must be 0 or 1, got {branch}"))),
    };
    let u = cloner_isometry(params, 4)?;
    let amps = (0..64).map(|row| u[(row, j)]).collect();
    PureState::new(RECEIVERS.iter().map(|s| s.to_string()).collect(), amps)
}

/// `α η₀ + β η₁` on B1..B6.
pub fn apply_cloner_d4(params: CloneParams, alpha: C64, beta: C64) -> Result<PureState> {
    let n2 = alpha.norm_sqr() + beta.norm_sqr();
    if (n2 - 1.0).abs() > crate::linalg::STRUCTURAL_TOL {
        return Err(Error::NotNormalized(n2));
    }
    let (e0, e1) = (eta(params, 0)?, eta(params, 1)?);
    let amps = e0
        .amplitudes()
        .iter()
        .zip(e1.amplitudes())
        .map(|(a, b)| alpha * a + beta * b)
        .collect();
    PureState::new(e0.labels().to_vec(), amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, inner, re};
    use crate::states::PureState;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn filip_reference_points() {
        let (a, b) = filip_fidelities(Reflectivity::new(0.5).unwrap());
        assert!(close(a, 0.5, 1e-15) && close(b, 1.0, 1e-15));
        let (a, b) = filip_fidelities(Reflectivity::symmetric());
        assert!(close(a, 5.0 / 6.0, 1e-15) && close(b, 5.0 / 6.0, 1e-15));
        let (a, b) = filip_fidelities(Reflectivity::new(0.0).unwrap());
        assert!(close(a, 1.0, 1e-15) && close(b, 0.5, 1e-15));
    }

    #[test]
    fn cloner_reference_points() {
        let (a, b) = asym_cloner_fidelities(CloneParams::symmetric());
        assert!(close(a, 5.0 / 6.0, 1e-15) && close(b, 5.0 / 6.0, 1e-15));
        let (a, b) = asym_cloner_fidelities(CloneParams::new(0.0).unwrap());
        assert!(close(a, 1.0, 1e-15) && close(b, 0.5, 1e-15));
        let (a, b) = asym_cloner_fidelities(CloneParams::new(1.0).unwrap());
        assert!(close(a, 0.5, 1e-15) && close(b, 1.0, 1e-15));
    }

    #[test]
    fn p_from_r_points() {
        assert!(close(p_from_r(Reflectivity::symmetric()).p(), 0.5, 1e-15));
        assert_eq!(p_from_r(Reflectivity::new(0.0).unwrap()).p(), 0.0);
        assert_eq!(p_from_r(Reflectivity::new(0.5).unwrap()).p(), 1.0);
    }

    #[test]
    fn range_checks() {
        assert!(matches!(Reflectivity::new(0.6), Err(Error::OutOfRange { .. })));
        assert!(Reflectivity::new(-0.01).is_err());
        assert!(Reflectivity::new(f64::NAN).is_err());
        assert!(CloneParams::new(1.01).is_err());
        assert!(cloner_isometry(CloneParams::symmetric(), 1).is_err());
        assert!(eta(CloneParams::symmetric(), 2).is_err());
    }

    #[test]
    fn bridge_on_grid() {
        for i in 0..=50 {
            let r = Reflectivity::new(0.5 * i as f64 / 50.0).unwrap();
            let (fa, fb) = filip_fidelities(r);
            let (ga, gb) = asym_cloner_fidelities(p_from_r(r));
            assert!(close(fa, ga, 1e-12) && close(fb, gb, 1e-12), "R = {}", r.r());
        }
    }

    #[test]
    fn qubit_cloner_columns() {
        let params = CloneParams::new(0.3).unwrap();
        let (p, q) = (0.3f64, 0.7f64);
        let u = cloner_isometry(params, 2).unwrap();
        let n = 1.0 / (1.0 + p * p + q * q).sqrt();
        let col0: Vec<C64> = (0..8).map(|r| u[(r, 0)]).collect();
        let col1: Vec<C64> = (0..8).map(|r| u[(r, 1)]).collect();
        let mut e0 = vec![re(0.0); 8];
        e0[0b000] = re(n);
        e0[0b011] = re(p * n);
        e0[0b101] = re(q * n);
        let mut e1 = vec![re(0.0); 8];
        e1[0b111] = re(n);
        e1[0b100] = re(p * n);
        e1[0b010] = re(q * n);
        assert_eq!(col0, e0);
        assert_eq!(col1, e1);
    }

    // term lists written out by hand from the 0→00 .. 3→11 encoding
    fn explicit_eta(p: f64, branch: usize) -> Vec<C64> {
        let q = 1.0 - p;
        let n = 1.0 / (1.0 + 3.0 * (p * p + q * q)).sqrt();
        let terms: [(usize, f64); 7] = if branch == 0 {
            [
                (0b000000, 1.0),
                (0b000101, p),
                (0b001010, p),
                (0b001111, p),
                (0b010001, q),
                (0b100010, q),
                (0b110011, q),
            ]
        } else {
            [
                (0b111111, 1.0),
                (0b110000, p),
                (0b110101, p),
                (0b111010, p),
                (0b001100, q),
                (0b011101, q),
                (0b101110, q),
            ]
        };
        let mut v = vec![re(0.0); 64];
        for (i, w) in terms {
            v[i] = re(w * n);
        }
        v
    }

    #[test]
    fn eta_matches_term_lists() {
        for &p in &[0.0, 0.25, 0.5, 0.8, 1.0] {
            let params = CloneParams::new(p).unwrap();
            for branch in 0..2 {
                let e = eta(params, branch).unwrap();
                let expected = explicit_eta(p, branch);
                for (a, b) in e.amplitudes().iter().zip(&expected) {
                    assert!((a - b).norm() < 1e-15);
                }
            }
        }
        let e0 = eta(CloneParams::symmetric(), 0).unwrap();
        let nonzero: Vec<usize> = (0..64).filter(|&i| e0.amplitudes()[i].norm() > 0.0).collect();
        assert_eq!(nonzero, vec![0b000000, 0b000101, 0b001010, 0b001111, 0b010001, 0b100010, 0b110011]);
    }

    #[test]
    fn d4_superposition() {
        let params = CloneParams::symmetric();
        let s = apply_cloner_d4(params, re(1.0), re(0.0)).unwrap();
        assert_eq!(s, eta(params, 0).unwrap());
        let s = apply_cloner_d4(params, re(0.0), re(1.0)).unwrap();
        assert_eq!(s, eta(params, 1).unwrap());
        assert!(apply_cloner_d4(params, re(1.0), re(1.0)).is_err());
    }

    fn qubit_clone_fidelities(params: CloneParams, phi: [C64; 2]) -> (f64, f64) {
        let u = cloner_isometry(params, 2).unwrap();
        let out = u.apply(&phi).unwrap();
        let s = PureState::new(vec!["x".into(), "y".into(), "z".into()], out).unwrap();
        let single = |label: &str| {
            let single = PureState::new(vec![label.to_string()], phi.to_vec()).unwrap();
            s.reduced(&[label]).unwrap().fidelity_with(&single).unwrap()
        };
        (single("x"), single("y"))
    }

    proptest! {
        #[test]
        fn clone_fidelities_are_universal(
            p in 0.0f64..=1.0,
            theta in 0.0f64..std::f64::consts::PI,
            phase in 0.0f64..std::f64::consts::TAU,
        ) {
            let params = CloneParams::new(p).unwrap();
            let phi = [re((theta / 2.0).cos()), C64::from_polar((theta / 2.0).sin(), phase)];
            let (first, second) = qubit_clone_fidelities(params, phi);
            let (fa, fb) = asym_cloner_fidelities(params);
            prop_assert!((second - fa).abs() < 1e-10);
            prop_assert!((first - fb).abs() < 1e-10);
        }

        #[test]
        fn isometry_columns_orthonormal(p in 0.0f64..=1.0, d in 2usize..=4) {
            let u = cloner_isometry(CloneParams::new(p).unwrap(), d).unwrap();
            let g = u.adjoint().matmul(&u).unwrap();
            prop_assert!(g.max_abs_diff(&ComplexMatrix::identity(d)) < 1e-12);
        }

        #[test]
        fn eta_branches_orthogonal(p in 0.0f64..=1.0) {
            let params = CloneParams::new(p).unwrap();
            let (e0, e1) = (eta(params, 0).unwrap(), eta(params, 1).unwrap());
            prop_assert!(inner(e0.amplitudes(), e1.amplitudes()).norm() < 1e-12);
        }

        #[test]
        fn d4_output_normalized(p in 0.0f64..=1.0, theta in 0.0f64..1.6, phase in 0.0f64..6.3) {
            let params = CloneParams::new(p).unwrap();
            let s = apply_cloner_d4(params, re(theta.cos()), c(theta.sin() * phase.cos(), theta.sin() * phase.sin())).unwrap();
            prop_assert!((crate::linalg::norm_sqr(s.amplitudes()) - 1.0).abs() < 1e-12);
        }
    }
}
