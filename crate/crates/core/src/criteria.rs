//! Two-qubit diagnostics: PPT separability, the correlation-matrix CHSH
//! quantity M(ρ), teleportation usefulness N(ρ), and the closed-form
//! separability windows of the broadcast outputs.

use rayon::prelude::*;
use serde::Serialize;

use crate::broadcasting::{self, alpha_beta, fidelity_with_input};
use crate::cloning::Reflectivity;
use crate::error::{Error, Result};
use crate::linalg::{self, c, kron, pauli, re, ComplexMatrix, C64};
use crate::states::DensityOperator;

/// PT eigenvalues at or above this count as separable.
pub const PPT_TOL: f64 = 1e-10;
/// Half-width of the band reported as [`PptClass::Boundary`].
pub const BOUNDARY_BAND: f64 = 1e-6;

fn require_two_qubits(rho: &DensityOperator) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.matrix().rows(),
        });
    }
    Ok(())
}

/// `ρ = ¼(I⊗I + r·σ⊗I + I⊗s·σ + Σ t_mn σ_m⊗σ_n)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlochDecomposition {
    pub r: [f64; 3],
    pub s: [f64; 3],
    pub t: [[f64; 3]; 3],
}

impl BlochDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let sig = pauli::all();
        let id = pauli::identity();
        let mut m = ComplexMatrix::identity(4);
        for i in 0..3 {
            m = &m + &kron(&sig[i], &id).scale_real(self.r[i]);
            m = &m + &kron(&id, &sig[i]).scale_real(self.s[i]);
            for j in 0..3 {
                m = &m + &kron(&sig[i], &sig[j]).scale_real(self.t[i][j]);
            }
        }
        m.scale_real(0.25)
    }

    /// `T` as a (real) matrix.
    pub fn t_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(3, 3, |i, j| re(self.t[i][j]))
    }

    fn t_times(&self, v: [f64; 3]) -> [f64; 3] {
        let t = &self.t;
        [0, 1, 2].map(|i| t[i][0] * v[0] + t[i][1] * v[1] + t[i][2] * v[2])
    }
}

fn expectation(rho: &ComplexMatrix, op: &ComplexMatrix) -> f64 {
    (rho * op).trace().re
}

pub fn bloch_decompose(rho: &DensityOperator) -> Result<BlochDecomposition> {
    require_two_qubits(rho)?;
    let m = rho.matrix();
    let sig = pauli::all();
    let id = pauli::identity();
    let r = [0, 1, 2].map(|i| expectation(m, &kron(&sig[i], &id)));
    let s = [0, 1, 2].map(|i| expectation(m, &kron(&id, &sig[i])));
    let t = [0, 1, 2].map(|i| [0, 1, 2].map(|j| expectation(m, &kron(&sig[i], &sig[j]))));
    Ok(BlochDecomposition { r, s, t })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PptClass {
    Separable,
    /// Minimum PT eigenvalue within ±1e-6 of zero.
    Boundary,
    Inseparable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PptVerdict {
    pub separable: bool,
    pub min_eigenvalue: f64,
    pub class: PptClass,
}

/// Peres-Horodecki test, exact for two qubits.
pub fn ppt_separable(rho: &DensityOperator) -> Result<PptVerdict> {
    require_two_qubits(rho)?;
    let pt = linalg::partial_transpose(rho.matrix(), [2, 2], 1)?;
    let min_eigenvalue = linalg::hermitian_eigenvalues(&pt)?[0];
    let class = if min_eigenvalue.abs() < BOUNDARY_BAND {
        PptClass::Boundary
    } else if min_eigenvalue > 0.0 {
        PptClass::Separable
    } else {
        PptClass::Inseparable
    };
    Ok(PptVerdict {
        separable: min_eigenvalue >= -PPT_TOL,
        min_eigenvalue,
        class,
    })
}

fn u_eigenvalues(rho: &DensityOperator) -> Result<Vec<f64>> {
    let t = bloch_decompose(rho)?.t_matrix();
    linalg::hermitian_eigenvalues(&t.transpose().matmul(&t)?)
}

/// `M(ρ)`: sum of the two largest eigenvalues of `TᵀT`. The CHSH inequality
/// is violated by some measurement settings iff `M > 1`.
pub fn chsh_m(rho: &DensityOperator) -> Result<f64> {
    let ev = u_eigenvalues(rho)?;
    Ok(ev[1] + ev[2])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TeleportationVerdict {
    pub n: f64,
    pub f_max: f64,
    pub useful: bool,
}

/// Best standard-teleportation fidelity reachable with a channel of given N.
pub fn f_max_from_n(n: f64) -> f64 {
    0.5 * (1.0 + n / 3.0)
}

/// `N(ρ) = Tr √(TᵀT)`; the state beats classical teleportation iff `N > 1`.
pub fn teleportation_n(rho: &DensityOperator) -> Result<TeleportationVerdict> {
    let t = bloch_decompose(rho)?.t_matrix();
    let n: f64 = linalg::singular_values(&t).iter().sum();
    Ok(TeleportationVerdict {
        n,
        f_max: f_max_from_n(n),
        useful: n > 1.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pair {
    A1B1,
    Cd,
    A1c,
}

impl Pair {
    pub fn name(self) -> &'static str {
        match self {
            Pair::A1B1 => "a1b1",
            Pair::Cd => "cd",
            Pair::A1c => "a1c",
        }
    }
}

fn den(r: f64) -> f64 {
    1.0 - 3.0 * r + 3.0 * r * r
}

/// Prefactor `k` of the correlation matrix of a broadcast output. Only the
/// two output pairs have one.
pub fn correlation_prefactor(pair: Pair, refl: Reflectivity) -> Option<f64> {
    let r = refl.r();
    let d2 = den(r) * den(r);
    match pair {
        Pair::A1B1 => Some((1.0 - 2.0 * r).powi(2) * (1.0 - r).powi(2) / d2),
        Pair::Cd => Some(r * r * (1.0 - r).powi(2) / d2),
        Pair::A1c => None,
    }
}

/// Closed-form correlation matrix of a broadcast output.
pub fn closed_form_t(pair: Pair, alpha: C64, beta: C64, refl: Reflectivity) -> Option<ComplexMatrix> {
    let k = correlation_prefactor(pair, refl)?;
    let sum = alpha * beta.conj() + alpha.conj() * beta;
    let diff = c(0.0, 1.0) * (alpha * beta.conj() - alpha.conj() * beta);
    let m = [sum, diff, re(0.0), diff, -sum, re(0.0), re(0.0), re(0.0), re(1.0)];
    Some(ComplexMatrix::new(3, 3, m.to_vec()).ok()?.scale_real(k))
}

/// Closed-form `M` of a broadcast output: `k²(1 + 4|α|²|β|²)`.
pub fn closed_form_m(pair: Pair, alpha: C64, beta: C64, refl: Reflectivity) -> Option<f64> {
    let k = correlation_prefactor(pair, refl)?;
    Some(k * k * (1.0 + 4.0 * alpha.norm_sqr() * beta.norm_sqr()))
}

/// Closed-form `N` of a broadcast output: `k(4|α||β| + 1)`.
pub fn closed_form_n(pair: Pair, alpha: C64, beta: C64, refl: Reflectivity) -> Option<f64> {
    let k = correlation_prefactor(pair, refl)?;
    Some(k * (4.0 * alpha.norm() * beta.norm() + 1.0))
}

/// Closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// What holds for `|α|²` inside the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Inseparable,
    Separable,
}

/// An `|α|²` window of the form `½(1 ± √(1 - g(R)))`, nonempty iff `g(R) < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeparabilityWindow {
    pub pair: Pair,
    pub kind: WindowKind,
    /// Reflectivities, within `[0, 1/2]`, where the window is nonempty.
    pub r_range: Interval,
}

impl SeparabilityWindow {
    pub fn g(&self, refl: Reflectivity) -> f64 {
        let r = refl.r();
        let (u, t) = (1.0 - 2.0 * r, 1.0 - r);
        match self.pair {
            Pair::A1B1 => {
                let n = r.powi(4) * (2.0 - 6.0 * r + 5.0 * r * r).powi(2);
                n / (4.0 * u.powi(4) * t.powi(4))
            }
            Pair::Cd => {
                let n = u.powi(4) * (1.0 - 2.0 * r + 2.0 * r * r).powi(2);
                n / (4.0 * r.powi(4) * t.powi(4))
            }
            Pair::A1c => 4.0 * r * r * u * u / t.powi(4),
        }
    }

    /// The `|α|²` interval at this reflectivity, or `None` if empty.
    pub fn alpha_sq_bounds(&self, refl: Reflectivity) -> Option<Interval> {
        let g = self.g(refl);
        if g.is_nan() || g >= 1.0 {
            return None;
        }
        let h = 0.5 * (1.0 - g).sqrt();
        Some(Interval { lo: 0.5 - h, hi: 0.5 + h })
    }
}

/// `½ - ⅙√(-9 + 6√3)`, lower end of the reflectivities where the
/// Charlie-Daniel pair can be entangled.
pub fn cd_lower_bound() -> f64 {
    0.5 - (-9.0 + 6.0 * 3f64.sqrt()).sqrt() / 6.0
}

/// `½ + ⅙√(-9 + 6√3)`, beyond the physical range.
pub fn cd_upper_bound() -> f64 {
    0.5 + (-9.0 + 6.0 * 3f64.sqrt()).sqrt() / 6.0
}

pub fn root_polynomial(r: f64) -> f64 {
    (((3.0 * r - 18.0) * r + 24.0) * r - 12.0) * r + 2.0
}

/// Root of `3R⁴ - 18R³ + 24R² - 12R + 2` in `(1/3, 1/2)`: the largest
/// reflectivity at which the Alice-Bob pair stays entangled.
pub fn root_x() -> f64 {
    let (mut lo, mut hi) = (1.0 / 3.0, 0.5);
    let f_lo = root_polynomial(lo);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if (root_polynomial(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn window_a1b1() -> SeparabilityWindow {
    SeparabilityWindow {
        pair: Pair::A1B1,
        kind: WindowKind::Inseparable,
        r_range: Interval { lo: 0.0, hi: root_x() },
    }
}

pub fn window_cd() -> SeparabilityWindow {
    SeparabilityWindow {
        pair: Pair::Cd,
        kind: WindowKind::Inseparable,
        r_range: Interval {
            lo: cd_lower_bound(),
            hi: cd_upper_bound().min(0.5),
        },
    }
}

/// Separability window of the cross pairs. The algebraic range extends to
/// `R = 1/√3`; it is clamped to the physical `[0, 1/2]`.
pub fn window_a1c() -> SeparabilityWindow {
    SeparabilityWindow {
        pair: Pair::A1c,
        kind: WindowKind::Separable,
        r_range: Interval {
            lo: 0.0,
            hi: (1.0 / 3f64.sqrt()).min(0.5),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BroadcastBranch {
    /// `R ≤ 1/3`: the Charlie-Daniel window is the binding one.
    I,
    /// `1/3 < R < x`: the Alice-Bob window is the binding one.
    II,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BroadcastCondition {
    pub branch: BroadcastBranch,
    pub alpha_sq: Interval,
}

/// The `|α|²` interval in which both outputs are entangled while the cross
/// pairs are separable, or `None` when broadcasting is impossible at `R`.
pub fn broadcast_condition(refl: Reflectivity) -> Option<BroadcastCondition> {
    let r = refl.r();
    if r <= cd_lower_bound() || r >= root_x() {
        return None;
    }
    let (branch, window) = if r <= 1.0 / 3.0 {
        (BroadcastBranch::I, window_cd())
    } else {
        (BroadcastBranch::II, window_a1b1())
    };
    window
        .alpha_sq_bounds(refl)
        .map(|alpha_sq| BroadcastCondition { branch, alpha_sq })
}

/// Spherical Fibonacci lattice of `n` unit vectors.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn chsh_value(bloch: &BlochDecomposition, b: [f64; 3], bp: [f64; 3]) -> f64 {
    let tb = bloch.t_times(b);
    let tbp = bloch.t_times(bp);
    norm3([0, 1, 2].map(|i| tb[i] + tbp[i])) + norm3([0, 1, 2].map(|i| tb[i] - tbp[i]))
}

fn from_angles(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn to_angles(v: [f64; 3]) -> (f64, f64) {
    (v[2].clamp(-1.0, 1.0).acos(), v[1].atan2(v[0]))
}

/// Brute-force maximum of `|⟨B⟩|` for the CHSH operator
/// `B = a·σ⊗(b+b′)·σ + a′·σ⊗(b−b′)·σ`. For fixed `b, b′` the best `a, a′`
/// are explicit, so only `b, b′` are searched: a Fibonacci grid of
/// `directions` points each, then coordinate refinement of the best pair.
/// A validation oracle for [`chsh_m`]: the result approaches `2√M`.
pub fn chsh_bruteforce_oracle(rho: &DensityOperator, directions: usize) -> Result<f64> {
    let bloch = bloch_decompose(rho)?;
    let grid = fibonacci_sphere(directions.max(2));
    let tv: Vec<[f64; 3]> = grid.iter().map(|&v| bloch.t_times(v)).collect();
    let (best, i, j) = (0..tv.len())
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::NEG_INFINITY, i, 0);
            for (j, tj) in tv.iter().enumerate() {
                let ti = tv[i];
                let v = norm3([ti[0] + tj[0], ti[1] + tj[1], ti[2] + tj[2]])
                    + norm3([ti[0] - tj[0], ti[1] - tj[1], ti[2] - tj[2]]);
                if v > best.0 {
                    best = (v, i, j);
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, 0, 0),
            |a, b| if b.0 > a.0 { b } else { a },
        );

    let (t1, p1) = to_angles(grid[i]);
    let (t2, p2) = to_angles(grid[j]);
    let mut x = [t1, p1, t2, p2];
    let eval = |x: &[f64; 4]| chsh_value(&bloch, from_angles(x[0], x[1]), from_angles(x[2], x[3]));
    let mut value = eval(&x).max(best);
    let mut step = 0.1;
    while step > 1e-9 {
        let mut improved = false;
        for k in 0..4 {
            for sign in [1.0, -1.0] {
                let mut y = x;
                y[k] += sign * step;
                let v = eval(&y);
                if v > value {
                    value = v;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(value)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairDiagnostics {
    pub fidelity_closed_form: Option<f64>,
    pub fidelity_numeric: f64,
    pub ppt: PptVerdict,
    pub m: f64,
    pub n: f64,
    pub f_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Windows {
    pub a1b1: Option<Interval>,
    pub cd: Option<Interval>,
    pub a1c: Option<Interval>,
    pub broadcast: Option<BroadcastCondition>,
}

/// Everything known about one broadcast run.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub struct VerdictReport {
    #[serde(rename = "R")]
    pub r: f64,
    pub alpha_abs: f64,
    pub alpha_phase: f64,
    pub lambda_d: f64,
    pub lambda_s: f64,
    pub a1b1: PairDiagnostics,
    pub cd: PairDiagnostics,
    pub a1c: PairDiagnostics,
    pub b1d: PairDiagnostics,
    pub windows: Windows,
}

impl VerdictReport {
    pub fn evaluate(alpha_abs: f64, alpha_phase: f64, refl: Reflectivity) -> Result<Self> {
        let (alpha, beta) = alpha_beta(alpha_abs, alpha_phase)?;
        let res = broadcasting::run_broadcast(alpha, beta, refl)?;
        let (f_ab, f_cd) = broadcasting::broadcast_fidelities(alpha, beta, refl);
        let diag = |rho: &DensityOperator, closed: Option<f64>| -> Result<PairDiagnostics> {
            let tele = teleportation_n(rho)?;
            Ok(PairDiagnostics {
                fidelity_closed_form: closed,
                fidelity_numeric: fidelity_with_input(rho, alpha, beta)?,
                ppt: ppt_separable(rho)?,
                m: chsh_m(rho)?,
                n: tele.n,
                f_max: tele.f_max,
            })
        };
        Ok(Self {
            r: refl.r(),
            alpha_abs,
            alpha_phase,
            lambda_d: res.lambda_d,
            lambda_s: res.lambda_s,
            a1b1: diag(&res.rho_a1b1, Some(f_ab))?,
            cd: diag(&res.rho_cd, Some(f_cd))?,
            a1c: diag(&res.rho_a1c, None)?,
            b1d: diag(&res.rho_b1d, None)?,
            windows: Windows {
                a1b1: window_a1b1().alpha_sq_bounds(refl),
                cd: window_cd().alpha_sq_bounds(refl),
                a1c: window_a1c().alpha_sq_bounds(refl),
                broadcast: broadcast_condition(refl),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::broadcasting::{closed_form_rho_a1b1, closed_form_rho_a1c, closed_form_rho_cd, run_broadcast};
    use crate::states::{bell_state, BellKind};
    use proptest::prelude::*;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn refl(r: f64) -> Reflectivity {
        Reflectivity::new(r).unwrap()
    }

    fn singlet() -> DensityOperator {
        bell_state(BellKind::PsiMinus).to_density()
    }

    fn mixed() -> DensityOperator {
        DensityOperator::maximally_mixed(&["x", "y"])
    }

    fn closed(pair: Pair, alpha: C64, beta: C64, r: f64) -> DensityOperator {
        match pair {
            Pair::A1B1 => closed_form_rho_a1b1(alpha, beta, refl(r)).unwrap(),
            Pair::Cd => closed_form_rho_cd(alpha, beta, refl(r)).unwrap(),
            Pair::A1c => closed_form_rho_a1c(alpha, beta, refl(r)).unwrap(),
        }
    }

    #[test]
    fn singlet_diagnostics() {
        let b = bloch_decompose(&singlet()).unwrap();
        assert!(b.r.iter().chain(&b.s).all(|x| x.abs() < 1e-15));
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { -1.0 } else { 0.0 };
                assert!((b.t[i][j] - expected).abs() < 1e-15);
            }
        }
        let v = ppt_separable(&singlet()).unwrap();
        assert!(!v.separable && (v.min_eigenvalue + 0.5).abs() < 1e-12);
        assert_eq!(v.class, PptClass::Inseparable);
        assert!((chsh_m(&singlet()).unwrap() - 2.0).abs() < 1e-12);
        let t = teleportation_n(&singlet()).unwrap();
        assert!((t.n - 3.0).abs() < 1e-12 && (t.f_max - 1.0).abs() < 1e-12 && t.useful);
    }

    #[test]
    fn maximally_mixed_diagnostics() {
        let v = ppt_separable(&mixed()).unwrap();
        assert!(v.separable);
        assert_eq!(v.class, PptClass::Separable);
        assert!(chsh_m(&mixed()).unwrap().abs() < 1e-15);
        assert!(teleportation_n(&mixed()).unwrap().n.abs() < 1e-15);
    }

    #[test]
    fn wrong_dimensions_are_rejected() {
        let three = DensityOperator::maximally_mixed(&["x", "y", "z"]);
        assert!(matches!(ppt_separable(&three), Err(Error::DimensionMismatch { .. })));
        assert!(chsh_m(&three).is_err());
        assert!(teleportation_n(&three).is_err());
        assert!(bloch_decompose(&three).is_err());
    }

    #[test]
    fn symmetric_point_is_inseparable() {
        let rho = closed(Pair::A1B1, re(S), re(S), 1.0 / 3.0);
        assert!(!ppt_separable(&rho).unwrap().separable);
    }

    #[test]
    fn root_x_value() {
        let x = root_x();
        assert!((x - 0.3608506129).abs() < 1e-9);
        assert!(root_polynomial(x).abs() < 1e-10);
        assert!(1.0 / 3.0 < x && x < 0.5);
    }

    #[test]
    fn cd_bound_value() {
        assert!((cd_lower_bound() - 0.3033400534).abs() < 1e-9);
        assert!((window_cd().g(refl(cd_lower_bound())) - 1.0).abs() < 1e-9);
        assert!((window_a1b1().g(refl(root_x())) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn windows_at_symmetric_point() {
        let third = Reflectivity::symmetric();
        let h = 39f64.sqrt() / 16.0;
        let cd = window_cd().alpha_sq_bounds(third).unwrap();
        assert!((cd.lo - (0.5 - h)).abs() < 1e-12 && (cd.hi - (0.5 + h)).abs() < 1e-12);
        // both output windows coincide at R = 1/3
        let ab = window_a1b1().alpha_sq_bounds(third).unwrap();
        assert!((ab.lo - cd.lo).abs() < 1e-12);
        let bc = broadcast_condition(third).unwrap();
        assert_eq!(bc.branch, BroadcastBranch::I);
        assert!((bc.alpha_sq.lo - (0.5 - h)).abs() < 1e-12);
    }

    #[test]
    fn a1c_window_limits() {
        let w = window_a1c().alpha_sq_bounds(refl(0.0)).unwrap();
        assert_eq!((w.lo, w.hi), (0.0, 1.0));
        assert_eq!(window_a1c().kind, WindowKind::Separable);
        assert_eq!(window_a1c().r_range.hi, 0.5);
        for i in 0..=50 {
            assert!(window_a1c().alpha_sq_bounds(refl(i as f64 / 100.0)).is_some());
        }
    }

    #[test]
    fn broadcast_condition_branches() {
        assert!(broadcast_condition(refl(0.30)).is_none());
        assert!(broadcast_condition(refl(0.2)).is_none());
        assert_eq!(broadcast_condition(refl(0.32)).unwrap().branch, BroadcastBranch::I);
        assert_eq!(broadcast_condition(refl(0.36)).unwrap().branch, BroadcastBranch::II);
        assert!(broadcast_condition(refl(0.37)).is_none());
        assert!(broadcast_condition(refl(0.5)).is_none());
    }

    #[test]
    fn broadcast_condition_means_broadcast() {
        for r in [0.31, 0.32, 1.0 / 3.0, 0.34, 0.35, 0.36] {
            let cond = broadcast_condition(refl(r)).unwrap();
            for f in [0.02, 0.5, 0.98] {
                let a2 = cond.alpha_sq.lo + f * (cond.alpha_sq.hi - cond.alpha_sq.lo);
                let (alpha, beta) = (re(a2.sqrt()), re((1.0 - a2).sqrt()));
                let ab = ppt_separable(&closed(Pair::A1B1, alpha, beta, r)).unwrap();
                let cd = ppt_separable(&closed(Pair::Cd, alpha, beta, r)).unwrap();
                let ac = ppt_separable(&closed(Pair::A1c, alpha, beta, r)).unwrap();
                assert!(!ab.separable && !cd.separable && ac.separable, "R={r} |a|^2={a2}");
            }
        }
    }

    #[test]
    fn boundary_behaviour_at_symmetric_point() {
        let lo = 0.5 - 39f64.sqrt() / 16.0;
        let at = |a2: f64| {
            let rho = closed(Pair::A1B1, re(a2.sqrt()), re((1.0 - a2).sqrt()), 1.0 / 3.0);
            ppt_separable(&rho).unwrap()
        };
        let b = at(lo);
        assert!(b.min_eigenvalue.abs() < 1e-8);
        assert_eq!(b.class, PptClass::Boundary);
        assert!(at(lo - 1e-4).separable);
        assert!(!at(lo + 1e-4).separable);
    }

    #[test]
    fn closed_form_t_matches_numeric() {
        let (alpha, beta) = alpha_beta(0.6, 1.1).unwrap();
        for r in [0.1, 0.3, 0.45] {
            let res = run_broadcast(alpha, beta, refl(r)).unwrap();
            for (pair, rho) in [(Pair::A1B1, &res.rho_a1b1), (Pair::Cd, &res.rho_cd)] {
                let t = bloch_decompose(rho).unwrap().t_matrix();
                let expected = closed_form_t(pair, alpha, beta, refl(r)).unwrap();
                assert!(t.max_abs_diff(&expected) < 1e-12);
            }
        }
        assert!(closed_form_t(Pair::A1c, alpha, beta, refl(0.2)).is_none());
    }

    #[test]
    fn symmetric_point_n_and_f_max() {
        let rho = closed(Pair::A1B1, re(S), re(S), 1.0 / 3.0);
        let t = teleportation_n(&rho).unwrap();
        assert!((t.n - 4.0 / 3.0).abs() < 1e-12);
        assert!((t.f_max - 13.0 / 18.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_entangled_n_specialization() {
        for r in [0.05, 0.2, 0.4] {
            let d = den(r).powi(2);
            let n_ab = 3.0 * (1.0 - 2.0 * r).powi(2) * (1.0 - r).powi(2) / d;
            let n_cd = 3.0 * r * r * (1.0 - r).powi(2) / d;
            assert!((closed_form_n(Pair::A1B1, re(S), re(S), refl(r)).unwrap() - n_ab).abs() < 1e-12);
            assert!((closed_form_n(Pair::Cd, re(S), re(S), refl(r)).unwrap() - n_cd).abs() < 1e-12);
        }
    }

    #[test]
    fn m_outside_broadcast_region_can_exceed_one() {
        // reported, not a failure: close to R = 0 the Alice-Bob pair is almost the input
        let m = closed_form_m(Pair::A1B1, re(S), re(S), refl(0.05)).unwrap();
        assert!(m > 1.0);
    }

    #[test]
    fn fibonacci_sphere_is_unit() {
        let pts = fibonacci_sphere(500);
        assert!(pts.iter().all(|p| (norm3(*p) - 1.0).abs() < 1e-12));
        let mean = pts.iter().fold([0.0; 3], |a, p| [a[0] + p[0], a[1] + p[1], a[2] + p[2]]);
        assert!(norm3(mean) / 500.0 < 1e-2);
    }

    #[test]
    fn chsh_oracle_reference_values() {
        let v = chsh_bruteforce_oracle(&singlet(), 400).unwrap();
        assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-2);
        assert!(chsh_bruteforce_oracle(&mixed(), 100).unwrap().abs() < 1e-12);
        let rho = closed(Pair::A1B1, re(S), re(S), 1.0 / 3.0);
        let v = chsh_bruteforce_oracle(&rho, 400).unwrap();
        let m = chsh_m(&rho).unwrap();
        assert!(v < 2.0);
        assert!(v <= 2.0 * m.sqrt() + 1e-9 && v > 2.0 * m.sqrt() - 1e-6);
    }

    #[test]
    fn verdict_report_json() {
        let rep = VerdictReport::evaluate(S, 0.0, Reflectivity::symmetric()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        assert!(v.get("R").is_some());
        assert!(v["a1b1"]["ppt"]["separable"] == false);
        assert!(v["windows"]["broadcast"]["branch"] == "I");
    }

    fn random_density(seed: &[f64]) -> DensityOperator {
        let a = ComplexMatrix::from_fn(4, 4, |i, j| c(seed[2 * (4 * i + j)], seed[2 * (4 * i + j) + 1]));
        let m = &a * &a.adjoint();
        let tr = m.trace().re;
        DensityOperator::new(m.scale_real(1.0 / tr), &["x", "y"]).unwrap()
    }

    proptest! {
        #[test]
        fn bloch_round_trip(seed in prop::collection::vec(-1.0f64..1.0, 32)) {
            prop_assume!(seed.iter().map(|x| x * x).sum::<f64>() > 0.5);
            let rho = random_density(&seed);
            let b = bloch_decompose(&rho).unwrap();
            prop_assert!(b.reconstruct().max_abs_diff(rho.matrix()) < 1e-10);
            prop_assert!(b.t.iter().flatten().all(|x| x.abs() <= 1.0 + 1e-12));
        }

        #[test]
        fn n_closed_form_matches_singular_values(r in 0.0f64..0.5, a in 0.0f64..=1.0, phase in 0.0f64..6.3) {
            let (alpha, beta) = alpha_beta(a, phase).unwrap();
            for pair in [Pair::A1B1, Pair::Cd] {
                let rho = closed(pair, alpha, beta, r);
                let n = teleportation_n(&rho).unwrap().n;
                prop_assert!((n - closed_form_n(pair, alpha, beta, refl(r)).unwrap()).abs() < 1e-10);
                let m = chsh_m(&rho).unwrap();
                prop_assert!((m - closed_form_m(pair, alpha, beta, refl(r)).unwrap()).abs() < 1e-10);
            }
        }
    }
}
