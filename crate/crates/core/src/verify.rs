//! Closed-form-versus-numeric acceptance battery, shared by the `verify`
//! command and the acceptance test target.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::time::{Duration, Instant};

use crate::broadcasting::{
    self, alpha_beta, closed_form_rho_a1b1, closed_form_rho_a1c, closed_form_rho_cd, fidelity_with_input,
    phi_d_explicit, BroadcastResult,
};
use crate::cloning::{asym_cloner_fidelities, filip_fidelities, p_from_r, CloneParams, Reflectivity};
use crate::criteria::{
    self, broadcast_condition, chsh_bruteforce_oracle, chsh_m, closed_form_n, ppt_separable, root_polynomial,
    root_x, teleportation_n, window_a1b1, window_a1c, window_cd, Pair,
};
use crate::error::Result;
use crate::linalg::{ComplexMatrix, C64};
use crate::protocol::monte_carlo_teleportation_fidelity;
use crate::states::{bell_state, BellKind, DensityOperator};
use crate::telecloning::{self, clone_fidelities, closed_form_clones, output_clones, OutcomeSource};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    /// `|got - want| <= tol`.
    fn close(name: impl Into<String>, got: f64, want: f64, tol: f64) -> Self {
        let err = (got - want).abs();
        Self::new(name, err <= tol, format!("got {got:.12e}, want {want:.12e}, |err| {err:.3e} (tol {tol:.0e})"))
    }

    /// `value <= tol` for an already computed error.
    fn within(name: impl Into<String>, err: f64, tol: f64) -> Self {
        Self::new(name, err <= tol, format!("max error {err:.3e} (tol {tol:.0e})"))
    }

    fn from_result(name: impl Into<String>, r: Result<Check>) -> Self {
        let name = name.into();
        r.unwrap_or_else(|e| Self::new(name, false, format!("error: {e}")))
    }

    fn runtime(elapsed: Duration, limit: Duration) -> Self {
        Self::new(
            format!("runtime < {limit:?}"),
            elapsed < limit,
            format!("took {elapsed:?}"),
        )
    }
}

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for CriterionReport {
    /// One line: `PASS criterion N: title (k/n checks, t)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        write!(
            f,
            "{} criterion {}: {} ({}/{} checks, {:.3?})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            ok,
            self.checks.len(),
            self.elapsed
        )
    }
}

/// Knobs of the battery. `pi` is the two-qubit beam-splitter action used by
/// every numeric broadcast run, so a faulty operator can be injected.
#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub pi: fn(Reflectivity) -> ComplexMatrix,
    pub mc_samples: usize,
    pub seed: u64,
    pub chsh_directions: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            pi: broadcasting::pi_operator,
            mc_samples: 100_000,
            seed: 20_240_601,
            chsh_directions: 400,
        }
    }
}

/// Beam-splitter action with the singlet term's sign flipped, for mutation
/// testing of the battery.
pub fn faulty_pi(refl: Reflectivity) -> ComplexMatrix {
    let r = refl.r();
    let singlet = ComplexMatrix::projector(&BellKind::PsiMinus.amplitudes());
    &ComplexMatrix::identity(4).scale_real(1.0 - 2.0 * r) - &singlet.scale_real(2.0 * r)
}

fn refl(r: f64) -> Reflectivity {
    Reflectivity::new(r).expect("grid reflectivity in range")
}

fn broadcast(cfg: &VerifyConfig, alpha: C64, beta: C64, refl: Reflectivity) -> Result<BroadcastResult> {
    broadcasting::run_broadcast_with_pi(alpha, beta, refl, &(cfg.pi)(refl))
}

fn pick(res: &BroadcastResult, pair: Pair) -> &DensityOperator {
    match pair {
        Pair::A1B1 => &res.rho_a1b1,
        Pair::Cd => &res.rho_cd,
        Pair::A1c => &res.rho_a1c,
    }
}

fn timed(id: u8, title: &'static str, limit: Option<Duration>, body: impl FnOnce() -> Vec<Check>) -> CriterionReport {
    let start = Instant::now();
    let mut checks = body();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        checks.push(Check::runtime(elapsed, limit));
    }
    CriterionReport {
        id,
        title,
        checks,
        elapsed,
    }
}

const ALPHA_GRID: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99];
const PHASE_GRID: [f64; 4] = [0.0, 0.7, PI / 2.0, 2.5];

fn r_grid() -> Vec<f64> {
    (1..=9).map(|i| 0.05 * i as f64).collect()
}

pub fn criterion_1(_cfg: &VerifyConfig) -> CriterionReport {
    timed(1, "cloner bridge", Some(Duration::from_millis(1)), || {
        let (a, b) = filip_fidelities(Reflectivity::symmetric());
        let (c, d) = filip_fidelities(refl(0.5));
        let mut worst: f64 = 0.0;
        for i in 0..50 {
            let r = refl(0.5 * i as f64 / 49.0);
            let (f1, f2) = filip_fidelities(r);
            let (g1, g2) = asym_cloner_fidelities(p_from_r(r));
            worst = worst.max((f1 - g1).abs()).max((f2 - g2).abs());
        }
        vec![
            Check::close("F_A(1/3) = 5/6", a, 5.0 / 6.0, 1e-12),
            Check::close("F_B(1/3) = 5/6", b, 5.0 / 6.0, 1e-12),
            Check::close("F_A(1/2) = 1/2", c, 0.5, 1e-12),
            Check::close("F_B(1/2) = 1", d, 1.0, 1e-12),
            Check::within("asymmetric cloner matches beam splitter on 50 points", worst, 1e-12),
        ]
    })
}

pub fn criterion_2(cfg: &VerifyConfig) -> CriterionReport {
    timed(2, "broadcast state equivalence", Some(Duration::from_secs(1)), || {
        let mut err = [0.0f64; 4];
        let mut failure = None;
        for r in r_grid() {
            for &a in &ALPHA_GRID {
                for &ph in &PHASE_GRID {
                    let res = (|| -> Result<[f64; 4]> {
                        let (alpha, beta) = alpha_beta(a, ph)?;
                        let rf = refl(r);
                        let res = broadcast(cfg, alpha, beta, rf)?;
                        let explicit = phi_d_explicit(alpha, beta, rf)?;
                        Ok([
                            res.rho_a1b1.max_abs_diff(&closed_form_rho_a1b1(alpha, beta, rf)?),
                            res.rho_cd.max_abs_diff(&closed_form_rho_cd(alpha, beta, rf)?),
                            res.rho_a1c.max_abs_diff(&closed_form_rho_a1c(alpha, beta, rf)?),
                            res.phi_d.max_diff_up_to_phase(&explicit)?,
                        ])
                    })();
                    match res {
                        Ok(e) => (0..4).for_each(|i| err[i] = err[i].max(e[i])),
                        Err(e) => failure = Some(format!("R={r}, |alpha|={a}, phase={ph}: {e}")),
                    }
                }
            }
        }
        let mut checks = vec![
            Check::within("rho_a1b1 = closed form on 360 points", err[0], 1e-10),
            Check::within("rho_cd = closed form on 360 points", err[1], 1e-10),
            Check::within("rho_a1c = closed form on 360 points", err[2], 1e-10),
            Check::within("phi_d = 18-term expansion up to phase", err[3], 1e-10),
        ];
        if let Some(f) = failure {
            checks.push(Check::new("every grid point runs", false, f));
        }
        checks
    })
}

fn symmetric_form(alpha: C64, beta: C64) -> ComplexMatrix {
    let psi = ComplexMatrix::projector(&[alpha, C64::new(0.0, 0.0), C64::new(0.0, 0.0), beta]);
    let diag = ComplexMatrix::from_real_diag(&[
        (8.0 * alpha.norm_sqr() + 1.0) / 36.0,
        5.0 / 36.0,
        5.0 / 36.0,
        (8.0 * beta.norm_sqr() + 1.0) / 36.0,
    ]);
    &psi.scale_real(4.0 / 9.0) + &diag
}

pub fn criterion_3(cfg: &VerifyConfig) -> CriterionReport {
    timed(3, "symmetric point", None, || {
        let sym = Reflectivity::symmetric();
        let mut checks = Vec::new();
        let mut lambda = None;
        let mut err = [0.0f64; 2];
        for &a in &ALPHA_GRID {
            for &ph in &PHASE_GRID {
                let out = (|| -> Result<()> {
                    let (alpha, beta) = alpha_beta(a, ph)?;
                    let res = broadcast(cfg, alpha, beta, sym)?;
                    let expected = symmetric_form(alpha, beta);
                    err[0] = err[0].max(res.rho_a1b1.matrix().max_abs_diff(res.rho_cd.matrix()));
                    err[1] = err[1].max(res.rho_a1b1.matrix().max_abs_diff(&expected));
                    lambda.get_or_insert((res.lambda_d, res.lambda_s));
                    Ok(())
                })();
                if let Err(e) = out {
                    checks.push(Check::new(format!("run |alpha|={a}, phase={ph}"), false, e.to_string()));
                }
            }
        }
        checks.push(Check::within("rho_a1b1(1/3) = rho_cd(1/3)", err[0], 1e-12));
        checks.push(Check::within(
            "rho(1/3) = 4/9 |psi><psi| + diag((8|a|^2+1)/36, 5/36, 5/36, (8|b|^2+1)/36)",
            err[1],
            1e-12,
        ));
        let (ld, ls) = lambda.unwrap_or((f64::NAN, f64::NAN));
        checks.push(Check::close("lambda_d(1/3) = 4/9", ld, 4.0 / 9.0, 1e-12));
        checks.push(Check::close("lambda_s(1/3) = 5/9", ls, 5.0 / 9.0, 1e-12));
        checks
    })
}

pub fn criterion_4(cfg: &VerifyConfig) -> CriterionReport {
    timed(4, "entanglement swapping limit", None, || {
        let run = || -> Result<Vec<Check>> {
            let (alpha, beta) = alpha_beta(FRAC_1_SQRT_2, 0.0)?;
            let res = broadcast(cfg, alpha, beta, refl(0.5))?;
            let quarter = ComplexMatrix::identity(4).scale_real(0.25);
            Ok(vec![
                Check::close("F(rho_cd) = 1", fidelity_with_input(&res.rho_cd, alpha, beta)?, 1.0, 1e-12),
                Check::within("rho_a1b1 = I/4", res.rho_a1b1.matrix().max_abs_diff(&quarter), 1e-12),
            ])
        };
        run().unwrap_or_else(|e| vec![Check::new("R = 1/2 run", false, e.to_string())])
    })
}

const PROBE: f64 = 1e-4;

/// Checks that the PPT verdict of `pair` flips across `|α|² = bound`.
fn boundary_check(cfg: &VerifyConfig, label: &str, pair: Pair, r: f64, bound: f64) -> Check {
    let name = format!("{label} at R={r:.6}, |alpha|^2={bound:.9}");
    let run = || -> Result<Check> {
        let probe = |a2: f64| -> Result<criteria::PptVerdict> {
            let (alpha, beta) = alpha_beta(a2.sqrt(), 0.0)?;
            ppt_separable(pick(&broadcast(cfg, alpha, beta, refl(r))?, pair))
        };
        let at = probe(bound)?;
        let below = probe(bound - PROBE)?;
        let above = probe(bound + PROBE)?;
        let ok = at.min_eigenvalue.abs() < 1e-6 && below.separable != above.separable;
        Ok(Check::new(
            name.clone(),
            ok,
            format!(
                "min PT eigenvalue {:.3e} at bound, separable {} / {} at -/+{PROBE:.0e}",
                at.min_eigenvalue, below.separable, above.separable
            ),
        ))
    };
    Check::from_result(name.clone(), run())
}

fn interval_checks(cfg: &VerifyConfig, label: &str, pair: Pair, r: f64, lo: f64, hi: f64) -> Vec<Check> {
    [lo, hi]
        .into_iter()
        .filter(|&b| b > 2.0 * PROBE && b < 1.0 - 2.0 * PROBE)
        .map(|b| boundary_check(cfg, label, pair, r, b))
        .collect()
}

pub fn criterion_5(cfg: &VerifyConfig) -> CriterionReport {
    timed(5, "separability windows", None, || {
        let mut checks = Vec::new();
        let windows = [
            ("window a1b1", window_a1b1(), vec![0.2, 0.3, 1.0 / 3.0, 0.35, 0.36]),
            ("window cd", window_cd(), vec![0.31, 0.32, 1.0 / 3.0, 0.4, 0.45]),
            ("window a1c", window_a1c(), vec![0.1, 0.2, 1.0 / 3.0, 0.4]),
        ];
        for (label, window, rs) in windows {
            for r in rs {
                match window.alpha_sq_bounds(refl(r)) {
                    Some(iv) => checks.extend(interval_checks(cfg, label, window.pair, r, iv.lo, iv.hi)),
                    None => checks.push(Check::new(format!("{label} nonempty at R={r}"), false, "empty")),
                }
            }
        }
        for r in [0.32, 1.0 / 3.0, 0.34, 0.36] {
            match broadcast_condition(refl(r)) {
                Some(cond) => {
                    let (label, pair) = match cond.branch {
                        criteria::BroadcastBranch::I => ("condi", Pair::Cd),
                        criteria::BroadcastBranch::II => ("condii", Pair::A1B1),
                    };
                    checks.extend(interval_checks(cfg, label, pair, r, cond.alpha_sq.lo, cond.alpha_sq.hi));
                }
                None => checks.push(Check::new(format!("broadcast condition at R={r}"), false, "empty")),
            }
        }
        let x = root_x();
        checks.push(Check::close("root x", x, 0.3608506129, 1e-9));
        checks.push(Check::within("root polynomial residual", root_polynomial(x).abs(), 1e-10));
        checks
    })
}

pub fn criterion_6(cfg: &VerifyConfig) -> CriterionReport {
    timed(6, "CHSH non-violation", None, || {
        let (r_lo, r_hi) = (criteria::cd_lower_bound(), root_x());
        let mut worst = [0.0f64; 2];
        let mut states = Vec::new();
        let mut failure = None;
        for i in 1..40 {
            let r = r_lo + (r_hi - r_lo) * i as f64 / 40.0;
            let Some(cond) = broadcast_condition(refl(r)) else {
                failure = Some(format!("no broadcast condition at R={r}"));
                continue;
            };
            for j in 1..20 {
                let a2 = cond.alpha_sq.lo + (cond.alpha_sq.hi - cond.alpha_sq.lo) * j as f64 / 20.0;
                for ph in [0.0, 1.1] {
                    let out = (|| -> Result<()> {
                        let (alpha, beta) = alpha_beta(a2.sqrt(), ph)?;
                        let res = broadcast(cfg, alpha, beta, refl(r))?;
                        worst[0] = worst[0].max(chsh_m(&res.rho_a1b1)?);
                        worst[1] = worst[1].max(chsh_m(&res.rho_cd)?);
                        if i % 13 == 0 && j % 9 == 0 && ph == 0.0 {
                            states.push(res.rho_a1b1);
                            states.push(res.rho_cd);
                        }
                        Ok(())
                    })();
                    if let Err(e) = out {
                        failure = Some(format!("R={r}, |alpha|^2={a2}: {e}"));
                    }
                }
            }
        }
        let mut checks = vec![
            Check::new("M(rho_a1b1) < 1 in broadcast region", worst[0] < 1.0, format!("max M {:.12}", worst[0])),
            Check::new("M(rho_cd) < 1 in broadcast region", worst[1] < 1.0, format!("max M {:.12}", worst[1])),
        ];
        if let Some(f) = failure {
            checks.push(Check::new("every grid point runs", false, f));
        }
        let mut oracle_max: f64 = 0.0;
        for rho in &states {
            match chsh_bruteforce_oracle(rho, cfg.chsh_directions) {
                Ok(v) => oracle_max = oracle_max.max(v),
                Err(e) => checks.push(Check::new("oracle runs", false, e.to_string())),
            }
        }
        checks.push(Check::new(
            format!("oracle max <B> < 2 on {} states", states.len()),
            !states.is_empty() && oracle_max < 2.0,
            format!("max {oracle_max:.12}"),
        ));
        let singlet = bell_state(BellKind::PsiMinus).to_density();
        checks.push(Check::from_result(
            "oracle singlet = 2 sqrt 2",
            chsh_bruteforce_oracle(&singlet, cfg.chsh_directions)
                .map(|v| Check::close("oracle singlet = 2 sqrt 2", v, 2.0 * 2f64.sqrt(), 1e-2)),
        ));
        checks
    })
}

fn monte_carlo_check(cfg: &VerifyConfig, name: &str, r: f64, alpha_abs: f64, pair: Pair) -> Check {
    let run = || -> Result<Check> {
        let (alpha, beta) = alpha_beta(alpha_abs, 0.0)?;
        let res = broadcast(cfg, alpha, beta, refl(r))?;
        let rho = pick(&res, pair);
        let f_max = teleportation_n(rho)?.f_max;
        let mc = monte_carlo_teleportation_fidelity(rho, cfg.mc_samples, cfg.seed)?;
        let dev = (mc.mean - f_max).abs();
        Ok(Check::new(
            name,
            dev <= 3.0 * mc.stderr,
            format!(
                "F_mc {:.12} +/- {:.3e}, F_max {:.12}, {:.2} sigma",
                mc.mean,
                mc.stderr,
                f_max,
                dev / mc.stderr
            ),
        ))
    };
    Check::from_result(name, run())
}

pub fn criterion_7(cfg: &VerifyConfig) -> CriterionReport {
    timed(7, "teleportation usefulness", Some(Duration::from_secs(10)), || {
        let mut err: f64 = 0.0;
        let mut failure = None;
        for r in r_grid() {
            for &a in &ALPHA_GRID {
                for &ph in &PHASE_GRID {
                    let out = (|| -> Result<()> {
                        let (alpha, beta) = alpha_beta(a, ph)?;
                        let rf = refl(r);
                        let res = broadcast(cfg, alpha, beta, rf)?;
                        for pair in [Pair::A1B1, Pair::Cd] {
                            let n = teleportation_n(pick(&res, pair))?.n;
                            let closed = closed_form_n(pair, alpha, beta, rf).unwrap_or(f64::NAN);
                            err = err.max((n - closed).abs());
                        }
                        Ok(())
                    })();
                    if let Err(e) = out {
                        failure = Some(format!("R={r}, |alpha|={a}: {e}"));
                    }
                }
            }
        }
        let mut checks = vec![Check::new(
            "N closed form = singular values on 360 points",
            !err.is_nan() && err <= 1e-10,
            format!("max error {err:.3e} (tol 1e-10)"),
        )];
        if let Some(f) = failure {
            checks.push(Check::new("every grid point runs", false, f));
        }
        let sym = (|| -> Result<(f64, f64)> {
            let (alpha, beta) = alpha_beta(FRAC_1_SQRT_2, 0.0)?;
            let v = teleportation_n(&broadcast(cfg, alpha, beta, Reflectivity::symmetric())?.rho_a1b1)?;
            Ok((v.n, v.f_max))
        })();
        match sym {
            Ok((n, f)) => {
                checks.push(Check::close("N(1/3, 1/sqrt2) = 4/3", n, 4.0 / 3.0, 1e-12));
                checks.push(Check::close("F_max(1/3, 1/sqrt2) = 13/18", f, 13.0 / 18.0, 1e-12));
            }
            Err(e) => checks.push(Check::new("symmetric point run", false, e.to_string())),
        }
        checks.push(monte_carlo_check(cfg, "Monte Carlo rho_a1b1(1/3, 1/sqrt2) within 3 sigma", 1.0 / 3.0, FRAC_1_SQRT_2, Pair::A1B1));
        checks.push(monte_carlo_check(cfg, "Monte Carlo rho_cd(0.25, 0.8) within 3 sigma", 0.25, 0.8, Pair::Cd));
        checks
    })
}

pub fn criterion_8(_cfg: &VerifyConfig) -> CriterionReport {
    timed(8, "telecloning correctness", Some(Duration::from_secs(2)), || {
        let (mut prob_err, mut fid_err, mut clone_err) = (0.0f64, 0.0f64, 0.0f64);
        let mut counts_ok = true;
        let mut failure = None;
        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for (a, ph) in [(0.6, 0.0), (FRAC_1_SQRT_2, 1.3), (0.3, 2.9), (0.95, 0.4)] {
                let out = (|| -> Result<()> {
                    let params = CloneParams::new(p)?;
                    let (alpha, beta) = alpha_beta(a, ph)?;
                    let runs = telecloning::run_telecloning(alpha, beta, params, OutcomeSource::EnumerateAll)?;
                    counts_ok &= runs.len() == 8;
                    for run in &runs {
                        prob_err = prob_err.max((run.probability - 0.125).abs());
                        fid_err = fid_err.max((run.fidelity - 1.0).abs());
                    }
                    let (b12, b34) = output_clones(alpha, beta, params)?;
                    let (c12, c34) = closed_form_clones(alpha, beta, params)?;
                    clone_err = clone_err.max(b12.max_abs_diff(&c12)).max(b34.max_abs_diff(&c34));
                    Ok(())
                })();
                if let Err(e) = out {
                    failure = Some(format!("p={p}, |alpha|={a}: {e}"));
                }
            }
        }
        let (f1, f2) = clone_fidelities(CloneParams::symmetric());
        let mut checks = vec![
            Check::new("8 outcomes with nonzero probability", counts_ok, ""),
            Check::within("every outcome has probability 1/8", prob_err, 1e-12),
            Check::within("recovered receivers match alpha eta0 + beta eta1", fid_err, 1e-10),
            Check::within("rho_B1B2, rho_B3B4 = closed forms", clone_err, 1e-10),
            Check::close("symmetric clone fidelity B1B2 = 7/10", f1, 0.7, 1e-12),
            Check::close("symmetric clone fidelity B3B4 = 7/10", f2, 0.7, 1e-12),
        ];
        if let Some(f) = failure {
            checks.push(Check::new("every grid point runs", false, f));
        }
        checks
    })
}

pub fn criterion_9(_cfg: &VerifyConfig) -> CriterionReport {
    timed(9, "resource report", None, || {
        let rep = telecloning::resource_report();
        vec![
            Check::new(
                "naive: 5 ebits, 10 cbits",
                (rep.naive.ebits, rep.naive.cbits) == (5, 10),
                format!("{} ebits, {} cbits", rep.naive.ebits, rep.naive.cbits),
            ),
            Check::new(
                "telecloning: 1 ebit, 4 cbits",
                (rep.telecloning.ebits, rep.telecloning.cbits) == (1, 4),
                format!("{} ebits, {} cbits", rep.telecloning.ebits, rep.telecloning.cbits),
            ),
        ]
    })
}

pub const CRITERIA: [fn(&VerifyConfig) -> CriterionReport; 9] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
];

pub fn run_all(cfg: &VerifyConfig) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|f| f(cfg)).collect()
}
