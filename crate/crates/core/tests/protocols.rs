//! End-to-end runs through the public API.

use entcast::broadcasting::{alpha_beta, run_broadcast};
use entcast::criteria::teleportation_n;
use entcast::protocol::{monte_carlo_report, simulate_standard_teleportation, ProtocolTranscript};
use entcast::telecloning::{run_telecloning, OutcomeSource};
use entcast::{CloneParams, PureState, Reflectivity, C64};

#[test]
fn broadcast_output_teleports_at_the_predicted_fidelity_for_basis_inputs() {
    let (alpha, beta) = alpha_beta(0.6, 0.0).unwrap();
    let res = run_broadcast(alpha, beta, Reflectivity::new(0.32).unwrap()).unwrap();
    for rho in [&res.rho_a1b1, &res.rho_cd] {
        let f_max = teleportation_n(rho).unwrap().f_max;
        // Averaging |0⟩, |1⟩, |±⟩, |±i⟩ is an exact 2-design average.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let inputs = [
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(s, 0.0), C64::new(s, 0.0)],
            [C64::new(s, 0.0), C64::new(-s, 0.0)],
            [C64::new(s, 0.0), C64::new(0.0, s)],
            [C64::new(s, 0.0), C64::new(0.0, -s)],
        ];
        let mean: f64 = inputs
            .iter()
            .map(|phi| {
                let run = simulate_standard_teleportation(rho, phi).unwrap();
                assert!((run.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                run.average_fidelity
            })
            .sum::<f64>()
            / inputs.len() as f64;
        assert!((mean - f_max).abs() < 1e-12, "{mean} vs {f_max}");
    }
}

#[test]
fn monte_carlo_report_is_deterministic() {
    let (alpha, beta) = alpha_beta(0.8, 0.0).unwrap();
    let res = run_broadcast(alpha, beta, Reflectivity::new(0.25).unwrap()).unwrap();
    let a = monte_carlo_report("rho_cd(0.25, 0.8)", &res.rho_cd, 10_000, 5).unwrap();
    let b = monte_carlo_report("rho_cd(0.25, 0.8)", &res.rho_cd, 10_000, 5).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert!((a.f_mc - a.f_max_formula).abs() < 4.0 * a.stderr);
}

#[test]
fn telecloning_transcripts_round_trip_through_json() {
    let (alpha, beta) = alpha_beta(0.6, 1.0).unwrap();
    let runs = run_telecloning(alpha, beta, CloneParams::new(0.4).unwrap(), OutcomeSource::EnumerateAll).unwrap();
    for run in runs {
        let json = run.transcript.to_json();
        let back: ProtocolTranscript = serde_json::from_str(&json).unwrap();
        assert_eq!(back, run.transcript);
        back.validate().unwrap();
        let state = serde_json::to_string(&run.receiver_state).unwrap();
        let parsed: PureState = serde_json::from_str(&state).unwrap();
        assert!(parsed.max_diff_up_to_phase(&run.receiver_state).unwrap() < 1e-15);
    }
}
