use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use entcast::criteria::{PairDiagnostics, VerdictReport};
use entcast::telecloning::{self, OutcomeSource};
use entcast::verify::{self, VerifyConfig};
use entcast::{broadcasting, CloneParams, Reflectivity};

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "entcast", version, about = "Entanglement broadcasting and telecloning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run conditional broadcasting of α|00⟩ + β|11⟩ and report every pair.
    Broadcast {
        /// Beam-splitter reflectivity in [0, 1/2].
        #[arg(long = "R", value_parser = reflectivity)]
        r: f64,
        /// |α| in [0, 1].
        #[arg(long, value_parser = unit_interval)]
        alpha: f64,
        /// Phase of α in radians.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = finite)]
        phase: f64,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a grid of broadcast runs and write a CSV table.
    Sweep {
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated reflectivities (default 0.05, 0.10, ..., 0.45).
        #[arg(long = "R", value_delimiter = ',', value_parser = reflectivity)]
        r: Vec<f64>,
        /// Comma-separated |α| values (default 0.1, 0.2, ..., 1.0).
        #[arg(long, value_delimiter = ',', value_parser = unit_interval)]
        alpha: Vec<f64>,
        /// Comma-separated phases in radians (default 0).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, value_parser = finite)]
        phase: Vec<f64>,
    },
    /// Telecloning of α|00⟩ + β|11⟩ through the eight-qubit channel.
    Teleclone {
        /// Cloner asymmetry p in [0, 1]; q = √(1 - p²).
        #[arg(long, value_parser = unit_interval)]
        p: f64,
        /// |α| in [0, 1].
        #[arg(long, value_parser = unit_interval)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = finite)]
        phase: f64,
        /// Seed for the sampled Bell outcomes.
        #[arg(long, env = "ENTCAST_SEED")]
        seed: Option<u64>,
        /// Run all eight outcomes instead of sampling one.
        #[arg(long)]
        enumerate: bool,
        /// Write the protocol transcripts as JSON to this file.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Run the acceptance battery and print one line per criterion.
    Verify {
        /// Monte-Carlo samples per teleportation check.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, env = "ENTCAST_SEED")]
        seed: Option<u64>,
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    /// Flip the sign of the singlet term of the beam-splitter action.
    PiSign,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"))
}

fn finite(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    v.is_finite().then_some(v).ok_or_else(|| format!("{v} is not finite"))
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    (0.0..=1.0).contains(&v).then_some(v).ok_or_else(|| format!("{v} is outside [0, 1]"))
}

fn reflectivity(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    (0.0..=0.5).contains(&v).then_some(v).ok_or_else(|| format!("{v} is outside [0, 1/2]"))
}

/// `x` with 12 significant digits.
fn sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..12).contains(&mag) {
        return format!("{x:.11e}");
    }
    format!("{:.*}", (11 - mag) as usize, x)
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Broadcast { r, alpha, phase, json } => cmd_broadcast(r, alpha, phase, json),
        Command::Sweep { out, r, alpha, phase } => cmd_sweep(out, r, alpha, phase),
        Command::Teleclone {
            p,
            alpha,
            phase,
            seed,
            enumerate,
            transcript,
        } => cmd_teleclone(p, alpha, phase, seed, enumerate, transcript),
        Command::Verify {
            samples,
            seed,
            inject_fault,
        } => cmd_verify(samples, seed, inject_fault),
    }
}

fn verdict(rep: &VerdictReport) -> String {
    let ent = |d: &PairDiagnostics| !d.ppt.separable;
    if (rep.r - 0.5).abs() < 1e-12 {
        return "entanglement swapping limit".into();
    }
    if ent(&rep.a1b1) && ent(&rep.cd) && !ent(&rep.a1c) && !ent(&rep.b1d) {
        return if (rep.r - 1.0 / 3.0).abs() < 1e-9 {
            "broadcast: symmetric, both pairs inseparable".into()
        } else {
            "broadcast: both pairs inseparable, cross pairs separable".into()
        };
    }
    let mut why = Vec::new();
    if !ent(&rep.a1b1) {
        why.push("a1b1 separable");
    }
    if !ent(&rep.cd) {
        why.push("cd separable");
    }
    if ent(&rep.a1c) || ent(&rep.b1d) {
        why.push("cross pairs inseparable");
    }
    format!("no broadcast: {}", why.join(", "))
}

fn cmd_broadcast(r: f64, alpha: f64, phase: f64, json: bool) -> ExitCode {
    let rep = match Reflectivity::new(r).and_then(|refl| VerdictReport::evaluate(alpha, phase, refl)) {
        Ok(rep) => rep,
        Err(e) => return fail(e),
    };
    let v = verdict(&rep);
    if json {
        let mut value = serde_json::to_value(&rep).expect("report serializes");
        value["verdict"] = v.clone().into();
        println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    } else {
        println!("R         {}", sig(rep.r));
        println!("|alpha|   {}", sig(rep.alpha_abs));
        println!("phase     {}", sig(rep.alpha_phase));
        println!("lambda_d  {}", sig(rep.lambda_d));
        println!("lambda_s  {}", sig(rep.lambda_s));
        println!();
        println!(
            "{:<5} {:>15} {:>15} {:>12} {:>19} {:>15} {:>15} {:>15}",
            "pair", "F_closed", "F_numeric", "PPT", "min_PT_eigenvalue", "M", "N", "F_max"
        );
        for (name, d) in [("a1b1", &rep.a1b1), ("cd", &rep.cd), ("a1c", &rep.a1c), ("b1d", &rep.b1d)] {
            let ppt = if d.ppt.separable { "separable" } else { "inseparable" };
            println!(
                "{:<5} {:>15} {:>15} {:>12} {:>19} {:>15} {:>15} {:>15}",
                name,
                d.fidelity_closed_form.map(sig).unwrap_or_else(|| "-".into()),
                sig(d.fidelity_numeric),
                ppt,
                sig(d.ppt.min_eigenvalue),
                sig(d.m),
                sig(d.n),
                sig(d.f_max)
            );
        }
        println!();
        let win = |w: Option<entcast::criteria::Interval>| match w {
            Some(iv) => format!("[{}, {}]", sig(iv.lo), sig(iv.hi)),
            None => "empty".into(),
        };
        println!("|alpha|^2 window a1b1 inseparable  {}", win(rep.windows.a1b1));
        println!("|alpha|^2 window cd inseparable    {}", win(rep.windows.cd));
        println!("|alpha|^2 window a1c separable     {}", win(rep.windows.a1c));
        println!("|alpha|^2 broadcast condition      {}", win(rep.windows.broadcast.map(|b| b.alpha_sq)));
        println!();
        println!("verdict: {v}");
    }
    for (name, d) in [("a1b1", &rep.a1b1), ("cd", &rep.cd)] {
        if let Some(f) = d.fidelity_closed_form {
            if (f - d.fidelity_numeric).abs() > 1e-9 {
                return fail(format!("{name}: numeric fidelity disagrees with closed form"));
            }
        }
    }
    ExitCode::SUCCESS
}

const SWEEP_HEADER: [&str; 13] = [
    "R",
    "alpha_abs",
    "alpha_phase",
    "F_a1b1",
    "F_cd",
    "lambda_d",
    "M_a1b1",
    "M_cd",
    "N_a1b1",
    "N_cd",
    "sep_a1b1",
    "sep_cd",
    "sep_a1c",
];

fn sweep_row(r: f64, alpha: f64, phase: f64) -> entcast::Result<Vec<String>> {
    let rep = VerdictReport::evaluate(alpha, phase, Reflectivity::new(r)?)?;
    Ok(vec![
        sig(r),
        sig(alpha),
        sig(phase),
        sig(rep.a1b1.fidelity_numeric),
        sig(rep.cd.fidelity_numeric),
        sig(rep.lambda_d),
        sig(rep.a1b1.m),
        sig(rep.cd.m),
        sig(rep.a1b1.n),
        sig(rep.cd.n),
        rep.a1b1.ppt.separable.to_string(),
        rep.cd.ppt.separable.to_string(),
        rep.a1c.ppt.separable.to_string(),
    ])
}

fn cmd_sweep(out: PathBuf, r: Vec<f64>, alpha: Vec<f64>, phase: Vec<f64>) -> ExitCode {
    let or = |v: Vec<f64>, d: Vec<f64>| if v.is_empty() { d } else { v };
    let r = or(r, (1..=9).map(|i| 0.05 * i as f64).collect());
    let alpha = or(alpha, (1..=10).map(|i| 0.1 * i as f64).collect());
    let phase = or(phase, vec![0.0]);
    let mut grid = Vec::with_capacity(r.len() * alpha.len() * phase.len());
    for &r in &r {
        for &a in &alpha {
            for &p in &phase {
                grid.push((r, a, p));
            }
        }
    }
    let rows: entcast::Result<Vec<Vec<String>>> = grid.par_iter().map(|&(r, a, p)| sweep_row(r, a, p)).collect();
    let rows = match rows {
        Ok(rows) => rows,
        Err(e) => return fail(e),
    };
    let write = || -> Result<(), Box<dyn std::error::Error>> {
        let mut w = csv::Writer::from_path(&out)?;
        w.write_record(SWEEP_HEADER)?;
        for row in &rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    };
    if let Err(e) = write() {
        return fail(format!("{}: {e}", out.display()));
    }
    println!("wrote {} rows to {}", rows.len(), out.display());
    ExitCode::SUCCESS
}

fn cmd_teleclone(
    p: f64,
    alpha: f64,
    phase: f64,
    seed: Option<u64>,
    enumerate: bool,
    transcript: Option<PathBuf>,
) -> ExitCode {
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let source = if enumerate {
        OutcomeSource::EnumerateAll
    } else {
        OutcomeSource::Seeded(seed)
    };
    let run = || -> entcast::Result<_> {
        let params = CloneParams::new(p)?;
        let (a, b) = broadcasting::alpha_beta(alpha, phase)?;
        let runs = telecloning::run_telecloning(a, b, params, source)?;
        let report = telecloning::clone_report(a, b, params)?;
        Ok((params, runs, report))
    };
    let (params, runs, report) = match run() {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    println!("p {}  q {}", sig(params.p()), sig(params.q()));
    if !enumerate {
        println!("seed {seed}");
    }
    println!();
    println!("{:<11} {:>15} {:>15}  recovery", "outcome", "probability", "fidelity");
    for r in &runs {
        println!(
            "{:<11} {:>15} {:>15}  {}",
            format!("{},{}", r.outcome.0.name(), r.outcome.1.name()),
            sig(r.probability),
            sig(r.fidelity),
            r.plan.describe()
        );
    }
    println!();
    let (g12, g34) = telecloning::clone_fidelities(params);
    println!("clone fidelity B1B2  {}  (closed form {})", sig(report.fidelity_b1b2), sig(g12));
    println!("clone fidelity B3B4  {}  (closed form {})", sig(report.fidelity_b3b4), sig(g34));
    println!("closed-form match    {}", report.closed_form_match);
    let res = telecloning::resource_report();
    println!(
        "resources            naive {} ebits {} cbits, telecloning {} ebit {} cbits",
        res.naive.ebits, res.naive.cbits, res.telecloning.ebits, res.telecloning.cbits
    );
    if let Some(path) = transcript {
        let events: Vec<_> = runs.iter().map(|r| &r.transcript).collect();
        let json = serde_json::to_string_pretty(&events).expect("transcript serializes");
        if let Err(e) = File::create(&path).and_then(|mut f| writeln!(f, "{json}")) {
            return fail(format!("{}: {e}", path.display()));
        }
    }
    let recovered = runs.iter().all(|r| (r.fidelity - 1.0).abs() < 1e-10);
    if !recovered || !report.closed_form_match {
        return fail("telecloning invariant violated");
    }
    ExitCode::SUCCESS
}

fn cmd_verify(samples: usize, seed: Option<u64>, fault: Option<Fault>) -> ExitCode {
    let mut cfg = VerifyConfig {
        mc_samples: samples,
        ..VerifyConfig::default()
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(Fault::PiSign) = fault {
        cfg.pi = verify::faulty_pi;
    }
    let mut all = true;
    for run in verify::CRITERIA {
        let rep = run(&cfg);
        println!("{rep}");
        for c in rep.failures() {
            println!("    failed: {}: {}", c.name, c.detail);
        }
        all &= rep.passed();
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
