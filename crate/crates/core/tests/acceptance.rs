//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Run with `cargo test --test acceptance`.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use qstbell::linalg::{self, StateVector};
use qstbell::{bell, game, states};

const BIN: &str = env!("CARGO_BIN_EXE_qstbell");

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn cli_json(args: &[&str]) -> Result<(Value, String, Duration), String> {
    let start = Instant::now();
    let out = Command::new(BIN)
        .args(args)
        .arg("--json")
        .env_remove("QSTBELL_THREADS")
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    let raw = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let v = serde_json::from_str(&raw).map_err(|e| e.to_string())?;
    Ok((v, raw, elapsed))
}

fn num(v: &Value, key: &str) -> Result<f64, String> {
    v[key]
        .as_f64()
        .ok_or_else(|| format!("missing number {key}"))
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn secs(d: Duration) -> String {
    format!("{:.3} s", d.as_secs_f64())
}

fn exact_quantum_value() -> Check {
    let (v, _, t) = cli_json(&["bell", "exact", "--d", "3"])?;
    let q = num(&v, "quantum_value")?;
    let err = (q - 2.0 * 3f64.sqrt()).abs();
    ensure(
        err <= 1e-9 && t < Duration::from_secs(1),
        format!(
            "quantum {q:.10}, |Δ| = {err:.1e} (≤ 1e-9), {} (< 1 s)",
            secs(t)
        ),
    )
}

fn classical_bound() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for (d, count, limit) in [(2u64, 64u64, 1u64), (3, 4608, 1), (4, 1 << 20, 30)] {
        let ds = d.to_string();
        let (e, _, t) = cli_json(&["bell", "lhv", "--d", &ds, "--mode", "enumerate"])?;
        let (a, _, _) = cli_json(&["bell", "lhv", "--d", &ds, "--mode", "analytic"])?;
        let max = e["max_value"].as_i64().unwrap_or(i64::MIN);
        let scanned = e["strategies_scanned"].as_u64().unwrap_or(0);
        ok &= max == 2
            && a["max_value"].as_i64() == Some(2)
            && scanned == count
            && t < Duration::from_secs(limit);
        parts.push(format!(
            "d={d}: max {max} over {scanned} (analytic {}), {} (< {limit} s)",
            a["max_value"],
            secs(t)
        ));
    }
    ensure(ok, parts.join("; "))
}

fn maximality() -> Check {
    let d = 3;
    let bound = 2.0 * 3f64.sqrt();
    let b = bell::bell_operator(d).map_err(|e| e.to_string())?;
    let eig = linalg::hermitian_eigs(&b);
    let (top, v) = eig.top();
    let fid = linalg::fidelity(v, &states::max_entangled(d).unwrap()).map_err(|e| e.to_string())?;
    let s = bell::seesaw_verify(d, 20, 0).map_err(|e| e.to_string())?;
    let worst_excess = s
        .trials
        .iter()
        .map(|t| t.value - bound)
        .fold(f64::MIN, f64::max);
    let reach = (s.best_value - bound).abs();
    ensure(
        (top - bound).abs() <= 1e-8 && fid >= 1.0 - 1e-8 && worst_excess <= 1e-6 && reach <= 1e-6,
        format!(
            "λ_max {top:.10} (|Δ| {:.1e} ≤ 1e-8), fidelity 1 − {:.1e}, 20 see-saw trials: max excess {worst_excess:.1e} (≤ 1e-6), best |Δ| {reach:.1e} (≤ 1e-6)",
            (top - bound).abs(),
            (1.0 - fid).max(0.0)
        ),
    )
}

fn chsh_recovery() -> Check {
    let m = |k, l| states::grid_intermediate(2, k, l).unwrap();
    let bases = [[m(0, 0), m(1, 1)], [m(0, 1), m(1, 0)]];
    let mut dev: f64 = 0.0;
    for b in &bases {
        dev = dev.max((linalg::fidelity(&b[0], &b[0]).unwrap() - 1.0).abs());
        dev = dev.max(linalg::fidelity(&b[0], &b[1]).unwrap());
    }
    for x in &bases[0] {
        for y in &bases[1] {
            dev = dev.max((linalg::fidelity(x, y).unwrap() - 0.5).abs());
        }
    }
    let q = bell::bell_value(&states::max_entangled(2).unwrap(), 2).map_err(|e| e.to_string())?;
    let err = (q - 2.0 * 2f64.sqrt()).abs();
    ensure(
        dev <= 1e-10 && err <= 1e-9,
        format!("basis/MUB deviation {dev:.1e} (≤ 1e-10), quantum {q:.10}, |Δ| {err:.1e} (≤ 1e-9)"),
    )
}

fn dimension_law() -> Check {
    let rows = bell::dimension_sweep(&[2, 3, 4, 5]).map_err(|e| e.to_string())?;
    let worst = rows
        .iter()
        .map(|r| (r.ratio - (r.d as f64).sqrt()).abs())
        .fold(0.0, f64::max);
    let d5_analytic = rows
        .iter()
        .any(|r| r.d == 5 && r.lhv_mode == qstbell::lhv::LhvMode::Analytic);
    let ratios: Vec<String> = rows
        .iter()
        .map(|r| format!("{}:{:.7}", r.d, r.ratio))
        .collect();
    ensure(
        worst <= 1e-9 && d5_analytic,
        format!(
            "ratios {}, max |ratio − √d| {worst:.1e} (≤ 1e-9), d=5 analytic {d5_analytic}",
            ratios.join(" ")
        ),
    )
}

fn protocol_statistics() -> Check {
    let args = [
        "game", "simulate", "--d", "3", "--rounds", "100000", "--seed", "42",
    ];
    let (v, raw, t) = cli_json(&args)?;
    let (_, again, _) = cli_json(&args)?;
    let pass = num(&v, "pass_rate_given_announce")?;
    let se_pass = num(&v, "std_err_pass")?;
    let fire = num(&v, "fire_rate")?;
    let se_fire = num(&v, "std_err_fire")?;
    let z_pass = (pass - (0.5 + 0.5 / 3f64.sqrt())) / se_pass;
    let z_fire = (fire - 1.0 / 3.0) / se_fire;
    let identical = raw == again;
    ensure(
        z_pass.abs() <= 4.0 && z_fire.abs() <= 4.0 && identical && t < Duration::from_secs(5),
        format!(
            "pass {pass:.5} (z {z_pass:+.2}), fire {fire:.5} (z {z_fire:+.2}), |z| ≤ 4, identical rerun {identical}, {} (< 5 s)",
            secs(t)
        ),
    )
}

fn steering_soundness() -> Check {
    let (mut prob_dev, mut fid_dev): (f64, f64) = (0.0, 0.0);
    for d in 2..=4 {
        let psi = states::max_entangled(d).unwrap();
        for t in states::TargetSet::all(d) {
            let bob = linalg::contract_alice(&psi, &states::steering_vector(d, t).unwrap())
                .map_err(|e| e.to_string())?;
            prob_dev = prob_dev.max((bob.norm_sqr() - 1.0 / d as f64).abs());
            let m = states::grid_intermediate(d, t.k, t.l).unwrap();
            let f = linalg::fidelity(&bob.normalized().unwrap(), &m).unwrap();
            fid_dev = fid_dev.max(1.0 - f);
        }
    }
    ensure(
        prob_dev <= 1e-10 && fid_dev <= 1e-9,
        format!("29 targets over d=2..4: max |p − 1/d| {prob_dev:.1e} (≤ 1e-10), max 1 − fidelity {fid_dev:.1e} (≤ 1e-9)"),
    )
}

fn control_formula() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let d = rng.gen_range(2..=6);
        let p1 = StateVector::random(d, &mut rng);
        let p2 = StateVector::random(d, &mut rng);
        let m = states::intermediate(&p1, &p2).map_err(|e| e.to_string())?;
        let c = game::control_probability(&p1, &p2).map_err(|e| e.to_string())?;
        for p in [&p1, &p2] {
            worst = worst.max((linalg::fidelity(&m, p).unwrap() - c).abs());
        }
    }
    ensure(
        worst <= 1e-10,
        format!("1000 random pairs, d=2..6: max deviation {worst:.1e} (≤ 1e-10)"),
    )
}

fn operator_consistency() -> Check {
    let mut worst: f64 = 0.0;
    for d in [2usize, 3] {
        let b = bell::bell_operator(d).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(9 + d as u64);
        for _ in 0..100 {
            let s = StateVector::random(d * d, &mut rng);
            let op = b.expectation(&s).unwrap();
            let sum = bell::bell_value(&s, d).unwrap();
            worst = worst.max((op - sum).abs());
        }
    }
    ensure(
        worst <= 1e-9,
        format!("100 random states at d=2 and d=3: max |⟨B⟩ − B| {worst:.1e} (≤ 1e-9)"),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("exact quantum value", exact_quantum_value),
        ("classical bound", classical_bound),
        ("maximality", maximality),
        ("CHSH recovery", chsh_recovery),
        ("dimension law", dimension_law),
        ("protocol statistics", protocol_statistics),
        ("steering soundness", steering_soundness),
        ("control formula", control_formula),
        ("operator/probability consistency", operator_consistency),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = secs(start.elapsed());
        match result {
            Ok(msg) => println!("PASS  {}. {name}: {msg} [{elapsed}]", i + 1),
            Err(msg) => {
                failures += 1;
                println!("FAIL  {}. {name}: {msg} [{elapsed}]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
