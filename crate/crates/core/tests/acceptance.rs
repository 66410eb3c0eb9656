//! Acceptance battery. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;

use infodist::accinfo::{estimate, holevo_chi};
use infodist::bb84::{
    build_conjugate_pair, hadamard, named_attack_for, norm_bound_check, posterior_invariant,
    theorem3_check, theorem3_pair, AttackKind, BasisLabel, ConjugateDef, ConjugatePair,
    POSTERIOR_MIN_PROB,
};
use infodist::linalg::{c, tensor_all, ComplexMatrix};
use infodist::protocol::{check_measurement_pair, run_tradeoff, theorem2_rhs, Scenario};
use infodist::quantum::{Attack, DensityOperator, Ensemble, Povm, PureState};
use infodist::random::{
    random_attack, random_decomposition, random_density, random_povm, random_pure_state,
    random_pvm, seeded_rng,
};
use infodist::selftest::{run_selftest, Execution};
use infodist::steering::{verify_theorem1, SteeringContext};
use infodist::uncertainty::check_eur;

struct Outcome {
    pass: bool,
    summary: String,
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn steering_battery() -> Outcome {
    let start = Instant::now();
    let (mut worst_c, mut worst_p, mut worst_s) = (0.0f64, 0.0f64, 0.0f64);
    let mut count = 0;
    let mut t = 0u64;
    while count < 200 {
        let mut rng = seeded_rng(1001, t);
        t += 1;
        let d = 2 + (count % 5);
        let m = rng.random_range(1..=6);
        let rho = random_density(d, &mut rng);
        let Some(ens) = random_decomposition(&rho, m, &mut rng) else {
            continue;
        };
        let ctx = SteeringContext::new(rho).expect("full rank");
        let r = verify_theorem1(&ctx, &ens, true).expect("valid instance");
        worst_c = worst_c.max(r.completeness_error);
        worst_p = worst_p.max(r.max_prob_error());
        worst_s = worst_s.max(r.max_state_error());
        count += 1;
    }
    let el = start.elapsed();
    let pass = worst_c <= 1e-8 && worst_p <= 1e-8 && worst_s <= 1e-8 && within(el, 30);
    Outcome {
        pass,
        summary: format!(
            "{count} instances, d 2..6; completeness {worst_c:.1e}, probability {worst_p:.1e}, state {worst_s:.1e} (tol 1e-8); {:.1}s (limit 30s)",
            el.as_secs_f64()
        ),
    }
}

fn eur_battery() -> Outcome {
    let start = Instant::now();
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for t in 0..1000u64 {
        let mut rng = seeded_rng(2002, t);
        let d = rng.random_range(2..=5);
        let rho = if t % 3 == 0 {
            random_pure_state(d, &mut rng).density()
        } else {
            random_density(d, &mut rng)
        };
        let meas = |rng: &mut rand_chacha::ChaCha8Rng| {
            if rng.random_bool(0.4) {
                random_pvm(d, rng)
            } else {
                let k = rng.random_range(d..=2 * d);
                random_povm(d, k, rng)
            }
        };
        let a = meas(&mut rng);
        let b = meas(&mut rng);
        let r = check_eur(&rho, &a, &b).expect("valid instance");
        worst = worst.min(r.margin());
        if r.margin() < -1e-9 {
            violations += 1;
        }
    }
    let el = start.elapsed();
    Outcome {
        pass: violations == 0 && within(el, 30),
        summary: format!(
            "1000 instances, d 2..5; {violations} violations, smallest margin {worst:.3e} bits (slack 1e-9); {:.1}s (limit 30s)",
            el.as_secs_f64()
        ),
    }
}

fn uniform(basis: &ComplexMatrix) -> Ensemble {
    let d = basis.dim();
    Ensemble::from_pure(
        (0..d)
            .map(|j| {
                (
                    1.0 / d as f64,
                    PureState::normalized(basis.column(j)).unwrap(),
                )
            })
            .collect(),
    )
    .unwrap()
}

fn mub_anchors() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 1..=3usize {
        let d = 1 << n;
        let conj = tensor_all(&vec![hadamard(); n]);
        let ob = infodist::uncertainty::overlap_bound(
            &Povm::from_basis(&ComplexMatrix::identity(d)).unwrap(),
            &Povm::from_basis(&conj).unwrap(),
        )
        .unwrap();
        let sc = Scenario::new(
            uniform(&ComplexMatrix::identity(d)),
            uniform(&conj),
            Attack::identity(d),
        )
        .unwrap();
        let rhs = theorem2_rhs(&sc).unwrap().rhs_bits;
        let nb =
            norm_bound_check(&build_conjugate_pair(n, ConjugateDef::Hadamard).unwrap()).unwrap();
        let expect_norm = 0.5f64.powf(n as f64 / 2.0);
        let ok = (ob.bound_bits - n as f64).abs() <= 1e-9
            && (rhs - n as f64).abs() <= 1e-9
            && (nb.max_norm - expect_norm).abs() <= 1e-9
            && nb.pass;
        pass &= ok;
        parts.push(format!(
            "N={n}: overlap bound {:.12}, trade-off rhs {:.12}, max norm {:.12} vs {:.12}",
            ob.bound_bits, rhs, nb.max_norm, expect_norm
        ));
    }
    Outcome {
        pass,
        summary: parts.join("; ") + " (tol 1e-9)",
    }
}

fn tradeoff_battery() -> Outcome {
    let start = Instant::now();
    let mut scenarios = 0;
    let mut pairs = 0;
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut s = 0u64;
    while scenarios < 60 {
        let mut rng = seeded_rng(4004, s);
        s += 1;
        let d: usize = if scenarios % 2 == 0 { 2 } else { 4 };
        let (ex, ey) = if (scenarios / 2) % 2 == 0 {
            let conj = tensor_all(&vec![hadamard(); d.trailing_zeros() as usize]);
            let rot = infodist::random::random_unitary(d, &mut rng);
            // conjugate pair seen through a random common unitary
            (uniform(&rot), uniform(&(&rot * &conj)))
        } else {
            let rho = random_density(d, &mut rng);
            let mx = rng.random_range(2..=d + 2);
            let my = rng.random_range(2..=d + 2);
            match (
                random_decomposition(&rho, mx, &mut rng),
                random_decomposition(&rho, my, &mut rng),
            ) {
                (Some(a), Some(b)) => (a, b),
                _ => continue,
            }
        };
        let anc = rng.random_range(1..=4);
        let sc =
            Scenario::new(ex, ey, random_attack(d, anc, &mut rng)).expect("consistent scenario");
        let bound = theorem2_rhs(&sc).expect("full rank");
        for _ in 0..20 {
            let bob = if rng.random_bool(0.3) {
                random_pvm(d, &mut rng)
            } else {
                random_povm(d, d + 2, &mut rng)
            };
            let eve = random_povm(anc, anc + 2, &mut rng);
            let pc = check_measurement_pair(&sc, &bound, &bob, &eve).unwrap();
            worst = worst.min(pc.margin());
            if !pc.pass {
                violations += 1;
            }
            pairs += 1;
        }
        if scenarios % 6 == 0 {
            let r = run_tradeoff(&sc, 2, s).unwrap();
            worst = worst.min(r.margin);
            if !r.pass {
                violations += 1;
            }
        }
        scenarios += 1;
    }
    let el = start.elapsed();
    Outcome {
        pass: violations == 0 && within(el, 300),
        summary: format!(
            "{scenarios} scenarios, {pairs} measurement pairs plus optimized estimates; {violations} violations, smallest margin {worst:.3e} bits (slack 1e-6); {:.1}s (limit 300s)",
            el.as_secs_f64()
        ),
    }
}

fn attack_set() -> Vec<(String, AttackKind)> {
    let mut v = vec![
        ("identity".to_string(), AttackKind::Identity),
        ("swap".to_string(), AttackKind::Swap),
        (
            "intercept_resend(a)".to_string(),
            AttackKind::InterceptResend(BasisLabel::A),
        ),
        (
            "intercept_resend(b)".to_string(),
            AttackKind::InterceptResend(BasisLabel::B),
        ),
        ("cnot_clone".to_string(), AttackKind::CnotClone),
    ];
    for k in 0..9 {
        let theta = k as f64 * PI / 16.0;
        v.push((
            format!("partial_entangle({k}π/16)"),
            AttackKind::PartialEntangle(theta),
        ));
    }
    v
}

struct Theorem3Stats {
    checks: usize,
    violations: usize,
    worst: f64,
    tight: Option<(f64, f64)>,
    posterior_states: usize,
    posterior_violations: usize,
    posterior_worst: f64,
}

fn theorem3_and_posterior() -> (Theorem3Stats, Duration) {
    let start = Instant::now();
    let mut st = Theorem3Stats {
        checks: 0,
        violations: 0,
        worst: f64::INFINITY,
        tight: None,
        posterior_states: 0,
        posterior_violations: 0,
        posterior_worst: f64::INFINITY,
    };
    let posterior = |st: &mut Theorem3Stats, cp: &ConjugatePair, attack: &Attack, eve: &Povm| {
        let inv = posterior_invariant(cp, attack, eve).unwrap();
        for e in inv.entries.iter().filter(|e| e.prob > POSTERIOR_MIN_PROB) {
            st.posterior_states += 1;
            let margin = e.h_e + e.h_p - cp.n() as f64;
            st.posterior_worst = st.posterior_worst.min(margin);
            if margin < -1e-9 {
                st.posterior_violations += 1;
            }
        }
    };
    for n in 1..=2usize {
        let cp = build_conjugate_pair(n, ConjugateDef::Hadamard).unwrap();
        for (i, (name, kind)) in attack_set().into_iter().enumerate() {
            let attack = named_attack_for(kind, &cp).unwrap();
            let r = theorem3_check(&cp, &attack, 6, (n * 100 + i) as u64).unwrap();
            for side in [&r.direct, &r.mirrored] {
                st.checks += 1;
                st.worst = st.worst.min(side.margin);
                if !side.pass {
                    st.violations += 1;
                }
            }
            if n == 1 && name == "intercept_resend(a)" {
                st.tight = Some((r.direct.i_ae_lower, r.direct.h_error));
            }
            posterior(&mut st, &cp, &attack, &r.direct.eve_povm);
            let mut rng = seeded_rng(5005, (n * 100 + i) as u64);
            for _ in 0..10 {
                let k = attack.ancilla_dim();
                let eve = random_povm(k, k + rng.random_range(0..=2), &mut rng);
                let (info, h) = theorem3_pair(&cp, &attack, &eve).unwrap();
                st.checks += 1;
                st.worst = st.worst.min(h - info);
                if info > h + 1e-6 {
                    st.violations += 1;
                }
                posterior(&mut st, &cp, &attack, &eve);
            }
        }
    }
    (st, start.elapsed())
}

fn accinfo_bracket() -> Outcome {
    let start = Instant::now();
    let mut below = 0;
    let mut above = 0;
    let mut worst_gap = f64::NEG_INFINITY;
    let mut worst_excess = f64::NEG_INFINITY;
    for t in 0..100u64 {
        let mut rng = seeded_rng(7007, t);
        let p = rng.random_range(0.05..0.95);
        let mut bloch = || {
            let v: [f64; 3] = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ];
            let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            // every third ensemble is pure, the rest have random purity
            let r = if t % 3 == 0 {
                1.0
            } else {
                rng.random_range(0.0..1.0)
            };
            [v[0] / len * r, v[1] / len * r, v[2] / len * r]
        };
        let (r0, r1) = (bloch(), bloch());
        let ens =
            Ensemble::new(vec![(p, bloch_density(r0)), (1.0 - p, bloch_density(r1))]).unwrap();
        let est = estimate(&ens, 8, t).unwrap();
        let grid = grid_oracle(p, r0, r1);
        let chi = chi_oracle(p, r0, r1);
        assert!((chi - holevo_chi(&ens)).abs() < 1e-9, "holevo mismatch");
        worst_gap = worst_gap.max(grid - est.lower_bits);
        worst_excess = worst_excess.max(est.lower_bits - chi);
        if est.lower_bits < grid - 1e-3 {
            below += 1;
        }
        if est.lower_bits > chi + 1e-6 {
            above += 1;
        }
    }
    Outcome {
        pass: below == 0 && above == 0,
        summary: format!(
            "100 binary qubit ensembles; {below} below grid − 1e-3 (worst shortfall {worst_gap:.2e}), {above} above χ + 1e-6 (worst excess {worst_excess:.2e}); {:.1}s",
            start.elapsed().as_secs_f64()
        ),
    }
}

fn bloch_density(r: [f64; 3]) -> DensityOperator {
    DensityOperator::new(
        ComplexMatrix::from_rows(&[
            vec![c((1.0 + r[2]) / 2.0, 0.0), c(r[0] / 2.0, -r[1] / 2.0)],
            vec![c(r[0] / 2.0, r[1] / 2.0), c((1.0 - r[2]) / 2.0, 0.0)],
        ])
        .unwrap(),
    )
    .unwrap()
}

fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -(x * x.log2() + (1.0 - x) * (1.0 - x).log2())
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Mutual information of the projective measurement along `n`, from Bloch vectors only.
fn projective_info(p: f64, r0: [f64; 3], r1: [f64; 3], n: [f64; 3]) -> f64 {
    let q0 = (1.0 + dot(r0, n)) / 2.0;
    let q1 = (1.0 + dot(r1, n)) / 2.0;
    let py = p * q0 + (1.0 - p) * q1;
    h2(py) - p * h2(q0) - (1.0 - p) * h2(q1)
}

/// Best projective measurement on a 100 × 200 sphere grid, then a local 41 × 41 refinement.
fn grid_oracle(p: f64, r0: [f64; 3], r1: [f64; 3]) -> f64 {
    let dir = |th: f64, ph: f64| [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
    let (mut best, mut bt, mut bp) = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..100 {
        for j in 0..200 {
            let (th, ph) = (PI * (i as f64 + 0.5) / 100.0, 2.0 * PI * j as f64 / 200.0);
            let v = projective_info(p, r0, r1, dir(th, ph));
            if v > best {
                (best, bt, bp) = (v, th, ph);
            }
        }
    }
    let step = PI / 100.0;
    for i in -20..=20 {
        for j in -20..=20 {
            let (th, ph) = (bt + step * i as f64 / 20.0, bp + step * j as f64 / 20.0);
            best = best.max(projective_info(p, r0, r1, dir(th, ph)));
        }
    }
    best
}

/// `S(ρ̄) − Σ p S(ρ_x)` from Bloch lengths.
fn chi_oracle(p: f64, r0: [f64; 3], r1: [f64; 3]) -> f64 {
    let s = |r: [f64; 3]| h2((1.0 + dot(r, r).sqrt()) / 2.0);
    let avg = [0, 1, 2].map(|k| p * r0[k] + (1.0 - p) * r1[k]);
    s(avg) - p * s(r0) - (1.0 - p) * s(r1)
}

fn determinism() -> Outcome {
    let a = run_selftest(31, 40, Execution::Serial).unwrap().to_json();
    let b = run_selftest(31, 40, Execution::Serial).unwrap().to_json();
    let p = run_selftest(31, 40, Execution::Parallel).unwrap().to_json();
    let lib_ok = a == b && a == p;
    let bin = env!("CARGO_BIN_EXE_infodist");
    let cli = |extra: &[&str]| {
        let out = Command::new(bin)
            .args(["selftest", "--seed", "31", "--trials", "40"])
            .args(extra)
            .env_remove("INFODIST_SEED")
            .output()
            .expect("binary runs");
        (out.status.code(), out.stdout)
    };
    let (c1, o1) = cli(&[]);
    let (c2, o2) = cli(&[]);
    let (c3, o3) = cli(&["--serial"]);
    let cli_ok = c1 == Some(0)
        && c2 == Some(0)
        && c3 == Some(0)
        && o1 == o2
        && o1 == o3
        && o1 == a.as_bytes();
    Outcome {
        pass: lib_ok && cli_ok,
        summary: format!(
            "selftest seed 31, 40 trials: library serial/serial/parallel identical = {lib_ok}; CLI run/run/--serial identical and equal to library = {cli_ok} ({} bytes)",
            o1.len()
        ),
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "steering battery", steering_battery()),
        (2, "entropic uncertainty fuzzing", eur_battery()),
        (3, "mutually unbiased anchors", mub_anchors()),
        (4, "information trade-off battery", tradeoff_battery()),
    ];

    let (st, el) = theorem3_and_posterior();
    let tight_ok = st
        .tight
        .is_some_and(|(i, h)| (i - 1.0).abs() <= 1e-3 && (h - 1.0).abs() <= 1e-3);
    let (ti, th) = st.tight.unwrap_or((f64::NAN, f64::NAN));
    results.push((
        5,
        "error randomness battery",
        Outcome {
            pass: st.violations == 0 && tight_ok && within(el, 180),
            summary: format!(
                "14 attacks x n 1..2, {} checks; {} violations, smallest margin {:.3e} bits (slack 1e-6); intercept-resend n=1: I = {ti:.6}, H = {th:.6} (tol 1e-3); {:.1}s (limit 180s)",
                st.checks,
                st.violations,
                st.worst,
                el.as_secs_f64()
            ),
        },
    ));
    results.push((
        6,
        "per-outcome entropy invariant",
        Outcome {
            pass: st.posterior_violations == 0 && st.posterior_states > 0,
            summary: format!(
                "{} a-posteriori states with p > 1e-9; {} violations, smallest H(E)+H(P)−n {:.3e} (slack 1e-9)",
                st.posterior_states, st.posterior_violations, st.posterior_worst
            ),
        },
    ));
    results.push((7, "accessible information bracket", accinfo_bracket()));
    results.push((8, "selftest determinism", determinism()));

    let mut all = true;
    for (k, name, o) in &results {
        all &= o.pass;
        println!(
            "[{}] criterion {k}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.summary
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        results.iter().filter(|r| r.2.pass).count(),
        results.len()
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
