//! Acceptance criteria, one line per criterion. Exits nonzero if any fails.
//!
//! Runtime budgets are reported next to each line; they are informational
//! because wall-clock depends on the host's core count.

use std::time::Instant;

use resource_kit::indicators::{closed_form_k2, multilevel_coherence, IndicatorKind};
use resource_kit::random::random_mixed;
use resource_kit::verify::{run_suite, Suite, VerifyOptions, VerifyReport};
use resource_kit::{CVector, DensityMatrix, OptimizerOptions, PureState, C64};

const SEED: u64 = 20_240_601;

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn count(rep: &VerifyReport, prefix: &str) -> usize {
    let sub = format!("{prefix}_");
    rep.records
        .iter()
        .filter(|r| r.label == prefix || r.label.starts_with(&sub))
        .count()
}

fn worst(rep: &VerifyReport) -> f64 {
    rep.records.iter().map(|r| r.margin()).fold(f64::INFINITY, f64::min)
}

/// Suite passes and every listed label (or `label_*` family) has at least `min` records.
fn suite_check(rep: &VerifyReport, expected: &[(&str, usize)]) -> Outcome {
    let mut missing = Vec::new();
    for &(p, min) in expected {
        let c = count(rep, p);
        if c < min {
            missing.push(format!("{p}: {c} < {min}"));
        }
    }
    let failed: Vec<String> = rep
        .failures()
        .take(5)
        .map(|r| format!("{} seed {} slack {:.3e}", r.label, r.seed, r.slack))
        .collect();
    let ok = rep.passed() && missing.is_empty();
    let mut detail = format!("{} records, min margin {:.3e}", rep.records.len(), worst(rep));
    if !failed.is_empty() {
        detail.push_str(&format!("; failures: {}", failed.join(", ")));
    }
    if !missing.is_empty() {
        detail.push_str(&format!("; too few: {}", missing.join(", ")));
    }
    check(ok, detail)
}

fn suite(s: Suite, n: usize) -> VerifyReport {
    run_suite(s, &VerifyOptions::new(SEED, n)).expect("suite runs")
}

fn criterion_1() -> Outcome {
    // optimizer-only affinity against the closed form at k = 2
    let mut max_gap = 0.0f64;
    let mut runs = 0;
    for d in 2..=4usize {
        for alpha in [0.3, 0.5, 0.7] {
            for s in 0..50u64 {
                let rho = random_mixed(&[d], 1 + (s as usize % d), SEED ^ (s * 31 + d as u64)).unwrap();
                let opts = OptimizerOptions {
                    restarts: 8,
                    ..OptimizerOptions::with_seed(s)
                };
                let r = multilevel_coherence(&rho, 2, alpha, IndicatorKind::C, &opts).unwrap();
                let cf = closed_form_k2(&rho, alpha).unwrap();
                max_gap = max_gap.max((r.diagnostics.optimizer_affinity - cf.max_affinity).abs());
                runs += 1;
            }
        }
    }
    check(max_gap <= 1e-6, format!("{runs} runs, max |optimizer - closed form| = {max_gap:.3e} (tol 1e-6)"))
}

fn criterion_2() -> Outcome {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = PureState::new(vec![2], CVector::from_vec(vec![C64::new(h, 0.0); 2]))
        .unwrap()
        .to_density();
    let q = 1.0 / 3f64.sqrt();
    let qutrit = PureState::new(vec![3], CVector::from_vec(vec![C64::new(q, 0.0); 3]))
        .unwrap()
        .to_density();
    let opts = OptimizerOptions::with_seed(SEED);
    let value = |rho: &DensityMatrix, kind| multilevel_coherence(rho, 2, 0.5, kind, &opts).unwrap().value;
    let errs = [
        (value(&plus, IndicatorKind::C) - (1.0 - 2f64.powf(-0.5))).abs(),
        (value(&plus, IndicatorKind::Cfrak) - 0.5).abs(),
        (value(&qutrit, IndicatorKind::C) - (1.0 - 3f64.powf(-0.5))).abs(),
    ];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    check(worst <= 1e-9, format!("max anchor error {worst:.3e} (tol 1e-9)"))
}

fn criterion_3() -> Outcome {
    let rep = suite(Suite::AffinityProps, 500);
    suite_check(
        &rep,
        &[
            ("A1_lower", 500),
            ("A1_upper", 500),
            ("A1_self", 500),
            ("A1_separation", 500),
            ("A2_unitary", 500),
            ("A3_tensor", 500),
            ("A4_concavity", 500),
            ("A5_data_processing", 500),
            ("A6_selective_loss", 500),
        ],
    )
}

fn criterion_4() -> Outcome {
    let rep = suite(Suite::AppendixB, 500);
    suite_check(
        &rep,
        &[
            ("B1_lemma", 500),
            ("B1_power_mean", 500),
            ("B2_selective_power_sum", 500),
            ("B3_block_diagonal", 500),
            ("B4_data_processing_sum", 500),
            ("B5_selective_loss", 500),
        ],
    )
}

fn criterion_5() -> Outcome {
    let rep = suite(Suite::Theorem1, 500);
    suite_check(
        &rep,
        &[
            ("T1_P2_convexity_k2", 300),
            ("T1_P4_monotonicity_k2", 300),
            ("T1_P3_average_k2", 300),
            ("T1_P5_subadditivity_k2", 300),
            ("T1_P5_subadditivity_frak_k2", 300),
            ("T1_P1_zero_k3", 30),
            ("T1_P2_convexity_k3", 30),
            ("T1_P4_monotonicity_k3", 30),
            ("T1_P3_average_k3", 30),
            ("T1_P5_subadditivity_k3", 30),
        ],
    )
}

fn criterion_6() -> Outcome {
    let rep = suite(Suite::Theorem2, 500);
    suite_check(
        &rep,
        &[
            ("T2_P1_zero", 30),
            ("T2_P2_affinity", 30),
            ("T2_P2_forward", 30),
            ("T2_P2_backward", 30),
            ("T2_P3_convexity", 30),
            ("T2_P4_locc", 30),
            ("T2_P5_selective_locc", 30),
            ("T2_P6_subadditivity", 30),
            ("T2_P6_nesting", 30),
        ],
    )
}

fn criterion_7() -> Outcome {
    let rep = suite(Suite::Embedding, 500);
    let mut expected = vec![("E_involution", 3), ("E_affinity_preserved", 200)];
    let labels: Vec<String> = (2..=4)
        .flat_map(|d| [format!("E_sep_depth_d{d}"), format!("E_ent_depth_d{d}")])
        .collect();
    expected.extend(labels.iter().map(|l| (l.as_str(), 100)));
    suite_check(&rep, &expected)
}

fn criterion_8() -> Outcome {
    let rep = suite(Suite::Theorem3, 500);
    // 3 (d,k) pairs x 3 alphas x 20 states
    suite_check(
        &rep,
        &[
            ("T3_S", 180),
            ("T3_Sfrak", 180),
            ("T3_E", 180),
            ("T3_Efrak", 180),
            ("T3_witness_feasible", 180),
        ],
    )
}

fn criterion_9() -> Outcome {
    let a = suite(Suite::All, 20).to_csv().unwrap();
    let b = suite(Suite::All, 20).to_csv().unwrap();
    check(a == b, format!("{} bytes, identical: {}", a.len(), a == b))
}

/// Name, runtime budget in seconds where one is stated, check.
type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 closed-form oracle agreement", Some(60), criterion_1),
        ("2 anchor values", None, criterion_2),
        ("3 affinity property suite", Some(180), criterion_3),
        ("4 certificate suite (appendix-b)", Some(120), criterion_4),
        ("5 coherence suite (theorem1)", None, criterion_5),
        ("6 correlation suite (theorem2)", Some(600), criterion_6),
        ("7 embedding correspondence", None, criterion_7),
        ("8 embedding inequalities (theorem3)", Some(600), criterion_8),
        ("9 determinism", None, criterion_9),
    ];
    let start = Instant::now();
    let mut all_ok = true;
    for (name, budget, f) in criteria {
        let t = Instant::now();
        let out = f();
        let el = t.elapsed();
        all_ok &= out.ok;
        println!(
            "{} criterion {name}: {} [{:.1}s{}]",
            if out.ok { "PASS" } else { "FAIL" },
            out.detail,
            el.as_secs_f64(),
            budget.map(|b| format!(", budget {b}s")).unwrap_or_default()
        );
    }
    println!("acceptance total {:.1}s", start.elapsed().as_secs_f64());
    if !all_ok {
        std::process::exit(1);
    }
}
