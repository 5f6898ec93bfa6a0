use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use resource_kit::embedding::{theorem3_check, DepthRow, EmbeddingMap, Theorem3Report};
use resource_kit::indicators::{indicator_suite, IndicatorSpec};
use resource_kit::io::load_state;
use resource_kit::verify::{run_suite, VerifyOptions, INEQ_TOL};
use resource_kit::{alpha_affinity, DensityMatrix, Ensemble};
use serde::Serialize;

use crate::{Command, Common, Format};

/// Runs one command; `Ok(false)` means a check failed.
pub fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Affinity { rho, sigma, common } => affinity(&rho, &sigma, &common),
        Command::Indicator {
            state,
            labels,
            ks,
            common,
            optimizer,
        } => {
            let rho = load(&state)?;
            let specs: Vec<IndicatorSpec> = labels
                .iter()
                .flat_map(|&kind| ks.iter().map(move |&k| IndicatorSpec { kind, k }))
                .collect();
            let report = indicator_suite(&rho, &common.alphas, &specs, &optimizer.options(common.seed));
            let text = match common.format {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json() + "\n",
            };
            emit(&common, &text)?;
            if let Some((spec, alpha, e)) = report.errors.first() {
                bail!("{}^{} at alpha {alpha}: {e}", spec.kind.label(), spec.k);
            }
            Ok(true)
        }
        Command::Verify {
            suite,
            n_samples,
            corrupt_certificate,
            common,
        } => {
            let opts = VerifyOptions {
                seed: common.seed,
                n_samples,
                corrupt: corrupt_certificate,
            };
            let report = run_suite(suite, &opts)?;
            let text = match common.format {
                Format::Csv => report.to_csv()?,
                Format::Json => {
                    serde_json::to_string_pretty(&serde_json::json!({
                        "records": report.records,
                        "summary": report.summary(),
                        "warnings": report.warnings,
                    }))? + "\n"
                }
            };
            emit(&common, &text)?;
            eprint!("{}", report.summary_text());
            eprintln!("{}", if report.passed() { "all checks passed" } else { "verification FAILED" });
            Ok(report.passed())
        }
        Command::Embed {
            state,
            ks,
            common,
            optimizer,
        } => embed(&load(&state)?, ks, &common, &optimizer.options(common.seed)),
    }
}

fn load(path: &Path) -> Result<DensityMatrix> {
    load_state(path).with_context(|| format!("loading {}", path.display()))
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

#[derive(Serialize)]
struct AffinityRow {
    alpha: f64,
    affinity: f64,
}

fn affinity(rho: &Path, sigma: &Path, common: &Common) -> Result<bool> {
    let (rho, sigma) = (load(rho)?, load(sigma)?);
    let rows = common
        .alphas
        .iter()
        .map(|&alpha| {
            Ok(AffinityRow {
                alpha,
                affinity: alpha_affinity(&rho, &sigma, alpha)?.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let text = match common.format {
        Format::Csv => {
            let mut s = String::from("alpha,affinity\n");
            for r in &rows {
                s.push_str(&format!("{:?},{:?}\n", r.alpha, r.affinity));
            }
            s
        }
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
    };
    emit(common, &text)?;
    Ok(true)
}

#[derive(Serialize)]
struct ComponentDepth {
    component: usize,
    weight: f64,
    #[serde(flatten)]
    row: DepthRow,
}

fn embed(rho: &DensityMatrix, ks: Vec<usize>, common: &Common, opts: &resource_kit::OptimizerOptions) -> Result<bool> {
    if rho.dims().len() != 1 {
        bail!("embedding takes a single qudit, got dims {:?}", rho.dims());
    }
    let d = rho.dim();
    let map = EmbeddingMap::build(d)?;
    let depths = Ensemble::from_spectrum(rho)
        .terms()
        .iter()
        .enumerate()
        .map(|(component, (weight, psi))| {
            Ok(ComponentDepth {
                component,
                weight: *weight,
                row: map.depth_correspondence_pure(psi)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let explicit = !ks.is_empty();
    let ks = if explicit { ks } else { (2..=d).collect() };
    let mut reports: Vec<Theorem3Report> = Vec::new();
    if d > 3 && !explicit {
        eprintln!("note: coherence/correlation reports need d <= 3; printing depths only");
    } else {
        for &k in &ks {
            for &alpha in &common.alphas {
                reports.push(theorem3_check(rho, k, alpha, opts)?);
            }
        }
    }

    let text = match common.format {
        Format::Csv => {
            let mut s = String::from("k,alpha,lhs_label,rhs_label,lhs,rhs,slack,injected,witness_feasible\n");
            for r in &reports {
                for q in &r.inequalities {
                    s.push_str(&format!(
                        "{},{:?},{},{},{:?},{:?},{:?},{:?},{}\n",
                        r.k, r.alpha, q.lhs_label, q.rhs_label, q.lhs, q.rhs, q.slack, q.injected, q.witness_feasible
                    ));
                }
            }
            s.push_str("\ncomponent,weight,rank,sep_depth,ent_depth,expected_sep,expected_ent\n");
            for c in &depths {
                let r = &c.row;
                s.push_str(&format!(
                    "{},{:?},{},{},{},{},{}\n",
                    c.component, c.weight, r.rank, r.sep_depth, r.ent_depth, r.expected_sep, r.expected_ent
                ));
            }
            s
        }
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({
            "d": d,
            "reports": reports,
            "depths": depths,
        }))? + "\n",
    };
    emit(common, &text)?;
    let ok = reports.iter().all(|r| r.min_slack() >= -INEQ_TOL) && depths.iter().all(|c| c.row.holds());
    Ok(ok)
}
