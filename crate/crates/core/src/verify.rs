//! Batch verification suites.
//!
//! Every check produces [`Record`]s holding both sides of a claim and the signed
//! slack. Instances are generated from `(seed, property, index)` alone, run in
//! parallel and collected in index order, so reports are byte-identical across
//! runs and thread counts.
//!
//! Checks that compare optimized indicator values are constructive: the witness
//! found for one side is mapped and injected into the other side's search, which
//! makes the inequality hold for the reported bounds themselves.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::affinity::{
    affinity_psd, alpha_affinity, block_diagonal_affinity, data_processing_sum, holder_negative_exponent_bound,
    power_mean_bound, selective_loss_bound, selective_power_sum, Claim, InequalityCertificate,
};
use crate::channels::KrausChannel;
use crate::embedding::{theorem3_check, EmbeddingMap};
use crate::error::{Error, Result};
use crate::family::{FamilyKind, FeasibleFamily};
use crate::indicators::{closed_form_k2, indicator, IndicatorKind, IndicatorSpec, OptimizerOptions};
use crate::linalg::{kron, max_abs_diff, CMatrix, CVector, C64};
use crate::optimize::thread_pool;
use crate::random::{haar_unitary, random_mixed_with, random_simplex, rng_from_seed, substream, SeededRng};
use crate::state::{DensityMatrix, Ensemble, PureState};

/// Default tolerance for inequalities.
pub const INEQ_TOL: f64 = 1e-8;
/// Tolerance for the closed-form theorem checks.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    AffinityProps,
    AppendixB,
    Theorem1,
    Theorem2,
    Embedding,
    Theorem3,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [
        Suite::AffinityProps,
        Suite::AppendixB,
        Suite::Theorem1,
        Suite::Theorem2,
        Suite::Embedding,
        Suite::Theorem3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::AffinityProps => "affinity-props",
            Suite::AppendixB => "appendix-b",
            Suite::Theorem1 => "theorem1",
            Suite::Theorem2 => "theorem2",
            Suite::Embedding => "embedding",
            Suite::Theorem3 => "theorem3",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub n_samples: usize,
    /// Appends a certificate with negative slack; exercises the failure path.
    pub corrupt: bool,
}

impl VerifyOptions {
    pub fn new(seed: u64, n_samples: usize) -> Self {
        Self {
            seed,
            n_samples,
            corrupt: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub label: String,
    pub seed: u64,
    pub alpha: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    #[serde(skip)]
    pub claim: Claim,
    #[serde(skip)]
    pub tol: f64,
}

impl Record {
    fn at_most(label: &str, seed: u64, alpha: f64, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            label: label.to_string(),
            seed,
            alpha,
            lhs,
            rhs,
            slack: rhs - lhs,
            claim: Claim::AtMost,
            tol,
        }
    }

    fn equal(label: &str, seed: u64, alpha: f64, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            claim: Claim::Equal,
            ..Self::at_most(label, seed, alpha, lhs, rhs, tol)
        }
    }

    fn from_cert(label: &str, seed: u64, alpha: f64, c: &InequalityCertificate, tol: f64) -> Self {
        Self {
            claim: c.claim,
            ..Self::at_most(label, seed, alpha, c.lhs, c.rhs, tol)
        }
    }

    pub fn holds(&self) -> bool {
        match self.claim {
            Claim::AtMost => self.slack >= -self.tol,
            Claim::Equal => self.slack.abs() <= self.tol,
        }
    }

    /// Slack in the direction that matters: `slack` for inequalities,
    /// `-|slack|` for equalities.
    pub fn margin(&self) -> f64 {
        match self.claim {
            Claim::AtMost => self.slack,
            Claim::Equal => -self.slack.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertySummary {
    pub label: String,
    pub count: usize,
    pub failures: usize,
    pub min_margin: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub records: Vec<Record>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(Record::holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.holds())
    }

    /// One entry per label, in order of first appearance.
    pub fn summary(&self) -> Vec<PropertySummary> {
        let mut out: Vec<PropertySummary> = Vec::new();
        for r in &self.records {
            let idx = match out.iter().position(|s| s.label == r.label) {
                Some(i) => i,
                None => {
                    out.push(PropertySummary {
                        label: r.label.clone(),
                        count: 0,
                        failures: 0,
                        min_margin: f64::INFINITY,
                        tol: r.tol,
                    });
                    out.len() - 1
                }
            };
            let s = &mut out[idx];
            s.count += 1;
            if !r.holds() {
                s.failures += 1;
            }
            let m = r.margin();
            s.min_margin = if m.is_nan() { f64::NAN } else { s.min_margin.min(m) };
        }
        out
    }

    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        for s in self.summary() {
            out.push_str(&format!(
                "{:<4} {:<28} n={:<5} min_slack={:<12.3e} tol={:.0e}\n",
                if s.failures == 0 { "ok" } else { "FAIL" },
                s.label,
                s.count,
                s.min_margin,
                s.tol
            ));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }

    /// `label,seed,alpha,lhs,rhs,slack`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.records.is_empty() {
            w.write_record(["label", "seed", "alpha", "lhs", "rhs", "slack"])?;
        }
        for r in &self.records {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    fn extend(&mut self, other: VerifyReport) {
        self.records.extend(other.records);
        self.warnings.extend(other.warnings);
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    if opts.n_samples == 0 {
        report
            .warnings
            .push("n_samples = 0: no instances generated, the suite passes vacuously".into());
    } else {
        let suites: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
        for s in suites {
            let part = match s {
                Suite::AffinityProps => affinity_props(opts),
                Suite::AppendixB => appendix_b(opts),
                Suite::Theorem1 => theorem1(opts),
                Suite::Theorem2 => theorem2(opts),
                Suite::Embedding => embedding(opts),
                Suite::Theorem3 => theorem3(opts),
                Suite::All => unreachable!(),
            };
            report.extend(part);
        }
    }
    if opts.corrupt {
        report
            .records
            .push(Record::at_most("corrupted_certificate", opts.seed, 0.5, 1.0, 0.0, INEQ_TOL));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// instance plumbing

fn instance_seed(seed: u64, property: &str, index: usize) -> u64 {
    let tag = property
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    substream(seed ^ tag, index as u64).random()
}

/// Runs `count` instances of `property` in parallel; errors become failing records.
fn run<F>(report: &mut VerifyReport, opts: &VerifyOptions, property: &str, count: usize, f: &F)
where
    F: Fn(&mut SeededRng, u64) -> Result<Vec<Record>> + Sync,
{
    let results: Vec<(u64, Result<Vec<Record>>)> = thread_pool().install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let s = instance_seed(opts.seed, property, i);
                (s, f(&mut rng_from_seed(s), s))
            })
            .collect()
    });
    for (s, r) in results {
        match r {
            Ok(recs) => report.records.extend(recs),
            Err(e) => {
                report.warnings.push(format!("{property} seed {s}: {e}"));
                report.records.push(Record::at_most(
                    &format!("{property}_error"),
                    s,
                    f64::NAN,
                    f64::NAN,
                    f64::NAN,
                    INEQ_TOL,
                ));
            }
        }
    }
}

fn constructive_count(n: usize) -> usize {
    n.div_ceil(10)
}

fn random_alpha(rng: &mut SeededRng) -> f64 {
    rng.random_range(0.05..0.95)
}

fn random_state(dims: &[usize], rng: &mut SeededRng) -> Result<DensityMatrix> {
    let d: usize = dims.iter().product();
    let rank = rng.random_range(1..=d);
    random_mixed_with(dims, rank, rng)
}

fn random_qudit(rng: &mut SeededRng, dmax: usize) -> Result<DensityMatrix> {
    let d = rng.random_range(2..=dmax);
    random_state(&[d], rng)
}

fn random_channel(d: usize, rng: &mut SeededRng) -> Result<KrausChannel> {
    let outcomes = rng.random_range(1..=3);
    KrausChannel::random_general(vec![d], outcomes, rng)
}

/// Two-outcome projective measurement in a random basis.
fn random_projective(d: usize, rng: &mut SeededRng) -> Result<KrausChannel> {
    let u = haar_unitary(d, rng);
    let cut = rng.random_range(1..d);
    let proj = |cols: std::ops::Range<usize>| {
        let mut p = CMatrix::zeros(d, d);
        for j in cols {
            let v = u.column(j);
            p += v * v.adjoint();
        }
        p
    };
    KrausChannel::new(vec![proj(0..cut), proj(cut..d)], vec![d])
}

fn local_unitary(dims: &[usize], rng: &mut SeededRng) -> CMatrix {
    dims.iter()
        .fold(CMatrix::identity(1, 1), |acc, &d| kron(&acc, &haar_unitary(d, rng)))
}

/// Small search budget for constructive checks; the injected witnesses carry the claim.
fn light_opts(seed: u64, components: Option<usize>) -> OptimizerOptions {
    OptimizerOptions {
        restarts: 2,
        max_iter: 150,
        tol: 1e-10,
        seed,
        components,
        init_witnesses: Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// affinity properties

fn affinity_props(opts: &VerifyOptions) -> VerifyReport {
    let n = opts.n_samples;
    let mut rep = VerifyReport::default();
    run(&mut rep, opts, "A1_bounds", n, &|rng, s| {
        let rho = random_qudit(rng, 4)?;
        let sigma = random_state(rho.dims(), rng)?;
        let alpha = random_alpha(rng);
        let raw = affinity_psd(rho.matrix(), sigma.matrix(), alpha);
        Ok(vec![
            Record::at_most("A1_lower", s, alpha, 0.0, raw, 1e-10),
            Record::at_most("A1_upper", s, alpha, raw, 1.0, 1e-10),
        ])
    });
    run(&mut rep, opts, "A1_self", n, &|rng, s| {
        let rho = random_qudit(rng, 4)?;
        let alpha = random_alpha(rng);
        let a = alpha_affinity(&rho, &rho, alpha)?.value;
        Ok(vec![Record::equal("A1_self", s, alpha, a, 1.0, 1e-10)])
    });
    run(&mut rep, opts, "A1_separation", n, &|rng, s| {
        let rho = random_qudit(rng, 4)?;
        let other = random_state(rho.dims(), rng)?;
        // half far pairs, half perturbations of size 0.02..0.2
        let sigma = if rng.random_bool(0.5) {
            other
        } else {
            let eps = rng.random_range(0.02..0.2);
            DensityMatrix::mixture(&[(1.0 - eps, &rho), (eps, &other)])?
        };
        let alpha = random_alpha(rng);
        if rho.trace_distance(&sigma)? <= 1e-3 {
            return Ok(Vec::new());
        }
        let a = alpha_affinity(&rho, &sigma, alpha)?.value;
        Ok(vec![Record::at_most("A1_separation", s, alpha, a, 1.0 - 1e-6, 0.0)])
    });
    run(&mut rep, opts, "A2_unitary", n, &|rng, s| {
        let rho = random_qudit(rng, 4)?;
        let sigma = random_state(rho.dims(), rng)?;
        let alpha = random_alpha(rng);
        let u = haar_unitary(rho.dim(), rng);
        let a = alpha_affinity(&rho, &sigma, alpha)?.value;
        let b = alpha_affinity(&rho.conjugate(&u)?, &sigma.conjugate(&u)?, alpha)?.value;
        Ok(vec![Record::equal("A2_unitary", s, alpha, b, a, 1e-9)])
    });
    run(&mut rep, opts, "A3_tensor", n, &|rng, s| {
        let r1 = random_state(&[2], rng)?;
        let r2 = random_state(&[2], rng)?;
        let s1 = random_state(&[2], rng)?;
        let s2 = random_state(&[2], rng)?;
        let alpha = random_alpha(rng);
        let lhs = alpha_affinity(&r1.tensor(&r2), &s1.tensor(&s2), alpha)?.value;
        let rhs = alpha_affinity(&r1, &s1, alpha)?.value * alpha_affinity(&r2, &s2, alpha)?.value;
        Ok(vec![Record::equal("A3_tensor", s, alpha, lhs, rhs, 1e-9)])
    });
    run(&mut rep, opts, "A4_concavity", n, &|rng, s| {
        let d = rng.random_range(2..=4);
        let m = rng.random_range(2..=3);
        let lam = random_simplex(m, rng);
        let alpha = random_alpha(rng);
        let rhos = (0..m).map(|_| random_state(&[d], rng)).collect::<Result<Vec<_>>>()?;
        let sigmas = (0..m).map(|_| random_state(&[d], rng)).collect::<Result<Vec<_>>>()?;
        let mut lhs = 0.0;
        for i in 0..m {
            lhs += lam[i] * alpha_affinity(&rhos[i], &sigmas[i], alpha)?.value;
        }
        let mr: Vec<(f64, &DensityMatrix)> = lam.iter().copied().zip(&rhos).collect();
        let ms: Vec<(f64, &DensityMatrix)> = lam.iter().copied().zip(&sigmas).collect();
        let rhs = alpha_affinity(&DensityMatrix::mixture(&mr)?, &DensityMatrix::mixture(&ms)?, alpha)?.value;
        Ok(vec![Record::at_most("A4_concavity", s, alpha, lhs, rhs, INEQ_TOL)])
    });
    run(&mut rep, opts, "A5_data_processing", n, &|rng, s| {
        let rho = random_qudit(rng, 4)?;
        let sigma = random_state(rho.dims(), rng)?;
        let ch = random_channel(rho.dim(), rng)?;
        let alpha = random_alpha(rng);
        let lhs = alpha_affinity(&rho, &sigma, alpha)?.value;
        let rhs = alpha_affinity(&ch.apply(&rho)?, &ch.apply(&sigma)?, alpha)?.value;
        Ok(vec![Record::at_most("A5_data_processing", s, alpha, lhs, rhs, INEQ_TOL)])
    });
    run(&mut rep, opts, "A6_selective_loss", n, &|rng, s| {
        let rho = random_qudit(rng, 4)?;
        let sigma = random_state(rho.dims(), rng)?;
        let ch = random_channel(rho.dim(), rng)?;
        let alpha = random_alpha(rng);
        let c = selective_loss_bound(&rho, &sigma, &ch, alpha)?;
        Ok(vec![Record::from_cert("A6_selective_loss", s, alpha, &c, INEQ_TOL)])
    });
    rep
}

// ---------------------------------------------------------------------------
// inequality certificates

fn appendix_b(opts: &VerifyOptions) -> VerifyReport {
    let n = opts.n_samples;
    let mut rep = VerifyReport::default();
    run(&mut rep, opts, "B1_lemma", n, &|rng, s| {
        let len = rng.random_range(1..=8);
        let a: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..10.0)).collect();
        let b: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..10.0)).collect();
        let p = rng.random_range(0.1..5.0);
        let q = -rng.random_range(0.1..5.0);
        let c = holder_negative_exponent_bound(&a, &b, p, q)?;
        Ok(vec![Record::from_cert("B1_lemma", s, f64::NAN, &c, INEQ_TOL)])
    });
    run(&mut rep, opts, "B1_power_mean", n, &|rng, s| {
        let len = rng.random_range(1..=8);
        let x: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..2.0)).collect();
        let mut q = random_simplex(len, rng);
        if q.iter().any(|&w| w <= 0.0) {
            q = vec![1.0 / len as f64; len];
        }
        let total: f64 = q.iter().sum();
        q.iter_mut().for_each(|w| *w /= total);
        let t = rng.random_range(1.01..4.0);
        let c = power_mean_bound(&x, &q, t)?;
        Ok(vec![Record::from_cert("B1_power_mean", s, f64::NAN, &c, INEQ_TOL)])
    });
    let channel_pair = |rng: &mut SeededRng, dmax: usize| -> Result<(DensityMatrix, DensityMatrix, KrausChannel, f64)> {
        let rho = random_qudit(rng, dmax)?;
        let sigma = random_state(rho.dims(), rng)?;
        let ch = if rng.random_bool(0.5) {
            random_projective(rho.dim(), rng)?
        } else {
            random_channel(rho.dim(), rng)?
        };
        Ok((rho, sigma, ch, random_alpha(rng)))
    };
    run(&mut rep, opts, "B2_selective_power_sum", n, &|rng, s| {
        let (rho, sigma, ch, alpha) = channel_pair(rng, 4)?;
        let c = selective_power_sum(&rho, &sigma, &ch, alpha)?;
        Ok(vec![Record::from_cert("B2_selective_power_sum", s, alpha, &c, INEQ_TOL)])
    });
    run(&mut rep, opts, "B3_block_diagonal", n, &|rng, s| {
        let (rho, sigma, ch, alpha) = channel_pair(rng, 3)?;
        let c = block_diagonal_affinity(&rho, &sigma, &ch, alpha)?;
        Ok(vec![Record::from_cert("B3_block_diagonal", s, alpha, &c, 1e-9)])
    });
    run(&mut rep, opts, "B4_data_processing_sum", n, &|rng, s| {
        let (rho, sigma, ch, alpha) = channel_pair(rng, 4)?;
        let c = data_processing_sum(&rho, &sigma, &ch, alpha)?;
        Ok(vec![Record::from_cert("B4_data_processing_sum", s, alpha, &c, INEQ_TOL)])
    });
    run(&mut rep, opts, "B5_selective_loss", n, &|rng, s| {
        let (rho, sigma, ch, alpha) = channel_pair(rng, 4)?;
        let c = selective_loss_bound(&rho, &sigma, &ch, alpha)?;
        Ok(vec![Record::from_cert("B5_selective_loss", s, alpha, &c, INEQ_TOL)])
    });
    rep
}

// ---------------------------------------------------------------------------
// coherence indicators

fn theorem1(opts: &VerifyOptions) -> VerifyReport {
    let n = opts.n_samples;
    let m = constructive_count(n);
    let mut rep = VerifyReport::default();

    run(&mut rep, opts, "T1_P2_convexity_k2", n, &|rng, s| {
        let d = rng.random_range(2..=4);
        let parts = rng.random_range(2..=3);
        let lam = random_simplex(parts, rng);
        let alpha = random_alpha(rng);
        let rhos = (0..parts).map(|_| random_state(&[d], rng)).collect::<Result<Vec<_>>>()?;
        let mut rhs = 0.0;
        for (l, r) in lam.iter().zip(&rhos) {
            rhs += l * closed_form_k2(r, alpha)?.c;
        }
        let mix: Vec<(f64, &DensityMatrix)> = lam.iter().copied().zip(&rhos).collect();
        let lhs = closed_form_k2(&DensityMatrix::mixture(&mix)?, alpha)?.c;
        Ok(vec![Record::at_most("T1_P2_convexity_k2", s, alpha, lhs, rhs, EXACT_TOL)])
    });
    run(&mut rep, opts, "T1_P4_monotonicity_k2", n, &|rng, s| {
        let rho = random_qudit(rng, 4)?;
        let outcomes = rng.random_range(1..=3);
        let ch = KrausChannel::make_monomial_incoherent_with(rho.dim(), outcomes, rng)?;
        let alpha = random_alpha(rng);
        let lhs = closed_form_k2(&ch.apply(&rho)?, alpha)?.c;
        let rhs = closed_form_k2(&rho, alpha)?.c;
        Ok(vec![Record::at_most("T1_P4_monotonicity_k2", s, alpha, lhs, rhs, EXACT_TOL)])
    });
    run(&mut rep, opts, "T1_P3_average_k2", n, &|rng, s| {
        let rho = random_qudit(rng, 4)?;
        let outcomes = rng.random_range(1..=3);
        let ch = KrausChannel::make_monomial_incoherent_with(rho.dim(), outcomes, rng)?;
        let alpha = random_alpha(rng);
        let mut lhs = 0.0;
        for o in ch.selective_apply(&rho)? {
            lhs += o.probability * closed_form_k2(&o.state, alpha)?.c_frak;
        }
        let rhs = closed_form_k2(&rho, alpha)?.c_frak;
        Ok(vec![Record::at_most("T1_P3_average_k2", s, alpha, lhs, rhs, INEQ_TOL)])
    });
    run(&mut rep, opts, "T1_P5_subadditivity_k2", n, &|rng, s| {
        let r1 = random_qudit(rng, 3)?;
        let r2 = random_qudit(rng, 3)?;
        let alpha = random_alpha(rng);
        let c1 = closed_form_k2(&r1, alpha)?;
        let c2 = closed_form_k2(&r2, alpha)?;
        let c12 = closed_form_k2(&r1.tensor(&r2), alpha)?;
        Ok(vec![
            Record::at_most("T1_P5_subadditivity_k2", s, alpha, c12.c, c1.c + c2.c, EXACT_TOL),
            Record::at_most("T1_P5_subadditivity_frak_k2", s, alpha, c12.c_frak, c1.c_frak + c2.c_frak, EXACT_TOL),
        ])
    });

    // constructive checks at k = 3 on qutrits
    let c3 = |rho: &DensityMatrix, kind: IndicatorKind, alpha: f64, o: &OptimizerOptions| {
        indicator(rho, IndicatorSpec { kind, k: 3 }, alpha, o)
    };
    run(&mut rep, opts, "T1_P1_zero_k3", m, &|rng, s| {
        let fam = FeasibleFamily::build(FamilyKind::Multilevel(2), &[3], None)?;
        let theta: Vec<f64> = (0..fam.param_len()).map(|_| rng.sample(StandardNormal)).collect();
        let member = fam.decode_ensemble(&theta)?;
        let alpha = random_alpha(rng);
        let r = c3(&member.to_density(), IndicatorKind::C, alpha, &light_opts(s, None).with_witness(member))?;
        Ok(vec![Record::at_most("T1_P1_zero_k3", s, alpha, r.value, 0.0, INEQ_TOL)])
    });
    run(&mut rep, opts, "T1_P2_convexity_k3", m, &|rng, s| {
        let r1 = random_state(&[3], rng)?;
        let r2 = random_state(&[3], rng)?;
        let p = rng.random_range(0.05..0.95);
        let alpha = random_alpha(rng);
        let o = light_opts(s, None);
        let a = c3(&r1, IndicatorKind::C, alpha, &o)?;
        let b = c3(&r2, IndicatorKind::C, alpha, &o)?;
        let w = Ensemble::mixture(&[(p, &a.witness_ensemble), (1.0 - p, &b.witness_ensemble)])?;
        let mix = DensityMatrix::mixture(&[(p, &r1), (1.0 - p, &r2)])?;
        let r = c3(&mix, IndicatorKind::C, alpha, &o.clone().with_witness(w))?;
        let rhs = p * a.value + (1.0 - p) * b.value;
        Ok(vec![Record::at_most("T1_P2_convexity_k3", s, alpha, r.value, rhs, INEQ_TOL)])
    });
    run(&mut rep, opts, "T1_P4_monotonicity_k3", m, &|rng, s| {
        let rho = random_state(&[3], rng)?;
        let outcomes = rng.random_range(1..=3);
        let ch = KrausChannel::make_monomial_incoherent_with(3, outcomes, rng)?;
        let alpha = random_alpha(rng);
        let o = light_opts(s, None);
        let before = c3(&rho, IndicatorKind::C, alpha, &o)?;
        let w = ch.apply_ensemble(&before.witness_ensemble)?;
        let after = c3(&ch.apply(&rho)?, IndicatorKind::C, alpha, &o.clone().with_witness(w))?;
        Ok(vec![Record::at_most("T1_P4_monotonicity_k3", s, alpha, after.value, before.value, INEQ_TOL)])
    });
    run(&mut rep, opts, "T1_P3_average_k3", m, &|rng, s| {
        let rho = random_state(&[3], rng)?;
        let outcomes = rng.random_range(2..=3);
        let ch = KrausChannel::make_monomial_incoherent_with(3, outcomes, rng)?;
        let alpha = random_alpha(rng);
        let o = light_opts(s, None);
        let before = c3(&rho, IndicatorKind::Cfrak, alpha, &o)?;
        let mut lhs = 0.0;
        for out in ch.selective_apply(&rho)? {
            let mut oi = o.clone();
            if let Some((_, w)) = ch.selective_apply_ensemble(out.index, &before.witness_ensemble)? {
                oi = oi.with_witness(w);
            }
            lhs += out.probability * c3(&out.state, IndicatorKind::Cfrak, alpha, &oi)?.value;
        }
        Ok(vec![Record::at_most("T1_P3_average_k3", s, alpha, lhs, before.value, INEQ_TOL)])
    });
    run(&mut rep, opts, "T1_P5_subadditivity_k3", m, &|rng, s| {
        let r1 = random_state(&[3], rng)?;
        let r2 = random_state(&[3], rng)?;
        let alpha = random_alpha(rng);
        let o = light_opts(s, None);
        let a = c3(&r1, IndicatorKind::Cfrak, alpha, &o)?;
        let b = c3(&r2, IndicatorKind::Cfrak, alpha, &o)?;
        let w = a.witness_ensemble.tensor(&b.witness_ensemble);
        // (k-1)^2 + 1 = 5 for k = 3, m = 2
        let joint = indicator(
            &r1.tensor(&r2),
            IndicatorSpec { kind: IndicatorKind::Cfrak, k: 5 },
            alpha,
            &light_opts(s, Some(4)).with_witness(w),
        )?;
        Ok(vec![Record::at_most(
            "T1_P5_subadditivity_k3",
            s,
            alpha,
            joint.value,
            a.value + b.value,
            INEQ_TOL,
        )])
    });
    rep
}

// ---------------------------------------------------------------------------
// correlation indicators

/// A correlation indicator with a valid order for `n` subsystems.
fn random_corr_spec(rng: &mut SeededRng, n: usize, fraktur: bool) -> IndicatorSpec {
    let sep = rng.random_bool(0.5);
    let kind = match (sep, fraktur) {
        (true, false) => IndicatorKind::S,
        (true, true) => IndicatorKind::Sfrak,
        (false, false) => IndicatorKind::E,
        (false, true) => IndicatorKind::Efrak,
    };
    let k = if sep { rng.random_range(1..=n) } else { rng.random_range(2..=n + 1) };
    IndicatorSpec { kind, k }
}

fn label(prefix: &str, spec: IndicatorSpec) -> String {
    format!("{prefix}_{}", spec.kind.label())
}

fn theorem2(opts: &VerifyOptions) -> VerifyReport {
    let m = constructive_count(opts.n_samples);
    let mut rep = VerifyReport::default();
    let qubits = |rng: &mut SeededRng| vec![2; rng.random_range(2..=3)];

    run(&mut rep, opts, "T2_P1_zero", m, &|rng, s| {
        let dims = qubits(rng);
        let fraktur = rng.random_bool(0.5);
        let spec = random_corr_spec(rng, dims.len(), fraktur);
        let fam = FeasibleFamily::build(spec.kind.family_kind(spec.k, &dims)?, &dims, Some(4))?;
        let theta: Vec<f64> = (0..fam.param_len()).map(|_| rng.sample(StandardNormal)).collect();
        let member = fam.decode_ensemble(&theta)?;
        let alpha = random_alpha(rng);
        let r = indicator(&member.to_density(), spec, alpha, &light_opts(s, Some(4)).with_witness(member))?;
        Ok(vec![Record::at_most(&label("T2_P1_zero", spec), s, alpha, r.value, 0.0, INEQ_TOL)])
    });
    run(&mut rep, opts, "T2_P2_local_unitary", m, &|rng, s| {
        let dims = qubits(rng);
        let spec = random_corr_spec(rng, dims.len(), false);
        let rho = random_state(&dims, rng)?;
        let alpha = random_alpha(rng);
        let u = local_unitary(&dims, rng);
        let o = light_opts(s, Some(4));
        let r1 = indicator(&rho, spec, alpha, &o)?;
        let rho_u = rho.conjugate(&u)?;
        let w_u = r1.witness_ensemble.conjugate(&u)?;
        let a1 = alpha_affinity(&rho, &r1.witness, alpha)?.value;
        let a2 = alpha_affinity(&rho_u, &w_u.to_density(), alpha)?.value;
        let r2 = indicator(&rho_u, spec, alpha, &o.clone().with_witness(w_u))?;
        let back = r2.witness_ensemble.conjugate(&u.adjoint())?;
        let r3 = indicator(&rho, spec, alpha, &o.clone().with_witness(back))?;
        Ok(vec![
            Record::equal(&label("T2_P2_affinity", spec), s, alpha, a2, a1, 1e-9),
            Record::at_most(&label("T2_P2_forward", spec), s, alpha, r2.value, r1.value, INEQ_TOL),
            Record::at_most(&label("T2_P2_backward", spec), s, alpha, r3.value, r2.value, INEQ_TOL),
        ])
    });
    run(&mut rep, opts, "T2_P3_convexity", m, &|rng, s| {
        let dims = qubits(rng);
        let spec = random_corr_spec(rng, dims.len(), false);
        let r1 = random_state(&dims, rng)?;
        let r2 = random_state(&dims, rng)?;
        let p = rng.random_range(0.05..0.95);
        let alpha = random_alpha(rng);
        let o = light_opts(s, Some(4));
        let a = indicator(&r1, spec, alpha, &o)?;
        let b = indicator(&r2, spec, alpha, &o)?;
        let w = Ensemble::mixture(&[(p, &a.witness_ensemble), (1.0 - p, &b.witness_ensemble)])?;
        let mix = DensityMatrix::mixture(&[(p, &r1), (1.0 - p, &r2)])?;
        let r = indicator(&mix, spec, alpha, &o.clone().with_witness(w))?;
        let rhs = p * a.value + (1.0 - p) * b.value;
        Ok(vec![Record::at_most(&label("T2_P3_convexity", spec), s, alpha, r.value, rhs, INEQ_TOL)])
    });
    let local_channel = |dims: &[usize], rng: &mut SeededRng| -> Result<KrausChannel> {
        let sites = dims
            .iter()
            .map(|&d| {
                let outcomes = rng.random_range(1..=2);
                KrausChannel::random_general(vec![d], outcomes, rng)
            })
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::make_local_product(&sites)
    };
    run(&mut rep, opts, "T2_P4_locc", m, &|rng, s| {
        let dims = qubits(rng);
        let spec = random_corr_spec(rng, dims.len(), false);
        let rho = random_state(&dims, rng)?;
        let ch = local_channel(&dims, rng)?;
        let alpha = random_alpha(rng);
        let o = light_opts(s, Some(4));
        let before = indicator(&rho, spec, alpha, &o)?;
        let w = ch.apply_ensemble(&before.witness_ensemble)?;
        let after = indicator(&ch.apply(&rho)?, spec, alpha, &o.clone().with_witness(w))?;
        Ok(vec![Record::at_most(&label("T2_P4_locc", spec), s, alpha, after.value, before.value, INEQ_TOL)])
    });
    run(&mut rep, opts, "T2_P5_selective_locc", m, &|rng, s| {
        let dims = qubits(rng);
        let spec = random_corr_spec(rng, dims.len(), true);
        let rho = random_state(&dims, rng)?;
        let ch = local_channel(&dims, rng)?;
        let alpha = random_alpha(rng);
        let o = light_opts(s, Some(4));
        let before = indicator(&rho, spec, alpha, &o)?;
        let mut lhs = 0.0;
        for out in ch.selective_apply(&rho)? {
            let mut oi = o.clone();
            if let Some((_, w)) = ch.selective_apply_ensemble(out.index, &before.witness_ensemble)? {
                oi = oi.with_witness(w);
            }
            lhs += out.probability * indicator(&out.state, spec, alpha, &oi)?.value;
        }
        Ok(vec![Record::at_most(&label("T2_P5_selective_locc", spec), s, alpha, lhs, before.value, INEQ_TOL)])
    });
    run(&mut rep, opts, "T2_P6_subadditivity", m, &|rng, s| {
        let fraktur = rng.random_bool(0.5);
        let a_spec = random_corr_spec(rng, 2, fraktur);
        let sep = matches!(a_spec.kind, IndicatorKind::S | IndicatorKind::Sfrak);
        let k2 = if sep { rng.random_range(1..=2) } else { rng.random_range(2..=3) };
        let b_spec = IndicatorSpec { kind: a_spec.kind, k: k2 };
        let joint_k = if sep { a_spec.k + k2 } else { a_spec.k.max(k2) };
        let joint_spec = IndicatorSpec { kind: a_spec.kind, k: joint_k };
        let r1 = random_state(&[2, 2], rng)?;
        let r2 = random_state(&[2, 2], rng)?;
        let alpha = random_alpha(rng);
        let o = light_opts(s, Some(4));
        let a = indicator(&r1, a_spec, alpha, &o)?;
        let b = indicator(&r2, b_spec, alpha, &o)?;
        let w = a.witness_ensemble.tensor(&b.witness_ensemble);
        let joint = indicator(&r1.tensor(&r2), joint_spec, alpha, &light_opts(s, Some(4)).with_witness(w))?;
        Ok(vec![Record::at_most(
            &label("T2_P6_subadditivity", a_spec),
            s,
            alpha,
            joint.value,
            a.value + b.value,
            INEQ_TOL,
        )])
    });
    run(&mut rep, opts, "T2_P6_nesting", m, &|rng, s| {
        let fraktur = rng.random_bool(0.5);
        let n = 3;
        let sep = rng.random_bool(0.5);
        let (lo, hi) = if sep {
            let mut ks = [1, 2, 3];
            ks.shuffle(rng);
            (ks[0].min(ks[1]), ks[0].max(ks[1]))
        } else {
            let mut ks = [2, 3, 4];
            ks.shuffle(rng);
            (ks[0].min(ks[1]), ks[0].max(ks[1]))
        };
        let kind = match (sep, fraktur) {
            (true, false) => IndicatorKind::S,
            (true, true) => IndicatorKind::Sfrak,
            (false, false) => IndicatorKind::E,
            (false, true) => IndicatorKind::Efrak,
        };
        // S_hi ⊂ S_lo and P_{lo-1} ⊂ P_{hi-1}: the smaller set's witness moves to the larger one
        let (from, to) = if sep { (hi, lo) } else { (lo, hi) };
        let rho = random_state(&vec![2; n], rng)?;
        let alpha = random_alpha(rng);
        let o = light_opts(s, Some(4));
        let small = indicator(&rho, IndicatorSpec { kind, k: from }, alpha, &o)?;
        let large = indicator(
            &rho,
            IndicatorSpec { kind, k: to },
            alpha,
            &o.clone().with_witness(small.witness_ensemble.clone()),
        )?;
        Ok(vec![Record::at_most(
            &label("T2_P6_nesting", IndicatorSpec { kind, k: to }),
            s,
            alpha,
            large.value,
            small.value,
            INEQ_TOL,
        )])
    });
    rep
}

// ---------------------------------------------------------------------------
// embedding

/// Pure qudit state of prescribed coherent rank with amplitudes well away from the rank threshold.
fn pure_with_rank(d: usize, rank: usize, rng: &mut SeededRng) -> Result<PureState> {
    let mut idx: Vec<usize> = (0..d).collect();
    idx.shuffle(rng);
    let mut v = CVector::zeros(d);
    for &i in &idx[..rank] {
        let mag = rng.random_range(0.2..1.0);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        v[i] = C64::from_polar(mag, phase);
    }
    PureState::normalized(vec![d], v)
}

fn embedding(opts: &VerifyOptions) -> VerifyReport {
    let n = opts.n_samples;
    let mut rep = VerifyReport::default();
    for d in 2..=4 {
        match EmbeddingMap::build(d) {
            Ok(map) => {
                let u = map.unitary();
                let big = u.nrows();
                let inv = max_abs_diff(&(u * u), &CMatrix::identity(big, big));
                let uni = max_abs_diff(&(u * u.adjoint()), &CMatrix::identity(big, big));
                let perm = u
                    .iter()
                    .map(|z| z.im.abs() + z.re.abs().min((z.re - 1.0).abs()))
                    .fold(0.0, f64::max);
                rep.records.push(Record::equal("E_involution", d as u64, f64::NAN, inv, 0.0, 1e-9));
                rep.records.push(Record::equal("E_unitary", d as u64, f64::NAN, uni, 0.0, 1e-9));
                rep.records.push(Record::equal("E_permutation", d as u64, f64::NAN, perm, 0.0, 1e-12));
            }
            Err(e) => rep.warnings.push(format!("embedding d={d}: {e}")),
        }
    }
    run(&mut rep, opts, "E_affinity_preserved", n.div_ceil(2), &|rng, s| {
        let d = rng.random_range(2..=4);
        let map = EmbeddingMap::build(d)?;
        let rho = random_state(&[d], rng)?;
        let sigma = random_state(&[d], rng)?;
        let alpha = random_alpha(rng);
        let a = alpha_affinity(&rho, &sigma, alpha)?.value;
        let b = alpha_affinity(&map.embed_state(&rho)?, &map.map_witness(&sigma)?, alpha)?.value;
        Ok(vec![Record::equal("E_affinity_preserved", s, alpha, b, a, 1e-9)])
    });
    let per_d = n.div_ceil(5);
    for d in 2..=4usize {
        let prop = format!("E_depth_d{d}");
        run(&mut rep, opts, &prop, per_d, &|rng, s| {
            let map = EmbeddingMap::build(d)?;
            let rank = rng.random_range(1..=d);
            let psi = pure_with_rank(d, rank, rng)?;
            let row = map.depth_correspondence_pure(&psi)?;
            Ok(vec![
                Record::equal(&format!("E_rank_d{d}"), s, f64::NAN, row.rank as f64, rank as f64, 0.0),
                Record::equal(
                    &format!("E_sep_depth_d{d}"),
                    s,
                    f64::NAN,
                    row.sep_depth as f64,
                    row.expected_sep as f64,
                    0.0,
                ),
                Record::equal(
                    &format!("E_ent_depth_d{d}"),
                    s,
                    f64::NAN,
                    row.ent_depth as f64,
                    row.expected_ent as f64,
                    0.0,
                ),
            ])
        });
    }
    run(&mut rep, opts, "E_feasibility_transport", n.div_ceil(5), &|rng, s| {
        let d = rng.random_range(2..=4);
        let k = rng.random_range(2..=d);
        let map = EmbeddingMap::build(d)?;
        let fam = FeasibleFamily::build(FamilyKind::Multilevel(k - 1), &[d], None)?;
        let theta: Vec<f64> = (0..fam.param_len()).map(|_| rng.sample(StandardNormal)).collect();
        let mapped = map.map_witness_ensemble(&fam.decode_ensemble(&theta)?)?;
        let dims = map.target_dims().to_vec();
        let mut failures = 0.0;
        for fk in [FamilyKind::Separable(d - k + 2), FamilyKind::Producible(k)] {
            if FeasibleFamily::build(fk, &dims, Some(1))?.check_membership(&mapped).is_err() {
                failures += 1.0;
            }
        }
        Ok(vec![Record::equal("E_feasibility_transport", s, f64::NAN, failures, 0.0, 0.0)])
    });
    rep
}

// ---------------------------------------------------------------------------
// coherence-to-correlation transfer

fn theorem3(opts: &VerifyOptions) -> VerifyReport {
    let per = opts.n_samples.div_ceil(25);
    let mut rep = VerifyReport::default();
    for (d, k) in [(2usize, 2usize), (3, 2), (3, 3)] {
        for alpha in [0.3, 0.5, 0.7] {
            let prop = format!("T3_d{d}_k{k}_a{alpha}");
            run(&mut rep, opts, &prop, per, &|rng, s| {
                let rho = random_state(&[d], rng)?;
                let o = OptimizerOptions {
                    restarts: 1,
                    max_iter: 100,
                    ..light_opts(s, Some(4))
                };
                let report = theorem3_check(&rho, k, alpha, &o)?;
                Ok(report
                    .inequalities
                    .iter()
                    .map(|q| {
                        let lbl = format!("T3_{}", q.lhs_label.split('^').next().unwrap_or("?"));
                        Record::at_most(&lbl, s, alpha, q.lhs, q.rhs, INEQ_TOL)
                    })
                    .chain(std::iter::once(Record::equal(
                        "T3_witness_feasible",
                        s,
                        alpha,
                        if report.inequalities.iter().all(|q| q.witness_feasible) { 0.0 } else { 1.0 },
                        0.0,
                        0.0,
                    )))
                    .collect())
            });
        }
    }
    rep
}
