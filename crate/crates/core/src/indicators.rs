//! The six affinity indicators as certified upper bounds.
//!
//! Each indicator is `1 - max A` (plain) or `1 - (max A)^{1/α}` (Fraktur) with the
//! maximum over a restricted set. The maximum is estimated from below by a
//! multi-start search over a [`FeasibleFamily`]; the reported witness is a
//! member of the set, so the reported value bounds the true indicator from above.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::affinity::{affinity_with_power, alpha_affinity};
use crate::error::{check_alpha, Error, Result};
use crate::family::{FamilyKind, FeasibleFamily};
use crate::io::StateFile;
use crate::optimize::{multistart, NelderMead};
use crate::random::substream;
use crate::state::{DensityMatrix, Ensemble, PureState};

#[derive(Debug, Clone)]
pub struct OptimizerOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    /// Mixture size of the search family; `None` for the family default.
    pub components: Option<usize>,
    /// Feasible candidates evaluated exactly and used as extra start points.
    pub init_witnesses: Vec<Ensemble>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iter: 2000,
            tol: 1e-10,
            seed: 0,
            components: None,
            init_witnesses: Vec::new(),
        }
    }
}

impl OptimizerOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn with_witness(mut self, w: Ensemble) -> Self {
        self.init_witnesses.push(w);
        self
    }
}

/// Where the winning witness came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "source", content = "index", rename_all = "snake_case")]
pub enum WitnessSource {
    Restart(usize),
    Injected(usize),
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Local searches run (random restarts plus witness-seeded runs).
    pub restarts: usize,
    pub iterations: usize,
    pub evaluations: usize,
    /// Spread `max - min` of the local optima.
    pub spread: f64,
    /// Best affinity reached by the local searches alone.
    pub optimizer_affinity: f64,
    pub source: WitnessSource,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct MaxAffinity {
    pub best_affinity: f64,
    pub witness: Ensemble,
    pub diagnostics: Diagnostics,
}

fn random_start(len: usize, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = substream(seed, index as u64);
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Lower bound on `max_{σ ∈ family} A_α(ρ, σ)` with a feasible witness.
///
/// Start 0 is the pinched spectral decomposition of `ρ`; starts `1..restarts`
/// are seeded Gaussian vectors; each injected witness adds one more start at
/// its nearest-feasible encoding and, when it passes the membership check, is
/// also evaluated exactly.
pub fn max_affinity(
    rho: &DensityMatrix,
    family: &FeasibleFamily,
    alpha: f64,
    opts: &OptimizerOptions,
) -> Result<MaxAffinity> {
    check_alpha(alpha)?;
    if rho.dims() != family.dims() {
        return Err(Error::DimensionMismatch(format!(
            "state on {:?}, family on {:?}",
            rho.dims(),
            family.dims()
        )));
    }
    let len = family.param_len();
    let mut starts = vec![family.encode(&family.pinched(&Ensemble::from_spectrum(rho))?)?];
    starts.extend((1..opts.restarts.max(1)).map(|r| random_start(len, opts.seed, r)));
    for w in &opts.init_witnesses {
        if w.dims() == family.dims() {
            starts.push(family.encode(w)?);
        }
    }
    let power = rho.frac_power(alpha)?;
    let nm = NelderMead {
        max_iter: opts.max_iter,
        tol: opts.tol,
        ..NelderMead::default()
    };
    let out = multistart(
        |theta| affinity_with_power(&power, &family.decode_matrix(theta), alpha),
        &starts,
        &nm,
    );
    let values: Vec<f64> = out.runs.iter().map(|r| r.value).collect();
    let spread = values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().copied().fold(f64::INFINITY, f64::min);

    let mut witness = family.decode_ensemble(&out.best().x)?;
    let mut best = alpha_affinity(rho, &witness.to_density(), alpha)?.value;
    let optimizer_affinity = best;
    let mut source = WitnessSource::Restart(out.best_index);
    for (i, w) in opts.init_witnesses.iter().enumerate() {
        if w.dims() != family.dims() || family.check_membership(w).is_err() {
            continue;
        }
        let a = alpha_affinity(rho, &w.to_density(), alpha)?.value;
        if a > best {
            best = a;
            witness = w.clone();
            source = WitnessSource::Injected(i);
        }
    }
    Ok(MaxAffinity {
        best_affinity: best,
        witness,
        diagnostics: Diagnostics {
            restarts: out.runs.len(),
            iterations: out.runs.iter().map(|r| r.iterations).sum(),
            evaluations: out.runs.iter().map(|r| r.evaluations).sum(),
            spread,
            optimizer_affinity,
            source,
            seed: opts.seed,
        },
    })
}

#[derive(Debug, Clone)]
pub struct ClosedForm {
    pub c: f64,
    pub c_frak: f64,
    pub max_affinity: f64,
    /// Optimal incoherent state, `q_i ∝ a_i^{1/α}`.
    pub witness: Ensemble,
}

/// Exact maximum over incoherent states: with `a_i = (ρ^α)_{ii}` and
/// `S = Σ a_i^{1/α}`, `max A = S^α`, so `C = 1 - S^α` and `𝔠 = 1 - S`.
pub fn closed_form_k2(rho: &DensityMatrix, alpha: f64) -> Result<ClosedForm> {
    check_alpha(alpha)?;
    let p = rho.frac_power(alpha)?;
    let powers: Vec<f64> = p
        .diagonal()
        .iter()
        .map(|z| z.re.max(0.0).powf(1.0 / alpha))
        .collect();
    let s: f64 = powers.iter().sum();
    let terms = powers
        .iter()
        .enumerate()
        .map(|(i, &w)| PureState::basis(rho.dims().to_vec(), i).map(|b| (w, b)))
        .collect::<Result<Vec<_>>>()?;
    let max_affinity = s.powf(alpha).min(1.0);
    Ok(ClosedForm {
        c: (1.0 - max_affinity).max(0.0),
        c_frak: (1.0 - s.min(1.0)).max(0.0),
        max_affinity,
        witness: Ensemble::new(terms)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndicatorKind {
    C,
    Cfrak,
    S,
    Sfrak,
    E,
    Efrak,
}

impl IndicatorKind {
    pub const ALL: [IndicatorKind; 6] = [
        IndicatorKind::C,
        IndicatorKind::Cfrak,
        IndicatorKind::S,
        IndicatorKind::Sfrak,
        IndicatorKind::E,
        IndicatorKind::Efrak,
    ];

    pub fn is_fraktur(self) -> bool {
        matches!(self, IndicatorKind::Cfrak | IndicatorKind::Sfrak | IndicatorKind::Efrak)
    }

    /// ASCII label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            IndicatorKind::C => "C",
            IndicatorKind::Cfrak => "Cfrak",
            IndicatorKind::S => "S",
            IndicatorKind::Sfrak => "Sfrak",
            IndicatorKind::E => "E",
            IndicatorKind::Efrak => "Efrak",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            IndicatorKind::C => "C",
            IndicatorKind::Cfrak => "𝔠",
            IndicatorKind::S => "𝒮",
            IndicatorKind::Sfrak => "𝔖",
            IndicatorKind::E => "Ẽ",
            IndicatorKind::Efrak => "𝔈̃",
        }
    }

    /// The restricted set for order `k` on `dims`, or the reason it is undefined.
    pub fn family_kind(self, k: usize, dims: &[usize]) -> Result<FamilyKind> {
        let n = dims.len();
        let d: usize = dims.iter().product();
        match self {
            IndicatorKind::C | IndicatorKind::Cfrak => {
                if k < 2 || k > d {
                    return Err(Error::KOutOfRange(format!("coherence order needs 2 <= k <= {d}, got {k}")));
                }
                Ok(FamilyKind::Multilevel(k - 1))
            }
            IndicatorKind::S | IndicatorKind::Sfrak => {
                if k < 1 || k > n {
                    return Err(Error::KOutOfRange(format!("separability order needs 1 <= k <= {n}, got {k}")));
                }
                Ok(FamilyKind::Separable(k))
            }
            IndicatorKind::E | IndicatorKind::Efrak => {
                if k < 2 || k > n + 1 {
                    return Err(Error::KOutOfRange(format!(
                        "producibility order needs 2 <= k <= {}, got {k}",
                        n + 1
                    )));
                }
                Ok(FamilyKind::Producible(k - 1))
            }
        }
    }

    /// `1 - A` or `1 - A^{1/α}`, clamped to `[0, 1]`.
    pub fn value_from_affinity(self, affinity: f64, alpha: f64) -> f64 {
        let a = affinity.clamp(0.0, 1.0);
        let v = if self.is_fraktur() { 1.0 - a.powf(1.0 / alpha) } else { 1.0 - a };
        v.clamp(0.0, 1.0)
    }
}

impl fmt::Display for IndicatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for IndicatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "C" => IndicatorKind::C,
            "Cfrak" | "c" | "𝔠" => IndicatorKind::Cfrak,
            "S" | "𝒮" => IndicatorKind::S,
            "Sfrak" | "𝔖" => IndicatorKind::Sfrak,
            "E" | "Ẽ" => IndicatorKind::E,
            "Efrak" | "𝔈̃" => IndicatorKind::Efrak,
            _ => return Err(Error::Parse(format!("unknown indicator label {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndicatorSpec {
    pub kind: IndicatorKind,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct IndicatorResult {
    pub kind: IndicatorKind,
    pub k: usize,
    pub alpha: f64,
    pub value: f64,
    pub best_affinity: f64,
    pub witness: DensityMatrix,
    pub witness_ensemble: Ensemble,
    pub diagnostics: Diagnostics,
}

impl IndicatorResult {
    fn from_max(kind: IndicatorKind, k: usize, alpha: f64, m: MaxAffinity) -> Self {
        Self {
            kind,
            k,
            alpha,
            value: kind.value_from_affinity(m.best_affinity, alpha),
            best_affinity: m.best_affinity,
            witness: m.witness.to_density(),
            witness_ensemble: m.witness,
            diagnostics: m.diagnostics,
        }
    }

    /// The same optimization read as the other variant (plain ↔ Fraktur).
    pub fn as_kind(&self, kind: IndicatorKind) -> Self {
        Self {
            kind,
            value: kind.value_from_affinity(self.best_affinity, self.alpha),
            ..self.clone()
        }
    }

    pub fn csv_header() -> &'static str {
        "label,k,alpha,value,best_affinity,restarts,spread,seed"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:?},{:?},{:?},{},{:?},{}",
            self.kind.label(),
            self.k,
            self.alpha,
            self.value,
            self.best_affinity,
            self.diagnostics.restarts,
            self.diagnostics.spread,
            self.diagnostics.seed
        )
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "label": self.kind.label(),
            "k": self.k,
            "alpha": self.alpha,
            "value": self.value,
            "best_affinity": self.best_affinity,
            "diagnostics": self.diagnostics,
            "witness": StateFile::from_state(&self.witness),
        })
    }
}

/// `C` or `𝔠` of order `k`; for `k = 2` the closed form is also evaluated and
/// the larger affinity kept.
pub fn multilevel_coherence(
    rho: &DensityMatrix,
    k: usize,
    alpha: f64,
    kind: IndicatorKind,
    opts: &OptimizerOptions,
) -> Result<IndicatorResult> {
    if !matches!(kind, IndicatorKind::C | IndicatorKind::Cfrak) {
        return Err(Error::Parse(format!("{kind} is not a coherence indicator")));
    }
    check_alpha(alpha)?;
    let fk = kind.family_kind(k, rho.dims())?;
    let family = FeasibleFamily::build(fk, rho.dims(), opts.components)?;
    let mut m = max_affinity(rho, &family, alpha, opts)?;
    if k == 2 {
        let cf = closed_form_k2(rho, alpha)?;
        let a = alpha_affinity(rho, &cf.witness.to_density(), alpha)?.value;
        if a > m.best_affinity {
            m.best_affinity = a;
            m.witness = cf.witness;
            m.diagnostics.source = WitnessSource::ClosedForm;
        }
    }
    Ok(IndicatorResult::from_max(kind, k, alpha, m))
}

/// `𝒮`, `𝔖`, `Ẽ` or `𝔈̃` of order `k`.
pub fn multipartite_correlation(
    rho: &DensityMatrix,
    kind: IndicatorKind,
    k: usize,
    alpha: f64,
    opts: &OptimizerOptions,
) -> Result<IndicatorResult> {
    if matches!(kind, IndicatorKind::C | IndicatorKind::Cfrak) {
        return Err(Error::Parse(format!("{kind} is not a correlation indicator")));
    }
    check_alpha(alpha)?;
    let fk = kind.family_kind(k, rho.dims())?;
    let family = FeasibleFamily::build(fk, rho.dims(), opts.components)?;
    let m = max_affinity(rho, &family, alpha, opts)?;
    Ok(IndicatorResult::from_max(kind, k, alpha, m))
}

pub fn indicator(rho: &DensityMatrix, spec: IndicatorSpec, alpha: f64, opts: &OptimizerOptions) -> Result<IndicatorResult> {
    match spec.kind {
        IndicatorKind::C | IndicatorKind::Cfrak => multilevel_coherence(rho, spec.k, alpha, spec.kind, opts),
        _ => multipartite_correlation(rho, spec.kind, spec.k, alpha, opts),
    }
}

#[derive(Debug, Clone, Default)]
pub struct IndicatorReport {
    pub rows: Vec<IndicatorResult>,
    pub errors: Vec<(IndicatorSpec, f64, Error)>,
}

impl IndicatorReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(IndicatorResult::csv_header());
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self.rows.iter().map(IndicatorResult::to_json_value).collect();
        let errors: Vec<serde_json::Value> = self
            .errors
            .iter()
            .map(|(s, a, e)| serde_json::json!({"label": s.kind.label(), "k": s.k, "alpha": a, "error": e.to_string()}))
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({"rows": rows, "errors": errors})).expect("report serializes")
    }
}

/// Every `(spec, α)` pair, specs outermost; failures are collected per row.
/// Plain and Fraktur variants of the same set, order and α share one search.
pub fn indicator_suite(
    rho: &DensityMatrix,
    alphas: &[f64],
    specs: &[IndicatorSpec],
    opts: &OptimizerOptions,
) -> IndicatorReport {
    let mut report = IndicatorReport::default();
    let mut cache: Vec<(IndicatorSpec, u64, IndicatorResult)> = Vec::new();
    for spec in specs {
        for &alpha in alphas {
            let twin = cache.iter().find(|(s, a, _)| {
                *a == alpha.to_bits() && s.k == spec.k && partner(s.kind) == Some(spec.kind)
            });
            let res = match twin {
                Some((_, _, r)) => Ok(r.as_kind(spec.kind)),
                None => indicator(rho, *spec, alpha, opts),
            };
            match res {
                Ok(r) => {
                    cache.push((*spec, alpha.to_bits(), r.clone()));
                    report.rows.push(r);
                }
                Err(e) => report.errors.push((*spec, alpha, e)),
            }
        }
    }
    report
}

fn partner(kind: IndicatorKind) -> Option<IndicatorKind> {
    Some(match kind {
        IndicatorKind::C => IndicatorKind::Cfrak,
        IndicatorKind::Cfrak => IndicatorKind::C,
        IndicatorKind::S => IndicatorKind::Sfrak,
        IndicatorKind::Sfrak => IndicatorKind::S,
        IndicatorKind::E => IndicatorKind::Efrak,
        IndicatorKind::Efrak => IndicatorKind::E,
    })
}
