//! Embedding of a qudit into a qudit plus `d` ancilla qubits:
//!
//! `U = Σ_i |i><i| ⊗ 1^{⊗i} ⊗ σ_x ⊗ 1^{⊗(d-i-1)}`, `ρ' = U (ρ ⊗ |0><0|^{⊗d}) U†`.
//!
//! Coherent rank of a pure state turns into separability and entanglement depth
//! of its image, and witnesses for coherence map to witnesses for correlations.
//! The qudit is the most significant tensor factor, followed by ancillas `0..d`.

use serde::Serialize;

use crate::affinity::alpha_affinity;
use crate::error::{Error, Result};
use crate::family::{FamilyKind, FeasibleFamily};
use crate::indicators::{multilevel_coherence, multipartite_correlation, IndicatorKind, OptimizerOptions};
use crate::linalg::{CMatrix, CVector, C64};
use crate::optimize::thread_pool;
use crate::state::{DensityMatrix, Ensemble, PureState};
use crate::structure::{coherent_rank_pure, factorize_pure, FACTOR_TOL, RANK_TOL};

pub const MAX_EMBED_DIM: usize = 4;

#[derive(Debug, Clone)]
pub struct EmbeddingMap {
    d: usize,
    u: CMatrix,
    target_dims: Vec<usize>,
}

impl EmbeddingMap {
    /// Dense `U` for `2 <= d <= 4` (at most 64 dimensions).
    pub fn build(d: usize) -> Result<Self> {
        if d > MAX_EMBED_DIM {
            return Err(Error::DTooLarge(d));
        }
        if d < 2 {
            return Err(Error::DimensionMismatch(format!("embedding needs d >= 2, got {d}")));
        }
        let big = d << d;
        let mut u = CMatrix::zeros(big, big);
        for col in 0..big {
            u[(Self::image(d, col), col)] = C64::new(1.0, 0.0);
        }
        let mut target_dims = vec![d];
        target_dims.extend(std::iter::repeat_n(2, d));
        Ok(Self { d, u, target_dims })
    }

    /// Flat index of `U|i, b>`: flips ancilla `i` (bit `d-1-i` of `b`).
    fn image(d: usize, flat: usize) -> usize {
        let i = flat >> d;
        flat ^ (1 << (d - 1 - i))
    }

    /// Flat index of `U|i>|0...0>`.
    fn lift(&self, i: usize) -> usize {
        Self::image(self.d, i << self.d)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.u
    }

    pub fn target_dims(&self) -> &[usize] {
        &self.target_dims
    }

    fn check_source(&self, dims: &[usize]) -> Result<()> {
        if dims != [self.d] {
            return Err(Error::DimensionMismatch(format!(
                "embedding source is [{}], got {dims:?}",
                self.d
            )));
        }
        Ok(())
    }

    pub fn embed_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_source(rho.dims())?;
        let big = self.u.nrows();
        let m = rho.matrix();
        let mut out = CMatrix::zeros(big, big);
        for i in 0..self.d {
            for j in 0..self.d {
                out[(self.lift(i), self.lift(j))] = m[(i, j)];
            }
        }
        DensityMatrix::validate(out, self.target_dims.clone())
    }

    pub fn embed_pure(&self, psi: &PureState) -> Result<PureState> {
        self.check_source(psi.dims())?;
        let mut v = CVector::zeros(self.u.nrows());
        for (i, c) in psi.amplitudes().iter().enumerate() {
            v[self.lift(i)] = *c;
        }
        PureState::new(self.target_dims.clone(), v)
    }

    /// Witness image `U (σ ⊗ |0><0|^{⊗d}) U†`.
    pub fn map_witness(&self, sigma: &DensityMatrix) -> Result<DensityMatrix> {
        self.embed_state(sigma)
    }

    /// Term-wise image of a witness ensemble.
    pub fn map_witness_ensemble(&self, e: &Ensemble) -> Result<Ensemble> {
        let terms = e
            .terms()
            .iter()
            .map(|(w, p)| self.embed_pure(p).map(|q| (*w, q)))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(terms)
    }

    pub fn depth_correspondence_pure(&self, psi: &PureState) -> Result<DepthRow> {
        let rank = coherent_rank_pure(psi, RANK_TOL);
        let f = factorize_pure(&self.embed_pure(psi)?, FACTOR_TOL)?;
        let (expected_sep, expected_ent) = if rank == 1 {
            (self.d + 1, 1)
        } else {
            (self.d - rank + 1, rank + 1)
        };
        Ok(DepthRow {
            d: self.d,
            rank,
            sep_depth: f.separability_depth(),
            ent_depth: f.entanglement_depth(),
            expected_sep,
            expected_ent,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DepthRow {
    pub d: usize,
    pub rank: usize,
    pub sep_depth: usize,
    pub ent_depth: usize,
    pub expected_sep: usize,
    pub expected_ent: usize,
}

impl DepthRow {
    pub fn holds(&self) -> bool {
        self.sep_depth == self.expected_sep && self.ent_depth == self.expected_ent
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem3Inequality {
    pub lhs_label: String,
    pub rhs_label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// Value obtained from the mapped witness alone, before any search.
    pub injected: f64,
    pub witness_feasible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem3Report {
    pub d: usize,
    pub k: usize,
    pub alpha: f64,
    pub inequalities: Vec<Theorem3Inequality>,
}

impl Theorem3Report {
    pub fn min_slack(&self) -> f64 {
        self.inequalities.iter().map(|i| i.slack).fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Bounds the correlation indicators of `ρ'` by the coherence indicators of `ρ`:
/// `𝒮^{d-k+2}(ρ') <= C^k(ρ)` and `𝔈̃^{k+1}(ρ') <= 𝔠^k(ρ)`, together with the
/// `𝔖` and `Ẽ` companions. The coherence witness is mapped, checked against
/// both target sets and injected into the correlation searches.
///
/// `opts.components` sizes the correlation families only, defaulting to the
/// number of terms in the mapped witness; the coherence search uses its
/// default size.
pub fn theorem3_check(rho: &DensityMatrix, k: usize, alpha: f64, opts: &OptimizerOptions) -> Result<Theorem3Report> {
    let d = rho.dim();
    if rho.dims().len() != 1 {
        return Err(Error::DimensionMismatch(format!("expected a single qudit, got {:?}", rho.dims())));
    }
    if d > 3 {
        return Err(Error::DTooLarge(d));
    }
    if k < 2 || k > d {
        return Err(Error::KOutOfRange(format!("need 2 <= k <= {d}, got {k}")));
    }
    let map = EmbeddingMap::build(d)?;
    let coh_opts = OptimizerOptions {
        components: None,
        ..opts.clone()
    };
    let coh = multilevel_coherence(rho, k, alpha, IndicatorKind::C, &coh_opts)?;
    let c_plain = coh.value;
    let c_frak = IndicatorKind::Cfrak.value_from_affinity(coh.best_affinity, alpha);

    let rho_p = map.embed_state(rho)?;
    let witness = map.map_witness_ensemble(&coh.witness_ensemble)?;
    let s_order = d - k + 2;
    let dims = map.target_dims().to_vec();
    for fk in [FamilyKind::Separable(s_order), FamilyKind::Producible(k)] {
        let fam = FeasibleFamily::build(fk, &dims, Some(1))?;
        if let Err(t) = fam.check_membership(&witness) {
            return Err(Error::FeasibilityCheckFailed(format!(
                "mapped witness term {t} is not in {fk:?} on {dims:?}"
            )));
        }
    }
    let injected = alpha_affinity(&rho_p, &witness.to_density(), alpha)?.value;
    let corr_opts = OptimizerOptions {
        components: opts.components.or(Some(witness.len())),
        ..opts.clone()
    }
    .with_witness(witness);
    let (s, e) = thread_pool().install(|| {
        rayon::join(
            || multipartite_correlation(&rho_p, IndicatorKind::S, s_order, alpha, &corr_opts),
            || multipartite_correlation(&rho_p, IndicatorKind::E, k + 1, alpha, &corr_opts),
        )
    });
    let (s, e) = (s?, e?);
    let row = |kind: IndicatorKind, order: usize, best: f64, coh_kind: IndicatorKind, rhs: f64| {
        let lhs = kind.value_from_affinity(best, alpha);
        Theorem3Inequality {
            lhs_label: format!("{}^{}(rho')", kind.label(), order),
            rhs_label: format!("{}^{}(rho)", coh_kind.label(), k),
            lhs,
            rhs,
            slack: rhs - lhs,
            injected: kind.value_from_affinity(injected, alpha),
            witness_feasible: true,
        }
    };
    Ok(Theorem3Report {
        d,
        k,
        alpha,
        inequalities: vec![
            row(IndicatorKind::S, s_order, s.best_affinity, IndicatorKind::C, c_plain),
            row(IndicatorKind::Sfrak, s_order, s.best_affinity, IndicatorKind::Cfrak, c_frak),
            row(IndicatorKind::E, k + 1, e.best_affinity, IndicatorKind::C, c_plain),
            row(IndicatorKind::Efrak, k + 1, e.best_affinity, IndicatorKind::Cfrak, c_frak),
        ],
    })
}
