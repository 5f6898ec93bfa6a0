//! CPTP maps in Kraus form, plus constructors for the operation classes the
//! monotonicity results quantify over.
//!
//! Membership of an arbitrary Kraus family in the k-incoherent class is not
//! decided here. Instead [`KrausChannel::make_monomial_incoherent`] builds channels
//! that are k-incoherent for every k by structure: each Kraus operator has at most
//! one nonzero entry per column, so it can only shrink or keep the support of a
//! basis expansion. LOCC is represented by its one-round product-Kraus subclass
//! ([`KrausChannel::make_local_product`]).

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, max_abs_diff, CMatrix, C64, ONE, ZERO};
use crate::random::{haar_unitary, random_simplex, rng_from_seed};
use crate::state::{DensityMatrix, Ensemble, PureState};

pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Outcomes with probability at or below this are omitted from selective application.
pub const OUTCOME_FLOOR: f64 = 1e-12;
const FACTOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelTag {
    General,
    Unitary,
    MonomialIncoherent,
    LocalProduct,
}

#[derive(Debug, Clone)]
pub struct KrausChannel {
    dims: Vec<usize>,
    kraus: Vec<CMatrix>,
    tag: ChannelTag,
    factors: Option<Vec<Vec<CMatrix>>>,
}

/// One retained branch of a selective application.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub index: usize,
    pub probability: f64,
    pub state: DensityMatrix,
}

fn completeness_error(kraus: &[CMatrix]) -> f64 {
    let n = kraus[0].ncols();
    let mut acc = CMatrix::zeros(n, n);
    for k in kraus {
        acc += k.adjoint() * k;
    }
    max_abs_diff(&acc, &CMatrix::identity(n, n))
}

fn is_monomial(k: &CMatrix) -> bool {
    (0..k.ncols()).all(|j| k.column(j).iter().filter(|z| **z != ZERO).count() <= 1)
}

impl KrausChannel {
    /// General channel; checks completeness `Σ K†K = 1`.
    pub fn new(kraus: Vec<CMatrix>, dims: Vec<usize>) -> Result<Self> {
        Self::with_tag(kraus, dims, ChannelTag::General, None)
    }

    /// Channel with a structural tag; the tag's invariant is verified.
    pub fn with_tag(
        kraus: Vec<CMatrix>,
        dims: Vec<usize>,
        tag: ChannelTag,
        factors: Option<Vec<Vec<CMatrix>>>,
    ) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::ChannelInvalid("no Kraus operators".into()))?;
        let d_in: usize = dims.iter().product();
        if dims.is_empty() || first.ncols() != d_in {
            return Err(Error::ChannelInvalid(format!(
                "input dims {dims:?} do not match Kraus width {}",
                first.ncols()
            )));
        }
        if kraus.iter().any(|k| k.shape() != first.shape()) {
            return Err(Error::ChannelInvalid("Kraus operators differ in shape".into()));
        }
        let err = completeness_error(&kraus);
        if err > COMPLETENESS_TOL {
            return Err(Error::ChannelInvalid(format!(
                "completeness violated by {err:e}"
            )));
        }
        match tag {
            ChannelTag::General => {}
            ChannelTag::Unitary => {
                if kraus.len() != 1 || first.nrows() != first.ncols() {
                    return Err(Error::ChannelInvalid(
                        "unitary channel needs one square Kraus operator".into(),
                    ));
                }
            }
            ChannelTag::MonomialIncoherent => {
                if !kraus.iter().all(is_monomial) {
                    return Err(Error::ChannelInvalid(
                        "monomial channel has a column with two nonzeros".into(),
                    ));
                }
            }
            ChannelTag::LocalProduct => {
                let fs = factors.as_ref().ok_or_else(|| {
                    Error::ChannelInvalid("local product channel without factors".into())
                })?;
                if fs.len() != kraus.len() {
                    return Err(Error::ChannelInvalid("one factor list per Kraus operator".into()));
                }
                for (k, sites) in kraus.iter().zip(fs) {
                    let prod = sites
                        .iter()
                        .skip(1)
                        .fold(sites.first().cloned().unwrap_or_default(), |acc, f| kron(&acc, f));
                    if prod.shape() != k.shape() || max_abs_diff(&prod, k) > FACTOR_TOL {
                        return Err(Error::ChannelInvalid(
                            "Kraus operator differs from product of its factors".into(),
                        ));
                    }
                }
            }
        }
        if tag != ChannelTag::LocalProduct && factors.is_some() {
            return Err(Error::ChannelInvalid("factors given for a non-product channel".into()));
        }
        Ok(Self {
            dims,
            kraus,
            tag,
            factors,
        })
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self {
            dims,
            kraus: vec![CMatrix::identity(d, d)],
            tag: ChannelTag::Unitary,
            factors: None,
        }
    }

    pub fn unitary(u: CMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::with_tag(vec![u], dims, ChannelTag::Unitary, None)
    }

    /// Complete dephasing `ρ ↦ Σ_i |i><i| ρ |i><i|`.
    pub fn dephasing(d: usize) -> Self {
        let kraus = (0..d)
            .map(|i| {
                let mut k = CMatrix::zeros(d, d);
                k[(i, i)] = ONE;
                k
            })
            .collect();
        Self {
            dims: vec![d],
            kraus,
            tag: ChannelTag::MonomialIncoherent,
            factors: None,
        }
    }

    /// Random channel from a Haar isometry `C^d → C^d ⊗ C^outcomes`.
    pub fn random_general<R: Rng + ?Sized>(dims: Vec<usize>, outcomes: usize, rng: &mut R) -> Result<Self> {
        if outcomes == 0 {
            return Err(Error::ChannelInvalid("need at least one outcome".into()));
        }
        let d: usize = dims.iter().product();
        let u = haar_unitary(d * outcomes, rng);
        let kraus = (0..outcomes)
            .map(|i| u.view((i * d, 0), (d, d)).into_owned())
            .collect();
        Self::new(kraus, dims)
    }

    /// Random channel whose Kraus operators are (phase) × (column selection).
    ///
    /// `K_i = P_i D_i` with `P_i` a random permutation and `D_i` diagonal with
    /// entries `sqrt(w_ij) e^{iφ}`, where `Σ_i w_ij = 1`, so completeness holds
    /// exactly. With one outcome `P` is the identity, giving a diagonal phase unitary.
    pub fn make_monomial_incoherent(d: usize, outcomes: usize, seed: u64) -> Result<Self> {
        Self::make_monomial_incoherent_with(d, outcomes, &mut rng_from_seed(seed))
    }

    pub fn make_monomial_incoherent_with<R: Rng + ?Sized>(
        d: usize,
        outcomes: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if outcomes == 0 || d == 0 {
            return Err(Error::ChannelInvalid("need d >= 1 and outcomes >= 1".into()));
        }
        // one simplex per column, regrouped by operator
        let columns: Vec<Vec<f64>> = (0..d).map(|_| random_simplex(outcomes, rng)).collect();
        let weights: Vec<Vec<f64>> = (0..outcomes)
            .map(|i| columns.iter().map(|c| c[i]).collect())
            .collect();
        let mut kraus = Vec::with_capacity(outcomes);
        for w in &weights {
            // distinct rows per operator keep K_i†K_i diagonal
            let mut rows: Vec<usize> = (0..d).collect();
            if outcomes > 1 {
                rows.shuffle(rng);
            }
            let mut k = CMatrix::zeros(d, d);
            for (j, &row) in rows.iter().enumerate() {
                let phi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                k[(row, j)] = C64::from_polar(w[j].sqrt(), phi);
            }
            kraus.push(k);
        }
        Self::with_tag(kraus, vec![d], ChannelTag::MonomialIncoherent, None)
    }

    /// Product channel `⊗_j Λ_j`; Kraus operators are indexed by the Cartesian
    /// product of per-site indices with site 0 most significant.
    pub fn make_local_product(sites: &[KrausChannel]) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::ChannelInvalid("no sites".into()));
        }
        let mut kraus = vec![CMatrix::identity(1, 1)];
        let mut factors: Vec<Vec<CMatrix>> = vec![Vec::new()];
        let mut dims = Vec::new();
        for site in sites {
            if site.kraus[0].nrows() != site.kraus[0].ncols() {
                return Err(Error::ChannelInvalid("site channels must be square".into()));
            }
            dims.extend_from_slice(&site.dims);
            let mut next_k = Vec::with_capacity(kraus.len() * site.kraus.len());
            let mut next_f = Vec::with_capacity(kraus.len() * site.kraus.len());
            for (k, f) in kraus.iter().zip(&factors) {
                for g in &site.kraus {
                    next_k.push(kron(k, g));
                    let mut f2 = f.clone();
                    f2.push(g.clone());
                    next_f.push(f2);
                }
            }
            kraus = next_k;
            factors = next_f;
        }
        Self::with_tag(kraus, dims, ChannelTag::LocalProduct, Some(factors))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn tag(&self) -> ChannelTag {
        self.tag
    }

    pub fn factors(&self) -> Option<&[Vec<CMatrix>]> {
        self.factors.as_deref()
    }

    pub fn outcomes(&self) -> usize {
        self.kraus.len()
    }

    fn output_dims(&self) -> Vec<usize> {
        let k = &self.kraus[0];
        if k.nrows() == k.ncols() {
            self.dims.clone()
        } else {
            vec![k.nrows()]
        }
    }

    fn check_input(&self, dims: &[usize]) -> Result<()> {
        if dims != self.dims.as_slice() {
            return Err(Error::DimensionMismatch(format!(
                "channel acts on {:?}, state has {:?}",
                self.dims, dims
            )));
        }
        Ok(())
    }

    /// `K ρ K†` for one Kraus operator, unnormalized.
    pub fn branch(&self, index: usize, rho: &DensityMatrix) -> CMatrix {
        let k = &self.kraus[index];
        k * rho.matrix() * k.adjoint()
    }

    /// `Σ_i K_i ρ K_i†`, revalidated.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input(rho.dims())?;
        let d_out = self.kraus[0].nrows();
        let mut acc = CMatrix::zeros(d_out, d_out);
        for i in 0..self.kraus.len() {
            acc += self.branch(i, rho);
        }
        let acc = (&acc + acc.adjoint()) * C64::new(0.5, 0.0);
        DensityMatrix::validate(acc, self.output_dims())
    }

    /// Normalized branches `(p_i, K_iρK_i†/p_i)`; outcomes with `p_i <= 1e-12` are omitted.
    pub fn selective_apply(&self, rho: &DensityMatrix) -> Result<Vec<Outcome>> {
        self.check_input(rho.dims())?;
        let mut out = Vec::new();
        for i in 0..self.kraus.len() {
            let b = self.branch(i, rho);
            let p: f64 = b.diagonal().iter().map(|z| z.re).sum();
            if p <= OUTCOME_FLOOR {
                continue;
            }
            let state = DensityMatrix::from_trusted_normalized(b, self.output_dims());
            out.push(Outcome {
                index: i,
                probability: p,
                state,
            });
        }
        Ok(out)
    }

    /// Branch `i` applied to an ensemble: `(q_i, K_i E K_i† / q_i)`, or `None`
    /// if the branch probability is at or below the outcome floor.
    pub fn selective_apply_ensemble(&self, index: usize, e: &Ensemble) -> Result<Option<(f64, Ensemble)>> {
        self.check_input(e.dims())?;
        let k = &self.kraus[index];
        let mut terms = Vec::new();
        let mut q = 0.0;
        for (w, psi) in e.terms() {
            if let Some((n2, phi)) = psi.apply(k) {
                let phi = if phi.dims() != self.output_dims().as_slice() {
                    PureState::new(self.output_dims(), phi.amplitudes().clone())?
                } else {
                    phi
                };
                q += w * n2;
                terms.push((w * n2, phi));
            }
        }
        if q <= OUTCOME_FLOOR {
            return Ok(None);
        }
        Ok(Some((q, Ensemble::new(terms)?)))
    }

    /// Non-selective application to an ensemble, keeping the pure-term structure.
    pub fn apply_ensemble(&self, e: &Ensemble) -> Result<Ensemble> {
        let mut terms = Vec::new();
        for i in 0..self.kraus.len() {
            if let Some((q, branch)) = self.selective_apply_ensemble(i, e)? {
                terms.extend(branch.terms().iter().map(|(w, p)| (q * w, p.clone())));
            }
        }
        Ensemble::new(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CVector, ZERO};
    use crate::random::{random_mixed, random_pure, rng_from_seed};
    use crate::structure::{coherent_rank_pure, factorize_pure};

    fn plus() -> PureState {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        PureState::new(vec![2], CVector::from_vec(vec![h, h])).unwrap()
    }

    #[test]
    fn identity_channel_is_noop() {
        let rho = random_mixed(&[3], 3, 1).unwrap();
        let out = KrausChannel::identity(vec![3]).apply(&rho).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn full_dephasing_keeps_diagonal() {
        let rho = random_mixed(&[3], 3, 2).unwrap();
        let out = KrausChannel::dephasing(3).apply(&rho).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { rho.matrix()[(i, i)] } else { ZERO };
                assert!((out.matrix()[(i, j)] - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn random_channel_preserves_trace() {
        let mut rng = rng_from_seed(4);
        let ch = KrausChannel::random_general(vec![2, 2], 3, &mut rng).unwrap();
        let rho = random_mixed(&[2, 2], 4, 3).unwrap();
        assert!((ch.apply(&rho).unwrap().trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn measuring_plus_gives_fair_coin() {
        let out = KrausChannel::dephasing(2)
            .selective_apply(&plus().to_density())
            .unwrap();
        assert_eq!(out.len(), 2);
        for (i, o) in out.iter().enumerate() {
            assert!((o.probability - 0.5).abs() < 1e-15);
            let basis = PureState::basis(vec![2], i).unwrap().to_density();
            assert!(max_abs_diff(o.state.matrix(), basis.matrix()) < 1e-15);
        }
    }

    #[test]
    fn unitary_channel_has_single_certain_outcome() {
        let mut rng = rng_from_seed(5);
        let u = crate::random::haar_unitary(2, &mut rng);
        let ch = KrausChannel::unitary(u, vec![2]).unwrap();
        let out = ch.selective_apply(&random_mixed(&[2], 2, 6).unwrap()).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn selective_outcomes_resum_to_apply() {
        let mut rng = rng_from_seed(6);
        let ch = KrausChannel::random_general(vec![3], 3, &mut rng).unwrap();
        let rho = random_mixed(&[3], 3, 7).unwrap();
        let mut acc = CMatrix::zeros(3, 3);
        let mut total = 0.0;
        for o in ch.selective_apply(&rho).unwrap() {
            acc += o.state.matrix() * C64::new(o.probability, 0.0);
            total += o.probability;
        }
        assert!((total - 1.0).abs() < 1e-9);
        assert!(max_abs_diff(&acc, ch.apply(&rho).unwrap().matrix()) < 1e-10);
    }

    #[test]
    fn incomplete_family_rejected() {
        let k = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        assert!(matches!(
            KrausChannel::new(vec![k], vec![2]),
            Err(Error::ChannelInvalid(_))
        ));
    }

    #[test]
    fn single_outcome_monomial_is_diagonal_phase_unitary() {
        let ch = KrausChannel::make_monomial_incoherent(4, 1, 9).unwrap();
        let k = &ch.kraus()[0];
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    assert!((k[(i, j)].norm() - 1.0).abs() < 1e-12);
                } else {
                    assert_eq!(k[(i, j)], ZERO);
                }
            }
        }
    }

    #[test]
    fn monomial_keeps_basis_states_diagonal() {
        let ch = KrausChannel::make_monomial_incoherent(3, 3, 10).unwrap();
        for i in 0..3 {
            let psi = PureState::basis(vec![3], i).unwrap();
            for o in ch.selective_apply(&psi.to_density()).unwrap() {
                let m = o.state.matrix();
                assert!((o.state.purity() - 1.0).abs() < 1e-12);
                for r in 0..3 {
                    for c in 0..3 {
                        if r != c {
                            assert!(m[(r, c)].norm() < 1e-15);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn monomial_never_increases_coherent_rank() {
        let mut rng = rng_from_seed(11);
        for trial in 0..50 {
            let d = 2 + trial % 4;
            let ch = KrausChannel::make_monomial_incoherent_with(d, 1 + trial % 3, &mut rng).unwrap();
            // random support size r
            let r = 1 + trial % d;
            let mut v = CVector::zeros(d);
            for i in 0..r {
                v[(i * 7 + trial) % d] = crate::random::complex_normal(&mut rng) + C64::new(0.1, 0.0);
            }
            let psi = PureState::normalized(vec![d], v).unwrap();
            let rank = coherent_rank_pure(&psi, 1e-9);
            for k in ch.kraus() {
                if let Some((_, phi)) = psi.apply(k) {
                    assert!(coherent_rank_pure(&phi, 1e-9) <= rank);
                }
            }
        }
    }

    #[test]
    fn local_identities_compose_to_identity() {
        let ch = KrausChannel::make_local_product(&[
            KrausChannel::identity(vec![2]),
            KrausChannel::identity(vec![3]),
        ])
        .unwrap();
        assert_eq!(ch.outcomes(), 1);
        assert_eq!(ch.kraus()[0], CMatrix::identity(6, 6));
        assert_eq!(ch.dims(), &[2, 3]);
    }

    #[test]
    fn local_unitaries_give_single_product_operator() {
        let mut rng = rng_from_seed(12);
        let u1 = crate::random::haar_unitary(2, &mut rng);
        let u2 = crate::random::haar_unitary(2, &mut rng);
        let ch = KrausChannel::make_local_product(&[
            KrausChannel::unitary(u1.clone(), vec![2]).unwrap(),
            KrausChannel::unitary(u2.clone(), vec![2]).unwrap(),
        ])
        .unwrap();
        assert_eq!(ch.outcomes(), 1);
        assert!(max_abs_diff(&ch.kraus()[0], &kron(&u1, &u2)) < 1e-15);
    }

    #[test]
    fn local_dephasing_with_identity() {
        let ch = KrausChannel::make_local_product(&[
            KrausChannel::dephasing(2),
            KrausChannel::identity(vec![2]),
        ])
        .unwrap();
        assert_eq!(ch.outcomes(), 2);
        assert!(completeness_error(ch.kraus()) < 1e-10);
    }

    #[test]
    fn local_product_keeps_product_states_product() {
        let mut rng = rng_from_seed(13);
        let sites: Vec<_> = (0..3)
            .map(|_| KrausChannel::random_general(vec![2], 2, &mut rng).unwrap())
            .collect();
        let ch = KrausChannel::make_local_product(&sites).unwrap();
        let psi = random_pure(&[2], 1)
            .unwrap()
            .tensor(&random_pure(&[2], 2).unwrap())
            .tensor(&random_pure(&[2], 3).unwrap());
        let e = Ensemble::pure(psi);
        for i in 0..ch.outcomes() {
            if let Some((_, branch)) = ch.selective_apply_ensemble(i, &e).unwrap() {
                for (_, phi) in branch.terms() {
                    assert_eq!(factorize_pure(phi, 1e-8).unwrap().parts.num_parts(), 3);
                }
            }
        }
    }
}
