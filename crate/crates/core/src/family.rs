//! Parameterized families covering the restricted state sets `I_k`, `S_k` and `P_k`.
//!
//! A family is a fixed-length mixture of `m` pure components. Mixture weights come
//! from a softmax over `m` logits. Each component carries a fixed structure,
//! assigned cyclically over the full enumeration:
//!
//! - `multilevel(k)`: a size-k support subset of the (product) computational basis;
//!   the component amplitudes live on that support only.
//! - `separable(k)`: a partition with exactly k blocks; the component is a tensor
//!   product of one pure state per block.
//! - `producible(k)`: a partition whose blocks have at most k subsystems.
//!
//! A block of dimension `D > 1` uses `2D` reals, amplitude `j` being
//! `(1 + θ_{2j}) + i θ_{2j+1}` before normalization, so `θ = 0` decodes to the
//! uniform superposition. Blocks of dimension one carry no parameters. Every
//! parameter vector therefore decodes to a member of the target set.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, kron_vec, permute_vector, CMatrix, CVector, C64};
use crate::partitions::{enumerate_partitions, subsets, Partition, PartitionFilter, MAX_SUBSYSTEMS};
use crate::state::{DensityMatrix, Ensemble, PureState};
use crate::structure::{
    coherent_rank_pure, factorize_pure, reduced_from_pure, FACTOR_TOL, RANK_TOL,
};

/// Logit given to components left empty by [`FeasibleFamily::encode`].
const UNUSED_LOGIT: f64 = -80.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "k", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `I_k`: mixtures of pure states with coherent rank at most k.
    Multilevel(usize),
    /// `S_k`: mixtures of k-separable pure states.
    Separable(usize),
    /// `P_k`: mixtures of k-producible pure states.
    Producible(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Support(Vec<usize>),
    Parts(Partition),
}

#[derive(Debug, Clone, Serialize)]
pub struct FeasibleFamily {
    kind: FamilyKind,
    dims: Vec<usize>,
    components: usize,
    structures: Vec<Structure>,
    param_len: usize,
    #[serde(skip)]
    layouts: Vec<Layout>,
}

/// Precomputed decoding plan for one component.
#[derive(Debug, Clone)]
struct Layout {
    offset: usize,
    /// Dimension of each block, in block order.
    block_dims: Vec<usize>,
    /// Flat position in the full space of each entry of the block-ordered product vector.
    scatter: Vec<usize>,
}

impl Layout {
    fn param_count(&self) -> usize {
        self.block_dims.iter().filter(|&&d| d > 1).map(|&d| 2 * d).sum()
    }
}

fn block_vector(params: &[f64], d: usize) -> CVector {
    if d == 1 {
        return CVector::from_element(1, C64::new(1.0, 0.0));
    }
    let mut v = CVector::from_fn(d, |j, _| C64::new(1.0 + params[2 * j], params[2 * j + 1]));
    let n = v.norm();
    if n > 1e-300 && n.is_finite() {
        v /= C64::new(n, 0.0);
    } else {
        v.fill(C64::new(1.0 / (d as f64).sqrt(), 0.0));
    }
    v
}

/// Inverse of [`block_vector`] for a unit vector.
fn block_params(v: &CVector, out: &mut [f64]) {
    if v.len() == 1 {
        return;
    }
    for (j, c) in v.iter().enumerate() {
        out[2 * j] = c.re - 1.0;
        out[2 * j + 1] = c.im;
    }
}

/// Natural flat index of each entry of the block-ordered product vector.
fn scatter_for(dims: &[usize], p: &Partition) -> Vec<usize> {
    let d: usize = dims.iter().product();
    let concat_order: Vec<usize> = p.blocks().iter().flatten().copied().collect();
    let concat_dims: Vec<usize> = concat_order.iter().map(|&i| dims[i]).collect();
    let order: Vec<usize> = (0..dims.len())
        .map(|i| concat_order.iter().position(|&x| x == i).expect("partition covers"))
        .collect();
    let idx = CVector::from_fn(d, |r, _| C64::new(r as f64, 0.0));
    let natural = permute_vector(&idx, &concat_dims, &order);
    let mut scatter = vec![0usize; d];
    for (nat, c) in natural.iter().enumerate() {
        scatter[c.re as usize] = nat;
    }
    scatter
}

fn scatter_vector(v: &CVector, scatter: &[usize], d: usize) -> CVector {
    let mut full = CVector::zeros(d);
    for (c, &nat) in scatter.iter().enumerate() {
        full[nat] = v[c];
    }
    full
}

impl FeasibleFamily {
    /// Default component count: the square of the total dimension.
    pub fn default_components(dims: &[usize]) -> usize {
        let d: usize = dims.iter().product();
        d * d
    }

    /// Builds a family with `components` terms (`None` for the default).
    pub fn build(kind: FamilyKind, dims: &[usize], components: Option<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if dims.is_empty() || d == 0 {
            return Err(Error::DimensionMismatch("empty dims".into()));
        }
        let m = components.unwrap_or_else(|| Self::default_components(dims));
        if m == 0 {
            return Err(Error::EmptySet("family needs at least one component".into()));
        }
        let n = dims.len();
        let pool: Vec<Structure> = match kind {
            FamilyKind::Multilevel(k) => {
                if k == 0 || k > d {
                    return Err(Error::KOutOfRange(format!("multilevel({k}) needs 1 <= k <= {d}")));
                }
                subsets(d, k).into_iter().map(Structure::Support).collect()
            }
            FamilyKind::Separable(k) => {
                if n > MAX_SUBSYSTEMS {
                    return Err(Error::NTooLarge(n));
                }
                if k == 0 || k > n {
                    return Err(Error::EmptySet(format!("separable({k}) on {n} subsystems")));
                }
                enumerate_partitions(n, PartitionFilter::ExactlyKParts(k))?
                    .partitions
                    .into_iter()
                    .map(Structure::Parts)
                    .collect()
            }
            FamilyKind::Producible(k) => {
                if n > MAX_SUBSYSTEMS {
                    return Err(Error::NTooLarge(n));
                }
                if k == 0 {
                    return Err(Error::EmptySet("producible(0)".into()));
                }
                enumerate_partitions(n, PartitionFilter::MaxPartSize(k.min(n)))?
                    .partitions
                    .into_iter()
                    .map(Structure::Parts)
                    .collect()
            }
        };
        let structures: Vec<Structure> = (0..m).map(|i| pool[i % pool.len()].clone()).collect();
        let mut offset = m;
        let mut layouts = Vec::with_capacity(m);
        for s in &structures {
            let layout = match s {
                Structure::Support(sup) => Layout {
                    offset,
                    block_dims: vec![sup.len()],
                    scatter: sup.clone(),
                },
                Structure::Parts(p) => Layout {
                    offset,
                    block_dims: p
                        .blocks()
                        .iter()
                        .map(|b| b.iter().map(|&i| dims[i]).product())
                        .collect(),
                    scatter: scatter_for(dims, p),
                },
            };
            offset += layout.param_count();
            layouts.push(layout);
        }
        Ok(Self {
            kind,
            dims: dims.to_vec(),
            components: m,
            structures,
            param_len: offset,
            layouts,
        })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn structures(&self) -> &[Structure] {
        &self.structures
    }

    pub fn param_len(&self) -> usize {
        self.param_len
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("family serializes")
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.param_len {
            return Err(Error::BadLength {
                expected: self.param_len,
                got: theta.len(),
            });
        }
        Ok(())
    }

    fn weights(&self, theta: &[f64]) -> Vec<f64> {
        let logits = &theta[..self.components];
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut w: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        w
    }

    fn component_vector(&self, i: usize, theta: &[f64]) -> CVector {
        let layout = &self.layouts[i];
        let mut off = layout.offset;
        let mut prod = CVector::from_element(1, C64::new(1.0, 0.0));
        for &bd in &layout.block_dims {
            let np = if bd > 1 { 2 * bd } else { 0 };
            let v = block_vector(&theta[off..off + np], bd);
            prod = kron_vec(&prod, &v);
            off += np;
        }
        scatter_vector(&prod, &layout.scatter, self.dim())
    }

    /// Unvalidated density matrix for the optimizer's inner loop.
    pub(crate) fn decode_matrix(&self, theta: &[f64]) -> CMatrix {
        let w = self.weights(theta);
        let d = self.dim();
        let mut b = CMatrix::zeros(d, self.components);
        for (i, wi) in w.iter().enumerate() {
            if *wi == 0.0 {
                continue;
            }
            let v = self.component_vector(i, theta) * C64::new(wi.sqrt(), 0.0);
            b.set_column(i, &v);
        }
        &b * b.adjoint()
    }

    /// The decoded mixture as an explicit ensemble of pure components.
    pub fn decode_ensemble(&self, theta: &[f64]) -> Result<Ensemble> {
        self.check_len(theta)?;
        let w = self.weights(theta);
        let terms = w
            .iter()
            .enumerate()
            .filter(|(_, wi)| **wi > 0.0)
            .map(|(i, wi)| {
                PureState::normalized(self.dims.clone(), self.component_vector(i, theta))
                    .map(|p| (*wi, p))
            })
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(terms)
    }

    pub fn decode(&self, theta: &[f64]) -> Result<DensityMatrix> {
        self.check_len(theta)?;
        let m = self.decode_matrix(theta);
        let sym = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let tr: f64 = sym.diagonal().iter().map(|z| z.re).sum();
        DensityMatrix::validate(sym / C64::new(tr, 0.0), self.dims.clone())
    }

    /// Whether a pure state belongs to the extreme points of the target set.
    pub fn admits_pure(&self, psi: &PureState) -> bool {
        if psi.dims() != self.dims.as_slice() {
            return false;
        }
        match self.kind {
            FamilyKind::Multilevel(k) => coherent_rank_pure(psi, RANK_TOL) <= k,
            FamilyKind::Separable(k) => factorize_pure(psi, FACTOR_TOL)
                .map(|f| f.separability_depth() >= k)
                .unwrap_or(false),
            FamilyKind::Producible(k) => factorize_pure(psi, FACTOR_TOL)
                .map(|f| f.entanglement_depth() <= k)
                .unwrap_or(false),
        }
    }

    /// Re-checks every term of a witness; returns the index of the first failing term.
    pub fn check_membership(&self, e: &Ensemble) -> std::result::Result<(), usize> {
        if e.dims() != self.dims.as_slice() {
            return Err(0);
        }
        match e.terms().iter().position(|(_, p)| !self.admits_pure(p)) {
            Some(i) => Err(i),
            None => Ok(()),
        }
    }

    /// Projects a pure state onto a component structure: returns the fidelity
    /// of the projection and its block parameters.
    fn project(&self, psi: &PureState, s: &Structure) -> (f64, Vec<f64>) {
        let amps = psi.amplitudes();
        match s {
            Structure::Support(sup) => {
                let v = CVector::from_iterator(sup.len(), sup.iter().map(|&i| amps[i]));
                let fid = v.norm_squared();
                let mut params = vec![0.0; if sup.len() > 1 { 2 * sup.len() } else { 0 }];
                if fid > 0.0 {
                    block_params(&(v.clone() / C64::new(fid.sqrt(), 0.0)), &mut params);
                }
                (fid, params)
            }
            Structure::Parts(p) => {
                let mut params = Vec::new();
                let mut prod = CVector::from_element(1, C64::new(1.0, 0.0));
                for b in p.blocks() {
                    let (_, vecs) = hermitian_eigen(&reduced_from_pure(amps, &self.dims, b));
                    let top = vecs.column(0).into_owned();
                    let mut bp = vec![0.0; if top.len() > 1 { 2 * top.len() } else { 0 }];
                    block_params(&top, &mut bp);
                    params.extend(bp);
                    prod = kron_vec(&prod, &top);
                }
                let nat = scatter_vector(&prod, &scatter_for(&self.dims, p), self.dim());
                (amps.dotc(&nat).norm_sqr(), params)
            }
        }
    }

    /// Dephases each term of `e` into every distinct structure: onto each
    /// support for multilevel families, and into the product of the blocks'
    /// reduced eigenbases for partition families. The heaviest
    /// `components()` pieces are kept.
    pub fn pinched(&self, e: &Ensemble) -> Result<Ensemble> {
        let d = self.dim();
        let mut distinct: Vec<&Structure> = Vec::new();
        for s in &self.structures {
            if !distinct.contains(&s) {
                distinct.push(s);
            }
        }
        let mut pieces: Vec<(f64, CVector)> = Vec::new();
        for (w, psi) in e.terms() {
            let amps = psi.amplitudes();
            for s in &distinct {
                match s {
                    Structure::Support(sup) => {
                        let v = CVector::from_iterator(sup.len(), sup.iter().map(|&i| amps[i]));
                        let fid = v.norm_squared();
                        if fid > 1e-14 {
                            let v = v / C64::new(fid.sqrt(), 0.0);
                            pieces.push((w * fid, scatter_vector(&v, sup, d)));
                        }
                    }
                    Structure::Parts(p) => {
                        let bases: Vec<CMatrix> = p
                            .blocks()
                            .iter()
                            .map(|b| hermitian_eigen(&reduced_from_pure(amps, &self.dims, b)).1)
                            .collect();
                        let scatter = scatter_for(&self.dims, p);
                        for flat in 0..d {
                            let mut rem = flat;
                            let mut prod = CVector::from_element(1, C64::new(1.0, 0.0));
                            for m in bases.iter().rev() {
                                let j = rem % m.ncols();
                                rem /= m.ncols();
                                prod = kron_vec(&m.column(j).into_owned(), &prod);
                            }
                            let nat = scatter_vector(&prod, &scatter, d);
                            let fid = amps.dotc(&nat).norm_sqr();
                            if fid > 1e-14 {
                                pieces.push((w * fid, nat));
                            }
                        }
                    }
                }
            }
        }
        pieces.sort_by(|a, b| b.0.total_cmp(&a.0));
        pieces.truncate(self.components);
        let terms = pieces
            .into_iter()
            .map(|(w, v)| PureState::normalized(self.dims.clone(), v).map(|p| (w, p)))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(terms)
    }

    /// Nearest-feasible encoding of an ensemble.
    ///
    /// Each term is projected onto every distinct structure and placed in the
    /// first free component whose structure gives the highest fidelity. Terms
    /// that fit fewer structures are placed first. Terms that find no free component are dropped
    /// and unused components get a negligible weight.
    pub fn encode(&self, e: &Ensemble) -> Result<Vec<f64>> {
        if e.dims() != self.dims.as_slice() {
            return Err(Error::DimensionMismatch(format!(
                "ensemble on {:?}, family on {:?}",
                e.dims(),
                self.dims
            )));
        }
        let mut theta = vec![0.0; self.param_len];
        theta[..self.components].iter_mut().for_each(|x| *x = UNUSED_LOGIT);
        let mut free = vec![true; self.components];
        let mut distinct: Vec<&Structure> = Vec::new();
        for s in &self.structures {
            if !distinct.contains(&s) {
                distinct.push(s);
            }
        }
        let ranked: Vec<Vec<(f64, usize, Vec<f64>)>> = e
            .terms()
            .iter()
            .map(|(_, psi)| {
                let mut r: Vec<(f64, usize, Vec<f64>)> = distinct
                    .iter()
                    .enumerate()
                    .map(|(si, s)| {
                        let (fid, params) = self.project(psi, s);
                        (fid, si, params)
                    })
                    .collect();
                r.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                r
            })
            .collect();
        // most constrained terms first (fewest structures at their best fidelity), then heaviest
        let ties = |r: &[(f64, usize, Vec<f64>)]| r.iter().filter(|x| x.0 >= r[0].0 - 1e-12).count();
        let mut order: Vec<usize> = (0..e.len()).collect();
        order.sort_by(|&a, &b| {
            ties(&ranked[a])
                .cmp(&ties(&ranked[b]))
                .then(e.terms()[b].0.total_cmp(&e.terms()[a].0))
        });
        for t in order {
            let w = e.terms()[t].0;
            for (fid, si, params) in &ranked[t] {
                if *fid <= 0.0 {
                    break;
                }
                let slot = (0..self.components)
                    .find(|&c| free[c] && self.structures[c] == *distinct[*si]);
                if let Some(c) = slot {
                    free[c] = false;
                    theta[c] = w.ln();
                    let off = self.layouts[c].offset;
                    theta[off..off + params.len()].copy_from_slice(params);
                    break;
                }
            }
        }
        Ok(theta)
    }
}
