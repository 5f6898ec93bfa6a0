//! Structure of pure states: coherent rank and finest tensor factorization.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, permute_vector, CMatrix, CVector};
use crate::partitions::{subsets, Partition, MAX_SUBSYSTEMS};
use crate::state::PureState;

/// Default relative threshold for counting nonzero amplitudes.
pub const RANK_TOL: f64 = 1e-9;
/// Default purity defect below which a block is considered to split off.
pub const FACTOR_TOL: f64 = 1e-9;

/// Number of amplitudes with `|c_i| > tol · max_j |c_j|`.
pub fn coherent_rank_pure(psi: &PureState, tol: f64) -> usize {
    coherent_rank_vec(psi.amplitudes(), tol)
}

pub(crate) fn coherent_rank_vec(v: &CVector, tol: f64) -> usize {
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    v.iter().filter(|c| c.norm() > tol * max).count()
}

/// Reduced density matrix of `|ψ><ψ|` on `subset` (sorted), via `M M†` of the reshaped vector.
pub fn reduced_from_pure(amps: &CVector, dims: &[usize], subset: &[usize]) -> CMatrix {
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !subset.contains(i)).collect();
    let order: Vec<usize> = subset.iter().chain(rest.iter()).copied().collect();
    let v = permute_vector(amps, dims, &order);
    let db: usize = subset.iter().map(|&i| dims[i]).product();
    let dr = v.len() / db;
    // row-major reshape: element (a, r) sits at a * dr + r
    let m = CMatrix::from_fn(db, dr, |a, r| v[a * dr + r]);
    &m * m.adjoint()
}

fn purity(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Finest tensor factorization of a pure state.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub dims: Vec<usize>,
    pub parts: Partition,
    /// One factor per block, on that block's subsystems in ascending order.
    pub factors: Vec<PureState>,
}

impl Factorization {
    /// Separability depth `D_S`: number of factors.
    pub fn separability_depth(&self) -> usize {
        self.parts.num_parts()
    }

    /// Entanglement depth `D_E`: size of the largest factor.
    pub fn entanglement_depth(&self) -> usize {
        self.parts.max_part_size()
    }

    /// Tensor product of the factors, reordered to the original subsystem order.
    pub fn reassemble(&self) -> PureState {
        let mut v = CVector::from_element(1, crate::linalg::ONE);
        let mut concat_dims = Vec::new();
        let mut concat_order = Vec::new();
        for (block, f) in self.parts.blocks().iter().zip(&self.factors) {
            v = crate::linalg::kron_vec(&v, f.amplitudes());
            concat_dims.extend(block.iter().map(|&i| self.dims[i]));
            concat_order.extend_from_slice(block);
        }
        let order: Vec<usize> = (0..self.dims.len())
            .map(|i| concat_order.iter().position(|&x| x == i).expect("partition covers"))
            .collect();
        let w = permute_vector(&v, &concat_dims, &order);
        PureState::normalized(self.dims.clone(), w).expect("product of unit vectors")
    }
}

/// Splits off blocks greedily by increasing size: a block `B` splits iff its
/// reduced state has purity `>= 1 - tol`. The smallest splitting block cannot be
/// split further, so the greedy result is the finest factorization.
pub fn factorize_pure(psi: &PureState, tol: f64) -> Result<Factorization> {
    let dims = psi.dims().to_vec();
    let n = dims.len();
    if n > MAX_SUBSYSTEMS {
        return Err(Error::NTooLarge(n));
    }
    let amps = psi.amplitudes();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    'outer: while remaining.len() > 1 {
        for size in 1..remaining.len() {
            for pick in subsets(remaining.len(), size) {
                let b: Vec<usize> = pick.iter().map(|&i| remaining[i]).collect();
                let red = reduced_from_pure(amps, &dims, &b);
                if purity(&red) >= 1.0 - tol {
                    remaining.retain(|x| !b.contains(x));
                    blocks.push(b);
                    continue 'outer;
                }
            }
        }
        break;
    }
    blocks.push(remaining);
    blocks.sort_by_key(|b| b[0]);
    let factors = blocks
        .iter()
        .map(|b| {
            let red = reduced_from_pure(amps, &dims, b);
            let (_, vecs) = hermitian_eigen(&red);
            let bd: Vec<usize> = b.iter().map(|&i| dims[i]).collect();
            PureState::normalized(bd, vecs.column(0).into_owned())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Factorization {
        dims,
        parts: Partition(blocks),
        factors,
    })
}
