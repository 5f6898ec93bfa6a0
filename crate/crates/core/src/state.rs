//! Quantum states: validated density matrices, pure states and pure-state ensembles.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_deviation, hermitian_eigen, kron, kron_vec, partial_trace_matrix,
    spectral_apply, CMatrix, CVector, C64, ONE, ZERO,
};

/// Maximum tolerated `|ρ - ρ†|` entry.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero; anything lower is rejected.
pub const PSD_TOL: f64 = 1e-10;
/// Traces further than this from one are rejected.
pub const TRACE_REJECT_TOL: f64 = 1e-8;
/// Traces within this of one are kept bit-for-bit.
const TRACE_EXACT_TOL: f64 = 1e-12;
/// Unit-norm tolerance for pure states.
pub const NORM_TOL: f64 = 1e-10;

/// Eigen-decomposition of a density matrix; eigenvalues descending and clamped at zero.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    pub fn reconstruct(&self) -> CMatrix {
        spectral_apply(&self.values, &self.vectors, |x| x)
    }

    /// `f(ρ)` for a spectral function `f`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        spectral_apply(&self.values, &self.vectors, f)
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix on a tensor product of subsystems.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    data: CMatrix,
    spectrum: OnceLock<Spectrum>,
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims && self.data == other.data
    }
}

fn check_dims(n: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimensions must be positive, got {dims:?}"
        )));
    }
    let d: usize = dims.iter().product();
    if d != n {
        return Err(Error::DimensionMismatch(format!(
            "dims {dims:?} multiply to {d}, matrix side is {n}"
        )));
    }
    Ok(())
}

fn clamped_spectrum(values: Vec<f64>, vectors: CMatrix, scale: f64) -> Spectrum {
    Spectrum {
        values: values.into_iter().map(|x| x.max(0.0) * scale).collect(),
        vectors,
    }
}

impl DensityMatrix {
    /// Checks `matrix` and wraps it as a density matrix over `dims`.
    ///
    /// The stored data is kept bit-for-bit unless the trace is off by more than
    /// 1e-12, in which case it is divided by its trace.
    pub fn validate(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c {
            return Err(Error::DimensionMismatch(format!("matrix is {r}x{c}")));
        }
        check_dims(r, &dims)?;
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("matrix has non-finite entries".into()));
        }
        let dev = hermitian_deviation(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let (values, vectors) = hermitian_eigen(&matrix);
        let min = values.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        let tr: f64 = matrix.diagonal().iter().map(|z| z.re).sum();
        if (tr - 1.0).abs() > TRACE_REJECT_TOL {
            return Err(Error::TraceDeviation(tr));
        }
        let (data, scale) = if (tr - 1.0).abs() > TRACE_EXACT_TOL {
            (matrix / C64::new(tr, 0.0), 1.0 / tr)
        } else {
            (matrix, 1.0)
        };
        let spectrum = OnceLock::new();
        let _ = spectrum.set(clamped_spectrum(values, vectors, scale));
        Ok(Self { dims, data, spectrum })
    }

    /// Wraps a matrix already known to be a density matrix up to round-off.
    pub(crate) fn from_trusted(data: CMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(data.nrows(), dims.iter().product::<usize>());
        Self {
            dims,
            data,
            spectrum: OnceLock::new(),
        }
    }

    /// Hermitian-symmetrizes and trace-normalizes an internally produced matrix.
    pub(crate) fn from_trusted_normalized(data: CMatrix, dims: Vec<usize>) -> Self {
        let sym = (&data + data.adjoint()) * C64::new(0.5, 0.0);
        let tr: f64 = sym.diagonal().iter().map(|z| z.re).sum();
        Self::from_trusted(sym / C64::new(tr, 0.0), dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        check_dims(d, &dims)?;
        Ok(Self::from_trusted(
            CMatrix::identity(d, d) / C64::new(d as f64, 0.0),
            dims,
        ))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self::from_trusted(psi.projector(), psi.dims.clone())
    }

    /// Diagonal state `Σ p_i |i><i|` (probabilities need not be normalized exactly).
    pub fn diagonal(probs: &[f64], dims: Vec<usize>) -> Result<Self> {
        check_dims(probs.len(), &dims)?;
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::BadWeights("negative diagonal entry".into()));
        }
        let s: f64 = probs.iter().sum();
        if s <= 0.0 {
            return Err(Error::BadWeights("zero total weight".into()));
        }
        let m = CMatrix::from_diagonal(&CVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| C64::new(p / s, 0.0)),
        ));
        Ok(Self::from_trusted(m, dims))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let (values, vectors) = hermitian_eigen(&self.data);
            clamped_spectrum(values, vectors, 1.0)
        })
    }

    /// `ρ^t` for `0 < t <= 1`, with `0^t = 0`.
    pub fn frac_power(&self, t: f64) -> Result<CMatrix> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::BadExponent(format!("power {t} outside (0, 1]")));
        }
        if t == 1.0 {
            return Ok(self.data.clone());
        }
        Ok(self.spectrum().apply(|x| linalg::floored_pow(x, t)))
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn trace(&self) -> f64 {
        self.data.diagonal().iter().map(|z| z.re).sum()
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_dims(other)?;
        let diff = &self.data - &other.data;
        let (vals, _) = hermitian_eigen(&diff);
        Ok(0.5 * vals.iter().map(|x| x.abs()).sum::<f64>())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_trusted(kron(&self.data, &other.data), dims)
    }

    /// Reduced state on the subsystems in `keep`, listed in ascending order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let keep = normalize_subset(keep, self.dims.len())?;
        let m = partial_trace_matrix(&self.data, &self.dims, &keep);
        let dims = keep.iter().map(|&i| self.dims[i]).collect();
        Ok(Self::from_trusted(m, dims))
    }

    /// `U ρ U†` for a unitary `U`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, state dimension {}",
                u.nrows(),
                u.ncols(),
                self.dim()
            )));
        }
        Ok(Self::from_trusted_normalized(
            u * &self.data * u.adjoint(),
            self.dims.clone(),
        ))
    }

    /// Convex combination `Σ p_i ρ_i`; weights are renormalized.
    pub fn mixture(terms: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::BadWeights("empty mixture".into()))?
            .1;
        let mut acc = CMatrix::zeros(first.dim(), first.dim());
        let mut total = 0.0;
        for (p, rho) in terms {
            first.check_same_dims(rho)?;
            if *p < 0.0 {
                return Err(Error::BadWeights("negative mixture weight".into()));
            }
            acc += rho.matrix() * C64::new(*p, 0.0);
            total += p;
        }
        if total <= 0.0 {
            return Err(Error::BadWeights("zero total weight".into()));
        }
        Ok(Self::from_trusted_normalized(acc, first.dims.clone()))
    }

    pub(crate) fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }
}

pub(crate) fn normalize_subset(keep: &[usize], n: usize) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::BadIndex("empty subsystem set".into()));
    }
    let mut k = keep.to_vec();
    k.sort_unstable();
    k.dedup();
    if let Some(&bad) = k.iter().find(|&&i| i >= n) {
        return Err(Error::BadIndex(format!(
            "index {bad} out of range for {n} subsystems"
        )));
    }
    Ok(k)
}

/// Unit vector with canonical global phase: the first nonzero amplitude is real and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amps: CVector,
}

/// Amplitudes at or below this modulus do not fix the global phase.
const PHASE_REF_TOL: f64 = 1e-12;

impl PureState {
    pub fn new(dims: Vec<usize>, amps: CVector) -> Result<Self> {
        check_dims(amps.len(), &dims)?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self::canonical(dims, amps))
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(dims: Vec<usize>, amps: CVector) -> Result<Self> {
        check_dims(amps.len(), &dims)?;
        let norm = amps.norm();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self::canonical(dims, amps / C64::new(norm, 0.0)))
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let d: usize = dims.iter().product();
        if index >= d {
            return Err(Error::BadIndex(format!("basis index {index} >= {d}")));
        }
        let mut v = CVector::zeros(d);
        v[index] = ONE;
        Self::new(dims, v)
    }

    fn canonical(dims: Vec<usize>, mut amps: CVector) -> Self {
        if let Some(c) = amps.iter().find(|c| c.norm() > PHASE_REF_TOL).copied() {
            let phase = c.conj() / c.norm();
            amps.iter_mut().for_each(|a| *a *= phase);
            // the reference amplitude is real by construction
            if let Some(a) = amps.iter_mut().find(|c| c.norm() > PHASE_REF_TOL) {
                a.im = 0.0;
            }
        }
        Self { dims, amps }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn projector(&self) -> CMatrix {
        linalg::outer(&self.amps)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::canonical(dims, kron_vec(&self.amps, &other.amps))
    }

    /// `|<self|other>|²`.
    pub fn overlap_sq(&self, other: &Self) -> f64 {
        self.amps.dotc(&other.amps).norm_sqr()
    }

    /// Applies an operator and renormalizes; `None` if the image vanishes.
    pub fn apply(&self, op: &CMatrix) -> Option<(f64, Self)> {
        if op.ncols() != self.dim() {
            return None;
        }
        let v = op * &self.amps;
        let n2 = v.norm_squared();
        if n2 <= 0.0 {
            return None;
        }
        let dims = if op.nrows() == self.dim() {
            self.dims.clone()
        } else {
            vec![op.nrows()]
        };
        Some((n2, Self::canonical(dims, v / C64::new(n2.sqrt(), 0.0))))
    }
}

/// Finite convex mixture of pure states `Σ w_i |ψ_i><ψ_i|`.
///
/// Witnesses are carried as ensembles so that their set membership can be
/// re-checked term by term.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    dims: Vec<usize>,
    terms: Vec<(f64, PureState)>,
}

impl Ensemble {
    /// Builds an ensemble, dropping zero-weight terms and renormalizing weights.
    pub fn new(terms: Vec<(f64, PureState)>) -> Result<Self> {
        let dims = terms
            .first()
            .ok_or_else(|| Error::BadWeights("empty ensemble".into()))?
            .1
            .dims
            .clone();
        if terms.iter().any(|(w, p)| *w < 0.0 || !w.is_finite() || p.dims != dims) {
            return Err(Error::BadWeights(
                "ensemble weights must be nonnegative and terms share dims".into(),
            ));
        }
        let total: f64 = terms.iter().map(|(w, _)| w).sum();
        if total <= 0.0 {
            return Err(Error::BadWeights("zero total weight".into()));
        }
        let terms = terms
            .into_iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, p)| (w / total, p))
            .collect();
        Ok(Self { dims, terms })
    }

    pub fn pure(psi: PureState) -> Self {
        Self {
            dims: psi.dims.clone(),
            terms: vec![(1.0, psi)],
        }
    }

    /// Spectral ensemble of a density matrix (eigenvalues above the floor).
    pub fn from_spectrum(rho: &DensityMatrix) -> Self {
        let sp = rho.spectrum();
        let mut terms = Vec::new();
        for (k, &lam) in sp.values.iter().enumerate() {
            if lam > linalg::EIGEN_FLOOR {
                let v = sp.vectors.column(k).into_owned();
                if let Ok(p) = PureState::normalized(rho.dims.clone(), v) {
                    terms.push((lam, p));
                }
            }
        }
        Self::new(terms).expect("density matrix has positive trace")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn terms(&self) -> &[(f64, PureState)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_matrix(&self) -> CMatrix {
        let d: usize = self.dims.iter().product();
        let mut acc = CMatrix::zeros(d, d);
        for (w, p) in &self.terms {
            let a = p.amplitudes();
            for i in 0..d {
                let ai = a[i] * *w;
                if ai == ZERO {
                    continue;
                }
                for j in 0..d {
                    acc[(i, j)] += ai * a[j].conj();
                }
            }
        }
        acc
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_trusted_normalized(self.to_matrix(), self.dims.clone())
    }

    /// Term-wise tensor product.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for (w1, p1) in &self.terms {
            for (w2, p2) in &other.terms {
                terms.push((w1 * w2, p1.tensor(p2)));
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, terms }
    }

    /// `Σ p_i E_i` as a single ensemble.
    pub fn mixture(parts: &[(f64, &Ensemble)]) -> Result<Self> {
        let mut terms = Vec::new();
        for (p, e) in parts {
            for (w, psi) in &e.terms {
                terms.push((p * w, psi.clone()));
            }
        }
        Self::new(terms)
    }

    /// `U E U†` term by term.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|(w, p)| {
                p.apply(u)
                    .map(|(_, q)| (*w, q))
                    .ok_or_else(|| Error::DimensionMismatch("unitary shape".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }
}
