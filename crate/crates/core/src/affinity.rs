//! The α-affinity `A_α(ρ, σ) = Tr(ρ^α σ^{1-α})` and inequality certificates.
//!
//! The trace is evaluated in the two eigenbases,
//! `A = Σ_{ij} λ_i^α μ_j^{1-α} |<u_i|v_j>|²`, which is real and nonnegative by
//! construction. Eigenvalues at or below [`EIGEN_FLOOR`](crate::linalg::EIGEN_FLOOR)
//! count as zero.
//!
//! Certificates hold both sides of a claimed inequality `lhs <= rhs` and the signed
//! slack `rhs - lhs`; deciding pass or fail is left to the caller.

use serde::Serialize;

use crate::channels::{KrausChannel, OUTCOME_FLOOR};
use crate::error::{check_alpha, Error, Result};
use crate::linalg::{floored_pow, hermitian_eigen, kron, CMatrix, C64};
use crate::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffinityValue {
    pub value: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// `lhs <= rhs`.
    AtMost,
    /// `lhs == rhs`.
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCertificate {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub claim: Claim,
}

impl InequalityCertificate {
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            label: label.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            claim: Claim::AtMost,
        }
    }

    pub fn equality(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            claim: Claim::Equal,
            ..Self::new(label, lhs, rhs)
        }
    }

    /// `slack >= -tol` for inequalities, `|slack| <= tol` for equalities.
    /// NaN never passes.
    pub fn holds(&self, tol: f64) -> bool {
        match self.claim {
            Claim::AtMost => self.slack >= -tol,
            Claim::Equal => self.slack.abs() <= tol,
        }
    }
}

/// Overlap form of `Tr(a^α b^{1-α})` for positive semidefinite `a`, `b`
/// (not necessarily normalized).
pub fn affinity_psd(a: &CMatrix, b: &CMatrix, alpha: f64) -> f64 {
    let (la, ua) = hermitian_eigen(a);
    let (lb, ub) = hermitian_eigen(b);
    let overlaps = ua.adjoint() * ub;
    let pa: Vec<f64> = la.iter().map(|&x| floored_pow(x, alpha)).collect();
    let pb: Vec<f64> = lb.iter().map(|&x| floored_pow(x, 1.0 - alpha)).collect();
    let mut acc = 0.0;
    for (i, &wa) in pa.iter().enumerate() {
        if wa == 0.0 {
            continue;
        }
        for (j, &wb) in pb.iter().enumerate() {
            if wb != 0.0 {
                acc += wa * wb * overlaps[(i, j)].norm_sqr();
            }
        }
    }
    acc
}

/// `Tr(P σ^{1-α})` with `P = ρ^α` precomputed; the optimizer's inner objective.
pub(crate) fn affinity_with_power(rho_alpha: &CMatrix, sigma: &CMatrix, alpha: f64) -> f64 {
    let (mu, v) = hermitian_eigen(sigma);
    let pv = rho_alpha * &v;
    let mut acc = 0.0;
    for (j, &m) in mu.iter().enumerate() {
        let w = floored_pow(m, 1.0 - alpha);
        if w == 0.0 {
            continue;
        }
        acc += w * v.column(j).dotc(&pv.column(j)).re;
    }
    acc
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// `A_α(ρ, σ)` for `0 < α < 1`, clamped to `[0, 1]`.
pub fn alpha_affinity(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<AffinityValue> {
    check_alpha(alpha)?;
    rho.check_same_dims(sigma)?;
    let sr = rho.spectrum();
    let ss = sigma.spectrum();
    let overlaps = sr.vectors.adjoint() * &ss.vectors;
    let mut acc = 0.0;
    for (i, &l) in sr.values.iter().enumerate() {
        let wa = floored_pow(l, alpha);
        if wa == 0.0 {
            continue;
        }
        for (j, &m) in ss.values.iter().enumerate() {
            let wb = floored_pow(m, 1.0 - alpha);
            if wb != 0.0 {
                acc += wa * wb * overlaps[(i, j)].norm_sqr();
            }
        }
    }
    Ok(AffinityValue {
        value: clamp_unit(acc),
        alpha,
    })
}

/// For positive `a`, `b`, `p > 0 > q` and `u = max{1, 1/p + 1/q}`,
/// `n^{1-u} ||a||_p ||b||_q <= Σ a_m b_m`.
pub fn holder_negative_exponent_bound(a: &[f64], b: &[f64], p: f64, q: f64) -> Result<InequalityCertificate> {
    if !(p > 0.0 && p.is_finite()) || !(q < 0.0 && q.is_finite()) {
        return Err(Error::BadExponent(format!("need p > 0 > q, got p={p}, q={q}")));
    }
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("lengths {} and {}", a.len(), b.len())));
    }
    if a.iter().chain(b).any(|&x| x <= 0.0 || x.is_nan()) {
        return Err(Error::NonPositiveEntry);
    }
    let n = a.len() as f64;
    let u = (1.0 / p + 1.0 / q).max(1.0);
    let np = a.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p);
    let nq = b.iter().map(|x| x.powf(q)).sum::<f64>().powf(1.0 / q);
    let lhs = n.powf(1.0 - u) * np * nq;
    let rhs = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok(InequalityCertificate::new("holder_negative_exponent", lhs, rhs))
}

/// `(Σ x_m)^t <= Σ x_m^t q_m^{1-t}` for `t > 1` and a probability vector `q`.
pub fn power_mean_bound(x: &[f64], qvec: &[f64], t: f64) -> Result<InequalityCertificate> {
    if !(t > 1.0 && t.is_finite()) {
        return Err(Error::BadExponent(format!("need t > 1, got {t}")));
    }
    if x.is_empty() || x.len() != qvec.len() {
        return Err(Error::DimensionMismatch(format!("lengths {} and {}", x.len(), qvec.len())));
    }
    let total: f64 = qvec.iter().sum();
    if (total - 1.0).abs() > 1e-12 || qvec.iter().any(|&w| w <= 0.0 || w.is_nan()) {
        return Err(Error::BadWeights(format!("weights must be positive and sum to 1, sum={total}")));
    }
    if x.iter().any(|&v| v <= 0.0 || v.is_nan()) {
        return Err(Error::NonPositiveEntry);
    }
    let lhs = x.iter().sum::<f64>().powf(t);
    let rhs = x.iter().zip(qvec).map(|(v, w)| v.powf(t) * w.powf(1.0 - t)).sum();
    Ok(InequalityCertificate::new("power_mean", lhs, rhs))
}

struct Branches {
    rho: Vec<CMatrix>,
    sigma: Vec<CMatrix>,
}

fn branches(rho: &DensityMatrix, sigma: &DensityMatrix, channel: &KrausChannel, alpha: f64) -> Result<Branches> {
    check_alpha(alpha)?;
    rho.check_same_dims(sigma)?;
    if channel.dims() != rho.dims() {
        return Err(Error::DimensionMismatch(format!(
            "channel acts on {:?}, states on {:?}",
            channel.dims(),
            rho.dims()
        )));
    }
    let n = channel.outcomes();
    Ok(Branches {
        rho: (0..n).map(|i| channel.branch(i, rho)).collect(),
        sigma: (0..n).map(|i| channel.branch(i, sigma)).collect(),
    })
}

fn tr(m: &CMatrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// Retained outcomes: `(p_i, q_i, A_α(p_iρ_i, q_iσ_i), A_α(ρ_i, σ_i))`.
fn retained(b: &Branches, alpha: f64) -> Vec<(f64, f64, f64, f64)> {
    b.rho
        .iter()
        .zip(&b.sigma)
        .filter_map(|(r, s)| {
            let (p, q) = (tr(r), tr(s));
            if p <= OUTCOME_FLOOR || q <= OUTCOME_FLOOR {
                return None;
            }
            let raw = affinity_psd(r, s, alpha);
            let norm = clamp_unit(raw / (p.powf(alpha) * q.powf(1.0 - alpha)));
            Some((p, q, raw, norm))
        })
        .collect()
}

/// `[Σ_i A_α(p_iρ_i, q_iσ_i)]^{1/α} <= Σ_i p_i A_α(ρ_i, σ_i)^{1/α}`.
pub fn selective_power_sum(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &KrausChannel,
    alpha: f64,
) -> Result<InequalityCertificate> {
    let b = branches(rho, sigma, channel, alpha)?;
    let kept = retained(&b, alpha);
    let lhs = kept.iter().map(|k| k.2).sum::<f64>().powf(1.0 / alpha);
    let rhs = kept.iter().map(|k| k.0 * k.3.powf(1.0 / alpha)).sum();
    Ok(InequalityCertificate::new("selective_power_sum", lhs, rhs))
}

/// Equality of the affinity of flagged block-diagonal states `Σ_i K_iρK_i† ⊗ |i><i|`
/// with the sum of branch affinities.
pub fn block_diagonal_affinity(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &KrausChannel,
    alpha: f64,
) -> Result<InequalityCertificate> {
    let b = branches(rho, sigma, channel, alpha)?;
    let n = channel.outcomes();
    let flag = |i: usize| {
        let mut f = CMatrix::zeros(n, n);
        f[(i, i)] = C64::new(1.0, 0.0);
        f
    };
    let d_out = b.rho[0].nrows();
    let mut big_r = CMatrix::zeros(d_out * n, d_out * n);
    let mut big_s = CMatrix::zeros(d_out * n, d_out * n);
    for i in 0..n {
        big_r += kron(&b.rho[i], &flag(i));
        big_s += kron(&b.sigma[i], &flag(i));
    }
    let lhs = affinity_psd(&big_r, &big_s, alpha);
    let rhs = b
        .rho
        .iter()
        .zip(&b.sigma)
        .map(|(r, s)| affinity_psd(r, s, alpha))
        .sum();
    Ok(InequalityCertificate::equality("block_diagonal", lhs, rhs))
}

/// `A_α(ρ, σ) <= Σ_i A_α(K_iρK_i†, K_iσK_i†)`.
pub fn data_processing_sum(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &KrausChannel,
    alpha: f64,
) -> Result<InequalityCertificate> {
    let b = branches(rho, sigma, channel, alpha)?;
    let lhs = alpha_affinity(rho, sigma, alpha)?.value;
    let rhs = b
        .rho
        .iter()
        .zip(&b.sigma)
        .map(|(r, s)| affinity_psd(r, s, alpha))
        .sum();
    Ok(InequalityCertificate::new("data_processing_sum", lhs, rhs))
}

/// `Σ_i p_i (1 - A_α(ρ_i, σ_i)^{1/α}) <= 1 - A_α(ρ, σ)^{1/α}`.
pub fn selective_loss_bound(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &KrausChannel,
    alpha: f64,
) -> Result<InequalityCertificate> {
    let b = branches(rho, sigma, channel, alpha)?;
    let kept = retained(&b, alpha);
    let lhs = kept.iter().map(|k| k.0 * (1.0 - k.3.powf(1.0 / alpha))).sum();
    let rhs = 1.0 - alpha_affinity(rho, sigma, alpha)?.value.powf(1.0 / alpha);
    Ok(InequalityCertificate::new("selective_loss", lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CVector;
    use crate::random::{haar_unitary, random_mixed, random_mixed_with, rng_from_seed};
    use crate::state::PureState;
    use rand::Rng;

    fn plus() -> DensityMatrix {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        PureState::new(vec![2], CVector::from_vec(vec![h, h]))
            .unwrap()
            .to_density()
    }

    #[test]
    fn plus_against_maximally_mixed() {
        let mm = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        let a = alpha_affinity(&plus(), &mm, 0.5).unwrap();
        assert!((a.value - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn self_affinity_is_one() {
        for seed in 0..20 {
            let rho = random_mixed(&[3], 1 + (seed as usize % 3), seed).unwrap();
            for alpha in [0.1, 0.5, 0.9] {
                let a = alpha_affinity(&rho, &rho, alpha).unwrap().value;
                assert!((a - 1.0).abs() < 1e-10, "{a}");
            }
        }
    }

    #[test]
    fn orthogonal_pure_states() {
        let a = PureState::basis(vec![3], 0).unwrap().to_density();
        let b = PureState::basis(vec![3], 2).unwrap().to_density();
        assert_eq!(alpha_affinity(&a, &b, 0.3).unwrap().value, 0.0);
    }

    #[test]
    fn rejects_bad_alpha_and_dims() {
        let a = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        let b = DensityMatrix::maximally_mixed(vec![3]).unwrap();
        assert!(matches!(alpha_affinity(&a, &a, 1.0), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(alpha_affinity(&a, &a, 0.0), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(alpha_affinity(&a, &b, 0.5), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn inner_objective_matches_public_affinity() {
        let mut rng = rng_from_seed(9);
        for _ in 0..10 {
            let rho = random_mixed_with(&[4], 2, &mut rng).unwrap();
            let sigma = random_mixed_with(&[4], 4, &mut rng).unwrap();
            let alpha = rng.random_range(0.05..0.95);
            let p = rho.frac_power(alpha).unwrap();
            let fast = affinity_with_power(&p, sigma.matrix(), alpha);
            let slow = alpha_affinity(&rho, &sigma, alpha).unwrap().value;
            assert!((fast - slow).abs() < 1e-12);
        }
    }

    #[test]
    fn holder_trivial_cases() {
        let c = holder_negative_exponent_bound(&[1.0; 4], &[1.0; 4], 2.0, -1.0).unwrap();
        assert!(c.slack >= -1e-12);
        let c = holder_negative_exponent_bound(&[3.0], &[0.5], 0.7, -2.0).unwrap();
        assert!(c.slack.abs() < 1e-12);
        assert!(matches!(
            holder_negative_exponent_bound(&[1.0], &[1.0], 1.0, 1.0),
            Err(Error::BadExponent(_))
        ));
        assert!(matches!(
            holder_negative_exponent_bound(&[1.0, 0.0], &[1.0, 1.0], 1.0, -1.0),
            Err(Error::NonPositiveEntry)
        ));
    }

    #[test]
    fn power_mean_equality_at_proportional_weights() {
        let x = [0.3, 1.7, 2.0];
        let s: f64 = x.iter().sum();
        let q: Vec<f64> = x.iter().map(|v| v / s).collect();
        let c = power_mean_bound(&x, &q, 2.5).unwrap();
        assert!(c.slack.abs() < 1e-10);
        let c = power_mean_bound(&[4.0], &[1.0], 3.0).unwrap();
        assert!(c.slack.abs() < 1e-12);
        assert!(matches!(power_mean_bound(&[1.0, 1.0], &[0.5, 0.6], 2.0), Err(Error::BadWeights(_))));
    }

    #[test]
    fn dephasing_block_diagonal_equality() {
        let rho = random_mixed(&[2], 2, 3).unwrap();
        let sigma = random_mixed(&[2], 2, 4).unwrap();
        let c = block_diagonal_affinity(&rho, &sigma, &KrausChannel::dephasing(2), 0.5).unwrap();
        assert!(c.holds(1e-10), "{c:?}");
    }

    #[test]
    fn unitary_channel_certificates_are_tight() {
        let mut rng = rng_from_seed(5);
        let u = haar_unitary(3, &mut rng);
        let ch = KrausChannel::unitary(u, vec![3]).unwrap();
        let rho = random_mixed(&[3], 3, 10).unwrap();
        let sigma = random_mixed(&[3], 2, 11).unwrap();
        let base = alpha_affinity(&rho, &sigma, 0.4).unwrap().value;
        let b2 = selective_power_sum(&rho, &sigma, &ch, 0.4).unwrap();
        assert!((b2.lhs - base.powf(2.5)).abs() < 1e-9 && b2.slack.abs() < 1e-9);
        for c in [
            data_processing_sum(&rho, &sigma, &ch, 0.4).unwrap(),
            selective_loss_bound(&rho, &sigma, &ch, 0.4).unwrap(),
            block_diagonal_affinity(&rho, &sigma, &ch, 0.4).unwrap(),
        ] {
            assert!(c.slack.abs() < 1e-9, "{c:?}");
        }
    }

    #[test]
    fn identical_states_give_trivial_certificates() {
        let rho = random_mixed(&[3], 3, 12).unwrap();
        let ch = KrausChannel::make_monomial_incoherent(3, 3, 13).unwrap();
        let b5 = selective_loss_bound(&rho, &rho, &ch, 0.5).unwrap();
        assert!(b5.lhs.abs() < 1e-9 && b5.rhs.abs() < 1e-9);
        let b2 = selective_power_sum(&rho, &rho, &ch, 0.5).unwrap();
        assert!((b2.lhs - 1.0).abs() < 1e-9 && (b2.rhs - 1.0).abs() < 1e-9);
        let b4 = data_processing_sum(&rho, &rho, &ch, 0.5).unwrap();
        assert!((b4.lhs - 1.0).abs() < 1e-12 && b4.holds(1e-9));
    }
}
