//! Values checked against independent brute-force oracles.
//!
//! The oracle affinity here is `Re Tr(ρ^α σ^{1-α})` with both powers formed as
//! full matrices, separate from the library's overlap-sum evaluation.

use nalgebra::SymmetricEigen;
use resource_kit::indicators::{closed_form_k2, indicator, IndicatorKind, IndicatorSpec};
use resource_kit::linalg::{CMatrix, CVector, C64};
use resource_kit::{DensityMatrix, OptimizerOptions, PureState};

use std::f64::consts::{FRAC_PI_2, PI, TAU};

fn mat_pow(m: &CMatrix, t: f64) -> CMatrix {
    let e = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        let l = e.eigenvalues[i];
        if l > 1e-14 {
            let v = e.eigenvectors.column(i);
            out += (v * v.adjoint()).scale(l.powf(t));
        }
    }
    out
}

fn oracle_affinity(rho: &CMatrix, sigma: &CMatrix, alpha: f64) -> f64 {
    (mat_pow(rho, alpha) * mat_pow(sigma, 1.0 - alpha)).trace().re
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn proj(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

fn uniform_superposition(d: usize) -> CMatrix {
    proj(&CVector::from_element(d, c(1.0 / (d as f64).sqrt())))
}

fn state(m: CMatrix, dims: Vec<usize>) -> DensityMatrix {
    DensityMatrix::validate(m, dims).unwrap()
}

/// Largest affinity with the maximally coherent qutrit over mixtures of pure
/// states supported on pairs `{0,1}, {0,2}, {1,2}`: simplex weights, a shared
/// amplitude angle and a shared relative phase, each on a 0.02 grid.
fn qutrit_rank2_grid(alpha: f64) -> f64 {
    let rho = uniform_superposition(3);
    let pair = |i: usize, j: usize, t: f64, phi: f64| {
        let mut v = CVector::zeros(3);
        v[i] = c(t.cos());
        v[j] = C64::from_polar(t.sin(), phi);
        proj(&v)
    };
    let steps = 50;
    let mut best = 0.0f64;
    let eval = |w: [f64; 3], t: f64, phi: f64| {
        let s = pair(0, 1, t, phi).scale(w[0]) + pair(0, 2, t, phi).scale(w[1]) + pair(1, 2, t, phi).scale(w[2]);
        oracle_affinity(&rho, &s, alpha)
    };
    for a in 0..=steps {
        for b in 0..=steps - a {
            let w = [a as f64 / steps as f64, b as f64 / steps as f64, (steps - a - b) as f64 / steps as f64];
            let mut t = 0.0;
            while t <= FRAC_PI_2 {
                best = best.max(eval(w, t, 0.0));
                t += 0.02;
            }
        }
    }
    let third = [1.0 / 3.0; 3];
    let mut phi = 0.0;
    while phi < TAU {
        let mut t = 0.0;
        while t <= FRAC_PI_2 {
            best = best.max(eval(third, t, phi));
            t += 0.02;
        }
        phi += 0.02;
    }
    best
}

/// Bell state against two-term mixtures of `|n(θ)⟩|n(θ)⟩` product states,
/// weights and polar angles on a 0.05 grid.
fn bell_product_grid(alpha: f64) -> f64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = proj(&CVector::from_vec(vec![c(h), c(0.0), c(0.0), c(h)]));
    let prod = |th: f64| {
        let (a, b) = ((th / 2.0).cos(), (th / 2.0).sin());
        proj(&CVector::from_vec(vec![c(a * a), c(a * b), c(a * b), c(b * b)]))
    };
    let grid: Vec<f64> = (0..).map(|i| i as f64 * 0.05).take_while(|&x| x <= PI + 1e-12).collect();
    let mut best = 0.0f64;
    for wi in 0..=20 {
        let w = wi as f64 / 20.0;
        for &t1 in &grid {
            let p1 = prod(t1).scale(w);
            for &t2 in &grid {
                let s = &p1 + prod(t2).scale(1.0 - w);
                best = best.max(oracle_affinity(&bell, &s, alpha));
            }
        }
    }
    best
}

#[test]
fn qutrit_order_three_coherence_matches_grid() {
    let alpha = 0.5;
    let oracle = 1.0 - qutrit_rank2_grid(alpha);
    let rho = state(uniform_superposition(3), vec![3]);
    let r = indicator(
        &rho,
        IndicatorSpec { kind: IndicatorKind::C, k: 3 },
        alpha,
        &OptimizerOptions::with_seed(11),
    )
    .unwrap();
    assert!((r.value - oracle).abs() < 2e-3, "optimizer {} grid {}", r.value, oracle);
}

#[test]
fn bell_separable_two_matches_grid() {
    let alpha = 0.5;
    let oracle = 1.0 - bell_product_grid(alpha);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = PureState::new(vec![2, 2], CVector::from_vec(vec![c(h), c(0.0), c(0.0), c(h)]))
        .unwrap()
        .to_density();
    let spec = IndicatorSpec { kind: IndicatorKind::S, k: 2 };
    let full = indicator(&bell, spec, alpha, &OptimizerOptions::with_seed(5)).unwrap();
    assert!(full.value > 0.0);
    assert!((full.value - oracle).abs() < 2e-3, "optimizer {} grid {}", full.value, oracle);

    let halved = OptimizerOptions {
        restarts: 16,
        ..OptimizerOptions::with_seed(5)
    };
    let half = indicator(&bell, spec, alpha, &halved).unwrap();
    assert!(full.value <= half.value + 1e-12);
}

/// Closed form at k = 2 against a scan over diagonal states.
#[test]
fn closed_form_matches_diagonal_scan() {
    for (d, alpha) in [(2usize, 0.5), (2, 0.3), (3, 0.5), (3, 0.7)] {
        let rho_m = uniform_superposition(d);
        let rho = state(rho_m.clone(), vec![d]);
        let cf = closed_form_k2(&rho, alpha).unwrap();
        let steps = if d == 2 { 1000 } else { 200 };
        let mut best = 0.0f64;
        for a in 0..=steps {
            for b in 0..=(if d == 2 { 0 } else { steps - a }) {
                let mut q = vec![a as f64 / steps as f64];
                if d == 2 {
                    q.push(1.0 - q[0]);
                } else {
                    q.push(b as f64 / steps as f64);
                    q.push(1.0 - q[0] - q[1]);
                }
                let s = CMatrix::from_diagonal(&CVector::from_iterator(d, q.iter().map(|&x| c(x))));
                best = best.max(oracle_affinity(&rho_m, &s, alpha));
            }
        }
        assert!(best <= cf.max_affinity + 1e-12);
        assert!(cf.max_affinity - best < 1e-4, "d={d} α={alpha}: {} vs {best}", cf.max_affinity);
    }
}

#[test]
fn closed_form_anchor_values() {
    let plus = state(uniform_superposition(2), vec![2]);
    let cf = closed_form_k2(&plus, 0.5).unwrap();
    assert!((cf.c - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
    assert!((cf.c_frak - 0.5).abs() < 1e-12);
    for (d, alpha) in [(3usize, 0.5), (4, 0.3), (3, 0.7)] {
        let cf = closed_form_k2(&state(uniform_superposition(d), vec![d]), alpha).unwrap();
        assert!((cf.c - (1.0 - (d as f64).powf(alpha - 1.0))).abs() < 1e-12);
    }
    let diag = DensityMatrix::diagonal(&[0.2, 0.5, 0.3], vec![3]).unwrap();
    let cf = closed_form_k2(&diag, 0.4).unwrap();
    assert!(cf.c.abs() < 1e-12 && cf.c_frak.abs() < 1e-12);
}

#[test]
fn library_affinity_matches_trace_formula() {
    for seed in 0..20u64 {
        let d = 2 + (seed as usize % 3);
        let rho = resource_kit::random::random_mixed(&[d], 1 + seed as usize % d, seed).unwrap();
        let sigma = resource_kit::random::random_mixed(&[d], d, seed + 100).unwrap();
        for alpha in [0.2, 0.5, 0.8] {
            let lib = resource_kit::alpha_affinity(&rho, &sigma, alpha).unwrap().value;
            let ora = oracle_affinity(rho.matrix(), sigma.matrix(), alpha);
            assert!((lib - ora).abs() < 1e-9, "seed {seed}: {lib} vs {ora}");
        }
    }
}

#[test]
fn plus_against_maximally_mixed() {
    let plus = state(uniform_superposition(2), vec![2]);
    let mixed = DensityMatrix::maximally_mixed(vec![2]).unwrap();
    let a = resource_kit::alpha_affinity(&plus, &mixed, 0.5).unwrap().value;
    assert!((a - 0.5f64.sqrt()).abs() < 1e-12);
}
