//! Fixed inputs shared by the benchmarks.

use resource_kit::random::random_mixed;
use resource_kit::{CVector, DensityMatrix, PureState, C64};

pub fn mixed(dims: &[usize], seed: u64) -> DensityMatrix {
    let d: usize = dims.iter().product();
    random_mixed(dims, d, seed).expect("valid dims")
}

pub fn ghz(n: usize) -> DensityMatrix {
    let d = 1 << n;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = CVector::zeros(d);
    v[0] = C64::new(h, 0.0);
    v[d - 1] = C64::new(h, 0.0);
    PureState::new(vec![2; n], v).expect("normalized").to_density()
}
