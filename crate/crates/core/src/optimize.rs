//! Derivative-free maximization: Nelder–Mead with dimension-adaptive
//! coefficients, restarted in place until a cycle stops improving, and a
//! deterministic multi-start driver.

use std::sync::OnceLock;

use rayon::prelude::*;

/// Environment variable capping the worker threads used for restarts.
pub const THREADS_ENV: &str = "RESOURCE_KIT_THREADS";

static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();

/// Shared worker pool; sized by [`THREADS_ENV`] when set to a positive integer.
pub fn thread_pool() -> &'static rayon::ThreadPool {
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new().thread_name(|i| format!("resource-kit-{i}"));
        if let Some(n) = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
        {
            b = b.num_threads(n);
        }
        b.build().expect("thread pool")
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    /// Iteration budget across all restart cycles.
    pub max_iter: usize,
    /// Stop when the simplex's value spread, or a whole cycle's gain, is at most this.
    pub tol: f64,
    /// Edge length of the initial simplex.
    pub step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            tol: 1e-10,
            step: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

struct Coefficients {
    reflect: f64,
    expand: f64,
    contract: f64,
    shrink: f64,
}

impl Coefficients {
    fn for_dim(n: usize) -> Self {
        if n < 2 {
            return Self {
                reflect: 1.0,
                expand: 2.0,
                contract: 0.5,
                shrink: 0.5,
            };
        }
        let n = n as f64;
        Self {
            reflect: 1.0,
            expand: 1.0 + 2.0 / n,
            contract: 0.75 - 0.5 / n,
            shrink: 1.0 - 1.0 / n,
        }
    }
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

impl NelderMead {
    /// Maximizes `f` from `x0`. NaN values are treated as worst possible.
    pub fn maximize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> LocalOutcome {
        let n = x0.len();
        let mut evaluations = 0usize;
        // minimize h = -f
        let mut h = |x: &[f64]| {
            evaluations += 1;
            let v = -f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut best_x = x0.to_vec();
        let mut best_h = h(&best_x);
        let mut iterations = 0usize;
        if n == 0 {
            return LocalOutcome {
                x: best_x,
                value: -best_h,
                iterations,
                evaluations,
            };
        }
        let c = Coefficients::for_dim(n);
        while iterations < self.max_iter {
            let cycle_start = best_h;
            let mut simplex: Vec<(Vec<f64>, f64)> = vec![(best_x.clone(), best_h)];
            for i in 0..n {
                let mut x = best_x.clone();
                x[i] += self.step;
                let v = h(&x);
                simplex.push((x, v));
            }
            // running sum of all vertices; the centroid excludes the worst
            let mut sum = vec![0.0; n];
            let resum = |simplex: &[(Vec<f64>, f64)], sum: &mut Vec<f64>| {
                sum.iter_mut().for_each(|s| *s = 0.0);
                for (x, _) in simplex {
                    for (s, xi) in sum.iter_mut().zip(x) {
                        *s += xi;
                    }
                }
            };
            resum(&simplex, &mut sum);
            while iterations < self.max_iter {
                simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
                if simplex[n].1 - simplex[0].1 <= self.tol {
                    break;
                }
                iterations += 1;
                if iterations.is_multiple_of(4 * n + 16) {
                    resum(&simplex, &mut sum);
                }
                let worst = simplex[n].0.clone();
                let centroid: Vec<f64> = sum.iter().zip(&worst).map(|(s, w)| (s - w) / n as f64).collect();
                let xr = lerp(&centroid, &worst, -c.reflect);
                let hr = h(&xr);
                let replacement = if hr < simplex[0].1 {
                    let xe = lerp(&centroid, &xr, c.expand);
                    let he = h(&xe);
                    Some(if he < hr { (xe, he) } else { (xr, hr) })
                } else if hr < simplex[n - 1].1 {
                    Some((xr, hr))
                } else {
                    let outside = hr < simplex[n].1;
                    let xc = if outside {
                        lerp(&centroid, &xr, c.contract)
                    } else {
                        lerp(&centroid, &worst, c.contract)
                    };
                    let hc = h(&xc);
                    let accept = if outside { hc <= hr } else { hc < simplex[n].1 };
                    accept.then_some((xc, hc))
                };
                match replacement {
                    Some(entry) => {
                        for ((s, new), old) in sum.iter_mut().zip(&entry.0).zip(&worst) {
                            *s += new - old;
                        }
                        simplex[n] = entry;
                    }
                    None => {
                        let x0 = simplex[0].0.clone();
                        for entry in simplex.iter_mut().skip(1) {
                            let x = lerp(&x0, &entry.0, c.shrink);
                            let v = h(&x);
                            *entry = (x, v);
                        }
                        resum(&simplex, &mut sum);
                    }
                }
            }
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[0].1 < best_h {
                best_h = simplex[0].1;
                best_x = simplex[0].0.clone();
            }
            if cycle_start - best_h <= self.tol {
                break;
            }
        }
        LocalOutcome {
            x: best_x,
            value: -best_h,
            iterations,
            evaluations,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiOutcome {
    /// Index into the start list of the winning run.
    pub best_index: usize,
    pub runs: Vec<LocalOutcome>,
}

impl MultiOutcome {
    pub fn best(&self) -> &LocalOutcome {
        &self.runs[self.best_index]
    }
}

/// Runs one local search per start point in parallel. The winner is the
/// largest value, ties going to the lowest index, so the result does not
/// depend on scheduling.
pub fn multistart<F>(f: F, starts: &[Vec<f64>], nm: &NelderMead) -> MultiOutcome
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    assert!(!starts.is_empty(), "multistart needs at least one start");
    let runs: Vec<LocalOutcome> =
        thread_pool().install(|| starts.par_iter().map(|x0| nm.maximize(&f, x0)).collect());
    let mut best_index = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value > runs[best_index].value {
            best_index = i;
        }
    }
    MultiOutcome { best_index, runs }
}
