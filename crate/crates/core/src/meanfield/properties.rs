use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::psi::{omega, psi};
use crate::graph::Graph;
use crate::params::EpidemicParams;

const GRAD_STEP: f64 = 1e-6;
const GRAD_TOL: f64 = 1e-6;
const SECOND_STEP: f64 = 1e-3;
const SECOND_TOL: f64 = 1e-10;
const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub samples: usize,
    /// Largest amount by which a sample missed its requirement; zero or
    /// negative when every sample passed.
    pub worst_violation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertySuiteReport {
    pub checks: Vec<PropertyCheck>,
}

impl PropertySuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Tally {
    samples: usize,
    worst: f64,
    passed: bool,
}

impl Tally {
    fn new() -> Self {
        Self {
            samples: 0,
            worst: f64::NEG_INFINITY,
            passed: true,
        }
    }

    /// Records a sample that passes when `violation <= 0`.
    fn record(&mut self, violation: f64) {
        self.samples += 1;
        self.worst = self.worst.max(violation);
        self.passed &= violation <= 0.0;
    }

    /// Records a sample that passes when `margin > 0`.
    fn record_strict(&mut self, margin: f64) {
        self.samples += 1;
        self.worst = self.worst.max(-margin);
        self.passed &= margin > 0.0;
    }

    fn finish(self, name: &str) -> PropertyCheck {
        PropertyCheck {
            name: name.to_string(),
            samples: self.samples,
            worst_violation: if self.samples == 0 { 0.0 } else { self.worst },
            passed: self.passed,
        }
    }
}

fn xi_node(g: &Graph, beta: f64, u: &[f64], i: usize) -> f64 {
    1.0 - g.neighbors(i).iter().map(|&j| 1.0 - beta * u[j]).product::<f64>()
}

fn bumped(u: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut v = u.to_vec();
    for &(k, h) in moves {
        v[k] += h;
    }
    v
}

fn central_xi(g: &Graph, beta: f64, u: &[f64], i: usize, j: usize) -> f64 {
    let h = GRAD_STEP;
    (xi_node(g, beta, &bumped(u, &[(j, h)]), i) - xi_node(g, beta, &bumped(u, &[(j, -h)]), i)) / (2.0 * h)
}

/// Numerical checks of the structural properties of `Xi` and `omega`:
///
/// * `a`: `Xi(0) = 0` and `dXi_i/dP_I,j = beta A_ij` at the origin
/// * `b`: `dXi_i/dP_I,j` positive for neighbours and zero otherwise
/// * `c`: mixed second differences of `Xi_i` are non-positive
/// * `d`: `omega(0, 0) = 0` and `d omega / dP_I = delta` at `(0, 0)`
/// * `e`: `omega` increasing in `P_I`
/// * `f`: `omega(r, i) / i` increasing in both arguments
/// * `jacobian_origin`: the Jacobian of `Psi` at the origin is `[0 | beta A - delta I]`
///
/// Each randomised property is sampled `samples` times from a generator
/// seeded with `seed`. Needs `beta > 0` and `delta > 0` for the strict
/// inequalities.
pub fn xi_omega_property_suite(g: &Graph, params: &EpidemicParams, samples: usize, seed: u64) -> PropertySuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.node_count();
    let (beta, delta) = (params.beta, params.delta);
    let zeros = vec![0.0; n];
    let mut checks = Vec::new();

    let mut t = Tally::new();
    for _ in 0..samples {
        let i = rng.random_range(0..n);
        t.record(xi_node(g, beta, &zeros, i).abs() - ZERO_TOL);
        for j in 0..n {
            let expected = if g.has_edge(i, j) { beta } else { 0.0 };
            t.record((central_xi(g, beta, &zeros, i, j) - expected).abs() - GRAD_TOL);
        }
    }
    checks.push(t.finish("a"));

    let mut t = Tally::new();
    for _ in 0..samples {
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.99)).collect();
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        let d = central_xi(g, beta, &u, i, j);
        if g.has_edge(i, j) {
            t.record_strict(d);
        } else {
            t.record(d.abs() - ZERO_TOL);
        }
    }
    checks.push(t.finish("b"));

    let mut t = Tally::new();
    for _ in 0..samples {
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.99)).collect();
        let (i, j, k) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
        let h = SECOND_STEP;
        let second = xi_node(g, beta, &bumped(&u, &[(j, h), (k, h)]), i)
            - xi_node(g, beta, &bumped(&u, &[(j, h)]), i)
            - xi_node(g, beta, &bumped(&u, &[(k, h)]), i)
            + xi_node(g, beta, &u, i);
        t.record(second - SECOND_TOL);
    }
    checks.push(t.finish("c"));

    let mut t = Tally::new();
    t.record(omega(delta, 0.0, 0.0).abs() - ZERO_TOL);
    let h = GRAD_STEP;
    let slope = (omega(delta, 0.0, h) - omega(delta, 0.0, -h)) / (2.0 * h);
    t.record((slope - delta).abs() - GRAD_TOL);
    checks.push(t.finish("d"));

    let mut t = Tally::new();
    for _ in 0..samples {
        let i = rng.random_range(0.001..0.98);
        let r = rng.random_range(0.0..(0.99 - i));
        let slope = (omega(delta, r, i + h) - omega(delta, r, i - h)) / (2.0 * h);
        t.record_strict(slope);
    }
    checks.push(t.finish("e"));

    let mut t = Tally::new();
    for _ in 0..samples {
        let (r1, i1, r2, i2) = loop {
            let i1 = rng.random_range(0.001..0.9);
            let i2 = rng.random_range(i1..0.99);
            let r1 = rng.random_range(0.0..(0.99 - i2));
            let r2 = rng.random_range(r1..(0.99 - i2));
            if i1 < i2 && r1 < r2 {
                break (r1, i1, r2, i2);
            }
        };
        t.record_strict(omega(delta, r2, i2) / i2 - omega(delta, r1, i1) / i1);
    }
    checks.push(t.finish("f"));

    let mut t = Tally::new();
    let h = GRAD_STEP;
    for col in 0..2 * n {
        let shift = |s: f64| {
            let mut r = zeros.clone();
            let mut i = zeros.clone();
            if col < n {
                r[col] = s;
            } else {
                i[col - n] = s;
            }
            psi(g, params, &r, &i).expect("origin neighbourhood is inside the domain")
        };
        let (plus, minus) = (shift(h), shift(-h));
        for row in 0..n {
            let fd = (plus[row] - minus[row]) / (2.0 * h);
            let expected = if col < n {
                0.0
            } else {
                let j = col - n;
                (if g.has_edge(row, j) { beta } else { 0.0 }) - if row == j { delta } else { 0.0 }
            };
            t.record((fd - expected).abs() - GRAD_TOL);
        }
    }
    checks.push(t.finish("jacobian_origin"));

    PropertySuiteReport { checks }
}
