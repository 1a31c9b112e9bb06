//! Dense reference implementations shared by integration tests.

#![allow(dead_code)]

use sirsnet_core::{EpidemicParams, Graph, Variant};

/// Row-major `3^n x 3^n` transition matrix assembled state by state from
/// the per-node tables.
pub fn dense_transition_matrix(g: &Graph, p: &EpidemicParams) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let size = 3usize.pow(n as u32);
    let digits = |code: usize| -> Vec<usize> { (0..n).map(|i| (code / 3usize.pow(i as u32)) % 3).collect() };
    let mut m = vec![vec![0.0; size]; size];
    for (from, row) in m.iter_mut().enumerate() {
        let x = digits(from);
        let tables: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                let infected = g.neighbors(i).iter().filter(|&&j| x[j] == 1).count();
                let q = (1.0 - p.beta).powi(infected as i32);
                match x[i] {
                    1 => [0.0, 1.0 - p.delta, p.delta],
                    2 => [p.gamma, 0.0, 1.0 - p.gamma],
                    _ => match p.variant {
                        Variant::Sirs => [q, 1.0 - q, 0.0],
                        Variant::SivInfectionDominant => [q * (1.0 - p.theta), 1.0 - q, q * p.theta],
                        Variant::SivVaccinationDominant => {
                            [q * (1.0 - p.theta), (1.0 - q) * (1.0 - p.theta), p.theta]
                        }
                    },
                }
            })
            .collect();
        for (to, cell) in row.iter_mut().enumerate() {
            *cell = digits(to).iter().enumerate().map(|(i, &d)| tables[i][d]).product();
        }
    }
    m
}

/// `mu <- mu M`.
pub fn dense_step(m: &[Vec<f64>], mu: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; mu.len()];
    for (from, &w) in mu.iter().enumerate() {
        if w != 0.0 {
            for (to, &pr) in m[from].iter().enumerate() {
                out[to] += w * pr;
            }
        }
    }
    out
}

/// `(p_R, p_I)` marginals of a dense distribution.
pub fn dense_marginals(n: usize, mu: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut r = vec![0.0; n];
    let mut i = vec![0.0; n];
    for (code, &w) in mu.iter().enumerate() {
        for k in 0..n {
            match (code / 3usize.pow(k as u32)) % 3 {
                1 => i[k] += w,
                2 => r[k] += w,
                _ => {}
            }
        }
    }
    (r, i)
}

pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
