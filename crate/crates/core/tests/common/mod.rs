//! Independent oracles shared by the integration tests.

#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use regmoment::state::GradState;

/// Roots of `He_n` from the symmetric Jacobi matrix.
pub fn hermite_roots(n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let mut r: Vec<f64> = SymmetricEigen::new(j).eigenvalues.iter().copied().collect();
    r.sort_by(|a, b| a.total_cmp(b));
    r
}

/// Gauss rule for the standard normal density: `(nodes, weights)`, exact
/// for polynomials of degree `< 2n`.
pub fn gauss_normal(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let e = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (e.eigenvalues[i], e.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `He_0(x) .. He_n(x)` by the three-term recurrence.
pub fn he_all(n: usize, x: f64) -> Vec<f64> {
    let mut h = vec![1.0; n + 1];
    if n >= 1 {
        h[1] = x;
    }
    for k in 1..n {
        h[k + 1] = x * h[k] - k as f64 * h[k - 1];
    }
    h
}

/// All exponent tuples in `d` variables with total degree `<= k`.
pub fn exponents(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; d];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[pos] = e;
            rec(pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, k, &mut cur, &mut out);
    out
}

/// `int xi^e f(xi) dxi` for every exponent tuple in `exps`, by tensor
/// Gauss quadrature in the frame of `f`.
pub fn moments(f: &GradState, exps: &[Vec<usize>]) -> Vec<f64> {
    let d = f.dim();
    let m = f.order();
    let kmax = exps
        .iter()
        .map(|e| e.iter().sum::<usize>())
        .max()
        .unwrap_or(0);
    let n = (m + kmax) / 2 + 2;
    let (x, w) = gauss_normal(n);
    let sq = f.theta().sqrt();
    let map = f.map();
    let mut out = vec![0.0; exps.len()];
    let total = n.pow(d as u32);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let v: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
        let weight: f64 = idx.iter().map(|&i| w[i]).product();
        let he: Vec<Vec<f64>> = v.iter().map(|&t| he_all(m, t)).collect();
        let mut dens = 0.0;
        for (i, &c) in f.coeffs().iter().enumerate() {
            let a = map.components(i);
            let mut p = c * sq.powi(-(a.iter().map(|&k| k as i32).sum::<i32>()));
            for (dd, &k) in a.iter().enumerate() {
                p *= he[dd][k as usize];
            }
            dens += p;
        }
        let xi: Vec<f64> = v.iter().zip(f.u()).map(|(t, u)| u + sq * t).collect();
        for (o, e) in out.iter_mut().zip(exps) {
            let mut p = 1.0;
            for (a, &k) in xi.iter().zip(e) {
                p *= a.powi(k as i32);
            }
            *o += weight * dens * p;
        }
        for k in 0..d {
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

/// A random expansion: frame `u` in `[-1, 1]^d`, `theta` in `[0.5, 2]`,
/// `f_0` in `[0.5, 2]` and higher coefficients up to `0.1 f_0 theta^{|a|/2}`.
pub fn random_state(rng: &mut ChaCha8Rng, order: usize, d: usize) -> GradState {
    let u: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let theta = rng.gen_range(0.5..2.0);
    let mut s = GradState::zeros(order, u, theta);
    let rho = rng.gen_range(0.5..2.0);
    let map = s.map().clone();
    for (i, c) in s.coeffs_mut().iter_mut().enumerate() {
        let k = map.order_of(i) as i32;
        *c = if k == 0 {
            rho
        } else {
            0.1 * rho * theta.powf(k as f64 / 2.0) * rng.gen_range(-1.0..1.0)
        };
    }
    s
}

/// Target frame for a moderate transition: `|w| <= 1` per component and
/// `sqrt(theta1 / theta2)` in `[0.5, 2]`.
pub fn random_target(rng: &mut ChaCha8Rng, s: &GradState) -> (Vec<f64>, f64) {
    let ratio: f64 = rng.gen_range(0.5..2.0);
    let theta2 = s.theta() / (ratio * ratio);
    let u2 = s
        .u()
        .iter()
        .map(|u| u - rng.gen_range(-1.0..1.0) * theta2.sqrt())
        .collect();
    (u2, theta2)
}
