//! The discrete distribution function on one cell: a truncated Hermite
//! coefficient vector together with the frame `(u, theta)` it is expanded in.

use std::sync::Arc;

use crate::error::{check_positive, Error, Result};
use crate::hermite::{he_eval_all, he_roots, MultiIndex, MultiIndexMap};
use crate::projection::{project_with, SubstepPolicy};

/// Coefficients of `sum_alpha f_alpha H_{theta,alpha}((xi - u) / sqrt(theta))`
/// for `|alpha| <= order`.
///
/// States produced by [`normalize`] and [`GradState::maxwellian`] additionally
/// satisfy `f_{e_i} = 0` and `sum_d f_{2 e_d} = 0`; intermediate values such as
/// flux terms do not.
#[derive(Debug, Clone)]
pub struct GradState {
    map: Arc<MultiIndexMap>,
    u: Vec<f64>,
    theta: f64,
    coeffs: Vec<f64>,
}

/// A distribution-valued flux term (`xi_j f` or an HLL combination of such
/// terms). Same representation as a state, never required to be normalized.
pub type FluxTerm = GradState;

impl PartialEq for GradState {
    fn eq(&self, other: &Self) -> bool {
        self.order() == other.order()
            && self.u == other.u
            && self.theta == other.theta
            && self.coeffs == other.coeffs
    }
}

impl GradState {
    pub fn new(order: usize, u: Vec<f64>, theta: f64, coeffs: Vec<f64>) -> Result<Self> {
        check_positive("theta", theta)?;
        let map = MultiIndexMap::shared(order, u.len());
        if coeffs.len() != map.len() {
            return Err(Error::Config(format!(
                "expected {} coefficients for order {order} in {} dimensions, got {}",
                map.len(),
                u.len(),
                coeffs.len()
            )));
        }
        Ok(GradState {
            map,
            u,
            theta,
            coeffs,
        })
    }

    /// All-zero expansion in the given frame.
    pub fn zeros(order: usize, u: Vec<f64>, theta: f64) -> Self {
        assert!(theta > 0.0, "theta must be positive");
        let map = MultiIndexMap::shared(order, u.len());
        let coeffs = vec![0.0; map.len()];
        GradState {
            map,
            u,
            theta,
            coeffs,
        }
    }

    /// The local Maxwellian `rho H_{theta,0}` in frame `(u, theta)`.
    pub fn maxwellian(rho: f64, u: &[f64], theta: f64, order: usize) -> Result<Self> {
        check_positive("rho", rho)?;
        check_positive("theta", theta)?;
        let mut s = GradState::zeros(order, u.to_vec(), theta);
        s.coeffs[0] = rho;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn order(&self) -> usize {
        self.map.max_order()
    }

    pub fn map(&self) -> &Arc<MultiIndexMap> {
        &self.map
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient `f_alpha`; zero when `|alpha|` exceeds the order.
    pub fn coeff(&self, alpha: &MultiIndex) -> f64 {
        self.map.forward(alpha).map_or(0.0, |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, alpha: &MultiIndex, value: f64) {
        let i = self
            .map
            .forward(alpha)
            .expect("multi-index exceeds the state order");
        self.coeffs[i] = value;
    }

    /// Replaces the frame without touching the coefficients.
    pub fn with_frame(mut self, u: Vec<f64>, theta: f64) -> Self {
        assert_eq!(u.len(), self.dim());
        assert!(theta > 0.0);
        self.u = u;
        self.theta = theta;
        self
    }

    /// Same function at a different truncation order: zero padding when
    /// lifting, dropping the high-order blocks when truncating.
    pub fn with_order(&self, order: usize) -> Self {
        if order == self.order() {
            return self.clone();
        }
        let map = MultiIndexMap::shared(order, self.dim());
        let mut coeffs = vec![0.0; map.len()];
        let n = coeffs.len().min(self.coeffs.len());
        coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        GradState {
            map,
            u: self.u.clone(),
            theta: self.theta,
            coeffs,
        }
    }

    /// `self += a * other`, both in the same frame; `other` may have a
    /// different order (missing entries read as zero, extra entries ignored).
    pub fn axpy(&mut self, a: f64, other: &GradState) {
        debug_assert_eq!(self.u, other.u);
        debug_assert_eq!(self.theta, other.theta);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.coeffs.iter_mut().for_each(|x| *x *= a);
    }

    /// Whether `f_{e_i} = 0` and `sum_d f_{2 e_d} = 0` hold to `tol * |f_0|`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        let d = self.dim();
        let f0 = self.coeffs[0].abs().max(f64::MIN_POSITIVE);
        if self.order() < 2 {
            return false;
        }
        let first = (0..d).all(|i| {
            let k = self.map.axis_offset(i, 1).unwrap();
            self.coeffs[k].abs() <= tol * f0
        });
        let trace: f64 = (0..d)
            .map(|i| self.coeffs[self.map.axis_offset(i, 2).unwrap()])
            .sum();
        first && trace.abs() <= tol * f0
    }

    /// Point value of the expansion at velocity `xi`.
    pub fn eval(&self, xi: &[f64]) -> f64 {
        let d = self.dim();
        let k = self.order();
        let sq = self.theta.sqrt();
        let mut he = vec![0.0; (k + 1) * d];
        let mut gauss = 1.0;
        for j in 0..d {
            let v = (xi[j] - self.u[j]) / sq;
            he_eval_all(k, v, &mut he[j * (k + 1)..(j + 1) * (k + 1)]);
            gauss *= (-0.5 * v * v).exp() / (2.0 * std::f64::consts::PI).sqrt();
        }
        let mut sum = 0.0;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let a = self.map.components(i);
            let mut p = 1.0;
            for j in 0..d {
                p *= he[j * (k + 1) + a[j] as usize];
            }
            sum += c * p * self.theta.powf(-((self.map.order_of(i) + d) as f64) / 2.0);
        }
        sum * gauss
    }
}

/// Density, bulk velocity, temperature and heat flux of a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroState {
    pub rho: f64,
    pub u: Vec<f64>,
    pub theta: f64,
    pub q: Vec<f64>,
    /// `false` when the expansion has no third-order block, in which case
    /// `q` is the partial sum over the coefficients that exist.
    pub heat_flux_complete: bool,
}

impl MacroState {
    /// Macroscopic state of a normalized expansion (no validation).
    pub fn from_frame(state: &GradState) -> MacroState {
        MacroState {
            rho: state.coeffs[0],
            u: state.u.clone(),
            theta: state.theta,
            q: heat_flux(state),
            heat_flux_complete: state.order() >= 3,
        }
    }

    pub fn energy(&self) -> f64 {
        let d = self.u.len() as f64;
        self.rho * self.u.iter().map(|x| x * x).sum::<f64>() + d * self.rho * self.theta
    }
}

/// Heat flux `q_j = 3 theta' f_{e_j} + 2 f_{3 e_j} + sum_d f_{e_j + 2 e_d}`
/// in the state's own frame.
pub fn heat_flux(state: &GradState) -> Vec<f64> {
    let d = state.dim();
    let map = &state.map;
    (0..d)
        .map(|j| {
            let mut q = 3.0 * state.theta * state.coeff(&MultiIndex::axis(d, j, 1));
            if state.order() >= 3 {
                q += 2.0 * state.coeffs[map.axis_offset(j, 3).unwrap()];
                for k in 0..d {
                    let mut a = vec![0u16; d];
                    a[j] += 1;
                    a[k] += 2;
                    q += state.coeffs[map.offset_of(&a).unwrap()];
                }
            }
            q
        })
        .collect()
}

/// Conserved totals `(rho, rho u, rho |u|^2 + D rho theta)` of an expansion
/// in an arbitrary frame. Never fails; no division by the density.
pub fn conserved_moments(state: &GradState) -> (f64, Vec<f64>, f64) {
    let d = state.dim();
    let map = &state.map;
    let f0 = state.coeffs[0];
    let fe = |j: usize| map.axis_offset(j, 1).map_or(0.0, |i| state.coeffs[i]);
    let f2e = |j: usize| map.axis_offset(j, 2).map_or(0.0, |i| state.coeffs[i]);
    let mom: Vec<f64> = (0..d).map(|j| f0 * state.u[j] + fe(j)).collect();
    let mut energy = 0.0;
    for j in 0..d {
        energy += 2.0 * mom[j] * state.u[j] - f0 * state.u[j] * state.u[j];
        energy += state.theta * f0 + 2.0 * f2e(j);
    }
    (f0, mom, energy)
}

/// Recovers `(rho, u, theta, q)` from a possibly unnormalized expansion.
pub fn macro_from_raw(state: &GradState) -> Result<MacroState> {
    let (rho, mom, energy) = conserved_moments(state);
    if !(rho > 0.0) {
        return Err(Error::Unphysical {
            rho,
            theta: f64::NAN,
            cell: None,
        });
    }
    let u: Vec<f64> = mom.iter().map(|m| m / rho).collect();
    let usq: f64 = u.iter().map(|x| x * x).sum();
    let theta = (energy - rho * usq) / (state.dim() as f64 * rho);
    if !(theta > 0.0) {
        return Err(Error::Unphysical {
            rho,
            theta,
            cell: None,
        });
    }
    Ok(MacroState {
        rho,
        u,
        theta,
        q: heat_flux(state),
        heat_flux_complete: state.order() >= 3,
    })
}

/// Projects a state into the frame of its own mean velocity and temperature,
/// so that the normalization constraints hold.
pub fn normalize(state: &GradState) -> Result<GradState> {
    normalize_with(state, &SubstepPolicy::default())
}

pub fn normalize_with(state: &GradState, policy: &SubstepPolicy) -> Result<GradState> {
    let m = macro_from_raw(state)?;
    let mut out = project_with(state, &m.u, m.theta, state.order(), policy)?;
    let map = out.map.clone();
    let d = out.dim();
    for j in 0..d {
        out.coeffs[map.axis_offset(j, 1).unwrap()] = 0.0;
    }
    let idx: Vec<usize> = (0..d).map(|j| map.axis_offset(j, 2).unwrap()).collect();
    let trace: f64 = idx.iter().map(|&i| out.coeffs[i]).sum();
    for &i in &idx {
        out.coeffs[i] -= trace / d as f64;
    }
    Ok(out)
}

/// A monomial `c * xi^e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub exps: Vec<u16>,
}

/// A polynomial in the molecular velocity `xi`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn constant(d: usize, c: f64) -> Self {
        Polynomial {
            terms: vec![Monomial {
                coeff: c,
                exps: vec![0; d],
            }],
        }
    }

    pub fn monomial(exps: &[u16]) -> Self {
        Polynomial {
            terms: vec![Monomial {
                coeff: 1.0,
                exps: exps.to_vec(),
            }],
        }
    }

    /// `xi_j`.
    pub fn xi(d: usize, j: usize) -> Self {
        let mut e = vec![0; d];
        e[j] = 1;
        Self::monomial(&e)
    }

    /// `|xi|^2`.
    pub fn xi_norm_sq(d: usize) -> Self {
        Polynomial {
            terms: (0..d)
                .map(|j| {
                    let mut e = vec![0; d];
                    e[j] = 2;
                    Monomial {
                        coeff: 1.0,
                        exps: e,
                    }
                })
                .collect(),
        }
    }

    /// All monomials `xi^e` with `|e| <= degree`.
    pub fn all_monomials(d: usize, degree: usize) -> Vec<Polynomial> {
        let map = MultiIndexMap::shared(degree, d);
        (0..map.len())
            .map(|i| Self::monomial(map.components(i)))
            .collect()
    }

    /// `xi_j * self`.
    pub fn times_xi(&self, j: usize) -> Self {
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|m| {
                    let mut e = m.exps.clone();
                    e[j] += 1;
                    Monomial {
                        coeff: m.coeff,
                        exps: e,
                    }
                })
                .collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|m| m.exps.iter().map(|&e| e as usize).sum::<usize>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|m| {
                m.coeff
                    * m.exps
                        .iter()
                        .zip(xi)
                        .map(|(&e, &x)| x.powi(e as i32))
                        .product::<f64>()
            })
            .sum()
    }
}

/// `int p(xi) f(xi) dxi`, evaluated exactly by tensor Gauss-Hermite
/// quadrature with `order + 1` nodes per axis in the state's own frame.
pub fn quadrature_moment(state: &GradState, p: &Polynomial) -> Result<f64> {
    let deg = p.degree();
    if deg > state.order() {
        return Err(Error::DegreeTooHigh {
            degree: deg,
            max: state.order(),
        });
    }
    Ok(quadrature_moment_nodes(state, p, state.order() + 1))
}

/// Quadrature with an explicit node count; exact whenever
/// `deg(p) + order <= 2 * nodes - 1`.
pub fn quadrature_moment_nodes(state: &GradState, p: &Polynomial, nodes: usize) -> f64 {
    let d = state.dim();
    let k = state.order();
    let table = he_roots(nodes);
    let x = table.roots();
    // probabilists' Gauss-Hermite weights, normalized to sum to one
    let mut hn1 = vec![0.0; nodes.max(2)];
    let w: Vec<f64> = x
        .iter()
        .map(|&xi| {
            he_eval_all(nodes - 1, xi, &mut hn1);
            let fact: f64 = (1..=nodes).map(|i| i as f64).product();
            fact / ((nodes * nodes) as f64 * hn1[nodes - 1] * hn1[nodes - 1])
        })
        .collect();
    let sq = state.theta.sqrt();
    let scale: Vec<f64> = (0..=k).map(|m| sq.powi(-(m as i32))).collect();
    let mut he = vec![0.0; nodes * (k + 1)];
    for (n, &xn) in x.iter().enumerate() {
        he_eval_all(k, xn, &mut he[n * (k + 1)..(n + 1) * (k + 1)]);
    }
    let total = nodes.pow(d as u32);
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    let mut sum = 0.0;
    for _ in 0..total {
        let mut weight = 1.0;
        for j in 0..d {
            weight *= w[idx[j]];
            point[j] = state.u[j] + sq * x[idx[j]];
        }
        let mut f = 0.0;
        for (i, &c) in state.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let a = state.map.components(i);
            let mut prod = c * scale[state.map.order_of(i)];
            for j in 0..d {
                prod *= he[idx[j] * (k + 1) + a[j] as usize];
            }
            f += prod;
        }
        sum += weight * f * p.eval(&point);
        for j in 0..d {
            idx[j] += 1;
            if idx[j] < nodes {
                break;
            }
            idx[j] = 0;
        }
    }
    sum
}
