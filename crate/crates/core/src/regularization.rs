//! First-order Chapman-Enskog correction of a truncated expansion: the
//! order-`M+1` coefficient block built from reconstructed gradients, and the
//! flux increment it induces at order `M`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hermite::{MultiIndex, MultiIndexMap, NONE};
use crate::state::GradState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reconstruction {
    Central,
    #[default]
    VanLeer,
}

impl std::str::FromStr for Reconstruction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "central" => Ok(Reconstruction::Central),
            "van_leer" | "vanleer" => Ok(Reconstruction::VanLeer),
            other => Err(Error::Config(format!("unknown reconstruction '{other}'"))),
        }
    }
}

impl std::fmt::Display for Reconstruction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Reconstruction::Central => "central",
            Reconstruction::VanLeer => "van_leer",
        })
    }
}

/// Slope from the one-sided differences `d1` (forward) and `d2` (backward).
pub fn gradient_reconstruct(d1: f64, d2: f64, mode: Reconstruction) -> f64 {
    match mode {
        Reconstruction::Central => 0.5 * (d1 + d2),
        Reconstruction::VanLeer => {
            let den = d1.abs() + d2.abs();
            if den == 0.0 {
                0.0
            } else {
                (d1.abs() * d2 + d2.abs() * d1) / den
            }
        }
    }
}

/// Everything the correction of one cell depends on.
#[derive(Debug, Clone)]
pub struct CellContext<'a> {
    /// The cell at step `n`, normalized, order `M`.
    pub state: &'a GradState,
    /// Frame after the convection step.
    pub u_next: &'a [f64],
    pub theta_next: f64,
    /// Per spatial axis, the `(minus, plus)` neighbours projected into the
    /// frame of `state` at order `M+1` or higher.
    pub neighbors: Vec<[&'a GradState; 2]>,
    pub dt: f64,
    pub dx: &'a [f64],
    /// Collision frequency `rho / Kn` of the cell at step `n`.
    pub nu: f64,
}

/// `(sqrt(theta^n / theta^{n+1}) u_j^{n+1} - u_j^n) / dt` for every velocity
/// component.
pub fn time_term(cell: &CellContext) -> Vec<f64> {
    let r = (cell.state.theta() / cell.theta_next).sqrt();
    cell.state
        .u()
        .iter()
        .zip(cell.u_next)
        .map(|(un, up)| (r * up - un) / cell.dt)
        .collect()
}

/// Coefficients of the correction at `|alpha| = M + 1`, including the
/// `-1/nu` factor, in the frame `(u, theta)` of the owning cell.
#[derive(Debug, Clone)]
pub struct RegBlock {
    map: Arc<MultiIndexMap>,
    u: Vec<f64>,
    theta: f64,
    coeffs: Vec<f64>,
}

impl PartialEq for RegBlock {
    fn eq(&self, other: &Self) -> bool {
        self.map.max_order() == other.map.max_order()
            && self.u == other.u
            && self.theta == other.theta
            && self.coeffs == other.coeffs
    }
}

impl RegBlock {
    pub fn zeros(m: usize, u: Vec<f64>, theta: f64) -> Self {
        let map = MultiIndexMap::shared(m + 1, u.len());
        let n = map.grade(m + 1).len();
        RegBlock {
            map,
            u,
            theta,
            coeffs: vec![0.0; n],
        }
    }

    /// Truncation order `M` of the state this block corrects.
    pub fn base_order(&self) -> usize {
        self.map.max_order() - 1
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Coefficients in storage order of the `|alpha| = M + 1` grade.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> f64 {
        let start = self.map.grade(self.map.max_order()).start;
        self.map
            .forward(alpha)
            .filter(|&i| i >= start)
            .map_or(0.0, |i| self.coeffs[i - start])
    }

    /// The block as an order-`M+1` expansion with zero lower orders.
    pub fn to_state(&self) -> GradState {
        let k = self.map.max_order();
        let mut s = GradState::zeros(k, self.u.clone(), self.theta);
        let start = self.map.grade(k).start;
        s.coeffs_mut()[start..].copy_from_slice(&self.coeffs);
        s
    }
}

/// Order-`M+1` coefficient of `xi_j g` at offset `i`, for `g` in the frame
/// `(u, theta)` given at any order.
fn xi_coeff(g: &GradState, map: &MultiIndexMap, j: usize, i: usize) -> f64 {
    let c = g.coeffs();
    let mut v = 0.0;
    let lo = map.down1(j, i);
    if lo != NONE {
        v += g.theta() * c[lo as usize];
    }
    if i < c.len() {
        v += g.u()[j] * c[i];
    }
    let up = map.raise(j, i);
    if let Some(hi) = up {
        if hi < c.len() {
            v += map.components(hi)[j] as f64 * c[hi];
        }
    }
    v
}

/// Builds the correction block of one cell.
pub fn build_reg_block(cell: &CellContext, mode: Reconstruction) -> Result<RegBlock> {
    let f = cell.state;
    let m = f.order();
    if m < 3 {
        return Err(Error::Config(format!(
            "regularization requires order M >= 3, got {m}"
        )));
    }
    let d = f.dim();
    // one order above the block so that `alpha + e_j` resolves
    let map = MultiIndexMap::shared(m + 2, d);
    let tt = time_term(cell);
    let mut block = RegBlock::zeros(m, f.u().to_vec(), f.theta());
    let range = map.grade(m + 1);
    let start = range.start;
    for i in range {
        let mut g = 0.0;
        for (j, [minus, plus]) in cell.neighbors.iter().enumerate() {
            debug_assert!(minus.order() > m && plus.order() > m);
            let own = xi_coeff(f, &map, j, i);
            let d1 = (xi_coeff(plus, &map, j, i) - own) / cell.dx[j];
            let d2 = (own - xi_coeff(minus, &map, j, i)) / cell.dx[j];
            g += gradient_reconstruct(d1, d2, mode);
        }
        for (j, t) in tt.iter().enumerate() {
            let lo = map.down1(j, i);
            if lo != NONE {
                g += t * f.coeffs()[lo as usize];
            }
        }
        block.coeffs[i - start] = -g / cell.nu;
    }
    Ok(block)
}

/// Adds `weight * xi_j B` restricted to order `M` into `out`, which holds an
/// order-`M` coefficient vector. Only `(alpha_j + 1) B_{alpha + e_j}` survives.
pub(crate) fn reg_xi_accumulate(block: &RegBlock, j: usize, weight: f64, out: &mut [f64]) {
    let map = &block.map;
    let m = block.base_order();
    let start = map.grade(m + 1).start;
    for i in map.grade(m) {
        if let Some(hi) = map.raise(j, i) {
            out[i] += weight * map.components(hi)[j] as f64 * block.coeffs[hi - start];
        }
    }
}

/// Order-`M` flux increment of the correction through the face between
/// `left` and `right` along axis `j`, expressed in `target_u, target_theta`.
/// Only the `|alpha| = M` coefficients are nonzero, and they carry over
/// between frames unchanged.
pub fn reg_flux(
    left: &RegBlock,
    right: &RegBlock,
    j: usize,
    lambda_l: f64,
    lambda_r: f64,
    target_u: &[f64],
    target_theta: f64,
) -> Result<GradState> {
    let m = left.base_order();
    let mut out = GradState::zeros(m, target_u.to_vec(), target_theta);
    reg_flux_accumulate(left, right, j, lambda_l, lambda_r, 1.0, out.coeffs_mut())?;
    Ok(out)
}

pub(crate) fn reg_flux_accumulate(
    left: &RegBlock,
    right: &RegBlock,
    j: usize,
    lambda_l: f64,
    lambda_r: f64,
    weight: f64,
    out: &mut [f64],
) -> Result<()> {
    if !(lambda_l <= lambda_r) {
        return Err(Error::SignalOrder {
            left: lambda_l,
            right: lambda_r,
        });
    }
    if 0.0 <= lambda_l {
        reg_xi_accumulate(left, j, weight, out);
    } else if lambda_r <= 0.0 {
        reg_xi_accumulate(right, j, weight, out);
    } else {
        let inv = weight / (lambda_r - lambda_l);
        reg_xi_accumulate(left, j, lambda_r * inv, out);
        reg_xi_accumulate(right, j, -lambda_l * inv, out);
    }
    Ok(())
}
