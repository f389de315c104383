//! Discrete-velocity BGK reference solver for one spatial dimension.
//!
//! The velocity space is reduced to the axis of the mesh: each cell carries
//! `g = int f dv_perp`, the transverse momenta `k_j = int v_j f dv_perp` and
//! `h = int |v_perp|^2 f dv_perp`. BGK relaxation closes exactly on these.

use crate::error::{check_positive, Error, Result};
use crate::solver::{Boundary, Mesh};
use crate::state::MacroState;

/// Uniform velocity nodes on `[-v_max, v_max]` with trapezoidal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DvmGrid {
    v_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl DvmGrid {
    pub fn new(v_max: f64, n_v: usize) -> Result<Self> {
        check_positive("v_max", v_max)?;
        if n_v < 3 {
            return Err(Error::Config(format!(
                "need at least 3 velocity nodes, got {n_v}"
            )));
        }
        let h = 2.0 * v_max / (n_v - 1) as f64;
        let nodes = (0..n_v).map(|i| -v_max + i as f64 * h).collect();
        let mut weights = vec![h; n_v];
        weights[0] *= 0.5;
        weights[n_v - 1] *= 0.5;
        Ok(DvmGrid {
            v_max,
            nodes,
            weights,
        })
    }

    /// Grid wide enough for `u + margin * sqrt(theta)` over the given states.
    pub fn covering(states: &[MacroState], margin: f64, n_v: usize) -> Result<Self> {
        let v = states
            .iter()
            .map(|s| s.u[0].abs() + margin * s.theta.sqrt())
            .fold(0.0, f64::max);
        DvmGrid::new(v, n_v)
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Reduced distribution of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduced {
    pub g: Vec<f64>,
    /// One row per transverse velocity component.
    pub k: Vec<Vec<f64>>,
    pub h: Vec<f64>,
}

impl Reduced {
    fn zeros(d: usize, n: usize) -> Self {
        Reduced {
            g: vec![0.0; n],
            k: vec![vec![0.0; n]; d - 1],
            h: vec![0.0; n],
        }
    }

    /// Node samples of a Maxwellian, rescaled so the discrete density is
    /// exactly `rho`.
    pub fn maxwellian(grid: &DvmGrid, rho: f64, u: &[f64], theta: f64) -> Self {
        let d = u.len();
        let mut r = Reduced::zeros(d, grid.len());
        r.fill_maxwellian(grid, rho, u, theta);
        r
    }

    fn fill_maxwellian(&mut self, grid: &DvmGrid, rho: f64, u: &[f64], theta: f64) {
        let norm = (2.0 * std::f64::consts::PI * theta).sqrt();
        let mut mass = 0.0;
        for (i, (&v, &w)) in grid.nodes.iter().zip(&grid.weights).enumerate() {
            let g = (-(v - u[0]).powi(2) / (2.0 * theta)).exp() / norm;
            self.g[i] = g;
            mass += w * g;
        }
        let scale = if mass > 0.0 { rho / mass } else { 0.0 };
        let perp: f64 = u[1..].iter().map(|x| x * x).sum();
        let e_perp = (u.len() - 1) as f64 * theta + perp;
        for i in 0..grid.len() {
            let g = self.g[i] * scale;
            self.g[i] = g;
            for (row, uj) in self.k.iter_mut().zip(&u[1..]) {
                row[i] = uj * g;
            }
            self.h[i] = e_perp * g;
        }
    }
}

/// Trapezoidal moments of a reduced distribution.
pub fn dvm_macro(grid: &DvmGrid, f: &Reduced) -> Result<MacroState> {
    let d = f.k.len() + 1;
    let (mut rho, mut m1, mut e) = (0.0, 0.0, 0.0);
    let mut mp = vec![0.0; d - 1];
    for (i, (&v, &w)) in grid.nodes.iter().zip(&grid.weights).enumerate() {
        rho += w * f.g[i];
        m1 += w * v * f.g[i];
        e += w * (v * v * f.g[i] + f.h[i]);
        for (a, row) in mp.iter_mut().zip(&f.k) {
            *a += w * row[i];
        }
    }
    if !(rho > 0.0) {
        return Err(Error::Unphysical {
            rho,
            theta: f64::NAN,
            cell: None,
        });
    }
    let mut u = vec![m1 / rho];
    u.extend(mp.iter().map(|m| m / rho));
    let usq: f64 = u.iter().map(|x| x * x).sum();
    let theta = (e - rho * usq) / (d as f64 * rho);
    let uperp_sq = usq - u[0] * u[0];
    let mut q1 = 0.0;
    for (i, (&v, &w)) in grid.nodes.iter().zip(&grid.weights).enumerate() {
        let c = v - u[0];
        let mut perp = f.h[i] + uperp_sq * f.g[i];
        for (row, uj) in f.k.iter().zip(&u[1..]) {
            perp -= 2.0 * uj * row[i];
        }
        q1 += w * c * (c * c * f.g[i] + perp);
    }
    let mut q = vec![0.0; d];
    q[0] = 0.5 * q1;
    Ok(MacroState {
        rho,
        u,
        theta,
        q,
        // transverse heat flux components are not available from the reduction
        heat_flux_complete: d == 1,
    })
}

/// First-order upwind transport with exact exponential BGK relaxation.
#[derive(Debug, Clone)]
pub struct DvmSolver {
    mesh: Mesh,
    grid: DvmGrid,
    kn: f64,
    cfl: f64,
    cells: Vec<Reduced>,
    scratch: Vec<Reduced>,
    time: f64,
    steps: usize,
}

impl DvmSolver {
    /// `kn = f64::INFINITY` switches collisions off.
    pub fn new(
        mesh: Mesh,
        grid: DvmGrid,
        initial: &[MacroState],
        kn: f64,
        cfl: f64,
    ) -> Result<Self> {
        if mesh.dim() != 1 {
            return Err(Error::Config(
                "the discrete-velocity solver is one-dimensional".into(),
            ));
        }
        if initial.len() != mesh.len() {
            return Err(Error::Config(format!(
                "{} initial states for {} cells",
                initial.len(),
                mesh.len()
            )));
        }
        if !(kn > 0.0) {
            return Err(Error::Config(format!("kn must be positive, got {kn}")));
        }
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {cfl}")));
        }
        let cells: Vec<Reduced> = initial
            .iter()
            .map(|s| Reduced::maxwellian(&grid, s.rho, &s.u, s.theta))
            .collect();
        let solver = DvmSolver {
            scratch: cells.clone(),
            mesh,
            grid,
            kn,
            cfl,
            cells,
            time: 0.0,
            steps: 0,
        };
        solver.check_overflow()?;
        Ok(solver)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn cells(&self) -> &[Reduced] {
        &self.cells
    }

    pub fn stable_dt(&self) -> f64 {
        self.cfl * self.mesh.dx()[0] / self.grid.v_max
    }

    pub fn macro_field(&self) -> Result<Vec<MacroState>> {
        self.cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                dvm_macro(&self.grid, c).map_err(|e| match e {
                    Error::Unphysical { rho, theta, .. } => Error::Unphysical {
                        rho,
                        theta,
                        cell: Some(i),
                    },
                    other => other,
                })
            })
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        let vol = self.mesh.dx()[0];
        self.cells
            .iter()
            .map(|c| {
                c.g.iter()
                    .zip(&self.grid.weights)
                    .map(|(g, w)| g * w)
                    .sum::<f64>()
                    * vol
            })
            .sum()
    }

    fn check_overflow(&self) -> Result<()> {
        let n = self.grid.len();
        let w = &self.grid.weights;
        let mut edge = 0.0;
        let mut total = 0.0;
        for c in &self.cells {
            edge += w[0] * c.g[0].abs() + w[n - 1] * c.g[n - 1].abs();
            total += c.g.iter().zip(w).map(|(g, w)| g * w).sum::<f64>();
        }
        let frac = edge / total;
        if frac > 1e-8 {
            return Err(Error::VelocityOverflow(frac));
        }
        Ok(())
    }

    pub fn step_by(&mut self, dt: f64) -> Result<()> {
        let n = self.mesh.len();
        let r = dt / self.mesh.dx()[0];
        let periodic = self.mesh.boundary()[0] == Boundary::Periodic;
        let left = |i: usize| match (i, periodic) {
            (0, true) => n - 1,
            (0, false) => 0,
            _ => i - 1,
        };
        let right = |i: usize| match (i + 1 == n, periodic) {
            (true, true) => 0,
            (true, false) => i,
            _ => i + 1,
        };
        let nodes = &self.grid.nodes;
        let upwind = |out: &mut [f64], c: &[f64], l: &[f64], rr: &[f64]| {
            for (a, &v) in nodes.iter().enumerate() {
                out[a] = if v > 0.0 {
                    c[a] - r * v * (c[a] - l[a])
                } else {
                    c[a] - r * v * (rr[a] - c[a])
                };
            }
        };
        for i in 0..n {
            let (c, l, rr) = (&self.cells[i], &self.cells[left(i)], &self.cells[right(i)]);
            let out = &mut self.scratch[i];
            upwind(&mut out.g, &c.g, &l.g, &rr.g);
            upwind(&mut out.h, &c.h, &l.h, &rr.h);
            for j in 0..c.k.len() {
                upwind(&mut out.k[j], &c.k[j], &l.k[j], &rr.k[j]);
            }
        }
        std::mem::swap(&mut self.cells, &mut self.scratch);
        if self.kn.is_finite() {
            let d = self.cells[0].k.len() + 1;
            let mut eq = Reduced::zeros(d, self.grid.len());
            for i in 0..n {
                let m = dvm_macro(&self.grid, &self.cells[i]).map_err(|_| Error::RunAborted {
                    step: self.steps,
                    time: self.time,
                    source: Box::new(Error::Unphysical {
                        rho: f64::NAN,
                        theta: f64::NAN,
                        cell: Some(i),
                    }),
                })?;
                if !(m.theta > 0.0) {
                    return Err(Error::RunAborted {
                        step: self.steps,
                        time: self.time,
                        source: Box::new(Error::Unphysical {
                            rho: m.rho,
                            theta: m.theta,
                            cell: Some(i),
                        }),
                    });
                }
                eq.fill_maxwellian(&self.grid, m.rho, &m.u, m.theta);
                let decay = (-m.rho / self.kn * dt).exp();
                let c = &mut self.cells[i];
                let relax = |f: &mut [f64], e: &[f64]| {
                    for (x, y) in f.iter_mut().zip(e) {
                        *x = y + (*x - y) * decay;
                    }
                };
                relax(&mut c.g, &eq.g);
                relax(&mut c.h, &eq.h);
                for j in 0..c.k.len() {
                    relax(&mut c.k[j], &eq.k[j]);
                }
            }
        }
        self.time += dt;
        self.steps += 1;
        self.check_overflow()
    }

    /// Advances to `until`, clipping the last step to land on it.
    pub fn run_until(&mut self, until: f64) -> Result<()> {
        let dt = self.stable_dt();
        while self.time < until {
            let h = dt.min(until - self.time);
            self.step_by(h)?;
            if until - self.time <= 1e-14 * until.abs().max(1.0) {
                self.time = until;
            }
        }
        Ok(())
    }
}

/// Runs the reference solver from local Maxwellians and returns the macro
/// field at each of the (increasing) `times`.
pub fn dvm_run(
    mesh: Mesh,
    grid: DvmGrid,
    initial: &[MacroState],
    kn: f64,
    times: &[f64],
) -> Result<Vec<Vec<MacroState>>> {
    let mut s = DvmSolver::new(mesh, grid, initial, kn, 0.9)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        s.run_until(t)?;
        out.push(s.macro_field()?);
    }
    Ok(out)
}
