//! Finite-volume fractional-step solver: convection with HLL fluxes in each
//! cell's own frame, optional regularizing flux, then BGK relaxation.

use rayon::prelude::*;

use crate::error::{check_positive, Error, Result};
use crate::flux::{hll_accumulate, signal_velocities_raw};
use crate::hermite::{he_roots, RootTable};
use crate::projection::{project_with, SubstepPolicy};
use crate::regularization::{
    build_reg_block, reg_flux_accumulate, CellContext, Reconstruction, RegBlock,
};
use crate::state::{conserved_moments, normalize_with, GradState, MacroState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Free,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "periodic" => Ok(Boundary::Periodic),
            "free" => Ok(Boundary::Free),
            other => Err(Error::Config(format!("unknown boundary '{other}'"))),
        }
    }
}

/// Uniform rectangular mesh over the first `N` coordinate axes.
/// Cells are stored with axis 0 varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    lower: Vec<f64>,
    upper: Vec<f64>,
    cells: Vec<usize>,
    dx: Vec<f64>,
    boundary: Vec<Boundary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

impl Mesh {
    pub fn new(
        lower: &[f64],
        upper: &[f64],
        cells: &[usize],
        boundary: &[Boundary],
    ) -> Result<Self> {
        let n = cells.len();
        if n == 0 || lower.len() != n || upper.len() != n || boundary.len() != n {
            return Err(Error::Config("mesh axes disagree in length".into()));
        }
        let mut dx = Vec::with_capacity(n);
        for j in 0..n {
            if cells[j] == 0 {
                return Err(Error::Config(format!("axis {j} has no cells")));
            }
            let h = (upper[j] - lower[j]) / cells[j] as f64;
            check_positive("cell width", h)?;
            dx.push(h);
        }
        Ok(Mesh {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            cells: cells.to_vec(),
            dx,
            boundary: boundary.to_vec(),
        })
    }

    /// Spatial dimension `N`.
    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn len(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn dx(&self) -> &[f64] {
        &self.dx
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn boundary(&self) -> &[Boundary] {
        &self.boundary
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx.iter().product()
    }

    pub fn coords(&self, index: usize) -> Vec<usize> {
        let mut rest = index;
        self.cells
            .iter()
            .map(|&n| {
                let c = rest % n;
                rest /= n;
                c
            })
            .collect()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        let mut idx = 0;
        for j in (0..self.dim()).rev() {
            idx = idx * self.cells[j] + coords[j];
        }
        idx
    }

    pub fn center(&self, index: usize) -> Vec<f64> {
        self.coords(index)
            .iter()
            .enumerate()
            .map(|(j, &c)| self.lower[j] + (c as f64 + 0.5) * self.dx[j])
            .collect()
    }

    /// Interior neighbour along `axis`, or `None` across a free boundary.
    /// Periodic axes wrap around.
    pub fn neighbor(&self, index: usize, axis: usize, side: Side) -> Option<usize> {
        let mut c = self.coords(index);
        let n = self.cells[axis];
        match (side, c[axis]) {
            (Side::Minus, 0) => match self.boundary[axis] {
                Boundary::Periodic => c[axis] = n - 1,
                Boundary::Free => return None,
            },
            (Side::Plus, k) if k == n - 1 => match self.boundary[axis] {
                Boundary::Periodic => c[axis] = 0,
                Boundary::Free => return None,
            },
            (Side::Minus, k) => c[axis] = k - 1,
            (Side::Plus, k) => c[axis] = k + 1,
        }
        Some(self.index(&c))
    }

    /// Position of a boundary cell within the ghost layer normal to `axis`.
    fn ghost_slot(&self, coords: &[usize], axis: usize) -> usize {
        let mut idx = 0;
        for j in (0..self.dim()).rev() {
            if j != axis {
                idx = idx * self.cells[j] + coords[j];
            }
        }
        idx
    }
}

/// Cell states of one time level plus one-cell-deep ghost layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub cells: Vec<GradState>,
    /// `ghosts[axis][0]` lies below the lower face, `ghosts[axis][1]` above
    /// the upper face; each holds one state per boundary cell.
    pub ghosts: Vec<[Vec<GradState>; 2]>,
}

impl Field {
    pub fn new(mesh: &Mesh, cells: Vec<GradState>) -> Result<Self> {
        if cells.len() != mesh.len() {
            return Err(Error::Config(format!(
                "field has {} cells, mesh has {}",
                cells.len(),
                mesh.len()
            )));
        }
        let mut f = Field {
            cells,
            ghosts: Vec::new(),
        };
        fill_ghosts(&mut f, mesh);
        Ok(f)
    }

    pub fn order(&self) -> usize {
        self.cells[0].order()
    }

    pub fn velocity_dim(&self) -> usize {
        self.cells[0].dim()
    }

    /// Neighbouring state, read from the ghost layer at the boundary.
    pub fn neighbor<'a>(
        &'a self,
        mesh: &Mesh,
        index: usize,
        axis: usize,
        side: Side,
    ) -> &'a GradState {
        let c = mesh.coords(index);
        let at_edge = match side {
            Side::Minus => c[axis] == 0,
            Side::Plus => c[axis] == mesh.cells[axis] - 1,
        };
        if at_edge {
            let s = match side {
                Side::Minus => 0,
                Side::Plus => 1,
            };
            &self.ghosts[axis][s][mesh.ghost_slot(&c, axis)]
        } else {
            &self.cells[mesh.neighbor(index, axis, side).unwrap()]
        }
    }

    pub fn macro_states(&self) -> Vec<MacroState> {
        self.cells.iter().map(MacroState::from_frame).collect()
    }

    /// Domain totals `(mass, momentum, energy)` with energy
    /// `rho |u|^2 + D rho theta` per unit volume.
    pub fn totals(&self, mesh: &Mesh) -> (f64, Vec<f64>, f64) {
        let vol = mesh.cell_volume();
        let d = self.velocity_dim();
        let mut mass = 0.0;
        let mut mom = vec![0.0; d];
        let mut energy = 0.0;
        for s in &self.cells {
            let (r, m, e) = conserved_moments(s);
            mass += r * vol;
            for (a, b) in mom.iter_mut().zip(m) {
                *a += b * vol;
            }
            energy += e * vol;
        }
        (mass, mom, energy)
    }
}

/// Populates the ghost layers: periodic axes copy the wrap-around cell, free
/// axes copy the adjacent interior cell.
pub fn fill_ghosts(field: &mut Field, mesh: &Mesh) {
    let mut ghosts = Vec::with_capacity(mesh.dim());
    for axis in 0..mesh.dim() {
        let slots = mesh.len() / mesh.cells[axis];
        let mut lo = Vec::with_capacity(slots);
        let mut hi = Vec::with_capacity(slots);
        for index in 0..mesh.len() {
            let c = mesh.coords(index);
            let n = mesh.cells[axis];
            if c[axis] == 0 {
                let src = match mesh.boundary[axis] {
                    Boundary::Periodic => {
                        let mut w = c.clone();
                        w[axis] = n - 1;
                        mesh.index(&w)
                    }
                    Boundary::Free => index,
                };
                lo.push((mesh.ghost_slot(&c, axis), field.cells[src].clone()));
            }
            if c[axis] == n - 1 {
                let src = match mesh.boundary[axis] {
                    Boundary::Periodic => {
                        let mut w = c.clone();
                        w[axis] = 0;
                        mesh.index(&w)
                    }
                    Boundary::Free => index,
                };
                hi.push((mesh.ghost_slot(&c, axis), field.cells[src].clone()));
            }
        }
        lo.sort_by_key(|(k, _)| *k);
        hi.sort_by_key(|(k, _)| *k);
        ghosts.push([
            lo.into_iter().map(|(_, s)| s).collect(),
            hi.into_iter().map(|(_, s)| s).collect(),
        ]);
    }
    field.ghosts = ghosts;
}

/// How `nu_max` enters the viscous factor `1 + 4 nu_max / dx` of the time
/// step restriction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ViscousCfl {
    /// `nu_max = max Kn / rho`, the largest relaxation time.
    #[default]
    RelaxationTime,
    /// `nu_max = max rho / Kn`, the largest collision frequency.
    Frequency,
}

impl std::str::FromStr for ViscousCfl {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "relaxation_time" => Ok(ViscousCfl::RelaxationTime),
            "frequency" => Ok(ViscousCfl::Frequency),
            other => Err(Error::Config(format!("unknown viscous_cfl '{other}'"))),
        }
    }
}

impl std::fmt::Display for ViscousCfl {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ViscousCfl::RelaxationTime => "relaxation_time",
            ViscousCfl::Frequency => "frequency",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Truncation order `M`.
    pub order: usize,
    /// Velocity dimension `D`.
    pub velocity_dim: usize,
    pub kn: f64,
    pub cfl: f64,
    pub end_time: f64,
    pub regularized: bool,
    pub reconstruction: Reconstruction,
    pub substeps: SubstepPolicy,
    /// Snapshot spacing in time; `None` writes only the initial and final
    /// fields.
    pub snapshot_dt: Option<f64>,
    pub threads: usize,
    pub viscous_cfl: ViscousCfl,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            order: 3,
            velocity_dim: 3,
            kn: 0.1,
            cfl: 0.8,
            end_time: 0.1,
            regularized: false,
            reconstruction: Reconstruction::default(),
            substeps: SubstepPolicy::default(),
            snapshot_dt: None,
            threads: 1,
            viscous_cfl: ViscousCfl::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::Config(format!(
                "M must be at least 2, got {}",
                self.order
            )));
        }
        if self.regularized && self.order < 3 {
            return Err(Error::Config(format!(
                "regularization requires M >= 3, got M = {}",
                self.order
            )));
        }
        if self.velocity_dim == 0 {
            return Err(Error::Config("D must be at least 1".into()));
        }
        if !(self.kn > 0.0 && self.kn.is_finite()) {
            return Err(Error::Config(format!(
                "kn must be positive, got {}",
                self.kn
            )));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Config(format!(
                "cfl must lie in (0, 1), got {}",
                self.cfl
            )));
        }
        if !(self.end_time >= 0.0 && self.end_time.is_finite()) {
            return Err(Error::Config(format!("invalid end_time {}", self.end_time)));
        }
        if let Some(s) = self.snapshot_dt {
            if !(s > 0.0) {
                return Err(Error::Config(format!(
                    "snapshot_dt must be positive, got {s}"
                )));
            }
        }
        if self.substeps.initial == 0 || self.substeps.cap < self.substeps.initial {
            return Err(Error::Config("invalid projection substep policy".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    /// Root table for the signal velocities: `He_{M+2}` with regularization,
    /// `He_{M+1}` without.
    pub fn roots(&self) -> RootTable {
        he_roots(if self.regularized {
            self.order + 2
        } else {
            self.order + 1
        })
    }

    fn lift_order(&self) -> usize {
        if self.regularized {
            self.order + 2
        } else {
            self.order + 1
        }
    }
}

/// Largest stable time step for the current field.
pub fn compute_dt(field: &Field, mesh: &Mesh, config: &RunConfig) -> Result<f64> {
    let roots = config.roots();
    let xmax = roots.max();
    let n = mesh.dim();
    let mut lam = vec![0.0f64; n];
    let mut nu_max = 0.0f64;
    for (i, s) in field.cells.iter().enumerate() {
        let rho = s.coeffs()[0];
        if !s.coeffs().iter().all(|c| c.is_finite()) || !s.theta().is_finite() || !(rho > 0.0) {
            return Err(Error::NonFinite(format!("cell {i}")));
        }
        let sq = s.theta().sqrt();
        for j in 0..n {
            lam[j] = lam[j].max(s.u()[j].abs() + xmax * sq);
        }
        let nu = match config.viscous_cfl {
            ViscousCfl::RelaxationTime => config.kn / rho,
            ViscousCfl::Frequency => rho / config.kn,
        };
        nu_max = nu_max.max(nu);
    }
    let mut rate = 0.0;
    for j in 0..n {
        let dx = mesh.dx[j];
        let visc = if config.regularized {
            1.0 + 4.0 * nu_max / dx
        } else {
            1.0
        };
        rate += lam[j] / dx * visc;
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::NonFinite(format!("signal speed sum {rate}")));
    }
    Ok(config.cfl / rate)
}

/// Result of the convection step for one cell.
#[derive(Debug, Clone)]
pub struct Convected {
    /// Normalized state in the frame `(u^{n+1*}, theta^{n+1*})`.
    pub state: GradState,
    /// Correction block built from step-`n` data, when regularization is on.
    pub block: Option<RegBlock>,
}

fn tag_cell(e: Error, cell: usize) -> Error {
    match e {
        Error::Unphysical { rho, theta, .. } => Error::Unphysical {
            rho,
            theta,
            cell: Some(cell),
        },
        Error::NonPositive { value, .. } => Error::Unphysical {
            rho: f64::NAN,
            theta: value,
            cell: Some(cell),
        },
        other => other,
    }
}

fn convect_cell(
    index: usize,
    field: &Field,
    mesh: &Mesh,
    config: &RunConfig,
    roots: &RootTable,
    dt: f64,
) -> Result<Convected> {
    let f = &field.cells[index];
    let lift = config.lift_order();
    let mut acc = f.coeffs().to_vec();
    let mut projected = Vec::with_capacity(mesh.dim());
    for j in 0..mesh.dim() {
        let minus = field.neighbor(mesh, index, j, Side::Minus);
        let plus = field.neighbor(mesh, index, j, Side::Plus);
        let pm = project_with(minus, f.u(), f.theta(), lift, &config.substeps)?;
        let pp = project_with(plus, f.u(), f.theta(), lift, &config.substeps)?;
        let r = dt / mesh.dx[j];
        let (ll, lr) = signal_velocities_raw(f.u()[j], f.theta(), plus.u()[j], plus.theta(), roots);
        hll_accumulate(f, &pp, j, ll, lr, -r, &mut acc)?;
        let (ll, lr) =
            signal_velocities_raw(minus.u()[j], minus.theta(), f.u()[j], f.theta(), roots);
        hll_accumulate(&pm, f, j, ll, lr, r, &mut acc)?;
        projected.push([pm, pp]);
    }
    let raw = GradState::new(f.order(), f.u().to_vec(), f.theta(), acc)?;
    let state = normalize_with(&raw, &config.substeps).map_err(|e| tag_cell(e, index))?;
    let block = if config.regularized {
        let ctx = CellContext {
            state: f,
            u_next: state.u(),
            theta_next: state.theta(),
            neighbors: projected.iter().map(|[a, b]| [a, b]).collect(),
            dt,
            dx: mesh.dx(),
            nu: f.coeffs()[0] / config.kn,
        };
        Some(build_reg_block(&ctx, config.reconstruction)?)
    } else {
        None
    };
    Ok(Convected { state, block })
}

/// Convection over all cells: HLL fluxes in each cell's frame from both
/// neighbours projected into it, then renormalization. Ghosts must be filled.
pub fn convection_step(
    field: &Field,
    mesh: &Mesh,
    config: &RunConfig,
    dt: f64,
) -> Result<Vec<Convected>> {
    let roots = config.roots();
    (0..mesh.len())
        .into_par_iter()
        .map(|i| convect_cell(i, field, mesh, config, &roots, dt))
        .collect()
}

/// Adds the order-`M` flux increments of the correction blocks. `old` is the
/// field at step `n`, whose frames fix the signal velocities.
pub fn apply_reg_flux(
    old: &Field,
    mesh: &Mesh,
    config: &RunConfig,
    dt: f64,
    conv: &mut [Convected],
) -> Result<()> {
    let roots = config.roots();
    let blocks: Vec<&RegBlock> = conv
        .iter()
        .map(|c| c.block.as_ref().expect("correction block missing"))
        .collect();
    let increments: Vec<Vec<f64>> = (0..mesh.len())
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let f = &old.cells[i];
            let mut inc = vec![0.0; f.coeffs().len()];
            for j in 0..mesh.dim() {
                let r = dt / mesh.dx[j];
                let plus = old.neighbor(mesh, i, j, Side::Plus);
                let minus = old.neighbor(mesh, i, j, Side::Minus);
                let bp = blocks[mesh.neighbor(i, j, Side::Plus).unwrap_or(i)];
                let bm = blocks[mesh.neighbor(i, j, Side::Minus).unwrap_or(i)];
                let (ll, lr) =
                    signal_velocities_raw(f.u()[j], f.theta(), plus.u()[j], plus.theta(), &roots);
                reg_flux_accumulate(blocks[i], bp, j, ll, lr, -r, &mut inc)?;
                let (ll, lr) =
                    signal_velocities_raw(minus.u()[j], minus.theta(), f.u()[j], f.theta(), &roots);
                reg_flux_accumulate(bm, blocks[i], j, ll, lr, r, &mut inc)?;
            }
            Ok(inc)
        })
        .collect::<Result<_>>()?;
    for (c, inc) in conv.iter_mut().zip(increments) {
        for (x, y) in c.state.coeffs_mut().iter_mut().zip(inc) {
            *x += y;
        }
    }
    Ok(())
}

/// BGK relaxation: every coefficient of order >= 1 decays by
/// `exp(-rho dt / Kn)`.
pub fn production_step(state: &mut GradState, dt: f64, kn: f64) {
    let decay = (-state.coeffs()[0] * dt / kn).exp();
    for c in state.coeffs_mut()[1..].iter_mut() {
        *c *= decay;
    }
}

/// One full fractional step with time step `dt`; ghosts of `field` must be
/// current. Returns the new field with ghosts filled.
pub fn step(field: &Field, mesh: &Mesh, config: &RunConfig, dt: f64) -> Result<Field> {
    let mut conv = convection_step(field, mesh, config, dt)?;
    if config.regularized {
        apply_reg_flux(field, mesh, config, dt, &mut conv)?;
    }
    let cells: Vec<GradState> = conv
        .into_par_iter()
        .map(|c| {
            let mut s = c.state;
            production_step(&mut s, dt, config.kn);
            s
        })
        .collect();
    Field::new(mesh, cells)
}

/// A field at a recorded time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub step: usize,
    pub field: Field,
}

/// Owns a mesh, a field and the run state; advances in time.
#[derive(Debug)]
pub struct Solver {
    mesh: Mesh,
    field: Field,
    config: RunConfig,
    time: f64,
    steps: usize,
    pool: rayon::ThreadPool,
}

impl Solver {
    pub fn new(mesh: Mesh, field: Field, config: RunConfig) -> Result<Self> {
        config.validate()?;
        if field.order() != config.order || field.velocity_dim() != config.velocity_dim {
            return Err(Error::Config(format!(
                "field has M = {}, D = {}; config has M = {}, D = {}",
                field.order(),
                field.velocity_dim(),
                config.order,
                config.velocity_dim
            )));
        }
        if mesh.dim() > config.velocity_dim {
            return Err(Error::Config(format!(
                "spatial dimension {} exceeds velocity dimension {}",
                mesh.dim(),
                config.velocity_dim
            )));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(Solver {
            mesh,
            field,
            config,
            time: 0.0,
            steps: 0,
            pool,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn stable_dt(&self) -> Result<f64> {
        compute_dt(&self.field, &self.mesh, &self.config)
    }

    /// Advances by exactly `dt`, which should not exceed [`Self::stable_dt`].
    pub fn step_by(&mut self, dt: f64) -> Result<()> {
        let next = self
            .pool
            .install(|| step(&self.field, &self.mesh, &self.config, dt))
            .map_err(|e| Error::RunAborted {
                step: self.steps,
                time: self.time,
                source: Box::new(e),
            })?;
        self.field = next;
        self.time += dt;
        self.steps += 1;
        Ok(())
    }

    /// One step at the stable time step, clipped so as not to pass `until`.
    /// Returns the step taken.
    pub fn advance(&mut self, until: f64) -> Result<f64> {
        let mut dt = self.stable_dt().map_err(|e| Error::RunAborted {
            step: self.steps,
            time: self.time,
            source: Box::new(e),
        })?;
        if self.time + dt >= until {
            dt = until - self.time;
        }
        self.step_by(dt)?;
        Ok(dt)
    }

    /// Runs to `until`, landing on it exactly.
    pub fn run_until(&mut self, until: f64) -> Result<()> {
        while self.time < until {
            self.advance(until)?;
            if until - self.time <= 1e-14 * until.abs().max(1.0) {
                self.time = until;
            }
        }
        Ok(())
    }

    /// Runs to the configured end time, calling `emit` with the initial
    /// field, at every multiple of the snapshot spacing and at the end.
    pub fn run_with(&mut self, mut emit: impl FnMut(&Snapshot) -> Result<()>) -> Result<()> {
        let snap = |s: &Solver| Snapshot {
            time: s.time,
            step: s.steps,
            field: s.field.clone(),
        };
        emit(&snap(self))?;
        let end = self.config.end_time;
        let mut k = 1usize;
        while self.time < end {
            let target = match self.config.snapshot_dt {
                Some(h) => (k as f64 * h).min(end),
                None => end,
            };
            self.run_until(target)?;
            if self.time < end {
                emit(&snap(self))?;
            }
            k += 1;
        }
        if end > 0.0 {
            emit(&snap(self))?;
        }
        Ok(())
    }
}

/// Runs a configuration from an initial field and collects all snapshots.
pub fn run(config: &RunConfig, mesh: Mesh, field: Field) -> Result<Vec<Snapshot>> {
    let mut solver = Solver::new(mesh, field, config.clone())?;
    let mut out = Vec::new();
    solver.run_with(|s| {
        out.push(s.clone());
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::MultiIndex;

    fn mesh1(n: usize, b: Boundary) -> Mesh {
        Mesh::new(&[-1.0], &[1.0], &[n], &[b]).unwrap()
    }

    #[test]
    fn mesh_indexing() {
        let m = Mesh::new(
            &[0.0, 0.0],
            &[3.0, 2.0],
            &[3, 2],
            &[Boundary::Periodic, Boundary::Free],
        )
        .unwrap();
        assert_eq!(m.len(), 6);
        assert_eq!(m.coords(4), vec![1, 1]);
        assert_eq!(m.index(&[1, 1]), 4);
        assert_eq!(m.center(4), vec![1.5, 1.5]);
        assert_eq!(m.neighbor(0, 0, Side::Minus), Some(2));
        assert_eq!(m.neighbor(0, 1, Side::Minus), None);
        assert_eq!(m.neighbor(0, 1, Side::Plus), Some(3));
        assert!(Mesh::new(&[0.0], &[-1.0], &[4], &[Boundary::Free]).is_err());
    }

    #[test]
    fn ghost_layers() {
        let m = mesh1(4, Boundary::Periodic);
        let cells: Vec<GradState> = (0..4)
            .map(|i| GradState::maxwellian(1.0 + i as f64, &[0.0], 1.0, 2).unwrap())
            .collect();
        let f = Field::new(&m, cells.clone()).unwrap();
        assert_eq!(f.ghosts[0][0][0], cells[3]);
        assert_eq!(f.ghosts[0][1][0], cells[0]);
        let m = mesh1(4, Boundary::Free);
        let f = Field::new(&m, cells.clone()).unwrap();
        assert_eq!(f.ghosts[0][0][0], cells[0]);
        assert_eq!(f.ghosts[0][1][0], cells[3]);
        assert_eq!(f.neighbor(&m, 3, 0, Side::Plus), &cells[3]);
        assert_eq!(f.neighbor(&m, 2, 0, Side::Plus), &cells[3]);
    }

    #[test]
    fn dt_examples() {
        let m = Mesh::new(&[0.0], &[1.0], &[1], &[Boundary::Periodic]).unwrap();
        let f = Field::new(
            &m,
            vec![GradState::maxwellian(1.0, &[0.0], 1.0, 2).unwrap()],
        )
        .unwrap();
        let cfg = RunConfig {
            order: 2,
            velocity_dim: 1,
            ..Default::default()
        };
        let dt = compute_dt(&f, &m, &cfg).unwrap();
        assert!((dt - 0.8 / 3f64.sqrt()).abs() < 1e-14);

        let reg = RunConfig {
            order: 3,
            velocity_dim: 1,
            regularized: true,
            ..Default::default()
        };
        let grad = RunConfig {
            regularized: false,
            ..reg.clone()
        };
        let mk = |h: f64| {
            let m = Mesh::new(&[0.0], &[h], &[1], &[Boundary::Periodic]).unwrap();
            let f = Field::new(
                &m,
                vec![GradState::maxwellian(1.0, &[0.0], 1.0, 3).unwrap()],
            )
            .unwrap();
            (m, f)
        };
        let (m1, f1) = mk(0.1);
        let (m2, f2) = mk(0.2);
        let a = compute_dt(&f1, &m1, &reg).unwrap();
        let b = compute_dt(&f2, &m2, &reg).unwrap();
        assert!(b > 2.0 * a);
        assert!(a <= compute_dt(&f1, &m1, &grad).unwrap());
    }

    #[test]
    fn production_examples() {
        let mut s = GradState::maxwellian(2.0, &[0.1], 1.3, 4).unwrap();
        let before = s.clone();
        production_step(&mut s, 0.1, 0.5);
        assert_eq!(s, before);
        let mut s = GradState::zeros(4, vec![0.0, 0.0], 1.0);
        s.coeffs_mut()[0] = 2.0;
        s.set_coeff(&MultiIndex::new(vec![3, 0]), 0.25);
        production_step(&mut s, 0.1, 0.5);
        let want = 0.25 * (-2.0f64 * 0.1 / 0.5).exp();
        assert_eq!(s.coeff(&MultiIndex::new(vec![3, 0])), want);
        assert_eq!(s.coeffs()[0], 2.0);
    }

    #[test]
    fn uniform_equilibrium_is_fixed() {
        let m = mesh1(8, Boundary::Periodic);
        for reg in [false, true] {
            let cells = vec![GradState::maxwellian(1.3, &[0.4, 0.0, 0.0], 0.8, 3).unwrap(); 8];
            let f = Field::new(&m, cells.clone()).unwrap();
            let cfg = RunConfig {
                regularized: reg,
                ..Default::default()
            };
            let dt = compute_dt(&f, &m, &cfg).unwrap();
            let g = step(&f, &m, &cfg, dt).unwrap();
            for (a, b) in g.cells.iter().zip(&cells) {
                assert!((a.theta() - b.theta()).abs() < 1e-13);
                for (x, y) in a.u().iter().zip(b.u()) {
                    assert!((x - y).abs() < 1e-13);
                }
                for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                    assert!((x - y).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn two_cell_periodic_conserves() {
        let m = Mesh::new(&[0.0], &[1.0], &[2], &[Boundary::Periodic]).unwrap();
        let cells = vec![
            GradState::maxwellian(2.0, &[0.3, 0.1], 1.2, 4).unwrap(),
            GradState::maxwellian(1.0, &[-0.2, 0.0], 0.7, 4).unwrap(),
        ];
        let f = Field::new(&m, cells).unwrap();
        let cfg = RunConfig {
            order: 4,
            velocity_dim: 2,
            ..Default::default()
        };
        let (m0, p0, e0) = f.totals(&m);
        let dt = compute_dt(&f, &m, &cfg).unwrap();
        let g = step(&f, &m, &cfg, dt).unwrap();
        let (m1, p1, e1) = g.totals(&m);
        assert!((m1 - m0).abs() < 1e-10 * m0);
        for (a, b) in p0.iter().zip(&p1) {
            assert!((a - b).abs() < 1e-10 * m0);
        }
        assert!((e1 - e0).abs() < 1e-10 * e0);
        for c in &g.cells {
            assert!(c.is_normalized(1e-11));
        }
    }

    #[test]
    fn config_validation() {
        let bad = RunConfig {
            order: 2,
            regularized: true,
            ..Default::default()
        };
        let e = bad.validate().unwrap_err().to_string();
        assert!(e.contains("M >= 3"), "{e}");
        assert!(RunConfig {
            cfl: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            kn: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn end_time_zero_returns_initial() {
        let m = mesh1(4, Boundary::Free);
        let cells = vec![GradState::maxwellian(1.0, &[0.0, 0.0, 0.0], 1.0, 3).unwrap(); 4];
        let f = Field::new(&m, cells).unwrap();
        let cfg = RunConfig {
            end_time: 0.0,
            ..Default::default()
        };
        let snaps = run(&cfg, m, f.clone()).unwrap();
        assert_eq!(snaps.len(), 1);
        assert_eq!(snaps[0].field, f);
    }
}
