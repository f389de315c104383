//! The benchmark problems, their initial data, and the run driver.

mod config;
mod snapshot;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub use config::{Config, ScenarioKind, ShockShift};
pub use snapshot::{load_snapshot, write_coefficients, write_snapshot, MacroSnapshot};

use crate::error::{Error, Result};
use crate::solver::{compute_dt, step, Boundary, Field, Mesh, RunConfig, Solver};
use crate::state::{GradState, MacroState};

/// Centre of the density bubble.
pub const BUBBLE_CENTER: [f64; 2] = [0.5, 0.0];
/// Initial shock position in the shock-bubble problem.
pub const SHOCK_POSITION: f64 = -1.0;

fn maxwellian_with_p(rho: f64, u: &[f64], p: f64, order: usize) -> Result<GradState> {
    GradState::maxwellian(rho, u, p / rho, order)
}

fn truncated(u: [f64; 3], d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    for (a, b) in v.iter_mut().zip(u) {
        *a = b;
    }
    v
}

/// Riemann data `rho = p = 7` left of 0 and `rho = p = 1` right of it, at rest.
pub fn init_shock_tube(mesh: &Mesh, order: usize, d: usize) -> Result<Field> {
    let cells = (0..mesh.len())
        .map(|i| {
            let rho = if mesh.center(i)[0] < 0.0 { 7.0 } else { 1.0 };
            maxwellian_with_p(rho, &vec![0.0; d], rho, order)
        })
        .collect::<Result<_>>()?;
    Field::new(mesh, cells)
}

/// `rho = 2 + cos(pi x)/2`, `u = (1 + sin(pi x)/2, sin(pi x)/2, 0)`, `p = 1`.
/// Velocity components beyond `d` are dropped.
pub fn init_smooth_1d(mesh: &Mesh, order: usize, d: usize) -> Result<Field> {
    let cells = (0..mesh.len())
        .map(|i| {
            let x = mesh.center(i)[0];
            let (s, c) = (PI * x).sin_cos();
            let rho = 2.0 + 0.5 * c;
            let u = truncated([1.0 + 0.5 * s, 0.5 * s, 0.0], d);
            maxwellian_with_p(rho, &u, 1.0, order)
        })
        .collect::<Result<_>>()?;
    Field::new(mesh, cells)
}

/// Two-dimensional periodic data with three velocity components, `p = 1`.
pub fn init_periodic_2d(mesh: &Mesh, order: usize) -> Result<Field> {
    if mesh.dim() != 2 {
        return Err(Error::Config(
            "periodic_2d needs a two-dimensional mesh".into(),
        ));
    }
    let cells = (0..mesh.len())
        .map(|i| {
            let x = mesh.center(i);
            let (s1, c1) = (PI * x[0]).sin_cos();
            let (s2, c2) = (PI * x[1]).sin_cos();
            let rho = 2.0 + 0.5 * c1 + 0.5 * s2;
            let w = 0.5 * s1 + 0.5 * c2;
            maxwellian_with_p(rho, &[1.0 + w, w, w], 1.0, order)
        })
        .collect::<Result<_>>()?;
    Field::new(mesh, cells)
}

/// Equilibrium states `(downstream, upstream)` of a stationary shock with
/// upstream Mach number `mach`, as `(rho, u, theta)` with `d` velocity
/// components.
pub fn rankine_hugoniot(mach: f64, d: usize) -> Result<(MacroState, MacroState)> {
    if !(mach > 1.0) {
        return Err(Error::Config(format!("mach must exceed 1, got {mach}")));
    }
    let m2 = mach * mach;
    let c = (5.0f64 / 3.0).sqrt();
    let rho_l = 4.0 * m2 / (m2 + 3.0);
    let p_l = (5.0 * m2 - 1.0) / 4.0;
    let mk = |rho: f64, ux: f64, p: f64| {
        let mut u = vec![0.0; d];
        u[0] = ux;
        MacroState {
            rho,
            u,
            theta: p / rho,
            q: vec![0.0; d],
            heat_flux_complete: true,
        }
    };
    Ok((
        mk(rho_l, -c * (m2 + 3.0) / (4.0 * mach), p_l),
        mk(1.0, -c * mach, 1.0),
    ))
}

/// Stopping rule for the stationary-shock computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyCriterion {
    /// Bound on `sum |rho^{n+1} - rho^n| dx / dt`.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for SteadyCriterion {
    fn default() -> Self {
        SteadyCriterion {
            tol: 1e-6,
            max_steps: 100_000,
        }
    }
}

/// Runs the Rankine-Hugoniot Riemann problem (jump at `x = 0`) on a free
/// 1-D mesh until the density stops changing. Returns the steady field and
/// the number of steps taken.
pub fn precompute_shock_profile(
    mach: f64,
    mesh: &Mesh,
    run: &RunConfig,
    stop: SteadyCriterion,
) -> Result<(Field, usize)> {
    if mesh.dim() != 1 {
        return Err(Error::Config(
            "the shock profile is computed on a 1-D mesh".into(),
        ));
    }
    run.validate()?;
    let (l, r) = rankine_hugoniot(mach, run.velocity_dim)?;
    let cells = (0..mesh.len())
        .map(|i| {
            let s = if mesh.center(i)[0] < 0.0 { &l } else { &r };
            GradState::maxwellian(s.rho, &s.u, s.theta, run.order)
        })
        .collect::<Result<_>>()?;
    let mut field = Field::new(mesh, cells)?;
    let dx = mesh.dx()[0];
    let mut rate = f64::INFINITY;
    for n in 0..stop.max_steps {
        let dt = compute_dt(&field, mesh, run)?;
        let next = step(&field, mesh, run, dt).map_err(|e| Error::RunAborted {
            step: n,
            time: f64::NAN,
            source: Box::new(e),
        })?;
        rate = next
            .cells
            .iter()
            .zip(&field.cells)
            .map(|(a, b)| (a.coeffs()[0] - b.coeffs()[0]).abs() * dx)
            .sum::<f64>()
            / dt;
        field = next;
        if rate < stop.tol {
            return Ok((field, n + 1));
        }
    }
    Err(Error::NotConverged {
        steps: stop.max_steps,
        rate,
    })
}

/// Moves the expansion centre by `s` and keeps every coefficient, turning a
/// stationary profile into one travelling with velocity `s`.
pub fn shift_frame(state: &GradState, s: &[f64]) -> GradState {
    let u: Vec<f64> = state.u().iter().zip(s).map(|(a, b)| a + b).collect();
    let theta = state.theta();
    state.clone().with_frame(u, theta)
}

/// Shock profile shifted by `shift` and placed at [`SHOCK_POSITION`],
/// constant in `y`, with the bubble `rho = 1 + 1.5 exp(-16 |x - x0|^2)`,
/// `p = 1` at rest ahead of it. `profile` is a steady shock centred at 0.
pub fn init_shock_bubble(
    mesh: &Mesh,
    profile_mesh: &Mesh,
    profile: &Field,
    shift: f64,
) -> Result<Field> {
    if mesh.dim() != 2 || profile_mesh.dim() != 1 {
        return Err(Error::Config(
            "shock_bubble needs a 2-D mesh and a 1-D profile".into(),
        ));
    }
    let d = profile.velocity_dim();
    let order = profile.order();
    let mut s = vec![0.0; d];
    s[0] = shift;
    let (plo, phi) = (profile_mesh.lower()[0], profile_mesh.upper()[0]);
    let pdx = profile_mesh.dx()[0];
    let np = profile_mesh.len();
    // ahead of this line the bubble data take over
    let switch = 0.5 * (SHOCK_POSITION + BUBBLE_CENTER[0]);
    let cells = (0..mesh.len())
        .map(|i| {
            let x = mesh.center(i);
            if x[0] < switch {
                let xi = (x[0] - SHOCK_POSITION).clamp(plo, phi);
                let k = (((xi - plo) / pdx) as usize).min(np - 1);
                Ok(shift_frame(&profile.cells[k], &s))
            } else {
                let r2 = (x[0] - BUBBLE_CENTER[0]).powi(2) + (x[1] - BUBBLE_CENTER[1]).powi(2);
                let rho = 1.0 + 1.5 * (-16.0 * r2).exp();
                maxwellian_with_p(rho, &vec![0.0; d], 1.0, order)
            }
        })
        .collect::<Result<_>>()?;
    Field::new(mesh, cells)
}

/// Mesh of a scenario: `[-1, 1]` (free for the shock tube, periodic for the
/// smooth case), `[-1, 1]^2` periodic, or `[-2, 3] x [-1, 1]` free for the
/// shock-bubble problem.
pub fn scenario_mesh(c: &Config) -> Result<Mesh> {
    match c.scenario {
        ScenarioKind::ShockTube => Mesh::new(&[-1.0], &[1.0], &[c.nx], &[Boundary::Free]),
        ScenarioKind::Smooth1d => Mesh::new(&[-1.0], &[1.0], &[c.nx], &[Boundary::Periodic]),
        ScenarioKind::Periodic2d => Mesh::new(
            &[-1.0, -1.0],
            &[1.0, 1.0],
            &[c.nx, c.ny],
            &[Boundary::Periodic; 2],
        ),
        ScenarioKind::ShockBubble => Mesh::new(
            &[-2.0, -1.0],
            &[3.0, 1.0],
            &[c.nx, c.ny],
            &[Boundary::Free; 2],
        ),
    }
}

/// Mesh and initial field for a configuration. The shock-bubble case runs
/// the shock pre-computation first, on `[-1, 1]` at the same `dx`.
pub fn build_initial(c: &Config) -> Result<(Mesh, Field)> {
    c.validate()?;
    let mesh = scenario_mesh(c)?;
    let (m, d) = (c.run.order, c.run.velocity_dim);
    let field = match c.scenario {
        ScenarioKind::ShockTube => init_shock_tube(&mesh, m, d)?,
        ScenarioKind::Smooth1d => init_smooth_1d(&mesh, m, d)?,
        ScenarioKind::Periodic2d => {
            if d != 3 {
                return Err(Error::Config(format!("periodic_2d needs D = 3, got {d}")));
            }
            init_periodic_2d(&mesh, m)?
        }
        ScenarioKind::ShockBubble => {
            let n = ((2.0 / mesh.dx()[0]).round() as usize).max(2);
            let pmesh = Mesh::new(&[-1.0], &[1.0], &[n], &[Boundary::Free])?;
            let (profile, steps) =
                precompute_shock_profile(c.mach, &pmesh, &c.run, SteadyCriterion::default())?;
            log::info!("shock profile steady after {steps} steps");
            init_shock_bubble(&mesh, &pmesh, &profile, c.shock_shift.speed(c.mach))?
        }
    };
    Ok((mesh, field))
}

/// Macroscopic quantity compared by [`error_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Density,
    Temperature,
    Velocity(usize),
    HeatFlux(usize),
}

impl Quantity {
    pub fn of(self, s: &MacroState) -> f64 {
        match self {
            Quantity::Density => s.rho,
            Quantity::Temperature => s.theta,
            Quantity::Velocity(j) => s.u[j],
            Quantity::HeatFlux(j) => s.q[j],
        }
    }
}

/// `log10` of the L1 distance between a coarse solution, taken as piecewise
/// constant, and a reference solution, summed over the reference cells.
/// The reference cell count must be an integer multiple of the coarse one
/// along every axis. Identical data give `-inf`.
pub fn error_norm(
    coarse: &Mesh,
    coarse_vals: &[f64],
    reference: &Mesh,
    ref_vals: &[f64],
) -> Result<f64> {
    if coarse.dim() != reference.dim() {
        return Err(Error::IncompatibleGrids("dimensions differ".into()));
    }
    if coarse_vals.len() != coarse.len() || ref_vals.len() != reference.len() {
        return Err(Error::IncompatibleGrids(
            "value count does not match the mesh".into(),
        ));
    }
    let mut ratio = Vec::with_capacity(coarse.dim());
    for j in 0..coarse.dim() {
        let (a, b) = (coarse.cells()[j], reference.cells()[j]);
        let tol = 1e-12 * (reference.upper()[j] - reference.lower()[j]);
        if (coarse.lower()[j] - reference.lower()[j]).abs() > tol
            || (coarse.upper()[j] - reference.upper()[j]).abs() > tol
        {
            return Err(Error::IncompatibleGrids(format!("axis {j} extents differ")));
        }
        if b % a != 0 {
            return Err(Error::IncompatibleGrids(format!(
                "axis {j}: {b} reference cells is not a multiple of {a}"
            )));
        }
        ratio.push(b / a);
    }
    let vol = reference.cell_volume();
    let mut sum = 0.0;
    for (i, r) in ref_vals.iter().enumerate() {
        let c: Vec<usize> = reference
            .coords(i)
            .iter()
            .zip(&ratio)
            .map(|(k, q)| k / q)
            .collect();
        sum += vol * (coarse_vals[coarse.index(&c)] - r).abs();
    }
    Ok(sum.log10())
}

/// [`error_norm`] on one quantity of two macroscopic snapshots.
pub fn error_norm_of(
    coarse: &Mesh,
    coarse_snap: &[MacroState],
    reference: &Mesh,
    ref_snap: &[MacroState],
    q: Quantity,
) -> Result<f64> {
    let a: Vec<f64> = coarse_snap.iter().map(|s| q.of(s)).collect();
    let b: Vec<f64> = ref_snap.iter().map(|s| q.of(s)).collect();
    error_norm(coarse, &a, reference, &b)
}

/// Conservation totals recorded for one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub time: f64,
    pub step: usize,
    pub mass: f64,
    pub momentum: Vec<f64>,
    pub energy: f64,
    pub file: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub records: Vec<SnapshotRecord>,
    pub manifest: PathBuf,
}

impl RunReport {
    /// Largest relative deviation of the total mass from its initial value.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.records[0].mass;
        self.records
            .iter()
            .map(|r| ((r.mass - m0) / m0).abs())
            .fold(0.0, f64::max)
    }
}

/// Builds the scenario, runs it and writes `snapshot_NNNN.csv` files plus a
/// `manifest.txt` (config echo and conservation totals) into the output
/// directory.
pub fn run_scenario(c: &Config) -> Result<RunReport> {
    let dir = c.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let (mesh, field) = build_initial(c)?;
    let mut solver = Solver::new(mesh.clone(), field, c.run.clone())?;
    let mut records = Vec::new();
    solver.run_with(|snap| {
        let k = records.len();
        let file = dir.join(format!("snapshot_{k:04}.csv"));
        write_snapshot(&file, &MacroSnapshot::from_field(&mesh, &snap.field))?;
        if c.write_coefficients {
            write_coefficients(
                &dir.join(format!("snapshot_{k:04}_coeffs.csv")),
                &snap.field,
            )?;
        }
        let (mass, momentum, energy) = snap.field.totals(&mesh);
        log::info!(
            "snapshot {k} at t = {} (step {}), mass {mass}",
            snap.time,
            snap.step
        );
        records.push(SnapshotRecord {
            time: snap.time,
            step: snap.step,
            mass,
            momentum,
            energy,
            file,
        });
        Ok(())
    })?;
    let manifest = dir.join("manifest.txt");
    write_manifest(&manifest, c, &records)?;
    Ok(RunReport { records, manifest })
}

fn write_manifest(path: &Path, c: &Config, records: &[SnapshotRecord]) -> Result<()> {
    let mut s = c.echo();
    for (k, r) in records.iter().enumerate() {
        let mom: Vec<String> = r.momentum.iter().map(f64::to_string).collect();
        let _ = writeln!(
            s,
            "snapshot.{k} = time={} step={} mass={} momentum={} energy={} file={}",
            r.time,
            r.step,
            r.mass,
            mom.join(";"),
            r.energy,
            r.file.file_name().unwrap_or_default().to_string_lossy()
        );
    }
    if let Some(first) = records.first() {
        let drift = records
            .iter()
            .map(|r| ((r.mass - first.mass) / first.mass).abs())
            .fold(0.0, f64::max);
        let _ = writeln!(s, "snapshot.mass_drift = {drift}");
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh1(n: usize, b: Boundary) -> Mesh {
        Mesh::new(&[-1.0], &[1.0], &[n], &[b]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn shock_tube_data() {
        let m = mesh1(4, Boundary::Free);
        let f = init_shock_tube(&m, 3, 3).unwrap();
        assert_eq!(
            f.cells[1],
            GradState::maxwellian(7.0, &[0.0; 3], 1.0, 3).unwrap()
        );
        assert_eq!(
            f.cells[2],
            GradState::maxwellian(1.0, &[0.0; 3], 1.0, 3).unwrap()
        );
        let (mass, _, _) = f.totals(&m);
        assert!(close(mass, 8.0, 1e-14));
    }

    #[test]
    fn smooth_data() {
        // cells centred at x = 0 and x = 0.5
        let m = Mesh::new(&[-0.25], &[0.75], &[2], &[Boundary::Periodic]).unwrap();
        let f = init_smooth_1d(&m, 3, 3).unwrap();
        let a = &f.cells[0];
        assert!(close(a.coeffs()[0], 2.5, 1e-15));
        assert!(close(a.u()[0], 1.0, 1e-15) && close(a.u()[1], 0.0, 1e-15));
        assert!(close(a.theta(), 0.4, 1e-15));
        let b = &f.cells[1];
        assert!(close(b.coeffs()[0], 2.0, 1e-15));
        assert!(close(b.u()[0], 1.5, 1e-15) && close(b.u()[1], 0.5, 1e-15));
        assert!(close(b.theta(), 0.5, 1e-15));
        let m = mesh1(50, Boundary::Periodic);
        for s in &init_smooth_1d(&m, 3, 3).unwrap().cells {
            assert!((1.5..=2.5).contains(&s.coeffs()[0]));
            assert!(s.coeffs()[1..].iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn periodic_2d_data() {
        let m = Mesh::new(
            &[-0.5, -0.5],
            &[0.5, 0.5],
            &[1, 1],
            &[Boundary::Periodic; 2],
        )
        .unwrap();
        let f = init_periodic_2d(&m, 3).unwrap();
        let s = &f.cells[0];
        assert!(close(s.coeffs()[0], 2.5, 1e-15));
        assert!(
            close(s.u()[0], 1.5, 1e-15)
                && close(s.u()[1], 0.5, 1e-15)
                && close(s.u()[2], 0.5, 1e-15)
        );
        assert!(close(s.theta(), 0.4, 1e-15));
        let m = Mesh::new(
            &[-1.0, -1.0],
            &[1.0, 1.0],
            &[8, 8],
            &[Boundary::Periodic; 2],
        )
        .unwrap();
        for s in &init_periodic_2d(&m, 3).unwrap().cells {
            assert_eq!(s.u()[1], s.u()[2]);
            assert!((1.0..=3.0).contains(&s.coeffs()[0]));
        }
    }

    #[test]
    fn rankine_hugoniot_states() {
        let (l, r) = rankine_hugoniot(2.0, 3).unwrap();
        let c = (5.0f64 / 3.0).sqrt();
        assert!(close(l.rho, 16.0 / 7.0, 1e-15));
        assert!(close(l.u[0], -c * 7.0 / 8.0, 1e-15));
        assert!(close(l.rho * l.theta, 19.0 / 4.0, 1e-14));
        assert!(close(r.u[0], -c * 2.0, 1e-15));
        // mass and momentum fluxes agree across the jump
        assert!(close(l.rho * l.u[0], r.rho * r.u[0], 1e-14));
        let mom = |s: &MacroState| s.rho * s.u[0] * s.u[0] + s.rho * s.theta;
        assert!(close(mom(&l), mom(&r), 1e-13));
        let en = |s: &MacroState| s.u[0] * (0.5 * s.rho * s.u[0] * s.u[0] + 2.5 * s.rho * s.theta);
        assert!(close(en(&l), en(&r), 1e-13));
        assert!(rankine_hugoniot(0.9, 3).is_err());
    }

    #[test]
    fn frame_shift() {
        let s = GradState::maxwellian(1.3, &[0.2, 0.0], 0.9, 4).unwrap();
        assert_eq!(shift_frame(&s, &[0.0, 0.0]), s);
        let t = shift_frame(&s, &[1.5, -0.5]);
        assert_eq!(t.coeffs(), s.coeffs());
        assert_eq!(t.u(), &[1.7, -0.5]);
        assert_eq!(t.theta(), 0.9);
        let (_, r) = rankine_hugoniot(2.0, 3).unwrap();
        let up = GradState::maxwellian(r.rho, &r.u, r.theta, 3).unwrap();
        let sp = ShockShift::RestFrame.speed(2.0);
        assert!(shift_frame(&up, &[sp, 0.0, 0.0]).u()[0].abs() < 1e-15);
    }

    #[test]
    fn steady_shock_profile() {
        let mesh = mesh1(40, Boundary::Free);
        let run = RunConfig {
            order: 3,
            velocity_dim: 3,
            kn: 0.1,
            ..Default::default()
        };
        let stop = SteadyCriterion {
            tol: 1e-4,
            max_steps: 20_000,
        };
        let (f, _) = precompute_shock_profile(2.0, &mesh, &run, stop).unwrap();
        let (l, r) = rankine_hugoniot(2.0, 3).unwrap();
        let last = f.cells.last().unwrap();
        assert!(close(last.coeffs()[0], r.rho, 1e-6));
        assert!(close(last.u()[0], r.u[0], 1e-6));
        let flux: Vec<f64> = f.cells.iter().map(|s| s.coeffs()[0] * s.u()[0]).collect();
        let target = l.rho * l.u[0];
        for x in flux {
            assert!((x - target).abs() < 0.01 * target.abs(), "{x} vs {target}");
        }
        for s in &f.cells {
            assert!(s.is_normalized(1e-11));
        }
    }

    #[test]
    fn shock_bubble_data() {
        let pmesh = mesh1(20, Boundary::Free);
        let (l, r) = rankine_hugoniot(2.0, 3).unwrap();
        let profile = Field::new(
            &pmesh,
            (0..20)
                .map(|i| {
                    let s = if pmesh.center(i)[0] < 0.0 { &l } else { &r };
                    GradState::maxwellian(s.rho, &s.u, s.theta, 3).unwrap()
                })
                .collect(),
        )
        .unwrap();
        let mesh = Mesh::new(&[-2.0, -1.0], &[3.0, 1.0], &[50, 20], &[Boundary::Free; 2]).unwrap();
        let f =
            init_shock_bubble(&mesh, &pmesh, &profile, ShockShift::RestFrame.speed(2.0)).unwrap();
        // bubble centre (0.5, 0) is a cell corner; check the formula at a centre
        let i = mesh.index(&[25, 10]);
        let x = mesh.center(i);
        let rho = 1.0 + 1.5 * (-16.0 * ((x[0] - 0.5).powi(2) + x[1].powi(2))).exp();
        let s = &f.cells[i];
        assert!(close(s.coeffs()[0], rho, 1e-14));
        assert!(close(s.theta(), 1.0 / rho, 1e-14));
        let far = &f.cells[mesh.index(&[48, 1])];
        assert!(close(far.coeffs()[0], 1.0, 1e-12) && close(far.theta(), 1.0, 1e-12));
        assert!(far.u().iter().all(|x| *x == 0.0));
        let behind = &f.cells[mesh.index(&[2, 3])];
        assert!(close(behind.coeffs()[0], l.rho, 1e-14));
        for a in 0..50 {
            for b in 0..10 {
                let (p, q) = (
                    &f.cells[mesh.index(&[a, b])],
                    &f.cells[mesh.index(&[a, 19 - b])],
                );
                assert!(close(p.coeffs()[0], q.coeffs()[0], 1e-14));
                assert!(close(p.theta(), q.theta(), 1e-14));
                assert_eq!(p.u(), q.u());
            }
        }
    }

    #[test]
    fn error_norm_examples() {
        let m = Mesh::new(
            &[-1.0, -1.0],
            &[1.0, 1.0],
            &[4, 4],
            &[Boundary::Periodic; 2],
        )
        .unwrap();
        let v: Vec<f64> = (0..16).map(|i| i as f64 * 0.1).collect();
        assert_eq!(error_norm(&m, &v, &m, &v).unwrap(), f64::NEG_INFINITY);
        let c = 0.25;
        let w: Vec<f64> = v.iter().map(|x| x + c).collect();
        assert!(close(
            error_norm(&m, &w, &m, &v).unwrap(),
            (4.0 * c).log10(),
            1e-14
        ));

        let coarse = Mesh::new(
            &[-1.0, -1.0],
            &[1.0, 1.0],
            &[2, 2],
            &[Boundary::Periodic; 2],
        )
        .unwrap();
        let cv = vec![1.0, 2.0, 3.0, 4.0];
        let rv: Vec<f64> = (0..16)
            .map(|i| {
                let k = m.coords(i);
                cv[coarse.index(&[k[0] / 2, k[1] / 2])]
            })
            .collect();
        assert_eq!(
            error_norm(&coarse, &cv, &m, &rv).unwrap(),
            f64::NEG_INFINITY
        );
        let bad = Mesh::new(
            &[-1.0, -1.0],
            &[1.0, 1.0],
            &[3, 3],
            &[Boundary::Periodic; 2],
        )
        .unwrap();
        assert!(matches!(
            error_norm(&bad, &[0.0; 9], &m, &v),
            Err(Error::IncompatibleGrids(_))
        ));
    }

    #[test]
    fn scenario_run_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!(
            "scenario = shock_tube\nM = 3\nD = 3\nnx = 20\nkn = 0.05\nend_time = 0.02\nsnapshot_dt = 0.01\noutput_dir = {}\nwrite_coefficients = true\n",
            dir.path().display()
        );
        let c: Config = text.parse().unwrap();
        let rep = run_scenario(&c).unwrap();
        assert_eq!(rep.records.len(), 3);
        assert!(close(rep.records[1].time, 0.01, 1e-15));
        assert_eq!(rep.records[2].time, 0.02);
        assert!(rep.mass_drift() < 1e-2);
        let first = load_snapshot(&rep.records[0].file).unwrap();
        assert_eq!(first.states[0].rho, 7.0);
        assert_eq!(first.states[19].rho, 1.0);
        assert!(dir.path().join("snapshot_0002_coeffs.csv").exists());
        let manifest = std::fs::read_to_string(&rep.manifest).unwrap();
        assert_eq!(manifest.parse::<Config>().unwrap(), c);
        assert!(manifest.contains("snapshot.mass_drift"));
    }
}
