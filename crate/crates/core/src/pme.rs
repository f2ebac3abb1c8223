//! Explicit conservative solver for `d_t rho = 2 Laplacian mu(rho)`.

use std::io::{self, Write};

use log::{debug, warn};

use crate::diagnostics::support_radius;
use crate::discrete::{flux_laplacian_of, lp_norm, quadrature, DensityField, Grid, VelocityField};
use crate::error::{domain, Error, Result};
use crate::exact::critical_exponent;
use crate::scalar::{lit, Real};
use crate::viscosity::ViscosityLaw;

/// Header of the per-step scalar series.
pub const SERIES_HEADER: &str = "t,dt,mass,l1,l2,linf,support_radius";

#[derive(Debug, Clone)]
pub struct PmeConfig<T> {
    pub law: ViscosityLaw<T>,
    pub grid: Grid<T>,
    pub t_end: T,
    pub cfl: T,
    /// Absolute times at which snapshots are recorded.
    pub snapshot_times: Vec<T>,
    pub vacuum_floor: T,
    /// Support threshold relative to `max rho0` for the series column.
    pub support_rel_threshold: T,
    /// Record every k-th step in the scalar series (the last step always).
    pub series_stride: usize,
}

impl<T: Real> PmeConfig<T> {
    pub fn new(law: ViscosityLaw<T>, grid: Grid<T>, t_end: T) -> Result<Self> {
        check_law(&law, &grid)?;
        if !(t_end > T::zero()) || !t_end.is_finite() {
            return Err(domain("t_end must be positive"));
        }
        Ok(Self {
            law,
            grid,
            t_end,
            cfl: lit(0.5),
            snapshot_times: Vec::new(),
            vacuum_floor: T::zero(),
            support_rel_threshold: lit(1e-12),
            series_stride: 1,
        })
    }

    pub fn with_cfl(mut self, cfl: T) -> Result<Self> {
        if !(cfl > T::zero() && cfl <= T::one()) {
            return Err(domain("cfl must lie in (0, 1]"));
        }
        self.cfl = cfl;
        Ok(self)
    }

    pub fn with_snapshots(mut self, times: Vec<T>) -> Result<Self> {
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(domain("snapshot times must be strictly increasing"));
        }
        if times.iter().any(|t| *t < T::zero() || *t > self.t_end) {
            return Err(domain("snapshot times must lie in [0, t_end]"));
        }
        self.snapshot_times = times;
        Ok(self)
    }

    pub fn with_vacuum_floor(mut self, floor: T) -> Result<Self> {
        if !(floor >= T::zero()) {
            return Err(domain("vacuum floor must be nonnegative"));
        }
        self.vacuum_floor = floor;
        Ok(self)
    }

    pub fn with_series_stride(mut self, stride: usize) -> Self {
        self.series_stride = stride.max(1);
        self
    }
}

/// Rejects laws the explicit scheme is not meant for.
pub(crate) fn check_law<T: Real>(law: &ViscosityLaw<T>, grid: &Grid<T>) -> Result<()> {
    if law.dim() != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "law dim {} on a {}D grid",
            law.dim(),
            grid.dim()
        )));
    }
    if let Some(alpha) = law.alpha() {
        let m_c = critical_exponent::<f64>(law.dim());
        let a = alpha.to_f64().unwrap_or(f64::NAN);
        if a <= m_c {
            return Err(Error::ExtinctionRegime { alpha: a, m_c });
        }
    }
    if !law.lame_admissible() {
        let bound = 1.0 - 1.0 / law.dim() as f64;
        return Err(Error::DegenerateLame {
            alpha: law.alpha().and_then(|a| a.to_f64()).unwrap_or(f64::NAN),
            dim: law.dim(),
            bound,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub index: usize,
    pub density: DensityField<T>,
    pub velocity: Option<VelocityField<T>>,
}

impl<T: Real> Snapshot<T> {
    pub fn time(&self) -> T {
        self.density.time
    }

    /// `snap_<index>_<time>.csv`.
    pub fn file_name(&self) -> String {
        format!("snap_{}_{}.csv", self.index, self.time())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow<T> {
    pub t: T,
    pub dt: T,
    pub mass: T,
    pub l1: T,
    pub l2: T,
    pub linf: T,
    pub support_radius: T,
}

impl<T: Real> SeriesRow<T> {
    pub(crate) fn measure(field: &DensityField<T>, dt: T, threshold: T) -> Self {
        let g = &field.grid;
        let v = &field.values;
        Self {
            t: field.time,
            dt,
            mass: quadrature(g, v),
            l1: lp_norm(g, v, T::one()).unwrap_or(T::nan()),
            l2: lp_norm(g, v, lit(2.0)).unwrap_or(T::nan()),
            linf: lp_norm(g, v, T::infinity()).unwrap_or(T::nan()),
            support_radius: support_radius(field, threshold).unwrap_or(T::nan()),
        }
    }
}

/// Time series of snapshots and per-step scalars.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub law: ViscosityLaw<T>,
    pub grid: Grid<T>,
    pub initial: DensityField<T>,
    pub snapshots: Vec<Snapshot<T>>,
    pub series: Vec<SeriesRow<T>>,
    pub steps: usize,
    /// Smallest cell value seen before clamping.
    pub min_pre_clamp: T,
    /// Largest mass moved by a single clamp.
    pub max_clamp_deficit: T,
}

impl<T: Real> Trajectory<T> {
    pub fn final_snapshot(&self) -> Option<&Snapshot<T>> {
        self.snapshots.last()
    }

    pub fn snapshot_at(&self, t: T) -> Option<&Snapshot<T>> {
        let tol = lit::<T>(1e-9) * t.abs().max(T::one());
        self.snapshots.iter().find(|s| (s.time() - t).abs() <= tol)
    }

    pub fn write_series_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{SERIES_HEADER}")?;
        for r in &self.series {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.t, r.dt, r.mass, r.l1, r.l2, r.linf, r.support_radius
            )?;
        }
        Ok(())
    }
}

/// Largest face diffusivity `2 (mu(a) - mu(b)) / (a - b)`, `2 mu'` on equal neighbours.
fn max_face_diffusivity<T: Real>(grid: &Grid<T>, values: &[T], mu: &[T], law: &ViscosityLaw<T>) -> T {
    let two = lit::<T>(2.0);
    let mut d_max = T::zero();
    for axis in 0..grid.dim() {
        for i in 0..values.len() {
            let (_, p) = grid.neighbours(i, axis);
            let (a, b) = (values[i], values[p]);
            let d = if a == b {
                if a == T::zero() {
                    T::zero()
                } else {
                    two * law.mu_prime(a)
                }
            } else {
                two * (mu[p] - mu[i]) / (b - a)
            };
            if d > d_max {
                d_max = d;
            }
        }
    }
    d_max
}

/// `cfl dx^2 / (4 dim D_max)`, capped at `remaining`.
///
/// `D_max` is the largest secant diffusivity over faces, so it stays finite at
/// vacuum for `alpha < 1` and reduces to `max 2 mu'` on smooth data.
pub fn stable_dt<T: Real>(field: &DensityField<T>, law: &ViscosityLaw<T>, cfl: T, remaining: T) -> T {
    let mu: Vec<T> = field.values.iter().map(|v| law.mu(*v)).collect();
    dt_from_mu(field, &mu, law, cfl).min(remaining)
}

fn dt_from_mu<T: Real>(field: &DensityField<T>, mu: &[T], law: &ViscosityLaw<T>, cfl: T) -> T {
    let grid = &field.grid;
    let d_max = max_face_diffusivity(grid, &field.values, mu, law).max(lit(1e-30));
    let dx = grid.min_dx();
    cfl * dx * dx / (lit::<T>(4.0) * T::from_usize_(grid.dim()) * d_max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo<T> {
    pub min_pre_clamp: T,
    pub clamp_deficit: T,
}

/// One explicit step `rho += dt 2 L_h mu(rho)`; see [`step_with_floor`].
pub fn step<T: Real>(field: &DensityField<T>, law: &ViscosityLaw<T>, dt: T) -> Result<DensityField<T>> {
    step_with_floor(field, law, dt, T::zero()).map(|(f, _)| f)
}

/// One explicit step with clamping at `floor`.
///
/// Cells below `floor` are raised to it and the added mass is taken back from
/// the other cells in proportion to their excess over `floor`.
pub fn step_with_floor<T: Real>(
    field: &DensityField<T>,
    law: &ViscosityLaw<T>,
    dt: T,
    floor: T,
) -> Result<(DensityField<T>, StepInfo<T>)> {
    let mu: Vec<T> = field.values.iter().map(|v| law.mu(*v)).collect();
    let limit = dt_from_mu(field, &mu, law, T::one());
    advance(field, &mu, limit, dt, floor)
}

fn advance<T: Real>(
    field: &DensityField<T>,
    mu: &[T],
    limit: T,
    dt: T,
    floor: T,
) -> Result<(DensityField<T>, StepInfo<T>)> {
    if !(dt > T::zero()) || dt > limit * (T::one() + lit(1e-12)) {
        return Err(Error::StabilityViolation {
            dt: dt.to_f64().unwrap_or(f64::NAN),
            limit: limit.to_f64().unwrap_or(f64::NAN),
        });
    }
    let two_dt = lit::<T>(2.0) * dt;
    let lap = flux_laplacian_of(&field.grid, mu);
    let mut values: Vec<T> = field.values.iter().zip(&lap).map(|(r, l)| *r + two_dt * *l).collect();
    let time = field.time + dt;
    if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { time: time.to_f64().unwrap_or(f64::NAN), cell });
    }
    let info = clamp_redistribute(&mut values, floor);
    if info.clamp_deficit > T::zero() {
        debug!("clamp moved {:e} mass at t = {}", info.clamp_deficit, time);
    }
    Ok((DensityField { grid: field.grid, values, time }, info))
}

fn clamp_redistribute<T: Real>(values: &mut [T], floor: T) -> StepInfo<T> {
    let min_pre_clamp = values.iter().copied().fold(T::infinity(), T::min);
    if min_pre_clamp >= floor {
        return StepInfo { min_pre_clamp, clamp_deficit: T::zero() };
    }
    let mut deficit = T::zero();
    let mut excess = T::zero();
    for v in values.iter_mut() {
        if *v < floor {
            deficit = deficit + (floor - *v);
            *v = floor;
        } else {
            excess = excess + (*v - floor);
        }
    }
    if excess > T::zero() {
        let ratio = (deficit / excess).min(T::one());
        for v in values.iter_mut() {
            if *v > floor {
                *v = *v - (*v - floor) * ratio;
            }
        }
    }
    StepInfo { min_pre_clamp, clamp_deficit: deficit }
}

/// Advances `rho0` to `config.t_end`, landing exactly on every snapshot time.
pub fn run<T: Real>(config: &PmeConfig<T>, rho0: DensityField<T>) -> Result<Trajectory<T>> {
    if !rho0.grid.same_shape(&config.grid) {
        return Err(Error::GridMismatch("initial data grid differs from config grid".into()));
    }
    if !(rho0.mass() > T::zero()) {
        return Err(domain("initial mass must be positive"));
    }
    if rho0.time >= config.t_end {
        return Err(domain("initial time must precede t_end"));
    }
    let threshold = config.support_rel_threshold * rho0.max();
    let mut targets: Vec<T> = config
        .snapshot_times
        .iter()
        .copied()
        .filter(|t| *t >= rho0.time)
        .collect();
    targets.push(config.t_end);
    targets.dedup();

    let mut traj = Trajectory {
        law: config.law.clone(),
        grid: config.grid,
        initial: rho0.clone(),
        snapshots: Vec::new(),
        series: vec![SeriesRow::measure(&rho0, T::zero(), threshold)],
        steps: 0,
        min_pre_clamp: rho0.values.iter().copied().fold(T::infinity(), T::min),
        max_clamp_deficit: T::zero(),
    };
    let mut field = rho0;
    let record_snapshot = |traj: &mut Trajectory<T>, field: &DensityField<T>| {
        let index = traj.snapshots.len();
        traj.snapshots.push(Snapshot { index, density: field.clone(), velocity: None });
    };
    if config.snapshot_times.contains(&field.time) {
        record_snapshot(&mut traj, &field);
    }
    for target in targets {
        if target <= field.time {
            continue;
        }
        loop {
            let remaining = target - field.time;
            let mu: Vec<T> = field.values.iter().map(|v| config.law.mu(*v)).collect();
            let limit = dt_from_mu(&field, &mu, &config.law, T::one());
            let mut dt = (limit * config.cfl).min(remaining);
            // Avoid a sliver step right before the target.
            if dt < remaining && remaining - dt < lit::<T>(1e-3) * dt {
                dt = remaining * lit(0.5);
            }
            let last = dt >= remaining;
            let (mut next, info) = advance(&field, &mu, limit, dt, config.vacuum_floor)?;
            if last {
                next.time = target;
            }
            traj.steps += 1;
            traj.min_pre_clamp = traj.min_pre_clamp.min(info.min_pre_clamp);
            traj.max_clamp_deficit = traj.max_clamp_deficit.max(info.clamp_deficit);
            field = next;
            if last || traj.steps % config.series_stride == 0 {
                traj.series.push(SeriesRow::measure(&field, dt, threshold));
            }
            if last {
                break;
            }
        }
        if config.snapshot_times.contains(&target) {
            record_snapshot(&mut traj, &field);
        }
    }
    if traj.min_pre_clamp < lit(-1e-15) {
        warn!("negative undershoot {:e} was clamped", traj.min_pre_clamp);
    }
    if config.snapshot_times.last() != Some(&config.t_end) {
        record_snapshot(&mut traj, &field);
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionTrial<T> {
    /// `||rho1(t) - rho2(t)||_1`.
    pub lhs: T,
    /// `||rho01 - rho02||_1`.
    pub rhs: T,
    pub positive_part_lhs: T,
    pub positive_part_rhs: T,
}

/// Runs both data to time `t` with a common step and compares their distances.
pub fn l1_contraction_trial<T: Real>(
    rho01: &DensityField<T>,
    rho02: &DensityField<T>,
    law: &ViscosityLaw<T>,
    t: T,
    cfl: T,
) -> Result<ContractionTrial<T>> {
    if !rho01.grid.same_shape(&rho02.grid) {
        return Err(Error::GridMismatch("contraction pair on different grids".into()));
    }
    check_law(law, &rho01.grid)?;
    let grid = rho01.grid;
    let dist = |a: &DensityField<T>, b: &DensityField<T>| {
        let diff: Vec<T> = a.values.iter().zip(&b.values).map(|(x, y)| *x - *y).collect();
        let pos: Vec<T> = diff.iter().map(|d| d.max(T::zero())).collect();
        (quadrature(&grid, &diff.iter().map(|d| d.abs()).collect::<Vec<_>>()), quadrature(&grid, &pos))
    };
    let (rhs, positive_part_rhs) = dist(rho01, rho02);
    let mut a = rho01.clone();
    let mut b = rho02.clone();
    let t_end = a.time + t;
    while a.time < t_end {
        let remaining = t_end - a.time;
        let dt = stable_dt(&a, law, cfl, remaining).min(stable_dt(&b, law, cfl, remaining));
        a = step(&a, law, dt)?;
        b = step(&b, law, dt)?;
        if dt >= remaining {
            break;
        }
    }
    let (lhs, positive_part_lhs) = dist(&a, &b);
    Ok(ContractionTrial { lhs, rhs, positive_part_lhs, positive_part_rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::Boundary;
    use crate::exact::{BarenblattSolution, ProfileSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn line(n: usize, a: f64, b: f64) -> Grid<f64> {
        Grid::line(n, a, b, Boundary::ZeroFlux).unwrap()
    }

    #[test]
    fn dt_examples() {
        let g = line(64, 0.0, 1.0);
        let heat = ViscosityLaw::power_law(0.5, 1.0, 1).unwrap();
        let f = DensityField::new(g, vec![0.3; 64], 0.0).unwrap();
        let dx = g.dx(0);
        assert_relative_eq!(stable_dt(&f, &heat, 1.0, 10.0), dx * dx / 4.0, max_relative = 1e-14);

        let zero = DensityField::zeros(g, 0.0);
        assert_eq!(stable_dt(&zero, &heat, 1.0, 0.7), 0.7);

        let pm = ViscosityLaw::power_law(1.0, 2.0, 1).unwrap();
        let f1 = DensityField::from_fn(g, 0.0, |x: [f64; 2]| 1.0 + x[0]).unwrap();
        let f2 = DensityField::from_fn(g, 0.0, |x: [f64; 2]| 2.0 * (1.0 + x[0])).unwrap();
        let r = stable_dt(&f1, &pm, 0.5, 1.0) / stable_dt(&f2, &pm, 0.5, 1.0);
        assert_relative_eq!(r, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn fast_diffusion_dt_is_finite_at_vacuum() {
        let g = line(32, -1.0, 1.0);
        let law = ViscosityLaw::power_law(0.5, 0.5, 1).unwrap();
        let f = DensityField::from_fn(g, 0.0, |x: [f64; 2]| if x[0].abs() < 0.3 { 1.0 } else { 0.0 }).unwrap();
        let dt = stable_dt(&f, &law, 0.5, 1.0);
        assert!(dt > 0.0 && dt < 1.0);
    }

    #[test]
    fn constant_field_is_stationary() {
        let g = line(16, 0.0, 1.0);
        let law = ViscosityLaw::power_law(1.0, 2.0, 1).unwrap();
        let f = DensityField::new(g, vec![0.7; 16], 0.0).unwrap();
        let dt = stable_dt(&f, &law, 0.5, 1.0);
        let next = step(&f, &law, dt).unwrap();
        assert_eq!(next.values, f.values);
    }

    #[test]
    fn step_rejects_unstable_dt() {
        let g = line(16, 0.0, 1.0);
        let law = ViscosityLaw::power_law(1.0, 2.0, 1).unwrap();
        let f = DensityField::new(g, vec![0.7; 16], 0.0).unwrap();
        let dt = stable_dt(&f, &law, 1.0, 1.0);
        assert!(matches!(step(&f, &law, 1.5 * dt), Err(Error::StabilityViolation { .. })));
    }

    #[test]
    fn config_rejects_extinction_and_lame() {
        let g3 = line(16, 0.0, 1.0);
        let law = ViscosityLaw::power_law_unrestricted(1.0, 0.2, 1).unwrap();
        assert!(PmeConfig::new(law, g3, 1.0).is_ok());
        let g2 = Grid::plane(8, 8, (0.0, 1.0), (0.0, 1.0), Boundary::ZeroFlux).unwrap();
        let law = ViscosityLaw::power_law_unrestricted(1.0, 0.4, 2).unwrap();
        assert!(matches!(PmeConfig::new(law, g2, 1.0), Err(Error::DegenerateLame { .. })));
        let law = ViscosityLaw::power_law(1.0, 2.0, 2).unwrap();
        assert!(matches!(PmeConfig::new(law, g3, 1.0), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn one_step_tracks_barenblatt() {
        // Oracle: the analytic solution advanced by dt.
        let law = ViscosityLaw::power_law(0.5, 2.0, 1).unwrap();
        let b = BarenblattSolution::new(ProfileSpec::Constant(1.0), 2.0, 1, 0.5).unwrap();
        let mut errs = vec![];
        for n in [128, 256] {
            let g = line(n, -5.0, 5.0);
            let f = b.sample(&g, 1.0).unwrap();
            let dt = stable_dt(&f, &law, 0.5, 1.0);
            let next = step(&f, &law, dt).unwrap();
            let exact = b.sample(&g, 1.0 + dt).unwrap();
            let diff: Vec<f64> = next.values.iter().zip(&exact.values).map(|(a, b)| a - b).collect();
            errs.push(lp_norm(&g, &diff, 1.0).unwrap() / dt);
        }
        // Per-unit-time local error shrinks with the grid.
        assert!(errs[1] < errs[0], "{errs:?}");
        assert!(errs[1] < 0.05);
    }

    #[test]
    fn snapshots_land_exactly() {
        let g = line(64, -3.0, 3.0);
        let law = ViscosityLaw::power_law(0.5, 2.0, 1).unwrap();
        let b = BarenblattSolution::new(ProfileSpec::Mass(1.0), 2.0, 1, 0.5).unwrap();
        let cfg = PmeConfig::new(law, g, 1.0)
            .unwrap()
            .with_snapshots(vec![0.5, 0.55, 0.8, 1.0])
            .unwrap();
        let traj = run(&cfg, b.sample(&g, 0.5).unwrap()).unwrap();
        let times: Vec<f64> = traj.snapshots.iter().map(|s| s.time()).collect();
        assert_eq!(times, vec![0.5, 0.55, 0.8, 1.0]);
        assert_eq!(traj.snapshots[2].file_name(), "snap_2_0.8.csv");
        let m0 = traj.series[0].mass;
        for r in &traj.series {
            assert!((r.mass - m0).abs() <= 1e-12 * m0);
        }
        let mut buf = Vec::new();
        traj.write_series_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,dt,mass,l1,l2,linf,support_radius\n"));
    }

    #[test]
    fn fast_diffusion_conserves_mass() {
        let g = line(256, -10.0, 10.0);
        let law = ViscosityLaw::power_law(0.5, 0.7, 1).unwrap();
        let rho0 = DensityField::from_fn(g, 0.0, |x: [f64; 2]| (-x[0] * x[0]).exp()).unwrap();
        let cfg = PmeConfig::new(law, g, 0.5).unwrap();
        let traj = run(&cfg, rho0).unwrap();
        let m0 = traj.series[0].mass;
        let drift = traj.series.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max);
        assert!(drift <= 1e-10 * m0, "{drift}");
    }

    #[test]
    fn identical_data_do_not_separate() {
        let g = line(64, -2.0, 2.0);
        let law = ViscosityLaw::power_law(0.5, 2.0, 1).unwrap();
        let f = DensityField::from_fn(g, 0.0, |x: [f64; 2]| (1.0 - x[0] * x[0]).max(0.0)).unwrap();
        let r = l1_contraction_trial(&f, &f, &law, 0.2, 0.5).unwrap();
        assert_eq!(r.lhs, 0.0);
    }

    #[test]
    fn clamp_keeps_mass() {
        let mut v = vec![1.0, -1e-16, 2.0, 0.5];
        let before: f64 = v.iter().sum();
        let info = clamp_redistribute(&mut v, 0.0);
        assert_eq!(info.min_pre_clamp, -1e-16);
        assert!(v.iter().all(|x| *x >= 0.0));
        assert!((v.iter().sum::<f64>() - before).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn step_is_conservative_and_monotone(
            vals in prop::collection::vec(0.0f64..3.0, 32),
            alpha in 0.6f64..3.0,
        ) {
            let g = line(32, 0.0, 1.0);
            let law = ViscosityLaw::power_law(0.5, alpha, 1).unwrap();
            let f = DensityField::new(g, vals, 0.0).unwrap();
            let dt = stable_dt(&f, &law, 1.0, 1.0);
            let (next, info) = step_with_floor(&f, &law, dt, 0.0).unwrap();
            prop_assert!(info.min_pre_clamp >= -1e-15);
            let m0 = f.mass();
            prop_assert!((next.mass() - m0).abs() <= 1e-13 * m0.max(1e-300));
        }
    }
}
