//! Command dispatch: builds solver inputs from a [`RunConfig`] and writes
//! CSVs, `summary.csv` and `report.txt` into the output directory.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_rational::Rational64;
use quasilab::cns::{cns_run, gamma_window, vanishing_pressure_sweep, CnsConfig, CnsState, PressureSpec};
use quasilab::diagnostics::{
    aronson_benilan_monitor, barenblatt_distance, decay_fit, report_block, support_growth_fit,
};
use quasilab::discrete::{write_snapshot_csv, DensityField, Grid};
use quasilab::exact::{
    pde_residual_of_exact, pme_exponents, similarity_exponents_cns, BarenblattSolution, ExactSolution,
    ExtinctionSolution, ProfileSpec,
};
use quasilab::pme::{self, PmeConfig, Snapshot, Trajectory};
use quasilab::viscosity::{power_law_nu, ViscosityLaw};
use quasilab::{DensityField64, Grid64, ViscosityLaw64};

use crate::config::{Command, InitKind, InitVelocity, RunConfig};
use crate::error::CliError;

/// Named scalar results of a run, in emission order.
pub type Fields = Vec<(&'static str, f64)>;

pub fn build_grid(cfg: &RunConfig) -> Result<Grid64, CliError> {
    let g = &cfg.grid;
    let grid = if cfg.law.dim == 2 {
        Grid::plane(g.n, g.ny, (g.a, g.b), (g.ya, g.yb), g.boundary)
    } else {
        Grid::line(g.n, g.a, g.b, g.boundary)
    };
    grid.map_err(|e| CliError::Core { key: "grid".into(), source: e })
}

/// The Lame lower bound on `alpha` only constrains the momentum equation.
pub fn build_law(cfg: &RunConfig) -> Result<ViscosityLaw64, CliError> {
    let l = &cfg.law;
    let law = match cfg.command {
        Command::Pme => ViscosityLaw::power_law_unrestricted(l.mu_c, l.alpha, l.dim),
        _ => ViscosityLaw::power_law(l.mu_c, l.alpha, l.dim),
    };
    law.map_err(|e| CliError::Core { key: "law.alpha".into(), source: e })
}

/// Initial density at the configured start time.
pub fn initial_density(cfg: &RunConfig, grid: Grid64) -> Result<DensityField64, CliError> {
    let i = &cfg.init;
    let c = i.center;
    let shifted = |x: [f64; 2]| [x[0] - c[0], x[1] - c[1], 0.0];
    let dim = grid.dim();
    let field = match i.kind {
        InitKind::Barenblatt => {
            let sol = BarenblattSolution::new(ProfileSpec::Mass(i.mass), cfg.law.alpha, dim, cfg.law.mu_c)?;
            DensityField::from_fn(grid, i.t0, |x| sol.value(i.t0, &shifted(x)[..dim]))?
        }
        InitKind::Gaussian => {
            let norm = i.mass / (2.0 * std::f64::consts::PI * i.sigma * i.sigma).powf(dim as f64 / 2.0);
            DensityField::from_fn(grid, 0.0, |x| {
                let y = shifted(x);
                let r2: f64 = y[..dim].iter().map(|v| v * v).sum();
                i.background + norm * (-r2 / (2.0 * i.sigma * i.sigma)).exp()
            })?
        }
        InitKind::Box => {
            let inside = |x: [f64; 2]| shifted(x)[..dim].iter().all(|v| v.abs() < 0.5 * i.width);
            let indicator = DensityField::from_fn(grid, 0.0, |x| if inside(x) { 1.0 } else { 0.0 })?;
            let volume = indicator.mass();
            if volume == 0.0 {
                return Err(CliError::semantic("init.width", "box contains no cell centre"));
            }
            let h = i.mass / volume;
            DensityField::new(grid, indicator.values.iter().map(|v| i.background + h * v).collect(), 0.0)?
        }
        InitKind::File => read_density_csv(i.path.as_deref().unwrap_or(Path::new("")), grid)?,
        InitKind::Extinction => {
            return Err(CliError::semantic("init", "extinction data has no solver run"));
        }
    };
    Ok(field)
}

/// Reads a snapshot-format CSV whose cell centres match `grid`.
pub fn read_density_csv(path: &Path, grid: Grid64) -> Result<DensityField64, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let bad = |msg: String| CliError::semantic("init.path", format!("{}: {msg}", path.display()));
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let rho_col = col("rho").ok_or_else(|| bad("no `rho` column".into()))?;
    let coord_cols: Vec<usize> = ["x", "y"][..grid.dim()]
        .iter()
        .map(|n| col(n).ok_or_else(|| bad(format!("no `{n}` column"))))
        .collect::<Result<_, _>>()?;
    let tol = 1e-9 * (grid.bounds(0).1 - grid.bounds(0).0).abs();
    let mut values = Vec::with_capacity(grid.len());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if i >= grid.len() {
            return Err(bad(format!("more than {} rows", grid.len())));
        }
        let num = |c: usize| -> Result<f64, CliError> {
            rec.get(c)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| bad(format!("row {}: bad number", i + 2)))
        };
        let center = grid.center(i);
        for (axis, &c) in coord_cols.iter().enumerate() {
            if (num(c)? - center[axis]).abs() > tol {
                return Err(bad(format!("row {}: coordinate does not match the grid", i + 2)));
            }
        }
        values.push(num(rho_col)?);
    }
    if values.len() != grid.len() {
        return Err(bad(format!("{} rows for {} cells", values.len(), grid.len())));
    }
    Ok(DensityField::new(grid, values, 0.0)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_snapshots(dir: &Path, snaps: &[Snapshot<f64>]) -> Result<(), CliError> {
    for s in snaps {
        let u = s.velocity.as_ref().map(|v| v.components[0].as_slice());
        write_with(&dir.join(s.file_name()), |w| write_snapshot_csv(w, &s.density, u))?;
    }
    Ok(())
}

/// `report.txt` and `summary.csv` with the same fields in the same order.
fn write_summary(dir: &Path, cfg: &RunConfig, blocks: &[(&str, Fields)]) -> Result<(), CliError> {
    let mut text = echo_config(cfg);
    for (title, fields) in blocks {
        text.push('\n');
        text.push_str(&report_block(title, fields));
    }
    write_with(&dir.join("report.txt"), |w| w.write_all(text.as_bytes()))?;
    write_with(&dir.join("summary.csv"), |w| {
        writeln!(w, "section,field,value")?;
        for (title, fields) in blocks {
            for (k, v) in fields {
                writeln!(w, "{title},{k},{v:e}")?;
            }
        }
        Ok(())
    })
}

/// The effective configuration in the config grammar.
pub fn echo_config(cfg: &RunConfig) -> String {
    let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
    let mut s = String::new();
    let _ = writeln!(s, "command = {}\ninit = {}", cfg.command, cfg.init.kind);
    let _ = writeln!(s, "\n[law]\nmu_c = {}\nalpha = {}\ndim = {}", cfg.law.mu_c, cfg.law.alpha, cfg.law.dim);
    let g = &cfg.grid;
    let _ = writeln!(
        s,
        "\n[grid]\nn = {}\nny = {}\na = {}\nb = {}\nya = {}\nyb = {}\nboundary = {}",
        g.n,
        g.ny,
        g.a,
        g.b,
        g.ya,
        g.yb,
        g.boundary
    );
    let i = &cfg.init;
    let _ = writeln!(
        s,
        "\n[init]\nmass = {}\ncenter = {}, {}\nwidth = {}\nsigma = {}\nbackground = {}\nt_ext = {}\nvelocity = {}",
        i.mass,
        i.center[0],
        i.center[1],
        i.width,
        i.sigma,
        i.background,
        i.t_ext,
        match i.velocity {
            InitVelocity::Quasi => "quasi",
            InitVelocity::Zero => "zero",
        }
    );
    if matches!(i.kind, InitKind::Barenblatt | InitKind::Extinction) {
        let _ = writeln!(s, "t0 = {}", i.t0);
    }
    if let Some(p) = &i.path {
        let _ = writeln!(s, "path = {}", p.display());
    }
    let t = &cfg.time;
    let _ = writeln!(s, "\n[time]\nt_end = {}\ncfl = {}\nseries_stride = {}", t.t_end, t.cfl, t.series_stride);
    if !t.snapshot_times.is_empty() {
        let _ = writeln!(s, "snapshot_times = {}", list(&t.snapshot_times));
    }
    let p = &cfg.pressure;
    let _ = writeln!(s, "\n[pressure]\neps = {}\na = {}\ngamma = {}", p.eps, p.a, p.gamma);
    if !p.eps_list.is_empty() {
        let _ = writeln!(s, "eps_list = {}", list(&p.eps_list));
    }
    let tol = &cfg.tolerances;
    let _ = writeln!(
        s,
        "\n[tolerances]\nvacuum_floor = {}\nrho_min_rel = {}\nsupport_threshold = {}\nentropy_slack = {}",
        tol.vacuum_floor, tol.rho_min_rel, tol.support_threshold, tol.entropy_slack
    );
    s
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Text listing for the `exponents` command.
pub fn exponents_text(alpha: Rational64, dim: usize, pair: Option<(Rational64, Rational64)>) -> Result<String, CliError> {
    let e = pme_exponents(alpha, dim)?;
    let mut out = String::new();
    let _ = writeln!(out, "alpha = {alpha}\ndim = {dim}\nm_c = {}", e.m_c);
    let _ = writeln!(out, "gamma1 = {}\nbeta = {}\nsigma = {}", e.gamma1, e.beta_space, e.sigma_mass);
    let _ = writeln!(out, "time_exp_inf = {}\nmass_exp_inf = {}", e.time_exp_inf(), e.mass_exp_inf());
    if let Some((theta, gamma)) = pair {
        let s = similarity_exponents_cns(theta, gamma)?;
        let _ = writeln!(out, "theta = {theta}\ngamma = {gamma}");
        let _ = writeln!(out, "e_rho = {}\ne_u = {}\ne_x = {}", s.e_rho, s.e_u, s.e_x);
    }
    Ok(out)
}

fn pme_fields(traj: &Trajectory<f64>, cfg: &RunConfig) -> (Fields, Fields) {
    let first = traj.series.first().copied();
    let last = traj.series.last().copied();
    let m0 = first.map_or(f64::NAN, |r| r.mass);
    let m1 = last.map_or(f64::NAN, |r| r.mass);
    let mut run: Fields = vec![
        ("t_start", traj.initial.time),
        ("t_end", cfg.time.t_end),
        ("steps", traj.steps as f64),
        ("mass_initial", m0),
        ("mass_final", m1),
        ("mass_drift_rel", (m1 - m0).abs() / m0),
        ("min_pre_clamp", traj.min_pre_clamp),
        ("max_clamp_deficit", traj.max_clamp_deficit),
        ("l2_final", last.map_or(f64::NAN, |r| r.l2)),
        ("linf_final", last.map_or(f64::NAN, |r| r.linf)),
        ("support_radius_final", last.map_or(f64::NAN, |r| r.support_radius)),
    ];
    if let Some(s) = traj.final_snapshot() {
        if let Ok(d) = barenblatt_distance(&s.density, s.time(), m1, &traj.law) {
            run.push(("barenblatt_l1_dist", d.l1_dist));
            run.push(("barenblatt_scaled_linf_dist", d.scaled_linf_dist));
        }
    }
    let mut fits: Fields = Vec::new();
    if let (Some(a), Some(b)) = (traj.snapshots.first(), traj.snapshots.last()) {
        let window = (a.time(), b.time());
        if let Ok(f) = decay_fit(traj, f64::INFINITY, window) {
            fits.extend([("linf_slope", f.fitted_slope), ("linf_slope_theory", f.theory_slope)]);
        }
        if let Ok(f) = decay_fit(traj, 2.0, window) {
            fits.extend([("l2_slope", f.fitted_slope), ("l2_slope_theory", f.theory_slope)]);
        }
        let threshold = cfg.tolerances.support_threshold * traj.initial.max();
        if let Ok(f) = support_growth_fit(traj, threshold, window) {
            fits.extend([("support_slope", f.fitted_slope), ("support_slope_theory", f.theory_slope)]);
        }
        if let Ok(r) = aronson_benilan_monitor(traj, 0.0, window) {
            fits.extend([
                ("ab_worst_normalized_violation", r.worst_normalized_violation),
                ("ab_worst_l1_ratio", r.worst_l1_ratio),
                ("ab_triples", r.triples as f64),
            ]);
        }
    }
    (run, fits)
}

pub fn run_pme(cfg: &RunConfig, dir: &Path) -> Result<Fields, CliError> {
    if cfg.init.kind == InitKind::Extinction {
        return run_extinction(cfg, dir);
    }
    let law = build_law(cfg)?;
    let grid = build_grid(cfg)?;
    let rho0 = initial_density(cfg, grid)?;
    let mut pcfg = PmeConfig::new(law, grid, cfg.time.t_end)?
        .with_cfl(cfg.time.cfl)?
        .with_snapshots(cfg.time.snapshot_times.clone())?
        .with_vacuum_floor(cfg.tolerances.vacuum_floor)?
        .with_series_stride(cfg.time.series_stride);
    pcfg.support_rel_threshold = cfg.tolerances.support_threshold;
    let traj = pme::run(&pcfg, rho0)?;
    prepare_dir(dir)?;
    write_with(&dir.join("series.csv"), |w| traj.write_series_csv(w))?;
    write_snapshots(dir, &traj.snapshots)?;
    let (run, fits) = pme_fields(&traj, cfg);
    let mut blocks = vec![("pme", run.clone())];
    if !fits.is_empty() {
        blocks.push(("fits", fits));
    }
    write_summary(dir, cfg, &blocks)?;
    Ok(run)
}

/// Samples the extinction solution on the radial annulus `[a, b]` and
/// records the pointwise residual.
fn run_extinction(cfg: &RunConfig, dir: &Path) -> Result<Fields, CliError> {
    let l = &cfg.law;
    let sol = ExtinctionSolution::new(l.alpha, l.dim, cfg.init.t_ext, l.mu_c)?;
    let law = ViscosityLaw::power_law_unrestricted(l.mu_c, l.alpha, l.dim)?;
    let grid = Grid::line(cfg.grid.n, cfg.grid.a, cfg.grid.b, cfg.grid.boundary)?;
    let mut times = vec![cfg.init.t0];
    times.extend(cfg.time.snapshot_times.iter().copied().filter(|t| *t > cfg.init.t0));
    if times.last() != Some(&cfg.time.t_end) {
        times.push(cfg.time.t_end);
    }
    let point = |r: f64| {
        let mut x = vec![0.0; l.dim];
        x[0] = r;
        x
    };
    prepare_dir(dir)?;
    let mut worst: f64 = 0.0;
    let mut rows = String::from("t,r,rho,residual\n");
    for (index, &t) in times.iter().enumerate() {
        let density = DensityField::from_fn(grid, t, |x| sol.value(t, &point(x[0])))?;
        let res = pde_residual_of_exact(&sol, &law, t, &grid)?;
        for (j, r) in res.iter().enumerate() {
            worst = worst.max(r.abs());
            let _ = writeln!(rows, "{t},{},{},{r}", grid.coord(0, j), density.values[j]);
        }
        write_snapshots(dir, &[Snapshot { index, density, velocity: None }])?;
    }
    write_with(&dir.join("extinction_residual.csv"), |w| w.write_all(rows.as_bytes()))?;
    let fields: Fields = vec![
        ("c_alpha", sol.c_alpha),
        ("t_ext", sol.t_ext),
        ("dx", grid.dx(0)),
        ("max_abs_residual", worst),
    ];
    write_summary(dir, cfg, &[("extinction", fields.clone())])?;
    Ok(fields)
}

fn cns_inputs(cfg: &RunConfig) -> Result<(CnsConfig<f64>, CnsState<f64>), CliError> {
    let law = build_law(cfg)?;
    let grid = build_grid(cfg)?;
    let rho0 = initial_density(cfg, grid)?;
    let p = &cfg.pressure;
    let spec = PressureSpec::new(p.eps, p.a, p.gamma).map_err(|e| CliError::Core { key: "pressure".into(), source: e })?;
    let state = match cfg.init.velocity {
        InitVelocity::Quasi => CnsState::quasi(&rho0, &law)?,
        InitVelocity::Zero => CnsState::from_velocity(&rho0, &vec![0.0; grid.len()])?,
    };
    let mut ccfg = CnsConfig::new(law, grid, spec, cfg.time.t_end)?
        .with_cfl(cfg.time.cfl)?
        .with_snapshots(cfg.time.snapshot_times.clone())?;
    ccfg.rho_min_rel = cfg.tolerances.rho_min_rel;
    Ok((ccfg, state))
}

fn admissibility_fields(cfg: &RunConfig) -> Fields {
    let mut out = Fields::new();
    for (name, dim) in [("gamma_admissible_2d", 2), ("gamma_admissible_3d", 3)] {
        let nu = power_law_nu(cfg.law.alpha, dim);
        if let Ok(a) = gamma_window(cfg.pressure.gamma, nu, nu, dim) {
            out.push((name, flag(a.admissible)));
        }
    }
    out
}

pub fn run_cns(cfg: &RunConfig, dir: &Path) -> Result<Fields, CliError> {
    let (ccfg, state) = cns_inputs(cfg)?;
    let p0 = state.total_momentum();
    let run = cns_run(&ccfg, state)?;
    prepare_dir(dir)?;
    write_with(&dir.join("series.csv"), |w| run.trajectory.write_series_csv(w))?;
    write_with(&dir.join("entropy.csv"), |w| run.write_entropy_csv(w))?;
    write_snapshots(dir, &run.trajectory.snapshots)?;
    let (mut fields, _) = pme_fields(&run.trajectory, cfg);
    fields.retain(|(k, _)| !k.starts_with("barenblatt"));
    let e0 = run.entropy.first().copied();
    let slack = cfg.tolerances.entropy_slack;
    let energy_ok = e0.is_some_and(|e| run.max_energy_increase <= slack * e.energy);
    let bd_ok = e0.is_some_and(|e| run.max_bd_increase <= slack * e.bd);
    let mut entropy: Fields = vec![
        ("momentum_initial", p0),
        ("momentum_final", run.final_state.total_momentum()),
        ("energy_initial", e0.map_or(f64::NAN, |e| e.energy)),
        ("bd_initial", e0.map_or(f64::NAN, |e| e.bd)),
        ("max_energy_increase", run.max_energy_increase),
        ("max_bd_increase", run.max_bd_increase),
        ("min_pressure_cross", run.min_pressure_cross),
        ("mv_excess", run.mv_excess),
        ("pressure_l1l1", run.pressure_l1l1),
        ("pressure_linf_l1", run.pressure_linf_l1),
        ("pressure_l53", run.pressure_l53),
        ("energy_nonincreasing", flag(energy_ok)),
        ("bd_nonincreasing", flag(bd_ok)),
        ("pressure_cross_nonnegative", flag(run.min_pressure_cross >= 0.0)),
    ];
    entropy.extend(admissibility_fields(cfg));
    write_summary(dir, cfg, &[("cns", fields.clone()), ("entropy", entropy.clone())])?;
    fields.extend(entropy);
    Ok(fields)
}

pub fn run_sweep(cfg: &RunConfig, dir: &Path) -> Result<Fields, CliError> {
    let (ccfg, state) = cns_inputs(cfg)?;
    let table = vanishing_pressure_sweep(&ccfg, &state, &cfg.pressure.eps_list)?;
    prepare_dir(dir)?;
    write_with(&dir.join("convergence.csv"), |w| table.write_csv(w))?;
    let r = &table.rows;
    let dist_dec = r.windows(2).all(|w| w[1].sup_l1_dist < w[0].sup_l1_dist);
    let press_dec = r.windows(2).all(|w| w[1].pressure_l1l1 < w[0].pressure_l1l1);
    let mut fields: Fields = vec![
        ("runs", r.len() as f64),
        ("sample_times", table.sample_times.len() as f64),
        ("sup_l1_dist_decreasing", flag(dist_dec)),
        ("pressure_l1l1_decreasing", flag(press_dec)),
    ];
    if let Some(last) = r.last() {
        fields.extend([
            ("smallest_eps", last.eps),
            ("smallest_eps_sup_l1_dist", last.sup_l1_dist),
            ("smallest_eps_pressure_l1l1", last.pressure_l1l1),
        ]);
    }
    fields.extend(admissibility_fields(cfg));
    write_summary(dir, cfg, &[("sweep", fields.clone())])?;
    Ok(fields)
}

/// Runs a solver command, writing artifacts into `dir`.
pub fn dispatch(cfg: &RunConfig, dir: &Path) -> Result<Fields, CliError> {
    match cfg.command {
        Command::Pme => run_pme(cfg, dir),
        Command::Cns => run_cns(cfg, dir),
        Command::Sweep => run_sweep(cfg, dir),
        Command::Exponents | Command::Verify => {
            Err(CliError::semantic("command", format!("`{}` takes no output directory", cfg.command)))
        }
    }
}

/// Output directory: the `--out` flag wins over `output.dir`.
pub fn output_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    flag.or_else(|| cfg.output.clone())
        .ok_or_else(|| CliError::semantic("output.dir", "no output directory (use --out or output.dir)"))
}
