//! External CSV headers, byte for byte.

use quasilab::cns::{
    cns_run, smooth_wave, vanishing_pressure_sweep, CnsConfig, CnsState, PressureSpec, CONVERGENCE_HEADER,
    ENTROPY_HEADER,
};
use quasilab::discrete::{write_snapshot_csv, Boundary, Grid};
use quasilab::exact::{BarenblattSolution, ProfileSpec};
use quasilab::pme::{self, PmeConfig, SERIES_HEADER};
use quasilab::quasi::{quasi_momentum_residual, write_residual_csv, QuasiSnapshotTriple, RESIDUAL_HEADER};
use quasilab::viscosity::ViscosityLaw;

fn first_line(buf: &[u8]) -> &str {
    std::str::from_utf8(buf).unwrap().lines().next().unwrap()
}

#[test]
fn header_constants() {
    assert_eq!(SERIES_HEADER, "t,dt,mass,l1,l2,linf,support_radius");
    assert_eq!(RESIDUAL_HEADER, "t,dx,dt,direct,identity,mismatch");
    assert_eq!(
        CONVERGENCE_HEADER,
        "eps,sup_l1_dist,final_l1_dist,final_l2_dist,support_excess,pressure_l1l1,pressure_linf_l1"
    );
    assert_eq!(ENTROPY_HEADER, "t,energy,bd,mv,pressure_cross_term");
}

#[test]
fn writers_emit_the_headers() {
    let law = ViscosityLaw::power_law(0.5, 2.0, 1).unwrap();
    let g = Grid::line(64, -4.0, 4.0, Boundary::ZeroFlux).unwrap();
    let b = BarenblattSolution::new(ProfileSpec::Mass(1.0), 2.0, 1, 0.5).unwrap();
    let rho0 = b.sample(&g, 0.5).unwrap();

    let traj = pme::run(&PmeConfig::new(law.clone(), g, 0.6).unwrap().with_snapshots(vec![0.55]).unwrap(), rho0.clone())
        .unwrap();
    let mut buf = Vec::new();
    traj.write_series_csv(&mut buf).unwrap();
    assert_eq!(first_line(&buf), SERIES_HEADER);
    assert_eq!(traj.snapshots[0].file_name(), "snap_0_0.55.csv");
    assert_eq!(traj.snapshots[1].file_name(), "snap_1_0.6.csv");

    let mut buf = Vec::new();
    write_snapshot_csv(&mut buf, &rho0, None).unwrap();
    assert_eq!(first_line(&buf), "x,rho");
    assert_eq!(std::str::from_utf8(&buf).unwrap().lines().count(), g.len() + 1);
    let g2 = Grid::plane(8, 8, (0.0, 1.0), (0.0, 1.0), Boundary::Periodic).unwrap();
    let f2 = quasilab::discrete::DensityField::zeros(g2, 0.0);
    let mut buf = Vec::new();
    write_snapshot_csv(&mut buf, &f2, Some(&vec![0.0; g2.len()])).unwrap();
    assert_eq!(first_line(&buf), "x,y,rho,u");

    let ds = [0.99, 1.0, 1.01].map(|t| b.sample(&g, t).unwrap());
    let r = quasi_momentum_residual(&QuasiSnapshotTriple::from_densities(ds, &law).unwrap(), &law).unwrap();
    let mut buf = Vec::new();
    write_residual_csv(&mut buf, &[r]).unwrap();
    assert_eq!(first_line(&buf), RESIDUAL_HEADER);

    let heat = ViscosityLaw::power_law(0.5, 1.0, 1).unwrap();
    let s0 = smooth_wave(32, 1.0, 1.0, 0.2, 0.1).unwrap();
    let cfg = CnsConfig::new(heat, s0.grid, PressureSpec::new(1.0, 1.0, 2.0).unwrap(), 0.01).unwrap();
    let run = cns_run(&cfg, s0).unwrap();
    let mut buf = Vec::new();
    run.write_entropy_csv(&mut buf).unwrap();
    assert_eq!(first_line(&buf), ENTROPY_HEADER);

    let cfg = CnsConfig::new(law.clone(), g, PressureSpec::new(1.0, 1.0, 2.0).unwrap(), 0.6).unwrap();
    let init = CnsState::quasi(&rho0, &law).unwrap();
    let table = vanishing_pressure_sweep(&cfg, &init, &[0.1, 0.01]).unwrap();
    let mut buf = Vec::new();
    table.write_csv(&mut buf).unwrap();
    assert_eq!(first_line(&buf), CONVERGENCE_HEADER);
    let eps: Vec<&str> = std::str::from_utf8(&buf).unwrap().lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(eps, ["0.1", "0.01"]);
}
