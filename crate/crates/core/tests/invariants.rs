//! End-to-end invariants of the porous-medium solver on random data.

use proptest::prelude::*;

use quasilab::discrete::{lp_norm, Boundary, DensityField, Grid};
use quasilab::pme::{self, PmeConfig};
use quasilab::viscosity::ViscosityLaw;

fn evolve(values: Vec<f64>, alpha: f64, boundary: Boundary) -> (Grid<f64>, Vec<f64>, Vec<f64>) {
    let g = Grid::line(values.len(), -1.0, 1.0, boundary).unwrap();
    let law = ViscosityLaw::power_law(0.5, alpha, 1).unwrap();
    let rho0 = DensityField::new(g, values.clone(), 0.0).unwrap();
    let traj = pme::run(&PmeConfig::new(law, g, 0.01).unwrap(), rho0).unwrap();
    let out = traj.final_snapshot().unwrap().density.values.clone();
    (g, values, out)
}

fn data() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..2.0f64, 48)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mass_is_conserved_and_density_stays_nonnegative(v in data(), alpha in 1.2..3.0f64, periodic in any::<bool>()) {
        let bc = if periodic { Boundary::Periodic } else { Boundary::ZeroFlux };
        let (g, v0, v1) = evolve(v, alpha, bc);
        let m0 = lp_norm(&g, &v0, 1.0).unwrap();
        let m1: f64 = v1.iter().sum::<f64>() * g.cell_volume();
        prop_assert!((m1 - m0).abs() <= 1e-12 * m0.max(1.0));
        prop_assert!(v1.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn l1_distance_does_not_grow(a in data(), b in data(), alpha in 1.2..3.0f64) {
        let (g, a0, a1) = evolve(a, alpha, Boundary::ZeroFlux);
        let (_, b0, b1) = evolve(b, alpha, Boundary::ZeroFlux);
        let d0: Vec<f64> = a0.iter().zip(&b0).map(|(x, y)| x - y).collect();
        let d1: Vec<f64> = a1.iter().zip(&b1).map(|(x, y)| x - y).collect();
        let (n0, n1) = (lp_norm(&g, &d0, 1.0).unwrap(), lp_norm(&g, &d1, 1.0).unwrap());
        prop_assert!(n1 <= n0 + 1e-12, "{n1} > {n0}");
    }
}
