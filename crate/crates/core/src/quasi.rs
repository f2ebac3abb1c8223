//! Quasi-solutions `u = -grad phi(rho)` and the discrete momentum identity.

use std::io::{self, Write};

use crate::discrete::{curl_2d, flux_laplacian, partial, DensityField, Grid, VelocityField};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::viscosity::{ViscosityLaw, DEFAULT_VACUUM_THRESHOLD};

pub const RESIDUAL_HEADER: &str = "t,dx,dt,direct,identity,mismatch";

/// Default vacuum cutoff `1e-10 max rho`.
pub fn default_vacuum_eps<T: Real>(field: &DensityField<T>) -> T {
    lit::<T>(DEFAULT_VACUUM_THRESHOLD) * field.max()
}

/// `u = -phi'(rho) grad_h rho`, zero where `rho < vacuum_eps`.
pub fn velocity_from_density<T: Real>(
    field: &DensityField<T>,
    law: &ViscosityLaw<T>,
    vacuum_eps: T,
) -> VelocityField<T> {
    let grid = field.grid;
    let rho = &field.values;
    let components = (0..grid.dim())
        .map(|axis| {
            partial(&grid, rho, axis)
                .into_iter()
                .zip(rho)
                .map(|(g, r)| {
                    if *r < vacuum_eps || *r <= T::zero() {
                        T::zero()
                    } else {
                        -law.phi_prime(*r) * g
                    }
                })
                .collect()
        })
        .collect();
    VelocityField { grid, components }
}

/// Three snapshots at `t - dt`, `t`, `t + dt` on one grid.
#[derive(Debug, Clone)]
pub struct QuasiSnapshotTriple<T> {
    pub densities: [DensityField<T>; 3],
    pub velocities: [VelocityField<T>; 3],
}

impl<T: Real> QuasiSnapshotTriple<T> {
    pub fn new(densities: [DensityField<T>; 3], velocities: [VelocityField<T>; 3]) -> Result<Self> {
        let grid = densities[0].grid;
        if densities.iter().any(|d| d.grid != grid) || velocities.iter().any(|v| v.grid != grid) {
            return Err(Error::InconsistentTriple("snapshots live on different grids".into()));
        }
        let (t0, t1, t2) = (densities[0].time, densities[1].time, densities[2].time);
        let (d1, d2) = (t1 - t0, t2 - t1);
        if !(d1 > T::zero()) || (d1 - d2).abs() > lit::<T>(1e-9) * d1.max(d2) {
            return Err(Error::InconsistentTriple(format!("non-uniform times {t0}, {t1}, {t2}")));
        }
        Ok(Self { densities, velocities })
    }

    /// Velocities reconstructed with the default vacuum cutoff.
    pub fn from_densities(densities: [DensityField<T>; 3], law: &ViscosityLaw<T>) -> Result<Self> {
        let velocities = densities
            .clone()
            .map(|d| velocity_from_density(&d, law, default_vacuum_eps(&d)));
        Self::new(densities, velocities)
    }

    pub fn grid(&self) -> Grid<T> {
        self.densities[0].grid
    }

    pub fn dt(&self) -> T {
        (self.densities[2].time - self.densities[0].time) * lit(0.5)
    }

    pub fn time(&self) -> T {
        self.densities[1].time
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiResidual<T> {
    pub t: T,
    pub dx: T,
    pub dt: T,
    pub direct_residual_norm: T,
    pub identity_rhs_norm: T,
    pub mismatch_norm: T,
    /// Cells in the interior mask.
    pub cells: usize,
}

pub fn write_residual_csv<T: Real, W: Write>(mut w: W, rows: &[QuasiResidual<T>]) -> io::Result<()> {
    writeln!(w, "{RESIDUAL_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.t, r.dx, r.dt, r.direct_residual_norm, r.identity_rhs_norm, r.mismatch_norm
        )?;
    }
    Ok(())
}

/// Cells with `rho >= 10 eps` in a 3-cell neighbourhood, at least 3 cells from the domain edge.
fn interior_mask<T: Real>(grid: &Grid<T>, rho: &[T], eps: T) -> Vec<bool> {
    let floor = lit::<T>(10.0) * eps;
    let dense: Vec<bool> = rho.iter().map(|r| *r >= floor && *r > T::zero()).collect();
    let mut mask = dense.clone();
    for axis in 0..grid.dim() {
        for _ in 0..3 {
            let prev = mask.clone();
            for (i, m) in mask.iter_mut().enumerate() {
                let (a, b) = grid.neighbours(i, axis);
                *m = prev[i] && prev[a] && prev[b];
            }
        }
    }
    for (i, m) in mask.iter_mut().enumerate() {
        if grid.edge_distance(i) < 3 {
            *m = false;
        }
    }
    mask
}

/// Direct momentum residual versus `-grad(2 mu'(rho)(d_t rho - 2 Laplacian mu(rho)))`
/// at the middle snapshot, in `L^2` over the interior mask.
pub fn quasi_momentum_residual<T: Real>(
    triple: &QuasiSnapshotTriple<T>,
    law: &ViscosityLaw<T>,
) -> Result<QuasiResidual<T>> {
    let grid = triple.grid();
    let dim = grid.dim();
    let n = grid.len();
    for (d, v) in triple.densities.iter().zip(&triple.velocities) {
        let expect = velocity_from_density(d, law, default_vacuum_eps(d));
        let scale = v
            .components
            .iter()
            .flatten()
            .fold(T::one(), |m, x| m.max(x.abs()));
        for (a, b) in v.components.iter().flatten().zip(expect.components.iter().flatten()) {
            if (*a - *b).abs() > lit::<T>(1e-10) * scale {
                return Err(Error::InconsistentTriple(format!(
                    "velocity at t = {} is not the quasi velocity",
                    d.time
                )));
            }
        }
    }
    let dt = triple.dt();
    let two_dt = lit::<T>(2.0) * dt;
    let two = lit::<T>(2.0);
    let [d0, d1, d2] = &triple.densities;
    let [v0, v1, v2] = &triple.velocities;
    let rho = &d1.values;
    let u = &v1.components;

    let mu: Vec<T> = rho.iter().map(|r| law.mu(*r)).collect();
    let lambda: Vec<T> = rho.iter().map(|r| law.lambda(*r)).collect();
    // du[a][b] = d_b u_a
    let du: Vec<Vec<Vec<T>>> = (0..dim)
        .map(|a| (0..dim).map(|b| partial(&grid, &u[a], b)).collect())
        .collect();
    let div_u: Vec<T> = (0..n).map(|i| (0..dim).fold(T::zero(), |s, a| s + du[a][a][i])).collect();
    let lambda_div: Vec<T> = lambda.iter().zip(&div_u).map(|(l, d)| *l * *d).collect();

    let mut direct = vec![vec![T::zero(); n]; dim];
    for a in 0..dim {
        let m0: Vec<T> = d0.values.iter().zip(&v0.components[a]).map(|(r, v)| *r * *v).collect();
        let m2: Vec<T> = d2.values.iter().zip(&v2.components[a]).map(|(r, v)| *r * *v).collect();
        for i in 0..n {
            direct[a][i] = (m2[i] - m0[i]) / two_dt;
        }
        for b in 0..dim {
            let conv: Vec<T> = (0..n).map(|i| rho[i] * u[a][i] * u[b][i]).collect();
            let stress: Vec<T> = (0..n).map(|i| mu[i] * (du[a][b][i] + du[b][a][i])).collect();
            let dconv = partial(&grid, &conv, b);
            let dstress = partial(&grid, &stress, b);
            for i in 0..n {
                direct[a][i] = direct[a][i] + dconv[i] - dstress[i];
            }
        }
        let dl = partial(&grid, &lambda_div, a);
        for i in 0..n {
            direct[a][i] = direct[a][i] - dl[i];
        }
    }

    let lap = flux_laplacian(&grid, rho, |r| law.mu(r));
    let pme_res: Vec<T> = (0..n)
        .map(|i| two * law.mu_prime(rho[i]) * ((d2.values[i] - d0.values[i]) / two_dt - two * lap[i]))
        .collect();
    let identity: Vec<Vec<T>> = (0..dim)
        .map(|a| partial(&grid, &pme_res, a).into_iter().map(|x| -x).collect())
        .collect();

    let eps = default_vacuum_eps(d1);
    let mask = interior_mask(&grid, rho, eps);
    let dv = grid.cell_volume();
    let (mut sd, mut si, mut sm) = (T::zero(), T::zero(), T::zero());
    let mut cells = 0;
    for i in (0..n).filter(|i| mask[*i]) {
        cells += 1;
        for a in 0..dim {
            let (x, y) = (direct[a][i], identity[a][i]);
            sd = sd + x * x;
            si = si + y * y;
            sm = sm + (x - y) * (x - y);
        }
    }
    Ok(QuasiResidual {
        t: triple.time(),
        dx: grid.min_dx(),
        dt,
        direct_residual_norm: (sd * dv).sqrt(),
        identity_rhs_norm: (si * dv).sqrt(),
        mismatch_norm: (sm * dv).sqrt(),
        cells,
    })
}

/// `L^2` norm of the discrete curl of a 2D velocity.
pub fn curl_norm<T: Real>(vf: &VelocityField<T>) -> Result<T> {
    let c = curl_2d(vf)?;
    Ok((vf.grid.cell_volume() * c.iter().map(|x| *x * *x).sum::<T>()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::Boundary;
    use crate::exact::{BarenblattSolution, ProfileSpec};

    #[test]
    fn constant_density_has_zero_velocity_and_residual() {
        let g = Grid::line(32, 0.0, 1.0, Boundary::ZeroFlux).unwrap();
        let law = ViscosityLaw::power_law(1.0, 2.0, 1).unwrap();
        let ds = [0.0, 0.1, 0.2].map(|t| DensityField::new(g, vec![2.0; 32], t).unwrap());
        let u = velocity_from_density(&ds[0], &law, 1e-10);
        assert!(u.components[0].iter().all(|v| *v == 0.0));
        let triple = QuasiSnapshotTriple::from_densities(ds, &law).unwrap();
        let r = quasi_momentum_residual(&triple, &law).unwrap();
        assert_eq!((r.direct_residual_norm, r.identity_rhs_norm, r.mismatch_norm), (0.0, 0.0, 0.0));
    }

    #[test]
    fn quadratic_power_law_velocity() {
        let g = Grid::line(32, 0.0f64, 1.0, Boundary::ZeroFlux).unwrap();
        let law = ViscosityLaw::power_law(1.0, 2.0, 1).unwrap();
        let d = DensityField::from_fn(g, 0.0, |x: [f64; 2]| 1.0 + x[0] * x[0]).unwrap();
        let u = velocity_from_density(&d, &law, 1e-10);
        let grad = partial(&g, &d.values, 0);
        for (ui, gi) in u.components[0].iter().zip(&grad) {
            assert!((ui + 4.0 * gi).abs() < 1e-12);
        }
    }

    #[test]
    fn barenblatt_velocity_matches_analytic_gradient() {
        let law = ViscosityLaw::power_law(0.5, 2.0, 1).unwrap();
        let b = BarenblattSolution::new(ProfileSpec::Constant(1.0), 2.0, 1, 0.5).unwrap();
        let g = Grid::line(200, -5.0, 5.0, Boundary::ZeroFlux).unwrap();
        let d = b.sample(&g, 1.0).unwrap();
        let u = velocity_from_density(&d, &law, 1e-10);
        let edge = b.support_radius(1.0).unwrap() - 3.0 * g.dx(0);
        for i in 0..g.len() {
            let x: f64 = g.center(i)[0];
            if x.abs() < edge {
                let exact = -law.phi_prime(d.values[i]) * b.grad_factor(1.0, x * x) * x;
                assert!((u.components[0][i] - exact).abs() < 1e-10, "{x}");
            }
        }
    }

    #[test]
    fn triple_validation() {
        let g = Grid::line(16, 0.0, 1.0, Boundary::ZeroFlux).unwrap();
        let law = ViscosityLaw::power_law(1.0, 2.0, 1).unwrap();
        let ds = [0.0, 0.1, 0.3].map(|t| DensityField::new(g, vec![1.0; 16], t).unwrap());
        assert!(matches!(
            QuasiSnapshotTriple::from_densities(ds, &law),
            Err(Error::InconsistentTriple(_))
        ));
        let ds = [0.0, 0.1, 0.2].map(|t| DensityField::from_fn(g, t, |x: [f64; 2]| 1.0 + x[0]).unwrap());
        let mut vs = ds.clone().map(|d| velocity_from_density(&d, &law, 1e-10));
        vs[1].components[0][5] += 1.0;
        let triple = QuasiSnapshotTriple::new(ds, vs).unwrap();
        assert!(matches!(quasi_momentum_residual(&triple, &law), Err(Error::InconsistentTriple(_))));
    }

    #[test]
    fn quasi_velocity_is_irrotational() {
        let law = ViscosityLaw::power_law(0.5, 1.5, 2).unwrap();
        let mut norms = vec![];
        for n in [32, 64] {
            let g = Grid::plane(n, n, (-2.0, 2.0), (-2.0, 2.0), Boundary::Periodic).unwrap();
            let d = DensityField::from_fn(g, 0.0, |x: [f64; 2]| 1.0 + 0.5 * (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp())
                .unwrap();
            let u = velocity_from_density(&d, &law, 1e-10);
            norms.push(curl_norm(&u).unwrap());
        }
        assert!(norms[0] / norms[1] > 3.5, "{norms:?}");
    }
}
