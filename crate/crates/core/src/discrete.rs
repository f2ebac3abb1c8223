//! Uniform cell-centered grids, fields and conservative stencils.

use std::io::{self, Write};

use crate::error::{domain, Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// Mirror ghost cells: no flux through the domain boundary.
    ZeroFlux,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" => Ok(Self::Periodic),
            "zeroflux" | "zero_flux" | "zero-flux" | "neumann" => Ok(Self::ZeroFlux),
            other => Err(domain(format!("unknown boundary rule `{other}`"))),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Periodic => "periodic",
            Self::ZeroFlux => "zeroflux",
        })
    }
}

/// Minimum number of cells per axis.
pub const MIN_CELLS: usize = 8;

/// Uniform grid in one or two dimensions; cell centers at `a + (j + 1/2) dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    n: [usize; 2],
    lo: [T; 2],
    hi: [T; 2],
    boundary: Boundary,
}

impl<T: Real> Grid<T> {
    pub fn line(n: usize, a: T, b: T, boundary: Boundary) -> Result<Self> {
        check_axis(n, a, b)?;
        Ok(Self { dim: 1, n: [n, 1], lo: [a, T::zero()], hi: [b, T::one()], boundary })
    }

    pub fn plane(nx: usize, ny: usize, x: (T, T), y: (T, T), boundary: Boundary) -> Result<Self> {
        check_axis(nx, x.0, x.1)?;
        check_axis(ny, y.0, y.1)?;
        Ok(Self { dim: 2, n: [nx, ny], lo: [x.0, y.0], hi: [x.1, y.1], boundary })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn cells(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bounds(&self, axis: usize) -> (T, T) {
        (self.lo[axis], self.hi[axis])
    }

    pub fn dx(&self, axis: usize) -> T {
        (self.hi[axis] - self.lo[axis]) / T::from_usize_(self.n[axis])
    }

    /// Spacing per active axis.
    pub fn spacing(&self) -> Vec<T> {
        (0..self.dim).map(|a| self.dx(a)).collect()
    }

    /// Smallest spacing over the active axes.
    pub fn min_dx(&self) -> T {
        (0..self.dim).map(|a| self.dx(a)).fold(T::infinity(), T::min)
    }

    pub fn cell_volume(&self) -> T {
        (0..self.dim).fold(T::one(), |v, a| v * self.dx(a))
    }

    /// Row-major index, `x` fastest.
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n[0] + ix
    }

    pub fn split(&self, i: usize) -> (usize, usize) {
        (i % self.n[0], i / self.n[0])
    }

    pub fn coord(&self, axis: usize, j: usize) -> T {
        self.lo[axis] + (T::from_usize_(j) + lit(0.5)) * self.dx(axis)
    }

    /// Cell center; the second entry is zero on 1D grids.
    pub fn center(&self, i: usize) -> [T; 2] {
        let (ix, iy) = self.split(i);
        if self.dim == 1 {
            [self.coord(0, ix), T::zero()]
        } else {
            [self.coord(0, ix), self.coord(1, iy)]
        }
    }

    pub fn radius2(&self, i: usize) -> T {
        let c = self.center(i);
        c[0] * c[0] + c[1] * c[1]
    }

    /// Neighbours of cell `i` along `axis` as `(minus, plus)`, ghost rule applied.
    /// Under `ZeroFlux` the ghost of a boundary cell is the cell itself.
    #[inline]
    pub fn neighbours(&self, i: usize, axis: usize) -> (usize, usize) {
        let (ix, iy) = self.split(i);
        let (j, n) = if axis == 0 { (ix, self.n[0]) } else { (iy, self.n[1]) };
        let (jm, jp) = match self.boundary {
            Boundary::Periodic => ((j + n - 1) % n, (j + 1) % n),
            Boundary::ZeroFlux => (j.saturating_sub(1), (j + 1).min(n - 1)),
        };
        if axis == 0 {
            (self.index(jm, iy), self.index(jp, iy))
        } else {
            (self.index(ix, jm), self.index(ix, jp))
        }
    }

    /// Distance in cells from `i` to the nearest domain edge (ignored for periodic grids).
    pub fn edge_distance(&self, i: usize) -> usize {
        if self.boundary == Boundary::Periodic {
            return usize::MAX;
        }
        let (ix, iy) = self.split(i);
        let mut d = ix.min(self.n[0] - 1 - ix);
        if self.dim == 2 {
            d = d.min(iy.min(self.n[1] - 1 - iy));
        }
        d
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self == other
    }
}

fn check_axis<T: Real>(n: usize, a: T, b: T) -> Result<()> {
    if n < MIN_CELLS {
        return Err(domain(format!("need at least {MIN_CELLS} cells per axis, got {n}")));
    }
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(domain("axis bounds must satisfy a < b"));
    }
    Ok(())
}

/// Nonnegative density samples on a grid at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField<T> {
    pub grid: Grid<T>,
    pub values: Vec<T>,
    pub time: T,
}

impl<T: Real> DensityField<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>, time: T) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(domain(format!("density in cell {i} is {}", values[i])));
        }
        Ok(Self { grid, values, time })
    }

    pub fn from_fn(grid: Grid<T>, time: T, f: impl Fn([T; 2]) -> T) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.center(i))).collect();
        Self::new(grid, values, time)
    }

    pub fn zeros(grid: Grid<T>, time: T) -> Self {
        Self { grid, values: vec![T::zero(); grid.len()], time }
    }

    pub fn mass(&self) -> T {
        quadrature(&self.grid, &self.values)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    pub fn norm(&self, p: T) -> Result<T> {
        lp_norm(&self.grid, &self.values, p)
    }
}

/// One component per axis per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField<T> {
    pub grid: Grid<T>,
    pub components: Vec<Vec<T>>,
}

impl<T: Real> VelocityField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, components: vec![vec![T::zero(); grid.len()]; grid.dim()] }
    }

    pub fn speed2(&self, i: usize) -> T {
        self.components.iter().fold(T::zero(), |acc, c| acc + c[i] * c[i])
    }
}

/// `sum_axes [g(v+) - 2 g(v) + g(v-)] / dx^2` in flux-difference form.
///
/// Each face flux is computed once and added to one cell and subtracted from
/// the other, so the cell sum telescopes to zero under both ghost rules.
pub fn flux_laplacian<T: Real>(grid: &Grid<T>, values: &[T], g: impl Fn(T) -> T) -> Vec<T> {
    let gv: Vec<T> = values.iter().map(|v| g(*v)).collect();
    flux_laplacian_of(grid, &gv)
}

/// [`flux_laplacian`] for values that are already transformed.
pub fn flux_laplacian_of<T: Real>(grid: &Grid<T>, gv: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); gv.len()];
    for axis in 0..grid.dim() {
        let inv = T::one() / (grid.dx(axis) * grid.dx(axis));
        for i in 0..gv.len() {
            let (_, p) = grid.neighbours(i, axis);
            if p == i {
                continue;
            }
            let flux = (gv[p] - gv[i]) * inv;
            out[i] = out[i] + flux;
            out[p] = out[p] - flux;
        }
    }
    out
}

/// Centered first derivative along one axis.
pub fn partial<T: Real>(grid: &Grid<T>, values: &[T], axis: usize) -> Vec<T> {
    let inv = T::one() / (lit::<T>(2.0) * grid.dx(axis));
    (0..values.len())
        .map(|i| {
            let (m, p) = grid.neighbours(i, axis);
            (values[p] - values[m]) * inv
        })
        .collect()
}

pub fn gradient<T: Real>(grid: &Grid<T>, values: &[T]) -> VelocityField<T> {
    VelocityField {
        grid: *grid,
        components: (0..grid.dim()).map(|a| partial(grid, values, a)).collect(),
    }
}

pub fn divergence<T: Real>(vf: &VelocityField<T>) -> Vec<T> {
    let grid = &vf.grid;
    let mut out = vec![T::zero(); grid.len()];
    for (axis, comp) in vf.components.iter().enumerate() {
        for (o, d) in out.iter_mut().zip(partial(grid, comp, axis)) {
            *o = *o + d;
        }
    }
    out
}

/// Scalar curl `d_x u_y - d_y u_x` of a 2D field.
pub fn curl_2d<T: Real>(vf: &VelocityField<T>) -> Result<Vec<T>> {
    if vf.grid.dim() != 2 {
        return Err(Error::Unsupported("curl needs a 2D grid".into()));
    }
    let dxuy = partial(&vf.grid, &vf.components[1], 0);
    let dyux = partial(&vf.grid, &vf.components[0], 1);
    Ok(dxuy.iter().zip(&dyux).map(|(a, b)| *a - *b).collect())
}

/// `sum over faces |(v_p - v_i)/dx|^2 * cell volume`: the quadratic form dual to
/// [`flux_laplacian_of`], i.e. `-sum_i v_i L(v)_i dV`.
pub fn face_gradient_energy<T: Real>(grid: &Grid<T>, values: &[T]) -> T {
    let mut acc = T::zero();
    for axis in 0..grid.dim() {
        let dx = grid.dx(axis);
        for i in 0..values.len() {
            let (_, p) = grid.neighbours(i, axis);
            if p != i {
                let d = (values[p] - values[i]) / dx;
                acc = acc + d * d;
            }
        }
    }
    acc * grid.cell_volume()
}

/// `(dV sum |v|^p)^(1/p)`, `max |v|` for `p = inf`.
pub fn lp_norm<T: Real>(grid: &Grid<T>, values: &[T], p: T) -> Result<T> {
    if !(p >= T::one()) {
        return Err(domain(format!("L^p norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(T::zero(), |m, v| m.max(v.abs())));
    }
    if p == T::one() {
        return Ok(grid.cell_volume() * values.iter().map(|v| v.abs()).sum::<T>());
    }
    if p == lit(2.0) {
        return Ok((grid.cell_volume() * values.iter().map(|v| *v * *v).sum::<T>()).sqrt());
    }
    let s: T = values.iter().map(|v| v.abs().powf(p)).sum();
    Ok((grid.cell_volume() * s).powf(T::one() / p))
}

/// `dV sum v`.
pub fn quadrature<T: Real>(grid: &Grid<T>, values: &[T]) -> T {
    grid.cell_volume() * values.iter().copied().sum::<T>()
}

/// Writes a snapshot as CSV with header `x[,y],rho[,u]`, row-major cell order.
pub fn write_snapshot_csv<T: Real, W: Write>(
    mut w: W,
    field: &DensityField<T>,
    velocity: Option<&[T]>,
) -> io::Result<()> {
    let grid = &field.grid;
    let mut header = String::from("x");
    if grid.dim() == 2 {
        header.push_str(",y");
    }
    header.push_str(",rho");
    if velocity.is_some() {
        header.push_str(",u");
    }
    writeln!(w, "{header}")?;
    for i in 0..grid.len() {
        let c = grid.center(i);
        write!(w, "{}", c[0])?;
        if grid.dim() == 2 {
            write!(w, ",{}", c[1])?;
        }
        write!(w, ",{}", field.values[i])?;
        if let Some(u) = velocity {
            write!(w, ",{}", u[i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn periodic(n: usize) -> Grid<f64> {
        Grid::line(n, 0.0, 2.0 * PI, Boundary::Periodic).unwrap()
    }

    #[test]
    fn grid_geometry() {
        let g = Grid::line(10, -1.0, 1.0, Boundary::ZeroFlux).unwrap();
        assert_relative_eq!(g.dx(0), 0.2);
        assert_relative_eq!(g.center(0)[0], -0.9);
        assert_eq!(g.neighbours(0, 0), (0, 1));
        assert_eq!(g.neighbours(9, 0), (8, 9));
        let p = periodic(10);
        assert_eq!(p.neighbours(0, 0), (9, 1));
        assert!(Grid::line(4, 0.0, 1.0, Boundary::ZeroFlux).is_err());
        assert!(Grid::line(16, 1.0, 1.0, Boundary::ZeroFlux).is_err());
        let g2 = Grid::plane(8, 10, (0.0, 1.0), (0.0, 2.0), Boundary::Periodic).unwrap();
        assert_eq!(g2.len(), 80);
        assert_eq!(g2.index(3, 2), 19);
        assert_eq!(g2.neighbours(g2.index(0, 0), 1), (g2.index(0, 9), g2.index(0, 1)));
    }

    #[test]
    fn constant_field_has_zero_laplacian_and_gradient() {
        let g = Grid::plane(8, 8, (0.0, 1.0), (0.0, 1.0), Boundary::ZeroFlux).unwrap();
        let v = vec![3.0; g.len()];
        assert!(flux_laplacian(&g, &v, |x| x * x).iter().all(|x| *x == 0.0));
        assert!(gradient(&g, &v).components.iter().flatten().all(|x| *x == 0.0));
    }

    #[test]
    fn discrete_fourier_symbol() {
        // Oracle: L sin(kx) = -(2 - 2 cos(k dx)) / dx^2 sin(kx) exactly on a periodic grid.
        for n in [16, 64, 256] {
            let g = periodic(n);
            let dx = g.dx(0);
            let k = 3.0;
            let v: Vec<f64> = (0..n).map(|i| (k * g.coord(0, i)).sin()).collect();
            let lap = flux_laplacian(&g, &v, |x| x);
            let symbol = -(2.0 - 2.0 * (k * dx).cos()) / (dx * dx);
            for i in 0..n {
                assert!((lap[i] - symbol * v[i]).abs() < 1e-9 * symbol.abs());
            }
            let cont_err = (symbol + k * k).abs();
            assert!(cont_err < k.powi(4) * dx * dx / 12.0 * 1.01);
        }
    }

    #[test]
    fn linear_ramp_gradient() {
        let g = Grid::line(16, 0.0, 1.0, Boundary::ZeroFlux).unwrap();
        let v: Vec<f64> = (0..16).map(|i| 2.0 * g.coord(0, i) + 1.0).collect();
        let grad = gradient(&g, &v);
        for i in 1..15 {
            assert_relative_eq!(grad.components[0][i], 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn div_grad_matches_laplacian_second_order() {
        let mut errs = vec![];
        for n in [32, 64, 128] {
            let g = periodic(n);
            let v: Vec<f64> = (0..n).map(|i| g.coord(0, i).sin()).collect();
            let dg = divergence(&gradient(&g, &v));
            let l = flux_laplacian(&g, &v, |x| x);
            errs.push(dg.iter().zip(&l).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        assert!(errs[0] / errs[1] > 3.8 && errs[1] / errs[2] > 3.8, "{errs:?}");
    }

    #[test]
    fn norms_of_indicator() {
        let g = Grid::line(20, 0.0, 2.0, Boundary::ZeroFlux).unwrap();
        let v: Vec<f64> = (0..20).map(|i| if (5..12).contains(&i) { 1.0 } else { 0.0 }).collect();
        assert_relative_eq!(lp_norm(&g, &v, 1.0).unwrap(), 0.7, max_relative = 1e-14);
        assert_eq!(lp_norm(&g, &v, f64::INFINITY).unwrap(), 1.0);
        assert_relative_eq!(lp_norm(&g, &v, 2.0).unwrap(), 0.7f64.sqrt(), max_relative = 1e-14);
        assert!(lp_norm(&g, &v, 0.5).is_err());
    }

    #[test]
    fn density_field_rejects_negative() {
        let g = Grid::line(8, 0.0, 1.0, Boundary::ZeroFlux).unwrap();
        assert!(DensityField::new(g, vec![-1.0; 8], 0.0).is_err());
        assert!(DensityField::new(g, vec![1.0; 7], 0.0).is_err());
    }

    #[test]
    fn snapshot_csv_layout() {
        let g = Grid::plane(8, 8, (0.0, 1.0), (0.0, 1.0), Boundary::ZeroFlux).unwrap();
        let f = DensityField::zeros(g, 0.0);
        let mut buf = Vec::new();
        write_snapshot_csv(&mut buf, &f, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y,rho"));
        assert_eq!(lines.next(), Some("0.0625,0.0625,0"));
        assert_eq!(lines.next(), Some("0.1875,0.0625,0"));
        assert_eq!(text.lines().count(), 65);

        let g1 = Grid::line(8, 0.0, 1.0, Boundary::ZeroFlux).unwrap();
        let f1 = DensityField::zeros(g1, 0.0);
        let mut buf = Vec::new();
        write_snapshot_csv(&mut buf, &f1, Some(&[1.0; 8])).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("x,rho,u\n0.0625,0,1\n"));
    }

    proptest! {
        #[test]
        fn laplacian_is_conservative(
            vals in prop::collection::vec(0.0f64..5.0, 64),
            periodic_bc in any::<bool>(),
            alpha in 0.5f64..3.0,
        ) {
            let bc = if periodic_bc { Boundary::Periodic } else { Boundary::ZeroFlux };
            let g = Grid::plane(8, 8, (0.0, 1.0), (0.0, 1.0), bc).unwrap();
            let out = flux_laplacian(&g, &vals, |x| x.powf(alpha));
            let l1: f64 = out.iter().map(|x| x.abs()).sum();
            let s: f64 = out.iter().sum();
            prop_assert!(s.abs() <= 1e-13 * l1.max(1e-300));
        }
    }
}
