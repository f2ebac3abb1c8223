//! Closed-form solutions of `d_t rho = 2 Laplacian mu(rho)` with `mu = mu_c rho^alpha`
//! and the exponent calculators that go with them.
//!
//! All source-type profiles are written for the normalized equation
//! `d_t rho = Laplacian rho^alpha` and mapped to a general coefficient by the
//! time rescale `s = 2 mu_c t`.

use crate::discrete::{DensityField, Grid};
use crate::error::{domain, Error, Result};
use crate::quad::{adaptive_simpson, bisect, half_line};
use crate::scalar::{lit, Real, Scalar};
use crate::viscosity::ViscosityLaw;

/// Critical fast-diffusion exponent `max(0, (N - 2)/N)`.
pub fn critical_exponent<T: Scalar>(dim: usize) -> T {
    let n = dim as i64;
    if n <= 2 {
        T::zero()
    } else {
        T::ratio(n - 2, n)
    }
}

/// Decay and scaling exponents of the porous-medium / fast-diffusion flow.
///
/// `time_exp(p)` is the decay rate of `||rho(t)||_p`, `mass_exp(p)` the power
/// of `||rho_0||_1` in the same smoothing bound. Both are obtained by
/// interpolating between mass conservation (`p = 1`) and the `L^inf` bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSet<T> {
    pub alpha: T,
    pub dim: usize,
    /// `N / (N(alpha-1) + 2)`.
    pub gamma1: T,
    /// `1 / (N(alpha-1) + 2)`.
    pub beta_space: T,
    /// `2 / (N(alpha-1) + 2)`.
    pub sigma_mass: T,
    pub m_c: T,
}

impl<T: Scalar> ExponentSet<T> {
    fn denom(&self) -> T {
        T::from_int(self.dim as i64) * (self.alpha.clone() - T::one()) + T::from_int(2)
    }

    /// `N (p - 1) / ((N(alpha-1) + 2) p)`, tends to `gamma1` as `p -> inf`.
    pub fn time_exp(&self, p: T) -> T {
        let n = T::from_int(self.dim as i64);
        n * (p.clone() - T::one()) / (self.denom() * p)
    }

    /// `(N(alpha-1) + 2p) / ((N(alpha-1) + 2) p)`, tends to `sigma_mass` as `p -> inf`.
    pub fn mass_exp(&self, p: T) -> T {
        let n = T::from_int(self.dim as i64);
        let num = n * (self.alpha.clone() - T::one()) + T::from_int(2) * p.clone();
        num / (self.denom() * p)
    }

    pub fn time_exp_inf(&self) -> T {
        self.gamma1.clone()
    }

    pub fn mass_exp_inf(&self) -> T {
        self.sigma_mass.clone()
    }
}

/// Exponents for `alpha > m_c(N)`.
pub fn pme_exponents<T: Scalar>(alpha: T, dim: usize) -> Result<ExponentSet<T>> {
    if dim == 0 {
        return Err(domain("dim must be >= 1"));
    }
    let m_c = critical_exponent::<T>(dim);
    if alpha <= m_c {
        return Err(Error::ExtinctionRegime { alpha: alpha.approx(), m_c: m_c.approx() });
    }
    let n = T::from_int(dim as i64);
    let denom = n.clone() * (alpha.clone() - T::one()) + T::from_int(2);
    Ok(ExponentSet {
        gamma1: n / denom.clone(),
        beta_space: T::one() / denom.clone(),
        sigma_mass: T::from_int(2) / denom,
        alpha,
        dim,
        m_c,
    })
}

/// Scaling exponents of compressible Navier-Stokes with `mu ~ rho^theta`, `P ~ rho^gamma`:
/// `rho_l = l^{e_rho} rho(l t, l^{e_x} x)`, `u_l = l^{e_u} u(l t, l^{e_x} x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityExponents<T> {
    pub theta: T,
    pub gamma: T,
    pub e_rho: T,
    pub e_u: T,
    pub e_x: T,
}

pub fn similarity_exponents_cns<T: Scalar>(theta: T, gamma: T) -> Result<SimilarityExponents<T>> {
    if theta == gamma {
        return Err(Error::NoScalingInvariance(theta.approx()));
    }
    let d = theta.clone() - gamma.clone();
    let two = T::from_int(2);
    let e_rho = -T::one() / d.clone();
    let e_u = (T::one() - gamma.clone()) / (two.clone() * d.clone());
    let e_x = (two.clone() * theta.clone() - gamma.clone() - T::one()) / (two * d);
    debug_assert!(e_u.clone() + e_x.clone() == T::one() || (e_u.clone() + e_x.clone() - T::one()).approx().abs() < 1e-12);
    Ok(SimilarityExponents { theta, gamma, e_rho, e_u, e_x })
}

/// Space-time solution with a known formula.
pub trait ExactSolution<T: Real>: Send + Sync {
    /// Spatial dimension `N` of the formula.
    fn dim(&self) -> usize;

    fn value(&self, t: T, x: &[T]) -> T;

    /// Analytic time derivative when available.
    fn time_derivative(&self, _t: T, _x: &[T]) -> Option<T> {
        None
    }

    fn check_time(&self, t: T) -> Result<()> {
        if t > T::zero() {
            Ok(())
        } else {
            Err(domain("time must be positive"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `alpha > 1`, compact support.
    Porous,
    /// `m_c < alpha < 1`, algebraic tails.
    Fast,
    /// `alpha = 1`, Gaussian.
    Heat,
}

/// Selects a Barenblatt profile either by its mass or by its constant `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileSpec<T> {
    Mass(T),
    Constant(T),
}

/// Source-type (Barenblatt) solution
/// `U(t, x) = s^{-gamma1} F(x s^{-beta})`, `s = 2 mu_c t`, with
///
/// * porous: `F = (C - k |xi|^2)_+^{1/(alpha-1)}`, `k = (alpha-1) gamma1 / (2 alpha N)`,
/// * fast: `F = (C + k |xi|^2)^{-1/(1-alpha)}`, `k = (1-alpha) gamma1 / (2 alpha N)`,
/// * heat: `F = C exp(-|xi|^2/4)`, `C = m (4 pi)^{-N/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarenblattSolution<T> {
    pub regime: Regime,
    pub alpha: T,
    pub dim: usize,
    pub c: T,
    pub mass: T,
    pub mu_c: T,
    pub k: T,
    pub gamma1: T,
    pub beta: T,
}

/// Surface measure of the unit sphere in `R^N`.
pub fn sphere_area<T: Real>(dim: usize) -> T {
    // Gamma(N/2) for integer N through Gamma(1/2) = sqrt(pi), Gamma(1) = 1.
    let mut g = if dim.is_multiple_of(2) { T::one() } else { T::PI().sqrt() };
    let mut x = if dim.is_multiple_of(2) { T::one() } else { lit::<T>(0.5) };
    let target = T::from_usize_(dim) * lit(0.5);
    while x < target {
        g = g * x;
        x = x + T::one();
    }
    lit::<T>(2.0) * T::PI().powf(target) / g
}

impl<T: Real> BarenblattSolution<T> {
    pub fn new(spec: ProfileSpec<T>, alpha: T, dim: usize, mu_c: T) -> Result<Self> {
        let e = pme_exponents(alpha, dim)?;
        if !(mu_c > T::zero()) {
            return Err(domain("mu_c must be positive"));
        }
        match spec {
            ProfileSpec::Mass(m) | ProfileSpec::Constant(m) if !(m > T::zero()) || !m.is_finite() => {
                return Err(domain("mass / constant must be positive"));
            }
            _ => {}
        }
        let n = T::from_usize_(dim);
        let two = lit::<T>(2.0);
        let (regime, k) = if alpha == T::one() {
            (Regime::Heat, lit(0.25))
        } else if alpha > T::one() {
            (Regime::Porous, (alpha - T::one()) * e.gamma1 / (two * alpha * n))
        } else {
            (Regime::Fast, (T::one() - alpha) * e.gamma1 / (two * alpha * n))
        };
        let mut sol = Self {
            regime,
            alpha,
            dim,
            c: T::one(),
            mass: T::one(),
            mu_c,
            k,
            gamma1: e.gamma1,
            beta: e.beta_space,
        };
        match (regime, spec) {
            (Regime::Heat, ProfileSpec::Mass(m)) => {
                sol.mass = m;
                sol.c = m * (lit::<T>(4.0) * T::PI()).powf(-n / two);
            }
            (Regime::Heat, ProfileSpec::Constant(c)) => {
                sol.c = c;
                sol.mass = c * (lit::<T>(4.0) * T::PI()).powf(n / two);
            }
            (_, ProfileSpec::Constant(c)) => {
                sol.c = c;
                sol.mass = sol.mass_for_constant(c);
            }
            (_, ProfileSpec::Mass(m)) => {
                sol.c = sol.constant_for_mass(m)?;
                sol.mass = m;
            }
        }
        Ok(sol)
    }

    /// Profile as a function of `q = |xi|^2`.
    pub fn profile_q(&self, q: T) -> T {
        self.profile_with(self.c, q)
    }

    fn profile_with(&self, c: T, q: T) -> T {
        match self.regime {
            Regime::Porous => {
                let base = c - self.k * q;
                if base <= T::zero() {
                    T::zero()
                } else {
                    base.powf(T::one() / (self.alpha - T::one()))
                }
            }
            Regime::Fast => (c + self.k * q).powf(-T::one() / (T::one() - self.alpha)),
            Regime::Heat => c * (-q * self.k).exp(),
        }
    }

    /// `dF/dq` at `q = |xi|^2` (zero outside the support).
    pub fn profile_dq(&self, q: T) -> T {
        match self.regime {
            Regime::Porous => {
                let base = self.c - self.k * q;
                if base <= T::zero() {
                    T::zero()
                } else {
                    let p = T::one() / (self.alpha - T::one());
                    -self.k * p * base.powf(p - T::one())
                }
            }
            Regime::Fast => {
                let p = -T::one() / (T::one() - self.alpha);
                self.k * p * (self.c + self.k * self.q_clamp(q)).powf(p - T::one())
            }
            Regime::Heat => -self.k * self.profile_q(q),
        }
    }

    fn q_clamp(&self, q: T) -> T {
        q.max(T::zero())
    }

    /// Mass of the profile with constant `c` (radial quadrature).
    fn mass_for_constant(&self, c: T) -> T {
        let n = self.dim;
        let area = sphere_area::<T>(n);
        let nm1 = (n - 1) as i32;
        match self.regime {
            Regime::Porous => {
                // r = R sin(theta) removes the endpoint singularity of (C - k r^2)^p.
                let radius = (c / self.k).sqrt();
                let p = T::one() / (self.alpha - T::one());
                let g = |th: T| {
                    let cth = th.cos();
                    c.powf(p) * cth.powf(lit::<T>(2.0) * p + T::one()) * (radius * th.sin()).powi(nm1) * radius
                };
                let scale = c.powf(p) * radius.powi(n as i32);
                area * adaptive_simpson(g, T::zero(), T::FRAC_PI_2(), scale * lit(1e-13))
            }
            Regime::Fast => {
                let f = |r: T| self.profile_with(c, r * r) * r.powi(nm1);
                let radius = (c / self.k).sqrt();
                let scale = self.profile_with(c, T::zero()) * radius.powi(n as i32);
                // Rescale r by the profile width so the mapped integrand is O(1).
                area * radius * half_line(|y: T| f(y * radius), scale / radius * lit(1e-13))
            }
            Regime::Heat => c * (lit::<T>(4.0) * T::PI()).powf(T::from_usize_(n) * lit(0.5)),
        }
    }

    fn constant_for_mass(&self, m: T) -> Result<T> {
        let m1 = self.mass_for_constant(T::one());
        let n = T::from_usize_(self.dim);
        let half = lit::<T>(0.5);
        // mass(C) = C^e mass(1) with e from the profile scaling; used only to bracket.
        let e = match self.regime {
            Regime::Porous => T::one() / (self.alpha - T::one()) + n * half,
            Regime::Fast => -T::one() / (T::one() - self.alpha) + n * half,
            Regime::Heat => T::one(),
        };
        let guess = (m / m1).powf(T::one() / e);
        let (lo, hi) = (guess * half, guess * lit(2.0));
        bisect(|c| self.mass_for_constant(c) - m, lo, hi, lit(1e-10))
    }

    fn rescaled(&self, t: T) -> T {
        lit::<T>(2.0) * self.mu_c * t
    }

    /// `U(t, x)` from `|x|^2`.
    pub fn value_r2(&self, t: T, r2: T) -> T {
        let s = self.rescaled(t);
        s.powf(-self.gamma1) * self.profile_q(r2 * s.powf(lit::<T>(-2.0) * self.beta))
    }

    /// `grad U = factor * x`.
    pub fn grad_factor(&self, t: T, r2: T) -> T {
        let s = self.rescaled(t);
        let sb = s.powf(lit::<T>(-2.0) * self.beta);
        lit::<T>(2.0) * s.powf(-self.gamma1) * sb * self.profile_dq(r2 * sb)
    }

    pub fn time_derivative_r2(&self, t: T, r2: T) -> T {
        let s = self.rescaled(t);
        let q = r2 * s.powf(lit::<T>(-2.0) * self.beta);
        let ds = s.powf(-self.gamma1 - T::one())
            * (-self.gamma1 * self.profile_q(q) - lit::<T>(2.0) * self.beta * q * self.profile_dq(q));
        lit::<T>(2.0) * self.mu_c * ds
    }

    /// Radius of the support at time `t` (porous regime only).
    pub fn support_radius(&self, t: T) -> Option<T> {
        match self.regime {
            Regime::Porous => Some((self.c / self.k).sqrt() * self.rescaled(t).powf(self.beta)),
            _ => None,
        }
    }

    /// Cell-center samples on a grid of the same dimension.
    pub fn sample(&self, grid: &Grid<T>, t: T) -> Result<DensityField<T>> {
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch(format!(
                "solution dim {} vs grid dim {}",
                self.dim,
                grid.dim()
            )));
        }
        self.check_time(t)?;
        let values = (0..grid.len()).map(|i| self.value_r2(t, grid.radius2(i))).collect();
        DensityField::new(*grid, values, t)
    }
}

impl<T: Real> ExactSolution<T> for BarenblattSolution<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, t: T, x: &[T]) -> T {
        self.value_r2(t, norm2(x))
    }

    fn time_derivative(&self, t: T, x: &[T]) -> Option<T> {
        Some(self.time_derivative_r2(t, norm2(x)))
    }
}

fn norm2<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |acc, v| acc + *v * *v)
}

/// Finite-time extinction solution
/// `rho = c_alpha ((T - t)/|x|^2)^{1/(1-alpha)}` for `0 < alpha < m_c`, `N >= 3`.
///
/// Substituting into `d_t rho = 2 mu_c Laplacian rho^alpha` gives
/// `c_alpha^{1-alpha} = 4 mu_c alpha (N - 2/(1-alpha))`. The normalization
/// `c_alpha^{1-alpha} = 2 (N - 2/(1-alpha))` therefore belongs to
/// `2 mu_c = 1/alpha`, see [`ExtinctionSolution::unit_normalized`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExtinctionSolution<T> {
    pub alpha: T,
    pub dim: usize,
    pub t_ext: T,
    pub mu_c: T,
    pub c_alpha: T,
}

impl<T: Real> ExtinctionSolution<T> {
    pub fn new(alpha: T, dim: usize, t_ext: T, mu_c: T) -> Result<Self> {
        if dim < 3 {
            return Err(domain("extinction solution needs N >= 3"));
        }
        let m_c = T::lit(critical_exponent::<f64>(dim));
        if !(alpha > T::zero() && alpha < m_c) {
            return Err(domain(format!("alpha must lie in (0, {m_c})")));
        }
        if !(t_ext > T::zero()) || !(mu_c > T::zero()) {
            return Err(domain("extinction time and mu_c must be positive"));
        }
        let one_m = T::one() - alpha;
        let base = lit::<T>(4.0) * mu_c * alpha * (T::from_usize_(dim) - lit::<T>(2.0) / one_m);
        Ok(Self { alpha, dim, t_ext, mu_c, c_alpha: base.powf(T::one() / one_m) })
    }

    /// `mu_c = 1/(2 alpha)`, for which `c_alpha^{1-alpha} = 2 (N - 2/(1-alpha))`.
    pub fn unit_normalized(alpha: T, dim: usize, t_ext: T) -> Result<Self> {
        Self::new(alpha, dim, t_ext, T::one() / (lit::<T>(2.0) * alpha))
    }

    fn exponent(&self) -> T {
        T::one() / (T::one() - self.alpha)
    }
}

impl<T: Real> ExactSolution<T> for ExtinctionSolution<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, t: T, x: &[T]) -> T {
        if t >= self.t_ext {
            return T::zero();
        }
        self.c_alpha * ((self.t_ext - t) / norm2(x)).powf(self.exponent())
    }

    fn time_derivative(&self, t: T, x: &[T]) -> Option<T> {
        if t >= self.t_ext {
            return Some(T::zero());
        }
        let m = self.exponent();
        Some(-m * self.c_alpha * (self.t_ext - t).powf(m - T::one()) * norm2(x).powf(-m))
    }

    fn check_time(&self, t: T) -> Result<()> {
        if t < self.t_ext {
            Ok(())
        } else {
            Err(domain(format!("t = {t} is past the extinction time {}", self.t_ext)))
        }
    }
}

/// How a discrete operator reads an exact solution off a grid.
enum Stencil {
    /// Cartesian stencil, solution and grid share the dimension.
    Cartesian,
    /// 1D grid read as radius, N-dimensional radial Laplacian.
    Radial(usize),
}

fn stencil_for<T: Real>(sol_dim: usize, grid: &Grid<T>) -> Result<Stencil> {
    if sol_dim == grid.dim() {
        Ok(Stencil::Cartesian)
    } else if grid.dim() == 1 {
        Ok(Stencil::Radial(sol_dim))
    } else {
        Err(Error::GridMismatch(format!(
            "solution dim {sol_dim} on a {}D grid",
            grid.dim()
        )))
    }
}

/// Second-order Laplacian of `g` at `x`, with `g` evaluated pointwise.
fn pointwise_laplacian<T: Real>(stencil: &Stencil, h: &[T], x: &[T], g: &dyn Fn(&[T]) -> T) -> T {
    let two = lit::<T>(2.0);
    match stencil {
        Stencil::Cartesian => {
            let center = g(x);
            let mut acc = T::zero();
            let mut p = x.to_vec();
            for (axis, &hx) in h.iter().enumerate() {
                p[axis] = x[axis] + hx;
                let plus = g(&p);
                p[axis] = x[axis] - hx;
                let minus = g(&p);
                p[axis] = x[axis];
                acc = acc + (plus - two * center + minus) / (hx * hx);
            }
            acc
        }
        Stencil::Radial(n) => {
            let r = x[0];
            let hx = h[0];
            let c = g(&[r]);
            let p = g(&[r + hx]);
            let m = g(&[r - hx]);
            (p - two * c + m) / (hx * hx)
                + T::from_usize_(n - 1) / r * (p - m) / (two * hx)
        }
    }
}

fn radial_view<'a, T: Real>(
    stencil: &Stencil,
    n: usize,
    f: &'a dyn Fn(T, &[T]) -> T,
) -> impl Fn(T, &[T]) -> T + 'a {
    let radial = matches!(stencil, Stencil::Radial(_));
    move |t: T, x: &[T]| {
        if radial {
            // Embed the radius on the first axis of R^n.
            let mut y = vec![T::zero(); n];
            y[0] = x[0];
            f(t, &y)
        } else {
            f(t, x)
        }
    }
}

/// Pointwise `d_t rho - 2 Laplacian_h mu(rho)` at the cell centers.
///
/// Neighbour values come from the formula itself, so the residual is defined
/// in every cell; cells where the solution is not finite get `NaN`. A 1D grid
/// paired with a higher-dimensional solution is read as a radial grid.
pub fn pde_residual_of_exact<T: Real>(
    sol: &dyn ExactSolution<T>,
    law: &ViscosityLaw<T>,
    t: T,
    grid: &Grid<T>,
) -> Result<Vec<T>> {
    sol.check_time(t)?;
    let stencil = stencil_for(sol.dim(), grid)?;
    let n = sol.dim();
    let value = |tt: T, x: &[T]| sol.value(tt, x);
    let value = radial_view(&stencil, n, &value);
    let h = grid.spacing();
    let dt_step = lit::<T>(1e-6) * t.abs().max(T::one());
    let two = lit::<T>(2.0);

    Ok((0..grid.len())
        .map(|i| {
            let x = grid.center(i);
            let x = &x[..grid.dim()];
            let rho_t = match &stencil {
                Stencil::Cartesian => sol.time_derivative(t, x),
                Stencil::Radial(_) => {
                    let mut y = vec![T::zero(); n];
                    y[0] = x[0];
                    sol.time_derivative(t, &y)
                }
            }
            .unwrap_or_else(|| (value(t + dt_step, x) - value(t - dt_step, x)) / (two * dt_step));
            let g = |p: &[T]| law.mu(value(t, p));
            let res = rho_t - two * pointwise_laplacian(&stencil, &h, x, &g);
            if res.is_finite() {
                res
            } else {
                T::nan()
            }
        })
        .collect())
}

/// Discrete `Laplacian F^alpha + beta xi . grad F + gamma1 F` on the grid.
pub fn profile_residual<T: Real>(sol: &BarenblattSolution<T>, grid: &Grid<T>) -> Result<Vec<T>> {
    if sol.regime == Regime::Heat {
        return Err(Error::Unsupported("profile equation assumes alpha != 1".into()));
    }
    let stencil = stencil_for(sol.dim, grid)?;
    let h = grid.spacing();
    let two = lit::<T>(2.0);
    let profile = |p: &[T]| match stencil {
        Stencil::Radial(_) => sol.profile_q(p[0] * p[0]),
        Stencil::Cartesian => sol.profile_q(norm2(p)),
    };
    Ok((0..grid.len())
        .map(|i| {
            let x = grid.center(i);
            let x = &x[..grid.dim()];
            let lap = pointwise_laplacian(&stencil, &h, x, &|p: &[T]| profile(p).powf(sol.alpha));
            let mut drift = T::zero();
            let mut p = x.to_vec();
            for (axis, &hx) in h.iter().enumerate() {
                p[axis] = x[axis] + hx;
                let plus = profile(&p);
                p[axis] = x[axis] - hx;
                let minus = profile(&p);
                p[axis] = x[axis];
                drift = drift + x[axis] * (plus - minus) / (two * hx);
            }
            lap + sol.beta * drift + sol.gamma1 * profile(x)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_rational::Rational64;
    use crate::discrete::Boundary;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn exponents_exact() {
        let e = pme_exponents(q(2, 1), 1).unwrap();
        assert_eq!((e.gamma1, e.beta_space), (q(1, 3), q(1, 3)));
        let e = pme_exponents(q(2, 1), 3).unwrap();
        assert_eq!((e.gamma1, e.beta_space, e.sigma_mass), (q(3, 5), q(1, 5), q(2, 5)));
        assert_eq!(e.m_c, q(1, 3));
        let e = pme_exponents(q(2, 1), 1).unwrap();
        assert_eq!(e.time_exp(q(2, 1)), q(1, 6));
        assert_eq!(e.mass_exp(q(2, 1)), q(5, 6));
        assert_eq!(e.time_exp(q(1, 1)), q(0, 1));
        assert_eq!(e.mass_exp(q(1, 1)), q(1, 1));
    }

    #[test]
    fn exponents_reject_extinction() {
        assert!(matches!(pme_exponents(0.2, 3), Err(Error::ExtinctionRegime { .. })));
        assert!(matches!(pme_exponents(q(1, 3), 3), Err(Error::ExtinctionRegime { .. })));
        assert!(pme_exponents(0.5, 2).is_ok());
    }

    #[test]
    fn time_and_mass_exponents_are_monotone() {
        let e = pme_exponents(q(3, 2), 2).unwrap();
        let mut prev_t = e.time_exp(q(1, 1));
        let mut prev_m = e.mass_exp(q(1, 1));
        for p in 2..200 {
            let t = e.time_exp(q(p, 1));
            let m = e.mass_exp(q(p, 1));
            assert!(t > prev_t && t < e.time_exp_inf());
            assert!(m < prev_m && m > e.mass_exp_inf());
            prev_t = t;
            prev_m = m;
        }
        // gamma1 = N beta
        assert_eq!(e.gamma1.clone(), e.beta_space * q(2, 1));
    }

    #[test]
    fn similarity_exponents() {
        let s = similarity_exponents_cns(q(2, 1), q(3, 1)).unwrap();
        assert_eq!((s.e_rho, s.e_u, s.e_x), (q(1, 1), q(1, 1), q(0, 1)));
        let s = similarity_exponents_cns(q(1, 1), q(2, 1)).unwrap();
        assert_eq!((s.e_rho, s.e_u, s.e_x), (q(1, 1), q(1, 2), q(1, 2)));
        assert!(matches!(similarity_exponents_cns(q(3, 2), q(3, 2)), Err(Error::NoScalingInvariance(_))));
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area::<f64>(1), 2.0);
        assert_relative_eq!(sphere_area::<f64>(2), 2.0 * std::f64::consts::PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area::<f64>(3), 4.0 * std::f64::consts::PI, max_relative = 1e-15);
    }

    #[test]
    fn porous_center_value() {
        let b = BarenblattSolution::new(ProfileSpec::Constant(1.0), 2.0, 1, 0.5).unwrap();
        for t in [0.1f64, 1.0, 8.0] {
            assert_relative_eq!(b.value(t, &[0.0]), t.powf(-1.0 / 3.0), max_relative = 1e-14);
        }
        // k = (alpha-1) gamma1 / (2 alpha N) = 1/12.
        assert_relative_eq!(b.k, 1.0 / 12.0, max_relative = 1e-15);
        let r = b.support_radius(2.0).unwrap();
        assert_relative_eq!(r, 12f64.sqrt() * 2f64.powf(1.0 / 3.0), max_relative = 1e-14);
        assert_eq!(b.value(2.0, &[r * 1.0001]), 0.0);
        assert!(b.value(2.0, &[r * 0.999]) > 0.0);
    }

    #[test]
    fn heat_kernel() {
        let mu_c = 0.3;
        let b = BarenblattSolution::new(ProfileSpec::Mass(2.0), 1.0, 1, mu_c).unwrap();
        assert_eq!(b.regime, Regime::Heat);
        for (t, x) in [(0.5, 0.0), (1.0, 1.3), (2.0, -0.7)] {
            let g = 2.0 * (8.0 * std::f64::consts::PI * mu_c * t).powf(-0.5)
                * (-(x * x) / (8.0 * mu_c * t)).exp();
            assert_relative_eq!(b.value(t, &[x]), g, max_relative = 1e-13);
        }
    }

    #[test]
    fn mass_constant_round_trip() {
        for (alpha, dim) in [(2.0, 1), (3.0, 1), (1.5, 2), (2.0, 3), (0.7, 1), (0.8, 2)] {
            let b = BarenblattSolution::new(ProfileSpec::Mass(1.7), alpha, dim, 0.5).unwrap();
            let back = BarenblattSolution::new(ProfileSpec::Constant(b.c), alpha, dim, 0.5).unwrap();
            assert_relative_eq!(back.mass, 1.7, max_relative = 1e-9);
        }
    }

    #[test]
    fn extinction_constant() {
        let e = ExtinctionSolution::unit_normalized(0.2, 3, 1.0).unwrap();
        assert_relative_eq!(e.c_alpha, 1.0, max_relative = 1e-14);
        assert_relative_eq!(e.mu_c, 2.5);
        assert!(ExtinctionSolution::<f64>::unit_normalized(0.4, 3, 1.0).is_err());
        assert!(ExtinctionSolution::<f64>::unit_normalized(0.2, 2, 1.0).is_err());
        assert_eq!(e.value(1.5, &[1.0, 0.0, 0.0]), 0.0);
        assert!(e.check_time(1.0).is_err());
    }

    #[test]
    fn zero_profile_has_zero_residual() {
        let b = BarenblattSolution::new(ProfileSpec::Constant(1.0), 2.0, 1, 0.5).unwrap();
        // Support radius sqrt(12) ~ 3.46 in similarity variables.
        let g = Grid::line(16, 5.0, 10.0, Boundary::ZeroFlux).unwrap();
        let r = profile_residual(&b, &g).unwrap();
        assert!(r.iter().all(|v| *v == 0.0));
        let heat = BarenblattSolution::new(ProfileSpec::Mass(1.0), 1.0, 1, 0.5).unwrap();
        assert!(matches!(profile_residual(&heat, &g), Err(Error::Unsupported(_))));
    }

    #[test]
    fn f32_barenblatt() {
        let b = BarenblattSolution::<f32>::new(ProfileSpec::Constant(1.0), 2.0, 1, 0.5).unwrap();
        assert!((b.value(1.0, &[0.0]) - 1.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn scaling_identity(t in 0.05f64..5.0, x in -3.0f64..3.0, l in 0.1f64..10.0, alpha in prop::sample::select(vec![0.6, 1.0, 1.5, 2.0, 3.0])) {
            let b = BarenblattSolution::new(ProfileSpec::Mass(1.0), alpha, 1, 0.5).unwrap();
            let lhs = b.value(t, &[x]);
            let rhs = l.powf(b.gamma1) * b.value(l * t, &[l.powf(b.beta) * x]);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1e-12));
        }
    }
}
