//! Density-dependent viscosity laws obeying `lambda(rho) = 2 rho mu'(rho) - 2 mu(rho)`.
//!
//! A law bundles the shear viscosity `mu`, the second coefficient `lambda`
//! (always derived from `mu` through the relation above unless explicitly
//! overridden), and the auxiliary functions used by the quasi-solution
//! machinery:
//!
//! * `phi` with `phi'(rho) = 2 mu'(rho) / rho` (the velocity potential),
//! * `f` with `f'(rho) = sqrt(rho) phi'(rho)`,
//! * `psi` with `psi' = mu`, `psi(0) = 0` (the dissipation potential).
//!
//! Power laws `mu = mu_c rho^alpha` carry closed forms for all of them;
//! general monotone laws integrate numerically from a base point.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::quad::adaptive_simpson;
use crate::scalar::{lit, Real};

/// Shared scalar function, e.g. a user supplied `mu`.
pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Density below which `phi` and the velocity are treated as undefined.
pub const DEFAULT_VACUUM_THRESHOLD: f64 = 1e-10;

#[derive(Clone)]
pub enum LawKind<T> {
    PowerLaw {
        mu_c: T,
        alpha: T,
    },
    GeneralMonotone {
        mu: ScalarFn<T>,
        mu_prime: ScalarFn<T>,
        /// Lower limit of the integrals defining `phi` and `f`.
        base: T,
        /// Absolute tolerance of those integrals.
        tol: T,
    },
}

#[derive(Clone)]
pub struct ViscosityLaw<T> {
    kind: LawKind<T>,
    dim: usize,
    nu1: T,
    nu2: T,
    lambda_override: Option<ScalarFn<T>>,
    lame_admissible: bool,
}

impl<T: fmt::Debug> fmt::Debug for ViscosityLaw<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("ViscosityLaw");
        match &self.kind {
            LawKind::PowerLaw { mu_c, alpha } => d.field("mu_c", mu_c).field("alpha", alpha),
            LawKind::GeneralMonotone { base, tol, .. } => {
                d.field("kind", &"general").field("base", base).field("tol", tol)
            }
        };
        d.field("dim", &self.dim)
            .field("nu1", &self.nu1)
            .field("nu2", &self.nu2)
            .field("lambda_override", &self.lambda_override.is_some())
            .finish()
    }
}

/// All scalar functions of a law at one density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawValues<T> {
    pub mu: T,
    pub lambda: T,
    pub mu_prime: T,
    pub phi: T,
    pub f: T,
    pub psi: T,
}

/// `1 - 1/N`, the Lamé threshold on the viscosity exponent.
pub fn lame_threshold<T: Real>(dim: usize) -> T {
    T::one() - T::one() / T::from_usize_(dim)
}

/// `2 (1 + N (alpha - 1))`.
pub fn power_law_nu<T: Real>(alpha: T, dim: usize) -> T {
    lit::<T>(2.0) * (T::one() + T::from_usize_(dim) * (alpha - T::one()))
}

impl<T: Real> ViscosityLaw<T> {
    /// `mu(rho) = mu_c rho^alpha` with `alpha > 1 - 1/dim`.
    pub fn power_law(mu_c: T, alpha: T, dim: usize) -> Result<Self> {
        let law = Self::power_law_unrestricted(mu_c, alpha, dim)?;
        let bound = lame_threshold::<T>(dim);
        if alpha <= bound {
            return Err(Error::DegenerateLame {
                alpha: alpha.to_f64().unwrap_or(f64::NAN),
                dim,
                bound: bound.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(law)
    }

    /// Power law without the Lamé restriction (only `alpha > 0`).
    ///
    /// Used for closed-form checks in the extinction range; the solvers refuse
    /// such laws.
    pub fn power_law_unrestricted(mu_c: T, alpha: T, dim: usize) -> Result<Self> {
        if !(mu_c > T::zero()) || !mu_c.is_finite() {
            return Err(domain("mu_c must be positive"));
        }
        if dim == 0 {
            return Err(domain("dim must be >= 1"));
        }
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(domain("alpha must be positive"));
        }
        let nu = power_law_nu(alpha, dim);
        Ok(Self {
            kind: LawKind::PowerLaw { mu_c, alpha },
            dim,
            nu1: nu,
            nu2: nu,
            lambda_override: None,
            lame_admissible: alpha > lame_threshold::<T>(dim),
        })
    }

    /// General increasing `mu` with `mu(0) = 0`, supplied with its derivative.
    pub fn general(
        mu: ScalarFn<T>,
        mu_prime: ScalarFn<T>,
        dim: usize,
        nu1: T,
        nu2: T,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(domain("dim must be >= 1"));
        }
        if !(nu1 > T::zero() && nu2 >= nu1) {
            return Err(domain("need 0 < nu1 <= nu2"));
        }
        let mu0 = mu(T::zero());
        if mu0.abs() > lit(1e-12) {
            return Err(domain("general law needs mu(0) = 0"));
        }
        Ok(Self {
            kind: LawKind::GeneralMonotone { mu, mu_prime, base: T::one(), tol: lit(1e-10) },
            dim,
            nu1,
            nu2,
            lambda_override: None,
            lame_admissible: true,
        })
    }

    /// Base point for the numerically integrated `phi` and `f`.
    pub fn with_base_point(mut self, point: T) -> Self {
        if let LawKind::GeneralMonotone { base, .. } = &mut self.kind {
            *base = point;
        }
        self
    }

    /// Replaces `lambda` by an arbitrary function. The result generally breaks
    /// the BD relation; `check_conditions` reports it.
    pub fn with_lambda(mut self, lambda: ScalarFn<T>) -> Self {
        self.lambda_override = Some(lambda);
        self
    }

    pub fn kind(&self) -> &LawKind<T> {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nu1(&self) -> T {
        self.nu1
    }

    pub fn nu2(&self) -> T {
        self.nu2
    }

    pub fn alpha(&self) -> Option<T> {
        match self.kind {
            LawKind::PowerLaw { alpha, .. } => Some(alpha),
            LawKind::GeneralMonotone { .. } => None,
        }
    }

    pub fn mu_c(&self) -> Option<T> {
        match self.kind {
            LawKind::PowerLaw { mu_c, .. } => Some(mu_c),
            LawKind::GeneralMonotone { .. } => None,
        }
    }

    /// Whether the solvers may use this law (`alpha > 1 - 1/N` for power laws).
    pub fn lame_admissible(&self) -> bool {
        self.lame_admissible
    }

    pub fn mu(&self, rho: T) -> T {
        match &self.kind {
            LawKind::PowerLaw { mu_c, alpha } => {
                if rho <= T::zero() {
                    T::zero()
                } else {
                    *mu_c * rho.powf(*alpha)
                }
            }
            LawKind::GeneralMonotone { mu, .. } => mu(rho),
        }
    }

    /// `mu'(rho)`; infinite at `rho = 0` for power laws with `alpha < 1`.
    pub fn mu_prime(&self, rho: T) -> T {
        match &self.kind {
            LawKind::PowerLaw { mu_c, alpha } => {
                if *alpha == T::one() {
                    *mu_c
                } else if rho <= T::zero() {
                    if *alpha > T::one() {
                        T::zero()
                    } else {
                        T::infinity()
                    }
                } else {
                    *mu_c * *alpha * rho.powf(*alpha - T::one())
                }
            }
            LawKind::GeneralMonotone { mu_prime, .. } => mu_prime(rho),
        }
    }

    pub fn lambda(&self, rho: T) -> T {
        if let Some(l) = &self.lambda_override {
            return l(rho);
        }
        match &self.kind {
            LawKind::PowerLaw { mu_c, alpha } => {
                lit::<T>(2.0) * (*alpha - T::one()) * *mu_c * rho.max(T::zero()).powf(*alpha)
            }
            LawKind::GeneralMonotone { .. } => {
                lit::<T>(2.0) * (rho * self.mu_prime(rho) - self.mu(rho))
            }
        }
    }

    /// `2 mu + lambda = 2 rho mu'` for BD laws: the 1D effective viscosity.
    pub fn effective_viscosity(&self, rho: T) -> T {
        lit::<T>(2.0) * self.mu(rho) + self.lambda(rho)
    }

    /// `lambda'(rho)`, closed form for plain power laws, otherwise a centered difference.
    pub fn lambda_prime(&self, rho: T) -> T {
        if self.lambda_override.is_none() {
            if let LawKind::PowerLaw { mu_c, alpha } = self.kind {
                if rho <= T::zero() {
                    return T::zero();
                }
                return lit::<T>(2.0) * (alpha - T::one()) * mu_c * alpha * rho.powf(alpha - T::one());
            }
        }
        let h = lit::<T>(1e-6) * rho.abs().max(lit(1e-3));
        (self.lambda(rho + h) - self.lambda(rho - h)) / (lit::<T>(2.0) * h)
    }

    /// `phi'(rho) = 2 mu'(rho) / rho`.
    pub fn phi_prime(&self, rho: T) -> T {
        lit::<T>(2.0) * self.mu_prime(rho) / rho
    }

    pub fn phi(&self, rho: T) -> Result<T> {
        check_nonnegative(rho)?;
        match &self.kind {
            LawKind::PowerLaw { mu_c, alpha } => {
                let two = lit::<T>(2.0);
                if *alpha == T::one() {
                    if rho == T::zero() {
                        return Err(self.vacuum(rho));
                    }
                    Ok(two * *mu_c * rho.ln())
                } else {
                    if rho == T::zero() && *alpha < T::one() {
                        return Err(self.vacuum(rho));
                    }
                    Ok(two * *mu_c * *alpha / (*alpha - T::one()) * rho.powf(*alpha - T::one()))
                }
            }
            LawKind::GeneralMonotone { mu_prime, base, tol, .. } => {
                if rho == T::zero() {
                    return Err(self.vacuum(rho));
                }
                // s = e^v turns 2 mu'(s)/s ds into 2 mu'(e^v) dv.
                let g = |v: T| lit::<T>(2.0) * mu_prime(v.exp());
                Ok(adaptive_simpson(g, base.ln(), rho.ln(), *tol))
            }
        }
    }

    pub fn f(&self, rho: T) -> Result<T> {
        check_nonnegative(rho)?;
        match &self.kind {
            LawKind::PowerLaw { mu_c, alpha } => {
                let half = lit::<T>(0.5);
                let two = lit::<T>(2.0);
                if *alpha == half {
                    if rho == T::zero() {
                        return Err(self.vacuum(rho));
                    }
                    Ok(*mu_c * rho.ln())
                } else {
                    if rho == T::zero() && *alpha < half {
                        return Err(self.vacuum(rho));
                    }
                    Ok(two * *mu_c * *alpha * rho.powf(*alpha - half) / (*alpha - half))
                }
            }
            LawKind::GeneralMonotone { mu_prime, base, tol, .. } => {
                // s = w^2 turns 2 mu'(s)/sqrt(s) ds into 4 mu'(w^2) dw.
                let g = |w: T| lit::<T>(4.0) * mu_prime(w * w);
                Ok(adaptive_simpson(g, base.sqrt(), rho.sqrt(), *tol))
            }
        }
    }

    pub fn psi(&self, rho: T) -> T {
        match &self.kind {
            LawKind::PowerLaw { mu_c, alpha } => {
                if rho <= T::zero() {
                    return T::zero();
                }
                *mu_c * rho.powf(*alpha + T::one()) / (*alpha + T::one())
            }
            LawKind::GeneralMonotone { mu, tol, .. } => {
                adaptive_simpson(|s| mu(s), T::zero(), rho, *tol)
            }
        }
    }

    /// Every law function at one density.
    pub fn eval(&self, rho: T) -> Result<LawValues<T>> {
        check_nonnegative(rho)?;
        Ok(LawValues {
            mu: self.mu(rho),
            lambda: self.lambda(rho),
            mu_prime: self.mu_prime(rho),
            phi: self.phi(rho)?,
            f: self.f(rho)?,
            psi: self.psi(rho),
        })
    }

    fn vacuum(&self, rho: T) -> Error {
        Error::VacuumSingular {
            rho: rho.to_f64().unwrap_or(f64::NAN),
            alpha: self.alpha().and_then(|a| a.to_f64()).unwrap_or(f64::NAN),
        }
    }

    /// Samples the structural conditions on `mu` and `lambda`.
    pub fn check_conditions(&self, samples: &[T]) -> Result<ConditionReport<T>> {
        if samples.is_empty() {
            return Err(domain("empty sample list"));
        }
        if let Some(bad) = samples.iter().find(|r| !(**r > T::zero())) {
            return Err(domain(format!("sample {bad} is not positive")));
        }
        let n = T::from_usize_(self.dim);
        let one = T::one();
        let two = lit::<T>(2.0);
        let rel = lit::<T>(1e-12);
        let exp_lo = one - one / n + self.nu1 / (two * n);
        let exp_hi = one - one / n + self.nu2 / (two * n);
        let c_power = self.mu(one);

        let lambda_prime_constant = samples
            .iter()
            .map(|&r| {
                let lp = self.lambda_prime(r).abs();
                if lp == T::zero() {
                    T::infinity()
                } else {
                    self.mu_prime(r) / lp
                }
            })
            .fold(T::infinity(), T::min);

        let mut checks = Vec::with_capacity(samples.len());
        for &rho in samples {
            let mu = self.mu(rho);
            let mu_p = self.mu_prime(rho);
            let lambda = self.lambda(rho);
            let lame = two * mu + n * lambda;
            let bd_target = two * (rho * mu_p - mu);
            let slack = |x: T| rel * x.abs().max(one);
            let lam_p = self.lambda_prime(rho).abs();

            let lo_big = c_power * rho.powf(exp_lo);
            let hi_big = c_power * rho.powf(exp_hi);
            let power_bounds = if rho > one {
                [mu + slack(mu) >= lo_big, mu <= hi_big + slack(hi_big), true, true]
            } else {
                [true, true, mu + slack(mu) >= hi_big, mu <= lo_big + slack(lo_big)]
            };
            checks.push(SampleCheck {
                rho,
                bd_relation: (lambda - bd_target).abs() <= slack(lambda),
                lame_lower: self.nu1 * mu <= lame + slack(lame),
                lame_upper: lame <= self.nu2 * mu + slack(lame),
                lambda_prime_nu1: lam_p <= mu_p / self.nu1 + slack(mu_p),
                monotone: mu_p > T::zero(),
                power_bounds,
            });
        }

        let growth = samples
            .iter()
            .filter(|&&r| r >= one)
            .map(|&r| self.mu(r) / r)
            .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.min(v))));

        Ok(ConditionReport {
            checks,
            power_constant: c_power,
            lambda_prime_constant,
            linear_growth_constant: growth,
        })
    }
}

fn check_nonnegative<T: Real>(rho: T) -> Result<()> {
    if rho < T::zero() || rho.is_nan() {
        return Err(domain(format!("density {rho} is negative")));
    }
    Ok(())
}

/// Per-sample outcome of [`ViscosityLaw::check_conditions`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCheck<T> {
    pub rho: T,
    pub bd_relation: bool,
    /// `nu1 mu <= 2 mu + N lambda`.
    pub lame_lower: bool,
    /// `2 mu + N lambda <= nu2 mu`.
    pub lame_upper: bool,
    /// `|lambda'| <= mu' / nu1` with the law's own `nu1` (informational, see
    /// [`ConditionReport::lambda_prime_constant`]).
    pub lambda_prime_nu1: bool,
    pub monotone: bool,
    /// Power envelopes anchored at `C = mu(1)`:
    /// `[lower rho>1, upper rho>1, lower rho<=1, upper rho<=1]`, vacuous
    /// entries are `true`.
    pub power_bounds: [bool; 4],
}

impl<T> SampleCheck<T> {
    pub fn passed(&self) -> bool {
        self.bd_relation
            && self.lame_lower
            && self.lame_upper
            && self.monotone
            && self.power_bounds.iter().all(|b| *b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport<T> {
    pub checks: Vec<SampleCheck<T>>,
    /// Constant of the power envelopes, `mu(1)`.
    pub power_constant: T,
    /// Best constant `c` in `|lambda'| <= mu' / c` over the samples
    /// (`inf` when `lambda' = 0`).
    pub lambda_prime_constant: T,
    /// `min mu(s)/s` over samples `s >= 1`, if any.
    pub linear_growth_constant: Option<T>,
}

impl<T: Real> ConditionReport<T> {
    pub fn bd_relation_holds(&self) -> bool {
        self.checks.iter().all(|c| c.bd_relation)
    }

    pub fn monotone(&self) -> bool {
        self.checks.iter().all(|c| c.monotone)
    }

    pub fn linear_growth(&self) -> bool {
        self.linear_growth_constant.is_none_or(|c| c > T::zero())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(SampleCheck::passed)
            && self.lambda_prime_constant > T::zero()
            && self.linear_growth()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pl(mu_c: f64, alpha: f64, dim: usize) -> ViscosityLaw<f64> {
        ViscosityLaw::power_law(mu_c, alpha, dim).unwrap()
    }

    #[test]
    fn shallow_water_law() {
        let law = pl(1.0, 1.0, 2);
        assert_eq!(law.nu1(), 2.0);
        assert_eq!(law.nu2(), 2.0);
        for r in [1e-3, 0.5, 7.0] {
            assert_eq!(law.lambda(r), 0.0);
        }
    }

    #[test]
    fn nu_for_quadratic_law_in_3d() {
        let law = pl(1.0, 2.0, 3);
        assert_eq!(law.nu1(), 8.0);
        assert_eq!(law.nu2(), 8.0);
    }

    #[test]
    fn lame_boundary_rejected() {
        let err = ViscosityLaw::power_law(1.0, 2.0 / 3.0, 3).unwrap_err();
        assert!(matches!(err, Error::DegenerateLame { dim: 3, .. }));
        assert!(ViscosityLaw::power_law(1.0, 0.5, 3).is_err());
        assert!(ViscosityLaw::power_law(0.0, 2.0, 3).is_err());
        let u = ViscosityLaw::power_law_unrestricted(1.0, 0.2, 3).unwrap();
        assert!(!u.lame_admissible());
    }

    #[test]
    fn eval_quadratic() {
        let law = pl(1.0, 2.0, 1);
        let v = law.eval(1.0).unwrap();
        assert_eq!(v.mu, 1.0);
        assert_eq!(v.lambda, 2.0);
        for r in [0.0, 0.3, 2.5] {
            assert_relative_eq!(law.phi(r).unwrap(), 4.0 * r, max_relative = 1e-15);
        }
        let v0 = law.eval(0.0).unwrap();
        assert_eq!((v0.mu, v0.lambda), (0.0, 0.0));
    }

    #[test]
    fn log_potential_for_linear_law() {
        let law = pl(1.0, 1.0, 1);
        assert_relative_eq!(law.phi(std::f64::consts::E).unwrap(), 2.0, max_relative = 1e-15);
        assert!(matches!(law.eval(0.0), Err(Error::VacuumSingular { .. })));
        assert!(matches!(law.eval(-1.0), Err(Error::Domain(_))));
        let fast = pl(1.0, 0.7, 1);
        assert!(matches!(fast.phi(0.0), Err(Error::VacuumSingular { .. })));
    }

    #[test]
    fn conditions_pass_for_power_law() {
        let law = pl(1.0, 2.0, 3);
        let rep = law.check_conditions(&[0.5, 1.0, 2.0]).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.power_constant, 1.0);
        // |lambda'| = 4 rho vs mu' = 2 rho: best constant 1/2, while nu1 = 8.
        assert_relative_eq!(rep.lambda_prime_constant, 0.5, max_relative = 1e-12);
        assert!(rep.checks.iter().all(|c| !c.lambda_prime_nu1));
    }

    #[test]
    fn injected_lambda_breaks_bd() {
        let law = pl(1.0, 2.0, 3).with_lambda(Arc::new(|r: f64| 3.0 * r * r));
        let rep = law.check_conditions(&[0.5, 1.0, 2.0]).unwrap();
        assert!(!rep.bd_relation_holds());
        assert!(!rep.passed());
    }

    #[test]
    fn general_law_quadratic_plus_linear() {
        // mu = s + s^2: lambda = 2 s^2, (2 mu + lambda)/mu = (2 + 4s)/(1 + s) in (2, 4).
        let law = ViscosityLaw::general(
            Arc::new(|s: f64| s + s * s),
            Arc::new(|s: f64| 1.0 + 2.0 * s),
            1,
            2.0,
            4.0,
        )
        .unwrap();
        let samples = [0.1, 0.5, 1.0, 2.0, 10.0];
        let rep = law.check_conditions(&samples).unwrap();
        assert!(rep.monotone());
        assert!(rep.linear_growth());
        assert!(rep.bd_relation_holds());
        assert_relative_eq!(rep.linear_growth_constant.unwrap(), 2.0, max_relative = 1e-12);
        for &s in &samples {
            assert_relative_eq!(law.lambda(s), 2.0 * s * s, max_relative = 1e-12);
        }
        // Closed forms for comparison: phi = 2 ln s + 4 (s - 1), f = 4(sqrt s - 1) + (8/3)(s^1.5 - 1),
        // psi = s^2/2 + s^3/3.
        for &s in &samples {
            assert_relative_eq!(law.phi(s).unwrap(), 2.0 * s.ln() + 4.0 * (s - 1.0), epsilon = 1e-9);
            let f = 4.0 * (s.sqrt() - 1.0) + 8.0 / 3.0 * (s.powf(1.5) - 1.0);
            assert_relative_eq!(law.f(s).unwrap(), f, epsilon = 1e-9);
            assert_relative_eq!(law.psi(s), s * s / 2.0 + s.powi(3) / 3.0, epsilon = 1e-9);
        }
        assert!(law.phi(0.0).is_err());
    }

    #[test]
    fn general_law_rejects_offset() {
        let r = ViscosityLaw::general(Arc::new(|s: f64| s + 1.0), Arc::new(|_| 1.0), 1, 1.0, 2.0);
        assert!(r.is_err());
    }

    #[test]
    fn f32_law() {
        let law = ViscosityLaw::<f32>::power_law(1.0, 2.0, 1).unwrap();
        assert_eq!(law.lambda(1.0), 2.0);
    }

    proptest! {
        #[test]
        fn bd_relation_power_law(alpha in 0.01f64..4.0, lrho in -18.0f64..18.0, mu_c in 0.1f64..10.0) {
            let law = ViscosityLaw::power_law_unrestricted(mu_c, alpha, 1).unwrap();
            let rho = lrho.exp();
            let lam = law.lambda(rho);
            let rhs = 2.0 * rho * law.mu_prime(rho) - 2.0 * law.mu(rho);
            prop_assert!((lam - rhs).abs() <= 1e-12 * lam.abs().max(1.0));
        }

        #[test]
        fn lame_combination(alpha in 0.7f64..4.0, rho in 1e-3f64..1e3, dim in 1usize..4) {
            let law = ViscosityLaw::power_law_unrestricted(1.3, alpha, dim).unwrap();
            let n = dim as f64;
            let lhs = 2.0 * law.mu(rho) + n * law.lambda(rho);
            let rhs = 2.0 * (1.0 + n * (alpha - 1.0)) * law.mu(rho);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
        }

        #[test]
        fn potentials_differentiate_back(alpha in 0.3f64..3.5, rho in 1e-2f64..1e2) {
            let law = ViscosityLaw::power_law_unrestricted(0.8, alpha, 1).unwrap();
            let h = 1e-6 * rho;
            let dphi = (law.phi(rho + h).unwrap() - law.phi(rho - h).unwrap()) / (2.0 * h);
            prop_assert!((dphi - law.phi_prime(rho)).abs() <= 1e-6 * law.phi_prime(rho).abs());
            let df = (law.f(rho + h).unwrap() - law.f(rho - h).unwrap()) / (2.0 * h);
            let target = rho.sqrt() * law.phi_prime(rho);
            prop_assert!((df - target).abs() <= 1e-6 * target.abs());
            let dpsi = (law.psi(rho + h) - law.psi(rho - h)) / (2.0 * h);
            prop_assert!((dpsi - law.mu(rho)).abs() <= 1e-6 * law.mu(rho).abs());
        }
    }
}
