//! The energy functional, its weak derivative, the Sobolev gradient and the
//! fibering map `t -> J(tu)`.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{KirchhoffSpec, ModelParams, Nonlinearity};
use crate::radial::{RadialFunction, WeightedSpace};

/// Terms of `J(u) = G(|u|^2)/2 - |u|_q^q / q - int F(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kirchhoff_term: f64,
    pub power_term: f64,
    pub f_term: f64,
    pub total: f64,
}

/// Sobolev (Riesz) representative of `J'(u)` in the weighted inner product.
#[derive(Debug, Clone)]
pub struct SobolevGradient {
    pub gradient: RadialFunction,
    pub coefficients: DVector<f64>,
    pub norm: f64,
}

/// `J(u) = G(|u|^2)/2 - |u|_s^s / s - int F(u)` on a discrete weighted space,
/// where `s` is the power exponent and the `F` term is optional.
#[derive(Debug, Clone)]
pub struct EnergyFunctional {
    space: Arc<WeightedSpace>,
    kirchhoff: KirchhoffSpec,
    power: f64,
    nonlinearity: Option<Arc<dyn Nonlinearity>>,
}

/// Moments of a fixed direction `u`, enough to evaluate `J(tu)` and its
/// `t`-derivatives without recomputing norms.
#[derive(Debug, Clone)]
pub struct Fiber<'a> {
    functional: &'a EnergyFunctional,
    values: &'a [f64],
    norm_sq: f64,
    power_moment: f64,
}

/// A scalar fibering map `t -> J(tu)` on `t > 0`.
pub trait FiberingMap {
    fn value(&self, t: f64) -> Result<f64>;
    fn deriv(&self, t: f64) -> Result<f64>;
    fn second_deriv(&self, t: f64) -> Result<f64>;
    /// `|u|`, the norm of the direction.
    fn direction_norm(&self) -> f64;
}

impl EnergyFunctional {
    pub fn new(
        space: Arc<WeightedSpace>,
        kirchhoff: KirchhoffSpec,
        power: f64,
        nonlinearity: Option<Arc<dyn Nonlinearity>>,
    ) -> Result<Self> {
        if !(power > 2.0 && power.is_finite()) {
            return Err(invalid(
                "q",
                format!("power exponent must exceed 2, got {power}"),
            ));
        }
        kirchhoff.validate()?;
        Ok(EnergyFunctional {
            space,
            kirchhoff,
            power,
            nonlinearity,
        })
    }

    /// The functional of the full problem with power `q` and the critical `f`.
    pub fn full(space: Arc<WeightedSpace>, params: &ModelParams) -> Result<Self> {
        let f = params.nonlinearity()?;
        Self::new(space, params.kirchhoff, params.q, Some(Arc::new(f)))
    }

    /// The auxiliary pure-power functional with exponent `p`.
    pub fn auxiliary(space: Arc<WeightedSpace>, params: &ModelParams) -> Result<Self> {
        Self::new(space, params.kirchhoff, params.p, None)
    }

    pub fn space(&self) -> &Arc<WeightedSpace> {
        &self.space
    }

    pub fn kirchhoff(&self) -> &KirchhoffSpec {
        &self.kirchhoff
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn nonlinearity(&self) -> Option<&Arc<dyn Nonlinearity>> {
        self.nonlinearity.as_ref()
    }

    fn check(&self, u: &RadialFunction) -> Result<()> {
        if Arc::ptr_eq(u.grid(), self.space.grid()) || u.grid().same_as(self.space.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `|u|^2 = int w |Lap u|^2`.
    pub fn norm_sq(&self, u: &RadialFunction) -> Result<f64> {
        self.check(u)?;
        let lap = u.clamped_laplacian();
        Ok(self.space.inner_from_laplacians(lap.values(), lap.values()))
    }

    pub fn fiber<'a>(&'a self, u: &'a RadialFunction) -> Result<Fiber<'a>> {
        let norm_sq = self.norm_sq(u)?;
        let power_moment = u
            .values()
            .iter()
            .zip(self.space.mass_weights())
            .map(|(v, m)| m * v.abs().powf(self.power))
            .sum();
        Ok(Fiber {
            functional: self,
            values: u.values(),
            norm_sq,
            power_moment,
        })
    }

    pub fn energy(&self, u: &RadialFunction) -> Result<EnergyBreakdown> {
        self.fiber(u)?.breakdown(1.0)
    }

    /// `<J'(u), phi> = g(|u|^2) <u, phi> - int |u|^{s-2} u phi - int f(u) phi`.
    pub fn weak_action(&self, u: &RadialFunction, phi: &RadialFunction) -> Result<f64> {
        self.check(u)?;
        self.check(phi)?;
        let lap_u = u.clamped_laplacian();
        let lap_phi = phi.clamped_laplacian();
        let norm_sq = self
            .space
            .inner_from_laplacians(lap_u.values(), lap_u.values());
        let inner = self
            .space
            .inner_from_laplacians(lap_u.values(), lap_phi.values());
        let mut rhs = 0.0;
        for (i, (&v, &m)) in u.values().iter().zip(self.space.mass_weights()).enumerate() {
            rhs += m * self.reaction(v)? * phi.values()[i];
        }
        Ok(self.kirchhoff.g_unchecked(norm_sq) * inner - rhs)
    }

    /// `|v|^{s-2} v + f(v)`.
    fn reaction(&self, v: f64) -> Result<f64> {
        let mut r = v.signum() * v.abs().powf(self.power - 1.0);
        if let Some(f) = &self.nonlinearity {
            r += f.f(v)?;
        }
        Ok(r)
    }

    fn reaction_prime(&self, v: f64) -> Result<f64> {
        let mut r = (self.power - 1.0) * v.abs().powf(self.power - 2.0);
        if let Some(f) = &self.nonlinearity {
            r += f.f_prime(v)?;
        }
        Ok(r)
    }

    fn primitive(&self, v: f64) -> Result<(f64, f64)> {
        let f_term = match &self.nonlinearity {
            Some(f) => f.F(v)?,
            None => 0.0,
        };
        Ok((v.abs().powf(self.power) / self.power, f_term))
    }

    /// Riesz representative `v` of `J'(u)`: `<v, phi> = <J'(u), phi>` for
    /// every discrete `phi`.
    pub fn sobolev_gradient(&self, u: &RadialFunction) -> Result<SobolevGradient> {
        self.check(u)?;
        let grid = self.space.grid();
        let lap_u = u.clamped_laplacian();
        let norm_sq = self
            .space
            .inner_from_laplacians(lap_u.values(), lap_u.values());
        let g = self.kirchhoff.g_unchecked(norm_sq);
        let n = grid.n();
        let mut weighted_lap = DVector::zeros(n);
        let mut weighted_reaction = DVector::zeros(n);
        for i in 0..n {
            weighted_lap[i] = g * self.space.energy_weights()[i] * lap_u.values()[i];
            weighted_reaction[i] = self.space.mass_weights()[i] * self.reaction(u.values()[i])?;
        }
        let rhs =
            grid.basis_laplacian().tr_mul(&weighted_lap) - grid.basis().tr_mul(&weighted_reaction);
        let coefficients = self.space.solve_gram(&rhs)?;
        let norm = self
            .space
            .coefficient_norm_sq(&coefficients)
            .max(0.0)
            .sqrt();
        let gradient = RadialFunction::from_coefficients(Arc::clone(grid), &coefficients);
        Ok(SobolevGradient {
            gradient,
            coefficients,
            norm,
        })
    }

    /// `J(tu)`.
    pub fn fibering(&self, u: &RadialFunction, t: f64) -> Result<f64> {
        check_t(t)?;
        self.fiber(u)?.value(t)
    }

    /// `d/dt J(tu)`.
    pub fn fibering_deriv(&self, u: &RadialFunction, t: f64) -> Result<f64> {
        check_t(t)?;
        self.fiber(u)?.deriv(t)
    }

    /// `<J'(u), u>`.
    pub fn nehari_residual(&self, u: &RadialFunction) -> Result<f64> {
        self.fiber(u)?.deriv(1.0)
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    Ok(())
}

impl Fiber<'_> {
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `|u|_s^s` for the functional's power exponent `s`.
    pub fn power_moment(&self) -> f64 {
        self.power_moment
    }

    pub fn breakdown(&self, t: f64) -> Result<EnergyBreakdown> {
        let fun = self.functional;
        let s = fun.power;
        let kirchhoff_term = 0.5 * fun.kirchhoff.primitive_unchecked(t * t * self.norm_sq);
        let power_term = t.powf(s) * self.power_moment / s;
        let mut f_term = 0.0;
        if fun.nonlinearity.is_some() {
            for (&v, &m) in self.values.iter().zip(fun.space.mass_weights()) {
                f_term += m * fun.primitive(t * v)?.1;
            }
        }
        Ok(EnergyBreakdown {
            kirchhoff_term,
            power_term,
            f_term,
            total: kirchhoff_term - power_term - f_term,
        })
    }
}

impl FiberingMap for Fiber<'_> {
    fn value(&self, t: f64) -> Result<f64> {
        Ok(self.breakdown(t)?.total)
    }

    fn deriv(&self, t: f64) -> Result<f64> {
        let fun = self.functional;
        let s = self.norm_sq;
        let mut d = fun.kirchhoff.g_unchecked(t * t * s) * t * s;
        d -= t.powf(fun.power - 1.0) * self.power_moment;
        if let Some(f) = &fun.nonlinearity {
            for (&v, &m) in self.values.iter().zip(fun.space.mass_weights()) {
                d -= m * f.f(t * v)? * v;
            }
        }
        Ok(d)
    }

    fn second_deriv(&self, t: f64) -> Result<f64> {
        let fun = self.functional;
        let s = self.norm_sq;
        let tt = t * t * s;
        let mut d = fun.kirchhoff.derivative_unchecked(tt) * 2.0 * tt * s
            + fun.kirchhoff.g_unchecked(tt) * s;
        if fun.nonlinearity.is_some() {
            for (&v, &m) in self.values.iter().zip(fun.space.mass_weights()) {
                d -= m * fun.reaction_prime(t * v)? * v * v;
            }
        } else {
            d -= (fun.power - 1.0) * t.powf(fun.power - 2.0) * self.power_moment;
        }
        Ok(d)
    }

    fn direction_norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }
}

/// Fibering map of the pure-power functional built from prescribed moments
/// `S = |u|^2` and `I = |u|_p^p`:
/// `t -> G(t^2 S)/2 - t^p I / p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentFibering {
    pub kirchhoff: KirchhoffSpec,
    pub norm_sq: f64,
    pub power: f64,
    pub moment: f64,
}

impl FiberingMap for MomentFibering {
    fn value(&self, t: f64) -> Result<f64> {
        let s = self.norm_sq;
        Ok(0.5 * self.kirchhoff.primitive_unchecked(t * t * s)
            - t.powf(self.power) * self.moment / self.power)
    }

    fn deriv(&self, t: f64) -> Result<f64> {
        let s = self.norm_sq;
        Ok(self.kirchhoff.g_unchecked(t * t * s) * t * s - t.powf(self.power - 1.0) * self.moment)
    }

    fn second_deriv(&self, t: f64) -> Result<f64> {
        let s = self.norm_sq;
        let tt = t * t * s;
        Ok(self.kirchhoff.derivative_unchecked(tt) * 2.0 * tt * s
            + self.kirchhoff.g_unchecked(tt) * s
            - (self.power - 1.0) * t.powf(self.power - 2.0) * self.moment)
    }

    fn direction_norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CriticalNonlinearity, NonlinearitySpec};
    use crate::radial::{random_profile, GridScheme, RadialGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn setup(beta: f64) -> EnergyFunctional {
        let grid = RadialGrid::new(32, GridScheme::SpectralEven).unwrap();
        let space = WeightedSpace::new(grid, beta).unwrap();
        let f = CriticalNonlinearity::new(NonlinearitySpec {
            cp: 2.0,
            p: 6.0,
            alpha0: 1.0,
            gamma: 4.0,
        })
        .unwrap();
        EnergyFunctional::new(space, KirchhoffSpec::default(), 5.0, Some(Arc::new(f))).unwrap()
    }

    fn bump(fun: &EnergyFunctional) -> RadialFunction {
        RadialFunction::from_fn(Arc::clone(fun.space().grid()), |r| (1.0 - r * r).powi(2))
    }

    #[test]
    fn zero_has_zero_energy() {
        let fun = setup(0.5);
        let z = RadialFunction::zeros(Arc::clone(fun.space().grid()));
        let e = fun.energy(&z).unwrap();
        assert_eq!(e.total, 0.0);
        assert_eq!(fun.weak_action(&z, &bump(&fun)).unwrap(), 0.0);
        assert_eq!(fun.sobolev_gradient(&z).unwrap().norm, 0.0);
    }

    #[test]
    fn degenerate_power_only_energy() {
        let grid = RadialGrid::new(32, GridScheme::SpectralEven).unwrap();
        let space = WeightedSpace::new(grid, 0.0).unwrap();
        let q = 5.0;
        let fun = EnergyFunctional::new(space, KirchhoffSpec::Affine { g0: 1.0, a: 0.0 }, q, None)
            .unwrap();
        let u = bump(&fun);
        let e = fun.energy(&u).unwrap();
        // |u|^2 = 16 pi^2 and |u|_q^q = 2 pi^2 int_0^1 (1-r^2)^{2q} r^3 dr = pi^2 B(2, 2q+1)
        let beta_fn = 1.0 / ((2.0 * q + 1.0) * (2.0 * q + 2.0));
        let want = 0.5 * 16.0 * PI * PI - PI * PI * beta_fn / q;
        assert!((e.total - want).abs() < 1e-9 * want, "{} {want}", e.total);
        assert_eq!(e.f_term, 0.0);
    }

    #[test]
    fn breakdown_sums() {
        let fun = setup(0.5);
        let u = bump(&fun).scaled(0.3);
        let e = fun.energy(&u).unwrap();
        assert!((e.total - (e.kirchhoff_term - e.power_term - e.f_term)).abs() < 1e-12);
        assert!(e.f_term > 0.0);
    }

    #[test]
    fn weak_action_matches_finite_differences() {
        let fun = setup(0.5);
        let grid = Arc::clone(fun.space().grid());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let u = random_profile(&grid, &mut rng).scaled(0.2);
            let phi = random_profile(&grid, &mut rng);
            let eps = 1e-5;
            let plus = fun
                .energy(&u.combine(1.0, &phi, eps).unwrap())
                .unwrap()
                .total;
            let minus = fun
                .energy(&u.combine(1.0, &phi, -eps).unwrap())
                .unwrap()
                .total;
            let fd = (plus - minus) / (2.0 * eps);
            let exact = fun.weak_action(&u, &phi).unwrap();
            assert!(
                (fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()),
                "{fd} {exact}"
            );
        }
    }

    #[test]
    fn gradient_satisfies_its_defining_equations() {
        let fun = setup(0.5);
        let grid = Arc::clone(fun.space().grid());
        let u = random_profile(&grid, &mut ChaCha8Rng::seed_from_u64(9)).scaled(0.5);
        let v = fun.sobolev_gradient(&u).unwrap();
        let lap_v = v.gradient.clamped_laplacian();
        for k in 0..grid.dim() {
            let phi = RadialFunction::from_coefficients(
                Arc::clone(&grid),
                &DVector::from_fn(grid.dim(), |i, _| if i == k { 1.0 } else { 0.0 }),
            );
            let lhs = fun
                .space()
                .inner_from_laplacians(lap_v.values(), phi.clamped_laplacian().values());
            let rhs = fun.weak_action(&u, &phi).unwrap();
            assert!(
                (lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()),
                "k={k}: {lhs} {rhs}"
            );
        }
        let norm = fun.norm_sq(&v.gradient).unwrap().sqrt();
        assert!((norm - v.norm).abs() < 1e-9 * (1.0 + norm));
    }

    #[test]
    fn fibering_identities() {
        let fun = setup(0.5);
        let u = bump(&fun).scaled(0.1);
        assert_eq!(fun.fibering(&u, 0.0).unwrap(), 0.0);
        assert_eq!(
            fun.fibering(&u, 1.0).unwrap(),
            fun.energy(&u).unwrap().total
        );
        assert_eq!(
            fun.nehari_residual(&u).unwrap(),
            fun.fibering_deriv(&u, 1.0).unwrap()
        );
        let wa = fun.weak_action(&u, &u).unwrap();
        assert!((wa - fun.nehari_residual(&u).unwrap()).abs() < 1e-12 * (1.0 + wa.abs()));
        let fiber = fun.fiber(&u).unwrap();
        for &t in &[0.3, 1.0, 2.5] {
            let h = 1e-5;
            let fd = (fiber.deriv(t + h).unwrap() - fiber.deriv(t - h).unwrap()) / (2.0 * h);
            let d2 = fiber.second_deriv(t).unwrap();
            assert!(
                (fd - d2).abs() < 1e-6 * (1.0 + d2.abs()),
                "t={t}: {fd} {d2}"
            );
        }
        assert!(fun.fibering(&u, -1.0).is_err());
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let fun = setup(0.5);
        let other = RadialGrid::new(16, GridScheme::SpectralEven).unwrap();
        let u = RadialFunction::from_fn(other, |r| 1.0 - r * r);
        assert_eq!(fun.energy(&u).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn moment_fibering_quartic() {
        let m = MomentFibering {
            kirchhoff: KirchhoffSpec::default(),
            norm_sq: 1.0,
            power: 6.0,
            moment: 1.0,
        };
        let t: f64 = ((1.0 + 5f64.sqrt()) / 2.0).sqrt();
        assert!(m.deriv(t).unwrap().abs() < 1e-14);
    }
}
