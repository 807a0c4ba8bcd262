//! Gradient, curl and directional derivatives over field handles.
//!
//! An analytic handle wraps DSL expressions and is differentiated exactly
//! through [`Jet2`](crate::expr::Jet2). A derived handle wraps an arbitrary
//! pure evaluation procedure (a frame vector, a speed, a product of fields)
//! and is differentiated by second-order central differences.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::expr::{Expr, VectorFieldSpec};

type ScalarFn = dyn Fn(&Vector3<f64>) -> Result<f64> + Send + Sync;
type VectorFn = dyn Fn(&Vector3<f64>) -> Result<Vector3<f64>> + Send + Sync;

/// Default central-difference step: `cbrt(eps) * max(1, |p|)`.
pub fn default_step(p: &Vector3<f64>) -> f64 {
    f64::EPSILON.cbrt() * p.norm().max(1.0)
}

fn check_step(step: Option<f64>) -> Result<Option<f64>> {
    match step {
        Some(h) if !(h > 0.0 && h.is_finite()) => Err(Error::InvalidStep(h)),
        other => Ok(other),
    }
}

#[derive(Clone)]
pub struct DerivedScalar {
    eval: Arc<ScalarFn>,
    step: Option<f64>,
}

#[derive(Clone)]
pub struct DerivedVector {
    eval: Arc<VectorFn>,
    step: Option<f64>,
}

impl DerivedScalar {
    fn step_at(&self, p: &Vector3<f64>) -> f64 {
        self.step.unwrap_or_else(|| default_step(p))
    }
}

impl DerivedVector {
    fn step_at(&self, p: &Vector3<f64>) -> f64 {
        self.step.unwrap_or_else(|| default_step(p))
    }
}

#[derive(Clone)]
pub enum ScalarHandle {
    Analytic(Expr),
    Derived(DerivedScalar),
}

#[derive(Clone)]
pub enum VectorHandle {
    Analytic(VectorFieldSpec),
    Derived(DerivedVector),
}

impl fmt::Debug for ScalarHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarHandle::Analytic(e) => write!(f, "Analytic({e})"),
            ScalarHandle::Derived(d) => write!(f, "Derived(step: {:?})", d.step),
        }
    }
}

impl fmt::Debug for VectorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorHandle::Analytic(v) => write!(f, "Analytic({v})"),
            VectorHandle::Derived(d) => write!(f, "Derived(step: {:?})", d.step),
        }
    }
}

impl ScalarHandle {
    /// Wraps `f`; `step` overrides the default difference step and must be positive.
    pub fn derived<F>(f: F, step: Option<f64>) -> Result<Self>
    where
        F: Fn(&Vector3<f64>) -> Result<f64> + Send + Sync + 'static,
    {
        Ok(ScalarHandle::Derived(DerivedScalar {
            eval: Arc::new(f),
            step: check_step(step)?,
        }))
    }

    pub fn eval(&self, p: &Vector3<f64>) -> Result<f64> {
        match self {
            ScalarHandle::Analytic(e) => Ok(e.eval_f64(p)?),
            ScalarHandle::Derived(d) => (d.eval)(p),
        }
    }

    /// Same field, differentiated numerically.
    pub fn as_derived(&self, step: Option<f64>) -> Result<Self> {
        let me = self.clone();
        ScalarHandle::derived(move |p| me.eval(p), step)
    }
}

impl From<Expr> for ScalarHandle {
    fn from(e: Expr) -> Self {
        ScalarHandle::Analytic(e)
    }
}

impl VectorHandle {
    pub fn derived<F>(f: F, step: Option<f64>) -> Result<Self>
    where
        F: Fn(&Vector3<f64>) -> Result<Vector3<f64>> + Send + Sync + 'static,
    {
        Ok(VectorHandle::Derived(DerivedVector {
            eval: Arc::new(f),
            step: check_step(step)?,
        }))
    }

    pub fn eval(&self, p: &Vector3<f64>) -> Result<Vector3<f64>> {
        match self {
            VectorHandle::Analytic(v) => Ok(v.eval_f64(p)?),
            VectorHandle::Derived(d) => (d.eval)(p),
        }
    }

    pub fn as_derived(&self, step: Option<f64>) -> Result<Self> {
        let me = self.clone();
        VectorHandle::derived(move |p| me.eval(p), step)
    }

    /// Difference step the handle would use at `p`, `None` for analytic handles.
    pub fn step_at(&self, p: &Vector3<f64>) -> Option<f64> {
        match self {
            VectorHandle::Analytic(_) => None,
            VectorHandle::Derived(d) => Some(d.step_at(p)),
        }
    }

    /// `f * self`. Stays analytic when `self` is.
    pub fn scaled_by(&self, f: &Expr) -> Result<Self> {
        match self {
            VectorHandle::Analytic(v) => Ok(VectorHandle::Analytic(v.scaled_by(f))),
            VectorHandle::Derived(d) => {
                let inner = d.eval.clone();
                let f = f.clone();
                VectorHandle::derived(move |p| Ok(inner(p)? * f.eval_f64(p)?), d.step)
            }
        }
    }

    /// Jacobian `J[(i, j)] = d F_i / d x_j`.
    pub fn jacobian(&self, p: &Vector3<f64>) -> Result<Matrix3<f64>> {
        match self {
            VectorHandle::Analytic(v) => {
                let jets = v.eval_jet2(p)?;
                Ok(Matrix3::from_fn(|i, j| jets[i].gradient[j]))
            }
            VectorHandle::Derived(d) => {
                let h = d.step_at(p);
                let mut jac = Matrix3::zeros();
                for j in 0..3 {
                    let mut e = Vector3::zeros();
                    e[j] = h;
                    let col = ((d.eval)(&(p + e))? - (d.eval)(&(p - e))?) / (2.0 * h);
                    jac.set_column(j, &col);
                }
                Ok(jac)
            }
        }
    }
}

impl From<VectorFieldSpec> for VectorHandle {
    fn from(v: VectorFieldSpec) -> Self {
        VectorHandle::Analytic(v)
    }
}

pub fn gradient(f: &ScalarHandle, p: &Vector3<f64>) -> Result<Vector3<f64>> {
    match f {
        ScalarHandle::Analytic(e) => Ok(e.eval_jet2(p)?.gradient),
        ScalarHandle::Derived(d) => {
            let h = d.step_at(p);
            let mut g = Vector3::zeros();
            for j in 0..3 {
                let mut e = Vector3::zeros();
                e[j] = h;
                g[j] = ((d.eval)(&(p + e))? - (d.eval)(&(p - e))?) / (2.0 * h);
            }
            Ok(g)
        }
    }
}

/// Curl assembled from a Jacobian.
pub fn curl_from_jacobian(jac: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        jac[(2, 1)] - jac[(1, 2)],
        jac[(0, 2)] - jac[(2, 0)],
        jac[(1, 0)] - jac[(0, 1)],
    )
}

pub fn curl(field: &VectorHandle, p: &Vector3<f64>) -> Result<Vector3<f64>> {
    Ok(curl_from_jacobian(&field.jacobian(p)?))
}

/// Largest admissible deviation of `|d|` from one.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// `d . grad f` for a unit direction `d`.
pub fn directional_derivative(f: &ScalarHandle, p: &Vector3<f64>, d: &Vector3<f64>) -> Result<f64> {
    let norm = d.norm();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitDirection { norm });
    }
    Ok(d.dot(&gradient(f, p)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_scalar, parse_vector};

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    #[test]
    fn gradient_examples() {
        let f: ScalarHandle = parse_scalar("x^2+y^2+z^2").unwrap().into();
        assert_eq!(gradient(&f, &v(1.0, 2.0, 3.0)).unwrap(), v(2.0, 4.0, 6.0));
        let f: ScalarHandle = parse_scalar("-(x^2+y^2)/2").unwrap().into();
        assert_eq!(gradient(&f, &v(1.0, 0.0, 0.0)).unwrap(), v(-1.0, 0.0, 0.0));
    }

    #[test]
    fn derived_speed_gradient() {
        let field = parse_vector("-y, x, 1").unwrap();
        let speed = ScalarHandle::derived(move |p| Ok(field.eval_f64(p)?.norm()), None).unwrap();
        let g = gradient(&speed, &v(1.0, 0.0, 0.0)).unwrap();
        // |v| = sqrt(x^2 + y^2 + 1)
        assert!((g - v(0.5f64.sqrt(), 0.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn curl_examples() {
        let rot: VectorHandle = parse_vector("-y, x, 0").unwrap().into();
        for p in [v(0.0, 0.0, 0.0), v(1.0, -2.0, 5.0)] {
            assert_eq!(curl(&rot, &p).unwrap(), v(0.0, 0.0, 2.0));
        }
        let grad: VectorHandle = parse_vector("x, -y, 0").unwrap().into();
        assert_eq!(curl(&grad, &v(0.3, 0.2, 0.1)).unwrap(), Vector3::zeros());
        let euler: VectorHandle = parse_vector("y*z, x*z, x*y").unwrap().into();
        assert_eq!(curl(&euler, &v(1.0, 2.0, 3.0)).unwrap(), Vector3::zeros());
    }

    #[test]
    fn directional_examples() {
        let f: ScalarHandle = parse_scalar("z").unwrap().into();
        let d = directional_derivative(&f, &v(4.0, 5.0, 6.0), &v(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(d, 1.0);
        let f: ScalarHandle = parse_scalar("x^2").unwrap().into();
        let d = directional_derivative(&f, &v(3.0, 0.0, 0.0), &v(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(d, 0.0);
        let field = parse_vector("-y, x, 0").unwrap();
        let speed = ScalarHandle::derived(move |p| Ok(field.eval_f64(p)?.norm()), None).unwrap();
        let d = directional_derivative(&speed, &v(1.0, 0.0, 0.0), &v(0.0, 1.0, 0.0)).unwrap();
        assert!(d.abs() < 1e-10);
    }

    #[test]
    fn non_unit_direction_rejected() {
        let f: ScalarHandle = parse_scalar("x").unwrap().into();
        let err = directional_derivative(&f, &Vector3::zeros(), &v(1.0, 1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::NonUnitDirection { .. }));
    }

    #[test]
    fn non_positive_step_rejected() {
        assert!(matches!(
            ScalarHandle::derived(|_| Ok(0.0), Some(0.0)),
            Err(Error::InvalidStep(_))
        ));
        assert!(matches!(
            VectorHandle::derived(|_| Ok(Vector3::zeros()), Some(-1e-3)),
            Err(Error::InvalidStep(_))
        ));
    }

    #[test]
    fn derived_error_propagates() {
        let f: ScalarHandle = parse_scalar("sqrt(x)").unwrap().into();
        let d = f.as_derived(None).unwrap();
        assert!(matches!(
            gradient(&d, &v(0.0, 0.0, 0.0)),
            Err(Error::Domain(_))
        ));
    }
}
