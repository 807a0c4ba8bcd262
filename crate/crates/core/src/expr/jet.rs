//! Forward-mode differentiation in three variables.
//!
//! [`Dual<T>`] carries a value and its gradient with respect to `(x, y, z)`.
//! Because `Dual<T>` is itself a [`Scalar`], duals nest: evaluating over
//! `Dual<Dual<f64>>` yields exact first and second derivatives, and one more
//! level gives third derivatives. No truncation error is involved at any depth.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};

/// Number type the expression evaluator and the frame construction run over.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    /// Innermost real value, used for domain checks and thresholds.
    fn re(&self) -> f64;
    fn scale(self, c: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn tanh(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, c: f64) -> Self;
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn re(&self) -> f64 {
        *self
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, c: f64) -> Self {
        f64::powf(self, c)
    }
}

/// Value plus gradient in `(x, y, z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub du: [T; 3],
}

impl<T: Scalar> Dual<T> {
    pub fn constant_dual(c: T) -> Self {
        let z = T::constant(0.0);
        Dual {
            re: c,
            du: [z, z, z],
        }
    }

    /// Independent variable `axis` with value `value`.
    pub fn variable(value: T, axis: usize) -> Self {
        let mut d = Self::constant_dual(value);
        d.du[axis] = T::constant(1.0);
        d
    }

    /// Applies the chain rule given `f(re)` and `f'(re)`.
    fn chain(self, value: T, slope: T) -> Self {
        Dual {
            re: value,
            du: [self.du[0] * slope, self.du[1] * slope, self.du[2] * slope],
        }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual {
            re: self.re + o.re,
            du: [
                self.du[0] + o.du[0],
                self.du[1] + o.du[1],
                self.du[2] + o.du[2],
            ],
        }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual {
            re: self.re - o.re,
            du: [
                self.du[0] - o.du[0],
                self.du[1] - o.du[1],
                self.du[2] - o.du[2],
            ],
        }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, o: Self) -> Self {
        let d = |i: usize| self.du[i] * o.re + self.re * o.du[i];
        Dual {
            re: self.re * o.re,
            du: [d(0), d(1), d(2)],
        }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        let d = |i: usize| (self.du[i] - q * o.du[i]) / o.re;
        Dual {
            re: q,
            du: [d(0), d(1), d(2)],
        }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual {
            re: -self.re,
            du: [-self.du[0], -self.du[1], -self.du[2]],
        }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn constant(c: f64) -> Self {
        Self::constant_dual(T::constant(c))
    }
    fn re(&self) -> f64 {
        self.re.re()
    }
    fn scale(self, c: f64) -> Self {
        Dual {
            re: self.re.scale(c),
            du: [
                self.du[0].scale(c),
                self.du[1].scale(c),
                self.du[2].scale(c),
            ],
        }
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn tan(self) -> Self {
        let t = self.re.tan();
        self.chain(t, T::constant(1.0) + t * t)
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), T::constant(1.0) / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::constant(0.5) / s)
    }
    fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.chain(t, T::constant(1.0) - t * t)
    }
    fn abs(self) -> Self {
        let sign = if self.re.re() < 0.0 { -1.0 } else { 1.0 };
        self.chain(self.re.abs(), T::constant(sign))
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::constant(1.0),
            1 => self,
            _ => self.chain(self.re.powi(n), self.re.powi(n - 1).scale(n as f64)),
        }
    }
    fn powf(self, c: f64) -> Self {
        if c == 0.0 {
            return Self::constant(1.0);
        }
        self.chain(self.re.powf(c), self.re.powf(c - 1.0).scale(c))
    }
}

/// Second-order dual: value, gradient and Hessian, all exact.
pub type Dual2 = Dual<Dual<f64>>;

/// Seeds the point `p` as second-order independent variables.
pub fn seed2(p: &Vector3<f64>) -> [Dual2; 3] {
    std::array::from_fn(|axis| Dual::variable(Dual::variable(p[axis], axis), axis))
}

/// Seeds `p` as first-order independent variables.
pub fn seed1(p: &Vector3<f64>) -> [Dual<f64>; 3] {
    std::array::from_fn(|axis| Dual::variable(p[axis], axis))
}

/// Value, gradient and Hessian of a scalar field at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: Vector3<f64>,
    pub hessian: Matrix3<f64>,
}

impl From<Dual2> for Jet2 {
    fn from(d: Dual2) -> Self {
        let raw = Matrix3::from_fn(|i, j| d.du[i].du[j]);
        Jet2 {
            value: d.re.re,
            gradient: Vector3::new(d.re.du[0], d.re.du[1], d.re.du[2]),
            hessian: (raw + raw.transpose()) * 0.5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_first_order() {
        let [x, y, _] = seed1(&Vector3::new(2.0, 3.0, 0.0));
        let f = x * y;
        assert_eq!(f.re, 6.0);
        assert_eq!(f.du, [3.0, 2.0, 0.0]);
    }

    #[test]
    fn nested_sin_second_derivative() {
        let p = Vector3::new(0.3, 0.0, 0.0);
        let [x, _, _] = seed2(&p);
        let jet = Jet2::from(x.sin());
        assert!((jet.value - 0.3f64.sin()).abs() < 1e-16);
        assert!((jet.gradient[0] - 0.3f64.cos()).abs() < 1e-16);
        assert!((jet.hessian[(0, 0)] + 0.3f64.sin()).abs() < 1e-16);
    }

    #[test]
    fn powi_zero_and_one_are_exact() {
        let [x, _, _] = seed2(&Vector3::new(0.0, 1.0, 1.0));
        let one = Jet2::from(x.powi(0));
        assert_eq!(one.value, 1.0);
        assert_eq!(one.gradient, Vector3::zeros());
        let id = Jet2::from(x.powi(1));
        assert_eq!(id.gradient, Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(id.hessian, Matrix3::zeros());
    }

    #[test]
    fn third_order_nesting() {
        // d^3/dx^3 x^4 = 24 x
        let x: Dual<Dual<Dual<f64>>> = Dual::variable(Dual::variable(Dual::variable(1.5, 0), 0), 0);
        let f = x.powi(4);
        assert!((f.du[0].du[0].du[0] - 36.0).abs() < 1e-12);
    }
}
