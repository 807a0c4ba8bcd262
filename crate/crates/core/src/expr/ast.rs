use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::jet::{seed2, Jet2, Scalar};
use crate::error::DomainError;

/// Coordinate variable of the DSL.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
            Var::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        ["x", "y", "z"][self.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Tanh,
    Abs,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Tanh,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Parsed scalar expression in `x`, `y`, `z`.
///
/// The exponent of [`Expr::Pow`] never mentions a variable; the parser
/// rejects such input and [`Expr::pow`] checks it as well.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// `base ^ exponent`; `None` when the exponent depends on a variable.
    pub fn pow(base: Expr, exponent: Expr) -> Option<Expr> {
        if exponent.is_constant() {
            Some(Expr::Pow(Box::new(base), Box::new(exponent)))
        } else {
            None
        }
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    /// True when no variable occurs in the tree.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.is_constant(),
            Expr::Binary(_, a, b) | Expr::Pow(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Evaluates over any [`Scalar`]; `vars` are `(x, y, z)`.
    pub fn eval<T: Scalar>(&self, vars: &[T; 3]) -> Result<T, DomainError> {
        match self {
            Expr::Const(c) => Ok(T::constant(*c)),
            Expr::Var(v) => Ok(vars[v.index()]),
            Expr::Neg(e) => Ok(-e.eval(vars)?),
            Expr::Binary(op, a, b) => {
                let a = a.eval(vars)?;
                let b = b.eval(vars)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b.re() == 0.0 {
                            Err(self.domain_error("division by zero"))
                        } else {
                            Ok(a / b)
                        }
                    }
                }
            }
            Expr::Pow(base, exponent) => {
                let c = exponent.eval::<f64>(&[0.0; 3])?;
                let b = base.eval(vars)?;
                let integral = c.fract() == 0.0 && c.abs() <= i32::MAX as f64;
                if b.re() == 0.0 && c < 0.0 {
                    return Err(self.domain_error("zero raised to a negative power"));
                }
                if integral {
                    Ok(b.powi(c as i32))
                } else if b.re() < 0.0 {
                    Err(self.domain_error("negative base with non-integer exponent"))
                } else {
                    Ok(b.powf(c))
                }
            }
            Expr::Call(f, arg) => {
                let a = arg.eval(vars)?;
                let r = a.re();
                match f {
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Tan => {
                        if r.cos() == 0.0 {
                            Err(self.domain_error("tan at a pole"))
                        } else {
                            Ok(a.tan())
                        }
                    }
                    Func::Exp => Ok(a.exp()),
                    Func::Ln => {
                        if r <= 0.0 {
                            Err(self.domain_error("ln of a non-positive value"))
                        } else {
                            Ok(a.ln())
                        }
                    }
                    Func::Sqrt => {
                        if r < 0.0 {
                            Err(self.domain_error("sqrt of a negative value"))
                        } else {
                            Ok(a.sqrt())
                        }
                    }
                    Func::Tanh => Ok(a.tanh()),
                    Func::Abs => Ok(a.abs()),
                }
            }
        }
    }

    pub fn eval_f64(&self, p: &Vector3<f64>) -> Result<f64, DomainError> {
        self.eval(&[p[0], p[1], p[2]])
    }

    /// Value, gradient and Hessian at `p` by nested forward-mode differentiation.
    pub fn eval_jet2(&self, p: &Vector3<f64>) -> Result<Jet2, DomainError> {
        self.eval(&seed2(p)).map(Jet2::from)
    }

    fn domain_error(&self, reason: &str) -> DomainError {
        DomainError {
            node: self.to_string(),
            reason: reason.to_string(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints with the minimal parentheses needed to re-parse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.is_sign_negative() => write!(f, "({c})"),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_wrapped(f, e, e.precedence() < 3)
            }
            Expr::Binary(op, a, b) => {
                let p = self.precedence();
                write_wrapped(f, a, a.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                // left associative: an equal-precedence right operand needs parens
                write_wrapped(f, b, b.precedence() <= p)
            }
            Expr::Pow(base, exponent) => {
                write_wrapped(f, base, base.precedence() < 5)?;
                f.write_str("^")?;
                write_wrapped(f, exponent, exponent.precedence() < 3)
            }
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let src = String::deserialize(d)?;
        super::parse_scalar(&src).map_err(serde::de::Error::custom)
    }
}

/// Three Cartesian components of a vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldSpec {
    pub components: [Expr; 3],
}

impl VectorFieldSpec {
    pub fn new(cx: Expr, cy: Expr, cz: Expr) -> Self {
        VectorFieldSpec {
            components: [cx, cy, cz],
        }
    }

    pub fn constant(c: Vector3<f64>) -> Self {
        VectorFieldSpec::new(Expr::Const(c[0]), Expr::Const(c[1]), Expr::Const(c[2]))
    }

    pub fn eval<T: Scalar>(&self, vars: &[T; 3]) -> Result<[T; 3], DomainError> {
        Ok([
            self.components[0].eval(vars)?,
            self.components[1].eval(vars)?,
            self.components[2].eval(vars)?,
        ])
    }

    pub fn eval_f64(&self, p: &Vector3<f64>) -> Result<Vector3<f64>, DomainError> {
        let [a, b, c] = self.eval(&[p[0], p[1], p[2]])?;
        Ok(Vector3::new(a, b, c))
    }

    pub fn eval_jet2(&self, p: &Vector3<f64>) -> Result<[Jet2; 3], DomainError> {
        let seeds = seed2(p);
        let [a, b, c] = self.eval(&seeds)?;
        Ok([a.into(), b.into(), c.into()])
    }

    /// `g * self`, component-wise.
    pub fn scaled_by(&self, g: &Expr) -> VectorFieldSpec {
        let [a, b, c] = self.components.clone();
        let m = |e: Expr| Expr::binary(BinOp::Mul, g.clone(), e);
        VectorFieldSpec::new(m(a), m(b), m(c))
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &VectorFieldSpec, b: f64) -> VectorFieldSpec {
        let term = |k: f64, e: &Expr| Expr::binary(BinOp::Mul, Expr::Const(k), e.clone());
        let comp = |i: usize| {
            Expr::binary(
                BinOp::Add,
                term(a, &self.components[i]),
                term(b, &other.components[i]),
            )
        };
        VectorFieldSpec::new(comp(0), comp(1), comp(2))
    }
}

impl fmt::Display for VectorFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = &self.components;
        write!(f, "{a}, {b}, {c}")
    }
}

impl Serialize for VectorFieldSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VectorFieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let src = String::deserialize(d)?;
        super::parse_vector(&src).map_err(serde::de::Error::custom)
    }
}
