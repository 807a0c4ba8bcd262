//! Field-definition DSL: parsing, printing and exact differentiation.

mod ast;
pub mod jet;
mod parser;

pub use ast::{BinOp, Expr, Func, Var, VectorFieldSpec};
pub use jet::{Dual, Dual2, Jet2, Scalar};

use crate::error::ParseError;

/// How many components [`parse_field`] expects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arity {
    Scalar,
    Vector3,
}

/// Result of [`parse_field`].
#[derive(Clone, Debug, PartialEq)]
pub enum ParsedField {
    Scalar(Expr),
    Vector(VectorFieldSpec),
}

pub fn parse_field(src: &str, arity: Arity) -> Result<ParsedField, ParseError> {
    let mut items = parser::parse_list(src)?;
    let expected = match arity {
        Arity::Scalar => 1,
        Arity::Vector3 => 3,
    };
    if items.len() != expected {
        return Err(ParseError::ComponentCount {
            expected,
            found: items.len(),
        });
    }
    Ok(match arity {
        Arity::Scalar => ParsedField::Scalar(items.remove(0)),
        Arity::Vector3 => {
            let cz = items.pop().unwrap();
            let cy = items.pop().unwrap();
            let cx = items.pop().unwrap();
            ParsedField::Vector(VectorFieldSpec::new(cx, cy, cz))
        }
    })
}

pub fn parse_scalar(src: &str) -> Result<Expr, ParseError> {
    match parse_field(src, Arity::Scalar)? {
        ParsedField::Scalar(e) => Ok(e),
        ParsedField::Vector(_) => unreachable!(),
    }
}

/// Parses `"fx, fy, fz"`.
pub fn parse_vector(src: &str) -> Result<VectorFieldSpec, ParseError> {
    match parse_field(src, Arity::Vector3)? {
        ParsedField::Vector(v) => Ok(v),
        ParsedField::Scalar(_) => unreachable!(),
    }
}
