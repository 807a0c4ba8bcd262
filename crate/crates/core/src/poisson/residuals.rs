//! Pointwise residuals of the Poisson-vector identities.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::calc3::{self, ScalarHandle, VectorHandle};
use crate::error::{Error, Result};
use crate::expr::{Expr, VectorFieldSpec};
use crate::frenet::{self, FrenetThresholds};

/// `|grad H1 x grad H2|` below this is [`Error::DegenerateGradients`].
pub const GRADIENT_FLOOR: f64 = 1e-12;

/// How [`jacobi_residual_with`] evaluates `J . curl J`.
#[derive(Clone, Debug)]
pub enum JacobiMode {
    /// Differentiate `J` itself.
    Direct,
    /// `J = alpha n + beta b` expanded through the frame of `field`.
    FrameExpansion {
        field: VectorFieldSpec,
        alpha: Expr,
        beta: Expr,
    },
}

/// `J . curl J`; zero exactly when `J` defines a Poisson structure.
pub fn jacobi_residual(j: &VectorHandle, p: &Vector3<f64>) -> Result<f64> {
    Ok(j.eval(p)?.dot(&calc3::curl(j, p)?))
}

/// `(beta grad alpha - alpha grad beta) . t + alpha^2 Omega_n + beta^2 Omega_b + alpha beta Omega_nb`.
pub fn frame_expansion_residual(
    v: &VectorFieldSpec,
    alpha: &Expr,
    beta: &Expr,
    p: &Vector3<f64>,
) -> Result<f64> {
    let g = frenet::local_geometry(v, p, &FrenetThresholds::default())?;
    let (a, b) = (alpha.eval_jet2(p)?, beta.eval_jet2(p)?);
    let h = &g.helicities;
    Ok(
        (b.value * a.gradient - a.value * b.gradient).dot(&g.frame.t)
            + a.value * a.value * h.omega_n
            + b.value * b.value * h.omega_b
            + a.value * b.value * h.omega_nb,
    )
}

/// Dispatches on `mode`; `j` is ignored in frame-expansion mode.
pub fn jacobi_residual_with(j: &VectorHandle, p: &Vector3<f64>, mode: &JacobiMode) -> Result<f64> {
    match mode {
        JacobiMode::Direct => jacobi_residual(j, p),
        JacobiMode::FrameExpansion { field, alpha, beta } => {
            frame_expansion_residual(field, alpha, beta, p)
        }
    }
}

/// `alpha n + beta b` over the frame of `v`, as a derived handle.
pub fn frame_poisson_vector(
    v: &VectorFieldSpec,
    alpha: &Expr,
    beta: &Expr,
    step: Option<f64>,
) -> Result<VectorHandle> {
    let (v, alpha, beta) = (v.clone(), alpha.clone(), beta.clone());
    VectorHandle::derived(
        move |p| {
            let f = frenet::frame_at(&v, p)?;
            Ok(f.n * alpha.eval_f64(p)? + f.b * beta.eval_f64(p)?)
        },
        step,
    )
}

/// `(jacobi(f J), f^2 jacobi(J))`; the two agree for every `f`.
pub fn invariance_ratio(j: &VectorHandle, f: &Expr, p: &Vector3<f64>) -> Result<(f64, f64)> {
    let fp = f.eval_f64(p)?;
    if fp == 0.0 {
        return Err(Error::InvalidInput(
            "scaling function vanishes at the point".into(),
        ));
    }
    let lhs = jacobi_residual(&j.scaled_by(f)?, p)?;
    let rhs = fp * fp * jacobi_residual(j, p)?;
    Ok((lhs, rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonResidual {
    /// `v - J x grad H`
    pub vec_residual: Vector3<f64>,
    pub j_dot_v: f64,
    pub grad_h_dot_v: f64,
}

pub fn hamilton_residual(
    j: &VectorHandle,
    h: &Expr,
    v: &VectorFieldSpec,
    p: &Vector3<f64>,
) -> Result<HamiltonResidual> {
    let jp = j.eval(p)?;
    let grad = h.eval_jet2(p)?.gradient;
    let vp = v.eval_f64(p)?;
    Ok(HamiltonResidual {
        vec_residual: vp - jp.cross(&grad),
        j_dot_v: jp.dot(&vp),
        grad_h_dot_v: grad.dot(&vp),
    })
}

/// `J1 . curl J2 + J2 . curl J1`, or with `c` the residual of `J1 + c J2`
/// being Poisson given both are: `(J1 x J2) . grad c - (J1 . curl J2 + J2 . curl J1) c`.
pub fn compatibility_residual(
    j1: &VectorHandle,
    j2: &VectorHandle,
    p: &Vector3<f64>,
    c: Option<&Expr>,
) -> Result<f64> {
    let (a, b) = (j1.eval(p)?, j2.eval(p)?);
    let cross_sum = a.dot(&calc3::curl(j2, p)?) + b.dot(&calc3::curl(j1, p)?);
    match c {
        None => Ok(cross_sum),
        Some(c) => {
            let jet = c.eval_jet2(p)?;
            Ok(a.cross(&b).dot(&jet.gradient) - cross_sum * jet.value)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NambuResidual {
    pub psi: f64,
    pub residual: f64,
}

/// Fits `v = psi grad H1 x grad H2` at `p`.
pub fn nambu_residual(
    v: &VectorFieldSpec,
    h1: &Expr,
    h2: &Expr,
    p: &Vector3<f64>,
) -> Result<NambuResidual> {
    let g1 = calc3::gradient(&ScalarHandle::Analytic(h1.clone()), p)?;
    let g2 = calc3::gradient(&ScalarHandle::Analytic(h2.clone()), p)?;
    let w = g1.cross(&g2);
    let norm = w.norm();
    if !(norm > GRADIENT_FLOOR) {
        return Err(Error::DegenerateGradients { norm });
    }
    let vp = v.eval_f64(p)?;
    let psi = vp.dot(&w) / (norm * norm);
    Ok(NambuResidual {
        psi,
        residual: (vp - w * psi).norm(),
    })
}
