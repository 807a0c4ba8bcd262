//! Jacobi identity, conformal invariance and frame-built Poisson vectors.

use bihamiltonian::calc3::VectorHandle;
use bihamiltonian::expr::{parse_scalar, parse_vector};
use bihamiltonian::poisson::{
    frame_poisson_vector, invariance_ratio, jacobi_residual, jacobi_residual_with, JacobiMode,
    PoissonMatrix,
};
use bihamiltonian::systems::get_system;
use nalgebra::Vector3;

fn main() -> bihamiltonian::Result<()> {
    let p = Vector3::new(0.7, -0.4, 1.1);

    let j = Vector3::new(1.0, 2.0, 3.0);
    let m = PoissonMatrix::from_vector(&j);
    println!("Poisson matrix rank {}", m.rank(1e-12));

    // J . curl J = 0 exactly for this field, not for the twisted one
    let good: VectorHandle = parse_vector("x, -y, 0")?.into();
    let twisted: VectorHandle = parse_vector("-y, x, 1")?.into();
    println!("jacobi(x, -y, 0) = {:.1e}", jacobi_residual(&good, &p)?);
    println!("jacobi(-y, x, 1) = {:.3}", jacobi_residual(&twisted, &p)?);

    let f = parse_scalar("1 + x^2 + sin(y*z)")?;
    let (lhs, rhs) = invariance_ratio(&twisted, &f, &p)?;
    println!("jacobi(fJ) = {lhs:.12}, f^2 jacobi(J) = {rhs:.12}");

    let helical = get_system("helical")?;
    let alpha = parse_scalar("1 + x*y")?;
    let beta = parse_scalar("z - 0.5")?;
    let jf = frame_poisson_vector(&helical.field, &alpha, &beta, None)?;
    let direct = jacobi_residual_with(&jf, &p, &JacobiMode::Direct)?;
    let expanded = jacobi_residual_with(
        &jf,
        &p,
        &JacobiMode::FrameExpansion {
            field: helical.field.clone(),
            alpha,
            beta,
        },
    )?;
    println!("alpha n + beta b: direct {direct:.8}, frame expansion {expanded:.8}");
    Ok(())
}
