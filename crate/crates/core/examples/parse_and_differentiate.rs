//! Parse DSL expressions, evaluate them and take derivatives.

use bihamiltonian::calc3::{curl, gradient, ScalarHandle, VectorHandle};
use bihamiltonian::expr::{parse_scalar, parse_vector};
use nalgebra::Vector3;

fn main() -> bihamiltonian::Result<()> {
    let p = Vector3::new(0.5, -1.0, 2.0);

    let f = parse_scalar("x^2*y + sin(z) - exp(-x*y)")?;
    println!("f       = {f}");
    println!("f(p)    = {:.12}", f.eval_f64(&p)?);

    // second-order jets carry value, gradient and Hessian together
    let jet = f.eval_jet2(&p)?;
    println!("jet     = {jet:?}");

    let g: ScalarHandle = f.into();
    println!("grad f  = {:?}", gradient(&g, &p)?.as_slice());

    let v: VectorHandle = parse_vector("y*z, x*z, x*y")?.into();
    println!(
        "curl v  = {:?} (a gradient field is curl-free)",
        curl(&v, &p)?.as_slice()
    );

    match parse_scalar("x^y") {
        Err(e) => println!("x^y rejected: {e}"),
        Ok(_) => unreachable!("exponents must be constant"),
    }
    Ok(())
}
