//! Frame and helicity densities of a field at a point.

use bihamiltonian::frenet::{frame_at, helicities_at, helicities_at_fd, FrenetThresholds};
use bihamiltonian::systems::get_system;
use nalgebra::Vector3;

fn main() -> bihamiltonian::Result<()> {
    let top = get_system("euler-top")?;
    let p = Vector3::new(1.0, 2.0, 3.0);

    let f = frame_at(&top.field, &p)?;
    println!("t = {:?}", f.t.as_slice());
    println!("n = {:?}", f.n.as_slice());
    println!("b = {:?}", f.b.as_slice());
    println!("orthonormality defect {:.1e}", f.orthonormality_defect());

    let exact = helicities_at(&top.field, &p)?;
    let fd = helicities_at_fd(&top.field, &p, &FrenetThresholds::default(), None)?;
    println!("exact {exact:?}");
    println!("fd    {fd:?}");

    // straight streamlines have no normal
    let constant = get_system("constant")?;
    if let Err(e) = frame_at(&constant.field, &p) {
        println!("constant field: {e}");
    }
    Ok(())
}
