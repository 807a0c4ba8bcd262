//! Check the known Hamiltonians and Poisson vectors of every catalog system.

use bihamiltonian::sampling::SampleBox;
use bihamiltonian::systems::Catalog;

fn main() -> bihamiltonian::Result<()> {
    let cube = SampleBox::cube(2.0);
    let points: Vec<_> = cube.halton_points(200).collect();
    for entry in Catalog::builtin().entries() {
        if entry.known_hamiltonians.is_none() && entry.known_poisson.is_none() {
            println!("{:10} no known structures", entry.name);
            continue;
        }
        let mut worst: f64 = 0.0;
        for p in &points {
            worst = worst.max(entry.known_residuals(p)?.max());
        }
        println!(
            "{:10} max residual over {} points {worst:.1e}",
            entry.name,
            points.len()
        );
    }
    Ok(())
}
