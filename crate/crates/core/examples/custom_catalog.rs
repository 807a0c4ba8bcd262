//! Load a user catalog from TOML and verify its entry.

use bihamiltonian::systems::Catalog;
use nalgebra::Vector3;

const SYSTEMS: &str = r#"
[[system]]
name = "shear"
field = "0, x, -x"
hamiltonians = ["x", "y + z"]
poisson = ["-x, 0, 0", "0, x, x"]
seed = [1.0, 0.0, 0.0]
notes = "Planar shear. v = J1 x grad H2 = J2 x grad H1."
"#;

fn main() -> bihamiltonian::Result<()> {
    let catalog = Catalog::from_toml_str(SYSTEMS)?;
    let e = catalog.get("shear")?;
    let r = e.known_residuals(&Vector3::new(0.3, 0.2, -0.1))?;
    println!("{} residuals: {r:?}", e.name);
    println!("round trip:\n{}", catalog.to_toml_string());
    Ok(())
}
