//! Build two compatible Poisson structures along a streamline.

use bihamiltonian::poisson::{construct_bihamiltonian, ConstructOptions};
use bihamiltonian::systems::get_system;

fn main() -> bihamiltonian::Result<()> {
    for (name, s_max) in [("euler-top", 1.5), ("circular", 2.0 * std::f64::consts::PI)] {
        let e = get_system(name)?;
        let r = construct_bihamiltonian(
            &e.field,
            e.recommended_seed,
            s_max,
            &ConstructOptions::default(),
        )?;
        println!("{name}: case {}", r.case_tag.name());
        println!("  structures {:?} and {:?}", r.track1.kind, r.track2.kind);
        println!(
            "  max |Omega_n| {:.2e}, max |Omega_b| {:.2e}",
            r.max_abs_omega_n, r.max_abs_omega_b
        );
        println!("  compatibility residual {:.1e}", r.compat_residual_max);
        println!(
            "  Riccati residuals {:.1e} {:.1e}",
            r.riccati_residual_max[0], r.riccati_residual_max[1]
        );
        for w in &r.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
