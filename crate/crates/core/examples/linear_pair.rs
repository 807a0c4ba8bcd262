//! The Riccati solution recovered from the second-order linear equation.

use bihamiltonian::riccati::{
    integrate_linear_pair, integrate_riccati, IntegratorOptions, ProjectiveMu,
};
use bihamiltonian::systems::get_system;

fn main() -> bihamiltonian::Result<()> {
    let top = get_system("euler-top")?;
    let opts = IntegratorOptions::default();
    let riccati = integrate_riccati(
        &top.field,
        top.recommended_seed,
        ProjectiveMu::from_mu(0.0),
        1.5,
        &opts,
    )?;
    // mu0 = 0 means u'(0) = 0
    let linear = integrate_linear_pair(&top.field, top.recommended_seed, 1.0, 0.0, 1.5, &opts)?;

    let mut worst: f64 = 0.0;
    for (m, r) in riccati.mu_states.iter().zip(&linear.mu_reconstructed) {
        if let (Some(m), Some(r)) = (m.mu(), r) {
            worst = worst.max((m - r).abs());
        }
    }
    println!("max |mu_riccati - mu_linear| = {worst:.1e}");
    println!("zeros of u (poles of mu): {:?}", linear.u_zero_crossings);
    Ok(())
}
