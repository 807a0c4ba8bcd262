//! Trace a streamline by arclength and inspect the frame along it.

use bihamiltonian::riccati::{integrate_streamline, IntegratorOptions};
use bihamiltonian::systems::get_system;

fn main() -> bihamiltonian::Result<()> {
    let helical = get_system("helical")?;
    let line = integrate_streamline(
        &helical.field,
        helical.recommended_seed,
        2.0 * std::f64::consts::PI * 2f64.sqrt(),
        &IntegratorOptions::default(),
    )?;
    let last = line.samples.last().expect("non-empty");
    println!("{} samples", line.len());
    println!(
        "end point {:?} (one turn of the helix, lifted by 2 pi)",
        last.x.as_slice()
    );
    println!("max |Omega_t| {:.6}", line.max_abs(|h| h.omega_t));
    println!("max |Omega_n| {:.1e}", line.max_abs(|h| h.omega_n));
    println!("frame defect {:.1e}", line.max_frame_defect());
    println!("arclength excess {:.1e}", line.max_arclength_excess());
    Ok(())
}
