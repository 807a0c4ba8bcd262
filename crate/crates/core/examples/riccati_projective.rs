//! Integrate the Riccati equation for several initial values and watch the
//! cross-ratio of four solutions stay fixed while charts switch.

use bihamiltonian::riccati::{
    cross_ratio, integrate_riccati_family, IntegratorOptions, ProjectiveMu, RiccatiTerms,
};
use bihamiltonian::systems::get_system;

fn main() -> bihamiltonian::Result<()> {
    let top = get_system("euler-top")?;
    let starts = [0.0, 0.5, -1.0, 3.0].map(ProjectiveMu::from_mu);
    let tracks = integrate_riccati_family(
        &top.field,
        top.recommended_seed,
        &starts,
        1.5,
        RiccatiTerms::Full,
        &IntegratorOptions::default(),
    )?;
    for (i, t) in tracks.iter().enumerate() {
        println!(
            "solution {i}: final {:?}, {} chart switches, residual {:.1e}",
            t.final_state(),
            t.chart_switches.len(),
            t.max_riccati_residual()
        );
    }
    let n = tracks[0].streamline.len();
    for i in [0, n / 2, n - 1] {
        let m = |k: usize| tracks[k].mu_states[i];
        println!(
            "s = {:.3}: cross-ratio {:.12}",
            tracks[0].streamline.samples[i].s,
            cross_ratio(&m(0), &m(1), &m(2), &m(3))
        );
    }
    Ok(())
}
