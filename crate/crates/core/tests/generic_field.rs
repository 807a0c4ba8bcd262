//! Track-level checks on the Euler top, whose Poisson vectors are known in
//! closed form: `J1 = grad H1 = (x, -y, 0)` and `J2 = -grad H2 = (0, -y, z)`.
//! Unlike the catalog's circular and helical fields, every helicity density
//! is non-zero here, so these exercise the full Riccati right-hand side.

use bihamiltonian::expr::{parse_vector, VectorFieldSpec};
use bihamiltonian::frenet::{helicities_at, local_geometry, FrenetThresholds};
use bihamiltonian::poisson::{
    construct_bihamiltonian, integrate_alpha, pair_compatibility_residual,
    pair_compatibility_residual_general, CaseTag, CompatibilityForm, ConstructOptions,
};
use bihamiltonian::riccati::{
    integrate_linear_pair, integrate_riccati, integrate_riccati_family, IntegratorOptions,
    ProjectiveMu, RiccatiTerms,
};
use nalgebra::Vector3;

const S_MAX: f64 = 1.5;

fn euler() -> VectorFieldSpec {
    parse_vector("y*z, x*z, x*y").unwrap()
}

fn seed() -> Vector3<f64> {
    Vector3::new(1.0, 2.0, 3.0)
}

fn j1(x: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(x[0], -x[1], 0.0)
}

fn j2(x: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(0.0, -x[1], x[2])
}

/// `(alpha, mu)` of `J` in the frame at `x`.
fn exact(j: fn(&Vector3<f64>) -> Vector3<f64>, x: &Vector3<f64>) -> (f64, f64) {
    let f = local_geometry(&euler(), x, &FrenetThresholds::default())
        .unwrap()
        .frame;
    let j = j(x);
    (j.dot(&f.n), j.dot(&f.b) / j.dot(&f.n))
}

#[test]
fn helicities_are_generic() {
    let h = helicities_at(&euler(), &seed()).unwrap();
    assert!(h.omega_n.abs() > 0.1 && h.omega_b.abs() > 0.1 && h.omega_nb.abs() > 0.1);
    assert!(h.omega_t.abs() < 1e-12);
}

#[test]
fn riccati_and_alpha_reproduce_grad_h1() {
    let opts = IntegratorOptions::default();
    let (alpha0, mu0) = exact(j1, &seed());
    let track =
        integrate_riccati(&euler(), seed(), ProjectiveMu::from_mu(mu0), S_MAX, &opts).unwrap();
    assert!(
        track.riccati_residual_ok(),
        "{}",
        track.max_riccati_residual()
    );
    // the field's orientation fixes the sign of alpha; integrate with |alpha0|
    let sign = alpha0.signum();
    let poisson = integrate_alpha(&euler(), &track, alpha0.abs(), &opts).unwrap();
    let mut worst: f64 = 0.0;
    for (p, j) in track.streamline.samples.iter().zip(&poisson.j) {
        worst = worst.max((j * sign - j1(&p.x)).norm());
    }
    assert!(worst < 1e-7, "max |J - grad H1| = {worst:e}");
    assert!(poisson.max_orthogonality_defect() < 1e-12);
}

#[test]
fn second_structure_through_eta_chart() {
    let opts = IntegratorOptions::default();
    let (alpha0, mu0) = exact(j2, &seed());
    let start = ProjectiveMu::from_eta(-1.0 / mu0);
    let track = integrate_riccati(&euler(), seed(), start, S_MAX, &opts).unwrap();
    let poisson = integrate_alpha(&euler(), &track, alpha0.abs(), &opts).unwrap();
    let sign = alpha0.signum();
    let worst = track
        .streamline
        .samples
        .iter()
        .zip(&poisson.j)
        .map(|(p, j)| (j * sign - j2(&p.x)).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-7, "max |J + grad H2| = {worst:e}");
}

#[test]
fn known_pair_is_compatible_and_closed_forms_agree() {
    let opts = IntegratorOptions::default();
    let (a1, m1) = exact(j1, &seed());
    let (a2, m2) = exact(j2, &seed());
    let tracks = integrate_riccati_family(
        &euler(),
        seed(),
        &[ProjectiveMu::from_mu(m1), ProjectiveMu::from_mu(m2)],
        S_MAX,
        RiccatiTerms::Full,
        &opts,
    )
    .unwrap();
    let t1 = integrate_alpha(&euler(), &tracks[0], a1.abs(), &opts).unwrap();
    let t2 = integrate_alpha(&euler(), &tracks[1], a2.abs(), &opts).unwrap();
    for c in pair_compatibility_residual(&t1, &t2).unwrap() {
        assert!(c.residual.abs() < 1e-6, "{c:?}");
    }

    // both tracks in the mu chart: the log-ratio form must equal the general one
    let tracks = integrate_riccati_family(
        &euler(),
        seed(),
        &[ProjectiveMu::from_mu(m1), ProjectiveMu::from_mu(-0.5)],
        S_MAX,
        RiccatiTerms::Full,
        &opts,
    )
    .unwrap();
    let t1 = integrate_alpha(&euler(), &tracks[0], 1.0, &opts).unwrap();
    let t2 = integrate_alpha(&euler(), &tracks[1], 2.0, &opts).unwrap();
    let closed = pair_compatibility_residual(&t1, &t2).unwrap();
    let general = pair_compatibility_residual_general(&t1, &t2).unwrap();
    assert!(closed.iter().any(|c| c.form == CompatibilityForm::LogRatio));
    for (c, g) in closed.iter().zip(&general) {
        assert!(c.residual.abs() < 1e-6, "{c:?}");
        assert!((c.residual - g.residual).abs() < 1e-6, "{c:?} vs {g:?}");
    }
}

#[test]
fn linear_pair_matches_riccati() {
    let opts = IntegratorOptions::default();
    let ob = helicities_at(&euler(), &seed()).unwrap().omega_b;
    let mu0 = 0.3;
    let direct =
        integrate_riccati(&euler(), seed(), ProjectiveMu::from_mu(mu0), S_MAX, &opts).unwrap();
    let linear = integrate_linear_pair(&euler(), seed(), 1.0, -mu0 * ob, S_MAX, &opts).unwrap();
    let mut compared = 0;
    for (m, r) in direct.mu_states.iter().zip(&linear.mu_reconstructed) {
        if let (Some(m), Some(r)) = (m.mu(), r) {
            assert!((m - r).abs() < 1e-6, "{m} vs {r}");
            compared += 1;
        }
    }
    assert!(compared > 100);
}

#[test]
fn construction_is_compatible_without_imposing_it() {
    let result =
        construct_bihamiltonian(&euler(), seed(), S_MAX, &ConstructOptions::default()).unwrap();
    assert_eq!(result.case_tag, CaseTag::GenericTwoRiccati);
    assert!(
        result.compat_residual_max < 1e-5,
        "{}",
        result.compat_residual_max
    );
    assert!(result.riccati_residual_max.iter().all(|r| *r < 1e-6));
}
