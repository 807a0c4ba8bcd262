//! Two compatible Poisson vectors along a streamline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::VectorFieldSpec;
use crate::riccati::{
    integrate_riccati_family, integrate_streamline, IntegratorOptions, ProjectiveMu, RiccatiTerms,
};
use nalgebra::Vector3;
use std::sync::Arc;

use super::track::{
    integrate_alpha, pair_compatibility_residual, CompatibilitySample, PoissonTrack,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    /// Two Riccati solutions.
    GenericTwoRiccati,
    /// `Omega_b` vanishes: linear `mu` equation paired with `J2 = b`.
    OmegaBZero,
    /// `Omega_n` vanishes: linear `eta` equation paired with `J2 = n`.
    OmegaNZero,
    /// Both vanish: `J1 = n`, `J2 = b`.
    BothZero,
}

impl CaseTag {
    pub fn name(self) -> &'static str {
        match self {
            CaseTag::GenericTwoRiccati => "GenericTwoRiccati",
            CaseTag::OmegaBZero => "OmegaBZero",
            CaseTag::OmegaNZero => "OmegaNZero",
            CaseTag::BothZero => "BothZero",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructOptions {
    pub integrator: IntegratorOptions,
    /// Initial ratios of the two structures in the generic case; the first
    /// also seeds the single Riccati track of the degenerate cases (as `eta`
    /// when `Omega_n` vanishes).
    pub mu0: [ProjectiveMu; 2],
    pub alpha0: [f64; 2],
    /// `max |Omega|` along the track below this counts as zero.
    pub omega_eps: f64,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        ConstructOptions {
            integrator: IntegratorOptions::default(),
            mu0: [ProjectiveMu::from_mu(0.0), ProjectiveMu::from_mu(1.0)],
            alpha0: [1.0, 1.0],
            omega_eps: 1e-7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiHamiltonianResult {
    pub case_tag: CaseTag,
    pub track1: PoissonTrack,
    pub track2: PoissonTrack,
    pub compatibility: Vec<CompatibilitySample>,
    pub compat_residual_max: f64,
    pub max_abs_omega_n: f64,
    pub max_abs_omega_b: f64,
    pub max_abs_omega_nb: f64,
    /// Largest Riccati residual of each track; zero for constant structures.
    pub riccati_residual_max: [f64; 2],
    /// Case boundaries crossed within the ambiguity band.
    pub warnings: Vec<String>,
}

/// The band `[eps/10, 10 eps]` in which a case decision is reported as ambiguous.
fn ambiguous(value: f64, eps: f64) -> bool {
    value >= eps / 10.0 && value <= eps * 10.0
}

/// Builds two compatible Poisson vectors along the streamline through `seed`.
pub fn construct_bihamiltonian(
    v: &VectorFieldSpec,
    seed: Vector3<f64>,
    s_max: f64,
    opts: &ConstructOptions,
) -> Result<BiHamiltonianResult> {
    if opts.mu0[0].bracket(&opts.mu0[1]).abs() < 1e-12 {
        return Err(Error::InvalidInput(
            "the two initial ratios must differ".into(),
        ));
    }
    let io = &opts.integrator;
    let line = integrate_streamline(v, seed, s_max, io)?;
    let max_n = line.max_abs(|h| h.omega_n);
    let max_b = line.max_abs(|h| h.omega_b);
    let max_nb = line.max_abs(|h| h.omega_nb);
    let eps = opts.omega_eps;

    let mut warnings = Vec::new();
    for (name, value) in [("Omega_n", max_n), ("Omega_b", max_b)] {
        if ambiguous(value, eps) {
            warnings.push(format!(
                "AmbiguousCase: max |{name}| = {value:e} is within a factor 10 of {eps:e}; using the generic case"
            ));
        }
    }
    let case_tag = if !warnings.is_empty() {
        CaseTag::GenericTwoRiccati
    } else {
        match (max_n < eps, max_b < eps) {
            (false, false) => CaseTag::GenericTwoRiccati,
            (false, true) => CaseTag::OmegaBZero,
            (true, false) => CaseTag::OmegaNZero,
            (true, true) => CaseTag::BothZero,
        }
    };

    let riccati_pair = |starts: &[ProjectiveMu], terms| -> Result<Vec<PoissonTrack>> {
        let tracks = integrate_riccati_family(v, seed, starts, s_max, terms, io)?;
        tracks
            .iter()
            .zip(opts.alpha0)
            .map(|(t, a0)| integrate_alpha(v, t, a0, io))
            .collect()
    };
    let (track1, track2) = match case_tag {
        CaseTag::GenericTwoRiccati => {
            let mut t = riccati_pair(&opts.mu0, RiccatiTerms::Full)?;
            let t2 = t.pop().expect("two tracks");
            (t.pop().expect("two tracks"), t2)
        }
        CaseTag::OmegaBZero => {
            let t1 = riccati_pair(&opts.mu0[..1], RiccatiTerms::WithoutOmegaB)?.remove(0);
            let t2 = PoissonTrack::binormal(t1.streamline().clone());
            (t1, t2)
        }
        CaseTag::OmegaNZero => {
            let eta0 = ProjectiveMu::from_eta(opts.mu0[0].mu().unwrap_or(0.0));
            let t1 = riccati_pair(&[eta0], RiccatiTerms::WithoutOmegaN)?.remove(0);
            let t2 = PoissonTrack::normal(t1.streamline().clone());
            (t1, t2)
        }
        CaseTag::BothZero => {
            let line = Arc::new(line);
            (
                PoissonTrack::normal(line.clone()),
                PoissonTrack::binormal(line),
            )
        }
    };

    let compatibility = pair_compatibility_residual(&track1, &track2)?;
    let mut compat_residual_max = compatibility
        .iter()
        .map(|c| c.residual.abs())
        .fold(0.0, f64::max);
    if case_tag == CaseTag::BothZero {
        // every sample, not only stencil interiors
        compat_residual_max = compat_residual_max.max(max_nb);
    }
    let riccati_residual_max = [&track1, &track2].map(|t| t.base.max_riccati_residual());
    Ok(BiHamiltonianResult {
        case_tag,
        track1,
        track2,
        compatibility,
        compat_residual_max,
        max_abs_omega_n: max_n,
        max_abs_omega_b: max_b,
        max_abs_omega_nb: max_nb,
        riccati_residual_max,
        warnings,
    })
}
