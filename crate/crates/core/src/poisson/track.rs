//! Poisson vectors along a streamline.
//!
//! A Riccati track fixes the direction of `J` in the normal plane; Hamilton's
//! equations then fix its length through
//!
//! ```text
//! d/ds ln alpha = d/ds ln |v| - n . curl b - mu Omega_b
//! ```
//!
//! In the `eta` chart the coefficient along `b`, `beta = alpha mu`, is
//! integrated instead:
//! `d/ds ln |beta| = d/ds ln |v| - n . curl b + Omega_nb - eta Omega_n`.

use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::VectorFieldSpec;
use crate::frenet::{self, HelicityDensities};
use crate::ode::{self, StepFailure, Tolerances};
use crate::riccati::{
    chart_rhs, stencil, Chart, IntegratorOptions, ProjectiveMu, RiccatiTerms, RiccatiTrack,
    Streamline,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructureKind {
    /// `J` built from a Riccati solution.
    Riccati,
    /// `J = n`.
    Normal,
    /// `J = b`.
    Binormal,
}

/// `J = alpha n + beta b` at every sample of a track.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonTrack {
    pub base: RiccatiTrack,
    pub kind: StructureKind,
    /// Coefficient along `n`.
    pub alpha: Vec<f64>,
    /// Coefficient along `b`.
    pub beta: Vec<f64>,
    pub j: Vec<Vector3<f64>>,
}

impl PoissonTrack {
    pub fn streamline(&self) -> &Arc<Streamline> {
        &self.base.streamline
    }

    fn from_coefficients(
        base: RiccatiTrack,
        kind: StructureKind,
        alpha: Vec<f64>,
        beta: Vec<f64>,
    ) -> Self {
        let j = base
            .streamline
            .samples
            .iter()
            .zip(alpha.iter().zip(&beta))
            .map(|(p, (a, b))| p.frame.n * *a + p.frame.b * *b)
            .collect();
        PoissonTrack {
            base,
            kind,
            alpha,
            beta,
            j,
        }
    }

    /// The constant structure `J = n`.
    pub fn normal(streamline: Arc<Streamline>) -> Self {
        let n = streamline.len();
        let base = RiccatiTrack::constant(streamline, ProjectiveMu::from_mu(0.0));
        PoissonTrack::from_coefficients(base, StructureKind::Normal, vec![1.0; n], vec![0.0; n])
    }

    /// The constant structure `J = b`.
    pub fn binormal(streamline: Arc<Streamline>) -> Self {
        let n = streamline.len();
        let base = RiccatiTrack::constant(streamline, ProjectiveMu::from_eta(0.0));
        PoissonTrack::from_coefficients(base, StructureKind::Binormal, vec![0.0; n], vec![1.0; n])
    }

    /// Largest `|J . v| / (|J| |v|)`.
    pub fn max_orthogonality_defect(&self) -> f64 {
        self.j
            .iter()
            .zip(&self.streamline().samples)
            .map(|(j, p)| {
                let norm = j.norm();
                if norm == 0.0 {
                    0.0
                } else {
                    j.dot(&p.frame.t).abs() / norm
                }
            })
            .fold(0.0, f64::max)
    }
}

/// `d/ds` of the log amplitude in `chart`: `ln alpha` for the `mu` chart,
/// `ln |beta|` for the `eta` chart.
fn log_amplitude_rhs(
    chart: Chart,
    terms: RiccatiTerms,
    h: &HelicityDensities,
    speed_log_deriv: f64,
    w: f64,
) -> f64 {
    let base = speed_log_deriv - h.n_curl_b;
    let (omega_n, omega_b) = match terms {
        RiccatiTerms::Full => (h.omega_n, h.omega_b),
        RiccatiTerms::WithoutOmegaB => (h.omega_n, 0.0),
        RiccatiTerms::WithoutOmegaN => (0.0, h.omega_b),
    };
    match chart {
        Chart::MuChart => base - w * omega_b,
        Chart::EtaChart => base + h.omega_nb - w * omega_n,
    }
}

/// Fixes the length of the Poisson vector along `track` with `alpha(0) = alpha0`.
///
/// Each sample interval is re-integrated from the stored state together with
/// the log amplitude. When the track starts at `mu = infinity`, `alpha0` is
/// taken as the coefficient along `b`. `alpha` may change sign where `J`
/// passes through the `b` direction.
pub fn integrate_alpha(
    v: &VectorFieldSpec,
    track: &RiccatiTrack,
    alpha0: f64,
    opts: &IntegratorOptions,
) -> Result<PoissonTrack> {
    if !(alpha0 > 0.0 && alpha0.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "alpha0 must be positive, got {alpha0}"
        )));
    }
    let samples = &track.streamline.samples;
    let th = opts.thresholds;
    let terms = track.terms;
    let s_total = samples.last().map_or(0.0, |p| p.s.abs());
    let tol = Tolerances {
        rtol: opts.rtol,
        atol: opts.atol,
        min_step: opts.min_step,
        max_step: opts
            .max_step
            .unwrap_or(0.05 * s_total)
            .max(f64::MIN_POSITIVE),
    };

    let first = track.mu_states[0];
    let (mut sign, mut log_amp) = match (first.chart, first.mu()) {
        (Chart::MuChart, _) | (Chart::EtaChart, None) => (1.0, alpha0.ln()),
        (Chart::EtaChart, Some(mu)) => (mu.signum(), (alpha0 * mu.abs()).ln()),
    };
    let mut amplitude = Vec::with_capacity(samples.len());
    amplitude.push(sign * log_amp.exp());

    let mut h = samples.get(1).map_or(1.0, |p| (p.s - samples[0].s).abs());
    for i in 0..samples.len().saturating_sub(1) {
        let (a, b) = (&samples[i], &samples[i + 1]);
        let dir = (b.s - a.s).signum();
        let chart = track.mu_states[i].chart;
        let mut y = [a.x[0], a.x[1], a.x[2], track.mu_states[i].coordinate(), 0.0];
        let rhs = |_: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            let x = Vector3::new(y[0], y[1], y[2]);
            let g = frenet::local_geometry(v, &x, &th)?;
            let t = g.frame.t * dir;
            dy[..3].copy_from_slice(t.as_slice());
            dy[3] = dir * chart_rhs(chart, terms, &g.helicities, y[3]);
            dy[4] = dir * log_amplitude_rhs(chart, terms, &g.helicities, g.speed_log_deriv, y[3]);
            Ok(())
        };
        ode::advance(rhs, a.s.abs(), &mut y, b.s.abs(), &mut h, &tol).map_err(|f| match f {
            StepFailure::Rhs {
                at,
                error: Error::Degenerate(report),
            } => Error::DegenerateFrameEncountered {
                s: dir * at,
                report,
                partial: Box::new(Streamline {
                    seed: track.streamline.seed,
                    samples: samples[..=i].to_vec(),
                }),
            },
            StepFailure::Rhs { error, .. } => error,
            StepFailure::Underflow { at, h } => Error::StepSizeUnderflow { s: dir * at, h },
        })?;
        log_amp += y[4];
        let next = track.mu_states[i + 1].chart;
        if next != chart {
            // alpha = -beta eta and beta = alpha mu relate the two amplitudes
            let w = y[3];
            log_amp += w.abs().ln();
            sign *= match chart {
                Chart::MuChart => w.signum(),
                Chart::EtaChart => -w.signum(),
            };
        }
        amplitude.push(sign * log_amp.exp());
    }

    let (alpha, beta): (Vec<f64>, Vec<f64>) = track
        .mu_states
        .iter()
        .zip(&amplitude)
        .map(|(m, amp)| match m.chart {
            Chart::MuChart => (*amp, amp * m.coordinate()),
            Chart::EtaChart => (-amp * m.coordinate(), *amp),
        })
        .unzip();
    Ok(PoissonTrack::from_coefficients(
        track.clone(),
        StructureKind::Riccati,
        alpha,
        beta,
    ))
}

/// Which closed form produced a compatibility residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompatibilityForm {
    /// `d/ds ln(alpha2/alpha1) - (mu1 - mu2) Omega_b`, both tracks in the `mu` chart.
    LogRatio,
    /// `d/ds ln alpha + Omega_nb` against `J2 = b`.
    ConstantBinormal,
    /// `d/ds ln |beta| - Omega_nb` against `J2 = n`.
    ConstantNormal,
    /// `Omega_nb` for the pair `(n, b)`.
    FramePair,
    /// `J1 . curl J2 + J2 . curl J1` divided by the pair's normalizer.
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatibilitySample {
    pub index: usize,
    pub s: f64,
    pub residual: f64,
    pub form: CompatibilityForm,
}

/// `J1 . curl J2 + J2 . curl J1` along the streamline in terms of the frame
/// coefficients `a = J . n`, `c = J . b` and their arclength derivatives.
fn cross_curl_sum(
    a: [f64; 2],
    c: [f64; 2],
    da: [f64; 2],
    dc: [f64; 2],
    h: &HelicityDensities,
) -> f64 {
    (c[1] * da[0] + c[0] * da[1] - a[0] * dc[1] - a[1] * dc[0])
        + 2.0 * a[0] * a[1] * h.omega_n
        + 2.0 * c[0] * c[1] * h.omega_b
        + (a[0] * c[1] + a[1] * c[0]) * h.omega_nb
}

fn check_pair(t1: &PoissonTrack, t2: &PoissonTrack) -> Result<()> {
    if Arc::ptr_eq(t1.streamline(), t2.streamline())
        || t1.streamline().same_samples(t2.streamline())
    {
        Ok(())
    } else {
        Err(Error::MismatchedTracks)
    }
}

/// Puts a constant structure second.
fn ordered<'a>(t1: &'a PoissonTrack, t2: &'a PoissonTrack) -> (&'a PoissonTrack, &'a PoissonTrack) {
    use StructureKind::*;
    match (t1.kind, t2.kind) {
        (Normal | Binormal, Riccati) | (Binormal, Normal) => (t2, t1),
        _ => (t1, t2),
    }
}

/// Normalizer turning the cross-curl sum into the pair's closed-form residual.
fn normalizer(t1: &PoissonTrack, t2: &PoissonTrack, i: usize) -> f64 {
    use StructureKind::*;
    let (a1, c1, a2, c2) = (t1.alpha[i], t1.beta[i], t2.alpha[i], t2.beta[i]);
    match (t1.kind, t2.kind) {
        (_, Binormal) if t1.kind != Binormal => a1,
        (_, Normal) if t1.kind != Normal => -c1,
        _ => a2 * c1 - a1 * c2,
    }
}

/// Compatibility residual at interior samples, always through the general
/// cross-curl form.
pub fn pair_compatibility_residual_general(
    t1: &PoissonTrack,
    t2: &PoissonTrack,
) -> Result<Vec<CompatibilitySample>> {
    check_pair(t1, t2)?;
    let (t1, t2) = ordered(t1, t2);
    Ok(interior(t1)
        .map(|(i, ds)| general_at(t1, t2, i, ds))
        .collect())
}

fn interior(t: &PoissonTrack) -> impl Iterator<Item = (usize, f64)> + '_ {
    let samples = &t.streamline().samples;
    let n = samples.len();
    let ds = if n > 1 {
        samples[1].s - samples[0].s
    } else {
        0.0
    };
    (2..n.saturating_sub(2)).map(move |i| (i, ds))
}

fn general_at(t1: &PoissonTrack, t2: &PoissonTrack, i: usize, ds: f64) -> CompatibilitySample {
    let p = &t1.streamline().samples[i];
    let b = cross_curl_sum(
        [t1.alpha[i], t2.alpha[i]],
        [t1.beta[i], t2.beta[i]],
        [stencil(&t1.alpha, i, ds), stencil(&t2.alpha, i, ds)],
        [stencil(&t1.beta, i, ds), stencil(&t2.beta, i, ds)],
        &p.helicities,
    );
    let d = normalizer(t1, t2, i);
    CompatibilitySample {
        index: i,
        s: p.s,
        // coincident structures: the sum reduces to twice the Jacobi residual
        residual: if d == 0.0 { b } else { b / d },
        form: CompatibilityForm::General,
    }
}

fn stencil_charts(t: &PoissonTrack, i: usize) -> Option<Chart> {
    let c = t.base.mu_states[i].chart;
    t.base.mu_states[i - 2..=i + 2]
        .iter()
        .all(|m| m.chart == c)
        .then_some(c)
}

/// Compatibility residual at interior samples.
///
/// Uses the closed form matching the pair where the stencil allows it and the
/// general cross-curl form elsewhere. Identical tracks give zero.
pub fn pair_compatibility_residual(
    t1: &PoissonTrack,
    t2: &PoissonTrack,
) -> Result<Vec<CompatibilitySample>> {
    use StructureKind::*;
    check_pair(t1, t2)?;
    let (t1, t2) = ordered(t1, t2);
    let log_abs = |x: &[f64]| x.iter().map(|v| v.abs().ln()).collect::<Vec<_>>();
    let (la1, la2) = (log_abs(&t1.alpha), log_abs(&t2.alpha));
    let lb1 = log_abs(&t1.beta);
    Ok(interior(t1)
        .map(|(i, ds)| {
            let p = &t1.streamline().samples[i];
            let h = &p.helicities;
            let closed = |residual, form| CompatibilitySample {
                index: i,
                s: p.s,
                residual,
                form,
            };
            let c1 = stencil_charts(t1, i);
            match (t1.kind, t2.kind) {
                (Normal, Binormal) => closed(h.omega_nb, CompatibilityForm::FramePair),
                (_, Binormal) if c1 == Some(Chart::MuChart) => closed(
                    stencil(&la1, i, ds) + h.omega_nb,
                    CompatibilityForm::ConstantBinormal,
                ),
                (_, Normal) if c1 == Some(Chart::EtaChart) => closed(
                    stencil(&lb1, i, ds) - h.omega_nb,
                    CompatibilityForm::ConstantNormal,
                ),
                (Riccati, Riccati) if c1 == Some(Chart::MuChart) && stencil_charts(t2, i) == c1 => {
                    let (m1, m2) = (
                        t1.base.mu_states[i].coordinate(),
                        t2.base.mu_states[i].coordinate(),
                    );
                    let residual =
                        stencil(&la2, i, ds) - stencil(&la1, i, ds) - (m1 - m2) * h.omega_b;
                    closed(residual, CompatibilityForm::LogRatio)
                }
                _ => general_at(t1, t2, i, ds),
            }
        })
        .collect())
}
