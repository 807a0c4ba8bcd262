//! Streamlines in arclength and the Riccati equation for `mu = beta/alpha`.
//!
//! Along a streamline `dx/ds = t`, the ratio `mu` of a Poisson vector
//! `J = alpha (n + mu b)` obeys
//!
//! ```text
//! mu'  = Omega_n + mu Omega_nb + mu^2 Omega_b
//! eta' = Omega_b - eta Omega_nb + eta^2 Omega_n,     eta = -1/mu
//! ```
//!
//! The two forms are the affine charts of one projective line. Each solution
//! is integrated in whichever chart keeps its coordinate bounded by
//! [`IntegratorOptions::chart_switch`], so poles of `mu` are ordinary points.

use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::VectorFieldSpec;
use crate::frenet::{self, Frame, FrenetThresholds, HelicityDensities, LocalGeometry};
use crate::ode::{self, StepFailure, Tolerances};

/// `|Omega_b|` below this is treated as exactly zero in the linear equation.
pub const OMEGA_B_ZERO: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Defaults to `0.05 * s_max`.
    pub max_step: Option<f64>,
    /// Spacing of stored samples; defaults to `min(max_step, 0.01)`.
    pub sample_step: Option<f64>,
    pub min_step: f64,
    /// Active chart coordinate magnitude that triggers a switch. At least 1.
    pub chart_switch: f64,
    /// The linear equation aborts where `|Omega_b|` drops below this; 0 disables the check.
    pub omega_b_floor: f64,
    /// `u` magnitude below which `mu` is not reconstructed.
    pub u_floor: f64,
    /// Follow `-t` instead of `t`; samples then carry `s <= 0`.
    pub backward: bool,
    pub thresholds: FrenetThresholds,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-9,
            atol: 1e-9,
            max_step: None,
            sample_step: None,
            min_step: 1e-12,
            chart_switch: 2.0,
            omega_b_floor: 1e-6,
            u_floor: 1e-8,
            backward: false,
            thresholds: FrenetThresholds::default(),
        }
    }
}

struct Plan {
    tol: Tolerances,
    intervals: usize,
    spacing: f64,
    dir: f64,
}

impl IntegratorOptions {
    fn plan(&self, s_max: f64) -> Result<Plan> {
        if !(s_max > 0.0 && s_max.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "s_max must be positive, got {s_max}"
            )));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if !(self.chart_switch >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "chart switch threshold must be at least 1, got {}",
                self.chart_switch
            )));
        }
        let max_step = self.max_step.unwrap_or(0.05 * s_max);
        let sample_step = self.sample_step.unwrap_or(0.01).min(max_step);
        if !(max_step > 0.0 && sample_step > 0.0) {
            return Err(Error::InvalidInput("step sizes must be positive".into()));
        }
        let intervals = ((s_max / sample_step) - 1e-9).ceil().max(1.0) as usize;
        Ok(Plan {
            tol: Tolerances {
                rtol: self.rtol,
                atol: self.atol,
                min_step: self.min_step,
                max_step,
            },
            intervals,
            spacing: s_max / intervals as f64,
            dir: if self.backward { -1.0 } else { 1.0 },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamlineSample {
    pub s: f64,
    pub x: Vector3<f64>,
    pub frame: Frame,
    pub helicities: HelicityDensities,
    pub speed: f64,
    /// `d/ds ln |v|`
    pub speed_log_deriv: f64,
}

impl StreamlineSample {
    fn new(s: f64, x: Vector3<f64>, g: &LocalGeometry) -> Self {
        StreamlineSample {
            s,
            x,
            frame: g.frame,
            helicities: g.helicities,
            speed: g.speed,
            speed_log_deriv: g.speed_log_deriv,
        }
    }
}

/// Samples on a uniform arclength grid starting at the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Streamline {
    pub seed: Vector3<f64>,
    pub samples: Vec<StreamlineSample>,
}

impl Streamline {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn s_values(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.s).collect()
    }

    /// Largest `|f|` over the samples.
    pub fn max_abs(&self, f: impl Fn(&HelicityDensities) -> f64) -> f64 {
        self.samples
            .iter()
            .map(|p| f(&p.helicities).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `(|x_{i+1} - x_i| - |ds|) / |ds|`; never positive for an arclength chord.
    pub fn max_arclength_excess(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| {
                let ds = (w[1].s - w[0].s).abs();
                ((w[1].x - w[0].x).norm() - ds) / ds
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_frame_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|p| p.frame.orthonormality_defect())
            .fold(0.0, f64::max)
    }

    /// Same samples (same abscissae and positions).
    pub fn same_samples(&self, other: &Streamline) -> bool {
        self.samples.len() == other.samples.len()
            && self
                .samples
                .iter()
                .zip(&other.samples)
                .all(|(a, b)| a.s == b.s && a.x == b.x)
    }
}

/// Co-integrated quantities riding on `x(s)`.
trait Extras {
    /// `d/ds` of the extras at geometry `g`; `s` is the signed arclength.
    fn rhs(
        &self,
        s: f64,
        x: &Vector3<f64>,
        g: &LocalGeometry,
        y: &[f64],
        dy: &mut [f64],
    ) -> Result<()>;
    /// Hook at every stored sample, including the seed.
    fn at_sample(&mut self, s: f64, y: &mut [f64]) -> Result<()>;
}

struct NoExtras;

impl Extras for NoExtras {
    fn rhs(
        &self,
        _: f64,
        _: &Vector3<f64>,
        _: &LocalGeometry,
        _: &[f64],
        _: &mut [f64],
    ) -> Result<()> {
        Ok(())
    }
    fn at_sample(&mut self, _: f64, _: &mut [f64]) -> Result<()> {
        Ok(())
    }
}

fn degenerate(s: f64, e: Error, partial: &[StreamlineSample], seed: Vector3<f64>) -> Error {
    match e {
        Error::Degenerate(report) => Error::DegenerateFrameEncountered {
            s,
            report,
            partial: Box::new(Streamline {
                seed,
                samples: partial.to_vec(),
            }),
        },
        other => other,
    }
}

/// Integrates `[x, extras]` sample interval by sample interval.
fn drive<E: Extras>(
    v: &VectorFieldSpec,
    seed: Vector3<f64>,
    s_max: f64,
    opts: &IntegratorOptions,
    extras: &mut E,
    extras0: &[f64],
) -> Result<(Streamline, Vec<Vec<f64>>)> {
    let plan = opts.plan(s_max)?;
    let th = opts.thresholds;
    let dir = plan.dir;
    let mut samples = Vec::with_capacity(plan.intervals + 1);
    let mut states = Vec::with_capacity(plan.intervals + 1);

    let mut y: Vec<f64> = seed
        .iter()
        .copied()
        .chain(extras0.iter().copied())
        .collect();
    let g0 =
        frenet::local_geometry(v, &seed, &th).map_err(|e| degenerate(0.0, e, &samples, seed))?;
    extras.at_sample(0.0, &mut y[3..])?;
    samples.push(StreamlineSample::new(0.0, seed, &g0));
    states.push(y[3..].to_vec());

    let mut h = plan.spacing;
    for i in 1..=plan.intervals {
        let sigma0 = (i - 1) as f64 * plan.spacing;
        let sigma1 = if i == plan.intervals {
            s_max
        } else {
            i as f64 * plan.spacing
        };
        let ex: &E = extras;
        let rhs = |sigma: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            let x = Vector3::new(y[0], y[1], y[2]);
            let g = frenet::local_geometry(v, &x, &th)?;
            ex.rhs(dir * sigma, &x, &g, &y[3..], &mut dy[3..])?;
            for d in dy[3..].iter_mut() {
                *d *= dir;
            }
            let t = g.frame.t * dir;
            dy[..3].copy_from_slice(t.as_slice());
            Ok(())
        };
        ode::advance(rhs, sigma0, &mut y, sigma1, &mut h, &plan.tol).map_err(|f| match f {
            StepFailure::Rhs { at, error } => degenerate(dir * at, error, &samples, seed),
            StepFailure::Underflow { at, h } => Error::StepSizeUnderflow { s: dir * at, h },
        })?;
        let s = dir * sigma1;
        let x = Vector3::new(y[0], y[1], y[2]);
        let g = frenet::local_geometry(v, &x, &th).map_err(|e| degenerate(s, e, &samples, seed))?;
        extras.at_sample(s, &mut y[3..])?;
        samples.push(StreamlineSample::new(s, x, &g));
        states.push(y[3..].to_vec());
    }
    Ok((Streamline { seed, samples }, states))
}

/// Integrates `dx/ds = t(x)` from `seed`, storing samples every
/// [`IntegratorOptions::sample_step`] up to `|s| = s_max`.
pub fn integrate_streamline(
    v: &VectorFieldSpec,
    seed: Vector3<f64>,
    s_max: f64,
    opts: &IntegratorOptions,
) -> Result<Streamline> {
    Ok(drive(v, seed, s_max, opts, &mut NoExtras, &[])?.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    /// Coordinate `mu = p/q`.
    MuChart,
    /// Coordinate `eta = -q/p = -1/mu`.
    EtaChart,
}

impl Chart {
    pub fn other(self) -> Chart {
        match self {
            Chart::MuChart => Chart::EtaChart,
            Chart::EtaChart => Chart::MuChart,
        }
    }
}

/// A point `[p : q]` of the projective line with `p^2 + q^2 = 1` and an active chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveMu {
    pub p: f64,
    pub q: f64,
    pub chart: Chart,
}

impl ProjectiveMu {
    pub fn from_mu(mu: f64) -> Self {
        let r = mu.hypot(1.0);
        ProjectiveMu {
            p: mu / r,
            q: 1.0 / r,
            chart: Chart::MuChart,
        }
    }

    pub fn from_eta(eta: f64) -> Self {
        let r = eta.hypot(1.0);
        ProjectiveMu {
            p: 1.0 / r,
            q: -eta / r,
            chart: Chart::EtaChart,
        }
    }

    pub fn from_chart(chart: Chart, w: f64) -> Self {
        match chart {
            Chart::MuChart => ProjectiveMu::from_mu(w),
            Chart::EtaChart => ProjectiveMu::from_eta(w),
        }
    }

    /// `[p : q]` in the better-conditioned chart.
    pub fn from_homogeneous(p: f64, q: f64) -> Result<Self> {
        let r = p.hypot(q);
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "[{p} : {q}] is not a projective point"
            )));
        }
        let chart = if q.abs() >= p.abs() {
            Chart::MuChart
        } else {
            Chart::EtaChart
        };
        Ok(ProjectiveMu {
            p: p / r,
            q: q / r,
            chart,
        })
    }

    /// Value of the active chart's coordinate.
    pub fn coordinate(&self) -> f64 {
        match self.chart {
            Chart::MuChart => self.p / self.q,
            Chart::EtaChart => -self.q / self.p,
        }
    }

    pub fn mu(&self) -> Option<f64> {
        (self.q != 0.0).then(|| self.p / self.q)
    }

    pub fn eta(&self) -> Option<f64> {
        (self.p != 0.0).then(|| -self.q / self.p)
    }

    /// `p_a q_b - p_b q_a`; vanishes iff the two points coincide.
    pub fn bracket(&self, other: &ProjectiveMu) -> f64 {
        self.p * other.q - other.p * self.q
    }
}

/// Cross-ratio `[a,c][b,d] / ([a,d][b,c])`, invariant under the Riccati flow.
pub fn cross_ratio(a: &ProjectiveMu, b: &ProjectiveMu, c: &ProjectiveMu, d: &ProjectiveMu) -> f64 {
    a.bracket(c) * b.bracket(d) / (a.bracket(d) * b.bracket(c))
}

/// Which helicity terms enter the Riccati right-hand side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum RiccatiTerms {
    #[default]
    Full,
    /// `mu' = Omega_n + mu Omega_nb`.
    WithoutOmegaB,
    /// `eta' = Omega_b - eta Omega_nb`.
    WithoutOmegaN,
}

impl RiccatiTerms {
    fn weights(self, h: &HelicityDensities) -> (f64, f64) {
        match self {
            RiccatiTerms::Full => (h.omega_n, h.omega_b),
            RiccatiTerms::WithoutOmegaB => (h.omega_n, 0.0),
            RiccatiTerms::WithoutOmegaN => (0.0, h.omega_b),
        }
    }
}

/// `dw/ds` of the chart coordinate `w`.
pub fn chart_rhs(chart: Chart, terms: RiccatiTerms, h: &HelicityDensities, w: f64) -> f64 {
    let (on, ob) = terms.weights(h);
    match chart {
        Chart::MuChart => on + w * h.omega_nb + w * w * ob,
        Chart::EtaChart => ob - w * h.omega_nb + w * w * on,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiccatiTrack {
    pub streamline: Arc<Streamline>,
    pub mu_states: Vec<ProjectiveMu>,
    pub chart_switches: Vec<f64>,
    pub terms: RiccatiTerms,
}

/// Riccati residual at one interior sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiccatiResidual {
    pub index: usize,
    pub s: f64,
    pub chart: Chart,
    pub residual: f64,
    pub rhs: f64,
}

impl RiccatiResidual {
    /// `max(1e-6, 1e-4 |rhs|)`
    pub fn tolerance(&self) -> f64 {
        (1e-4 * self.rhs.abs()).max(1e-6)
    }
}

/// Five-point central difference of `f` at `i` on a uniform grid of spacing `ds`.
pub(crate) fn stencil(f: &[f64], i: usize, ds: f64) -> f64 {
    (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * ds)
}

impl RiccatiTrack {
    /// A track frozen at one projective point; the constant-frame structures use this.
    pub fn constant(streamline: Arc<Streamline>, state: ProjectiveMu) -> Self {
        RiccatiTrack {
            mu_states: vec![state; streamline.len()],
            streamline,
            chart_switches: Vec::new(),
            terms: RiccatiTerms::Full,
        }
    }

    pub fn mu_values(&self) -> Vec<Option<f64>> {
        self.mu_states.iter().map(ProjectiveMu::mu).collect()
    }

    pub fn final_state(&self) -> ProjectiveMu {
        *self
            .mu_states
            .last()
            .expect("tracks have at least one sample")
    }

    /// Stencil derivative of the active coordinate against the chart's
    /// right-hand side, at interior samples whose stencil stays in one chart.
    pub fn riccati_residuals(&self) -> Vec<RiccatiResidual> {
        let samples = &self.streamline.samples;
        let n = samples.len();
        if n < 5 {
            return Vec::new();
        }
        let ds = samples[1].s - samples[0].s;
        let mut out = Vec::new();
        #[allow(clippy::needless_range_loop)]
        for i in 2..n - 2 {
            let chart = self.mu_states[i].chart;
            if self.mu_states[i - 2..=i + 2]
                .iter()
                .any(|m| m.chart != chart)
            {
                continue;
            }
            let w: Vec<f64> = self.mu_states[i - 2..=i + 2]
                .iter()
                .map(ProjectiveMu::coordinate)
                .collect();
            let derivative = stencil(&w, 2, ds);
            let rhs = chart_rhs(chart, self.terms, &samples[i].helicities, w[2]);
            out.push(RiccatiResidual {
                index: i,
                s: samples[i].s,
                chart,
                residual: derivative - rhs,
                rhs,
            });
        }
        out
    }

    pub fn max_riccati_residual(&self) -> f64 {
        self.riccati_residuals()
            .iter()
            .map(|r| r.residual.abs())
            .fold(0.0, f64::max)
    }

    /// True when every interior residual is within its tolerance.
    pub fn riccati_residual_ok(&self) -> bool {
        self.riccati_residuals()
            .iter()
            .all(|r| r.residual.abs() <= r.tolerance())
    }
}

struct RiccatiExtras {
    charts: Vec<Chart>,
    terms: RiccatiTerms,
    switch: f64,
    /// Active charts after each stored sample.
    history: Vec<Vec<Chart>>,
}

impl Extras for RiccatiExtras {
    fn rhs(
        &self,
        _: f64,
        _: &Vector3<f64>,
        g: &LocalGeometry,
        y: &[f64],
        dy: &mut [f64],
    ) -> Result<()> {
        for (k, chart) in self.charts.iter().enumerate() {
            dy[k] = chart_rhs(*chart, self.terms, &g.helicities, y[k]);
        }
        Ok(())
    }

    fn at_sample(&mut self, s: f64, y: &mut [f64]) -> Result<()> {
        for (k, w) in y.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(Error::NoValidChart { s });
            }
            if w.abs() > self.switch {
                *w = -1.0 / *w;
                self.charts[k] = self.charts[k].other();
            }
        }
        self.history.push(self.charts.clone());
        Ok(())
    }
}

/// Integrates several Riccati solutions along one streamline.
///
/// All returned tracks share the same [`Streamline`].
pub fn integrate_riccati_family(
    v: &VectorFieldSpec,
    seed: Vector3<f64>,
    mu0: &[ProjectiveMu],
    s_max: f64,
    terms: RiccatiTerms,
    opts: &IntegratorOptions,
) -> Result<Vec<RiccatiTrack>> {
    let mut extras = RiccatiExtras {
        charts: mu0.iter().map(|m| m.chart).collect(),
        terms,
        switch: opts.chart_switch,
        history: Vec::new(),
    };
    let w0: Vec<f64> = mu0.iter().map(ProjectiveMu::coordinate).collect();
    let (streamline, states) = drive(v, seed, s_max, opts, &mut extras, &w0)?;
    let streamline = Arc::new(streamline);
    let tracks = (0..mu0.len())
        .map(|k| {
            let mu_states: Vec<ProjectiveMu> = states
                .iter()
                .zip(&extras.history)
                .map(|(y, charts)| ProjectiveMu::from_chart(charts[k], y[k]))
                .collect();
            // a switch at the seed only normalizes the initial chart
            let chart_switches = mu_states
                .windows(2)
                .zip(&streamline.samples[1..])
                .filter(|(w, _)| w[0].chart != w[1].chart)
                .map(|(_, p)| p.s)
                .collect();
            RiccatiTrack {
                streamline: streamline.clone(),
                mu_states,
                chart_switches,
                terms,
            }
        })
        .collect();
    Ok(tracks)
}

/// Integrates one Riccati solution; see [`integrate_riccati_family`].
pub fn integrate_riccati(
    v: &VectorFieldSpec,
    seed: Vector3<f64>,
    mu0: ProjectiveMu,
    s_max: f64,
    opts: &IntegratorOptions,
) -> Result<RiccatiTrack> {
    let mut tracks = integrate_riccati_family(v, seed, &[mu0], s_max, RiccatiTerms::Full, opts)?;
    Ok(tracks.remove(0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearTrack {
    pub streamline: Arc<Streamline>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// `-(du/u)/Omega_b`, absent where `u` or `Omega_b` is too small.
    pub mu_reconstructed: Vec<Option<f64>>,
    /// Interpolated abscissae where `u` changes sign; `mu` has a pole there.
    pub u_zero_crossings: Vec<f64>,
}

struct LinearExtras<'a> {
    v: &'a VectorFieldSpec,
    th: FrenetThresholds,
    floor: f64,
}

impl Extras for LinearExtras<'_> {
    fn rhs(
        &self,
        s: f64,
        x: &Vector3<f64>,
        g: &LocalGeometry,
        y: &[f64],
        dy: &mut [f64],
    ) -> Result<()> {
        let h = &g.helicities;
        if self.floor > 0.0 && h.omega_b.abs() < self.floor {
            return Err(Error::OmegaBTooSmall {
                s,
                omega_b: h.omega_b,
            });
        }
        let ratio = if h.omega_b.abs() < OMEGA_B_ZERO.max(self.floor) {
            0.0
        } else {
            frenet::omega_b_arclength_derivative(self.v, x, &self.th)? / h.omega_b
        };
        dy[0] = y[1];
        dy[1] = (ratio + h.omega_nb) * y[1] - h.omega_n * h.omega_b * y[0];
        Ok(())
    }

    fn at_sample(&mut self, _: f64, _: &mut [f64]) -> Result<()> {
        Ok(())
    }
}

/// Integrates `u'' - (Omega_b'/Omega_b + Omega_nb) u' + Omega_n Omega_b u = 0`
/// and reconstructs `mu = -u'/(Omega_b u)`.
///
/// With `omega_b_floor = 0` the ratio term is dropped wherever
/// `|Omega_b| < OMEGA_B_ZERO`.
pub fn integrate_linear_pair(
    v: &VectorFieldSpec,
    seed: Vector3<f64>,
    u0: f64,
    du0: f64,
    s_max: f64,
    opts: &IntegratorOptions,
) -> Result<LinearTrack> {
    let mut extras = LinearExtras {
        v,
        th: opts.thresholds,
        floor: opts.omega_b_floor,
    };
    let (streamline, states) = drive(v, seed, s_max, opts, &mut extras, &[u0, du0])?;
    let u: Vec<f64> = states.iter().map(|s| s[0]).collect();
    let du: Vec<f64> = states.iter().map(|s| s[1]).collect();
    let mu_reconstructed = streamline
        .samples
        .iter()
        .zip(u.iter().zip(&du))
        .map(|(p, (&u, &du))| {
            let ob = p.helicities.omega_b;
            (u.abs() > opts.u_floor && ob.abs() > OMEGA_B_ZERO.max(opts.omega_b_floor))
                .then(|| -(du / u) / ob)
        })
        .collect();
    let u_zero_crossings = streamline
        .samples
        .windows(2)
        .zip(u.windows(2))
        .filter(|(_, w)| w[0] * w[1] < 0.0)
        .map(|(p, w)| p[0].s + (p[1].s - p[0].s) * w[0] / (w[0] - w[1]))
        .collect();
    Ok(LinearTrack {
        streamline: Arc::new(streamline),
        u,
        du,
        mu_reconstructed,
        u_zero_crossings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_vector;
    use crate::frenet::DegeneracyKind;
    use std::f64::consts::PI;

    fn field(src: &str) -> VectorFieldSpec {
        parse_vector(src).unwrap()
    }

    fn x0() -> Vector3<f64> {
        Vector3::new(1.0, 0.0, 0.0)
    }

    #[test]
    fn circle_closes() {
        let line =
            integrate_streamline(&field("-y, x, 0"), x0(), 2.0 * PI, &Default::default()).unwrap();
        let last = line.samples.last().unwrap();
        assert!((last.x - x0()).norm() < 1e-6);
        assert!((last.s - 2.0 * PI).abs() < 1e-15);
        assert!(line.max_arclength_excess() <= 1e-9);
    }

    #[test]
    fn helix_returns_over_seed() {
        let s_max = 2.0f64.sqrt() * 2.0 * PI;
        let line =
            integrate_streamline(&field("-y, x, 1"), x0(), s_max, &Default::default()).unwrap();
        let x = line.samples.last().unwrap().x;
        assert!((x[0] - 1.0).abs() < 1e-6 && x[1].abs() < 1e-6, "{x}");
        assert!((x[2] - 2.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn straight_flow_degenerates_at_seed() {
        let err = integrate_streamline(&field("0, 0, 1 + x^2"), x0(), 1.0, &Default::default())
            .unwrap_err();
        match err {
            Error::DegenerateFrameEncountered { s, report, partial } => {
                assert_eq!(s, 0.0);
                assert_eq!(report.kind, DegeneracyKind::VanishingNormal);
                assert!(partial.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degeneracy_mid_track_keeps_partial() {
        // streamlines are straight lines beyond x = 1
        let v = field("1, (x - 1 - abs(x - 1))^2, 0");
        let err = integrate_streamline(&v, Vector3::new(0.0, 0.0, 0.0), 3.0, &Default::default())
            .unwrap_err();
        match err {
            Error::DegenerateFrameEncountered { s, partial, .. } => {
                assert!(s > 1.5 && s < 2.0, "s = {s}");
                assert!(!partial.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn backward_samples_carry_negative_arclength() {
        let opts = IntegratorOptions {
            backward: true,
            ..Default::default()
        };
        let line = integrate_streamline(&field("-y, x, 0"), x0(), PI / 2.0, &opts).unwrap();
        let last = line.samples.last().unwrap();
        assert!((last.s + PI / 2.0).abs() < 1e-15);
        assert!((last.x - Vector3::new(0.0, -1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn frozen_mu_on_circular_field() {
        let track = integrate_riccati(
            &field("-y, x, 0"),
            x0(),
            ProjectiveMu::from_mu(0.7),
            6.0,
            &Default::default(),
        )
        .unwrap();
        for m in &track.mu_states {
            assert!((m.mu().unwrap() - 0.7).abs() < 1e-10);
        }
        assert!(track.max_riccati_residual() < 1e-10);
    }

    #[test]
    fn projective_point_is_chart_independent() {
        for mu in [-5.0, -0.3, 0.0, 0.9, 17.0] {
            let a = ProjectiveMu::from_mu(mu);
            if mu != 0.0 {
                let b = ProjectiveMu::from_eta(-1.0 / mu);
                assert!(a.bracket(&b).abs() < 1e-15);
                assert!((a.mu().unwrap() * a.eta().unwrap() + 1.0).abs() < 1e-12);
            }
            assert!((a.p.hypot(a.q) - 1.0).abs() < 1e-15);
        }
        let infinity = ProjectiveMu::from_homogeneous(1.0, 0.0).unwrap();
        assert_eq!(infinity.chart, Chart::EtaChart);
        assert_eq!(infinity.mu(), None);
        assert_eq!(infinity.coordinate(), 0.0);
        assert!(ProjectiveMu::from_homogeneous(0.0, 0.0).is_err());
    }

    #[test]
    fn linear_pair_self_test_on_circular_field() {
        let opts = IntegratorOptions {
            omega_b_floor: 0.0,
            ..Default::default()
        };
        let track = integrate_linear_pair(&field("-y, x, 0"), x0(), 0.5, 0.25, 4.0, &opts).unwrap();
        for (p, u) in track.streamline.samples.iter().zip(&track.u) {
            assert!((u - (0.5 + 0.25 * p.s)).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_pair_rejects_vanishing_omega_b() {
        let err =
            integrate_linear_pair(&field("-y, x, 1"), x0(), 1.0, 0.0, 1.0, &Default::default())
                .unwrap_err();
        assert!(matches!(err, Error::OmegaBTooSmall { .. }));
    }

    #[test]
    fn invalid_options_rejected() {
        let v = field("-y, x, 0");
        assert!(integrate_streamline(&v, x0(), 0.0, &Default::default()).is_err());
        let opts = IntegratorOptions {
            chart_switch: 0.5,
            ..Default::default()
        };
        assert!(integrate_streamline(&v, x0(), 1.0, &opts).is_err());
    }
}
