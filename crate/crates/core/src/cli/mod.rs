//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 when a degenerate frame or vanishing `Omega_b`
//! aborts the job, 1 on usage and parse errors.

pub mod report;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::calc3::VectorHandle;
use crate::error::{Error, Result};
use crate::expr::{parse_scalar, parse_vector, Expr, VectorFieldSpec};
use crate::frenet::{self, FrenetThresholds, HelicityDensities};
use crate::poisson::{
    compatibility_residual, construct_bihamiltonian, hamilton_residual, jacobi_residual,
    nambu_residual, ConstructOptions, PoissonTrack,
};
use crate::riccati::{
    cross_ratio, integrate_linear_pair, integrate_riccati_family, integrate_streamline,
    IntegratorOptions, ProjectiveMu, RiccatiTerms, StreamlineSample,
};
use crate::sampling::SampleBox;
use crate::systems::Catalog;
use report::{num, opt_num, Record, Report};

const DSL_HELP: &str = "\
Field definitions are comma-separated expressions in x, y, z:
  numbers    1, 2.5, 1e-3
  operators  + - * / ^   (^ binds tightest and is right associative;
                          its exponent must be constant)
  functions  sin cos tan exp ln sqrt tanh abs
  example    --field \"y*z, x*z, x*y\"";

#[derive(Debug, Parser)]
#[command(
    name = "bihamiltonian",
    version,
    about = "Frames, helicities, Riccati tracks and bi-Hamiltonian structures of 3D vector fields",
    after_help = DSL_HELP
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serret-Frenet frame at a point.
    Frame {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        point: Vector3<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Helicity densities at a point, or at Halton points of a box.
    Helicity {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true, conflicts_with = "bounds")]
        point: Option<Vector3<f64>>,
        #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
        bounds: Option<SampleBox>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Use central differences of the frame with this step instead of exact jets.
        #[arg(long)]
        fd_step: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Streamline in arclength with frame and helicities per sample.
    Streamline {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        track: TrackArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Riccati solutions along a streamline.
    Riccati {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        track: TrackArgs,
        /// Initial ratio; repeat for several solutions.
        #[arg(long = "mu0", allow_hyphen_values = true)]
        mu0: Vec<f64>,
        /// Also integrate the linear second-order form for the first solution.
        #[arg(long)]
        linear: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Two compatible Poisson vectors along a streamline.
    Construct {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        track: TrackArgs,
        /// Initial ratios of the two structures (at most two).
        #[arg(long = "mu0", allow_hyphen_values = true)]
        mu0: Vec<f64>,
        /// Initial amplitudes of the two structures (at most two).
        #[arg(long = "alpha0")]
        alpha0: Vec<f64>,
        /// Largest helicity counted as zero in the case analysis.
        #[arg(long, default_value_t = 1e-7)]
        omega_eps: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Residuals of candidate Hamiltonians and Poisson vectors at sampled points.
    Verify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        h1: Option<String>,
        #[arg(long)]
        h2: Option<String>,
        #[arg(long)]
        j1: Option<String>,
        #[arg(long)]
        j2: Option<String>,
        #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
        bounds: Option<SampleBox>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// List catalog systems, or show one.
    Catalog {
        #[arg(long)]
        system: Option<String>,
        /// Catalog file replacing the built-in one.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Field as "fx, fy, fz".
    #[arg(long, conflicts_with = "system", allow_hyphen_values = true)]
    pub field: Option<String>,
    /// Catalog system name.
    #[arg(long)]
    pub system: Option<String>,
    /// Catalog file replacing the built-in one.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// A point is a zero of the field when |v| < this * (1 + |p|).
    #[arg(long, default_value_t = 1e-10)]
    pub velocity_floor: f64,
    /// The normal is undefined when |t x curl t| < this.
    #[arg(long, default_value_t = 1e-8)]
    pub normal_floor: f64,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// Defaults to the system's recommended seed.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    pub seed: Option<Vector3<f64>>,
    #[arg(long, default_value_t = 8.0)]
    pub smax: f64,
    /// Relative and absolute integrator tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Largest integrator step; defaults to 0.05 * smax.
    #[arg(long)]
    pub max_step: Option<f64>,
    /// Spacing of stored samples.
    #[arg(long)]
    pub sample_step: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub chart_switch: f64,
    /// 0 disables the check.
    #[arg(long, default_value_t = 1e-6)]
    pub omega_b_floor: f64,
    /// |u| below this marks a pole of the linear-pair reconstruction.
    #[arg(long, default_value_t = 1e-8)]
    pub u_floor: f64,
    #[arg(long)]
    pub backward: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_floats<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!(
            "expected {N} comma-separated numbers, got {}",
            parts.len()
        ));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
    }
    Ok(out)
}

fn parse_triple(s: &str) -> std::result::Result<Vector3<f64>, String> {
    parse_floats::<3>(s).map(Vector3::from)
}

fn parse_box(s: &str) -> std::result::Result<SampleBox, String> {
    SampleBox::from_bounds(parse_floats::<6>(s)?)
        .ok_or_else(|| "each min must be below its max".to_string())
}

/// Field plus where it came from.
struct ResolvedField {
    spec: VectorFieldSpec,
    system: Option<crate::systems::CatalogEntry>,
}

fn load_catalog(config: &Option<PathBuf>) -> Result<Catalog> {
    match config {
        Some(p) => Catalog::from_path(p),
        None => Ok(Catalog::builtin().clone()),
    }
}

impl FieldArgs {
    fn resolve(&self) -> Result<ResolvedField> {
        match (&self.field, &self.system) {
            (Some(src), None) => Ok(ResolvedField {
                spec: parse_vector(src)?,
                system: None,
            }),
            (None, Some(name)) => {
                let entry = load_catalog(&self.config)?.get(name)?.clone();
                Ok(ResolvedField {
                    spec: entry.field.clone(),
                    system: Some(entry),
                })
            }
            _ => Err(Error::InvalidInput(
                "give exactly one of --field or --system".into(),
            )),
        }
    }

    fn thresholds(&self) -> FrenetThresholds {
        FrenetThresholds {
            velocity_floor: self.velocity_floor,
            normal_floor: self.normal_floor,
        }
    }

    fn provenance(&self, input: &mut Map<String, Value>, resolved: &ResolvedField) {
        input.insert("field".into(), json!(resolved.spec.to_string()));
        input.insert("velocity_floor".into(), num(self.velocity_floor));
        input.insert("normal_floor".into(), num(self.normal_floor));
        input.insert("system".into(), json!(self.system));
        input.insert(
            "config".into(),
            json!(self.config.as_ref().map(|p| p.display().to_string())),
        );
    }
}

impl TrackArgs {
    fn options(&self, field: &FieldArgs) -> IntegratorOptions {
        IntegratorOptions {
            rtol: self.tol,
            atol: self.tol,
            max_step: self.max_step,
            sample_step: self.sample_step,
            chart_switch: self.chart_switch,
            omega_b_floor: self.omega_b_floor,
            u_floor: self.u_floor,
            backward: self.backward,
            thresholds: field.thresholds(),
            ..IntegratorOptions::default()
        }
    }

    fn seed(&self, field: &ResolvedField) -> Result<Vector3<f64>> {
        self.seed
            .or_else(|| field.system.as_ref().map(|s| s.recommended_seed))
            .ok_or_else(|| Error::InvalidInput("--seed is required with --field".into()))
    }

    fn provenance(&self, input: &mut Map<String, Value>, seed: &Vector3<f64>) {
        input.insert("seed".into(), vec3(seed));
        input.insert("smax".into(), num(self.smax));
        input.insert("tol".into(), num(self.tol));
        input.insert("max_step".into(), opt_num(self.max_step));
        input.insert("sample_step".into(), opt_num(self.sample_step));
        input.insert("chart_switch".into(), num(self.chart_switch));
        input.insert("omega_b_floor".into(), num(self.omega_b_floor));
        input.insert("u_floor".into(), num(self.u_floor));
        input.insert("backward".into(), json!(self.backward));
    }
}

fn vec3(v: &Vector3<f64>) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

fn put_vec(rec: &mut Record, prefix: &str, v: &Vector3<f64>) {
    for (axis, c) in ["x", "y", "z"].iter().zip(v.iter()) {
        let key = if prefix.is_empty() {
            axis.to_string()
        } else {
            format!("{prefix}_{axis}")
        };
        rec.insert(key, num(*c));
    }
}

fn put_helicities(rec: &mut Record, h: &HelicityDensities) {
    rec.insert("omega_t".into(), num(h.omega_t));
    rec.insert("omega_n".into(), num(h.omega_n));
    rec.insert("omega_b".into(), num(h.omega_b));
    rec.insert("n_curl_b".into(), num(h.n_curl_b));
    rec.insert("b_curl_n".into(), num(h.b_curl_n));
    rec.insert("omega_nb".into(), num(h.omega_nb));
}

fn sample_record(i: usize, p: &StreamlineSample) -> Record {
    let mut rec = Record::new();
    rec.insert("index".into(), json!(i));
    rec.insert("s".into(), num(p.s));
    put_vec(&mut rec, "", &p.x);
    put_vec(&mut rec, "t", &p.frame.t);
    put_vec(&mut rec, "n", &p.frame.n);
    put_vec(&mut rec, "b", &p.frame.b);
    rec.insert("speed".into(), num(p.speed));
    put_helicities(&mut rec, &p.helicities);
    rec
}

fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().map(f64::abs).fold(0.0, f64::max)
}

/// Why a command stopped early, with whatever it produced so far.
struct Failure {
    error: Error,
    report: Option<Box<Report>>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure {
            error,
            report: None,
        }
    }
}

fn degeneracy_summary(report: &mut Report, e: &Error) {
    report.summary.insert("status".into(), json!("degenerate"));
    report.summary.insert("error".into(), json!(e.to_string()));
    if let Some(r) = e.degeneracy_report() {
        report.summary.insert(
            "degeneracy".into(),
            json!({"kind": format!("{:?}", r.kind), "magnitude": num(r.magnitude)}),
        );
    }
    let s = match e {
        Error::DegenerateFrameEncountered { s, .. } | Error::OmegaBTooSmall { s, .. } => Some(*s),
        _ => None,
    };
    report.summary.insert("degenerate_at_s".into(), opt_num(s));
}

/// Turns a degeneracy error into a report carrying it; other errors pass through.
fn degenerate_report(mut report: Report, error: Error) -> Failure {
    if error.is_degeneracy() {
        degeneracy_summary(&mut report, &error);
        if let Error::DegenerateFrameEncountered { partial, .. } = &error {
            report.records = partial
                .samples
                .iter()
                .enumerate()
                .map(|(i, p)| sample_record(i, p))
                .collect();
        }
        Failure {
            error,
            report: Some(Box::new(report)),
        }
    } else {
        Failure {
            error,
            report: None,
        }
    }
}

fn frame_cmd(field: &FieldArgs, point: &Vector3<f64>) -> std::result::Result<Report, Failure> {
    let f = field.resolve()?;
    let mut input = Map::new();
    field.provenance(&mut input, &f);
    input.insert("point".into(), vec3(point));
    let mut report = Report::new("frame", input);
    match frenet::local_geometry(&f.spec, point, &field.thresholds()) {
        Ok(g) => {
            let mut rec = Record::new();
            put_vec(&mut rec, "", point);
            put_vec(&mut rec, "t", &g.frame.t);
            put_vec(&mut rec, "n", &g.frame.n);
            put_vec(&mut rec, "b", &g.frame.b);
            rec.insert("normal_magnitude".into(), num(g.frame.normal_magnitude));
            rec.insert("speed".into(), num(g.speed));
            report.summary.insert("status".into(), json!("ok"));
            report.summary.insert(
                "orthonormality_defect".into(),
                num(g.frame.orthonormality_defect()),
            );
            report.records.push(rec);
            Ok(report)
        }
        Err(e) => Err(degenerate_report(report, e)),
    }
}

fn helicity_cmd(
    field: &FieldArgs,
    point: &Option<Vector3<f64>>,
    bounds: &Option<SampleBox>,
    samples: usize,
    fd_step: Option<f64>,
) -> std::result::Result<Report, Failure> {
    let f = field.resolve()?;
    let mut input = Map::new();
    field.provenance(&mut input, &f);
    input.insert("fd_step".into(), opt_num(fd_step));
    let th = field.thresholds();
    let eval = |p: &Vector3<f64>| match fd_step {
        Some(h) => frenet::helicities_at_fd(&f.spec, p, &th, Some(h)),
        None => frenet::local_geometry(&f.spec, p, &th).map(|g| g.helicities),
    };
    let record = |p: &Vector3<f64>, h: &HelicityDensities| {
        let mut rec = Record::new();
        put_vec(&mut rec, "", p);
        put_helicities(&mut rec, h);
        rec
    };
    if let Some(p) = point {
        input.insert("point".into(), vec3(p));
        let mut report = Report::new("helicity", input);
        return match eval(p) {
            Ok(h) => {
                report.records.push(record(p, &h));
                report.summary.insert("status".into(), json!("ok"));
                Ok(report)
            }
            Err(e) => Err(degenerate_report(report, e)),
        };
    }
    let bounds = bounds.unwrap_or_else(|| SampleBox::cube(2.0));
    input.insert(
        "box".into(),
        json!([
            bounds.lo[0],
            bounds.hi[0],
            bounds.lo[1],
            bounds.hi[1],
            bounds.lo[2],
            bounds.hi[2]
        ]),
    );
    input.insert("samples".into(), json!(samples));
    let mut report = Report::new("helicity", input);
    let points: Vec<Vector3<f64>> = bounds.halton_points(samples).collect();
    let results: Vec<Result<Option<HelicityDensities>>> = points
        .par_iter()
        .map(|p| match eval(p) {
            Ok(h) => Ok(Some(h)),
            Err(e) if e.is_degeneracy() => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut skipped = 0;
    for (i, (p, r)) in points.iter().zip(results).enumerate() {
        match r? {
            Some(h) => {
                let mut rec = record(p, &h);
                rec.insert("index".into(), json!(i));
                report.records.push(rec);
            }
            None => skipped += 1,
        }
    }
    report.summary.insert("status".into(), json!("ok"));
    report
        .summary
        .insert("evaluated".into(), json!(report.records.len()));
    report
        .summary
        .insert("skipped_degenerate".into(), json!(skipped));
    Ok(report)
}

fn streamline_cmd(field: &FieldArgs, track: &TrackArgs) -> std::result::Result<Report, Failure> {
    let f = field.resolve()?;
    let seed = track.seed(&f)?;
    let mut input = Map::new();
    field.provenance(&mut input, &f);
    track.provenance(&mut input, &seed);
    let report = Report::new("streamline", input);
    match integrate_streamline(&f.spec, seed, track.smax, &track.options(field)) {
        Ok(line) => {
            let mut report = report;
            report.records = line
                .samples
                .iter()
                .enumerate()
                .map(|(i, p)| sample_record(i, p))
                .collect();
            report.summary.insert("status".into(), json!("ok"));
            report.summary.insert("samples".into(), json!(line.len()));
            report
                .summary
                .insert("max_frame_defect".into(), num(line.max_frame_defect()));
            report
                .summary
                .insert("max_abs_omega_n".into(), num(line.max_abs(|h| h.omega_n)));
            report
                .summary
                .insert("max_abs_omega_b".into(), num(line.max_abs(|h| h.omega_b)));
            report
                .summary
                .insert("max_abs_omega_nb".into(), num(line.max_abs(|h| h.omega_nb)));
            Ok(report)
        }
        Err(e) => Err(degenerate_report(report, e)),
    }
}

fn riccati_cmd(
    field: &FieldArgs,
    track: &TrackArgs,
    mu0: &[f64],
    linear: bool,
) -> std::result::Result<Report, Failure> {
    let f = field.resolve()?;
    let seed = track.seed(&f)?;
    let mu0: Vec<f64> = if mu0.is_empty() {
        vec![0.0]
    } else {
        mu0.to_vec()
    };
    let mut input = Map::new();
    field.provenance(&mut input, &f);
    track.provenance(&mut input, &seed);
    input.insert("mu0".into(), json!(mu0));
    input.insert("linear".into(), json!(linear));
    let report = Report::new("riccati", input);
    let opts = track.options(field);
    let starts: Vec<ProjectiveMu> = mu0.iter().map(|m| ProjectiveMu::from_mu(*m)).collect();
    let tracks = match integrate_riccati_family(
        &f.spec,
        seed,
        &starts,
        track.smax,
        RiccatiTerms::Full,
        &opts,
    ) {
        Ok(t) => t,
        Err(e) => return Err(degenerate_report(report, e)),
    };
    let linear_track = if linear {
        let ob = frenet::local_geometry(&f.spec, &seed, &opts.thresholds)
            .map_err(Failure::from)?
            .helicities
            .omega_b;
        match integrate_linear_pair(&f.spec, seed, 1.0, -mu0[0] * ob, track.smax, &opts) {
            Ok(t) => Some(t),
            Err(e) => return Err(degenerate_report(report, e)),
        }
    } else {
        None
    };

    let mut report = report;
    let line = &tracks[0].streamline;
    for (i, p) in line.samples.iter().enumerate() {
        let mut rec = Record::new();
        rec.insert("index".into(), json!(i));
        rec.insert("s".into(), num(p.s));
        put_vec(&mut rec, "", &p.x);
        rec.insert("omega_n".into(), num(p.helicities.omega_n));
        rec.insert("omega_b".into(), num(p.helicities.omega_b));
        rec.insert("omega_nb".into(), num(p.helicities.omega_nb));
        for (k, t) in tracks.iter().enumerate() {
            let m = t.mu_states[i];
            rec.insert(format!("mu_{k}"), opt_num(m.mu()));
            rec.insert(format!("p_{k}"), num(m.p));
            rec.insert(format!("q_{k}"), num(m.q));
            rec.insert(format!("chart_{k}"), json!(format!("{:?}", m.chart)));
        }
        if let Some(l) = &linear_track {
            rec.insert("u".into(), num(l.u[i]));
            rec.insert("du".into(), num(l.du[i]));
            rec.insert("mu_linear".into(), opt_num(l.mu_reconstructed[i]));
        }
        report.records.push(rec);
    }
    let s = &mut report.summary;
    s.insert("status".into(), json!("ok"));
    s.insert(
        "riccati_residual_max".into(),
        Value::Array(
            tracks
                .iter()
                .map(|t| num(t.max_riccati_residual()))
                .collect(),
        ),
    );
    s.insert(
        "riccati_residual_ok".into(),
        json!(tracks.iter().all(|t| t.riccati_residual_ok())),
    );
    s.insert(
        "chart_switches".into(),
        Value::Array(
            tracks
                .iter()
                .map(|t| Value::Array(t.chart_switches.iter().map(|x| num(*x)).collect()))
                .collect(),
        ),
    );
    s.insert(
        "mu_final".into(),
        Value::Array(
            tracks
                .iter()
                .map(|t| opt_num(t.final_state().mu()))
                .collect(),
        ),
    );
    if tracks.len() == 4 {
        let ratios: Vec<f64> = (0..line.len())
            .map(|i| {
                let m = |k: usize| tracks[k].mu_states[i];
                cross_ratio(&m(0), &m(1), &m(2), &m(3))
            })
            .collect();
        let drift = max_abs(ratios.iter().map(|r| r - ratios[0]));
        s.insert("cross_ratio".into(), num(ratios[0]));
        s.insert("cross_ratio_drift".into(), num(drift));
    }
    if let Some(l) = &linear_track {
        let diff = max_abs(
            tracks[0]
                .mu_states
                .iter()
                .zip(&l.mu_reconstructed)
                .filter_map(|(m, r)| Some(m.mu()? - (*r)?)),
        );
        s.insert("linear_mu_max_difference".into(), num(diff));
        s.insert(
            "u_zero_crossings".into(),
            Value::Array(l.u_zero_crossings.iter().map(|x| num(*x)).collect()),
        );
    }
    Ok(report)
}

fn put_track(rec: &mut Record, k: usize, t: &PoissonTrack, i: usize) {
    rec.insert(format!("alpha{k}"), num(t.alpha[i]));
    rec.insert(format!("beta{k}"), num(t.beta[i]));
    put_vec(rec, &format!("j{k}"), &t.j[i]);
}

fn construct_cmd(
    field: &FieldArgs,
    track: &TrackArgs,
    mu0: &[f64],
    alpha0: &[f64],
    omega_eps: f64,
) -> std::result::Result<Report, Failure> {
    if mu0.len() > 2 || alpha0.len() > 2 {
        return Err(Error::InvalidInput("at most two --mu0 and two --alpha0 values".into()).into());
    }
    let f = field.resolve()?;
    let seed = track.seed(&f)?;
    let mut opts = ConstructOptions {
        integrator: track.options(field),
        omega_eps,
        ..ConstructOptions::default()
    };
    for (slot, m) in opts.mu0.iter_mut().zip(mu0) {
        *slot = ProjectiveMu::from_mu(*m);
    }
    for (slot, a) in opts.alpha0.iter_mut().zip(alpha0) {
        *slot = *a;
    }
    let mut input = Map::new();
    field.provenance(&mut input, &f);
    track.provenance(&mut input, &seed);
    input.insert(
        "mu0".into(),
        Value::Array(opts.mu0.iter().map(|m| opt_num(m.mu())).collect()),
    );
    input.insert("alpha0".into(), json!(opts.alpha0));
    input.insert("omega_eps".into(), num(omega_eps));
    let report = Report::new("construct", input);
    let result = match construct_bihamiltonian(&f.spec, seed, track.smax, &opts) {
        Ok(r) => r,
        Err(e) => return Err(degenerate_report(report, e)),
    };
    let mut report = report;
    let compat: std::collections::HashMap<usize, f64> = result
        .compatibility
        .iter()
        .map(|c| (c.index, c.residual))
        .collect();
    for (i, p) in result.track1.streamline().samples.iter().enumerate() {
        let mut rec = Record::new();
        rec.insert("index".into(), json!(i));
        rec.insert("s".into(), num(p.s));
        put_vec(&mut rec, "", &p.x);
        put_track(&mut rec, 1, &result.track1, i);
        put_track(&mut rec, 2, &result.track2, i);
        rec.insert("compat_residual".into(), opt_num(compat.get(&i).copied()));
        report.records.push(rec);
    }
    let s = &mut report.summary;
    s.insert("status".into(), json!("ok"));
    s.insert("case_tag".into(), json!(result.case_tag.name()));
    s.insert(
        "compat_residual_max".into(),
        num(result.compat_residual_max),
    );
    s.insert("max_abs_omega_n".into(), num(result.max_abs_omega_n));
    s.insert("max_abs_omega_b".into(), num(result.max_abs_omega_b));
    s.insert("max_abs_omega_nb".into(), num(result.max_abs_omega_nb));
    s.insert(
        "riccati_residual_max".into(),
        json!(result.riccati_residual_max.map(num)),
    );
    s.insert(
        "chart_switches".into(),
        json!([
            result.track1.base.chart_switches.len(),
            result.track2.base.chart_switches.len()
        ]),
    );
    s.insert(
        "max_orthogonality_defect".into(),
        num(result
            .track1
            .max_orthogonality_defect()
            .max(result.track2.max_orthogonality_defect())),
    );
    s.insert("warnings".into(), json!(result.warnings));
    Ok(report)
}

struct Candidates {
    h: Option<[Expr; 2]>,
    j: Option<[VectorHandle; 2]>,
    j_text: Option<[String; 2]>,
}

fn candidates(
    f: &ResolvedField,
    h1: &Option<String>,
    h2: &Option<String>,
    j1: &Option<String>,
    j2: &Option<String>,
) -> Result<Candidates> {
    let known_h = f.system.as_ref().and_then(|s| s.known_hamiltonians.clone());
    let known_j = f.system.as_ref().and_then(|s| s.known_poisson.clone());
    let pick_h = |given: &Option<String>, k: usize| -> Result<Option<Expr>> {
        match given {
            Some(src) => Ok(Some(parse_scalar(src)?)),
            None => Ok(known_h.as_ref().map(|h| h[k].clone())),
        }
    };
    let pick_j = |given: &Option<String>, k: usize| -> Result<Option<VectorFieldSpec>> {
        match given {
            Some(src) => Ok(Some(parse_vector(src)?)),
            None => Ok(known_j.as_ref().map(|j| j[k].clone())),
        }
    };
    let h = match (pick_h(h1, 0)?, pick_h(h2, 1)?) {
        (Some(a), Some(b)) => Some([a, b]),
        (None, None) => None,
        _ => return Err(Error::InvalidInput("give both --h1 and --h2".into())),
    };
    let j = match (pick_j(j1, 0)?, pick_j(j2, 1)?) {
        (Some(a), Some(b)) => Some([a, b]),
        (None, None) => None,
        _ => return Err(Error::InvalidInput("give both --j1 and --j2".into())),
    };
    if j.is_some() && h.is_none() {
        return Err(Error::InvalidInput(
            "Poisson vectors need Hamiltonians".into(),
        ));
    }
    if h.is_none() {
        return Err(Error::InvalidInput(
            "nothing to verify: give --h1/--h2 (and optionally --j1/--j2) or a system with known data".into(),
        ));
    }
    Ok(Candidates {
        h,
        j_text: j.as_ref().map(|[a, b]| [a.to_string(), b.to_string()]),
        j: j.map(|[a, b]| [a.into(), b.into()]),
    })
}

fn verify_point(v: &VectorFieldSpec, c: &Candidates, p: &Vector3<f64>) -> Result<Option<Record>> {
    let [h1, h2] = c.h.as_ref().expect("checked");
    let nambu = match nambu_residual(v, h1, h2, p) {
        Ok(n) => n,
        Err(Error::DegenerateGradients { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut rec = Record::new();
    put_vec(&mut rec, "", p);
    let vp = v.eval_f64(p)?;
    rec.insert(
        "grad_h1_dot_v".into(),
        num(h1.eval_jet2(p)?.gradient.dot(&vp)),
    );
    rec.insert(
        "grad_h2_dot_v".into(),
        num(h2.eval_jet2(p)?.gradient.dot(&vp)),
    );
    rec.insert("psi".into(), num(nambu.psi));
    rec.insert("nambu_residual".into(), num(nambu.residual));
    if let Some([j1, j2]) = &c.j {
        let r1 = hamilton_residual(j1, h2, v, p)?;
        let r2 = hamilton_residual(j2, h1, v, p)?;
        rec.insert("hamilton1".into(), num(r1.vec_residual.norm()));
        rec.insert("hamilton2".into(), num(r2.vec_residual.norm()));
        rec.insert("j1_dot_v".into(), num(r1.j_dot_v));
        rec.insert("j2_dot_v".into(), num(r2.j_dot_v));
        rec.insert("jacobi1".into(), num(jacobi_residual(j1, p)?));
        rec.insert("jacobi2".into(), num(jacobi_residual(j2, p)?));
        rec.insert(
            "compatibility".into(),
            num(compatibility_residual(j1, j2, p, None)?),
        );
    }
    Ok(Some(rec))
}

#[allow(clippy::too_many_arguments)]
fn verify_cmd(
    field: &FieldArgs,
    h1: &Option<String>,
    h2: &Option<String>,
    j1: &Option<String>,
    j2: &Option<String>,
    bounds: &Option<SampleBox>,
    samples: usize,
) -> std::result::Result<Report, Failure> {
    let f = field.resolve()?;
    let c = candidates(&f, h1, h2, j1, j2)?;
    let bounds = bounds.unwrap_or_else(|| SampleBox::cube(2.0));
    let mut input = Map::new();
    field.provenance(&mut input, &f);
    if let Some([a, b]) = &c.h {
        input.insert("h1".into(), json!(a.to_string()));
        input.insert("h2".into(), json!(b.to_string()));
    }
    if let Some([a, b]) = &c.j_text {
        input.insert("j1".into(), json!(a));
        input.insert("j2".into(), json!(b));
    }
    input.insert(
        "box".into(),
        json!([
            bounds.lo[0],
            bounds.hi[0],
            bounds.lo[1],
            bounds.hi[1],
            bounds.lo[2],
            bounds.hi[2]
        ]),
    );
    input.insert("samples".into(), json!(samples));
    let mut report = Report::new("verify", input);
    let points: Vec<Vector3<f64>> = bounds.halton_points(samples).collect();
    let rows: Vec<Result<Option<Record>>> = points
        .par_iter()
        .map(|p| verify_point(&f.spec, &c, p))
        .collect();
    let mut skipped = 0;
    for (i, r) in rows.into_iter().enumerate() {
        match r? {
            Some(mut rec) => {
                rec.insert("index".into(), json!(i));
                report.records.push(rec);
            }
            None => skipped += 1,
        }
    }
    let col_max = |key: &str| {
        max_abs(
            report
                .records
                .iter()
                .filter_map(|r| r.get(key).and_then(Value::as_f64)),
        )
    };
    let psi: Vec<f64> = report
        .records
        .iter()
        .filter_map(|r| r.get("psi").and_then(Value::as_f64))
        .collect();
    let mut summary = Map::new();
    summary.insert("status".into(), json!("ok"));
    summary.insert("evaluated".into(), json!(report.records.len()));
    summary.insert("skipped_degenerate".into(), json!(skipped));
    for key in ["grad_h1_dot_v", "grad_h2_dot_v", "nambu_residual"] {
        summary.insert(format!("max_{key}"), num(col_max(key)));
    }
    if c.j.is_some() {
        summary.insert(
            "max_hamilton_vec_residual".into(),
            num(col_max("hamilton1").max(col_max("hamilton2"))),
        );
        summary.insert(
            "max_jacobi_residual".into(),
            num(col_max("jacobi1").max(col_max("jacobi2"))),
        );
        summary.insert(
            "max_compatibility_residual".into(),
            num(col_max("compatibility")),
        );
        summary.insert(
            "max_j_dot_v".into(),
            num(col_max("j1_dot_v").max(col_max("j2_dot_v"))),
        );
    }
    summary.insert(
        "psi_min".into(),
        num(psi.iter().copied().fold(f64::INFINITY, f64::min)),
    );
    summary.insert(
        "psi_max".into(),
        num(psi.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
    );
    report.summary = summary;
    Ok(report)
}

fn catalog_cmd(
    system: &Option<String>,
    config: &Option<PathBuf>,
) -> std::result::Result<Report, Failure> {
    let catalog = load_catalog(config)?;
    let mut input = Map::new();
    input.insert("system".into(), json!(system));
    input.insert(
        "config".into(),
        json!(config.as_ref().map(|p| p.display().to_string())),
    );
    let mut report = Report::new("catalog", input);
    let entries: Vec<_> = match system {
        Some(name) => vec![catalog.get(name)?.clone()],
        None => catalog.entries().to_vec(),
    };
    for e in &entries {
        let mut rec = Record::new();
        rec.insert("name".into(), json!(e.name));
        rec.insert("field".into(), json!(e.field.to_string()));
        let h = e.known_hamiltonians.as_ref();
        let j = e.known_poisson.as_ref();
        rec.insert("h1".into(), json!(h.map(|h| h[0].to_string())));
        rec.insert("h2".into(), json!(h.map(|h| h[1].to_string())));
        rec.insert("j1".into(), json!(j.map(|j| j[0].to_string())));
        rec.insert("j2".into(), json!(j.map(|j| j[1].to_string())));
        put_vec(&mut rec, "seed", &e.recommended_seed);
        rec.insert("notes".into(), json!(e.notes));
        report.records.push(rec);
    }
    report.summary.insert("status".into(), json!("ok"));
    report
        .summary
        .insert("systems".into(), json!(entries.len()));
    Ok(report)
}

fn execute(cmd: &Command) -> std::result::Result<Report, Failure> {
    match cmd {
        Command::Frame { field, point, .. } => frame_cmd(field, point),
        Command::Helicity {
            field,
            point,
            bounds,
            samples,
            fd_step,
            ..
        } => helicity_cmd(field, point, bounds, *samples, *fd_step),
        Command::Streamline { field, track, .. } => streamline_cmd(field, track),
        Command::Riccati {
            field,
            track,
            mu0,
            linear,
            ..
        } => riccati_cmd(field, track, mu0, *linear),
        Command::Construct {
            field,
            track,
            mu0,
            alpha0,
            omega_eps,
            ..
        } => construct_cmd(field, track, mu0, alpha0, *omega_eps),
        Command::Verify {
            field,
            h1,
            h2,
            j1,
            j2,
            bounds,
            samples,
            ..
        } => verify_cmd(field, h1, h2, j1, j2, bounds, *samples),
        Command::Catalog { system, config, .. } => catalog_cmd(system, config),
    }
}

fn output_args(cmd: &Command) -> &OutputArgs {
    match cmd {
        Command::Frame { out, .. }
        | Command::Helicity { out, .. }
        | Command::Streamline { out, .. }
        | Command::Riccati { out, .. }
        | Command::Construct { out, .. }
        | Command::Verify { out, .. }
        | Command::Catalog { out, .. } => out,
    }
}

fn emit(report: &Report, out: &OutputArgs, stdout: &mut dyn Write) -> Result<()> {
    let text = match out.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    };
    let io = |e: std::io::Error| Error::InvalidInput(format!("writing report: {e}"));
    match &out.output {
        Some(path) => std::fs::write(path, text).map_err(io),
        None => stdout.write_all(text.as_bytes()).map_err(io),
    }
}

/// Runs the front end on `args` (including the program name) and returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let out = output_args(&cli.command);
    match execute(&cli.command) {
        Ok(report) => match emit(&report, out, stdout) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                1
            }
        },
        Err(Failure { error, report }) => {
            let _ = writeln!(stderr, "error: {error}");
            if matches!(error, Error::Parse(_)) {
                let _ = writeln!(stderr, "\n{DSL_HELP}");
            }
            if let Some(report) = report {
                let _ = emit(&report, out, stdout);
            }
            if error.is_degeneracy() {
                2
            } else {
                1
            }
        }
    }
}

/// Runs the front end on the process arguments.
pub fn run() -> i32 {
    run_with(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
