//! Serret-Frenet frame of a vector field and the helicity densities of its triad.
//!
//! The frame is `t = v/|v|`, `n = t x (curl t) / |t x (curl t)|`, `b = t x n`.
//! It only needs first derivatives of `v`, so the frame construction is written
//! once over a generic [`Scalar`]: running it on first-order duals yields the
//! frame vectors together with their exact gradients, from which the curls of
//! `n` and `b` (and hence every helicity density) follow without differencing.

use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::calc3::{self, VectorHandle};
use crate::error::{Error, Result};
use crate::expr::jet::{seed1, seed2};
use crate::expr::{Dual, Scalar, VectorFieldSpec};

/// Right-handed orthonormal triad at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t: Vector3<f64>,
    pub n: Vector3<f64>,
    pub b: Vector3<f64>,
    /// `|t x curl t|` before normalisation.
    pub normal_magnitude: f64,
}

impl Frame {
    /// Largest deviation from orthonormality and right-handedness.
    pub fn orthonormality_defect(&self) -> f64 {
        let unit = [self.t, self.n, self.b]
            .iter()
            .map(|e| (e.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        let ortho = [
            self.t.dot(&self.n),
            self.n.dot(&self.b),
            self.b.dot(&self.t),
        ]
        .iter()
        .map(|d| d.abs())
        .fold(0.0, f64::max);
        let handed = (self.t.cross(&self.n) - self.b).amax();
        unit.max(ortho).max(handed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegeneracyKind {
    ZeroVelocity,
    VanishingNormal,
    CurlEigenvector,
}

/// Why a frame could not be built, and the quantity that fell below threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub kind: DegeneracyKind,
    pub magnitude: f64,
}

impl fmt::Display for DegeneracyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DegeneracyKind::ZeroVelocity => write!(f, "ZeroVelocity (|v| = {:e})", self.magnitude),
            DegeneracyKind::VanishingNormal => {
                write!(f, "VanishingNormal (|t x curl t| = {:e})", self.magnitude)
            }
            DegeneracyKind::CurlEigenvector => write!(
                f,
                "CurlEigenvector (|curl t - lambda t| = {:e})",
                self.magnitude
            ),
        }
    }
}

/// Thresholds below which the frame is declared degenerate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrenetThresholds {
    /// `|v| < velocity_floor * (1 + |p|)` is a zero of the field.
    pub velocity_floor: f64,
    /// `|t x curl t| < normal_floor` has no normal.
    pub normal_floor: f64,
}

impl Default for FrenetThresholds {
    fn default() -> Self {
        FrenetThresholds {
            velocity_floor: 1e-10,
            normal_floor: 1e-8,
        }
    }
}

/// The helicity densities of the triad.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HelicityDensities {
    pub omega_t: f64,
    pub omega_n: f64,
    pub omega_b: f64,
    /// `n . curl b`
    pub n_curl_b: f64,
    /// `b . curl n`
    pub b_curl_n: f64,
    /// Always `n_curl_b + b_curl_n`.
    pub omega_nb: f64,
}

impl HelicityDensities {
    pub fn new(omega_t: f64, omega_n: f64, omega_b: f64, n_curl_b: f64, b_curl_n: f64) -> Self {
        HelicityDensities {
            omega_t,
            omega_n,
            omega_b,
            n_curl_b,
            b_curl_n,
            omega_nb: n_curl_b + b_curl_n,
        }
    }
}

/// Everything the streamline integrators need at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalGeometry {
    pub frame: Frame,
    pub helicities: HelicityDensities,
    pub speed: f64,
    /// `d/ds ln |v|`
    pub speed_log_deriv: f64,
}

type V3<T> = [T; 3];

fn dot<T: Scalar>(a: &V3<T>, b: &V3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross<T: Scalar>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn scale<T: Scalar>(a: &V3<T>, s: T) -> V3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

struct FrameParts<T> {
    speed: T,
    t: V3<T>,
    curl_t: V3<T>,
    n: V3<T>,
    b: V3<T>,
    normal_magnitude: T,
}

/// Frame from the field value and Jacobian `jac[i][j] = d v_i / d x_j`.
fn frame_core<T: Scalar>(
    v: &V3<T>,
    jac: &[V3<T>; 3],
    th: &FrenetThresholds,
    p_norm: f64,
) -> std::result::Result<FrameParts<T>, DegeneracyReport> {
    let speed = dot(v, v).sqrt();
    if !(speed.re() >= th.velocity_floor * (1.0 + p_norm)) {
        return Err(DegeneracyReport {
            kind: DegeneracyKind::ZeroVelocity,
            magnitude: speed.re(),
        });
    }
    let inv = T::constant(1.0) / speed;
    let inv3 = inv * inv * inv;
    let t = scale(v, inv);
    // d t_i / d x_j = J_ij / |v| - v_i (v . J_{.j}) / |v|^3
    let vj: V3<T> = std::array::from_fn(|j| v[0] * jac[0][j] + v[1] * jac[1][j] + v[2] * jac[2][j]);
    let dt = |i: usize, j: usize| jac[i][j] * inv - v[i] * vj[j] * inv3;
    let curl_t = [
        dt(2, 1) - dt(1, 2),
        dt(0, 2) - dt(2, 0),
        dt(1, 0) - dt(0, 1),
    ];
    let w = cross(&t, &curl_t);
    let normal_magnitude = dot(&w, &w).sqrt();
    if !(normal_magnitude.re() >= th.normal_floor) {
        let curl_norm = dot(&curl_t, &curl_t).sqrt().re();
        let kind = if curl_norm >= th.normal_floor {
            DegeneracyKind::CurlEigenvector
        } else {
            DegeneracyKind::VanishingNormal
        };
        return Err(DegeneracyReport {
            kind,
            magnitude: normal_magnitude.re(),
        });
    }
    let n = scale(&w, T::constant(1.0) / normal_magnitude);
    let b = cross(&t, &n);
    Ok(FrameParts {
        speed,
        t,
        curl_t,
        n,
        b,
        normal_magnitude,
    })
}

fn to_vec(a: &V3<f64>) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

pub fn frame_at(v: &VectorFieldSpec, p: &Vector3<f64>) -> Result<Frame> {
    frame_at_with(v, p, &FrenetThresholds::default())
}

pub fn frame_at_with(
    v: &VectorFieldSpec,
    p: &Vector3<f64>,
    th: &FrenetThresholds,
) -> Result<Frame> {
    let d = v.eval(&seed1(p))?;
    let value = d.map(|c| c.re);
    let jac = d.map(|c| c.du);
    let parts = frame_core(&value, &jac, th, p.norm()).map_err(Error::Degenerate)?;
    Ok(Frame {
        t: to_vec(&parts.t),
        n: to_vec(&parts.n),
        b: to_vec(&parts.b),
        normal_magnitude: parts.normal_magnitude,
    })
}

/// Helicity data computed in scalar type `W` from a field evaluated one
/// dual level above the frame.
struct HelicityParts<W> {
    frame: FrameParts<Dual<W>>,
    omega_t: W,
    omega_n: W,
    omega_b: W,
    n_curl_b: W,
    b_curl_n: W,
    speed_log_deriv: W,
}

fn helicity_core<W: Scalar>(
    v: &V3<Dual<Dual<W>>>,
    th: &FrenetThresholds,
    p_norm: f64,
) -> std::result::Result<HelicityParts<W>, DegeneracyReport> {
    let value: V3<Dual<W>> = v.map(|c| c.re);
    let jac: [V3<Dual<W>>; 3] = v.map(|c| c.du);
    let frame = frame_core(&value, &jac, th, p_norm)?;
    let re = |a: &V3<Dual<W>>| a.map(|c| c.re);
    let curl = |a: &V3<Dual<W>>| {
        [
            a[2].du[1] - a[1].du[2],
            a[0].du[2] - a[2].du[0],
            a[1].du[0] - a[0].du[1],
        ]
    };
    let (t, n, b) = (re(&frame.t), re(&frame.n), re(&frame.b));
    let (curl_n, curl_b) = (curl(&frame.n), curl(&frame.b));
    // d/ds ln|v| = v^T J v / |v|^3
    let v0 = re(&value);
    let j0: [V3<W>; 3] = jac.map(|row| row.map(|c| c.re));
    let jv: V3<W> = std::array::from_fn(|i| dot(&j0[i], &v0));
    let speed = frame.speed.re;
    let speed_log_deriv = dot(&v0, &jv) / (speed * speed * speed);
    Ok(HelicityParts {
        omega_t: dot(&t, &re(&frame.curl_t)),
        omega_n: dot(&n, &curl_n),
        omega_b: dot(&b, &curl_b),
        n_curl_b: dot(&n, &curl_b),
        b_curl_n: dot(&b, &curl_n),
        speed_log_deriv,
        frame,
    })
}

/// Frame, helicity densities, speed and `d/ds ln|v|` from one nested-jet evaluation.
pub fn local_geometry(
    v: &VectorFieldSpec,
    p: &Vector3<f64>,
    th: &FrenetThresholds,
) -> Result<LocalGeometry> {
    let d = v.eval(&seed2(p))?;
    let h = helicity_core::<f64>(&d, th, p.norm()).map_err(Error::Degenerate)?;
    let re = |a: &V3<Dual<f64>>| Vector3::new(a[0].re, a[1].re, a[2].re);
    Ok(LocalGeometry {
        frame: Frame {
            t: re(&h.frame.t),
            n: re(&h.frame.n),
            b: re(&h.frame.b),
            normal_magnitude: h.frame.normal_magnitude.re,
        },
        helicities: HelicityDensities::new(h.omega_t, h.omega_n, h.omega_b, h.n_curl_b, h.b_curl_n),
        speed: h.frame.speed.re,
        speed_log_deriv: h.speed_log_deriv,
    })
}

/// Helicity densities at `p`, exact to round-off.
pub fn helicities_at(v: &VectorFieldSpec, p: &Vector3<f64>) -> Result<HelicityDensities> {
    Ok(local_geometry(v, p, &FrenetThresholds::default())?.helicities)
}

/// Helicity densities from central-difference curls of the frame vectors,
/// each vector wrapped as a derived handle over [`frame_at_with`].
///
/// Independent of the nested-jet route in [`helicities_at`].
pub fn helicities_at_fd(
    v: &VectorFieldSpec,
    p: &Vector3<f64>,
    th: &FrenetThresholds,
    step: Option<f64>,
) -> Result<HelicityDensities> {
    let frame = frame_at_with(v, p, th)?;
    let handle = |pick: fn(&Frame) -> Vector3<f64>| {
        let v = v.clone();
        let th = *th;
        VectorHandle::derived(move |q| Ok(pick(&frame_at_with(&v, q, &th)?)), step)
    };
    let curl_t = calc3::curl(&handle(|f| f.t)?, p)?;
    let curl_n = calc3::curl(&handle(|f| f.n)?, p)?;
    let curl_b = calc3::curl(&handle(|f| f.b)?, p)?;
    Ok(HelicityDensities::new(
        frame.t.dot(&curl_t),
        frame.n.dot(&curl_n),
        frame.b.dot(&curl_b),
        frame.n.dot(&curl_b),
        frame.b.dot(&curl_n),
    ))
}

/// `t . grad ln|v|` at `p`.
pub fn speed_log_deriv(v: &VectorFieldSpec, p: &Vector3<f64>) -> Result<f64> {
    let th = FrenetThresholds::default();
    let d = v.eval(&seed1(p))?;
    let value = Vector3::new(d[0].re, d[1].re, d[2].re);
    let speed = value.norm();
    if !(speed >= th.velocity_floor * (1.0 + p.norm())) {
        return Err(Error::Degenerate(DegeneracyReport {
            kind: DegeneracyKind::ZeroVelocity,
            magnitude: speed,
        }));
    }
    let jv = Vector3::from_fn(|i, _| (0..3).map(|j| d[i].du[j] * value[j]).sum());
    Ok(value.dot(&jv) / speed.powi(3))
}

/// `d/ds Omega_b` by a five-point stencil along the tangent line through `p`.
///
/// The stencil points carry exact helicities, so the only error is the
/// stencil's own `O(h^4)` truncation plus round-off.
pub fn omega_b_arclength_derivative(
    v: &VectorFieldSpec,
    p: &Vector3<f64>,
    th: &FrenetThresholds,
) -> Result<f64> {
    let t = frame_at_with(v, p, th)?.t;
    let h = f64::EPSILON.powf(0.2) * p.norm().max(1.0);
    let omega_b = |k: f64| -> Result<f64> {
        Ok(local_geometry(v, &(p + t * (k * h)), th)?
            .helicities
            .omega_b)
    };
    Ok((omega_b(-2.0)? - 8.0 * omega_b(-1.0)? + 8.0 * omega_b(1.0)? - omega_b(2.0)?) / (12.0 * h))
}

/// `d/ds Omega_b` from third-order nested jets; used to cross-check the stencil.
pub fn omega_b_arclength_derivative_exact(
    v: &VectorFieldSpec,
    p: &Vector3<f64>,
    th: &FrenetThresholds,
) -> Result<f64> {
    let seeds: V3<Dual<Dual<Dual<f64>>>> = std::array::from_fn(|axis| {
        Dual::variable(Dual::variable(Dual::variable(p[axis], axis), axis), axis)
    });
    let d = v.eval(&seeds)?;
    let h = helicity_core::<Dual<f64>>(&d, th, p.norm()).map_err(Error::Degenerate)?;
    let t = h.frame.t.map(|c| c.re.re);
    Ok((0..3).map(|i| t[i] * h.omega_b.du[i]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_vector;

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    fn field(src: &str) -> VectorFieldSpec {
        parse_vector(src).unwrap()
    }

    #[test]
    fn circular_frame_by_hand() {
        let f = frame_at(&field("-y, x, 0"), &v(1.0, 0.0, 0.0)).unwrap();
        assert!((f.t - v(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert!((f.n - v(1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((f.b - v(0.0, 0.0, -1.0)).norm() < 1e-15);
        // curl t = (0, 0, 1/r), |t x curl t| = 1/r
        assert!((f.normal_magnitude - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_field_has_no_normal() {
        let err = frame_at(&field("1, 0, 0"), &v(0.3, -1.0, 2.0)).unwrap_err();
        let report = err.degeneracy_report().unwrap();
        assert_eq!(report.kind, DegeneracyKind::VanishingNormal);
        assert_eq!(report.magnitude, 0.0);
    }

    #[test]
    fn zero_velocity_detected() {
        let err = frame_at(&field("-y, x, 0"), &v(0.0, 0.0, 4.0)).unwrap_err();
        assert_eq!(
            err.degeneracy_report().unwrap().kind,
            DegeneracyKind::ZeroVelocity
        );
    }

    #[test]
    fn beltrami_field_is_curl_eigenvector() {
        // unit-speed ABC-type flow: curl t = t everywhere
        let err = frame_at(&field("sin(z), cos(z), 0"), &v(0.1, 0.2, 0.3)).unwrap_err();
        let report = err.degeneracy_report().unwrap();
        assert_eq!(report.kind, DegeneracyKind::CurlEigenvector);
        assert!(report.magnitude < 1e-8);
    }

    #[test]
    fn euler_top_frame_is_orthonormal() {
        let f = frame_at(&field("y*z, x*z, x*y"), &v(1.0, 2.0, 3.0)).unwrap();
        assert!(f.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn circular_helicities_vanish() {
        let h = helicities_at(&field("-y, x, 0"), &v(1.0, 0.0, 0.0)).unwrap();
        assert!(h.omega_n.abs() < 1e-14);
        assert!(h.omega_b.abs() < 1e-14);
        assert!(h.omega_nb.abs() < 1e-14);
    }

    #[test]
    fn helical_omega_t() {
        // t . curl t = 2 / (r^2 + 1)
        let h = helicities_at(&field("-y, x, 1"), &v(1.0, 0.0, 0.0)).unwrap();
        assert!((h.omega_t - 1.0).abs() < 1e-14);
        let h = helicities_at(&field("-y, x, 1"), &v(0.6, 0.8, 2.0)).unwrap();
        assert!((h.omega_t - 1.0).abs() < 1e-14);
        let h = helicities_at(&field("-y, x, 1"), &v(2.0, 0.0, 0.0)).unwrap();
        assert!((h.omega_t - 0.4).abs() < 1e-14);
    }

    #[test]
    fn omega_nb_is_the_sum() {
        let h = helicities_at(&field("y*z, x*z, x*y"), &v(0.3, -1.2, 0.7)).unwrap();
        assert_eq!(h.omega_nb - (h.n_curl_b + h.b_curl_n), 0.0);
    }

    #[test]
    fn jet_and_difference_helicities_agree() {
        let f = field("y*z, x*z, x*y");
        for p in [v(1.0, 2.0, 3.0), v(0.3, -1.2, 0.7), v(-0.8, 0.5, 1.1)] {
            let exact = helicities_at(&f, &p).unwrap();
            let fd = helicities_at_fd(&f, &p, &FrenetThresholds::default(), None).unwrap();
            for (a, b) in [
                (exact.omega_t, fd.omega_t),
                (exact.omega_n, fd.omega_n),
                (exact.omega_b, fd.omega_b),
                (exact.n_curl_b, fd.n_curl_b),
                (exact.b_curl_n, fd.b_curl_n),
            ] {
                assert!((a - b).abs() < 1e-7, "{a} vs {b} at {p:?}");
            }
        }
    }

    #[test]
    fn speed_log_deriv_examples() {
        assert!(
            speed_log_deriv(&field("-y, x, 0"), &v(0.7, -0.2, 1.0))
                .unwrap()
                .abs()
                < 1e-15
        );
        assert!(
            (speed_log_deriv(&field("x, y, z"), &v(1.0, 0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15
        );
        let unit = field("cos(z), sin(z), 0");
        assert!(speed_log_deriv(&unit, &v(0.2, 0.1, 0.9)).unwrap().abs() < 1e-15);
        assert!(matches!(
            speed_log_deriv(&field("x, y, z"), &Vector3::zeros()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn omega_b_derivative_stencil_matches_third_order_jets() {
        let f = field("y*z, x*z, x*y");
        let th = FrenetThresholds::default();
        for p in [v(1.0, 2.0, 3.0), v(0.3, -1.2, 0.7)] {
            let stencil = omega_b_arclength_derivative(&f, &p, &th).unwrap();
            let exact = omega_b_arclength_derivative_exact(&f, &p, &th).unwrap();
            assert!(
                (stencil - exact).abs() < 1e-9 * exact.abs().max(1.0),
                "{stencil} vs {exact}"
            );
        }
    }
}
