//! Dormand-Prince 5(4) embedded Runge-Kutta pair with step-size control.
//!
//! The right-hand side is fallible: a degenerate frame at a stage point
//! aborts the step and is handed back to the caller together with the
//! stage abscissa.

use crate::error::Error;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub(crate) struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub min_step: f64,
    pub max_step: f64,
}

/// Why [`advance`] stopped early.
#[derive(Debug)]
pub(crate) enum StepFailure {
    /// The right-hand side failed at abscissa `at`.
    Rhs {
        at: f64,
        error: Error,
    },
    Underflow {
        at: f64,
        h: f64,
    },
}

/// Integrates `y' = f(s, y)` from `s0` to `s1 > s0`, landing exactly on `s1`.
///
/// `h` is the step-size guess on entry and the controller's proposal for the
/// next call on exit.
pub(crate) fn advance<F>(
    mut f: F,
    s0: f64,
    y: &mut [f64],
    s1: f64,
    h: &mut f64,
    tol: &Tolerances,
) -> Result<(), StepFailure>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), Error>,
{
    let dim = y.len();
    let mut k = vec![vec![0.0; dim]; 7];
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut s = s0;
    let mut fsal = false;
    let mut rejected = false;
    *h = h.min(tol.max_step);

    while s < s1 {
        let remaining = s1 - s;
        let last = *h >= remaining * (1.0 - 1e-12);
        let step = if last { remaining } else { *h };
        if step < tol.min_step && !last {
            return Err(StepFailure::Underflow { at: s, h: step });
        }
        if !fsal {
            f(s, y, &mut k[0]).map_err(|error| StepFailure::Rhs { at: s, error })?;
        }
        for i in 1..7 {
            for d in 0..dim {
                let mut acc = y[d];
                for (j, kj) in k.iter().enumerate().take(i) {
                    acc += step * A[i][j] * kj[d];
                }
                stage[d] = acc;
            }
            let at = s + C[i] * step;
            let (done, rest) = k.split_at_mut(i);
            let _ = done;
            f(at, &stage, &mut rest[0]).map_err(|error| StepFailure::Rhs { at, error })?;
        }
        // the seventh stage is evaluated at the fifth-order solution
        y_new.copy_from_slice(&stage);

        let mut err = 0.0;
        for d in 0..dim {
            let e: f64 = (0..7).map(|i| E[i] * k[i][d]).sum::<f64>() * step;
            let sc = tol.atol + tol.rtol * y[d].abs().max(y_new[d].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / dim as f64).sqrt();

        if err <= 1.0 || step <= tol.min_step {
            s = if last { s1 } else { s + step };
            y.copy_from_slice(&y_new);
            k.swap(0, 6);
            fsal = true;
            let mut factor = if err == 0.0 {
                5.0
            } else {
                0.9 * err.powf(-0.2)
            };
            factor = factor.clamp(0.2, 5.0);
            if rejected {
                factor = factor.min(1.0);
            }
            rejected = false;
            if !last || factor < 1.0 {
                *h = (step * factor).min(tol.max_step);
            }
        } else {
            rejected = true;
            fsal = true;
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            *h = step * factor;
            if *h < tol.min_step {
                return Err(StepFailure::Underflow { at: s, h: *h });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol(rtol: f64) -> Tolerances {
        Tolerances {
            rtol,
            atol: rtol,
            min_step: 1e-14,
            max_step: 1.0,
        }
    }

    #[test]
    fn exponential_decay() {
        let mut y = [1.0];
        let mut h = 0.1;
        advance(
            |_, y, dy| {
                dy[0] = -y[0];
                Ok(())
            },
            0.0,
            &mut y,
            3.0,
            &mut h,
            &tol(1e-10),
        )
        .unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_full_period() {
        let mut y = [1.0, 0.0];
        let mut h = 0.1;
        let period = 2.0 * std::f64::consts::PI;
        advance(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            &mut y,
            period,
            &mut h,
            &tol(1e-11),
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9, "{y:?}");
    }

    #[test]
    fn quartic_polynomial_is_exact() {
        // fifth-order weights integrate s^4 exactly
        let mut y = [0.0];
        let mut h = 0.5;
        advance(
            |s, _, dy| {
                dy[0] = 5.0 * s.powi(4);
                Ok(())
            },
            0.0,
            &mut y,
            2.0,
            &mut h,
            &tol(1e-6),
        )
        .unwrap();
        assert!((y[0] - 32.0).abs() < 1e-12);
    }

    #[test]
    fn rhs_failure_reports_abscissa() {
        let mut y = [0.0];
        let mut h = 0.1;
        let err = advance(
            |s, _, dy| {
                if s > 0.55 {
                    return Err(Error::InvalidInput("boom".into()));
                }
                dy[0] = 1.0;
                Ok(())
            },
            0.0,
            &mut y,
            1.0,
            &mut h,
            &tol(1e-8),
        )
        .unwrap_err();
        match err {
            StepFailure::Rhs { at, .. } => assert!(at > 0.55 && at <= 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
