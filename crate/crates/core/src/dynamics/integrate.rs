//! Fixed-step RK4 and adaptive Dormand–Prince integration.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::VectorField2;

/// States with a component beyond this magnitude count as blown up.
pub const BLOW_UP: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Mode {
    Rk4 { h: f64 },
    Rk45 { rtol: f64, atol: f64 },
}

impl Default for Mode {
    fn default() -> Self {
        Mode::Rk4 { h: 1e-3 }
    }
}

impl Mode {
    pub fn adaptive() -> Self {
        Mode::Rk45 {
            rtol: 1e-9,
            atol: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Termination {
    TimeLimit,
    BlowUp,
    PoleGuard,
    LeftWindow,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    /// `(t, x, y)` with strictly increasing `t`.
    pub samples: Vec<[f64; 3]>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> [f64; 3] {
        *self
            .samples
            .last()
            .expect("trajectory has at least the start sample")
    }
}

/// One classical Runge–Kutta step for an `N`-dimensional system.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: [f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let add = |a: &[f64; N], b: &[f64; N], s: f64| {
        let mut o = *a;
        for k in 0..N {
            o[k] += s * b[k];
        }
        o
    };
    let k1 = f(t, &y);
    let k2 = f(t + 0.5 * h, &add(&y, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &add(&y, &k2, 0.5 * h));
    let k4 = f(t + h, &add(&y, &k3, h));
    let mut out = y;
    for k in 0..N {
        out[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
    out
}

fn blown<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP)
}

/// Fixed-step RK4 from `t = 0` to `t_max`. The last step is shortened to
/// land on `t_max` exactly. Returns the samples and whether a blow-up
/// stopped the run.
pub fn rk4_fixed<const N: usize, F>(
    f: &F,
    y0: [f64; N],
    t_max: f64,
    h: f64,
) -> (Vec<(f64, [f64; N])>, bool)
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut out = vec![(0.0, y0)];
    if t_max <= 0.0 {
        return (out, false);
    }
    let n = ((t_max / h) - 1e-9).ceil().max(1.0) as usize;
    let mut y = y0;
    for i in 0..n {
        let t = i as f64 * h;
        let t_next = if i + 1 == n {
            t_max
        } else {
            (i + 1) as f64 * h
        };
        y = rk4_step(f, t, y, t_next - t);
        if blown(&y) {
            if y.iter().all(|v| v.is_finite()) {
                out.push((t_next, y));
            }
            return (out, true);
        }
        out.push((t_next, y));
    }
    (out, false)
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
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
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince integration from `t = 0` to `t_max`.
pub fn rk45<const N: usize, F>(
    f: &F,
    y0: [f64; N],
    t_max: f64,
    rtol: f64,
    atol: f64,
) -> (Vec<(f64, [f64; N])>, bool)
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut out = vec![(0.0, y0)];
    if t_max <= 0.0 {
        return (out, false);
    }
    let mut t = 0.0;
    let mut y = y0;
    let mut h = (t_max * 1e-3).min(1e-2);
    while t < t_max {
        if t + h > t_max {
            h = t_max - t;
        }
        if h <= 1e-14 * (1.0 + t.abs()) {
            return (out, true);
        }
        let mut k = [[0.0; N]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for n in 0..N {
                    ys[n] += h * A[s][j] * kj[n];
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for n in 0..N {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][n];
                d4 += B4[s] * k[s][n];
            }
            y5[n] += h * d5;
            let sc = atol + rtol * y[n].abs().max(y5[n].abs());
            err = err.max((h * (d5 - d4)).abs() / sc);
        }
        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            t = if t_max - (t + h) <= 1e-15 * t_max {
                t_max
            } else {
                t + h
            };
            y = y5;
            if blown(&y) {
                if y.iter().all(|v| v.is_finite()) {
                    out.push((t, y));
                }
                return (out, true);
            }
            out.push((t, y));
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    (out, false)
}

/// Integrates a planar field forward in time from `start`.
pub fn integrate(
    field: &VectorField2,
    start: [f64; 2],
    t_max: f64,
    mode: Mode,
) -> Result<Trajectory> {
    if !(start[0].is_finite() && start[1].is_finite()) {
        return Err(Error::Domain("start point must be finite".into()));
    }
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::Domain(format!(
            "t_max must be finite and >= 0, got {t_max}"
        )));
    }
    let rhs = |_t: f64, s: &[f64; 2]| field.eval(s[0], s[1]);
    let (samples, blew) = match mode {
        Mode::Rk4 { h } => {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::Domain(format!("step must be positive, got {h}")));
            }
            rk4_fixed(&rhs, start, t_max, h)
        }
        Mode::Rk45 { rtol, atol } => rk45(&rhs, start, t_max, rtol, atol),
    };
    Ok(Trajectory {
        samples: samples.into_iter().map(|(t, s)| [t, s[0], s[1]]).collect(),
        termination: if blew {
            Termination::BlowUp
        } else {
            Termination::TimeLimit
        },
    })
}

/// Integrates backwards in time; `t` in the samples is the elapsed time.
pub fn integrate_backward(
    field: &VectorField2,
    start: [f64; 2],
    t_max: f64,
    mode: Mode,
) -> Result<Trajectory> {
    integrate(&field.reversed(), start, t_max, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_family, FamilySpec};

    #[test]
    fn zero_length_request() {
        let f = build_family(&FamilySpec::I { c: 1.0 }).unwrap();
        let tr = integrate(&f, [1.0, 0.0], 0.0, Mode::default()).unwrap();
        assert_eq!(tr.samples, vec![[0.0, 1.0, 0.0]]);
        assert_eq!(tr.termination, Termination::TimeLimit);
    }

    #[test]
    fn family_two_blows_up_at_tan_pole() {
        let f = build_family(&FamilySpec::II { b: 1.0 }).unwrap();
        let tr = integrate(&f, [0.0, 1.0], 1.6, Mode::default()).unwrap();
        assert_eq!(tr.termination, Termination::BlowUp);
        let t = tr.last()[0];
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 2e-3, "t = {t}");
        let tr = integrate(&f, [0.0, 1.0], 1.6, Mode::adaptive()).unwrap();
        assert_eq!(tr.termination, Termination::BlowUp);
    }

    #[test]
    fn samples_are_evenly_spaced() {
        let f = build_family(&FamilySpec::I { c: 1.0 }).unwrap();
        let tr = integrate(&f, [1.0, 0.0], 0.5, Mode::Rk4 { h: 0.01 }).unwrap();
        assert_eq!(tr.samples.len(), 51);
        for (i, s) in tr.samples.iter().enumerate() {
            assert!((s[0] - i as f64 * 0.01).abs() < 1e-15);
        }
        assert_eq!(tr.last()[0], 0.5);
    }

    #[test]
    fn adaptive_matches_tangent() {
        let f = build_family(&FamilySpec::II { b: 1.0 }).unwrap();
        let tr = integrate(&f, [0.0, 1.0], 1.0, Mode::adaptive()).unwrap();
        let [t, x, _] = tr.last();
        assert_eq!(t, 1.0);
        assert!((x - 1f64.tan()).abs() < 1e-7);
    }

    #[test]
    fn nonfinite_start_rejected() {
        let f = build_family(&FamilySpec::I { c: 1.0 }).unwrap();
        assert!(integrate(&f, [f64::NAN, 0.0], 1.0, Mode::default()).is_err());
    }
}
