//! Small numerical helpers: real polynomial roots of degree ≤ 3 and adaptive
//! Simpson quadrature.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real roots of `c0 + c1 t + c2 t² + c3 t³`, ascending, duplicates merged.
///
/// Leading coefficients that are exactly zero reduce the degree. The
/// identically zero polynomial has no isolated roots and yields an empty list.
pub fn real_roots_upto_cubic(coeffs: [f64; 4]) -> Vec<f64> {
    let [c0, c1, c2, c3] = coeffs;
    let mut roots = if c3 != 0.0 {
        cubic_roots(c2 / c3, c1 / c3, c0 / c3)
    } else if c2 != 0.0 {
        quadratic_roots(c2, c1, c0)
    } else if c1 != 0.0 {
        vec![-c0 / c1]
    } else {
        Vec::new()
    };
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    // Exact zeros print better than -0.0.
    for r in &mut roots {
        if *r == 0.0 {
            *r = 0.0;
        }
    }
    roots
}

/// Real roots of `a t² + b t + c` (`a ≠ 0`) by the cancellation-free formula.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    if disc == 0.0 {
        return vec![-b / (2.0 * a)];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        // b = 0 and c = 0 is covered by disc == 0, so here b = 0, ac < 0.
        let r = (-c / a).sqrt();
        return vec![-r, r];
    }
    vec![q / a, c / q]
}

/// Real roots of the monic cubic `t³ + a t² + b t + c`.
fn cubic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if c == 0.0 {
        let mut r = vec![0.0];
        r.extend(quadratic_roots(1.0, a, b));
        return r;
    }
    let q = (a * a - 3.0 * b) / 9.0;
    let r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
    let shift = a / 3.0;
    let roots = if r * r < q * q * q {
        let theta = (r / q.powf(1.5)).clamp(-1.0, 1.0).acos();
        let m = -2.0 * q.sqrt();
        let tau = std::f64::consts::TAU;
        vec![
            m * (theta / 3.0).cos() - shift,
            m * ((theta + tau) / 3.0).cos() - shift,
            m * ((theta - tau) / 3.0).cos() - shift,
        ]
    } else {
        let big_a = -r.signum() * (r.abs() + (r * r - q * q * q).sqrt()).cbrt();
        let big_b = if big_a == 0.0 { 0.0 } else { q / big_a };
        vec![big_a + big_b - shift]
    };
    roots
        .into_iter()
        .map(|t| polish_cubic(t, a, b, c))
        .collect()
}

fn polish_cubic(mut t: f64, a: f64, b: f64, c: f64) -> f64 {
    for _ in 0..3 {
        let f = ((t + a) * t + b) * t + c;
        let df = (3.0 * t + 2.0 * a) * t + b;
        if df == 0.0 || f == 0.0 {
            break;
        }
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        let next = t - step;
        let fnext = ((next + a) * next + b) * next + c;
        if fnext.abs() >= f.abs() {
            break;
        }
        t = next;
    }
    t
}

/// Carlson's symmetric elliptic integral `R_F(x, y, z)`, by duplication.
///
/// Arguments may be complex off the negative real axis, with at most one zero.
pub fn carlson_rf(x: Complex64, y: Complex64, z: Complex64) -> Result<Complex64> {
    const ERRTOL: f64 = 0.0008;
    let (mut x, mut y, mut z) = (x, y, z);
    let zeros = [x, y, z].iter().filter(|v| v.norm() == 0.0).count();
    if zeros > 1
        || [x, y, z]
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(Error::Domain(
            "R_F needs finite arguments with at most one zero".into(),
        ));
    }
    for _ in 0..200 {
        let a = (x + y + z) / 3.0;
        let dx = (a - x) / a;
        let dy = (a - y) / a;
        let dz = (a - z) / a;
        if dx.norm().max(dy.norm()).max(dz.norm()) < ERRTOL {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            let series = 1.0 + (e2 / 24.0 - 0.1 - 3.0 / 44.0 * e3) * e2 + e3 / 14.0;
            return Ok(series / a.sqrt());
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
    }
    Err(Error::Numerical("R_F duplication did not converge".into()))
}
