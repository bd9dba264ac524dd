//! Real evaluation of the Weierstrass ℘ function.
//!
//! Near the origin ℘ is summed from its Laurent series; elsewhere the
//! argument is halved until it lies inside the series radius and the
//! duplication formula is applied back up.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{carlson_rf, real_roots_upto_cubic};

/// Values with `|℘| > POLE_GUARD` are reported as pole proximity.
pub const POLE_GUARD: f64 = 1e12;

/// Number of Laurent coefficients `c_2..c_8` (terms through `z^14`).
const LAURENT_TERMS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeierstrassInvariants {
    pub g2: f64,
    pub g3: f64,
    /// `g2³ − 27 g3²`.
    pub discriminant: f64,
}

impl WeierstrassInvariants {
    pub fn new(g2: f64, g3: f64) -> Self {
        Self {
            g2,
            g3,
            discriminant: g2 * g2 * g2 - 27.0 * g3 * g3,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.discriminant == 0.0
    }

    /// `4x³ − g2 x − g3`.
    pub fn cubic(&self, x: f64) -> f64 {
        4.0 * x * x * x - self.g2 * x - self.g3
    }

    /// Real roots of the cubic, ascending.
    pub fn real_roots(&self) -> Vec<f64> {
        real_roots_upto_cubic([-self.g3, -self.g2, 0.0, 4.0])
    }

    /// Relative defect of `(℘′)² = 4℘³ − g2℘ − g3`.
    pub fn curve_residual(&self, wp: f64, wp_prime: f64) -> f64 {
        let lhs = wp_prime * wp_prime;
        let rhs = self.cubic(wp);
        let scale = lhs
            .abs()
            .max((4.0 * wp * wp * wp).abs())
            .max((self.g2 * wp).abs())
            .max(self.g3.abs())
            .max(f64::MIN_POSITIVE);
        (lhs - rhs).abs() / scale
    }

    fn laurent(&self) -> [f64; LAURENT_TERMS + 1] {
        let mut c = [0.0; LAURENT_TERMS + 1];
        c[2] = self.g2 / 20.0;
        c[3] = self.g3 / 28.0;
        for k in 4..=LAURENT_TERMS {
            let s: f64 = (2..=k - 2).map(|m| c[m] * c[k - m]).sum();
            c[k] = 3.0 * s / (((2 * k + 1) * (k - 3)) as f64);
        }
        c
    }

    /// Radius inside which the Laurent sum is used.
    pub fn series_radius(&self) -> f64 {
        let mu = self.g2.abs().powf(0.25).max(self.g3.abs().powf(1.0 / 6.0));
        if mu == 0.0 {
            f64::INFINITY
        } else {
            0.25 / mu
        }
    }

    /// `(z²℘(z), z³℘′(z))` from the Laurent series; regular at `z = 0`.
    pub fn scaled_series(&self, z: f64) -> (f64, f64) {
        let c = self.laurent();
        let z2 = z * z;
        let mut p = 0.0;
        let mut dp = 0.0;
        for k in (2..=LAURENT_TERMS).rev() {
            p = p * z2 + c[k];
            dp = dp * z2 + (2 * k - 2) as f64 * c[k];
        }
        // z²℘ = 1 + Σ c_k z^{2k}, z³℘′ = −2 + Σ (2k−2) c_k z^{2k}
        let z4 = z2 * z2;
        (1.0 + p * z4, -2.0 + dp * z4)
    }
}

/// ℘ and ℘′ at real `t`.
pub fn wp_eval(t: f64, inv: &WeierstrassInvariants) -> Result<(f64, f64)> {
    if !(t.is_finite() && inv.g2.is_finite() && inv.g3.is_finite()) {
        return Err(Error::Domain(
            "℘ needs finite argument and invariants".into(),
        ));
    }
    if t == 0.0 {
        return Err(Error::PoleProximity("℘ has a pole at t = 0".into()));
    }
    // Reduce into (−ω, ω] so that poles are handled by the series.
    let (t, sign) = match real_half_period(inv) {
        Ok(w) if w.is_finite() && w > 0.0 => {
            let r = t - 2.0 * w * (t / (2.0 * w)).round();
            (r.abs(), if r < 0.0 { -1.0 } else { 1.0 })
        }
        _ => (t.abs(), t.signum()),
    };
    if t == 0.0 {
        return Err(Error::PoleProximity(
            "t is a lattice point, a pole of ℘".into(),
        ));
    }
    let r0 = inv.series_radius();
    let mut n = 0;
    let mut z = t;
    while z.abs() > r0 {
        z *= 0.5;
        n += 1;
    }
    let (zp, zdp) = inv.scaled_series(z);
    let mut p = zp / (z * z);
    let mut dp = zdp / (z * z * z);
    // ℘(2z) = R(℘(z)) with R = ((x² + g2/4)² + 2g3x) / (4x³ − g2x − g3),
    // ℘′(2z) = R′(℘(z))·℘′(z)/2.
    let (g2, g3) = (inv.g2, inv.g3);
    for _ in 0..n {
        let q = p * p + 0.25 * g2;
        let num = q * q + 2.0 * g3 * p;
        let den = inv.cubic(p);
        if den == 0.0 {
            return Err(Error::PoleProximity(format!("t = {t} is a pole of ℘")));
        }
        let dnum = 4.0 * p * q + 2.0 * g3;
        let dden = 12.0 * p * p - g2;
        let r = num / den;
        let dr = (dnum - r * dden) / den;
        dp *= 0.5 * dr;
        p = r;
        if !p.is_finite() || p.abs() > POLE_GUARD {
            return Err(Error::PoleProximity(format!(
                "t = {t} is within pole range of ℘ (|℘| > {POLE_GUARD:e})"
            )));
        }
    }
    if p.abs() > POLE_GUARD {
        return Err(Error::PoleProximity(format!(
            "t = {t} is within pole range of ℘ (|℘| > {POLE_GUARD:e})"
        )));
    }
    Ok((p, sign * dp))
}

/// `∫_p^∞ dx / √(4x³ − g2x − g3)` for `p` at or above the largest real root:
/// the `z ∈ (0, ω]` with `℘(z) = p`, `℘′(z) ≤ 0`.
pub fn inverse_wp(p: f64, inv: &WeierstrassInvariants) -> Result<f64> {
    let roots = inv.real_roots();
    let e_max = *roots
        .last()
        .ok_or_else(|| Error::Numerical("cubic without real roots".into()))?;
    if !p.is_finite() || p < e_max - 1e-12 * (1.0 + e_max.abs()) {
        return Err(Error::Domain(format!(
            "{p} lies below the largest root {e_max} of the Weierstrass cubic"
        )));
    }
    let p = p.max(e_max);
    // 4x³ − g2x − g3 = 4(x − e)(x² + ex + e² − g2/4)
    let e = e_max;
    let disc = inv.g2 - 3.0 * e * e;
    let (r1, r2) = if disc >= 0.0 {
        let s = disc.sqrt();
        (
            Complex64::new(0.5 * (-e + s), 0.0),
            Complex64::new(0.5 * (-e - s), 0.0),
        )
    } else {
        let s = (-disc).sqrt();
        (
            Complex64::new(-0.5 * e, 0.5 * s),
            Complex64::new(-0.5 * e, -0.5 * s),
        )
    };
    let pc = Complex64::new(p, 0.0);
    let v = carlson_rf(Complex64::new(p - e, 0.0), pc - r1, pc - r2)?;
    Ok(v.re)
}

/// Real half-period `ω`: the first positive zero of ℘′. Infinite when the
/// largest root of the cubic is repeated, which is reported as degenerate.
pub fn real_half_period(inv: &WeierstrassInvariants) -> Result<f64> {
    let scale = (inv.g2.abs().powi(3)).max(27.0 * inv.g3 * inv.g3);
    if inv.discriminant.abs() <= 1e-12 * scale && inv.g3 <= 0.0 {
        return Err(Error::Degenerate(
            "repeated top root: the real period is infinite".into(),
        ));
    }
    let roots = inv.real_roots();
    let e_max = *roots
        .last()
        .ok_or_else(|| Error::Numerical("cubic without real roots".into()))?;
    inverse_wp(e_max, inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::integrate::rk4_step;

    #[test]
    fn degenerate_lattice() {
        let inv = WeierstrassInvariants::new(0.0, 0.0);
        assert!(inv.is_degenerate());
        let (p, dp) = wp_eval(0.5, &inv).unwrap();
        assert_eq!((p, dp), (4.0, -16.0));
    }

    #[test]
    fn pole_guard() {
        let inv = WeierstrassInvariants::new(0.0, 1.0);
        assert!(matches!(wp_eval(0.0, &inv), Err(Error::PoleProximity(_))));
        let w = real_half_period(&inv).unwrap();
        assert!(matches!(
            wp_eval(2.0 * w + 1e-7, &inv),
            Err(Error::PoleProximity(_))
        ));
        assert!(matches!(wp_eval(f64::NAN, &inv), Err(Error::Domain(_))));
    }

    #[test]
    fn curve_identity_and_ode_oracle() {
        let inv = WeierstrassInvariants::new(0.0, 1.0);
        let (p, dp) = wp_eval(0.7, &inv).unwrap();
        assert!(inv.curve_residual(p, dp) <= 1e-9);

        // ℘'' = 6℘² − g2/2 integrated from the series seed at t = 0.1.
        let t0 = 0.1;
        let (p0, dp0) = wp_eval(t0, &inv).unwrap();
        let f = |_t: f64, s: &[f64; 2]| [s[1], 6.0 * s[0] * s[0] - 0.5 * inv.g2];
        let h = 1e-5;
        let n = ((0.7 - t0) / h).round() as usize;
        let mut s = [p0, dp0];
        for i in 0..n {
            s = rk4_step(&f, t0 + i as f64 * h, s, h);
        }
        assert!(
            (s[0] - p).abs() <= 1e-8 * p.abs().max(1.0),
            "{} vs {}",
            s[0],
            p
        );
        assert!((s[1] - dp).abs() <= 1e-8 * dp.abs().max(1.0));
    }

    #[test]
    fn inverse_matches_forward() {
        for (g2, g3) in [(0.0, 1.0), (4.0, -1.0), (12.0, 4.0), (0.0, -0.3)] {
            let inv = WeierstrassInvariants::new(g2, g3);
            let w = real_half_period(&inv).unwrap();
            for frac in [0.1, 0.4, 0.8] {
                let t = frac * w;
                let (p, dp) = wp_eval(t, &inv).unwrap();
                assert!(dp < 0.0);
                let back = inverse_wp(p, &inv).unwrap();
                assert!((back - t).abs() < 1e-9, "g2={g2} g3={g3} t={t} back={back}");
            }
            let (_, dp) = wp_eval(w, &inv).unwrap();
            assert!(dp.abs() < 1e-6);
        }
    }

    #[test]
    fn repeated_top_root_has_no_period() {
        // 4x³ − 3x + 1 = (x + 1)(2x − 1)²
        let inv = WeierstrassInvariants::new(3.0, -1.0);
        assert!(matches!(real_half_period(&inv), Err(Error::Degenerate(_))));
        assert!(real_half_period(&WeierstrassInvariants::new(3.0, 1.0)).is_ok());
    }

    #[test]
    fn identity_holds_over_a_period() {
        for (g2, g3) in [(0.0, 1.0), (5.0, 1.0), (0.0, -2.0), (1.0, 0.0)] {
            let inv = WeierstrassInvariants::new(g2, g3);
            let w = real_half_period(&inv).unwrap();
            let mut t = 0.05;
            while t < 2.0 * w - 0.05 {
                let (p, dp) = wp_eval(t, &inv).unwrap();
                assert!(inv.curve_residual(p, dp) <= 1e-9, "g2={g2} g3={g3} t={t}");
                t += 0.037;
            }
        }
    }

    #[test]
    fn odd_derivative_and_periodicity() {
        let inv = WeierstrassInvariants::new(4.0, -1.0);
        let w = real_half_period(&inv).unwrap();
        let (p, dp) = wp_eval(0.3, &inv).unwrap();
        let (pm, dpm) = wp_eval(-0.3, &inv).unwrap();
        assert_eq!((p, dp), (pm, -dpm));
        let (p3, dp3) = wp_eval(0.3 + 6.0 * w, &inv).unwrap();
        assert!((p3 - p).abs() <= 1e-12 * p.abs() && (dp3 - dp).abs() <= 1e-11 * dp.abs());
    }

    proptest::proptest! {
        #[test]
        fn curve_identity_holds(g2 in -20.0f64..20.0, g3 in -20.0f64..20.0, t in 0.01f64..10.0) {
            let inv = WeierstrassInvariants::new(g2, g3);
            if let Ok((p, dp)) = wp_eval(t, &inv) {
                proptest::prop_assert!(inv.curve_residual(p, dp) <= 1e-9, "residual {}", inv.curve_residual(p, dp));
            }
        }
    }
}
