//! Closed-form integral curves: ℘-curves for the cubic Hamiltonians and
//! tangent curves for the quadratic first integrals.

use serde::Serialize;

use super::weierstrass::{
    inverse_wp, real_half_period, wp_eval, WeierstrassInvariants, POLE_GUARD,
};
use crate::error::{Error, Result};
use crate::families::{Family, FamilySpec};

/// Tangent arguments closer than this to `π/2 + nπ` count as a pole.
const TAN_POLE_GUARD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CurveKind {
    PCurve,
    TanCurve,
}

/// Which real component of the cubic level set carries the orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PBranch {
    /// `℘(t + k0)` on the real line: the component reaching infinity.
    Unbounded,
    /// `e3 + K / (℘(t + k0) − e3)`: the bounded oval between `e3` and `e2`.
    Oval,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralCurve {
    pub kind: CurveKind,
    pub family: Family,
    /// `x = scale·X + shift` with `X` the ℘-expression or the tangent.
    pub scale: f64,
    pub shift: f64,
    /// ℘-curves: the time offset `k0`.
    pub k0: Option<f64>,
    /// Tangent curves: `k1 = y − bx²` on the orbit and the offset `k2`.
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    /// Tangent curves: the signed rate multiplying `t + k2`.
    pub rate: Option<f64>,
    pub invariants: Option<WeierstrassInvariants>,
    pub branch: Option<PBranch>,
    /// Value of the first integral on the orbit.
    pub level: f64,
    /// Real half-period of the lattice (℘-curves).
    pub half_period: Option<f64>,
    #[serde(skip)]
    oval: Option<OvalData>,
    #[serde(skip)]
    quadratic: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct OvalData {
    e3: f64,
    k: f64,
}

impl IntegralCurve {
    /// `(x(t), ẋ(t))`.
    pub fn eval(&self, t: f64) -> Result<[f64; 2]> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("time must be finite, got {t}")));
        }
        match self.kind {
            CurveKind::TanCurve => {
                let k2 = self.k2.unwrap_or_default();
                let rate = self.rate.unwrap_or_default();
                let k1 = self.k1.unwrap_or_default();
                let arg = rate * (t + k2);
                if arg.cos().abs() < TAN_POLE_GUARD {
                    return Err(Error::PoleProximity(format!(
                        "tangent argument {arg} is at a pole"
                    )));
                }
                let x = self.scale * arg.tan();
                Ok([x, k1 + self.quadratic * x * x])
            }
            CurveKind::PCurve => {
                let inv = self.invariants.expect("℘-curve carries invariants");
                let z = t + self.k0.unwrap_or_default();
                let (w, dw) = match self.oval {
                    None => wp_eval(z, &inv)?,
                    Some(o) => oval_eval(z, &inv, o)?,
                };
                Ok([self.scale * w + self.shift, self.scale * dw])
            }
        }
    }
}

/// `Q(z) = e3 + K/(℘(z) − e3)` and `Q′`, regular at the lattice points.
fn oval_eval(z: f64, inv: &WeierstrassInvariants, o: OvalData) -> Result<(f64, f64)> {
    if z.abs() <= inv.series_radius().min(1.0) {
        // 1/(℘ − e3) = z²/(z²℘ − e3 z²)
        let (zp, zdp) = inv.scaled_series(z);
        let den = zp - o.e3 * z * z;
        let inv_w = z * z / den;
        let dq = -o.k * zdp * z / (den * den);
        return Ok((o.e3 + o.k * inv_w, dq));
    }
    let (w, dw) = match wp_eval(z, inv) {
        Ok(v) => v,
        // ℘ = ∞ maps to Q = e3 with Q′ = 0 at a lattice point.
        Err(Error::PoleProximity(_)) => return Ok((o.e3, 0.0)),
        Err(e) => return Err(e),
    };
    let d = w - o.e3;
    Ok((o.e3 + o.k / d, -o.k * dw / (d * d)))
}

/// Closed-form integral curve of `spec` through `(x0, y0)` at `t = 0`.
pub fn integral_curve(spec: &FamilySpec, initial: (f64, f64)) -> Result<IntegralCurve> {
    spec.validate_algebraic()?;
    let (x0, y0) = initial;
    if !(x0.is_finite() && y0.is_finite()) {
        return Err(Error::Domain("initial point must be finite".into()));
    }
    match *spec {
        FamilySpec::I { c } => p_curve(spec.family(), c, 0.0, x0, y0),
        FamilySpec::II { b } => tan_curve(Family::II, b, x0, y0),
        FamilySpec::III { a } => tan_curve(Family::III, a, x0, y0),
        FamilySpec::IV { a, c, p } => {
            require_hamiltonian(spec, p)?;
            p_curve(Family::IV, c, 1.5 * a * a, x0, y0)
        }
        FamilySpec::V { b, c, s } => {
            require_hamiltonian(spec, s)?;
            if c == 0.0 {
                return Err(Error::BranchNotCovered(
                    "family V with c=0 is linear; no ℘-curve".into(),
                ));
            }
            p_curve(Family::V, c, 1.5 * b, x0, y0)
        }
    }
}

fn require_hamiltonian(spec: &FamilySpec, exponent: i32) -> Result<()> {
    if exponent != -4 {
        return Err(Error::Dissipative(format!(
            "family {} has d = {} ≠ 0",
            spec.family(),
            spec.d().unwrap_or_default()
        )));
    }
    Ok(())
}

/// `ẍ = −k x − c x²` through `(x0, y0)`, written as `x = α℘(t + k0) + β`.
fn p_curve(family: Family, c: f64, k: f64, x0: f64, y0: f64) -> Result<IntegralCurve> {
    let alpha = -6.0 / c;
    let beta = -k / (2.0 * c);
    let potential = |x: f64| c / 3.0 * x * x * x + 0.5 * k * x * x;
    let h = 0.5 * y0 * y0 + potential(x0);
    let g2 = k * k / 12.0;
    let g3 = 2.0 * (potential(beta) - h) / (alpha * alpha);
    let inv = WeierstrassInvariants::new(g2, g3);
    let p0 = (x0 - beta) / alpha;
    let dp0 = y0 / alpha;
    let omega = real_half_period(&inv).ok();
    let roots = inv.real_roots();
    let e_max = *roots.last().expect("a real cubic has a real root");

    // ℘ is even, so the ascending preimage is the negative of the descending one.
    let locate = |target: f64, descending: bool| -> Result<f64> {
        let s = inverse_wp(target, &inv)?;
        Ok(if descending { s } else { -s })
    };

    let mut oval = None;
    let k0 = if p0 >= e_max - 1e-12 * (1.0 + e_max.abs()) {
        if p0.abs() > POLE_GUARD {
            return Err(Error::PoleProximity(format!(
                "x0 = {x0} maps next to a pole of ℘"
            )));
        }
        locate(p0, dp0 <= 0.0)?
    } else if roots.len() == 3 && p0 >= roots[0] - 1e-12 * (1.0 + roots[0].abs()) {
        let (e1, e2, e3) = (roots[2], roots[1], roots[0]);
        let kq = (e3 - e1) * (e3 - e2);
        let o = OvalData { e3, k: kq };
        oval = Some(o);
        let gap = p0 - e3;
        if gap <= 1e-14 * (1.0 + e3.abs()) {
            0.0
        } else {
            // Q′ = −K ℘′/(℘ − e3)² with K > 0, so ℘′ and Q′ have opposite signs.
            let target = e3 + kq / gap;
            locate(target, dp0 >= 0.0)?
        }
    } else {
        return Err(Error::Numerical(format!(
            "({x0}, {y0}) is not on a real component of the cubic level set"
        )));
    };
    let k0 = polish_k0(k0, p0, &inv, oval, omega);

    Ok(IntegralCurve {
        kind: CurveKind::PCurve,
        family,
        scale: alpha,
        shift: beta,
        k0: Some(k0),
        k1: None,
        k2: None,
        rate: None,
        invariants: Some(inv),
        branch: Some(if oval.is_some() {
            PBranch::Oval
        } else {
            PBranch::Unbounded
        }),
        level: h,
        half_period: omega,
        oval,
        quadratic: 0.0,
    })
}

/// Newton refinement of `X(k0) = p0`, skipped where `X′` is too flat.
fn polish_k0(
    k0: f64,
    p0: f64,
    inv: &WeierstrassInvariants,
    oval: Option<OvalData>,
    omega: Option<f64>,
) -> f64 {
    let eval = |z: f64| match oval {
        None => wp_eval(z, inv),
        Some(o) => oval_eval(z, inv, o),
    };
    let mut z = k0;
    for _ in 0..3 {
        let Ok((w, dw)) = eval(z) else { break };
        let scale = 1.0 + w.abs();
        if dw.abs() < 1e-3 * scale {
            break;
        }
        let step = (w - p0) / dw;
        if !step.is_finite() || step.abs() > 0.1 * omega.unwrap_or(1.0) {
            break;
        }
        z -= step;
    }
    z
}

/// `ẋ = y, ẏ = 2βxy` with `k1 = y − βx²` conserved.
fn tan_curve(family: Family, beta: f64, x0: f64, y0: f64) -> Result<IntegralCurve> {
    let k1 = y0 - beta * x0 * x0;
    if !(k1 / beta > 0.0) {
        return Err(Error::BranchNotCovered(format!(
            "tangent form needs k1/b > 0, got k1 = {k1}, b = {beta}"
        )));
    }
    let amp = (k1 / beta).sqrt();
    let rate = beta.signum() * (k1 * beta).sqrt();
    let k2 = (x0 / amp).atan() / rate;
    Ok(IntegralCurve {
        kind: CurveKind::TanCurve,
        family,
        scale: amp,
        shift: 0.0,
        k0: None,
        k1: Some(k1),
        k2: Some(k2),
        rate: Some(rate),
        invariants: None,
        branch: None,
        level: k1,
        half_period: None,
        oval: None,
        quadratic: beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::integrate::rk4_fixed;
    use crate::families::build_family_algebraic;

    fn rk4_oracle(spec: &FamilySpec, start: [f64; 2], t_max: f64, h: f64) -> Vec<(f64, [f64; 2])> {
        let field = build_family_algebraic(spec).unwrap();
        let rhs = |_t: f64, s: &[f64; 2]| field.eval(s[0], s[1]);
        let (samples, blew) = rk4_fixed(&rhs, start, t_max, h);
        assert!(!blew);
        samples
    }

    fn sup_error(spec: &FamilySpec, start: [f64; 2], t_max: f64) -> f64 {
        let curve = integral_curve(spec, (start[0], start[1])).unwrap();
        rk4_oracle(spec, start, t_max, 1e-5)
            .iter()
            .step_by(100)
            .map(|(t, s)| {
                let c = curve.eval(*t).unwrap();
                (c[0] - s[0]).abs().max((c[1] - s[1]).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn tangent_example() {
        let c = integral_curve(&FamilySpec::II { b: 1.0 }, (0.0, 1.0)).unwrap();
        assert_eq!(c.kind, CurveKind::TanCurve);
        assert_eq!(c.k1, Some(1.0));
        assert_eq!(c.k2, Some(0.0));
        for t in [0.1, 0.5, 1.0, 1.5] {
            assert!((c.eval(t).unwrap()[0] - t.tan()).abs() < 1e-12);
        }
        assert!(matches!(
            c.eval(std::f64::consts::FRAC_PI_2),
            Err(Error::PoleProximity(_))
        ));
    }

    #[test]
    fn tangent_branches_against_integrator() {
        for (spec, start) in [
            (FamilySpec::II { b: 1.0 }, [0.3, 1.2]),
            (FamilySpec::II { b: -0.5 }, [0.2, -1.0]),
            (FamilySpec::III { a: 2.0 }, [-0.1, 0.5]),
        ] {
            let e = sup_error(&spec, start, 0.5);
            assert!(e <= 1e-6, "{spec:?}: {e}");
        }
    }

    #[test]
    fn hyperbolic_tangent_branch_rejected() {
        let r = integral_curve(&FamilySpec::II { b: 1.0 }, (0.0, -1.0));
        assert!(matches!(r, Err(Error::BranchNotCovered(_))));
        let r = integral_curve(&FamilySpec::II { b: 1.0 }, (1.0, 1.0));
        assert!(matches!(r, Err(Error::BranchNotCovered(_))));
    }

    #[test]
    fn family_one_invariants() {
        let c = integral_curve(&FamilySpec::I { c: 1.0 }, (1.0, 0.0)).unwrap();
        let inv = c.invariants.unwrap();
        assert_eq!(inv.g2, 0.0);
        // H = 1/3; substitution gives g3 = −c²H/18.
        assert!((inv.g3 + 1.0 / 54.0).abs() < 1e-15);
        assert_eq!(c.scale, -6.0);
        let p = c.eval(0.0).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-9 && p[1].abs() < 1e-9);
    }

    #[test]
    fn family_one_against_integrator() {
        for (cc, start) in [
            (1.0, [1.0, 0.0]),
            (1.0, [0.5, 0.3]),
            (-2.0, [0.4, -0.7]),
            (3.0, [-0.2, 0.1]),
        ] {
            let e = sup_error(&FamilySpec::I { c: cc }, start, 0.3);
            assert!(e <= 1e-6, "c={cc} start={start:?}: {e}");
        }
    }

    #[test]
    fn shifted_cubics_against_integrator() {
        for (spec, start) in [
            // Bounded orbit around the centre at the origin.
            (
                FamilySpec::V {
                    b: 1.0,
                    c: 1.0,
                    s: -4,
                },
                [0.3, 0.0],
            ),
            (
                FamilySpec::V {
                    b: 1.0,
                    c: 1.0,
                    s: -4,
                },
                [-0.2, 0.25],
            ),
            // Unbounded orbits.
            (
                FamilySpec::IV {
                    a: 1.0,
                    c: 1.0,
                    p: -4,
                },
                [0.5, 1.5],
            ),
            (
                FamilySpec::V {
                    b: -1.0,
                    c: 2.0,
                    s: -4,
                },
                [1.0, 0.2],
            ),
        ] {
            let e = sup_error(&spec, start, 1.0);
            assert!(e <= 1e-6, "{spec:?} {start:?}: {e}");
        }
    }

    #[test]
    fn oval_is_periodic() {
        let spec = FamilySpec::V {
            b: 1.0,
            c: 1.0,
            s: -4,
        };
        let curve = integral_curve(&spec, (0.3, 0.0)).unwrap();
        assert_eq!(curve.branch, Some(PBranch::Oval));
        let period = 2.0 * curve.half_period.unwrap();
        let a = curve.eval(0.4).unwrap();
        let b = curve.eval(0.4 + period).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
    }

    #[test]
    fn level_set_preserved() {
        let spec = FamilySpec::I { c: 1.0 };
        let curve = integral_curve(&spec, (0.5, 0.3)).unwrap();
        let h = curve.level;
        for t in [-0.4, 0.1, 0.7, 1.3] {
            let [x, y] = curve.eval(t).unwrap();
            let hh = 0.5 * y * y + x * x * x / 3.0;
            assert!((hh - h).abs() / h.abs().max(1.0) <= 1e-8, "t={t}");
        }
    }

    #[test]
    fn pole_image_guard() {
        let r = integral_curve(&FamilySpec::I { c: 1.0 }, (-1e14, 1e21));
        assert!(matches!(r, Err(Error::PoleProximity(_))));
        let curve = integral_curve(&FamilySpec::I { c: 1.0 }, (1.0, 0.0)).unwrap();
        let k0 = curve.k0.unwrap();
        assert!(matches!(curve.eval(-k0), Err(Error::PoleProximity(_))));
    }

    #[test]
    fn dissipative_rejected() {
        let r = integral_curve(
            &FamilySpec::V {
                b: 1.0,
                c: 1.0,
                s: 0,
            },
            (0.1, 0.0),
        );
        assert!(matches!(r, Err(Error::Dissipative(_))));
    }
}
