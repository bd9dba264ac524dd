//! First variational equation along a reference solution.

use serde::Serialize;

use super::curves::IntegralCurve;
use crate::dynamics::integrate::rk4_step;
use crate::error::{Error, Result};
use crate::families::{build_family_algebraic, FamilySpec};
use crate::poly::{Jacobian, VectorField2};

/// Reference solution the linearization is taken along.
#[derive(Clone, Debug)]
pub enum Reference {
    /// Numerical flow from a start point.
    Flow { start: [f64; 2] },
    /// A closed-form integral curve.
    Curve(IntegralCurve),
}

/// `ξ̇ = A(t) ξ` with `A(t)` the Jacobian evaluated on the reference.
#[derive(Clone, Debug, Serialize)]
pub struct VariationalEquation {
    #[serde(skip)]
    pub field: VectorField2,
    #[serde(skip)]
    pub jacobian: Jacobian,
    /// Symbolic rows of `A` in terms of `x₀(t), y₀(t)`.
    pub matrix: [[String; 2]; 2],
    /// Equivalent scalar second-order equation.
    pub scalar_form: String,
    #[serde(skip)]
    pub reference: Reference,
}

pub fn variational_equation(
    spec: &FamilySpec,
    reference: Reference,
) -> Result<VariationalEquation> {
    let field = build_family_algebraic(spec)?;
    let jacobian = field.jacobian();
    let fmt = |v: f64| format!("{v}");
    let (lower, scalar) = match *spec {
        FamilySpec::I { c } => (
            [format!("{}·x₀(t)", fmt(-2.0 * c)), "0".to_string()],
            format!("ξ̈ = {}·x₀(t)·ξ", fmt(-2.0 * c)),
        ),
        FamilySpec::II { b: k } | FamilySpec::III { a: k } => (
            [
                format!("{}·y₀(t)", fmt(2.0 * k)),
                format!("{}·x₀(t)", fmt(2.0 * k)),
            ],
            format!(
                "ξ̈ − {}·x₀(t)·ξ̇ − {}·y₀(t)·ξ = 0",
                fmt(2.0 * k),
                fmt(2.0 * k)
            ),
        ),
        FamilySpec::IV { a: _, c, .. } | FamilySpec::V { b: _, c, .. } => {
            let lin = -field.q.coeff(1, 0);
            let damp = field.q.coeff(0, 1);
            (
                [
                    format!(
                        "{} {} {}·x₀(t)",
                        fmt(-lin),
                        sign(-2.0 * c),
                        fmt((2.0 * c).abs())
                    ),
                    fmt(damp),
                ],
                format!(
                    "ξ̈ = {}·ξ̇ + ({} {} {}·x₀(t))·ξ",
                    fmt(damp),
                    fmt(-lin),
                    sign(-2.0 * c),
                    fmt((2.0 * c).abs())
                ),
            )
        }
    };
    Ok(VariationalEquation {
        field,
        jacobian,
        matrix: [["0".into(), "1".into()], lower],
        scalar_form: scalar,
        reference,
    })
}

fn sign(v: f64) -> &'static str {
    if v < 0.0 {
        "−"
    } else {
        "+"
    }
}

impl VariationalEquation {
    /// `A(t)` at a reference state.
    pub fn matrix_at(&self, state: [f64; 2]) -> [[f64; 2]; 2] {
        self.jacobian.eval(state[0], state[1])
    }

    /// Integrates `ξ` from `xi0` over `[0, t_max]` with RK4 step `h`, returning
    /// `(t, x₀, y₀, ξ₁, ξ₂)` samples.
    pub fn solve(&self, xi0: [f64; 2], t_max: f64, h: f64) -> Result<Vec<[f64; 5]>> {
        if !(t_max.is_finite() && t_max >= 0.0 && h.is_finite() && h > 0.0) {
            return Err(Error::Domain("need finite t_max ≥ 0 and h > 0".into()));
        }
        let n = ((t_max / h) - 1e-9).ceil().max(0.0) as usize;
        let mut out = Vec::with_capacity(n + 1);
        match &self.reference {
            Reference::Flow { start } => {
                let rhs = |_t: f64, s: &[f64; 4]| {
                    let f = self.field.eval(s[0], s[1]);
                    let a = self.jacobian.eval(s[0], s[1]);
                    [
                        f[0],
                        f[1],
                        a[0][0] * s[2] + a[0][1] * s[3],
                        a[1][0] * s[2] + a[1][1] * s[3],
                    ]
                };
                let mut s = [start[0], start[1], xi0[0], xi0[1]];
                out.push([0.0, s[0], s[1], s[2], s[3]]);
                for i in 0..n {
                    let t = i as f64 * h;
                    let t_next = if i + 1 == n { t_max } else { t + h };
                    s = rk4_step(&rhs, t, s, t_next - t);
                    if s.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Numerical(format!(
                            "variational flow diverged at t = {t_next}"
                        )));
                    }
                    out.push([t_next, s[0], s[1], s[2], s[3]]);
                }
            }
            Reference::Curve(curve) => {
                let at = |t: f64| -> Result<[[f64; 2]; 2]> {
                    let p = curve.eval(t)?;
                    Ok(self.jacobian.eval(p[0], p[1]))
                };
                let mut xi = xi0;
                let p = curve.eval(0.0)?;
                out.push([0.0, p[0], p[1], xi[0], xi[1]]);
                for i in 0..n {
                    let t = i as f64 * h;
                    let t_next = if i + 1 == n { t_max } else { t + h };
                    let dt = t_next - t;
                    let a0 = at(t)?;
                    let am = at(t + 0.5 * dt)?;
                    let a1 = at(t_next)?;
                    let mv = |a: &[[f64; 2]; 2], v: [f64; 2]| {
                        [
                            a[0][0] * v[0] + a[0][1] * v[1],
                            a[1][0] * v[0] + a[1][1] * v[1],
                        ]
                    };
                    let axpy =
                        |v: [f64; 2], k: [f64; 2], s: f64| [v[0] + s * k[0], v[1] + s * k[1]];
                    let k1 = mv(&a0, xi);
                    let k2 = mv(&am, axpy(xi, k1, 0.5 * dt));
                    let k3 = mv(&am, axpy(xi, k2, 0.5 * dt));
                    let k4 = mv(&a1, axpy(xi, k3, dt));
                    for c in 0..2 {
                        xi[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
                    }
                    let p = curve.eval(t_next)?;
                    out.push([t_next, p[0], p[1], xi[0], xi[1]]);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebraic::curves::integral_curve;

    #[test]
    fn symbolic_forms() {
        let v = variational_equation(
            &FamilySpec::I { c: 1.0 },
            Reference::Flow { start: [1.0, 0.0] },
        )
        .unwrap();
        assert_eq!(v.scalar_form, "ξ̈ = -2·x₀(t)·ξ");
        let v = variational_equation(
            &FamilySpec::II { b: 1.0 },
            Reference::Flow { start: [0.0, 1.0] },
        )
        .unwrap();
        assert_eq!(v.matrix[1], ["2·y₀(t)".to_string(), "2·x₀(t)".to_string()]);
        assert_eq!(v.matrix_at([0.5, 3.0]), [[0.0, 1.0], [6.0, 1.0]]);
    }

    #[test]
    fn zero_reference_gives_free_particle() {
        let v = variational_equation(
            &FamilySpec::I { c: 1.0 },
            Reference::Flow { start: [0.0, 0.0] },
        )
        .unwrap();
        let sol = v.solve([1.0, 2.0], 1.0, 0.01).unwrap();
        let last = sol.last().unwrap();
        assert!((last[3] - 3.0).abs() < 1e-12 && (last[4] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn velocity_solves_variational_equation() {
        // ξ = (ẋ₀, ẏ₀) = F(x₀, y₀) satisfies ξ̇ = A ξ.
        let spec = FamilySpec::I { c: 1.0 };
        let field = build_family_algebraic(&spec).unwrap();
        for reference in [
            Reference::Flow { start: [1.0, 0.0] },
            Reference::Curve(integral_curve(&spec, (1.0, 0.0)).unwrap()),
        ] {
            let v = variational_equation(&spec, reference).unwrap();
            let xi0 = field.eval(1.0, 0.0);
            let sol = v.solve(xi0, 0.5, 1e-3).unwrap();
            for s in &sol {
                let f = field.eval(s[1], s[2]);
                assert!(
                    (s[3] - f[0]).abs() <= 1e-6 && (s[4] - f[1]).abs() <= 1e-6,
                    "t={}",
                    s[0]
                );
            }
        }
    }

    #[test]
    fn family_two_along_tangent() {
        let spec = FamilySpec::II { b: 1.0 };
        let field = build_family_algebraic(&spec).unwrap();
        let curve = integral_curve(&spec, (0.0, 1.0)).unwrap();
        let v = variational_equation(&spec, Reference::Curve(curve)).unwrap();
        let sol = v.solve(field.eval(0.0, 1.0), 1.0, 1e-3).unwrap();
        let s = sol.last().unwrap();
        let f = field.eval(s[1], s[2]);
        assert!((s[3] - f[0]).abs() <= 1e-6 * f[0].abs().max(1.0));
        assert!((s[4] - f[1]).abs() <= 1e-6 * f[1].abs().max(1.0));
    }
}
