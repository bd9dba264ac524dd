//! First integrals, closed-form integral curves and variational equations.

pub mod curves;
pub mod variational;
pub mod weierstrass;

use serde::Serialize;

pub use curves::{integral_curve, CurveKind, IntegralCurve, PBranch};
pub use variational::{variational_equation, Reference, VariationalEquation};
pub use weierstrass::{inverse_wp, real_half_period, wp_eval, WeierstrassInvariants};

use crate::dynamics::integrate::{integrate, Mode};
use crate::error::{Error, Result};
use crate::families::{build_family_algebraic, FamilySpec};
use crate::poly::Poly2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IntegralKind {
    Hamiltonian,
    #[serde(rename = "Linear-in-y")]
    LinearInY,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstIntegral {
    pub kind: IntegralKind,
    pub expression: Poly2,
    /// Human-readable form of `expression`.
    pub formula: String,
    /// Galois group of the foliation; documentation only.
    pub galois_note: &'static str,
    /// Identity component of the variational Galois group; documentation only.
    pub variational_note: &'static str,
    /// Largest coefficient of the derivative along the field.
    pub lie_residual: f64,
}

impl FirstIntegral {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.expression.eval(x, y)
    }
}

const GALOIS_HAMILTONIAN: &str = "foliation Galois group ℤ₂";
const GALOIS_LINEAR: &str = "foliation Galois group is the identity group";
const VARIATIONAL_NOTE: &str = "identity component of the variational Galois group is abelian";

pub fn first_integral(spec: &FamilySpec) -> Result<FirstIntegral> {
    spec.validate_algebraic()?;
    let half_y2 = Poly2::monomial(0, 2, 0.5);
    let cubic = |c: f64| Poly2::monomial(3, 0, c / 3.0);
    let (kind, expression, galois) = match *spec {
        FamilySpec::I { c } => (
            IntegralKind::Hamiltonian,
            &half_y2 + &cubic(c),
            GALOIS_HAMILTONIAN,
        ),
        FamilySpec::II { b: k } | FamilySpec::III { a: k } => (
            IntegralKind::LinearInY,
            Poly2::from_terms([(0, 1, 1.0), (2, 0, -k)]),
            GALOIS_LINEAR,
        ),
        FamilySpec::IV { a, c, p } => {
            dissipative_unless(spec, p)?;
            (
                IntegralKind::Hamiltonian,
                &(&half_y2 + &cubic(c)) + &Poly2::monomial(2, 0, 0.75 * a * a),
                GALOIS_HAMILTONIAN,
            )
        }
        FamilySpec::V { b, c, s } => {
            dissipative_unless(spec, s)?;
            (
                IntegralKind::Hamiltonian,
                &(&half_y2 + &cubic(c)) + &Poly2::monomial(2, 0, 0.75 * b),
                GALOIS_HAMILTONIAN,
            )
        }
    };
    let expression = expression.cleaned(0.0);
    let field = build_family_algebraic(spec)?;
    let lie = field.lie_derivative(&expression);
    let scale = expression.max_abs_coeff().max(1.0) * field.q.max_abs_coeff().max(1.0);
    let lie_residual = lie.max_abs_coeff();
    if lie_residual > 1e-14 * scale {
        return Err(Error::Numerical(format!(
            "first integral has nonzero derivative along the field (max coefficient {lie_residual:e})"
        )));
    }
    Ok(FirstIntegral {
        kind,
        formula: expression.to_string(),
        expression,
        galois_note: galois,
        variational_note: VARIATIONAL_NOTE,
        lie_residual,
    })
}

fn dissipative_unless(spec: &FamilySpec, exponent: i32) -> Result<()> {
    if exponent == -4 {
        Ok(())
    } else {
        Err(Error::Dissipative(format!(
            "family {} with d = {} ≠ 0",
            spec.family(),
            spec.d().unwrap_or_default()
        )))
    }
}

/// Drift of a first integral along an RK4 trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConservationStats {
    pub initial: f64,
    pub max_abs_drift: f64,
    /// `max |I(t) − I(0)| / |I(0)|`, or the absolute drift when `I(0) = 0`.
    pub max_rel_drift: f64,
    pub samples: usize,
    pub t_end: f64,
}

pub fn conservation_drift(
    spec: &FamilySpec,
    start: [f64; 2],
    t_max: f64,
    h: f64,
) -> Result<ConservationStats> {
    let fi = first_integral(spec)?;
    let field = build_family_algebraic(spec)?;
    let tr = integrate(&field, start, t_max, Mode::Rk4 { h })?;
    let initial = fi.eval(start[0], start[1]);
    let max_abs_drift = tr
        .samples
        .iter()
        .map(|s| (fi.eval(s[1], s[2]) - initial).abs())
        .fold(0.0, f64::max);
    Ok(ConservationStats {
        initial,
        max_abs_drift,
        max_rel_drift: if initial == 0.0 {
            max_abs_drift
        } else {
            max_abs_drift / initial.abs()
        },
        samples: tr.samples.len(),
        t_end: tr.last()[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_integrals() {
        let h = first_integral(&FamilySpec::I { c: 3.0 }).unwrap();
        assert_eq!(h.kind, IntegralKind::Hamiltonian);
        assert_eq!(h.expression, Poly2::from_terms([(0, 2, 0.5), (3, 0, 1.0)]));
        assert_eq!(h.lie_residual, 0.0);
        let i = first_integral(&FamilySpec::II { b: 2.0 }).unwrap();
        assert_eq!(i.kind, IntegralKind::LinearInY);
        assert_eq!(i.expression, Poly2::from_terms([(0, 1, 1.0), (2, 0, -2.0)]));
        assert_eq!(i.lie_residual, 0.0);
        let i = first_integral(&FamilySpec::III { a: -0.5 }).unwrap();
        assert_eq!(i.expression, Poly2::from_terms([(0, 1, 1.0), (2, 0, 0.5)]));
    }

    #[test]
    fn hamiltonian_subcases() {
        for spec in [
            FamilySpec::IV {
                a: 1.3,
                c: -0.7,
                p: -4,
            },
            FamilySpec::V {
                b: 2.0,
                c: 1.0,
                s: -4,
            },
            FamilySpec::V {
                b: -0.3,
                c: 0.0,
                s: -4,
            },
        ] {
            let fi = first_integral(&spec).unwrap();
            assert!(fi.lie_residual <= 1e-14, "{spec:?}");
        }
    }

    #[test]
    fn dissipative_members_rejected() {
        assert!(matches!(
            first_integral(&FamilySpec::V {
                b: 1.0,
                c: 1.0,
                s: 0
            }),
            Err(Error::Dissipative(_))
        ));
        assert!(matches!(
            first_integral(&FamilySpec::IV {
                a: 1.0,
                c: 1.0,
                p: 2
            }),
            Err(Error::Dissipative(_))
        ));
        assert!(matches!(
            first_integral(&FamilySpec::IV {
                a: 1.0,
                c: 1.0,
                p: -3
            }),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn conservation_along_rk4() {
        let s = conservation_drift(&FamilySpec::I { c: 1.0 }, [1.0, 0.0], 0.5, 1e-4).unwrap();
        assert!(s.max_rel_drift <= 1e-8, "{s:?}");
        assert_eq!(s.t_end, 0.5);
        let s = conservation_drift(&FamilySpec::II { b: 1.0 }, [0.0, 1.0], 1.0, 1e-4).unwrap();
        assert!(s.max_abs_drift <= 1e-8, "{s:?}");
    }
}
