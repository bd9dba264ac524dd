//! The five quadratic families and their derived parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Poly2, VectorField2};

/// Family tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    I,
    II,
    III,
    IV,
    V,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::I => "I",
            Family::II => "II",
            Family::III => "III",
            Family::IV => "IV",
            Family::V => "V",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Some(Family::I),
            "II" | "2" => Some(Family::II),
            "III" | "3" => Some(Family::III),
            "IV" | "4" => Some(Family::IV),
            "V" | "5" => Some(Family::V),
            _ => None,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameter record selecting one family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum FamilySpec {
    I { c: f64 },
    II { b: f64 },
    III { a: f64 },
    IV { a: f64, c: f64, p: i32 },
    V { b: f64, c: f64, s: i32 },
}

impl FamilySpec {
    pub fn family(&self) -> Family {
        match self {
            FamilySpec::I { .. } => Family::I,
            FamilySpec::II { .. } => Family::II,
            FamilySpec::III { .. } => Family::III,
            FamilySpec::IV { .. } => Family::IV,
            FamilySpec::V { .. } => Family::V,
        }
    }

    /// Checks the admissibility rules for vector-field analysis.
    pub fn validate(&self) -> Result<()> {
        self.validate_common()?;
        match *self {
            FamilySpec::IV { p, .. } if p < 0 => {
                Err(invalid(format!("family IV requires p >= 0, got p={p}")))
            }
            FamilySpec::V { s, .. } if s < 0 => {
                Err(invalid(format!("family V requires s >= 0, got s={s}")))
            }
            _ => Ok(()),
        }
    }

    /// Admissibility for first integrals and closed-form curves, where the
    /// exponents `p = -4` and `s = -4` are also accepted.
    pub fn validate_algebraic(&self) -> Result<()> {
        self.validate_common()?;
        match *self {
            FamilySpec::IV { p, .. } if p < 0 && p != -4 => Err(invalid(format!(
                "family IV requires p >= 0 or p = -4, got p={p}"
            ))),
            FamilySpec::V { s, .. } if s < 0 && s != -4 => Err(invalid(format!(
                "family V requires s >= 0 or s = -4, got s={s}"
            ))),
            _ => Ok(()),
        }
    }

    fn validate_common(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("parameter {name} must be finite")))
            }
        };
        match *self {
            FamilySpec::I { c } => {
                finite("c", c)?;
                if c == 0.0 {
                    return Err(invalid("family I requires c≠0".into()));
                }
            }
            FamilySpec::II { b } => {
                finite("b", b)?;
                if b == 0.0 {
                    return Err(invalid("family II requires b≠0".into()));
                }
            }
            FamilySpec::III { a } => {
                finite("a", a)?;
                if a == 0.0 {
                    return Err(invalid("family III requires a≠0".into()));
                }
            }
            FamilySpec::IV { a, c, .. } => {
                finite("a", a)?;
                finite("c", c)?;
                if a == 0.0 {
                    return Err(invalid("family IV requires a≠0".into()));
                }
                if c == 0.0 {
                    return Err(invalid("family IV requires c≠0".into()));
                }
            }
            FamilySpec::V { b, c, .. } => {
                finite("b", b)?;
                finite("c", c)?;
                if b == 0.0 {
                    return Err(invalid(
                        "family V requires b≠0 (b=0 collapses to family I)".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Damping coefficient `d` (families IV and V).
    pub fn d(&self) -> Option<f64> {
        match *self {
            FamilySpec::IV { a, p, .. } => Some(a * f64::from(p + 4)),
            FamilySpec::V { b, s, .. } => Some(b * f64::from(s + 4)),
            _ => None,
        }
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidSpec(msg)
}

/// Quantities the region and stability analysis keys on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedParams {
    pub d: f64,
    pub discriminant_origin: f64,
    pub discriminant_second: f64,
    /// `None` when `c = 0` (the second point has escaped to infinity).
    pub second_point_x: Option<f64>,
}

/// Builds `ẋ = y, ẏ = Q(x, y)` for the given family.
pub fn build_family(spec: &FamilySpec) -> Result<VectorField2> {
    spec.validate()?;
    Ok(field_unchecked(spec))
}

/// Same as [`build_family`] but admits the exponents `-4`.
pub fn build_family_algebraic(spec: &FamilySpec) -> Result<VectorField2> {
    spec.validate_algebraic()?;
    Ok(field_unchecked(spec))
}

fn field_unchecked(spec: &FamilySpec) -> VectorField2 {
    let q = match *spec {
        FamilySpec::I { c } => Poly2::monomial(2, 0, -c),
        FamilySpec::II { b } => Poly2::monomial(1, 1, 2.0 * b),
        FamilySpec::III { a } => Poly2::monomial(1, 1, 2.0 * a),
        FamilySpec::IV { a, c, p } => Poly2::from_terms([
            (0, 1, a * f64::from(p + 4) / 2.0),
            (1, 0, -1.5 * a * a),
            (2, 0, -c),
        ]),
        FamilySpec::V { b, c, s } => Poly2::from_terms([
            (0, 1, b * f64::from(s + 4) / 2.0),
            (1, 0, -1.5 * b),
            (2, 0, -c),
        ]),
    };
    VectorField2 { p: Poly2::y(), q }
}

/// The family-V shaped field with free `(b, c, d)`:
/// `ẋ = y, ẏ = (d/2) y − (3/2) b x − c x²`.
///
/// This is the coordinate system of the region analysis; the genuine family
/// members are the surface `d = b(s + 4)`.
pub fn free_triple_field(b: f64, c: f64, d: f64) -> Result<VectorField2> {
    if !(b.is_finite() && c.is_finite() && d.is_finite()) {
        return Err(Error::Domain("(b, c, d) must be finite".into()));
    }
    VectorField2::new(
        Poly2::y(),
        Poly2::from_terms([(0, 1, d / 2.0), (1, 0, -1.5 * b), (2, 0, -c)]),
    )
}

pub fn derived_params(spec: &FamilySpec) -> Result<DerivedParams> {
    spec.validate_algebraic()?;
    match *spec {
        FamilySpec::IV { a, c, .. } => {
            let d = spec.d().unwrap_or_default();
            Ok(DerivedParams {
                d,
                discriminant_origin: d * d - 24.0 * a * a,
                discriminant_second: d * d + 24.0 * a * a,
                second_point_x: Some(-3.0 * a * a / (2.0 * c)),
            })
        }
        FamilySpec::V { b, c, .. } => Ok(triple_params(b, c, spec.d().unwrap_or_default())),
        _ => Err(Error::ContractViolation(format!(
            "derived parameters exist only for families IV and V, not {}",
            spec.family()
        ))),
    }
}

/// Derived quantities for a free family-V triple.
pub fn triple_params(b: f64, c: f64, d: f64) -> DerivedParams {
    DerivedParams {
        d,
        discriminant_origin: d * d - 24.0 * b,
        discriminant_second: d * d + 24.0 * b,
        second_point_x: (c != 0.0).then(|| -3.0 * b / (2.0 * c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_one_field() {
        let v = build_family(&FamilySpec::I { c: 1.0 }).unwrap();
        assert_eq!(v.p, Poly2::y());
        assert_eq!(v.q, Poly2::monomial(2, 0, -1.0));
    }

    #[test]
    fn family_five_field() {
        let v = build_family(&FamilySpec::V {
            b: 1.0,
            c: 1.0,
            s: 0,
        })
        .unwrap();
        assert_eq!(
            v.q,
            Poly2::from_terms([(0, 1, 2.0), (1, 0, -1.5), (2, 0, -1.0)])
        );
    }

    #[test]
    fn guards() {
        let e = build_family(&FamilySpec::IV {
            a: 0.0,
            c: 1.0,
            p: 1,
        })
        .unwrap_err();
        assert!(e.to_string().contains("family IV requires a≠0"));
        assert!(build_family(&FamilySpec::V {
            b: 0.0,
            c: 1.0,
            s: 0
        })
        .is_err());
        assert!(build_family(&FamilySpec::I { c: 0.0 }).is_err());
        assert!(build_family(&FamilySpec::V {
            b: 1.0,
            c: 1.0,
            s: -4
        })
        .is_err());
        assert!(build_family_algebraic(&FamilySpec::V {
            b: 1.0,
            c: 1.0,
            s: -4
        })
        .is_ok());
        assert!(build_family_algebraic(&FamilySpec::V {
            b: 1.0,
            c: 1.0,
            s: -3
        })
        .is_err());
        assert!(build_family(&FamilySpec::II { b: f64::NAN }).is_err());
    }

    #[test]
    fn every_family_is_quadratic() {
        let specs = [
            FamilySpec::I { c: -2.0 },
            FamilySpec::II { b: 0.5 },
            FamilySpec::III { a: 3.0 },
            FamilySpec::IV {
                a: -1.0,
                c: 2.0,
                p: 3,
            },
            FamilySpec::V {
                b: 2.0,
                c: -1.0,
                s: 1,
            },
        ];
        for s in specs {
            assert_eq!(build_family(&s).unwrap().degree(), 2, "{s:?}");
        }
    }

    #[test]
    fn c_zero_gives_reduced_linear_system() {
        let v = build_family(&FamilySpec::V {
            b: 1.0,
            c: 0.0,
            s: 2,
        })
        .unwrap();
        assert_eq!(v.q, Poly2::from_terms([(0, 1, 3.0), (1, 0, -1.5)]));
        assert_eq!(v.degree(), 1);
    }

    #[test]
    fn derived_examples() {
        let dp = derived_params(&FamilySpec::V {
            b: 1.0,
            c: 1.0,
            s: 2,
        })
        .unwrap();
        assert_eq!(dp.d, 6.0);
        assert_eq!(dp.discriminant_origin, 12.0);
        assert_eq!(dp.second_point_x, Some(-1.5));

        let dp = derived_params(&FamilySpec::IV {
            a: 1.0,
            c: 1.0,
            p: 0,
        })
        .unwrap();
        assert_eq!(dp.d, 4.0);
        assert_eq!(dp.discriminant_origin, -8.0);
        assert_eq!(dp.discriminant_second - dp.discriminant_origin, 48.0);

        assert!(derived_params(&FamilySpec::V {
            b: 0.0,
            c: 1.0,
            s: 0
        })
        .is_err());
        assert!(derived_params(&FamilySpec::II { b: 1.0 }).is_err());
    }

    #[test]
    fn json_shape() {
        let s = FamilySpec::V {
            b: 1.0,
            c: 1.0,
            s: 0,
        };
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"family":"V","b":1.0,"c":1.0,"s":0}"#
        );
        let back: FamilySpec = serde_json::from_str(r#"{"family":"I","c":-1}"#).unwrap();
        assert_eq!(back, FamilySpec::I { c: -1.0 });
        assert!(serde_json::from_str::<FamilySpec>(r#"{"family":"I","c":1,"b":2}"#).is_err());
    }
}
