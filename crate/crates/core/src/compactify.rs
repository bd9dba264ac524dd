//! Poincaré compactification: chart rewrites and critical points at infinity.
//!
//! For a field of degree `d` the charts are
//!
//! * `U1`: `x = 1/v, y = u/v`, `u̇ = v^d [Q − uP]`, `v̇ = −v^{d+1} P`;
//! * `U2`: `x = u/v, y = 1/v`, `u̇ = v^d [P − uQ]`, `v̇ = −v^{d+1} Q`;
//! * `U3`: the finite plane itself.
//!
//! In `U1`/`U2` the chart field equals `v^{d−1}` times the pushed-forward
//! field, so time runs backwards wherever `v^{d−1} < 0`.

use serde::Serialize;

use crate::classify::{classify_field_point, Classification, ClassifyOptions, EigenData, Label};
use crate::error::{Error, Result};
use crate::families::{build_family, FamilySpec};
use crate::numeric::real_roots_upto_cubic;
use crate::poly::{Poly2, VectorField2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Chart {
    U1,
    U2,
    U3,
}

impl Chart {
    pub fn as_str(self) -> &'static str {
        match self {
            Chart::U1 => "U1",
            Chart::U2 => "U2",
            Chart::U3 => "U3",
        }
    }

    /// Plane point to chart coordinates; `None` on the chart's blind line.
    pub fn from_plane(self, x: f64, y: f64) -> Option<[f64; 2]> {
        match self {
            Chart::U1 => (x != 0.0).then(|| [y / x, 1.0 / x]),
            Chart::U2 => (y != 0.0).then(|| [x / y, 1.0 / y]),
            Chart::U3 => Some([x, y]),
        }
    }

    /// Chart coordinates to the plane; `None` on the equator `v = 0`.
    pub fn to_plane(self, u: f64, v: f64) -> Option<[f64; 2]> {
        match self {
            Chart::U1 => (v != 0.0).then(|| [1.0 / v, u / v]),
            Chart::U2 => (v != 0.0).then(|| [u / v, 1.0 / v]),
            Chart::U3 => Some([u, v]),
        }
    }

    /// Direction on the equator, in radians, of the infinite point `(u, 0)`
    /// for the `v > 0` hemisphere.
    pub fn equator_angle(self, u: f64) -> f64 {
        match self {
            Chart::U1 => u.atan2(1.0),
            Chart::U2 => 1.0f64.atan2(u),
            Chart::U3 => f64::NAN,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartSystem {
    pub chart: Chart,
    pub field: VectorField2,
    pub source_degree: u32,
}

impl ChartSystem {
    /// Sign of the time rescaling `v^{d−1}` at `v`.
    pub fn orientation(&self, v: f64) -> f64 {
        if self.chart == Chart::U3 || self.source_degree % 2 == 1 || v >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Rewrites `field` in the given chart, clearing denominators with `v^d`.
pub fn to_chart(field: &VectorField2, chart: Chart) -> ChartSystem {
    let d = field.degree().max(0) as u32;
    if chart == Chart::U3 {
        return ChartSystem {
            chart,
            field: field.clone(),
            source_degree: d,
        };
    }
    // c x^i y^j ↦ c u^k v^{d−i−j}, k = j in U1 and k = i in U2.
    let cleared = |p: &Poly2| {
        Poly2::from_terms(p.terms().map(|(i, j, c)| {
            let k = if chart == Chart::U1 { j } else { i };
            (k, d - i - j, c)
        }))
    };
    let (num, den) = match chart {
        Chart::U1 => (cleared(&field.q), cleared(&field.p)),
        _ => (cleared(&field.p), cleared(&field.q)),
    };
    let u = Poly2::x();
    let v = Poly2::y();
    let cu = &num - &(&u * &den);
    let cv = -&(&v * &den);
    ChartSystem {
        chart,
        field: VectorField2 { p: cu, q: cv },
        source_degree: d,
    }
}

/// A critical point on the equator of the Poincaré disk.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfinitePointReport {
    pub chart: Chart,
    /// Chart coordinates `(u, 0)`.
    pub location: [f64; 2],
    pub classification: Classification,
    #[serde(skip)]
    pub eigen: Option<EigenData>,
    /// Equator angle of the point in the `v > 0` hemisphere.
    pub corresponds_to_direction: f64,
    /// Equator angle of the diametrically opposite point it also represents.
    pub antipode_direction: f64,
    /// Label of the antipodal point (time-reversed when `v^{d−1}` changes sign).
    pub antipode_label: Label,
}

/// Candidate `u` with `u̇(u, 0) = 0`. U2 contributes only its origin; the rest
/// of the U2 equator is covered by U1.
fn equator_roots(system: &ChartSystem) -> Result<Vec<f64>> {
    let p = &system.field.p;
    let mut coeffs = [0.0; 4];
    for (i, j, c) in p.terms() {
        if j == 0 {
            if i > 3 {
                return Err(Error::Unsupported(
                    "equator polynomial above degree three".into(),
                ));
            }
            coeffs[i as usize] += c;
        }
    }
    Ok(match system.chart {
        Chart::U1 => real_roots_upto_cubic(coeffs),
        Chart::U2 => {
            if coeffs[0] == 0.0 {
                vec![0.0]
            } else {
                Vec::new()
            }
        }
        Chart::U3 => Vec::new(),
    })
}

/// Critical points at infinity of an arbitrary field of degree ≤ 3.
pub fn infinite_points_of_field(
    field: &VectorField2,
    opts: &ClassifyOptions,
) -> Result<Vec<InfinitePointReport>> {
    let mut out = Vec::new();
    for chart in [Chart::U1, Chart::U2] {
        let system = to_chart(field, chart);
        for u in equator_roots(&system)? {
            let report = classify_field_point(&system.field, [u, 0.0], opts)?;
            let angle = chart.equator_angle(u);
            let flip = system.orientation(-1.0) < 0.0;
            let label = report.classification.label;
            out.push(InfinitePointReport {
                chart,
                location: [u, 0.0],
                classification: report.classification,
                eigen: report.eigen,
                corresponds_to_direction: angle,
                antipode_direction: angle - std::f64::consts::PI,
                antipode_label: if flip { label.time_reversed() } else { label },
            });
        }
    }
    Ok(out)
}

pub fn infinite_singular_points(
    spec: &FamilySpec,
    opts: &ClassifyOptions,
) -> Result<Vec<InfinitePointReport>> {
    infinite_points_of_field(&build_family(spec)?, opts)
}

/// Chart systems for the five families as published, including their
/// printed signs. Used to report where the derived systems differ.
pub fn published_chart_system(spec: &FamilySpec, chart: Chart) -> Option<VectorField2> {
    let f = |p: &[(u32, u32, f64)], q: &[(u32, u32, f64)]| {
        Some(VectorField2 {
            p: Poly2::from_terms(p.iter().copied()),
            q: Poly2::from_terms(q.iter().copied()),
        })
    };
    let d = spec.d().unwrap_or(0.0);
    match (*spec, chart) {
        (_, Chart::U3) => None,
        (FamilySpec::I { c }, Chart::U1) => f(&[(2, 1, -1.0), (0, 0, -c)], &[(1, 2, -1.0)]),
        (FamilySpec::I { c }, Chart::U2) => f(&[(0, 1, 1.0), (3, 0, c)], &[(2, 1, -c)]),
        (FamilySpec::II { b: k } | FamilySpec::III { a: k }, Chart::U1) => {
            f(&[(2, 1, -1.0), (0, 0, 2.0 * k)], &[(1, 2, -1.0)])
        }
        (FamilySpec::II { b: k } | FamilySpec::III { a: k }, Chart::U2) => {
            f(&[(0, 1, 1.0), (2, 0, -2.0 * k)], &[(1, 1, -2.0 * k)])
        }
        (FamilySpec::IV { a, c, .. }, chart) => shifted_published(chart, d, a * a, c),
        (FamilySpec::V { b, c, .. }, chart) => shifted_published(chart, d, b, c),
    }
}

fn shifted_published(chart: Chart, d: f64, k: f64, c: f64) -> Option<VectorField2> {
    let (p, q) = match chart {
        Chart::U1 => (
            vec![(2, 1, -1.0), (1, 1, d / 2.0), (0, 1, -1.5 * k), (0, 0, -c)],
            vec![(1, 2, -1.0)],
        ),
        _ => (
            vec![(0, 1, 1.0), (1, 1, -d / 2.0), (2, 1, 1.5 * k), (3, 0, c)],
            vec![(0, 2, -d / 2.0), (1, 2, 1.5 * k), (2, 1, c)],
        ),
    };
    Some(VectorField2 {
        p: Poly2::from_terms(p),
        q: Poly2::from_terms(q),
    })
}

/// Coefficient-level differences between a derived and a published chart
/// system, as `(component, i, j, derived, published)`.
pub fn chart_differences(
    derived: &VectorField2,
    published: &VectorField2,
) -> Vec<(char, u32, u32, f64, f64)> {
    let mut out = Vec::new();
    for (name, a, b) in [
        ('u', &derived.p, &published.p),
        ('v', &derived.q, &published.q),
    ] {
        let diff = a - b;
        for (i, j, _) in diff.terms() {
            out.push((name, i, j, a.coeff(i, j), b.coeff(i, j)));
        }
    }
    out
}

/// Human-readable notes for every published chart coefficient the derivation
/// does not reproduce.
pub fn chart_deviation_notes(spec: &FamilySpec) -> Result<Vec<String>> {
    let field = build_family(spec)?;
    let mut notes = Vec::new();
    if field.degree() < 2 {
        notes.push(format!(
            "family {} with c=0 is linear; its charts are compactified with degree 1 and the printed \
             quadratic chart systems do not apply",
            spec.family()
        ));
        return Ok(notes);
    }
    for chart in [Chart::U1, Chart::U2] {
        let derived = to_chart(&field, chart);
        let Some(published) = published_chart_system(spec, chart) else {
            continue;
        };
        for (comp, i, j, got, printed) in chart_differences(&derived.field, &published) {
            notes.push(format!(
                "family {} chart {}: coefficient of u^{i} v^{j} in {comp}̇ derives to {got} but is printed as {printed}",
                spec.family(),
                chart.as_str(),
            ));
        }
    }
    Ok(notes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> ClassifyOptions {
        ClassifyOptions::default()
    }

    #[test]
    fn family_one_charts() {
        let c = 1.5;
        let f = build_family(&FamilySpec::I { c }).unwrap();
        let u1 = to_chart(&f, Chart::U1);
        assert_eq!(u1.field.p, Poly2::from_terms([(2, 1, -1.0), (0, 0, -c)]));
        assert_eq!(u1.field.q, Poly2::monomial(1, 2, -1.0));
        let u2 = to_chart(&f, Chart::U2);
        assert_eq!(u2.field.p, Poly2::from_terms([(0, 1, 1.0), (3, 0, c)]));
        assert_eq!(u2.field.q, Poly2::monomial(2, 1, c));
        assert_eq!(to_chart(&f, Chart::U3).field, f);
    }

    #[test]
    fn family_five_u2_matches_published() {
        let spec = FamilySpec::V {
            b: 0.5,
            c: -2.0,
            s: 3,
        };
        let f = build_family(&spec).unwrap();
        let u2 = to_chart(&f, Chart::U2);
        assert_eq!(u2.field, published_chart_system(&spec, Chart::U2).unwrap());
    }

    #[test]
    fn infinite_points_family_one() {
        let pts = infinite_singular_points(&FamilySpec::I { c: 1.0 }, &opts()).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].chart, Chart::U2);
        assert_eq!(pts[0].classification.label, Label::NonHypUnstableNode);
        assert_eq!(pts[0].antipode_label, Label::NonHypStableNode);
        assert!((pts[0].corresponds_to_direction - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn infinite_points_family_three_and_four() {
        let pts = infinite_singular_points(&FamilySpec::III { a: 2.0 }, &opts()).unwrap();
        let u2: Vec<_> = pts.iter().filter(|p| p.chart == Chart::U2).collect();
        assert_eq!(u2.len(), 1);
        assert_eq!(u2[0].classification.label, Label::EllipticHyperbolicSector);
        // The U1 origin is the end of the finite line of critical points.
        let u1: Vec<_> = pts.iter().filter(|p| p.chart == Chart::U1).collect();
        assert_eq!(u1.len(), 1);
        assert_eq!(u1[0].classification.label, Label::CriticalLine);

        let pts = infinite_singular_points(
            &FamilySpec::IV {
                a: 1.0,
                c: -1.0,
                p: 1,
            },
            &opts(),
        )
        .unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].classification.label, Label::NonHypStableNode);
    }

    #[test]
    fn chart_direction_agrees_with_flow() {
        let f = build_family(&FamilySpec::V {
            b: 1.0,
            c: -0.5,
            s: 1,
        })
        .unwrap();
        for chart in [Chart::U1, Chart::U2] {
            let sys = to_chart(&f, chart);
            for &(x, y) in &[(1.3, -0.4), (-2.0, 0.7), (0.5, 3.0), (-0.8, -1.9)] {
                let [u, v] = chart.from_plane(x, y).unwrap();
                let [p, q] = f.eval(x, y);
                // d(u, v)/dt along the true flow
                let pushed = match chart {
                    Chart::U1 => [(q * x - y * p) / (x * x), -p / (x * x)],
                    _ => [(p * y - x * q) / (y * y), -q / (y * y)],
                };
                let scale = v.powi(sys.source_degree as i32 - 1);
                let got = sys.field.eval(u, v);
                for k in 0..2 {
                    let want = pushed[k] * scale;
                    assert!(
                        (got[k] - want).abs() <= 1e-8 * want.abs().max(1e-12),
                        "{chart:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn u2_twice_returns_rescaled_field() {
        let c = 3.0;
        let f = build_family(&FamilySpec::I { c }).unwrap();
        let once = to_chart(&f, Chart::U2);
        let twice = to_chart(&once.field, Chart::U2);
        // y · (P, Q) = (y², −c x² y)
        assert_eq!(twice.field.p, Poly2::monomial(0, 2, 1.0));
        assert_eq!(twice.field.q, Poly2::monomial(2, 1, -c));
    }

    #[test]
    fn deviation_notes() {
        let notes = chart_deviation_notes(&FamilySpec::I { c: 1.0 }).unwrap();
        assert_eq!(notes.len(), 1);
        assert!(notes[0].contains("U2"));
        let notes = chart_deviation_notes(&FamilySpec::II { b: 1.0 }).unwrap();
        assert_eq!(notes.len(), 2);
        assert!(chart_deviation_notes(&FamilySpec::V {
            b: 1.0,
            c: 1.0,
            s: 0
        })
        .unwrap()
        .is_empty());
    }
}
