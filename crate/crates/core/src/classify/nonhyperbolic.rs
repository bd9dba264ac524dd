//! Series-based classification of points with a singular linear part.

use serde::Serialize;

use super::{Classification, ClassifyOptions, EigenData, Label, SeriesData};
use crate::error::{Error, Result};
use crate::poly::{compose_series, series_solve_implicit, Poly2, VectorField2};

/// Linear change of variables `(x, y) = point + T·(X, Y)` used to bring a
/// field into a normal frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameTransform {
    pub point: [f64; 2],
    pub matrix: [[f64; 2]; 2],
}

impl FrameTransform {
    /// Maps frame coordinates back to the original plane.
    pub fn to_original(&self, xy: [f64; 2]) -> [f64; 2] {
        let t = &self.matrix;
        [
            self.point[0] + t[0][0] * xy[0] + t[0][1] * xy[1],
            self.point[1] + t[1][0] * xy[0] + t[1][1] * xy[1],
        ]
    }
}

/// Rewrites `field` in coordinates `(X, Y)` with `(x, y) = point + T(X, Y)`.
pub fn change_frame(
    field: &VectorField2,
    point: [f64; 2],
    t: [[f64; 2]; 2],
) -> Result<VectorField2> {
    let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Numerical("singular frame matrix".into()));
    }
    let xs = Poly2::from_terms([(0, 0, point[0]), (1, 0, t[0][0]), (0, 1, t[0][1])]);
    let ys = Poly2::from_terms([(0, 0, point[1]), (1, 0, t[1][0]), (0, 1, t[1][1])]);
    let p = field.p.substitute(&xs, &ys);
    let q = field.q.substitute(&xs, &ys);
    let inv = [
        [t[1][1] / det, -t[0][1] / det],
        [-t[1][0] / det, t[0][0] / det],
    ];
    let np = &p.scale(inv[0][0]) + &q.scale(inv[0][1]);
    let nq = &p.scale(inv[1][0]) + &q.scale(inv[1][1]);
    Ok(VectorField2 { p: np, q: nq })
}

/// Removes numerically-zero constant and linear coefficients and replaces the
/// linear part by `target` (coefficients of X and Y in each component).
fn snap_low_order(field: &VectorField2, target: [[f64; 2]; 2], tol: f64) -> Result<VectorField2> {
    let mut comps = [field.p.clone(), field.q.clone()];
    for (k, comp) in comps.iter_mut().enumerate() {
        let found = [comp.coeff(0, 0), comp.coeff(1, 0), comp.coeff(0, 1)];
        let want = [0.0, target[k][0], target[k][1]];
        for (got, exp) in found.iter().zip(want) {
            if (got - exp).abs() > tol {
                return Err(Error::ContractViolation(format!(
                    "low-order coefficients {found:?} do not match the expected frame {want:?}"
                )));
            }
        }
        let high = comp.part_from_degree(2);
        let mut lin = Poly2::zero();
        lin.add_term(1, 0, want[1]);
        lin.add_term(0, 1, want[2]);
        *comp = &high + &lin;
    }
    let [p, q] = comps;
    Ok(VectorField2 { p, q })
}

/// Translates `point` to the origin and changes frame so the linear part
/// becomes `[[0, 1], [0, 0]]`.
///
/// With `L` the (nilpotent, nonzero) linear part and `e` the basis vector
/// maximising `|L e|`, the frame is `T = [L e | e]`.
pub fn normalize_frame(
    field: &VectorField2,
    point: [f64; 2],
    tau0: f64,
) -> Result<(VectorField2, FrameTransform)> {
    let l = field.jacobian().eval(point[0], point[1]);
    let scale = 1.0 + l.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let col = |j: usize| [l[0][j], l[1][j]];
    let norm = |v: [f64; 2]| v[0].hypot(v[1]);
    let (c0, c1) = (col(0), col(1));
    if norm(c0) <= tau0 * scale && norm(c1) <= tau0 * scale {
        return Err(Error::Unsupported(
            "zero linear part (rank 0) is outside the nilpotent classification".into(),
        ));
    }
    let (le, e) = if norm(c1) >= norm(c0) {
        (c1, [0.0, 1.0])
    } else {
        (c0, [1.0, 0.0])
    };
    let t = [[le[0], e[0]], [le[1], e[1]]];
    let moved = change_frame(field, point, t)?;
    let tol = 1e3 * tau0 * scale * (1.0 + moved.p.max_abs_coeff() + moved.q.max_abs_coeff());
    let normal = snap_low_order(&moved, [[0.0, 1.0], [0.0, 0.0]], tol)?;
    Ok((normal, FrameTransform { point, matrix: t }))
}

/// Nilpotent decision tree for `ẋ = y + A(x, y)`, `ẏ = B(x, y)`.
pub fn classify_nonhyperbolic(
    field: &VectorField2,
    opts: &ClassifyOptions,
) -> Result<Classification> {
    let expected = [(0, 0, 0.0), (1, 0, 0.0), (0, 1, 1.0)];
    for (i, j, want) in expected {
        if field.p.coeff(i, j) != want {
            return Err(Error::ContractViolation(
                "field is not in the nilpotent normal form ẋ = y + A, ẏ = B".into(),
            ));
        }
    }
    if field.q.low_order_magnitude() != 0.0 {
        return Err(Error::ContractViolation(
            "B must start at degree two in the nilpotent normal form".into(),
        ));
    }
    let a_poly = field.p.part_from_degree(2);
    let b_poly = field.q.clone();
    let f = series_solve_implicit(&a_poly, opts.order)?;
    let big_f = compose_series(&b_poly, &f);
    let div = &a_poly.deriv_x() + &b_poly.deriv_y();
    let big_g = compose_series(&div, &f);

    let (a, m) = big_f
        .leading_term(opts.tau0)
        .ok_or_else(|| Error::Degenerate(format!("F vanishes through order {}", opts.order)))?;
    let m = m as u32;
    let leaf = |label: Label, path: &[&str], n: Option<u32>, b: Option<f64>| {
        let mut c = Classification::new(label, path);
        c.parameters = Some(SeriesData { m, n, a, b });
        c
    };

    let Some((b, n)) = big_g.leading_term(opts.tau0) else {
        return Ok(if m % 2 == 1 {
            if a > 0.0 {
                leaf(Label::Saddle, &["Thm2.2", "1", "i"], None, None)
            } else {
                leaf(Label::CenterOrFocus, &["Thm2.2", "1", "i"], None, None)
            }
        } else {
            leaf(Label::Cusp, &["Thm2.2", "1", "ii"], None, None)
        });
    };
    let n = n as u32;
    let (nn, bb) = (Some(n), Some(b));
    let crit = 2 * n + 1;
    if m.is_multiple_of(2) {
        return Ok(if m < crit {
            leaf(Label::Cusp, &["Thm2.2", "2", "i", "a"], nn, bb)
        } else {
            leaf(Label::SaddleNode, &["Thm2.2", "2", "i", "b"], nn, bb)
        });
    }
    if a > 0.0 {
        return Ok(leaf(Label::Saddle, &["Thm2.2", "2", "ii"], nn, bb));
    }
    let disc = b * b + 4.0 * a * f64::from(n + 1);
    if m < crit || (m == crit && disc < 0.0) {
        return Ok(leaf(
            Label::CenterOrFocus,
            &["Thm2.2", "2", "iii", "a"],
            nn,
            bb,
        ));
    }
    Ok(if n % 2 == 1 {
        leaf(
            Label::EllipticHyperbolicSector,
            &["Thm2.2", "2", "iii", "b"],
            nn,
            bb,
        )
    } else if b < 0.0 {
        leaf(
            Label::NonHypStableNode,
            &["Thm2.2", "2", "iii", "c"],
            nn,
            bb,
        )
    } else {
        leaf(
            Label::NonHypUnstableNode,
            &["Thm2.2", "2", "iii", "c"],
            nn,
            bb,
        )
    })
}

/// Centre-manifold reduction at a point with eigenvalues `0` and `μ ≠ 0`.
///
/// In the eigenframe `Ẋ = A(X, Y)`, `Ẏ = μY + B(X, Y)`; with `Y = f(X)`
/// solving `μY + B = 0`, the reduced flow is `Ẋ = g(X) = A(X, f(X)) = a X^m + …`.
/// Even `m` gives a saddle-node; odd `m` a node when `a·μ > 0` (stable iff
/// `μ < 0`) and a saddle otherwise. `g ≡ 0` means a curve of critical points.
pub fn classify_semi_hyperbolic(
    field: &VectorField2,
    point: [f64; 2],
    eigen: &EigenData,
    opts: &ClassifyOptions,
) -> Result<Classification> {
    let vecs = eigen.eigvecs.ok_or_else(|| {
        Error::ContractViolation("semi-hyperbolic point needs real eigenvalues".into())
    })?;
    let zero = eigen.zero_threshold(opts.tau0);
    let (v0, v1, mu) = if eigen.lambda1.norm() < zero {
        (vecs[0], vecs[1], eigen.lambda2.re)
    } else {
        (vecs[1], vecs[0], eigen.lambda1.re)
    };
    let t = [[v0[0], v1[0]], [v0[1], v1[1]]];
    let moved = change_frame(field, point, t)?;
    let tol = 1e3
        * opts.tau0
        * (1.0 + mu.abs())
        * (1.0 + moved.p.max_abs_coeff() + moved.q.max_abs_coeff());
    let frame = snap_low_order(&moved, [[0.0, 0.0], [0.0, mu]], tol)?;
    // μY + B = 0  ⇔  Y + B/μ = 0, with the roles of X and Y as in the solver.
    let b_over_mu = frame.q.part_from_degree(2).scale(1.0 / mu);
    let f = series_solve_implicit(&b_over_mu, opts.order)?;
    let g = compose_series(&frame.p.part_from_degree(2), &f);
    let Some((a, m)) = g.leading_term(opts.tau0) else {
        return Ok(Classification::new(
            Label::CriticalLine,
            &["SemiHyperbolic", "g≡0"],
        ));
    };
    let m = m as u32;
    let mut c = if m.is_multiple_of(2) {
        Classification::new(Label::SaddleNode, &["SemiHyperbolic", "m even"])
    } else if a * mu > 0.0 {
        let label = if mu < 0.0 {
            Label::StableNode
        } else {
            Label::UnstableNode
        };
        Classification::new(label, &["SemiHyperbolic", "m odd", "a·μ>0"])
    } else {
        Classification::new(Label::Saddle, &["SemiHyperbolic", "m odd", "a·μ<0"])
    };
    c.parameters = Some(SeriesData {
        m,
        n: None,
        a,
        b: None,
    });
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::DEFAULT_TAU0;

    fn opts() -> ClassifyOptions {
        ClassifyOptions::default()
    }

    fn field(p: &[(u32, u32, f64)], q: &[(u32, u32, f64)]) -> VectorField2 {
        VectorField2::new(
            Poly2::from_terms(p.iter().copied()),
            Poly2::from_terms(q.iter().copied()),
        )
        .unwrap()
    }

    #[test]
    fn family_one_is_already_normal() {
        let v = field(&[(0, 1, 1.0)], &[(2, 0, -1.0)]);
        let (n, t) = normalize_frame(&v, [0.0, 0.0], DEFAULT_TAU0).unwrap();
        assert_eq!(t.matrix, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(n, v);
        let c = classify_nonhyperbolic(&n, &opts()).unwrap();
        assert_eq!(c.label, Label::Cusp);
    }

    #[test]
    fn chart_u2_family_one() {
        for c in [1.0, -1.0, 2.5] {
            let v = field(&[(0, 1, 1.0), (3, 0, c)], &[(2, 1, c)]);
            let cl = classify_nonhyperbolic(&v, &opts()).unwrap();
            let p = cl.parameters.unwrap();
            assert_eq!((p.m, p.n), (5, Some(2)));
            assert_eq!(p.a, -c * c);
            assert_eq!(p.b, Some(4.0 * c));
            let want = if c < 0.0 {
                Label::NonHypStableNode
            } else {
                Label::NonHypUnstableNode
            };
            assert_eq!(cl.label, want);
            assert_eq!(cl.trace_string(), "Thm2.2 → 2 → iii → c");
        }
    }

    #[test]
    fn chart_u2_family_two() {
        let b = 1.5;
        let v = field(&[(0, 1, 1.0), (2, 0, -2.0 * b)], &[(1, 1, -2.0 * b)]);
        let cl = classify_nonhyperbolic(&v, &opts()).unwrap();
        let p = cl.parameters.unwrap();
        assert_eq!((p.m, p.n), (3, Some(1)));
        assert_eq!(p.a, -4.0 * b * b);
        assert_eq!(p.b, Some(-6.0 * b));
        assert_eq!(cl.label, Label::EllipticHyperbolicSector);
    }

    #[test]
    fn remaining_leaves() {
        // ẋ = y, ẏ = x³: G ≡ 0, m = 3, a > 0
        let c = classify_nonhyperbolic(&field(&[(0, 1, 1.0)], &[(3, 0, 1.0)]), &opts()).unwrap();
        assert_eq!(
            (c.label, c.trace_string().as_str()),
            (Label::Saddle, "Thm2.2 → 1 → i")
        );
        let c = classify_nonhyperbolic(&field(&[(0, 1, 1.0)], &[(3, 0, -1.0)]), &opts()).unwrap();
        assert_eq!(c.label, Label::CenterOrFocus);
        // ẏ = x⁴ + x y: m = 4, n = 1, m > 3 → saddle-node
        let c = classify_nonhyperbolic(
            &field(&[(0, 1, 1.0)], &[(4, 0, 1.0), (0, 2, 0.0), (1, 1, 1.0)]),
            &opts(),
        )
        .unwrap();
        assert_eq!(c.label, Label::SaddleNode);
        // ẏ = x² + x y: m = 2 < 3 → cusp via case 2
        let c =
            classify_nonhyperbolic(&field(&[(0, 1, 1.0)], &[(2, 0, 1.0), (1, 1, 1.0)]), &opts())
                .unwrap();
        assert_eq!(c.trace_string(), "Thm2.2 → 2 → i → a");
        // ẏ = x³ + x y: m odd, a > 0 → saddle via case 2
        let c =
            classify_nonhyperbolic(&field(&[(0, 1, 1.0)], &[(3, 0, 1.0), (1, 1, 1.0)]), &opts())
                .unwrap();
        assert_eq!(c.trace_string(), "Thm2.2 → 2 → ii");
        // ẏ = -x³ + x y: b² + 8a = 1 - 8 < 0 → centre or focus
        let c = classify_nonhyperbolic(
            &field(&[(0, 1, 1.0)], &[(3, 0, -1.0), (1, 1, 1.0)]),
            &opts(),
        )
        .unwrap();
        assert_eq!(c.trace_string(), "Thm2.2 → 2 → iii → a");
        // ẏ = -x³ + 3 x y: 9 - 8 ≥ 0, n odd → sectors
        let c = classify_nonhyperbolic(
            &field(&[(0, 1, 1.0)], &[(3, 0, -1.0), (1, 1, 3.0)]),
            &opts(),
        )
        .unwrap();
        assert_eq!(c.label, Label::EllipticHyperbolicSector);
    }

    #[test]
    fn degenerate_and_contract_errors() {
        let v = field(&[(0, 1, 1.0)], &[(0, 2, 1.0)]);
        assert!(matches!(
            classify_nonhyperbolic(&v, &opts()),
            Err(Error::Degenerate(_))
        ));
        let v = field(&[(1, 0, 1.0)], &[(2, 0, 1.0)]);
        assert!(matches!(
            classify_nonhyperbolic(&v, &opts()),
            Err(Error::ContractViolation(_))
        ));
        let v = field(&[(2, 0, 1.0)], &[(0, 2, 1.0)]);
        assert!(matches!(
            normalize_frame(&v, [0.0, 0.0], DEFAULT_TAU0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn rotated_family_one_round_trips() {
        // Family I in coordinates (x, y) = S(X, Y) with S = [[0, -2], [1, 0]].
        let base = field(&[(0, 1, 1.0)], &[(2, 0, -1.0)]);
        let s = [[0.0, -2.0], [1.0, 0.0]];
        let rotated = change_frame(&base, [0.0, 0.0], s).unwrap();
        let (normal, tr) = normalize_frame(&rotated, [0.0, 0.0], DEFAULT_TAU0).unwrap();
        let back = change_frame(&rotated, [0.0, 0.0], tr.matrix).unwrap();
        assert_eq!(back.p.cleaned(1e-15), normal.p);
        assert_eq!(back.q.cleaned(1e-15), normal.q);
        // For this S the normal frame undoes the rotation exactly.
        let c = classify_nonhyperbolic(&normal, &opts()).unwrap();
        assert_eq!(c.label, Label::Cusp);
        assert_eq!(normal.p, Poly2::y());
    }

    #[test]
    fn translated_point() {
        // Cusp moved to (1, -2).
        let base = field(&[(0, 1, 1.0)], &[(2, 0, -1.0)]);
        let moved = change_frame(&base, [-1.0, 2.0], [[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let (normal, tr) = normalize_frame(&moved, [1.0, -2.0], DEFAULT_TAU0).unwrap();
        assert_eq!(tr.to_original([0.0, 0.0]), [1.0, -2.0]);
        assert_eq!(normal, base);
    }

    #[test]
    fn semi_hyperbolic_cases() {
        let o = opts();
        // ẋ = x², ẏ = -y: saddle-node
        let v = field(&[(2, 0, 1.0)], &[(0, 1, -1.0)]);
        let e = EigenData::from_matrix(v.jacobian().eval(0.0, 0.0));
        assert_eq!(
            classify_semi_hyperbolic(&v, [0.0, 0.0], &e, &o)
                .unwrap()
                .label,
            Label::SaddleNode
        );
        // ẋ = -x³, ẏ = -y: stable node
        let v = field(&[(3, 0, -1.0)], &[(0, 1, -1.0)]);
        let e = EigenData::from_matrix(v.jacobian().eval(0.0, 0.0));
        assert_eq!(
            classify_semi_hyperbolic(&v, [0.0, 0.0], &e, &o)
                .unwrap()
                .label,
            Label::StableNode
        );
        // ẋ = x³, ẏ = -y: saddle
        let v = field(&[(3, 0, 1.0)], &[(0, 1, -1.0)]);
        let e = EigenData::from_matrix(v.jacobian().eval(0.0, 0.0));
        assert_eq!(
            classify_semi_hyperbolic(&v, [0.0, 0.0], &e, &o)
                .unwrap()
                .label,
            Label::Saddle
        );
        // ẋ = x y, ẏ = y: the x-axis is critical
        let v = field(&[(1, 1, 1.0)], &[(0, 1, 1.0)]);
        let e = EigenData::from_matrix(v.jacobian().eval(0.0, 0.0));
        assert_eq!(
            classify_semi_hyperbolic(&v, [0.0, 0.0], &e, &o)
                .unwrap()
                .label,
            Label::CriticalLine
        );
    }
}
