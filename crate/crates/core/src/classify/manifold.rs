//! Quadratic approximation of invariant manifolds at saddles of
//! `ẋ = y, ẏ = (d/2) y + k X − c X²` (`X` measured from the saddle).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{build_family, FamilySpec};
use crate::poly::VectorField2;

/// Quadratic invariant curves at a saddle, in eigen-coordinates `(ŷ₁, ŷ₂)`
/// with `(X, Y) = C (ŷ₁, ŷ₂)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManifoldApprox {
    pub point: [f64; 2],
    /// Positive eigenvalue.
    pub w: f64,
    /// Negative eigenvalue.
    pub v: f64,
    /// Columns `(1, w)` and `(1, v)`.
    pub basis: [[f64; 2]; 2],
    /// `c/((v−w)(v−2w))`: the curve `ŷ₂ = stable_coeff·ŷ₁²`.
    pub stable_coeff: f64,
    /// Which eigendirection the `stable_coeff` curve is tangent to.
    pub stable_coeff_tangent_to: &'static str,
    /// `c/((v−w)(2v−w))`: the curve `ŷ₁ = counterpart_coeff·ŷ₂²`.
    pub counterpart_coeff: f64,
    pub counterpart_tangent_to: &'static str,
    /// `2c/((v−w)(v−2w))`, the printed counterpart coefficient. It does not
    /// satisfy the invariance equation; kept for comparison only.
    pub printed_counterpart_coeff: f64,
    /// Quadratic coefficient `c` of the translated field.
    pub c: f64,
}

impl ManifoldApprox {
    /// Eigen-coordinates to the original plane.
    pub fn to_plane(&self, yhat: [f64; 2]) -> [f64; 2] {
        let cm = &self.basis;
        [
            self.point[0] + cm[0][0] * yhat[0] + cm[0][1] * yhat[1],
            self.point[1] + cm[1][0] * yhat[0] + cm[1][1] * yhat[1],
        ]
    }

    /// Plane point on `ŷ₂ = stable_coeff·ŷ₁²` at parameter `ŷ₁ = s`.
    pub fn stable_curve_point(&self, s: f64) -> [f64; 2] {
        self.to_plane([s, self.stable_coeff * s * s])
    }

    /// Plane point on `ŷ₁ = counterpart_coeff·ŷ₂²` at parameter `ŷ₂ = s`.
    pub fn counterpart_curve_point(&self, s: f64) -> [f64; 2] {
        self.to_plane([self.counterpart_coeff * s * s, s])
    }

    /// Field in eigen-coordinates, `C⁻¹ f(point + C ŷ)`, evaluated exactly.
    pub fn eigen_field(&self, field: &VectorField2, yhat: [f64; 2]) -> [f64; 2] {
        let xy = self.to_plane(yhat);
        let f = field.eval(xy[0], xy[1]);
        let (w, v) = (self.w, self.v);
        // C = [[1, 1], [w, v]], det = v − w
        let det = v - w;
        [(v * f[0] - f[1]) / det, (-w * f[0] + f[1]) / det]
    }

    /// Invariance defect of `ŷ₂ = K ŷ₁²` at `ŷ₁ = s`: `ẏ₂ − 2Kŷ₁ẏ₁`.
    pub fn stable_residual(&self, field: &VectorField2, s: f64) -> f64 {
        self.residual_with(field, s, self.stable_coeff)
    }

    /// Invariance defect of `ŷ₂ = k ŷ₁²` for an arbitrary coefficient `k`.
    pub fn residual_with(&self, field: &VectorField2, s: f64, k: f64) -> f64 {
        let g = self.eigen_field(field, [s, k * s * s]);
        g[1] - 2.0 * k * s * g[0]
    }

    /// Invariance defect of `ŷ₁ = L ŷ₂²` at `ŷ₂ = s`.
    pub fn counterpart_residual(&self, field: &VectorField2, s: f64) -> f64 {
        let l = self.counterpart_coeff;
        let g = self.eigen_field(field, [l * s * s, s]);
        g[0] - 2.0 * l * s * g[1]
    }
}

/// Least-squares slope of `log|r|` against `log s`.
pub fn log_log_slope(samples: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(s, r)| (s.abs().ln(), r.abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Manifold data at a saddle of a field of the shape
/// `ẋ = y, ẏ = α y + β x + γ x² + const` (families IV, V and free triples).
pub fn manifold_at(field: &VectorField2, point: [f64; 2]) -> Result<ManifoldApprox> {
    let shape_ok = field.p == crate::poly::Poly2::y()
        && field
            .q
            .terms()
            .all(|(i, j, _)| (i, j) == (0, 1) || j == 0 && i <= 2);
    if !shape_ok {
        return Err(Error::ContractViolation(
            "manifold approximation expects ẋ = y, ẏ = αy + q(x) with q quadratic".into(),
        ));
    }
    let half_d = field.q.coeff(0, 1);
    let c = -field.q.coeff(2, 0);
    let k = field.q.deriv_x().eval(point[0], point[1]);
    // λ² − (d/2)λ − k = 0, saddle iff k > 0
    if k <= 0.0 {
        return Err(Error::NotSaddle(format!(
            "det = {} ≥ 0 at ({}, {})",
            -k, point[0], point[1]
        )));
    }
    let d = 2.0 * half_d;
    let root = (d * d + 16.0 * k).sqrt();
    let w = (d + root) / 4.0;
    let v = (d - root) / 4.0;
    Ok(ManifoldApprox {
        point,
        w,
        v,
        basis: [[1.0, 1.0], [w, v]],
        stable_coeff: c / ((v - w) * (v - 2.0 * w)),
        stable_coeff_tangent_to: "w-eigenvector (1, w)",
        counterpart_coeff: c / ((v - w) * (2.0 * v - w)),
        counterpart_tangent_to: "v-eigenvector (1, v)",
        printed_counterpart_coeff: 2.0 * c / ((v - w) * (v - 2.0 * w)),
        c,
    })
}

/// Manifold data at a saddle of family IV or V.
pub fn approximate_manifold(spec: &FamilySpec, saddle: [f64; 2]) -> Result<ManifoldApprox> {
    if !matches!(spec, FamilySpec::IV { .. } | FamilySpec::V { .. }) {
        return Err(Error::ContractViolation(
            "manifold approximation is provided for families IV and V".into(),
        ));
    }
    let field = build_family(spec)?;
    let [p, q] = field.eval(saddle[0], saddle[1]);
    if p.abs() > 1e-10 || q.abs() > 1e-10 {
        return Err(Error::ContractViolation(format!(
            "({}, {}) is not a critical point",
            saddle[0], saddle[1]
        )));
    }
    manifold_at(&field, saddle)
}
