//! Critical points and their local classification.
//!
//! Hyperbolic points are labelled from the eigenvalues of the linear part.
//! Points with a nilpotent linear part go through the series decision tree in
//! [`nonhyperbolic`]; points with exactly one zero eigenvalue use the
//! centre-manifold reduction in the same module.

mod eigen;
mod manifold;
pub mod nonhyperbolic;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

pub use eigen::EigenData;
pub use manifold::{approximate_manifold, log_log_slope, manifold_at, ManifoldApprox};
pub use nonhyperbolic::{
    classify_nonhyperbolic, classify_semi_hyperbolic, normalize_frame, FrameTransform,
};

use crate::error::{Error, Result};
use crate::families::{build_family, FamilySpec};
use crate::poly::{VectorField2, DEFAULT_ORDER, DEFAULT_TAU0};

/// Thresholds used by the classifiers. Every report records them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassifyOptions {
    /// Zero threshold for eigenvalues and series coefficients.
    pub tau0: f64,
    /// Truncation order of the series computations.
    pub order: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            tau0: DEFAULT_TAU0,
            order: DEFAULT_ORDER,
        }
    }
}

/// Local phase-portrait label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Label {
    Saddle,
    StableNode,
    UnstableNode,
    StableFocus,
    UnstableFocus,
    LinearCenterOrFocusOrCenter,
    Cusp,
    SaddleNode,
    CenterOrFocus,
    EllipticHyperbolicSector,
    NonHypStableNode,
    NonHypUnstableNode,
    CriticalLine,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Saddle => "Saddle",
            Label::StableNode => "StableNode",
            Label::UnstableNode => "UnstableNode",
            Label::StableFocus => "StableFocus",
            Label::UnstableFocus => "UnstableFocus",
            Label::LinearCenterOrFocusOrCenter => "LinearCenterOrFocusOrCenter",
            Label::Cusp => "Cusp",
            Label::SaddleNode => "SaddleNode",
            Label::CenterOrFocus => "CenterOrFocus",
            Label::EllipticHyperbolicSector => "EllipticHyperbolicSector",
            Label::NonHypStableNode => "NonHypStableNode",
            Label::NonHypUnstableNode => "NonHypUnstableNode",
            Label::CriticalLine => "CriticalLine",
        }
    }

    /// Label of the same point for the time-reversed flow.
    pub fn time_reversed(self) -> Self {
        match self {
            Label::StableNode => Label::UnstableNode,
            Label::UnstableNode => Label::StableNode,
            Label::StableFocus => Label::UnstableFocus,
            Label::UnstableFocus => Label::StableFocus,
            Label::NonHypStableNode => Label::NonHypUnstableNode,
            Label::NonHypUnstableNode => Label::NonHypStableNode,
            other => other,
        }
    }

    pub fn is_focus(self) -> bool {
        matches!(self, Label::StableFocus | Label::UnstableFocus)
    }

    pub fn is_node(self) -> bool {
        matches!(
            self,
            Label::StableNode
                | Label::UnstableNode
                | Label::NonHypStableNode
                | Label::NonHypUnstableNode
        )
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Series data `(m, n, a, b)` behind a nilpotent or semi-hyperbolic decision.
/// `n` and `b` are absent when `G` vanishes through the truncation order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesData {
    pub m: u32,
    pub n: Option<u32>,
    pub a: f64,
    pub b: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub label: Label,
    /// Case identifiers from the theorem down to the leaf.
    pub trace: Vec<String>,
    pub parameters: Option<SeriesData>,
}

impl Classification {
    pub fn new(label: Label, trace: &[&str]) -> Self {
        Self {
            label,
            trace: trace.iter().map(|s| s.to_string()).collect(),
            parameters: None,
        }
    }

    pub fn trace_string(&self) -> String {
        self.trace.join(" → ")
    }
}

impl Serialize for Classification {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("label", &self.label)?;
        m.serialize_entry("trace", &self.trace_string())?;
        if let Some(p) = &self.parameters {
            m.serialize_entry("parameters", p)?;
        }
        m.end()
    }
}

/// Result of the finite critical-point search.
#[derive(Clone, Debug, PartialEq)]
pub enum FiniteCriticalSet {
    Points(Vec<[f64; 2]>),
    /// The whole line `y = 0` consists of critical points.
    LineYZero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPointReport {
    pub location: [f64; 2],
    /// Set when the point is a representative of a line of critical points.
    pub line: Option<String>,
    pub eigen: Option<EigenData>,
    pub classification: Classification,
    pub manifold: Option<ManifoldApprox>,
}

impl Serialize for CriticalPointReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("location", &self.location)?;
        if let Some(line) = &self.line {
            m.serialize_entry("line", line)?;
        }
        if let Some(e) = &self.eigen {
            m.serialize_entry("eigenvalues", &e.eigenvalue_pairs())?;
            if let Some(v) = &e.eigvecs {
                m.serialize_entry("eigenvectors", v)?;
            }
            m.serialize_entry("trace_of_jacobian", &e.trace)?;
            m.serialize_entry("det", &e.det)?;
            m.serialize_entry("discriminant", &e.discriminant)?;
        }
        m.serialize_entry("label", &self.classification.label)?;
        m.serialize_entry("trace", &self.classification.trace_string())?;
        if let Some(p) = &self.classification.parameters {
            m.serialize_entry("parameters", p)?;
        }
        if let Some(mf) = &self.manifold {
            m.serialize_entry("manifold", mf)?;
        }
        m.end()
    }
}

pub fn find_finite_critical_points(spec: &FamilySpec) -> Result<FiniteCriticalSet> {
    spec.validate()?;
    Ok(match *spec {
        FamilySpec::I { .. } => FiniteCriticalSet::Points(vec![[0.0, 0.0]]),
        FamilySpec::II { .. } | FamilySpec::III { .. } => FiniteCriticalSet::LineYZero,
        FamilySpec::IV { a, c, .. } => {
            FiniteCriticalSet::Points(vec![[0.0, 0.0], [-3.0 * a * a / (2.0 * c), 0.0]])
        }
        FamilySpec::V { b, c, .. } => triple_critical_points(b, c),
    })
}

/// Critical points of `ẋ = y, ẏ = (d/2)y − (3/2)bx − cx²`.
pub fn triple_critical_points(b: f64, c: f64) -> FiniteCriticalSet {
    if c != 0.0 {
        let x2 = -3.0 * b / (2.0 * c);
        if x2 == 0.0 {
            FiniteCriticalSet::Points(vec![[0.0, 0.0]])
        } else {
            FiniteCriticalSet::Points(vec![[0.0, 0.0], [x2, 0.0]])
        }
    } else if b != 0.0 {
        FiniteCriticalSet::Points(vec![[0.0, 0.0]])
    } else {
        FiniteCriticalSet::LineYZero
    }
}

/// Theorem-2.1 style labelling from eigenvalues.
///
/// Errors with [`Error::NonHyperbolic`] when both eigenvalues vanish and
/// with [`Error::Unsupported`] when exactly one does.
pub fn classify_hyperbolic(eigen: &EigenData, tau0: f64) -> Result<Classification> {
    let zero = eigen.zero_threshold(tau0);
    let small = [eigen.lambda1.norm() < zero, eigen.lambda2.norm() < zero];
    if small[0] && small[1] {
        return Err(Error::NonHyperbolic);
    }
    if eigen.discriminant < 0.0 {
        let alpha = eigen.lambda1.re;
        return Ok(if alpha.abs() < zero {
            Classification::new(Label::LinearCenterOrFocusOrCenter, &["Thm2.1(d)"])
        } else if alpha < 0.0 {
            Classification::new(Label::StableFocus, &["Thm2.1(c)"])
        } else {
            Classification::new(Label::UnstableFocus, &["Thm2.1(c)"])
        });
    }
    if small[0] || small[1] {
        return Err(Error::Unsupported(
            "exactly one zero eigenvalue (semi-hyperbolic point)".into(),
        ));
    }
    let (l1, l2) = (eigen.lambda1.re, eigen.lambda2.re);
    Ok(if l1 * l2 < 0.0 {
        Classification::new(Label::Saddle, &["Thm2.1(a)"])
    } else if l1 < 0.0 {
        Classification::new(Label::StableNode, &["Thm2.1(b)"])
    } else {
        Classification::new(Label::UnstableNode, &["Thm2.1(b)"])
    })
}

/// Classifies a critical point of an arbitrary planar field.
pub fn classify_field_point(
    field: &VectorField2,
    point: [f64; 2],
    opts: &ClassifyOptions,
) -> Result<CriticalPointReport> {
    let jac = field.jacobian().eval(point[0], point[1]);
    let eigen = EigenData::from_matrix(jac);
    let classification = match classify_hyperbolic(&eigen, opts.tau0) {
        Ok(c) => c,
        Err(Error::NonHyperbolic) => {
            let (normal, _) = normalize_frame(field, point, opts.tau0)?;
            match classify_nonhyperbolic(&normal, opts) {
                Ok(c) => c,
                // F ≡ 0 means B vanishes on the curve y = f(x): the point is
                // not isolated.
                Err(Error::Degenerate(_)) => {
                    Classification::new(Label::CriticalLine, &["NonIsolated(F≡0)"])
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::Unsupported(_)) => classify_semi_hyperbolic(field, point, &eigen, opts)?,
        Err(e) => return Err(e),
    };
    let line = (classification.label == Label::CriticalLine).then(|| "non-isolated".to_string());
    Ok(CriticalPointReport {
        location: point,
        line,
        eigen: Some(eigen),
        classification,
        manifold: None,
    })
}

/// Classifies one critical point of a family, attaching the quadratic
/// manifold approximation at saddles of families IV and V.
pub fn classify_point(
    spec: &FamilySpec,
    point: [f64; 2],
    opts: &ClassifyOptions,
) -> Result<CriticalPointReport> {
    let field = build_family(spec)?;
    let [p, q] = field.eval(point[0], point[1]);
    let scale = 1.0 + point[0].abs() + point[1].abs();
    if p.abs() > 1e-10 * scale * scale || q.abs() > 1e-10 * scale * scale {
        return Err(Error::ContractViolation(format!(
            "({}, {}) is not a critical point: field = ({p}, {q})",
            point[0], point[1]
        )));
    }
    let mut report = classify_field_point(&field, point, opts)?;
    if matches!(spec, FamilySpec::II { .. } | FamilySpec::III { .. }) {
        report.line = Some("y = 0".into());
        report.eigen = None;
        report.classification = Classification::new(Label::CriticalLine, &["CriticalLine(y=0)"]);
    }
    if report.classification.label == Label::Saddle
        && matches!(spec, FamilySpec::IV { .. } | FamilySpec::V { .. })
    {
        report.manifold = Some(manifold_at(&field, point)?);
    }
    Ok(report)
}

/// All finite critical points of a family with their classifications.
/// Families II and III report one representative of the critical line.
pub fn classify_all_finite(
    spec: &FamilySpec,
    opts: &ClassifyOptions,
) -> Result<Vec<CriticalPointReport>> {
    match find_finite_critical_points(spec)? {
        FiniteCriticalSet::Points(pts) => pts
            .into_iter()
            .map(|p| classify_point(spec, p, opts))
            .collect(),
        FiniteCriticalSet::LineYZero => Ok(vec![classify_point(spec, [0.0, 0.0], opts)?]),
    }
}
