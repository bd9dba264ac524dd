//! Parameter-space regions of the damped family `ẏ = (d/2)y − (3/2)bx − cx²`,
//! parameter sweeps and bifurcation events.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::classify::{
    classify_field_point, triple_critical_points, ClassifyOptions, EigenData, FiniteCriticalSet,
    Label,
};
use crate::error::{Error, Result};
use crate::families::free_triple_field;

/// Bisection stops once the bracket is this narrow.
pub const EVENT_TOLERANCE: f64 = 1e-10;

/// Region membership of a triple `(b, c, d)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParameterRegion {
    /// The single region chosen by precedence (R7, R8, R4–R6, R1–R3).
    pub r_label: String,
    /// Every R-set whose inequalities hold.
    pub r_all: Vec<String>,
    /// Every E-set whose inequalities hold, as defined (including duplicates).
    pub e_labels: Vec<String>,
    pub witness: [f64; 3],
    /// Signed distances to the surfaces `d² − 24b = 0`, `c = 0`, `b = 0`, `d = 0`.
    pub boundary_distances: BTreeMap<String, f64>,
}

fn r_sets(b: f64, c: f64, d: f64) -> Vec<&'static str> {
    let disc = d * d - 24.0 * b;
    let mut out = Vec::new();
    if disc > 0.0 {
        out.push("R1");
    }
    if disc == 0.0 {
        out.push("R2");
    }
    if disc < 0.0 && c > 0.0 {
        out.push("R3");
    }
    if c == 0.0 {
        if disc > 0.0 {
            out.push("R4");
        }
        if disc == 0.0 {
            out.push("R5");
        }
        if disc < 0.0 {
            out.push("R6");
        }
    }
    if b == 0.0 && d == 0.0 && c > 0.0 {
        out.push("R7");
    }
    if c < 0.0 {
        out.push("R8");
    }
    out
}

fn e_sets(b: f64, c: f64, d: f64) -> Vec<&'static str> {
    let dm = d * d - 24.0 * b;
    let dp = d * d + 24.0 * b;
    let table: [(&str, bool); 12] = [
        ("E1", dm < 0.0 && d > 0.0 && c > 0.0),
        ("E2", dm < 0.0 && d < 0.0 && c > 0.0),
        ("E3", dp < 0.0 && d > 0.0 && c > 0.0),
        ("E4", dm < 0.0 && d < 0.0 && c > 0.0),
        ("E5", dm < 0.0 && d > 0.0 && c < 0.0),
        ("E6", dm < 0.0 && d < 0.0 && c < 0.0),
        ("E7", dp < 0.0 && d > 0.0 && c < 0.0),
        ("E8", dm < 0.0 && d < 0.0 && c < 0.0),
        ("E9", dm > 0.0 && d > 0.0 && c > 0.0),
        ("E10", dm > 0.0 && d < 0.0 && c > 0.0),
        ("E11", dm > 0.0 && d < 0.0 && c < 0.0),
        ("E12", dm > 0.0 && d > 0.0 && c < 0.0),
    ];
    table.iter().filter(|t| t.1).map(|t| t.0).collect()
}

pub fn region_of(b: f64, c: f64, d: f64) -> ParameterRegion {
    let all = r_sets(b, c, d);
    let pick = ["R7", "R8", "R4", "R5", "R6", "R1", "R2", "R3"]
        .into_iter()
        .find(|r| all.contains(r))
        .unwrap_or("none");
    let mut dist = BTreeMap::new();
    dist.insert(
        "d2-24b".to_string(),
        (d * d - 24.0 * b) / (4.0 * d * d + 576.0).sqrt(),
    );
    dist.insert("c".to_string(), c);
    dist.insert("b".to_string(), b);
    dist.insert("d".to_string(), d);
    ParameterRegion {
        r_label: pick.to_string(),
        r_all: all.iter().map(|s| s.to_string()).collect(),
        e_labels: e_sets(b, c, d).iter().map(|s| s.to_string()).collect(),
        witness: [b, c, d],
        boundary_distances: dist,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    B,
    C,
    D,
}

impl SweepParam {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "b" => Some(SweepParam::B),
            "c" => Some(SweepParam::C),
            "d" => Some(SweepParam::D),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::B => "b",
            SweepParam::C => "c",
            SweepParam::D => "d",
        }
    }
}

/// A one-parameter path through `(b, c, d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPath {
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    /// Restricts to the family surface `d = b(s + 4)`.
    pub strict_s: Option<i32>,
}

impl SweepPath {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidSpec(format!(
                "a sweep needs at least 2 steps, got {}",
                self.steps
            )));
        }
        for (name, v) in [
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("from", self.from),
            ("to", self.to),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidSpec(format!("{name} must be finite")));
            }
        }
        if let Some(s) = self.strict_s {
            if self.param == SweepParam::D {
                return Err(Error::InvalidSpec(
                    "with the family constraint d = b(s+4), sweep b or c instead of d".into(),
                ));
            }
            if s < 0 {
                return Err(Error::InvalidSpec(format!("s must be >= 0, got {s}")));
            }
        }
        Ok(())
    }

    /// Parameter value at grid index `i`.
    pub fn value_at(&self, i: usize) -> f64 {
        let t = i as f64 / (self.steps - 1) as f64;
        if i == self.steps - 1 {
            self.to
        } else {
            self.from * (1.0 - t) + self.to * t
        }
    }

    /// The triple at parameter value `x`.
    pub fn triple(&self, x: f64) -> [f64; 3] {
        let (mut b, mut c, mut d) = (self.b, self.c, self.d);
        match self.param {
            SweepParam::B => b = x,
            SweepParam::C => c = x,
            SweepParam::D => d = x,
        }
        if let Some(s) = self.strict_s {
            d = b * f64::from(s + 4);
        }
        [b, c, d]
    }
}

/// State of a tracked critical point on one sweep row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackedPoint {
    pub location: [f64; 2],
    pub label: Label,
    #[serde(skip)]
    pub eigen: Option<EigenData>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub triple: [f64; 3],
    pub region: ParameterRegion,
    pub p1: TrackedPoint,
    /// `None` when `c = 0`: the second point has escaped to infinity.
    pub p2: Option<TrackedPoint>,
}

fn track(b: f64, c: f64, d: f64, point: [f64; 2], opts: &ClassifyOptions) -> Result<TrackedPoint> {
    let field = free_triple_field(b, c, d)?;
    let r = classify_field_point(&field, point, opts)?;
    Ok(TrackedPoint {
        location: point,
        label: r.classification.label,
        eigen: r.eigen,
    })
}

/// Classifies `P₁ = (0, 0)` and `P₂ = (−3b/2c, 0)` for one triple.
pub fn classify_triple(
    b: f64,
    c: f64,
    d: f64,
    opts: &ClassifyOptions,
) -> Result<(TrackedPoint, Option<TrackedPoint>)> {
    let p1 = track(b, c, d, [0.0, 0.0], opts)?;
    let p2 = if c != 0.0 {
        let x2 = -3.0 * b / (2.0 * c);
        Some(track(b, c, d, [x2 + 0.0, 0.0], opts)?)
    } else {
        None
    };
    if let FiniteCriticalSet::LineYZero = triple_critical_points(b, c) {
        let mut p1 = p1;
        p1.label = Label::CriticalLine;
        return Ok((p1, p2));
    }
    Ok((p1, p2))
}

pub fn sweep(path: &SweepPath, opts: &ClassifyOptions) -> Result<Vec<SweepRow>> {
    path.validate()?;
    let idx: Vec<usize> = (0..path.steps).collect();
    let rows = crate::par_map(&idx, |&i| {
        let x = path.value_at(i);
        let [b, c, d] = path.triple(x);
        let (p1, p2) = classify_triple(b, c, d, opts)?;
        Ok(SweepRow {
            param: x,
            triple: [b, c, d],
            region: region_of(b, c, d),
            p1,
            p2,
        })
    });
    rows.into_iter().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EventKind {
    Transcritical,
    SaddleFocusSaddle,
    LocalStabilityChange,
    CollisionAtInfinity,
}

/// Labels of the tracked points on one side of an event, ordered by
/// x-coordinate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SideLabels(pub Vec<(String, Label)>);

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventEvidence {
    pub bracket: [f64; 2],
    /// `(point, side, [re₁, im₁, re₂, im₂])` for each tracked point on each
    /// bracket row.
    pub eigenvalues: Vec<(String, String, [f64; 4])>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BifurcationEvent {
    pub kind: EventKind,
    pub parameter: SweepParam,
    pub parameter_value: f64,
    pub triple: [f64; 3],
    pub before_labels: SideLabels,
    pub after_labels: SideLabels,
    /// For stability changes: nearest E9–E12 membership before and after.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span_labels: Option<(Vec<String>, Vec<String>)>,
    pub evidence: EventEvidence,
}

fn side(row: &SweepRow) -> SideLabels {
    let mut v = vec![("P1".to_string(), row.p1.location[0], row.p1.label)];
    if let Some(p2) = &row.p2 {
        v.push(("P2".to_string(), p2.location[0], p2.label));
    }
    v.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    SideLabels(v.into_iter().map(|(n, _, l)| (n, l)).collect())
}

fn eig4(p: &TrackedPoint) -> [f64; 4] {
    match &p.eigen {
        Some(e) => [e.lambda1.re, e.lambda1.im, e.lambda2.re, e.lambda2.im],
        None => [f64::NAN; 4],
    }
}

fn evidence(lo: &SweepRow, hi: &SweepRow) -> EventEvidence {
    let mut eigenvalues = Vec::new();
    for (tag, row) in [("before", lo), ("after", hi)] {
        eigenvalues.push(("P1".to_string(), tag.to_string(), eig4(&row.p1)));
        if let Some(p2) = &row.p2 {
            eigenvalues.push(("P2".to_string(), tag.to_string(), eig4(p2)));
        }
    }
    EventEvidence {
        bracket: [lo.param, hi.param],
        eigenvalues,
    }
}

/// Refines a sign change of `g` on `[lo, hi]` by bisection.
fn bisect<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64) -> f64 {
    let glo = g(lo).signum();
    for _ in 0..200 {
        if (hi - lo).abs() <= EVENT_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if gm.signum() == glo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Index pairs `(i, j)` of consecutive rows with nonzero `g` of opposite
/// sign; rows where `g` vanishes are skipped.
fn sign_changes(rows: &[SweepRow], g: impl Fn(&SweepRow) -> f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut last: Option<(usize, f64)> = None;
    for (i, r) in rows.iter().enumerate() {
        let v = g(r);
        if v == 0.0 || !v.is_finite() {
            continue;
        }
        if let Some((j, s)) = last {
            if s != v.signum() {
                out.push((j, i));
            }
        }
        last = Some((i, v.signum()));
    }
    out
}

fn exchanged(lo: &SweepRow, hi: &SweepRow) -> bool {
    match (&lo.p2, &hi.p2) {
        (Some(a2), Some(b2)) => {
            lo.p1.label == b2.label && a2.label == hi.p1.label && lo.p1.label != a2.label
        }
        _ => false,
    }
}

fn nearest_stability_sets(rows: &[SweepRow], start: usize, step: isize) -> Vec<String> {
    let mut i = start as isize;
    while i >= 0 && (i as usize) < rows.len() {
        let sets: Vec<String> = rows[i as usize]
            .region
            .e_labels
            .iter()
            .filter(|e| matches!(e.as_str(), "E9" | "E10" | "E11" | "E12"))
            .cloned()
            .collect();
        if !sets.is_empty() {
            return sets;
        }
        i += step;
    }
    Vec::new()
}

/// Scans ordered sweep rows for bifurcation events.
pub fn detect_events(path: &SweepPath, rows: &[SweepRow]) -> Vec<BifurcationEvent> {
    let mut events = Vec::new();
    let at = |x: f64| path.triple(x);

    // P₂ = (−3b/2c, 0) passes through P₁ when b changes sign at fixed sign of c.
    for (i, j) in sign_changes(rows, |r| if r.triple[1] != 0.0 { r.triple[0] } else { 0.0 }) {
        let (lo, hi) = (&rows[i], &rows[j]);
        if lo.triple[1].signum() != hi.triple[1].signum() || !exchanged(lo, hi) {
            continue;
        }
        let x = bisect(|x| at(x)[0], lo.param, hi.param);
        events.push(BifurcationEvent {
            kind: EventKind::Transcritical,
            parameter: path.param,
            parameter_value: x,
            triple: at(x),
            before_labels: side(lo),
            after_labels: side(hi),
            span_labels: None,
            evidence: evidence(lo, hi),
        });
    }

    // c changes sign: P₂ leaves through infinity and returns on the other side.
    for (i, j) in sign_changes(rows, |r| r.triple[1]) {
        let (lo, hi) = (&rows[i], &rows[j]);
        let x = bisect(|x| at(x)[1], lo.param, hi.param);
        let [b, _, d] = at(x);
        let saddle_both = lo.p2.as_ref().map(|p| p.label) == Some(Label::Saddle)
            && hi.p2.as_ref().map(|p| p.label) == Some(Label::Saddle);
        let kind = if d * d - 24.0 * b < 0.0 && saddle_both && lo.p1.label.is_focus() {
            EventKind::SaddleFocusSaddle
        } else {
            EventKind::CollisionAtInfinity
        };
        let (before, after) = (side(lo), side(hi));
        if before == after {
            continue;
        }
        events.push(BifurcationEvent {
            kind,
            parameter: path.param,
            parameter_value: x,
            triple: at(x),
            before_labels: before,
            after_labels: after,
            span_labels: None,
            evidence: evidence(lo, hi),
        });
    }

    // The trace is d/2 at every critical point; a non-saddle point changes
    // stability when d changes sign.
    for (i, j) in sign_changes(rows, |r| r.triple[2]) {
        let (lo, hi) = (&rows[i], &rows[j]);
        let candidates = [
            (lo.p1.label, hi.p1.label),
            (
                lo.p2.as_ref().map_or(Label::Saddle, |p| p.label),
                hi.p2.as_ref().map_or(Label::Saddle, |p| p.label),
            ),
        ];
        let changed = candidates
            .iter()
            .any(|&(a, b)| a != Label::Saddle && b != Label::Saddle && a != b);
        if !changed {
            continue;
        }
        let x = bisect(|x| at(x)[2], lo.param, hi.param);
        let span = (
            nearest_stability_sets(rows, i, -1),
            nearest_stability_sets(rows, j, 1),
        );
        events.push(BifurcationEvent {
            kind: EventKind::LocalStabilityChange,
            parameter: path.param,
            parameter_value: x,
            triple: at(x),
            before_labels: side(lo),
            after_labels: side(hi),
            span_labels: Some(span),
            evidence: evidence(lo, hi),
        });
    }
    events.sort_by(|a, b| a.parameter_value.total_cmp(&b.parameter_value));
    events
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(
        param: SweepParam,
        b: f64,
        c: f64,
        d: f64,
        from: f64,
        to: f64,
        steps: usize,
    ) -> SweepPath {
        SweepPath {
            b,
            c,
            d,
            param,
            from,
            to,
            steps,
            strict_s: None,
        }
    }

    #[test]
    fn region_examples() {
        assert_eq!(region_of(1.0, 1.0, 10.0).r_label, "R1");
        let r = region_of(1.0, 1.0, 2.0);
        assert_eq!(r.r_label, "R3");
        assert!(r.e_labels.contains(&"E1".to_string()));
        assert_eq!(region_of(0.0, 2.0, 0.0).r_label, "R7");
        let r = region_of(1.0, -1.0, 10.0);
        assert_eq!(r.r_label, "R8");
        assert_eq!(r.r_all, vec!["R1", "R8"]);
        assert_eq!(region_of(1.0, 0.0, 2.0).r_label, "R6");
        assert_eq!(region_of(1.5, 0.0, 6.0).r_label, "R5");
    }

    #[test]
    fn duplicate_e_sets_are_kept() {
        let r = region_of(1.0, 1.0, -2.0);
        assert!(r.e_labels.contains(&"E2".to_string()));
        assert!(r.e_labels.contains(&"E4".to_string()));
    }

    #[test]
    fn sweep_guard() {
        let p = path(SweepParam::B, 0.0, 1.0, 1.0, -0.5, 0.5, 1);
        assert!(matches!(
            sweep(&p, &ClassifyOptions::default()),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn grid_hits_endpoints_exactly() {
        let p = path(SweepParam::B, 0.0, 1.0, 1.0, -0.5, 0.5, 41);
        assert_eq!(p.value_at(0), -0.5);
        assert_eq!(p.value_at(20), 0.0);
        assert_eq!(p.value_at(40), 0.5);
    }

    #[test]
    fn transcritical_in_b() {
        let p = path(SweepParam::B, 0.0, 1.0, 1.0, -0.5, 0.5, 41);
        let rows = sweep(&p, &ClassifyOptions::default()).unwrap();
        assert_eq!(rows[20].p1.label, Label::SaddleNode);
        let ev = detect_events(&p, &rows);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].kind, EventKind::Transcritical);
        assert!(ev[0].parameter_value.abs() <= 1e-8);
        assert_ne!(ev[0].before_labels, ev[0].after_labels);
    }

    #[test]
    fn saddle_focus_saddle_in_c() {
        let p = path(SweepParam::C, 1.0, 0.0, 2.0, -1.0, 1.0, 41);
        let rows = sweep(&p, &ClassifyOptions::default()).unwrap();
        assert!(rows[20].p2.is_none());
        let ev = detect_events(&p, &rows);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].kind, EventKind::SaddleFocusSaddle);
        assert!(ev[0].parameter_value.abs() <= 1e-8);
    }

    #[test]
    fn stability_change_in_d() {
        let p = path(SweepParam::D, 1.0, 1.0, 0.0, -6.0, 6.0, 41);
        let rows = sweep(&p, &ClassifyOptions::default()).unwrap();
        let ev = detect_events(&p, &rows);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].kind, EventKind::LocalStabilityChange);
        let (before, after) = ev[0].span_labels.clone().unwrap();
        assert_eq!(before, vec!["E10"]);
        assert_eq!(after, vec!["E9"]);
    }

    #[test]
    fn no_events_away_from_boundaries() {
        let p = path(SweepParam::D, 1.0, 1.0, 0.0, 5.0, 6.0, 11);
        let rows = sweep(&p, &ClassifyOptions::default()).unwrap();
        assert!(detect_events(&p, &rows).is_empty());
    }

    #[test]
    fn strict_family_ties_d_to_b() {
        let mut p = path(SweepParam::B, 0.0, 1.0, 0.0, 0.5, 1.5, 3);
        p.strict_s = Some(2);
        assert_eq!(p.triple(1.0), [1.0, 1.0, 6.0]);
        p.param = SweepParam::D;
        assert!(p.validate().is_err());
    }
}
