//! Phase portraits on a plane window or on the Poincaré disk, emitted as SVG.
//!
//! Flows are integrated with the speed-normalized field `F/√(1+|F|²)`, so
//! orbits that escape to infinity reach the equator in finite time. In disk
//! mode an orbit leaving the ball `|state| ≤ 1e3` continues in the chart U1
//! or U2 that contains it, with the time rescaling sign taken into account.

use std::fmt::Write as _;

use serde::Serialize;

use crate::classify::{classify_all_finite, ClassifyOptions, Label};
use crate::compactify::{infinite_singular_points, to_chart, Chart, ChartSystem};
use crate::error::{Error, Result};
use crate::families::{build_family, FamilySpec};
use crate::poly::VectorField2;

/// Offset of separatrix seeds from the saddle along each eigenvector.
pub const SEPARATRIX_OFFSET: f64 = 1e-4;
/// Seeds closer than this to a critical point are dropped.
pub const SEED_EXCLUSION: f64 = 1e-3;
const HANDOFF_RADIUS: f64 = 1e3;
const EQUATOR_STOP: f64 = 1e-4;
const CANVAS: f64 = 600.0;
const MARGIN: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Window {
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    PoincareDisk,
}

impl Window {
    fn is_degenerate(&self) -> bool {
        match *self {
            Window::Rect { x0, x1, y0, y1 } => {
                !(x0.is_finite()
                    && x1.is_finite()
                    && y0.is_finite()
                    && y1.is_finite()
                    && x1 > x0
                    && y1 > y0)
            }
            Window::PoincareDisk => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PortraitSpec {
    pub window: Window,
    /// Seeds per axis of the grid; `0` draws glyphs only.
    pub seeds: usize,
    pub separatrices: bool,
    /// Normalized time integrated in each direction from a seed.
    pub span: f64,
    pub step: f64,
}

impl PortraitSpec {
    pub fn disk() -> Self {
        Self {
            window: Window::PoincareDisk,
            ..Self::default()
        }
    }

    pub fn window(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self {
            window: Window::Rect { x0, x1, y0, y1 },
            ..Self::default()
        }
    }
}

impl Default for PortraitSpec {
    fn default() -> Self {
        Self {
            window: Window::PoincareDisk,
            seeds: 12,
            separatrices: true,
            span: 12.0,
            step: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum GlyphShape {
    Point([f64; 2]),
    /// A segment of critical points.
    Line([f64; 2], [f64; 2]),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Glyph {
    pub label: Label,
    pub shape: GlyphShape,
    pub at_infinity: bool,
}

/// Portrait geometry in world coordinates: the plane for a window, the unit
/// disk for the Poincaré disk.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Portrait {
    pub window: Window,
    pub glyphs: Vec<Glyph>,
    pub trajectories: Vec<Vec<[f64; 2]>>,
    pub separatrices: Vec<Vec<[f64; 2]>>,
}

/// Position along an orbit, in the plane or in a chart near the equator.
#[derive(Clone, Copy, Debug)]
enum Pos {
    Plane([f64; 2]),
    Chart(Chart, [f64; 2]),
}

struct Flow<'a> {
    field: &'a VectorField2,
    u1: ChartSystem,
    u2: ChartSystem,
    window: Window,
    step: f64,
    steps: usize,
}

fn normalized(f: [f64; 2], sign: f64) -> [f64; 2] {
    let n = (1.0 + f[0] * f[0] + f[1] * f[1]).sqrt();
    [sign * f[0] / n, sign * f[1] / n]
}

fn rk4(f: &dyn Fn([f64; 2]) -> [f64; 2], s: [f64; 2], h: f64) -> [f64; 2] {
    let k1 = f(s);
    let k2 = f([s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]]);
    let k3 = f([s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]]);
    let k4 = f([s[0] + h * k3[0], s[1] + h * k3[1]]);
    [
        s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// `(x, y) ↦ (x, y)/√(1 + x² + y²)`.
pub fn to_disk(p: [f64; 2]) -> [f64; 2] {
    let n = (1.0 + p[0] * p[0] + p[1] * p[1]).sqrt();
    [p[0] / n, p[1] / n]
}

/// Disk image of a chart point, stable as `v → 0`.
fn chart_to_disk(chart: Chart, q: [f64; 2]) -> [f64; 2] {
    let [u, v] = q;
    let n = (1.0 + u * u + v * v).sqrt() * if v.is_sign_negative() { -1.0 } else { 1.0 };
    match chart {
        Chart::U1 => [1.0 / n, u / n],
        Chart::U2 => [u / n, 1.0 / n],
        Chart::U3 => to_disk(q),
    }
}

fn finite(p: [f64; 2]) -> bool {
    p[0].is_finite() && p[1].is_finite()
}

impl Flow<'_> {
    fn system(&self, chart: Chart) -> &ChartSystem {
        if chart == Chart::U1 {
            &self.u1
        } else {
            &self.u2
        }
    }

    fn world(&self, pos: Pos) -> [f64; 2] {
        match (pos, self.window) {
            (Pos::Plane(p), Window::PoincareDisk) => to_disk(p),
            (Pos::Plane(p), _) => p,
            (Pos::Chart(c, q), _) => chart_to_disk(c, q),
        }
    }

    fn inside(&self, p: [f64; 2]) -> bool {
        match self.window {
            Window::Rect { x0, x1, y0, y1 } => {
                let mx = 0.05 * (x1 - x0);
                let my = 0.05 * (y1 - y0);
                p[0] >= x0 - mx && p[0] <= x1 + mx && p[1] >= y0 - my && p[1] <= y1 + my
            }
            Window::PoincareDisk => true,
        }
    }

    /// World-coordinate samples of the orbit through `start`, in the
    /// direction of `sign`.
    fn trace(&self, start: [f64; 2], sign: f64) -> Vec<[f64; 2]> {
        let mut pos = Pos::Plane(start);
        let mut out = vec![self.world(pos)];
        for _ in 0..self.steps {
            let next = match pos {
                Pos::Plane(p) => {
                    let f = |s: [f64; 2]| normalized(self.field.eval(s[0], s[1]), sign);
                    if f(p)[0].abs() + f(p)[1].abs() < 1e-12 {
                        break;
                    }
                    let q = rk4(&f, p, self.step);
                    if !finite(q) {
                        break;
                    }
                    if !self.inside(q) {
                        out.push(self.world(Pos::Plane(q)));
                        break;
                    }
                    if self.window == Window::PoincareDisk && q[0].hypot(q[1]) > HANDOFF_RADIUS {
                        let chart = if q[0].abs() >= q[1].abs() {
                            Chart::U1
                        } else {
                            Chart::U2
                        };
                        Pos::Chart(
                            chart,
                            chart.from_plane(q[0], q[1]).expect("off the blind line"),
                        )
                    } else {
                        Pos::Plane(q)
                    }
                }
                Pos::Chart(chart, q) => {
                    let sys = self.system(chart);
                    let f = |s: [f64; 2]| {
                        let o = sys.orientation(s[1]);
                        normalized(sys.field.eval(s[0], s[1]), sign * o)
                    };
                    if f(q)[0].abs() + f(q)[1].abs() < 1e-12 {
                        break;
                    }
                    let r = rk4(&f, q, self.step);
                    if !finite(r) {
                        break;
                    }
                    if r[1].abs() < EQUATOR_STOP || r[1].signum() != q[1].signum() {
                        out.push(chart_to_disk(chart, [r[0], 0.0f64.copysign(q[1])]));
                        break;
                    }
                    if r[0].abs() > 1.0 {
                        // U1 ↔ U2: (u, v) ↦ (1/u, v/u)
                        let other = if chart == Chart::U1 {
                            Chart::U2
                        } else {
                            Chart::U1
                        };
                        Pos::Chart(other, [1.0 / r[0], r[1] / r[0]])
                    } else if r[1].abs() > 2.0 / HANDOFF_RADIUS {
                        Pos::Plane(chart.to_plane(r[0], r[1]).expect("v ≠ 0"))
                    } else {
                        Pos::Chart(chart, r)
                    }
                }
            };
            pos = next;
            out.push(self.world(pos));
        }
        out
    }

    /// Backward orbit reversed, joined to the forward orbit.
    fn orbit(&self, start: [f64; 2]) -> Vec<[f64; 2]> {
        let mut back = self.trace(start, -1.0);
        back.reverse();
        let fwd = self.trace(start, 1.0);
        back.extend_from_slice(&fwd[1..]);
        back
    }
}

fn seed_grid(ps: &PortraitSpec) -> Vec<[f64; 2]> {
    let n = ps.seeds;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let fx = (i as f64 + 0.5) / n as f64;
            let fy = (j as f64 + 0.5) / n as f64;
            match ps.window {
                Window::Rect { x0, x1, y0, y1 } => {
                    out.push([x0 + fx * (x1 - x0), y0 + fy * (y1 - y0)])
                }
                Window::PoincareDisk => {
                    let q = [2.0 * fx - 1.0, 2.0 * fy - 1.0];
                    let r2 = q[0] * q[0] + q[1] * q[1];
                    if r2 < 0.95 * 0.95 {
                        let s = (1.0 - r2).sqrt();
                        out.push([q[0] / s, q[1] / s]);
                    }
                }
            }
        }
    }
    out
}

/// Computes the portrait geometry for a family.
pub fn portrait(spec: &FamilySpec, ps: &PortraitSpec) -> Result<Portrait> {
    let field = build_family(spec)?;
    if ps.window.is_degenerate() {
        return Ok(Portrait {
            window: ps.window,
            glyphs: Vec::new(),
            trajectories: Vec::new(),
            separatrices: Vec::new(),
        });
    }
    if !(ps.step.is_finite() && ps.step > 0.0 && ps.span.is_finite() && ps.span >= 0.0) {
        return Err(Error::Domain(
            "portrait step must be positive and span non-negative".into(),
        ));
    }
    let opts = ClassifyOptions::default();
    let finite_points = classify_all_finite(spec, &opts)?;
    let line = matches!(spec, FamilySpec::II { .. } | FamilySpec::III { .. });
    let flow = Flow {
        field: &field,
        u1: to_chart(&field, Chart::U1),
        u2: to_chart(&field, Chart::U2),
        window: ps.window,
        step: ps.step,
        steps: (ps.span / ps.step).round() as usize,
    };
    let disk = ps.window == Window::PoincareDisk;

    let mut glyphs = Vec::new();
    for r in &finite_points {
        let shape = if line {
            match ps.window {
                Window::PoincareDisk => GlyphShape::Line([-1.0, 0.0], [1.0, 0.0]),
                Window::Rect { x0, x1, y0, y1 } => {
                    if y0 > 0.0 || y1 < 0.0 {
                        continue;
                    }
                    GlyphShape::Line([x0, 0.0], [x1, 0.0])
                }
            }
        } else {
            let w = flow.world(Pos::Plane(r.location));
            if !disk && !flow.inside(w) {
                continue;
            }
            GlyphShape::Point(w)
        };
        glyphs.push(Glyph {
            label: r.classification.label,
            shape,
            at_infinity: false,
        });
    }
    if disk {
        for r in infinite_singular_points(spec, &opts)? {
            for (angle, label) in [
                (r.corresponds_to_direction, r.classification.label),
                (r.antipode_direction, r.antipode_label),
            ] {
                glyphs.push(Glyph {
                    label,
                    shape: GlyphShape::Point([angle.cos(), angle.sin()]),
                    at_infinity: true,
                });
            }
        }
    }

    let near_critical = |p: &[f64; 2]| {
        if line {
            return p[1].abs() < SEED_EXCLUSION;
        }
        finite_points
            .iter()
            .any(|r| (p[0] - r.location[0]).hypot(p[1] - r.location[1]) < SEED_EXCLUSION)
    };
    let seeds: Vec<[f64; 2]> = seed_grid(ps)
        .into_iter()
        .filter(|p| !near_critical(p))
        .collect();
    let trajectories = crate::par_map(&seeds, |s| flow.orbit(*s));

    let mut starts = Vec::new();
    if ps.separatrices {
        for r in &finite_points {
            if r.classification.label != Label::Saddle {
                continue;
            }
            let Some(eig) = &r.eigen else { continue };
            let Some(vecs) = eig.eigvecs else { continue };
            for (k, v) in vecs.iter().enumerate() {
                let lambda = if k == 0 {
                    eig.lambda1.re
                } else {
                    eig.lambda2.re
                };
                let sign = if lambda > 0.0 { 1.0 } else { -1.0 };
                for side in [1.0, -1.0] {
                    let p = [
                        r.location[0] + side * SEPARATRIX_OFFSET * v[0],
                        r.location[1] + side * SEPARATRIX_OFFSET * v[1],
                    ];
                    starts.push((r.location, p, sign));
                }
            }
        }
    }
    // Separatrices leave the saddle at the rate of a small eigenvalue, so
    // they get a longer budget than seed orbits.
    let long = Flow {
        steps: 4 * flow.steps,
        u1: flow.u1.clone(),
        u2: flow.u2.clone(),
        ..flow
    };
    let separatrices = crate::par_map(&starts, |(origin, p, sign)| {
        let mut path = vec![long.world(Pos::Plane(*origin))];
        path.extend(long.trace(*p, *sign));
        path
    });

    Ok(Portrait {
        window: ps.window,
        glyphs,
        trajectories,
        separatrices,
    })
}

fn symbol(label: Label) -> &'static str {
    match label {
        Label::Saddle => {
            r#"<path d="M-5,-5L5,5M-5,5L5,-5" fill="none" stroke="black" stroke-width="1.5"/>"#
        }
        Label::StableNode | Label::NonHypStableNode => r#"<circle r="4.5" fill="black"/>"#,
        Label::UnstableNode | Label::NonHypUnstableNode => {
            r#"<circle r="4.5" fill="white" stroke="black" stroke-width="1.5"/>"#
        }
        Label::StableFocus => {
            r#"<circle r="5" fill="none" stroke="black"/><circle r="2" fill="black"/>"#
        }
        Label::UnstableFocus => {
            r#"<circle r="5" fill="none" stroke="black"/><circle r="2" fill="white" stroke="black"/>"#
        }
        Label::LinearCenterOrFocusOrCenter | Label::CenterOrFocus => {
            r#"<circle r="5" fill="none" stroke="black" stroke-dasharray="2,2"/>"#
        }
        Label::Cusp => r#"<path d="M0,-6L5,4L-5,4Z" fill="gray" stroke="black"/>"#,
        Label::SaddleNode => r#"<path d="M-5,0A5,5 0 0 1 5,0Z" fill="black" stroke="black"/>"#,
        Label::EllipticHyperbolicSector => {
            r#"<path d="M0,-6L6,0L0,6L-6,0Z" fill="white" stroke="black"/>"#
        }
        Label::CriticalLine => r#"<rect x="-4" y="-4" width="8" height="8" fill="black"/>"#,
    }
}

impl Portrait {
    fn to_canvas(&self, p: [f64; 2]) -> [f64; 2] {
        let inner = CANVAS - 2.0 * MARGIN;
        match self.window {
            Window::PoincareDisk => {
                let r = 0.5 * inner;
                [MARGIN + r + r * p[0], MARGIN + r - r * p[1]]
            }
            Window::Rect { x0, x1, y0, y1 } => [
                MARGIN + inner * (p[0] - x0) / (x1 - x0),
                MARGIN + inner * (y1 - p[1]) / (y1 - y0),
            ],
        }
    }

    fn path_data(&self, pts: &[[f64; 2]]) -> String {
        // Points closer than half a pixel to the previous vertex are dropped;
        // the final point is always kept.
        let mut d = String::new();
        let mut last: Option<[f64; 2]> = None;
        for (i, p) in pts.iter().enumerate() {
            let c = self.to_canvas(*p);
            let is_last = i + 1 == pts.len();
            if let Some(l) = last {
                let near = (c[0] - l[0]).hypot(c[1] - l[1]) < 0.5;
                if near && !(is_last && c != l) {
                    continue;
                }
            }
            d.push(if last.is_none() { 'M' } else { 'L' });
            let _ = write!(d, "{},{}", fmt3(c[0]), fmt3(c[1]));
            last = Some(c);
        }
        d
    }

    /// SVG 1.1 document: one `use`/`line` element with class `glyph` per
    /// glyph, one `path` per trajectory and per separatrix.
    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" version="1.1" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
        );
        let mut labels: Vec<Label> = self
            .glyphs
            .iter()
            .filter(|g| matches!(g.shape, GlyphShape::Point(_)))
            .map(|g| g.label)
            .collect();
        labels.sort();
        labels.dedup();
        s.push_str("<defs>\n");
        for l in &labels {
            let _ = writeln!(
                s,
                r#"<symbol id="g-{}" overflow="visible">{}</symbol>"#,
                l.as_str(),
                symbol(*l)
            );
        }
        s.push_str("</defs>\n");
        if self.window.is_degenerate() {
            s.push_str("</svg>\n");
            return s;
        }
        s.push_str(r#"<rect x="0" y="0" width="600" height="600" fill="white"/>"#);
        s.push('\n');
        if self.window == Window::PoincareDisk {
            let [cx, cy] = self.to_canvas([0.0, 0.0]);
            let _ = writeln!(
                s,
                r#"<circle class="equator" cx="{}" cy="{}" r="{}" fill="none" stroke="black"/>"#,
                fmt3(cx),
                fmt3(cy),
                fmt3(0.5 * (CANVAS - 2.0 * MARGIN))
            );
        }
        s.push_str(r##"<g fill="none" stroke="#4a6fa5" stroke-width="0.8">"##);
        s.push('\n');
        for t in &self.trajectories {
            let _ = writeln!(s, r#"<path class="trajectory" d="{}"/>"#, self.path_data(t));
        }
        s.push_str("</g>\n");
        s.push_str(r##"<g fill="none" stroke="#b03030" stroke-width="1.4">"##);
        s.push('\n');
        for t in &self.separatrices {
            let _ = writeln!(s, r#"<path class="separatrix" d="{}"/>"#, self.path_data(t));
        }
        s.push_str("</g>\n");
        for g in &self.glyphs {
            let inf = if g.at_infinity { "true" } else { "false" };
            match g.shape {
                GlyphShape::Point(p) => {
                    let [x, y] = self.to_canvas(p);
                    let _ = writeln!(
                        s,
                        r##"<use class="glyph" data-label="{l}" data-at-infinity="{inf}" xlink:href="#g-{l}" x="{}" y="{}"/>"##,
                        fmt3(x),
                        fmt3(y),
                        l = g.label.as_str()
                    );
                }
                GlyphShape::Line(a, b) => {
                    let [xa, ya] = self.to_canvas(a);
                    let [xb, yb] = self.to_canvas(b);
                    let _ = writeln!(
                        s,
                        r#"<line class="glyph" data-label="{}" data-at-infinity="{inf}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="3"/>"#,
                        g.label.as_str(),
                        fmt3(xa),
                        fmt3(ya),
                        fmt3(xb),
                        fmt3(yb)
                    );
                }
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Renders the portrait of `spec` as an SVG document.
pub fn render_portrait(spec: &FamilySpec, ps: &PortraitSpec) -> Result<String> {
    Ok(portrait(spec, ps)?.to_svg())
}
