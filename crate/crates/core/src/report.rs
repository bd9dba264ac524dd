//! Self-describing report envelopes, 17-significant-digit number output and
//! the notes that explain where computed results part ways with published
//! statements.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::classify::{CriticalPointReport, Label};
use crate::compactify::chart_deviation_notes;
use crate::error::Result;
use crate::families::FamilySpec;

pub const TOOL: &str = "quadradyn";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `printf("%.17g")` for finite values. Non-finite values print as `NaN`,
/// `inf` or `-inf`.
pub fn fmt_g17(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Pretty JSON formatter printing floats with 17 significant digits and
/// non-finite floats as `null`.
pub struct G17Formatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for G17Formatter<'_> {
    fn default() -> Self {
        Self {
            inner: PrettyFormatter::new(),
        }
    }
}

impl Formatter for G17Formatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            w.write_all(fmt_g17(value).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serializes `value` as pretty JSON with 17-significant-digit floats.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17Formatter::default());
    value
        .serialize(&mut ser)
        .expect("report types serialize without error");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportEnvelope {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Echo of the input, re-runnable through `--spec-json`.
    pub input: Value,
    pub options: Value,
    pub thresholds: Value,
    pub result: Value,
    pub notes: Vec<String>,
}

impl ReportEnvelope {
    pub fn new(
        command: &str,
        input: Value,
        options: Value,
        thresholds: Value,
        result: Value,
    ) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            input,
            options,
            thresholds,
            result,
            notes: Vec::new(),
        }
    }

    pub fn with_notes(mut self, notes: Vec<String>) -> Self {
        self.notes = notes;
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = to_json(self);
        s.push('\n');
        s
    }
}

/// Notes for a classification run: every statement whose printed wording
/// differs from the computed label or chart system.
pub fn classify_notes(
    spec: &FamilySpec,
    finite: &[CriticalPointReport],
    infinity: bool,
) -> Result<Vec<String>> {
    let mut notes = Vec::new();
    let origin = finite
        .iter()
        .find(|r| r.location == [0.0, 0.0])
        .map(|r| r.classification.label);
    match *spec {
        FamilySpec::IV { p: 0, .. } => notes.push(
            "Prop 4.4(a) states a node at the origin for every p, but for p=0 the radicand \
             d²−24a² = −8a² is negative and Prop 4.4(b) gives a focus; the label follows the eigenvalues."
                .into(),
        ),
        FamilySpec::V { b, c, .. } => {
            let d = spec.d().unwrap_or_default();
            let disc = d * d - 24.0 * b;
            if c != 0.0 && disc < 0.0 && origin.is_some_and(Label::is_focus) {
                notes.push(
                    "Prop 4.5(c) states a stable focus at the origin in R3 while its proof concludes \
                     an unstable focus; the real part of the eigenvalues is d/4, so the label follows sign(d)."
                        .into(),
                );
            }
            if c == 0.0 && disc > 0.0 {
                notes.push(
                    "The c=0 proposition assigns a saddle to R4 with b>0 and a stable node with b<0; \
                     the origin has det = 3b/2, so it is a node for b>0 and a saddle for b<0. \
                     The label follows the eigenvalues."
                        .into(),
                );
            }
        }
        _ => {}
    }
    if finite.iter().any(|r| r.manifold.is_some()) {
        notes.push(
            "Saddle manifold coefficients are given in the eigenvector frame (1,w), (1,v). \
             The curve ŷ₂ = c/((v−w)(v−2w))·ŷ₁² is tangent to the w-eigenvector; the printed \
             counterpart coefficient 2c/((v−w)(v−2w)) fails the invariance equation and is \
             replaced by c/((v−w)(2v−w))."
                .into(),
        );
    }
    if infinity {
        notes.extend(chart_deviation_notes(spec)?);
        if matches!(spec, FamilySpec::II { .. } | FamilySpec::III { .. }) {
            notes.push(
                "The U1 chart is stated to have no critical points on the equator, but the derived \
                 system has u̇(u,0) = 2βu (β = b or a), which vanishes at u = 0."
                    .into(),
            );
        }
    }
    Ok(notes)
}

/// Notes for closed-form integral curves.
pub fn curve_notes(spec: &FamilySpec) -> Vec<String> {
    match spec {
        FamilySpec::I { .. } => vec![
            "Thm 8.1 prints ℘(t+k₀; 0, −2H); substituting x = (−6/c)℘ into H = ẋ²/2 + (c/3)x³ gives \
             g3 = −c²H/18, which is the value used and the one the integrator confirms."
                .into(),
        ],
        FamilySpec::II { .. } | FamilySpec::III { .. } => vec![
            "Thm 8.2/8.3 print tan(√(k₁b(k₂+t))) with the whole argument under the radical; the \
             separable integral gives √(k₁/b)·tan(σ√(k₁b)(t+k₂)) with σ = sign(b), which is used."
                .into(),
        ],
        FamilySpec::IV { .. } | FamilySpec::V { .. } => vec![
            "Invariants g2, g3 of the shifted cubic are not printed; they are derived from \
             x = α℘ + β with α = −6/c and β = −k/(2c), k the linear coefficient of the potential force."
                .into(),
        ],
    }
}

/// Notes for variational equations.
pub fn variational_notes(spec: &FamilySpec) -> Vec<String> {
    match spec {
        FamilySpec::II { .. } | FamilySpec::III { .. } => vec![
            "The printed variational matrix has lower-left entry −2by₀(t), contradicting the printed \
             scalar form ξ̈ − 2bx₀ξ̇ − 2by₀ξ = 0; the Jacobian entry +2by₀(t) is used."
                .into(),
        ],
        _ => Vec::new(),
    }
}

/// Notes for parameter sweeps and bifurcation events.
pub fn sweep_notes() -> Vec<String> {
    vec![
        "Prop 5.1 names the sets R7 and R8 transcritical bifurcations; the collision of the two \
         finite points happens at b = 0, which is reported as Transcritical, while crossing c = 0 \
         sends the second point through infinity."
            .into(),
        "The printed R-sets overlap; the reported region uses the precedence R7, R8, R4, R5, R6, R1, R2, R3 \
         and all satisfied sets are listed."
            .into(),
        "Prop 4.5(a) (origin an unstable node in R1 with b>0) holds on the family surface d = b(s+4); \
         for free triples with d<0 the origin is a stable node."
            .into(),
    ]
}
