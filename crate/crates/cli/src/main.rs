//! `quadradyn` command-line front end.

mod verify;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use quadradyn::algebraic::{
    conservation_drift, first_integral, integral_curve, variational_equation, Reference,
};
use quadradyn::bifurcate::{detect_events, sweep, SweepParam, SweepPath, SweepRow};
use quadradyn::classify::{classify_all_finite, classify_field_point, ClassifyOptions};
use quadradyn::compactify::{infinite_points_of_field, infinite_singular_points};
use quadradyn::dynamics::integrate::{integrate, Mode, Termination};
use quadradyn::dynamics::{render_portrait, PortraitSpec};
use quadradyn::families::{build_family_algebraic, Family};
use quadradyn::report::{
    classify_notes, curve_notes, fmt_g17, sweep_notes, variational_notes, ReportEnvelope,
};
use quadradyn::{Error, FamilySpec, VectorField2};

const EXIT_INVALID: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "quadradyn",
    version,
    about = "Qualitative analysis of quadratic planar vector-field families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the finite (and optionally infinite) critical points.
    #[command(allow_negative_numbers = true)]
    Classify(ClassifyArgs),
    /// Sweep one of b, c, d and print one CSV row per grid point.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Bifurcation events along a sweep, as JSON.
    #[command(allow_negative_numbers = true)]
    Events(SweepArgs),
    /// Phase portrait as SVG.
    #[command(allow_negative_numbers = true)]
    Portrait(PortraitArgs),
    /// Integrate one trajectory and print it as CSV.
    #[command(allow_negative_numbers = true)]
    Solve(SolveArgs),
    /// First integral and its drift along an RK4 trajectory, as JSON.
    #[command(allow_negative_numbers = true)]
    Integrals(IntegralsArgs),
    /// Run the built-in acceptance checks.
    Verify,
}

#[derive(Args, Clone)]
struct SpecArgs {
    /// Family: I, II, III, IV or V.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    p: Option<i32>,
    #[arg(long)]
    s: Option<i32>,
    /// FamilySpec JSON file (`-` for stdin); replaces the parameter flags.
    #[arg(long, value_name = "FILE")]
    spec_json: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Append the critical points at infinity.
    #[arg(long)]
    infinity: bool,
    /// Zero threshold for eigenvalues and series coefficients.
    #[arg(long)]
    tau0: Option<f64>,
    /// Arbitrary field `{"p": Poly2, "q": Poly2}` instead of a family.
    #[arg(long, value_name = "FILE", conflicts_with = "spec_json")]
    field_json: Option<PathBuf>,
    /// Critical point to classify with `--field-json`, as `x,y`.
    #[arg(long, allow_hyphen_values = true, requires = "field_json")]
    point: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// Only V is swept.
    #[arg(long, default_value = "V")]
    family: String,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    s: Option<i32>,
    /// Swept coordinate: b, c or d.
    #[arg(long)]
    param: String,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long, default_value_t = 41)]
    steps: usize,
    /// Keep d = b(s+4) on every row (requires --s).
    #[arg(long)]
    strict_family: bool,
    #[arg(long)]
    tau0: Option<f64>,
}

#[derive(Args)]
struct PortraitArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Plane window `x0,x1,y0,y1`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "disk")]
    window: Option<String>,
    /// Draw on the Poincaré disk.
    #[arg(long)]
    disk: bool,
    /// Seeds per axis.
    #[arg(long, default_value_t = 12)]
    seeds: usize,
    #[arg(long)]
    no_separatrices: bool,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    x0: f64,
    #[arg(long)]
    y0: f64,
    #[arg(long, default_value_t = 1.0)]
    t_max: f64,
    /// RK4 step.
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    /// Adaptive Dormand–Prince instead of fixed-step RK4.
    #[arg(long, conflicts_with = "closed_form")]
    adaptive: bool,
    /// Compare with the closed-form integral curve.
    #[arg(long)]
    closed_form: bool,
}

#[derive(Args)]
struct IntegralsArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = 0.0)]
    y0: f64,
    #[arg(long, default_value_t = 1.0)]
    t_max: f64,
    #[arg(long, default_value_t = 1e-4)]
    h: f64,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidSpec(_)
            | Error::ContractViolation(_)
            | Error::Domain(_)
            | Error::Dissipative(_)
            | Error::BranchNotCovered(_)
            | Error::NotSaddle(_) => EXIT_INVALID,
            _ => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// `QUADRADYN_THREADS` caps the worker pool; `0` or unset leaves it automatic.
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("QUADRADYN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Failure::invalid(format!(
            "QUADRADYN_THREADS must be a non-negative integer, got {raw:?}"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::invalid(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::Classify(a) => emit(&cmd_classify(&a)?).map(|_| 0),
        Command::Sweep(a) => emit(&cmd_sweep(&a)?).map(|_| 0),
        Command::Events(a) => emit(&cmd_events(&a)?).map(|_| 0),
        Command::Portrait(a) => cmd_portrait(&a).map(|_| 0),
        Command::Solve(a) => emit(&cmd_solve(&a)?).map(|_| 0),
        Command::Integrals(a) => emit(&cmd_integrals(&a)?).map(|_| 0),
        Command::Verify => Ok(cmd_verify()),
    }
}

fn emit(text: &str) -> CliResult<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure {
            code: EXIT_NUMERIC,
            message: format!("cannot write output: {e}"),
        })
}

fn read_input(path: &Path) -> CliResult<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::invalid(format!("cannot read stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path)
            .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))
    }
}

fn parse_list<const N: usize>(raw: &str, what: &str) -> CliResult<[f64; N]> {
    let vals: Vec<f64> = raw
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| {
            Failure::invalid(format!(
                "{what}: expected {N} comma-separated numbers, got {raw:?}"
            ))
        })?;
    vals.try_into().map_err(|_| {
        Failure::invalid(format!(
            "{what}: expected {N} comma-separated numbers, got {raw:?}"
        ))
    })
}

fn spec_from_args(a: &SpecArgs) -> CliResult<FamilySpec> {
    if let Some(path) = &a.spec_json {
        let given = [
            a.family.is_some(),
            a.a.is_some(),
            a.b.is_some(),
            a.c.is_some(),
            a.p.is_some(),
            a.s.is_some(),
        ];
        if given.iter().any(|&g| g) {
            return Err(Failure::invalid(
                "--spec-json replaces the parameter flags; do not combine them",
            ));
        }
        let text = read_input(path)?;
        return serde_json::from_str(&text)
            .map_err(|e| Failure::invalid(format!("invalid FamilySpec JSON: {e}")));
    }
    let name = a
        .family
        .as_deref()
        .ok_or_else(|| Failure::invalid("either --family or --spec-json is required"))?;
    let family =
        Family::parse(name).ok_or_else(|| Failure::invalid(format!("unknown family {name:?}")))?;
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| Failure::invalid(format!("family {family} requires --{flag}")))
    };
    let need_i = |v: Option<i32>, flag: &str| {
        v.ok_or_else(|| Failure::invalid(format!("family {family} requires --{flag}")))
    };
    let allowed: &[&str] = match family {
        Family::I => &["c"],
        Family::II => &["b"],
        Family::III => &["a"],
        Family::IV => &["a", "c", "p"],
        Family::V => &["b", "c", "s"],
    };
    for (flag, given) in [
        ("a", a.a.is_some()),
        ("b", a.b.is_some()),
        ("c", a.c.is_some()),
        ("p", a.p.is_some()),
        ("s", a.s.is_some()),
    ] {
        if given && !allowed.contains(&flag) {
            return Err(Failure::invalid(format!(
                "family {family} has no parameter --{flag}"
            )));
        }
    }
    Ok(match family {
        Family::I => FamilySpec::I { c: need(a.c, "c")? },
        Family::II => FamilySpec::II { b: need(a.b, "b")? },
        Family::III => FamilySpec::III { a: need(a.a, "a")? },
        Family::IV => FamilySpec::IV {
            a: need(a.a, "a")?,
            c: need(a.c, "c")?,
            p: need_i(a.p, "p")?,
        },
        Family::V => FamilySpec::V {
            b: need(a.b, "b")?,
            c: need(a.c, "c")?,
            s: need_i(a.s, "s")?,
        },
    })
}

fn options(tau0: Option<f64>) -> CliResult<ClassifyOptions> {
    let mut opts = ClassifyOptions::default();
    if let Some(t) = tau0 {
        if !(t.is_finite() && t > 0.0) {
            return Err(Failure::invalid(format!(
                "--tau0 must be positive and finite, got {t}"
            )));
        }
        opts.tau0 = t;
    }
    Ok(opts)
}

fn thresholds(opts: &ClassifyOptions) -> Value {
    json!({ "tau0": opts.tau0, "order": opts.order })
}

fn value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn cmd_classify(a: &ClassifyArgs) -> CliResult<String> {
    let opts = options(a.tau0)?;
    if let Some(path) = &a.field_json {
        return classify_field(a, path, &opts);
    }
    let spec = spec_from_args(&a.spec)?;
    spec.validate()?;
    let finite = classify_all_finite(&spec, &opts)?;
    let mut result = json!({ "finite_points": value(&finite) });
    if a.infinity {
        let inf = infinite_singular_points(&spec, &opts)?;
        result["infinite_points"] = value(&inf);
    }
    let notes = classify_notes(&spec, &finite, a.infinity)?;
    let env = ReportEnvelope::new(
        "classify",
        value(&spec),
        json!({ "infinity": a.infinity }),
        thresholds(&opts),
        result,
    )
    .with_notes(notes);
    Ok(env.to_json())
}

fn classify_field(a: &ClassifyArgs, path: &Path, opts: &ClassifyOptions) -> CliResult<String> {
    let text = read_input(path)?;
    let field: VectorField2 = serde_json::from_str(&text)
        .map_err(|e| Failure::invalid(format!("invalid field JSON: {e}")))?;
    let field = VectorField2::new(field.p, field.q)?;
    let raw = a
        .point
        .as_deref()
        .ok_or_else(|| Failure::invalid("--field-json needs --point x,y"))?;
    let point = parse_list::<2>(raw, "--point")?;
    let [p, q] = field.eval(point[0], point[1]);
    if p.abs() > 1e-10 || q.abs() > 1e-10 {
        return Err(Failure::invalid(format!(
            "({}, {}) is not a critical point: field = ({p}, {q})",
            point[0], point[1]
        )));
    }
    let report = classify_field_point(&field, point, opts)?;
    let mut result = json!({ "finite_points": [value(&report)] });
    if a.infinity {
        result["infinite_points"] = value(&infinite_points_of_field(&field, opts)?);
    }
    let env = ReportEnvelope::new(
        "classify",
        json!({ "field": value(&field), "point": point }),
        json!({ "infinity": a.infinity }),
        thresholds(opts),
        result,
    );
    Ok(env.to_json())
}

fn sweep_path(a: &SweepArgs) -> CliResult<SweepPath> {
    if Family::parse(&a.family) != Some(Family::V) {
        return Err(Failure::invalid(format!(
            "sweeps run over the (b, c, d) space of family V, not family {:?}",
            a.family
        )));
    }
    let param = SweepParam::parse(&a.param)
        .ok_or_else(|| Failure::invalid(format!("--param must be b, c or d, got {:?}", a.param)))?;
    let b = a.b.unwrap_or(0.0);
    let c = a.c.unwrap_or(0.0);
    if param != SweepParam::B && a.b.is_none() {
        return Err(Failure::invalid("--b is required unless b is swept"));
    }
    if param != SweepParam::C && a.c.is_none() {
        return Err(Failure::invalid("--c is required unless c is swept"));
    }
    let d = match (a.d, a.s) {
        (Some(_), Some(_)) => return Err(Failure::invalid("give either --d or --s, not both")),
        (Some(d), None) => d,
        (None, Some(s)) => b * f64::from(s + 4),
        (None, None) if param == SweepParam::D => 0.0,
        (None, None) => return Err(Failure::invalid("--d or --s is required unless d is swept")),
    };
    let strict_s = if a.strict_family {
        Some(a.s.ok_or_else(|| Failure::invalid("--strict-family requires --s"))?)
    } else {
        None
    };
    let path = SweepPath {
        b,
        c,
        d,
        param,
        from: a.from,
        to: a.to,
        steps: a.steps,
        strict_s,
    };
    path.validate()?;
    Ok(path)
}

fn run_sweep(a: &SweepArgs) -> CliResult<(SweepPath, Vec<SweepRow>)> {
    let path = sweep_path(a)?;
    let rows = sweep(&path, &options(a.tau0)?)?;
    Ok((path, rows))
}

fn cmd_sweep(a: &SweepArgs) -> CliResult<String> {
    let (_, rows) = run_sweep(a)?;
    let mut out =
        String::from("param,b,c,d,region,r_sets,e_sets,p1_x,p1_y,p1_label,p2_x,p2_y,p2_label\n");
    for r in &rows {
        let (p2x, p2y, p2l) = match &r.p2 {
            Some(p) => (
                fmt_g17(p.location[0]),
                fmt_g17(p.location[1]),
                p.label.as_str(),
            ),
            None => (String::new(), String::new(), ""),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_g17(r.param),
            fmt_g17(r.triple[0]),
            fmt_g17(r.triple[1]),
            fmt_g17(r.triple[2]),
            r.region.r_label,
            r.region.r_all.join(";"),
            r.region.e_labels.join(";"),
            fmt_g17(r.p1.location[0]),
            fmt_g17(r.p1.location[1]),
            r.p1.label,
            p2x,
            p2y,
            p2l,
        ));
    }
    Ok(out)
}

fn cmd_events(a: &SweepArgs) -> CliResult<String> {
    let (path, rows) = run_sweep(a)?;
    let opts = options(a.tau0)?;
    let events = detect_events(&path, &rows);
    let env = ReportEnvelope::new(
        "events",
        value(&path),
        json!({ "family": "V" }),
        thresholds(&opts),
        json!({ "rows": rows.len(), "events": value(&events) }),
    )
    .with_notes(sweep_notes());
    Ok(env.to_json())
}

fn cmd_portrait(a: &PortraitArgs) -> CliResult<()> {
    let spec = spec_from_args(&a.spec)?;
    let mut ps = match &a.window {
        Some(w) => {
            let [x0, x1, y0, y1] = parse_list::<4>(w, "--window")?;
            if !(x1 > x0 && y1 > y0) {
                return Err(Failure::invalid(format!(
                    "--window needs x0 < x1 and y0 < y1, got {w:?}"
                )));
            }
            PortraitSpec::window(x0, x1, y0, y1)
        }
        None => PortraitSpec::disk(),
    };
    ps.seeds = a.seeds;
    ps.separatrices = !a.no_separatrices;
    let svg = render_portrait(&spec, &ps)?;
    match &a.out {
        Some(path) => fs::write(path, svg).map_err(|e| Failure {
            code: EXIT_NUMERIC,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => emit(&svg),
    }
}

fn cmd_solve(a: &SolveArgs) -> CliResult<String> {
    let spec = spec_from_args(&a.spec)?;
    let field = build_family_algebraic(&spec)?;
    if !(a.t_max.is_finite() && a.t_max > 0.0) {
        return Err(Failure::invalid("--t-max must be positive"));
    }
    if !(a.h.is_finite() && a.h > 0.0) {
        return Err(Failure::invalid("--h must be positive"));
    }
    let mode = if a.adaptive {
        Mode::adaptive()
    } else {
        Mode::Rk4 { h: a.h }
    };
    let tr = integrate(&field, [a.x0, a.y0], a.t_max, mode)?;
    if tr.termination != Termination::TimeLimit {
        eprintln!(
            "note: integration stopped at t = {} ({:?})",
            fmt_g17(tr.last()[0]),
            tr.termination
        );
    }
    if !a.closed_form {
        let mut out = String::from("t,x,y\n");
        for s in &tr.samples {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_g17(s[0]),
                fmt_g17(s[1]),
                fmt_g17(s[2])
            ));
        }
        return Ok(out);
    }
    let curve = integral_curve(&spec, (a.x0, a.y0))?;
    let mut out = String::from("t,x_closed,y_closed,x_rk4,y_rk4,abs_err\n");
    for s in &tr.samples {
        let [xc, yc] = curve.eval(s[0])?;
        let err = (xc - s[1]).abs().max((yc - s[2]).abs());
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_g17(s[0]),
            fmt_g17(xc),
            fmt_g17(yc),
            fmt_g17(s[1]),
            fmt_g17(s[2]),
            fmt_g17(err)
        ));
    }
    Ok(out)
}

fn cmd_integrals(a: &IntegralsArgs) -> CliResult<String> {
    let spec = spec_from_args(&a.spec)?;
    let fi = first_integral(&spec)?;
    let stats = conservation_drift(&spec, [a.x0, a.y0], a.t_max, a.h)?;
    let mut notes = Vec::new();
    let curve = match integral_curve(&spec, (a.x0, a.y0)) {
        Ok(c) => {
            notes.extend(curve_notes(&spec));
            value(&c)
        }
        Err(e) => json!({ "unavailable": e.to_string() }),
    };
    let var = variational_equation(
        &spec,
        Reference::Flow {
            start: [a.x0, a.y0],
        },
    )?;
    notes.extend(variational_notes(&spec));
    let env = ReportEnvelope::new(
        "integrals",
        value(&spec),
        json!({ "start": [a.x0, a.y0], "t_max": a.t_max, "h": a.h }),
        json!({ "lie_residual_tolerance": 1e-14 }),
        json!({
            "first_integral": value(&fi),
            "conservation": value(&stats),
            "integral_curve": curve,
            "variational_equation": value(&var),
        }),
    )
    .with_notes(notes);
    Ok(env.to_json())
}

fn cmd_verify() -> u8 {
    let mut checks = verify::run_library_checks();
    checks.push(verify::determinism_check());
    checks.sort_by_key(|c| c.id);
    let mut all = true;
    for c in &checks {
        all &= c.passed;
        println!("{}", c.line());
    }
    if all {
        0
    } else {
        EXIT_VERIFY_FAILED
    }
}
