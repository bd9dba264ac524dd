//! WebAssembly bindings for the browser demo.
//!
//! Every export takes plain strings and numbers and returns a string; errors
//! come back as JavaScript exceptions carrying the library message.

use quadradyn::bifurcate::region_of;
use quadradyn::classify::{classify_all_finite, ClassifyOptions};
use quadradyn::compactify::infinite_singular_points;
use quadradyn::dynamics::{render_portrait, PortraitSpec};
use quadradyn::FamilySpec;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn parse_spec(spec_json: &str) -> Result<FamilySpec, String> {
    let spec: FamilySpec =
        serde_json::from_str(spec_json).map_err(|e| format!("invalid spec: {e}"))?;
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

/// Phase portrait as SVG, on the Poincaré disk or on `[-3, 3]²`.
pub fn portrait(spec_json: &str, disk: bool, seeds: usize) -> Result<String, String> {
    let spec = parse_spec(spec_json)?;
    let mut ps = if disk {
        PortraitSpec::disk()
    } else {
        PortraitSpec::window(-3.0, 3.0, -3.0, 3.0)
    };
    ps.seeds = seeds.min(30);
    render_portrait(&spec, &ps).map_err(|e| e.to_string())
}

/// Finite (and optionally infinite) critical points as JSON.
pub fn classify(spec_json: &str, infinity: bool) -> Result<String, String> {
    let spec = parse_spec(spec_json)?;
    let opts = ClassifyOptions::default();
    let finite = classify_all_finite(&spec, &opts).map_err(|e| e.to_string())?;
    let mut out = json!({ "finite_points": finite });
    if infinity {
        let inf = infinite_singular_points(&spec, &opts).map_err(|e| e.to_string())?;
        out["infinite_points"] = json!(inf);
    }
    serde_json::to_string_pretty(&out).map_err(|e| e.to_string())
}

const REGION_COLORS: [(&str, &str); 9] = [
    ("R1", "#8dd3c7"),
    ("R2", "#ffffb3"),
    ("R3", "#bebada"),
    ("R4", "#fb8072"),
    ("R5", "#80b1d3"),
    ("R6", "#fdb462"),
    ("R7", "#b3de69"),
    ("R8", "#fccde5"),
    ("none", "#d9d9d9"),
];

/// Region map of the damped family over the `(b, d)` rectangle at fixed `c`,
/// as an `n × n` grid of colored cells with a legend.
pub fn region_map(
    c: f64,
    bmin: f64,
    bmax: f64,
    dmin: f64,
    dmax: f64,
    n: usize,
) -> Result<String, String> {
    if !(bmin < bmax && dmin < dmax) || ![c, bmin, bmax, dmin, dmax].iter().all(|v| v.is_finite()) {
        return Err("region map needs finite bounds with min < max".into());
    }
    let n = n.clamp(2, 200);
    let size = 400.0;
    let cell = size / n as f64;
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {size}" width="{w}" height="{size}">"#,
        w = size + 80.0
    );
    for i in 0..n {
        for j in 0..n {
            let b = bmin + (i as f64 + 0.5) * (bmax - bmin) / n as f64;
            let d = dmax - (j as f64 + 0.5) * (dmax - dmin) / n as f64;
            let r = region_of(b, c, d);
            let fill = REGION_COLORS
                .iter()
                .find(|(k, _)| *k == r.r_label)
                .map_or("#ffffff", |(_, v)| v);
            svg.push_str(&format!(
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}" data-region="{}"><title>b={b:.3} d={d:.3}: {}</title></rect>"#,
                i as f64 * cell,
                j as f64 * cell,
                cell + 0.05,
                cell + 0.05,
                r.r_label,
                r.r_label,
            ));
        }
    }
    for (k, (name, color)) in REGION_COLORS.iter().enumerate() {
        let y = 10.0 + 22.0 * k as f64;
        svg.push_str(&format!(
            r#"<rect x="{x}" y="{y}" width="14" height="14" fill="{color}"/><text x="{tx}" y="{ty}" font-size="12" font-family="sans-serif">{name}</text>"#,
            x = size + 10.0,
            tx = size + 30.0,
            ty = y + 11.0,
        ));
    }
    svg.push_str("</svg>");
    Ok(svg)
}

#[wasm_bindgen]
pub fn portrait_svg(spec_json: &str, disk: bool, seeds: usize) -> Result<String, JsError> {
    portrait(spec_json, disk, seeds).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn classify_json(spec_json: &str, infinity: bool) -> Result<String, JsError> {
    classify(spec_json, infinity).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn region_map_svg(
    c: f64,
    bmin: f64,
    bmax: f64,
    dmin: f64,
    dmax: f64,
    n: usize,
) -> Result<String, JsError> {
    region_map(c, bmin, bmax, dmin, dmax, n).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_reports_a_cusp() {
        let out = classify(r#"{"family":"I","c":1}"#, false).unwrap();
        assert!(out.contains("\"Cusp\""));
    }

    #[test]
    fn bad_spec_is_an_error() {
        assert!(classify(r#"{"family":"V","b":0,"c":1,"s":0}"#, true).is_err());
        assert!(portrait("not json", true, 4).is_err());
    }

    #[test]
    fn region_map_has_n_squared_cells() {
        let svg = region_map(1.0, -2.0, 2.0, -4.0, 4.0, 8).unwrap();
        assert_eq!(svg.matches("data-region=").count(), 64);
        assert!(region_map(1.0, 2.0, -2.0, -4.0, 4.0, 8).is_err());
    }

    #[test]
    fn portrait_is_svg() {
        let svg = portrait(r#"{"family":"II","b":1}"#, false, 3).unwrap();
        assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    }
}
