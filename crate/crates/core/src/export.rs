//! Artifact files for a finished run. All quantities are written in MW.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::analysis::{vertices_2d, RampEvent};
use crate::binding::BindingReport;
use crate::engine::DrrResult;
use crate::error::Result;

#[derive(Debug, Clone, Default, Serialize)]
pub struct ExportSummary {
    pub files: Vec<PathBuf>,
    /// region.svg is only drawn for two renewables.
    pub svg_skipped: bool,
}

/// `k,F_mw,cuts,oracle_ms,facets`, one row per outer iteration.
pub fn trace_csv(result: &DrrResult) -> String {
    let base = result.metadata.base_mva;
    let mut s = String::from("k,F_mw,cuts,oracle_ms,facets\n");
    for r in &result.trace {
        let _ = writeln!(
            s,
            "{},{:.9e},{},{:.3},{}",
            r.k,
            r.f * base + 0.0,
            r.cuts_added,
            r.oracle_ms,
            r.facets
        );
    }
    s
}

/// Region description without timings, so that identical inputs give
/// identical bytes.
pub fn region_json(result: &DrrResult) -> Result<String> {
    let w = result.region_mw();
    let vertices = if w.dim <= 2 && !w.is_empty() {
        vertices_2d(&w).ok()
    } else {
        None
    };
    let v = json!({
        "dim": w.dim,
        "rows": w.len(),
        "H": w.h,
        "f_mw": w.f,
        "provenance": w.provenance,
        "box_lo_mw": w.box_lo,
        "box_hi_mw": w.box_hi,
        "vertices_mw": vertices,
        "renewables": result.metadata.renewables,
        "w_bar_mw": result.metadata.w_bar_mw,
        "p_star_mw": result.metadata.p_star_mw,
        "base_mva": result.metadata.base_mva,
        "method": result.metadata.method,
        "seed": result.metadata.seed,
        "config": result.metadata.config,
        "termination": result.termination,
        "iterations": result.trace.len(),
        "angle_limits_included": result.metadata.angle_limits_included,
    });
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

pub fn binding_json(report: &BindingReport, result: &DrrResult) -> Result<String> {
    let v = json!({
        "report": report,
        "seed": result.metadata.seed,
        "config": result.metadata.config,
    });
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

pub fn event_json(event: &RampEvent, result: &DrrResult) -> Result<String> {
    let v = json!({
        "event": event,
        "renewables": result.metadata.renewables,
        "seed": result.metadata.seed,
        "config": result.metadata.config,
    });
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

/// Polygon, forecast marker and the arrow to the nearest boundary point,
/// axes in MW. `None` unless the region is two-dimensional.
pub fn region_svg(result: &DrrResult, event: Option<&RampEvent>) -> Option<String> {
    let w = result.region_mw();
    if w.dim != 2 {
        return None;
    }
    let verts = vertices_2d(&w).ok()?;
    let (x0, x1) = (w.box_lo[0], w.box_hi[0]);
    let (y0, y1) = (w.box_lo[1], w.box_hi[1]);
    let (width, height, pad) = (480.0, 480.0, 60.0);
    let sx = |x: f64| pad + (x - x0) / (x1 - x0).max(1e-12) * (width - 2.0 * pad);
    let sy = |y: f64| height - pad - (y - y0) / (y1 - y0).max(1e-12) * (height - 2.0 * pad);
    let names = &result.metadata.renewables;
    let label = |j: usize| {
        names
            .get(j)
            .cloned()
            .unwrap_or_else(|| format!("w{}", j + 1))
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"##
    );
    let _ = writeln!(
        s,
        r##"<defs><marker id="head" markerWidth="8" markerHeight="8" refX="7" refY="4" orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="#d4a017"/></marker></defs>"##
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"##
    );
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#999" stroke-dasharray="4 3"/>"##,
        sx(x0),
        sy(y1),
        sx(x1) - sx(x0),
        sy(y0) - sy(y1)
    );
    let mut d = String::new();
    for (k, v) in verts.iter().enumerate() {
        let _ = write!(
            d,
            "{}{:.3},{:.3} ",
            if k == 0 { "M" } else { "L" },
            sx(v[0]),
            sy(v[1])
        );
    }
    d.push('Z');
    let _ = writeln!(
        s,
        r##"<path class="region" d="{d}" fill="#9fd39f" fill-opacity="0.6" stroke="#2e7d32" stroke-width="1.5"/>"##
    );
    for (k, v) in verts.iter().enumerate() {
        let _ = writeln!(
            s,
            r##"<text x="{:.3}" y="{:.3}" fill="#2e7d32">{}</text>"##,
            sx(v[0]) + 4.0,
            sy(v[1]) - 4.0,
            vertex_name(k)
        );
    }
    let wb = &result.metadata.w_bar_mw;
    let _ = writeln!(
        s,
        r##"<circle cx="{:.3}" cy="{:.3}" r="4" fill="#c62828"/>"##,
        sx(wb[0]),
        sy(wb[1])
    );
    if let Some(e) = event {
        let _ = writeln!(
            s,
            r##"<line class="event" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#d4a017" stroke-width="2" marker-end="url(#head)"/>"##,
            sx(e.from[0]),
            sy(e.from[1]),
            sx(e.to[0]),
            sy(e.to[1])
        );
    }
    // axes
    let _ = writeln!(
        s,
        r##"<line x1="{p}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{p}" y1="{b}" x2="{p}" y2="{t}" stroke="black"/>"##,
        p = pad,
        b = height - pad,
        r = width - pad,
        t = pad
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<text x="{:.3}" y="{}" text-anchor="middle">{:.0}</text><text x="{}" y="{:.3}" text-anchor="end">{:.0}</text>"##,
            sx(fx),
            height - pad + 16.0,
            fx,
            pad - 6.0,
            sy(fy) + 4.0,
            fy
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="{}" y="{}" text-anchor="middle">{} (MW)</text>"##,
        width / 2.0,
        height - 14.0,
        label(0)
    );
    let _ = writeln!(
        s,
        r##"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{} (MW)</text>"##,
        height / 2.0,
        height / 2.0,
        label(1)
    );
    s.push_str("</svg>\n");
    Some(s)
}

fn vertex_name(k: usize) -> String {
    let mut k = k;
    let mut s = String::new();
    loop {
        s.insert(0, (b'A' + (k % 26) as u8) as char);
        if k < 26 {
            break;
        }
        k = k / 26 - 1;
    }
    s
}

/// Writes trace.csv, region.json, binding.json (when a report is given),
/// event.json (when an event is given) and region.svg (2-D only).
pub fn export_artifacts(
    result: &DrrResult,
    report: Option<&BindingReport>,
    event: Option<&RampEvent>,
    out_dir: &Path,
) -> Result<ExportSummary> {
    fs::create_dir_all(out_dir)?;
    let mut summary = ExportSummary::default();
    let mut put = |name: &str, text: String| -> Result<()> {
        let p = out_dir.join(name);
        fs::write(&p, text)?;
        summary.files.push(p);
        Ok(())
    };
    put("trace.csv", trace_csv(result))?;
    put("region.json", region_json(result)?)?;
    if let Some(r) = report {
        put("binding.json", binding_json(r, result)?)?;
    }
    if let Some(e) = event {
        put("event.json", event_json(e, result)?)?;
    }
    match region_svg(result, event) {
        Some(svg) => put("region.svg", svg)?,
        None => summary.svg_skipped = true,
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::vertex_name;

    #[test]
    fn vertex_names() {
        assert_eq!(vertex_name(0), "A");
        assert_eq!(vertex_name(6), "G");
        assert_eq!(vertex_name(26), "AA");
    }
}
