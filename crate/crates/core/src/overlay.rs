//! SVG overlays: one drawing per frame with each detection's box stroked in
//! its risk-tier colour on a blank canvas.

use std::fmt::Write;

use crate::distancing::FrameAssessment;
use crate::ingest::Detection;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
}

impl Default for Canvas {
    fn default() -> Self {
        Self { width: 704.0, height: 576.0 }
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders `detections` (one frame, in the order used for `assessment`).
pub fn render_frame_svg(
    video_id: &str,
    detections: &[Detection],
    assessment: &FrameAssessment,
    canvas: Canvas,
) -> String {
    assert_eq!(detections.len(), assessment.len(), "one tier per detection");
    let mut svg = String::new();
    let (w, h) = (canvas.width, canvas.height);
    writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#)
        .unwrap();
    writeln!(svg, r##"  <rect x="0" y="0" width="{w}" height="{h}" fill="#1e1e1e"/>"##).unwrap();
    writeln!(
        svg,
        r##"  <text x="8" y="20" fill="#ffffff" font-family="monospace" font-size="14">{} frame {}</text>"##,
        escape(video_id),
        assessment.frame_index
    )
    .unwrap();
    for (i, (d, tier)) in detections.iter().zip(&assessment.tiers).enumerate() {
        let b = d.bbox;
        let c = assessment.centroids[i];
        writeln!(
            svg,
            r#"  <rect class="{tier}" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="{}" stroke-width="3"/>"#,
            b.x_min(),
            b.y_min(),
            b.width(),
            b.height(),
            tier.color()
        )
        .unwrap();
        writeln!(svg, r#"  <circle cx="{}" cy="{}" r="3" fill="{}"/>"#, c.x, c.y, tier.color()).unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

/// File name used for a frame's overlay.
pub fn overlay_file_name(video_id: &str, frame_index: u64) -> String {
    let safe: String =
        video_id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    format!("{safe}_frame_{frame_index:06}.svg")
}
