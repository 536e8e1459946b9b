//! Write tier-coloured SVG overlays for a few frames of a crowded train.
//!
//! ```text
//! cargo run --example svg_overlays -- /tmp/overlays
//! ```

use std::path::PathBuf;

use sdtransit::overlay::{overlay_file_name, render_frame_svg, Canvas};
use sdtransit::synth::{generate, preset};
use sdtransit::{assess_stream, DistancingConfig};

fn main() -> std::io::Result<()> {
    let dir =
        std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("sdtransit_overlays"));
    std::fs::create_dir_all(&dir)?;

    let s = generate(&preset("crowded_train").unwrap()).unwrap();
    let assessment = assess_stream(&s.noisy, &DistancingConfig::default()).unwrap();
    for (slice, frame) in s.noisy.frames().zip(&assessment.frames).step_by(100) {
        let svg = render_frame_svg(s.noisy.video_id(), slice.detections, frame, Canvas::default());
        let path = dir.join(overlay_file_name(s.noisy.video_id(), frame.frame_index));
        std::fs::write(&path, svg)?;
        println!("{} ({} boxes)", path.display(), frame.len());
    }
    Ok(())
}
