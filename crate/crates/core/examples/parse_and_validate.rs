//! Parse detections from NDJSON and CSV, inspect per-frame groups, and see
//! what a malformed record looks like.
//!
//! ```text
//! cargo run --example parse_and_validate
//! ```

use sdtransit::ingest::{filter_by_score, parse_detection_streams, parse_detections, write_detections};
use sdtransit::Format;

const NDJSON: &str = r#"{"video_id":"bus-12","fps":4,"frame_count":6}
{"video_id":"bus-12","frame":0,"x":100,"y":220,"w":60,"h":100,"score":0.97,"label":"person"}
{"video_id":"bus-12","frame":0,"x":250,"y":225,"w":58,"h":96,"score":0.91,"label":"person"}
{"video_id":"bus-12","frame":1,"x":101,"y":221,"w":60,"h":100,"score":0.95,"label":"person"}
{"video_id":"bus-12","frame":1,"x":520,"y":60,"w":30,"h":70,"score":0.42,"label":"person"}
{"video_id":"bus-12","frame":4,"x":100,"y":219,"w":60,"h":100,"score":0.96,"label":"person"}
"#;

fn main() {
    let stream = parse_detections(NDJSON.as_bytes(), Format::Ndjson).expect("valid input");
    println!(
        "{}: {} detections over {} frames at {} fps",
        stream.video_id(),
        stream.len(),
        stream.frame_count(),
        stream.fps()
    );
    for frame in stream.frames() {
        let centroids: Vec<String> =
            frame.detections.iter().map(|d| format!("({:.0}, {:.0})", d.centroid().x, d.centroid().y)).collect();
        println!("  frame {}: {}", frame.frame_index, centroids.join(" "));
    }

    // The low-confidence box through the window goes first.
    let confident = filter_by_score(&stream, 0.5);
    println!("score >= 0.5 keeps {} of {}", confident.len(), stream.len());

    // Same stream as CSV; the metadata line keeps fps and frame_count.
    let csv = write_detections(&stream, Format::Csv);
    print!("\n{}", String::from_utf8_lossy(&csv));
    assert_eq!(parse_detections(&csv, Format::Csv).unwrap(), stream);

    let broken = "video_id,frame,x,y,w,h,score,label\ncam,0,10,10,20,40,0.9,person\ncam,1,10,10,-20,40,0.9,person\n";
    match parse_detection_streams(broken.as_bytes(), Format::Csv) {
        Ok(_) => unreachable!(),
        Err(e) => println!("\nrejected: {e}"),
    }
}
