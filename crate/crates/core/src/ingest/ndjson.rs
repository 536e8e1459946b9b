use serde::{Deserialize, Serialize};

use super::{build_detection, BoundingBox, DetectionStream, IngestError, RawInput, StreamHeader};

#[derive(Deserialize)]
struct Line {
    video_id: Option<String>,
    frame: Option<i64>,
    x: Option<f64>,
    y: Option<f64>,
    w: Option<f64>,
    h: Option<f64>,
    x2: Option<f64>,
    y2: Option<f64>,
    score: Option<f64>,
    label: Option<String>,
    fps: Option<f64>,
    frame_count: Option<u64>,
}

#[derive(Serialize)]
struct OutRecord<'a> {
    video_id: &'a str,
    frame: u64,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    score: f64,
    label: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    tag: Option<&'a str>,
}

fn missing(line: usize, field: &str) -> IngestError {
    IngestError::MalformedRecord { line, reason: format!("missing field `{field}`") }
}

pub(super) fn read(bytes: &[u8]) -> Result<RawInput, IngestError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| IngestError::MalformedRecord { line: 1, reason: format!("input is not UTF-8: {e}") })?;
    let mut raw = RawInput::default();
    for (i, text_line) in text.lines().enumerate() {
        let line = i + 1;
        if text_line.trim().is_empty() {
            continue;
        }
        let rec: Line = serde_json::from_str(text_line)
            .map_err(|e| IngestError::MalformedRecord { line, reason: e.to_string() })?;
        let video_id = rec.video_id.ok_or_else(|| missing(line, "video_id"))?;

        let Some(frame) = rec.frame else {
            if rec.fps.is_none() && rec.frame_count.is_none() {
                return Err(missing(line, "frame"));
            }
            raw.headers.push((line, StreamHeader { video_id, fps: rec.fps, frame_count: rec.frame_count }));
            continue;
        };

        let x = rec.x.ok_or_else(|| missing(line, "x"))?;
        let y = rec.y.ok_or_else(|| missing(line, "y"))?;
        let bbox = match (rec.w, rec.h, rec.x2, rec.y2) {
            (Some(w), Some(h), _, _) => BoundingBox::new(x, y, w, h),
            (None, None, Some(x2), Some(y2)) => BoundingBox::from_corners(x, y, x2, y2),
            (None, _, _, _) => return Err(missing(line, "w")),
            (Some(_), None, _, _) => return Err(missing(line, "h")),
        };
        let score = rec.score.ok_or_else(|| missing(line, "score"))?;
        let label = rec.label.ok_or_else(|| missing(line, "label"))?;
        let det = build_detection(line, frame, bbox, score, label)?;
        raw.records.push((line, video_id, det));
    }
    Ok(raw)
}

pub(super) fn write(streams: &[DetectionStream], tags: Option<&[String]>) -> Vec<u8> {
    let mut out = Vec::new();
    for stream in streams {
        if StreamHeader::needed(stream, streams.len()) {
            serde_json::to_writer(&mut out, &StreamHeader::of(stream)).expect("header serializes");
            out.push(b'\n');
        }
        for (i, d) in stream.detections().iter().enumerate() {
            let rec = OutRecord {
                video_id: stream.video_id(),
                frame: d.frame_index,
                x: d.bbox.x_min(),
                y: d.bbox.y_min(),
                w: d.bbox.width(),
                h: d.bbox.height(),
                score: d.score(),
                label: d.label(),
                tag: tags.map(|t| t[i].as_str()),
            };
            serde_json::to_writer(&mut out, &rec).expect("record serializes");
            out.push(b'\n');
        }
    }
    out
}
