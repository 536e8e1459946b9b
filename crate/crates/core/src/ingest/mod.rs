//! Detection-stream and headcount interchange.
//!
//! Two detection formats are supported, both line oriented:
//!
//! * NDJSON, one object per line:
//!   `{"video_id":"V01","frame":0,"x":10,"y":20,"w":30,"h":40,"score":0.9,"label":"person"}`.
//!   A record may give corners (`x2`, `y2`) instead of `w`/`h`; they are
//!   converted on read. An optional metadata line without a `frame` key,
//!   `{"video_id":"V01","fps":4.0,"frame_count":600}`, sets the stream's frame
//!   rate and length. Unknown keys (such as a synthetic `tag`) are ignored.
//! * CSV with header `video_id,frame,x,y,w,h,score,label`. Metadata lines use
//!   the same JSON object prefixed by `#` and must precede the header.
//!
//! Headcount files are CSV with header `frame,ground_truth,predicted`; the
//! `predicted` cell may be blank.

mod csv_format;
mod headcount;
mod ndjson;
mod types;

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use headcount::{parse_headcounts, write_headcounts};
pub use types::{
    BoundingBox, Detection, DetectionStream, FrameGroups, FrameSlice, HeadcountEntry, HeadcountSeries, Point,
    ValidationError, DEFAULT_FPS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: {source}")]
    InvariantViolation {
        line: usize,
        #[source]
        source: ValidationError,
    },
    #[error("input holds no records and no metadata header")]
    EmptyInput,
    #[error("line {line}: negative count in column `{column}`")]
    NegativeCount { line: usize, column: &'static str },
    #[error("expected a single video, found {}", .0.join(", "))]
    MultipleVideos(Vec<String>),
}

impl IngestError {
    /// Source line of the offending record, when there is one.
    pub fn line(&self) -> Option<usize> {
        match self {
            Self::MalformedRecord { line, .. }
            | Self::InvariantViolation { line, .. }
            | Self::NegativeCount { line, .. } => Some(*line),
            Self::EmptyInput | Self::MultipleVideos(_) => None,
        }
    }
}

/// Detection file encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Ndjson,
    Csv,
}

impl Format {
    /// Guesses the format from a file extension; anything but `.csv` is NDJSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Ndjson,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Ndjson => "ndjson",
            Format::Csv => "csv",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ndjson" | "jsonl" => Ok(Format::Ndjson),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected ndjson or csv)")),
        }
    }
}

/// Stream-level metadata line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct StreamHeader {
    pub video_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_count: Option<u64>,
}

impl StreamHeader {
    fn of(stream: &DetectionStream) -> Self {
        Self {
            video_id: stream.video_id().to_owned(),
            fps: Some(stream.fps()),
            frame_count: Some(stream.frame_count()),
        }
    }

    /// Whether the stream's metadata can be recovered from its records alone.
    fn is_implied_by(stream: &DetectionStream) -> bool {
        if stream == &DetectionStream::default() {
            return true;
        }
        let max_frame = stream.detections().last().map(|d| d.frame_index);
        max_frame.is_some_and(|m| m + 1 == stream.frame_count()) && stream.fps() == DEFAULT_FPS
    }

    /// Multi-video files carry a metadata line for every video so the
    /// reader sees them in the written order.
    pub(crate) fn needed(stream: &DetectionStream, stream_count: usize) -> bool {
        stream_count > 1 || !Self::is_implied_by(stream)
    }
}

/// Output of the format-specific readers before grouping into streams.
#[derive(Default)]
pub(crate) struct RawInput {
    pub headers: Vec<(usize, StreamHeader)>,
    pub records: Vec<(usize, String, Detection)>,
    /// A CSV column header counts as "some header" for the empty-input rule.
    pub saw_column_header: bool,
}

pub(crate) fn build_detection(
    line: usize,
    frame: i64,
    bbox: Result<BoundingBox, ValidationError>,
    score: f64,
    label: String,
) -> Result<Detection, IngestError> {
    let frame = u64::try_from(frame).map_err(|_| IngestError::MalformedRecord {
        line,
        reason: format!("frame must be a non-negative integer, got {frame}"),
    })?;
    let bbox = bbox.map_err(|source| IngestError::InvariantViolation { line, source })?;
    Detection::new(frame, bbox, score, label).map_err(|source| IngestError::InvariantViolation { line, source })
}

fn group_streams(raw: RawInput) -> Result<Vec<DetectionStream>, IngestError> {
    if raw.records.is_empty() && raw.headers.is_empty() && !raw.saw_column_header {
        return Err(IngestError::EmptyInput);
    }

    let mut order: Vec<String> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();
    let mut headers: Vec<Option<(usize, StreamHeader)>> = Vec::new();
    let mut members: Vec<Vec<Detection>> = Vec::new();

    let mut index_of = |id: &str, order: &mut Vec<String>, headers: &mut Vec<_>, members: &mut Vec<Vec<_>>| {
        *slot.entry(id.to_owned()).or_insert_with(|| {
            order.push(id.to_owned());
            headers.push(None);
            members.push(Vec::new());
            order.len() - 1
        })
    };

    let mut first_seen: Vec<(usize, &str)> = raw.headers.iter().map(|(l, h)| (*l, h.video_id.as_str())).collect();
    first_seen.extend(raw.records.iter().map(|(l, id, _)| (*l, id.as_str())));
    first_seen.sort_by_key(|&(l, _)| l);
    for (_, id) in first_seen {
        index_of(id, &mut order, &mut headers, &mut members);
    }

    for (line, header) in raw.headers {
        let i = index_of(&header.video_id, &mut order, &mut headers, &mut members);
        if headers[i].is_some() {
            return Err(IngestError::MalformedRecord {
                line,
                reason: format!("duplicate metadata line for video `{}`", header.video_id),
            });
        }
        headers[i] = Some((line, header));
    }
    let mut last_line = vec![0usize; order.len()];
    for (line, video_id, det) in raw.records {
        let i = index_of(&video_id, &mut order, &mut headers, &mut members);
        if last_line.len() <= i {
            last_line.resize(i + 1, 0);
        }
        last_line[i] = line;
        members[i].push(det);
    }

    order
        .into_iter()
        .zip(headers)
        .zip(members)
        .zip(last_line)
        .map(|(((video_id, header), dets), line)| {
            let (header_line, fps, frame_count) = match header {
                Some((l, h)) => (l, h.fps.unwrap_or(DEFAULT_FPS), h.frame_count),
                None => (line, DEFAULT_FPS, None),
            };
            DetectionStream::from_unsorted(video_id, fps, frame_count, dets)
                .map_err(|source| IngestError::InvariantViolation { line: header_line, source })
        })
        .collect()
}

/// Parses every video in the input, in order of first appearance.
pub fn parse_detection_streams(bytes: &[u8], format: Format) -> Result<Vec<DetectionStream>, IngestError> {
    let raw = match format {
        Format::Ndjson => ndjson::read(bytes)?,
        Format::Csv => csv_format::read(bytes)?,
    };
    group_streams(raw)
}

/// Parses an input holding exactly one video.
///
/// A CSV file with a column header but no rows parses to an empty default
/// stream; NDJSON with neither records nor a metadata line is
/// [`IngestError::EmptyInput`].
pub fn parse_detections(bytes: &[u8], format: Format) -> Result<DetectionStream, IngestError> {
    let mut streams = parse_detection_streams(bytes, format)?;
    match streams.len() {
        0 => Ok(DetectionStream::default()),
        1 => Ok(streams.remove(0)),
        _ => Err(IngestError::MultipleVideos(streams.iter().map(|s| s.video_id().to_owned()).collect())),
    }
}

pub fn write_detections(stream: &DetectionStream, format: Format) -> Vec<u8> {
    write_detection_streams(std::slice::from_ref(stream), format)
}

pub fn write_detection_streams(streams: &[DetectionStream], format: Format) -> Vec<u8> {
    match format {
        Format::Ndjson => ndjson::write(streams, None),
        Format::Csv => csv_format::write(streams),
    }
}

/// NDJSON with an extra `tag` key per record, taken from `tags[i]` for the
/// `i`-th detection of the stream. Readers ignore the key.
pub fn write_tagged_ndjson(stream: &DetectionStream, tags: &[String]) -> Vec<u8> {
    assert_eq!(tags.len(), stream.len(), "one tag per detection");
    ndjson::write(std::slice::from_ref(stream), Some(tags))
}

/// Keeps the detections whose label equals `label`.
pub fn filter_by_label(stream: &DetectionStream, label: &str) -> DetectionStream {
    stream.retain(|d| d.label() == label)
}

/// Keeps the detections scoring at least `min_score`.
pub fn filter_by_score(stream: &DetectionStream, min_score: f64) -> DetectionStream {
    stream.retain(|d| d.score() >= min_score)
}

#[cfg(test)]
mod tests {
    use super::*;

    const V01: &str = r#"{"video_id":"V01","frame":0,"x":10,"y":20,"w":30,"h":40,"score":0.9,"label":"person"}"#;

    fn det(frame: u64, x: f64, label: &str) -> Detection {
        Detection::new(frame, BoundingBox::new(x, 0.0, 10.0, 10.0).unwrap(), 0.75, label).unwrap()
    }

    #[test]
    fn single_ndjson_record() {
        let s = parse_detections(V01.as_bytes(), Format::Ndjson).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.frame_count(), 1);
        assert_eq!(s.fps(), DEFAULT_FPS);
        assert_eq!(s.video_id(), "V01");
        let d = &s.detections()[0];
        assert_eq!(d.bbox, BoundingBox::new(10.0, 20.0, 30.0, 40.0).unwrap());
        assert_eq!(d.score(), 0.9);
        assert_eq!(d.label(), "person");
    }

    #[test]
    fn negative_width_is_invariant_violation() {
        let line = V01.replace(r#""w":30"#, r#""w":-5"#);
        let err = parse_detections(line.as_bytes(), Format::Ndjson).unwrap_err();
        assert!(matches!(
            err,
            IngestError::InvariantViolation { line: 1, source: ValidationError::NonPositiveWidth(_) }
        ));
    }

    #[test]
    fn records_are_resorted() {
        let input = [2, 0, 1].map(|f| V01.replace(r#""frame":0"#, &format!(r#""frame":{f}"#))).join("\n");
        let s = parse_detections(input.as_bytes(), Format::Ndjson).unwrap();
        let frames: Vec<_> = s.detections().iter().map(|d| d.frame_index).collect();
        assert_eq!(frames, vec![0, 1, 2]);
        assert_eq!(s.frame_count(), 3);
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(parse_detections(b"", Format::Ndjson), Err(IngestError::EmptyInput));
        assert_eq!(parse_detections(b"\n  \n", Format::Ndjson), Err(IngestError::EmptyInput));
        assert_eq!(parse_detections(b"", Format::Csv), Err(IngestError::EmptyInput));
        let header_only = write_detections(&DetectionStream::default(), Format::Csv);
        assert_eq!(header_only, b"video_id,frame,x,y,w,h,score,label\n");
        assert_eq!(parse_detections(&header_only, Format::Csv).unwrap(), DetectionStream::default());
        assert!(write_detections(&DetectionStream::default(), Format::Ndjson).is_empty());
    }

    #[test]
    fn metadata_line_sets_frame_count_and_fps() {
        let input = format!("{{\"video_id\":\"V01\",\"fps\":25.0,\"frame_count\":10}}\n{V01}\n");
        let s = parse_detections(input.as_bytes(), Format::Ndjson).unwrap();
        assert_eq!(s.frame_count(), 10);
        assert_eq!(s.fps(), 25.0);

        let header_only = "{\"video_id\":\"V09\",\"frame_count\":5}";
        let s = parse_detections(header_only.as_bytes(), Format::Ndjson).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.frame_count(), 5);

        let too_short = format!("{{\"video_id\":\"V01\",\"frame_count\":0}}\n{V01}\n");
        assert!(matches!(
            parse_detections(too_short.as_bytes(), Format::Ndjson),
            Err(IngestError::InvariantViolation { line: 1, .. })
        ));
    }

    #[test]
    fn corner_encoding_is_converted() {
        let line = r#"{"video_id":"V","frame":3,"x":10,"y":20,"x2":40,"y2":60,"score":0.5,"label":"person"}"#;
        let s = parse_detections(line.as_bytes(), Format::Ndjson).unwrap();
        assert_eq!(s.detections()[0].bbox, BoundingBox::new(10.0, 20.0, 30.0, 40.0).unwrap());
    }

    #[test]
    fn malformed_rows_report_their_line() {
        let input = format!("{V01}\n{{not json\n");
        let err = parse_detections(input.as_bytes(), Format::Ndjson).unwrap_err();
        assert_eq!(err.line(), Some(2));
        assert!(matches!(err, IngestError::MalformedRecord { .. }));

        let missing = r#"{"video_id":"V","frame":3,"x":10,"y":20,"score":0.5,"label":"person"}"#;
        assert!(matches!(
            parse_detections(missing.as_bytes(), Format::Ndjson),
            Err(IngestError::MalformedRecord { line: 1, .. })
        ));

        let negative_frame = V01.replace(r#""frame":0"#, r#""frame":-1"#);
        assert!(parse_detections(negative_frame.as_bytes(), Format::Ndjson).is_err());

        let bad_score = V01.replace("0.9", "1.2");
        assert!(matches!(
            parse_detections(bad_score.as_bytes(), Format::Ndjson),
            Err(IngestError::InvariantViolation { source: ValidationError::ScoreOutOfRange(_), .. })
        ));
    }

    #[test]
    fn csv_errors_report_their_line() {
        let input = "video_id,frame,x,y,w,h,score,label\nV,0,1,1,5,5,0.5,person\nV,1,1,1,abc,5,0.5,person\n";
        let err = parse_detections(input.as_bytes(), Format::Csv).unwrap_err();
        assert_eq!(err.line(), Some(3));
        let input = "video_id,frame,x,y,w,h,score,label\nV,0,-3,1,5,5,0.5,person\n";
        assert!(matches!(
            parse_detections(input.as_bytes(), Format::Csv),
            Err(IngestError::InvariantViolation { line: 2, .. })
        ));
        let input = "video_id,frame,x,y,score,label\nV,0,1,1,0.5,person\n";
        assert!(matches!(
            parse_detections(input.as_bytes(), Format::Csv),
            Err(IngestError::MalformedRecord { line: 1, .. })
        ));
    }

    #[test]
    fn csv_quoting() {
        let input = "video_id,frame,x,y,w,h,score,label\n\"bus, cam 2\",0,1,1,5,5,0.5,\"person \"\"a\"\"\"\n";
        let s = parse_detections(input.as_bytes(), Format::Csv).unwrap();
        assert_eq!(s.video_id(), "bus, cam 2");
        assert_eq!(s.detections()[0].label(), "person \"a\"");
        let again = parse_detections(&write_detections(&s, Format::Csv), Format::Csv).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn multiple_videos() {
        let input = format!("{V01}\n{}\n", V01.replace("V01", "V02"));
        assert!(matches!(parse_detections(input.as_bytes(), Format::Ndjson), Err(IngestError::MultipleVideos(_))));
        let streams = parse_detection_streams(input.as_bytes(), Format::Ndjson).unwrap();
        let ids: Vec<_> = streams.iter().map(|s| s.video_id()).collect();
        assert_eq!(ids, vec!["V01", "V02"]);
        for f in [Format::Ndjson, Format::Csv] {
            let back = parse_detection_streams(&write_detection_streams(&streams, f), f).unwrap();
            assert_eq!(back, streams);
        }
    }

    #[test]
    fn duplicates_are_kept() {
        let input = format!("{V01}\n{V01}\n");
        assert_eq!(parse_detections(input.as_bytes(), Format::Ndjson).unwrap().len(), 2);
    }

    #[test]
    fn exact_score_round_trip() {
        let d = Detection::new(0, BoundingBox::new(1.0, 2.0, 3.0, 4.0).unwrap(), 0.123456789, "person").unwrap();
        let s = DetectionStream::new("V", 4.0, 1, vec![d]).unwrap();
        for f in [Format::Ndjson, Format::Csv] {
            let back = parse_detections(&write_detections(&s, f), f).unwrap();
            assert_eq!(back.detections()[0].score(), 0.123456789);
        }
    }

    #[test]
    fn label_filter() {
        let s =
            DetectionStream::new("v", 4.0, 5, vec![det(0, 0.0, "person"), det(1, 0.0, "chair"), det(1, 5.0, "person")])
                .unwrap();
        let people = filter_by_label(&s, "person");
        assert_eq!(people.len(), 2);
        assert_eq!(people.frame_count(), 5);
        assert_eq!(filter_by_label(&people, "person"), people);
        let none = filter_by_label(&s, "bicycle");
        assert!(none.is_empty());
        assert_eq!(none.frame_count(), 5);
    }

    #[test]
    fn score_filter_is_inclusive() {
        let d = |score| Detection::new(0, BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap(), score, "person").unwrap();
        let s = DetectionStream::new("v", 4.0, 1, vec![d(0.49), d(0.5), d(0.9)]).unwrap();
        assert_eq!(filter_by_score(&s, 0.5).len(), 2);
    }

    #[test]
    fn tagged_output_parses_like_plain() {
        let s = DetectionStream::new("v", 4.0, 2, vec![det(0, 0.0, "person"), det(1, 0.0, "person")]).unwrap();
        let tagged = write_tagged_ndjson(&s, &["tp:0".into(), "transient_fp".into()]);
        assert!(String::from_utf8_lossy(&tagged).contains("\"tag\":\"transient_fp\""));
        assert_eq!(parse_detections(&tagged, Format::Ndjson).unwrap(), s);
    }

    #[test]
    fn format_names() {
        assert_eq!("CSV".parse::<Format>().unwrap(), Format::Csv);
        assert_eq!("jsonl".parse::<Format>().unwrap(), Format::Ndjson);
        assert!("xml".parse::<Format>().is_err());
        assert_eq!(Format::from_path(Path::new("a/b.CSV")), Format::Csv);
        assert_eq!(Format::from_path(Path::new("a/b.ndjson")), Format::Ndjson);
    }
}
