use super::{build_detection, BoundingBox, DetectionStream, IngestError, RawInput, StreamHeader};

const COLUMNS: [&str; 8] = ["video_id", "frame", "x", "y", "w", "h", "score", "label"];

fn malformed(line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::MalformedRecord { line, reason: reason.into() }
}

pub(super) fn read(bytes: &[u8]) -> Result<RawInput, IngestError> {
    let mut raw = RawInput::default();

    // `#{...}` metadata lines precede the column header.
    let mut rest = bytes;
    let mut consumed_lines = 0usize;
    while rest.first() == Some(&b'#') {
        consumed_lines += 1;
        let end = rest.iter().position(|&b| b == b'\n').map_or(rest.len(), |p| p + 1);
        let header: StreamHeader = serde_json::from_slice(&rest[1..end])
            .map_err(|e| malformed(consumed_lines, format!("bad metadata line: {e}")))?;
        raw.headers.push((consumed_lines, header));
        rest = &rest[end..];
    }
    if rest.iter().all(u8::is_ascii_whitespace) {
        return Ok(raw);
    }

    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(rest);
    let header_line = consumed_lines + 1;
    let headers = reader.headers().map_err(|e| malformed(header_line, e.to_string()))?.clone();
    raw.saw_column_header = true;
    let mut idx = [0usize; COLUMNS.len()];
    for (slot, name) in idx.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| malformed(header_line, format!("missing column `{name}`")))?;
    }

    let mut record = csv::StringRecord::new();
    loop {
        let line_of = |r: &csv::StringRecord| consumed_lines + r.position().map_or(0, |p| p.line() as usize);
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize) + consumed_lines;
                return Err(malformed(line, e.to_string()));
            }
        }
        let line = line_of(&record);
        let cell = |k: usize| record.get(idx[k]).unwrap_or("").trim();
        let num = |k: usize| -> Result<f64, IngestError> {
            cell(k)
                .parse::<f64>()
                .map_err(|_| malformed(line, format!("column `{}`: `{}` is not a number", COLUMNS[k], cell(k))))
        };
        let frame = cell(1)
            .parse::<i64>()
            .map_err(|_| malformed(line, format!("column `frame`: `{}` is not an integer", cell(1))))?;
        let bbox = BoundingBox::new(num(2)?, num(3)?, num(4)?, num(5)?);
        let score = num(6)?;
        let video_id = record.get(idx[0]).unwrap_or("").to_owned();
        let label = record.get(idx[7]).unwrap_or("").to_owned();
        let det = build_detection(line, frame, bbox, score, label)?;
        raw.records.push((line, video_id, det));
    }
    Ok(raw)
}

pub(super) fn write(streams: &[DetectionStream]) -> Vec<u8> {
    let mut out = Vec::new();
    for stream in streams {
        if StreamHeader::needed(stream, streams.len()) {
            out.push(b'#');
            serde_json::to_writer(&mut out, &StreamHeader::of(stream)).expect("header serializes");
            out.push(b'\n');
        }
    }
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    writer.write_record(COLUMNS).expect("in-memory write");
    for stream in streams {
        for d in stream.detections() {
            writer
                .write_record([
                    stream.video_id().to_owned(),
                    d.frame_index.to_string(),
                    d.bbox.x_min().to_string(),
                    d.bbox.y_min().to_string(),
                    d.bbox.width().to_string(),
                    d.bbox.height().to_string(),
                    d.score().to_string(),
                    d.label().to_owned(),
                ])
                .expect("in-memory write");
        }
    }
    writer.into_inner().expect("in-memory flush")
}
