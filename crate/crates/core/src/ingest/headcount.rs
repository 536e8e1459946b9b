use super::{HeadcountEntry, HeadcountSeries, IngestError};

fn malformed(line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::MalformedRecord { line, reason: reason.into() }
}

/// Parses a `frame,ground_truth,predicted` CSV. The `predicted` column may
/// be missing entirely or left blank per row; blanks stay `None`.
pub fn parse_headcounts(bytes: &[u8]) -> Result<HeadcountSeries, IngestError> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(HeadcountSeries::default());
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let headers = reader.headers().map_err(|e| malformed(1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let frame_col = col("frame").ok_or_else(|| malformed(1, "missing column `frame`"))?;
    let gt_col = col("ground_truth").ok_or_else(|| malformed(1, "missing column `ground_truth`"))?;
    let pred_col = col("predicted");

    let mut entries = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| malformed(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let count = |k: usize, column: &'static str| -> Result<Option<u64>, IngestError> {
            let cell = record.get(k).unwrap_or("").trim();
            if cell.is_empty() {
                return Ok(None);
            }
            let v: i64 =
                cell.parse().map_err(|_| malformed(line, format!("column `{column}`: `{cell}` is not an integer")))?;
            u64::try_from(v).map(Some).map_err(|_| IngestError::NegativeCount { line, column })
        };
        let frame = count(frame_col, "frame")?.ok_or_else(|| malformed(line, "blank `frame`"))?;
        let ground_truth = count(gt_col, "ground_truth")?.ok_or_else(|| malformed(line, "blank `ground_truth`"))?;
        let predicted = match pred_col {
            Some(k) => count(k, "predicted")?,
            None => None,
        };
        entries.push((line, HeadcountEntry { frame, ground_truth, predicted }));
    }

    let mut sorted: Vec<_> = entries.iter().map(|(l, e)| (e.frame, *l)).collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(malformed(w[1].1.max(w[0].1), format!("frame {} listed twice", w[0].0)));
    }
    Ok(HeadcountSeries::from_entries(entries.into_iter().map(|(_, e)| e).collect()).expect("frames are unique"))
}

pub fn write_headcounts(series: &HeadcountSeries) -> Vec<u8> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    writer.write_record(["frame", "ground_truth", "predicted"]).expect("in-memory write");
    for e in series.entries() {
        writer
            .write_record([
                e.frame.to_string(),
                e.ground_truth.to_string(),
                e.predicted.map_or(String::new(), |p| p.to_string()),
            ])
            .expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}
