mod common;

use proptest::prelude::*;
use sdtransit::ingest::{
    parse_detection_streams, parse_detections, parse_headcounts, write_detection_streams, write_detections,
    write_headcounts, IngestError,
};
use sdtransit::{BoundingBox, Detection, DetectionStream, Format, HeadcountSeries};

fn detection() -> impl Strategy<Value = (u64, f64, f64, f64, f64, f64, String)> {
    (0u64..200, 0.0f64..1e4, 0.0f64..1e4, 1e-9f64..1e3, 1e-9f64..1e3, 0.0f64..=1.0, "[a-z ,\"]{1,8}")
}

fn stream() -> impl Strategy<Value = DetectionStream> {
    (prop::collection::vec(detection(), 0..100), prop_oneof![Just(4.0), 0.1f64..120.0], any::<bool>()).prop_map(
        |(raw, fps, explicit)| {
            let dets: Vec<Detection> = raw
                .into_iter()
                .map(|(f, x, y, w, h, score, label)| {
                    Detection::new(f, BoundingBox::new(x, y, w, h).unwrap(), score, label).unwrap()
                })
                .collect();
            let frame_count = explicit.then_some(250);
            DetectionStream::from_unsorted("cam-7", fps, frame_count, dets).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn ndjson_round_trips(s in stream()) {
        prop_assume!(s != DetectionStream::default());
        prop_assert_eq!(parse_detections(&write_detections(&s, Format::Ndjson), Format::Ndjson).unwrap(), s);
    }

    #[test]
    fn csv_round_trips(s in stream()) {
        prop_assert_eq!(parse_detections(&write_detections(&s, Format::Csv), Format::Csv).unwrap(), s);
    }

    #[test]
    fn headcounts_round_trip(rows in prop::collection::vec((0u64..50, prop::option::of(0u64..50)), 0..60)) {
        let series = HeadcountSeries::from_pairs(rows);
        prop_assert_eq!(parse_headcounts(&write_headcounts(&series)).unwrap(), series);
    }
}

#[test]
fn awkward_score_is_exact() {
    let d = Detection::new(0, BoundingBox::new(1.0, 2.0, 3.0, 4.0).unwrap(), 0.123456789, "person").unwrap();
    let s = DetectionStream::new("v", 4.0, 1, vec![d]).unwrap();
    for f in [Format::Ndjson, Format::Csv] {
        let back = parse_detections(&write_detections(&s, f), f).unwrap();
        assert_eq!(back.detections()[0].score(), 0.123456789);
    }
}

#[test]
fn multi_video_files_keep_their_order() {
    let mut r = common::rng(11);
    // Only the later videos need metadata on their own; order must still hold.
    let streams: Vec<DetectionStream> = (0..6)
        .map(|i| loop {
            let s = common::random_stream(&mut r, &format!("v{i}"), 30, 20);
            if !s.is_empty() {
                break s;
            }
        })
        .collect();
    for f in [Format::Ndjson, Format::Csv] {
        let back = parse_detection_streams(&write_detection_streams(&streams, f), f).unwrap();
        assert_eq!(back, streams, "{f:?}");
    }
}

#[test]
fn interleaved_videos_group_by_first_appearance() {
    let text = concat!(
        r#"{"video_id":"b","frame":0,"x":1,"y":1,"w":2,"h":2,"score":0.9,"label":"person"}"#,
        "\n",
        r#"{"video_id":"a","frame":1,"x":1,"y":1,"w":2,"h":2,"score":0.9,"label":"person"}"#,
        "\n",
        r#"{"video_id":"b","frame":2,"x":1,"y":1,"w":2,"h":2,"score":0.9,"label":"person"}"#,
        "\n",
    );
    let streams = parse_detection_streams(text.as_bytes(), Format::Ndjson).unwrap();
    let ids: Vec<_> = streams.iter().map(|s| (s.video_id(), s.len())).collect();
    assert_eq!(ids, [("b", 2), ("a", 1)]);
    assert!(matches!(parse_detections(text.as_bytes(), Format::Ndjson), Err(IngestError::MultipleVideos(_))));
}

#[test]
fn errors_carry_line_numbers() {
    let text = concat!(
        r#"{"video_id":"a","frame":0,"x":1,"y":1,"w":2,"h":2,"score":0.9,"label":"person"}"#,
        "\n",
        r#"{"video_id":"a","frame":1,"x":1,"y":1,"w":-2,"h":2,"score":0.9,"label":"person"}"#,
        "\n",
    );
    let err = parse_detections(text.as_bytes(), Format::Ndjson).unwrap_err();
    assert_eq!(err.line(), Some(2), "{err}");

    let csv = "video_id,frame,x,y,w,h,score,label\na,0,1,1,2,2,1.5,person\n";
    let err = parse_detections(csv.as_bytes(), Format::Csv).unwrap_err();
    assert_eq!(err.line(), Some(2), "{err}");
}

#[test]
fn negative_headcount_is_rejected() {
    let err = parse_headcounts(b"frame,ground_truth,predicted\n0,13,7\n1,-1,7\n").unwrap_err();
    assert!(matches!(err, IngestError::NegativeCount { line: 3, .. }), "{err:?}");
}
