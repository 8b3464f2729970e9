mod common;

use common::{frames_from, haar_frame, sample_trees};
use padic_frames::doc::{DocError, FrameDoc, MaskDoc};
use padic_frames::frame::validate_frame_spec;
use padic_frames::group::Params;

#[test]
fn frame_documents_roundtrip_through_json() {
    let mut frames = vec![haar_frame(2), haar_frame(3)];
    frames.extend(frames_from(&sample_trees(Params::new(2, 1, 1).unwrap(), 40, 0, 0)));
    for fs in frames {
        let doc = FrameDoc::new(&fs);
        let text = serde_json::to_string(&doc).unwrap();
        let back: FrameDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        let rebuilt = back.to_frame().unwrap();
        assert_eq!(rebuilt, fs);
        assert!(validate_frame_spec(&rebuilt).pass);
        assert_eq!(serde_json::to_string(&FrameDoc::new(&rebuilt)).unwrap(), text);
    }
}

#[test]
fn mask_document_field_names() {
    let fs = haar_frame(2);
    let value = serde_json::to_value(MaskDoc::new(&fs.mask, &fs.phi_hat)).unwrap();
    for key in ["p", "N", "M", "zeros", "classification", "solve", "beta", "lambda", "phiHat"] {
        assert!(value.get(key).is_some(), "{key}");
    }
    assert!(value.get("pins").is_none());
    let beta0: [f64; 2] = serde_json::from_value(value["beta"][0].clone()).unwrap();
    assert!((beta0[0] - 0.5).abs() <= 1e-12 && beta0[1].abs() <= 1e-12);
    assert_eq!(value["classification"], "Case1");
}

#[test]
fn malformed_documents_are_rejected() {
    let fs = haar_frame(2);
    let mut doc = FrameDoc::new(&fs);
    doc.mask.beta.pop();
    assert!(matches!(doc.to_frame(), Err(DocError::Length { field: "beta", .. })));

    let mut doc = FrameDoc::new(&fs);
    doc.mask.p = 4;
    assert!(matches!(doc.to_frame(), Err(DocError::Params(_))));

    let mut doc = FrameDoc::new(&fs);
    doc.wavelets[0].digits = vec![2];
    assert!(matches!(doc.to_frame(), Err(DocError::Wavelet { index: 0, .. })));

    let mut doc = FrameDoc::new(&fs);
    doc.wavelets[0].mask_cells.clear();
    assert!(matches!(doc.to_frame(), Err(DocError::Wavelet { index: 0, .. })));
}
