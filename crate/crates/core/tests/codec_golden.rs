//! Walkthrough images against byte files assembled independently of the encoder.

use msfilter::codec;
use msfilter::worked_example;
use msfilter::AssociationFilter;

const SBF_GOLDEN: &[u8] = include_bytes!("data/walkthrough_sbf.msf");
const SHBF_GOLDEN: &[u8] = include_bytes!("data/walkthrough_shbf.msf");

#[test]
fn spatial_walkthrough_matches_golden() {
    let mut f = worked_example::spatial_filter().unwrap();
    f.seal();
    assert_eq!(codec::encode_spatial(&f).unwrap(), SBF_GOLDEN);
}

#[test]
fn shifting_walkthrough_matches_golden() {
    let mut f = worked_example::shifting_filter().unwrap();
    f.seal();
    assert_eq!(codec::encode_shifting(&f).unwrap(), SHBF_GOLDEN);
}

#[test]
fn golden_images_decode_and_reencode() {
    for golden in [SBF_GOLDEN, SHBF_GOLDEN] {
        let f = codec::decode(golden).unwrap();
        assert!(f.is_sealed());
        assert_eq!(f.cells(), 16);
        assert_eq!(codec::encode(&f).unwrap(), golden);
    }
}

#[test]
fn scripted_digests_restore_walkthrough_answers() {
    let table = |text: String| msfilter::ScriptedTable::parse(text.as_bytes()).unwrap();
    let sbf = codec::decode(SBF_GOLDEN)
        .unwrap()
        .with_scripted_digests(table(worked_example::spatial_script_text()))
        .unwrap();
    assert_eq!(sbf.query_text(worked_example::D1).unwrap(), "1");
    assert_eq!(sbf.query_text(worked_example::D2).unwrap(), "2");
    assert_eq!(sbf.query_text(worked_example::ND1).unwrap(), "0");
    assert_eq!(sbf.query_text(worked_example::ND2).unwrap(), "1");

    let shbf = codec::decode(SHBF_GOLDEN)
        .unwrap()
        .with_scripted_digests(table(worked_example::shifting_script_text()))
        .unwrap();
    assert_eq!(shbf.query_text(worked_example::D1).unwrap(), "1");
    assert_eq!(shbf.query_text(worked_example::D2).unwrap(), "1,2");
    assert_eq!(shbf.query_text(worked_example::D3).unwrap(), "2");
    assert_eq!(shbf.query_text(worked_example::D4).unwrap(), "3");
    assert_eq!(shbf.query_text(worked_example::ND1).unwrap(), "none");
    assert_eq!(shbf.query_text(worked_example::ND2).unwrap(), "3");
}
