use msfilter::analytics::{self, FilterParams};
use msfilter::codec;
use msfilter::{AssociationFilter, Filter, ShiftMode, ShiftingFilter, SpatialFilter};
use proptest::prelude::*;

/// Distinct elements with labels in `1..=s`.
fn labelled(s: usize, max: usize) -> impl Strategy<Value = Vec<(Vec<u8>, usize)>> {
    prop::collection::btree_map(prop::collection::vec(any::<u8>(), 1..12), 1..=s, 0..max)
        .prop_map(|m| m.into_iter().collect())
}

fn config() -> impl Strategy<Value = (u64, usize, usize, u64)> {
    (8u64..2048, 1usize..6, 1usize..20, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn members_are_never_missed(
        (m, k, s, seed) in config(),
        entries in labelled(20, 80),
        bounded in any::<bool>(),
    ) {
        let entries: Vec<_> = entries.into_iter().map(|(e, l)| (e, (l - 1) % s + 1)).collect();
        let mode = if bounded { ShiftMode::WordBounded(m.min(64)) } else { ShiftMode::Circular };
        let mut shbf = ShiftingFilter::new(m, k, s, mode, seed).unwrap();
        let mut sbf = SpatialFilter::new(m, k, s, seed).unwrap();
        for (e, l) in &entries {
            shbf.insert(e, *l).unwrap();
            sbf.insert(e, *l).unwrap();
        }
        for (e, l) in &entries {
            prop_assert!(shbf.query(e).unwrap().contains(*l));
            let v = sbf.query(e).unwrap();
            prop_assert!(v >= *l);
        }
    }

    #[test]
    fn inserting_never_clears_state(
        (m, k, s, seed) in config(),
        entries in labelled(20, 60),
        probe in prop::collection::vec(any::<u8>(), 1..12),
    ) {
        let mut shbf = ShiftingFilter::new(m, k, s, ShiftMode::Circular, seed).unwrap();
        let mut sbf = SpatialFilter::new(m, k, s, seed).unwrap();
        let mut bits = shbf.bit_string();
        let mut cells = sbf.cell_values();
        let mut gamma = shbf.query(&probe).unwrap();
        for (e, l) in entries {
            let l = (l - 1) % s + 1;
            shbf.insert(&e, l).unwrap();
            sbf.insert(&e, l).unwrap();
            let now = shbf.bit_string();
            prop_assert!(bits.chars().zip(now.chars()).all(|(a, b)| a <= b));
            let now_cells = sbf.cell_values();
            prop_assert!(cells.iter().zip(&now_cells).all(|(a, b)| a <= b));
            let now_gamma = shbf.query(&probe).unwrap();
            prop_assert!(gamma.labels().iter().all(|&x| now_gamma.contains(x)));
            bits = now;
            cells = now_cells;
            gamma = now_gamma;
        }
    }

    #[test]
    fn images_ignore_insertion_order(
        (m, k, s, seed) in config(),
        entries in labelled(20, 60),
        rotate in 0usize..60,
    ) {
        let entries: Vec<_> = entries.into_iter().map(|(e, l)| (e, (l - 1) % s + 1)).collect();
        let mut reordered = entries.clone();
        reordered.reverse();
        if !reordered.is_empty() {
            let r = rotate % reordered.len();
            reordered.rotate_left(r);
        }
        let build = |order: &[(Vec<u8>, usize)]| -> (Vec<u8>, Vec<u8>) {
            let mut a = ShiftingFilter::new(m, k, s, ShiftMode::Circular, seed).unwrap();
            let mut b = SpatialFilter::new(m, k, s, seed).unwrap();
            for (e, l) in order {
                a.insert(e, *l).unwrap();
                b.insert(e, *l).unwrap();
            }
            a.seal();
            b.seal();
            (codec::encode_shifting(&a).unwrap(), codec::encode_spatial(&b).unwrap())
        };
        prop_assert_eq!(build(&entries), build(&reordered));
    }

    #[test]
    fn decoded_filters_answer_alike(
        (m, k, s, seed) in config(),
        entries in labelled(20, 60),
        probes in prop::collection::vec(prop::collection::vec(any::<u8>(), 1..12), 1..30),
        spatial in any::<bool>(),
    ) {
        let mut f: Filter = if spatial {
            SpatialFilter::new(m, k, s, seed).unwrap().into()
        } else {
            ShiftingFilter::new(m, k, s, ShiftMode::Circular, seed).unwrap().into()
        };
        for (e, l) in &entries {
            f.insert(e, (l - 1) % s + 1).unwrap();
        }
        f.seal();
        let image = codec::encode(&f).unwrap();
        let back = codec::decode(&image).unwrap();
        prop_assert_eq!(codec::encode(&back).unwrap(), image);
        for e in entries.iter().map(|(e, _)| e).chain(probes.iter()) {
            prop_assert_eq!(f.query_text(e).unwrap(), back.query_text(e).unwrap());
        }
    }

    #[test]
    fn decoder_rejects_or_accepts_without_panicking(bytes in prop::collection::vec(any::<u8>(), 0..120)) {
        let _ = codec::decode(&bytes);
    }

    #[test]
    fn error_probabilities_are_monotone(
        exp in 8u32..24,
        k in 1u32..16,
        n in 1u64..100_000,
        s in 2u32..255,
    ) {
        let m = 1u64 << exp;
        let bf = analytics::bf_fpp(m, k, n).unwrap();
        prop_assert!((0.0..=1.0).contains(&bf));
        prop_assert!(analytics::bf_fpp(m, k, n + 1).unwrap() >= bf);
        prop_assert!(analytics::bf_fpp(2 * m, k, n).unwrap() <= bf);
        let p = FilterParams::new(m, k, s, n).unwrap();
        let q = FilterParams::new(m, k, s - 1, n).unwrap();
        prop_assert!(analytics::shbf_fpp_overall(&p).unwrap() >= analytics::shbf_fpp_overall(&q).unwrap());
        prop_assert!(analytics::shbf_isep(&p).unwrap() <= analytics::shbf_fpp_overall(&p).unwrap());
    }
}
