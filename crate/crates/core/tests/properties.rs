use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use strokelab_core::classifiers::*;
use strokelab_core::recognition::{flatten, split_dataset, PadMode, StrokeLabel, StrokeSample, SEQ_LEN};
use strokelab_core::tracker::{compute_metrics, frame_outcome, ConfusionCounts, Convention, FramePair};
use strokelab_core::trajectory::{drop_missing, load_trajectory, mirror_x, FrameSpec, Point, Trajectory};

fn grid(v: u32) -> f64 {
    v as f64 * 0.125
}

fn trajectory_strategy() -> impl Strategy<Value = Trajectory> {
    prop::collection::vec(prop::option::weighted(0.8, (0u32..15_352, 0u32..8_632)), 2..120).prop_map(|obs| {
        Trajectory::from_frames(
            obs.into_iter().enumerate().map(|(i, p)| (i as u64, p.map(|(x, y)| Point::new(grid(x), grid(y))))),
            FrameSpec::default(),
        )
        .unwrap()
    })
}

fn sample_strategy() -> impl Strategy<Value = StrokeSample> {
    (prop::collection::vec((1u32..15_000, 1u32..8_000), 5..260), 0usize..6).prop_map(|(rows, l)| {
        let rows: Vec<[f64; 2]> = rows.into_iter().map(|(x, y)| [grid(x), grid(y)]).collect();
        StrokeSample::from_rows(&rows, PadMode::Pre, Some(StrokeLabel::ALL[l]), String::new())
    })
}

fn small_arch() -> impl Strategy<Value = Vec<LayerSpec>> {
    prop::collection::vec((1usize..9, 1usize..9), 1..4).prop_map(|dims| {
        dims.into_iter().map(|(i, o)| LayerSpec::dense(i, o, Activation::Relu)).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn drop_missing_is_idempotent(t in trajectory_strategy()) {
        if let Ok(once) = drop_missing(&t) {
            prop_assert_eq!(drop_missing(&once).unwrap(), once);
        }
    }

    #[test]
    fn csv_round_trip_is_byte_identical(t in trajectory_strategy()) {
        let text = t.to_csv_string();
        let back = load_trajectory(text.as_bytes(), t.frame()).unwrap();
        prop_assert_eq!(back.to_csv_string(), text);
    }

    #[test]
    fn mirroring_is_an_involution(t in trajectory_strategy(), x in 0u32..15_352) {
        prop_assert_eq!(t.mirrored().mirrored(), t);
        prop_assert_eq!(mirror_x(mirror_x(grid(x), 1920.0), 1920.0), grid(x));
    }

    #[test]
    fn prepared_rows_keep_their_length(s in sample_strategy()) {
        let nonzero = s.sequence.iter().filter(|r| r[0] != 0.0 || r[1] != 0.0).count();
        prop_assert!(nonzero <= SEQ_LEN);
        prop_assert_eq!(s.data_rows().len(), nonzero);
        prop_assert_eq!(flatten(&s).len(), 2 * SEQ_LEN);
    }

    #[test]
    fn flatten_is_injective(a in sample_strategy(), b in sample_strategy()) {
        prop_assert_eq!(a.sequence == b.sequence, flatten(&a) == flatten(&b));
    }

    #[test]
    fn split_is_a_partition(n in 12usize..80, seed in any::<u64>()) {
        let data: Vec<StrokeSample> = (0..n)
            .map(|i| StrokeSample::from_rows(&[[1.0 + i as f64, 2.0]; 6], PadMode::Pre, Some(StrokeLabel::ALL[i % 6]), format!("s{i}")))
            .collect();
        let split = split_dataset(&data, seed).unwrap();
        let mut ids: Vec<String> = split.train.iter().chain(&split.validation).map(|s| s.source_id.clone()).collect();
        ids.sort();
        let mut expected: Vec<String> = data.iter().map(|s| s.source_id.clone()).collect();
        expected.sort();
        prop_assert_eq!(ids, expected);
    }

    #[test]
    fn softmax_is_a_distribution(z in prop::collection::vec(-800.0f64..800.0, 1..12)) {
        let p = softmax(&z);
        prop_assert!(p.iter().all(|&v| v >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn count_params_is_additive(a in small_arch(), b in small_arch()) {
        let joined: Vec<LayerSpec> = a.iter().chain(&b).cloned().collect();
        prop_assert_eq!(count_params(&joined), count_params(&a) + count_params(&b));
    }

    #[test]
    fn knn_ignores_store_order(store in prop::collection::vec(sample_strategy(), 9..30), query in sample_strategy(), seed in any::<u64>()) {
        let q = flatten(&query);
        let dist = |s: &StrokeSample| flatten(s).iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let mut d: Vec<f64> = store.iter().map(dist).collect();
        d.sort_by(f64::total_cmp);
        prop_assume!(d.windows(2).all(|w| w[0] != w[1]));
        let mut shuffled = store.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = KnnModel::fit(DEFAULT_K, &store).unwrap().predict(&query).unwrap();
        let b = KnnModel::fit(DEFAULT_K, &shuffled).unwrap().predict(&query).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn tracker_counts_and_order(pairs in prop::collection::vec((prop::option::of((0u32..200, 0u32..200)), prop::option::of((0u32..200, 0u32..200))), 1..60), seed in any::<u64>()) {
        let mut pairs: Vec<FramePair> = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (g, p))| FramePair {
                frame_index: i as u64,
                gt: g.map(|(x, y)| Point::new(x as f64, y as f64)),
                pred: p.map(|(x, y)| Point::new(x as f64, y as f64)),
            })
            .collect();
        let count = |pairs: &[FramePair]| pairs.iter().map(|p| frame_outcome(p, 25.0, Convention::Literal)).sum::<ConfusionCounts>();
        let mislocalized = pairs
            .iter()
            .filter(|p| matches!((p.gt, p.pred), (Some(g), Some(q)) if g.distance(&q) > 25.0))
            .count() as u64;
        let c = count(&pairs);
        prop_assert_eq!(c.total(), pairs.len() as u64 + mislocalized);
        let before = compute_metrics(&c).unwrap();
        pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(compute_metrics(&count(&pairs)).unwrap(), before);
    }
}
