mod support;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strokelab_core::extrema::{find_windowed_extrema, ExtremumKind, KindFilter};
use support::oracle::{brute_force_extrema, random_series};

fn fast(series: &[(f64, f64)], window: f64, filter: KindFilter) -> Vec<(usize, ExtremumKind)> {
    find_windowed_extrema(series, window, filter).unwrap().iter().map(|e| (e.index, e.kind)).collect()
}

#[test]
fn matches_brute_force_on_random_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..300 {
        let series = random_series(&mut rng);
        let window = [5.0, 10.0, 3.0][case % 3] / 120.0 * rng.random_range(0.8..1.25);
        assert_eq!(fast(&series, window, KindFilter::Both), brute_force_extrema(&series, window, true, true), "case {case}");
        assert_eq!(fast(&series, window, KindFilter::Maximum), brute_force_extrema(&series, window, false, true), "case {case}");
    }
}

#[test]
fn triangle_wave_has_one_peak() {
    let v = [0.0, 1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0, 0.0];
    let series: Vec<(f64, f64)> = v.iter().enumerate().map(|(i, &y)| (i as f64 / 120.0, y)).collect();
    let window = 5.0 / 120.0;
    assert_eq!(brute_force_extrema(&series, window, false, true), vec![(4, ExtremumKind::Maximum)]);
    assert_eq!(fast(&series, window, KindFilter::Maximum), vec![(4, ExtremumKind::Maximum)]);
}

proptest! {
    #[test]
    fn events_are_extremal_within_their_window(values in prop::collection::vec(0u8..12, 2..300), frames in 3usize..14) {
        let series: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &v)| (i as f64 / 120.0, v as f64)).collect();
        let window = frames as f64 / 120.0;
        let events = find_windowed_extrema(&series, window, KindFilter::Both).unwrap();
        for e in &events {
            for &(t, v) in &series {
                if (t - e.t).abs() < window / 2.0 {
                    match e.kind {
                        ExtremumKind::Minimum => prop_assert!(e.value <= v),
                        ExtremumKind::Maximum => prop_assert!(e.value >= v),
                    }
                }
            }
        }
        prop_assert!(events.windows(2).all(|w| w[0].t <= w[1].t));
    }

    #[test]
    fn negation_swaps_kinds(values in prop::collection::vec(-50i32..50, 2..300)) {
        let series: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &v)| (i as f64 / 120.0, v as f64)).collect();
        let neg: Vec<(f64, f64)> = series.iter().map(|&(t, v)| (t, -v)).collect();
        let a: Vec<(usize, ExtremumKind)> = fast(&series, 10.0 / 120.0, KindFilter::Both);
        let mut b: Vec<(usize, ExtremumKind)> =
            fast(&neg, 10.0 / 120.0, KindFilter::Both).into_iter().map(|(i, k)| (i, k.opposite())).collect();
        b.sort();
        prop_assert_eq!(a, b);
    }
}
