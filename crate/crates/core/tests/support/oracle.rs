//! Brute-force reference implementations shared by integration tests.

#![allow(dead_code)]

use rand::Rng;
use strokelab_core::extrema::ExtremumKind;

/// Windowed extrema by direct scan: every sample is compared with every other
/// sample of its centered open window, then same-kind events closer than the
/// window are collapsed into the more extreme (earlier on ties).
/// Returns `(index, kind)` pairs in time order, minimum before maximum.
pub fn brute_force_extrema(series: &[(f64, f64)], window: f64, minima: bool, maxima: bool) -> Vec<(usize, ExtremumKind)> {
    let half = window / 2.0;
    let n = series.len();
    let (first, last) = (series[0].0, series[n - 1].0);
    let mut raw: Vec<(usize, ExtremumKind)> = Vec::new();
    for i in 0..n {
        let (t, v) = series[i];
        if t - first < half || last - t < half {
            continue;
        }
        if i > 0 && series[i - 1].1 == v {
            continue;
        }
        let mut lowest = true;
        let mut highest = true;
        let mut j = i;
        while j > 0 && t - series[j - 1].0 < half {
            j -= 1;
            lowest &= v <= series[j].1;
            highest &= v >= series[j].1;
        }
        let mut j = i;
        while j + 1 < n && series[j + 1].0 - t < half {
            j += 1;
            lowest &= v <= series[j].1;
            highest &= v >= series[j].1;
        }
        if lowest && minima {
            raw.push((i, ExtremumKind::Minimum));
        }
        if highest && maxima {
            raw.push((i, ExtremumKind::Maximum));
        }
    }

    let mut out = Vec::new();
    for kind in [ExtremumKind::Minimum, ExtremumKind::Maximum] {
        let mut kept: Vec<usize> = Vec::new();
        for &(i, _) in raw.iter().filter(|e| e.1 == kind) {
            match kept.last() {
                Some(&p) if series[i].0 - series[p].0 < window => {
                    let better = match kind {
                        ExtremumKind::Minimum => series[i].1 < series[p].1,
                        ExtremumKind::Maximum => series[i].1 > series[p].1,
                    };
                    if better {
                        *kept.last_mut().unwrap() = i;
                    }
                }
                _ => kept.push(i),
            }
        }
        out.extend(kept.into_iter().map(|i| (i, kind)));
    }
    out.sort();
    out
}

/// Random test series: uniform or random-walk values, optionally quantized to
/// force ties, sampled at 60 or 120 fps with random frame gaps.
pub fn random_series(rng: &mut impl Rng) -> Vec<(f64, f64)> {
    let len = rng.random_range(50..=2000);
    let fps = if rng.random_bool(0.5) { 60.0 } else { 120.0 };
    let walk = rng.random_bool(0.5);
    let quantum = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
    let gap_prob = if rng.random_bool(0.3) { 0.1 } else { 0.0 };
    let mut frame = 0u64;
    let mut v = 0.0f64;
    let mut series = Vec::with_capacity(len);
    while series.len() < len {
        v = if walk { v + rng.random_range(-3.0..3.0) } else { rng.random_range(0.0..20.0) };
        let value = if quantum > 0.0 { (v / quantum).round() * quantum } else { v };
        series.push((frame as f64 / fps, value));
        frame += 1;
        while rng.random_bool(gap_prob) {
            frame += 1;
        }
    }
    series
}
