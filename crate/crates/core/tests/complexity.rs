use std::time::{Duration, Instant};

use readability_core::graphio::{random_graph, random_layout, EdgeList};
use readability_core::metrics::oracle;

/// Oracle edge crossing should grow about quadratically: each doubling of
/// `|E|` from 2k to 16k multiplies the time by 3 to 5.
#[test]
fn oracle_crossing_time_is_quadratic() {
    let mut times = Vec::new();
    for m in [2_000u64, 4_000, 8_000, 16_000] {
        let el = EdgeList::from_pairs(&random_graph(m / 2, m, m).unwrap());
        let g = random_layout(&el, 100.0, m).unwrap();
        let mut best = Duration::MAX;
        for _ in 0..3 {
            let t = Instant::now();
            std::hint::black_box(oracle::edge_crossing(&g));
            best = best.min(t.elapsed());
        }
        times.push(best.as_secs_f64());
    }
    // per-doubling factor over the whole range, which damps timer noise
    let factor = (times[3] / times[0]).powf(1.0 / 3.0);
    assert!((3.0..=5.0).contains(&factor), "per-doubling factor {factor:.2}, times {times:?}");
}
