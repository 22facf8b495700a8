mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::rand_drop;
use tabletop_core::engine::DropRecord;
use tabletop_core::metrics::{compute_metrics, metrics_by_radius};
use tabletop_core::PlanePoint;

fn drops(seed: u64, n: usize, target: PlanePoint) -> Vec<DropRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rand_drop(&mut rng, target)).collect()
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() <= 1e-12,
        (None, None) => true,
        _ => false,
    }
}

proptest! {
    #[test]
    fn precision_ignores_translation(seed in any::<u64>(), n in 1usize..60, dx in -1.0..1.0f64, dz in -1.0..1.0f64) {
        let target = PlanePoint::new(0.0, 1.6);
        let base = drops(seed, n, target);
        let moved: Vec<_> = base.iter().map(|d| {
            let mut d = *d;
            d.landing_xz = PlanePoint::new(d.landing_xz.x + dx, d.landing_xz.z + dz);
            d
        }).collect();
        let a = compute_metrics(&base, target);
        let b = compute_metrics(&moved, target);
        prop_assert!(close(a.precision_rms, b.precision_rms));
        // Moving the target along with the drops keeps accuracy too.
        let c = compute_metrics(&moved, PlanePoint::new(target.x + dx, target.z + dz));
        prop_assert!(close(a.accuracy_mre, c.accuracy_mre));
    }

    #[test]
    fn drop_order_does_not_matter(seed in any::<u64>(), n in 1usize..60) {
        let target = PlanePoint::new(-0.15, 1.6);
        let base = drops(seed, n, target);
        let mut shuffled = base.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
        let a = compute_metrics(&base, target);
        let b = compute_metrics(&shuffled, target);
        prop_assert_eq!(a.n_drops, b.n_drops);
        prop_assert_eq!(a.hit_rate, b.hit_rate);
        prop_assert!(close(a.accuracy_mre, b.accuracy_mre));
        prop_assert!(close(a.precision_rms, b.precision_rms));
    }

    #[test]
    fn metrics_stay_in_range(seed in any::<u64>(), n in 0usize..60) {
        let target = PlanePoint::new(0.1, 1.5);
        let m = compute_metrics(&drops(seed, n, target), target);
        prop_assert_eq!(m.n_drops, n as u64);
        if n == 0 {
            prop_assert!(m.is_absent() && m.hit_rate.is_none() && m.accuracy_mre.is_none());
        } else {
            let h = m.hit_rate.unwrap();
            prop_assert!((0.0..=1.0).contains(&h));
            prop_assert!(m.accuracy_mre.unwrap() >= 0.0);
            prop_assert!(m.precision_rms.unwrap() >= 0.0);
        }
    }
}

#[test]
fn levels_partition_the_drops() {
    let target = PlanePoint::new(0.0, 1.6);
    let mut all = drops(4, 90, target);
    for (i, d) in all.iter_mut().enumerate() {
        d.target_radius_at_drop = [0.15, 0.12, 0.096][i % 3];
    }
    let levels = metrics_by_radius(&all, target);
    assert_eq!(
        levels.iter().map(|l| l.radius).collect::<Vec<_>>(),
        [0.15, 0.12, 0.096]
    );
    assert_eq!(levels.iter().map(|l| l.metrics.n_drops).sum::<u64>(), 90);
}

#[test]
fn single_drop_on_center_is_perfect() {
    let target = PlanePoint::new(-0.15, 1.6);
    let mut d = drops(5, 1, target);
    d[0].landing_xz = target;
    d[0].radial_error = 0.0;
    d[0].hit = true;
    let m = compute_metrics(&d, target);
    assert_eq!(
        (m.accuracy_mre, m.precision_rms, m.hit_rate),
        (Some(0.0), Some(0.0), Some(1.0))
    );
}
