//! Seeded synthetic indoor scans for tests, benches and demos.
//!
//! Points are scattered over the six faces of a box-shaped room; labels are
//! drawn from a per-class percentage profile.

use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::model::{ClassId, LabeledCloud, Point3, NUM_CLASSES};

/// Enfield label shares in percent, by class id.
pub const ENFIELD_PROFILE: [f64; NUM_CLASSES] = [
    67.92, 1.46, 2.54, 9.60, 0.46, 7.45, 8.30, 0.26, 0.08, 0.11, 0.03, 0.71, 0.05, 0.05, 0.08,
    0.01, 0.04, 0.15, 0.00, 0.70,
];

/// Memphis label shares in percent, by class id.
pub const MEMPHIS_PROFILE: [f64; NUM_CLASSES] = [
    89.17, 0.12, 0.09, 6.87, 0.09, 2.04, 0.00, 0.09, 0.01, 0.55, 0.05, 0.17, 0.03, 0.02, 0.01,
    0.00, 0.61, 0.08, 0.00, 0.00,
];

/// Draws `n` labels with probabilities proportional to `profile`.
pub fn sample_labels<R: Rng + ?Sized>(
    rng: &mut R,
    profile: &[f64; NUM_CLASSES],
    n: usize,
) -> Vec<ClassId> {
    let dist = WeightedIndex::new(profile).expect("profile has a positive weight");
    (0..n)
        .map(|_| ClassId::new(dist.sample(rng) as u16).expect("profile has 20 entries"))
        .collect()
}

/// `n` points on the surfaces of a random room, labelled from `profile`.
pub fn synthetic_room<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    profile: &[f64; NUM_CLASSES],
) -> LabeledCloud {
    let w: f32 = rng.random_range(4.0..20.0);
    let d: f32 = rng.random_range(4.0..20.0);
    let h: f32 = rng.random_range(2.4..4.5);
    let points = (0..n)
        .map(|_| {
            let (u, v): (f32, f32) = (rng.random(), rng.random());
            let jitter = rng.random_range(-0.005..0.005);
            let (x, y, z) = match rng.random_range(0..6) {
                0 => (u * w, v * d, jitter),
                1 => (u * w, v * d, h + jitter),
                2 => (jitter, u * d, v * h),
                3 => (w + jitter, u * d, v * h),
                4 => (u * w, jitter, v * h),
                _ => (u * w, d + jitter, v * h),
            };
            Point3::new(x, y, z).with_remission(rng.random())
        })
        .collect();
    let labels = sample_labels(rng, profile, n);
    LabeledCloud::from_labels(points, labels).expect("lengths match")
}

/// Renders a cloud as `x y z label remission` text lines with `labels` as the label column.
pub fn to_xyzl_text<S: AsRef<str>>(cloud: &LabeledCloud, labels: &[S]) -> String {
    let mut s = String::with_capacity(cloud.len() * 48);
    for (p, l) in cloud.points().iter().zip(labels) {
        writeln!(s, "{} {} {} {} {}", p.x, p.y, p.z, l.as_ref(), p.remission).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{parse_source_str, SourceFormat};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn profiles_sum_to_about_100() {
        for p in [ENFIELD_PROFILE, MEMPHIS_PROFILE] {
            let s: f64 = p.iter().sum();
            assert!((s - 100.0).abs() < 0.1, "{s}");
        }
    }

    #[test]
    fn text_round_trips_through_parser() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let room = synthetic_room(&mut rng, 200, &ENFIELD_PROFILE);
        let labels: Vec<String> = room.labels().iter().map(|l| l.to_string()).collect();
        let parsed = parse_source_str(
            &to_xyzl_text(&room, &labels),
            SourceFormat::XyzLabelText,
            "",
        )
        .unwrap();
        assert_eq!(parsed.raw_labels, labels);
        assert!(parsed
            .cloud
            .points()
            .iter()
            .zip(room.points())
            .all(|(a, b)| a.bits_eq(b)));
    }
}
