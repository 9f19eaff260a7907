use nalgebra::{Matrix3, Rotation3, SymmetricEigen, Vector3};
use pccforge_core::dataset::build_sequence;
use pccforge_core::geometry::{
    build_index, mean_curvature, mean_nn_distance, nn_distances, point_density, scene_height,
    summarize_geometry, KdTree,
};
use pccforge_core::io::LabelPolicy;
use pccforge_core::synth::{synthetic_room, ENFIELD_PROFILE};
use pccforge_core::{ClassId, LabeledCloud, Point3, SequenceId};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn cloud_of(points: Vec<Point3>) -> LabeledCloud {
    let n = points.len();
    LabeledCloud::from_labels(points, vec![ClassId::UNASSIGNED; n]).unwrap()
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, extent: f32) -> LabeledCloud {
    cloud_of(
        (0..n)
            .map(|_| {
                Point3::new(
                    rng.random_range(-extent..extent),
                    rng.random_range(-extent..extent),
                    rng.random_range(-extent..extent),
                )
            })
            .collect(),
    )
}

fn d2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

fn brute_knn(pts: &[[f64; 3]], i: usize, k: usize) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = (0..pts.len())
        .filter(|&j| j != i)
        .map(|j| (d2(&pts[i], &pts[j]), j))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.truncate(k);
    all
}

#[test]
fn nearest_neighbour_distances_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let cloud = random_cloud(&mut rng, 500, 10.0);
    let pts: Vec<[f64; 3]> = cloud.points().iter().map(|p| p.xyz_f64()).collect();
    let got = nn_distances(&build_index(&cloud).unwrap()).unwrap();
    for (i, d) in got.iter().enumerate() {
        assert_eq!(*d, brute_knn(&pts, i, 1)[0].0.sqrt());
    }
}

#[test]
fn mean_nn_distance_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let cloud = random_cloud(&mut rng, 300, 5.0);
    let pts: Vec<[f64; 3]> = cloud.points().iter().map(|p| p.xyz_f64()).collect();
    let oracle: f64 = (0..pts.len())
        .map(|i| brute_knn(&pts, i, 1)[0].0.sqrt())
        .sum::<f64>()
        / pts.len() as f64;
    let got = mean_nn_distance(&build_index(&cloud).unwrap()).unwrap();
    assert!(((got - oracle) / oracle).abs() <= 1e-9);
}

/// Surface variation per point via brute-force neighbours and a dense eigensolver.
fn oracle_curvature(pts: &[[f64; 3]], k: usize) -> f64 {
    let mut total = 0.0;
    for i in 0..pts.len() {
        let mut hood: Vec<Vector3<f64>> = brute_knn(pts, i, k)
            .iter()
            .map(|&(_, j)| Vector3::from(pts[j]))
            .collect();
        hood.push(Vector3::from(pts[i]));
        let mean = hood.iter().sum::<Vector3<f64>>() / hood.len() as f64;
        let cov = hood
            .iter()
            .map(|p| (p - mean) * (p - mean).transpose())
            .sum::<Matrix3<f64>>()
            / hood.len() as f64;
        let ev = SymmetricEigen::new(cov).eigenvalues;
        let sum = ev.sum();
        total += if sum > 0.0 { ev.min() / sum } else { 0.0 };
    }
    total / pts.len() as f64
}

#[test]
fn curvature_on_unit_ball_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut points = Vec::new();
    while points.len() < 2000 {
        let v: [f32; 3] = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        if v.iter().map(|c| c * c).sum::<f32>() <= 1.0 {
            points.push(Point3::new(v[0], v[1], v[2]));
        }
    }
    let cloud = cloud_of(points);
    let pts: Vec<[f64; 3]> = cloud.points().iter().map(|p| p.xyz_f64()).collect();
    let got = mean_curvature(&build_index(&cloud).unwrap(), 16).unwrap();
    let oracle = oracle_curvature(&pts, 16);
    assert!((got - oracle).abs() <= 0.02, "{got} vs {oracle}");
}

#[test]
fn density_and_height_match_fold_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let cloud = random_cloud(&mut rng, 10_000, 30.0);
    let p = cloud.points();
    let fold = |f: fn(&Point3) -> f32| {
        p.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| {
                (lo.min(f(q) as f64), hi.max(f(q) as f64))
            })
    };
    let (x0, x1) = fold(|q| q.x);
    let (y0, y1) = fold(|q| q.y);
    let (z0, z1) = fold(|q| q.z);
    let density = point_density(&cloud).unwrap();
    let expect = 10_000.0 / ((x1 - x0) * (y1 - y0));
    assert!(((density - expect) / expect).abs() <= 1e-12);
    assert_eq!(scene_height(&cloud), z1 - z0);
}

#[test]
fn metrics_are_invariant_under_rigid_motion() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let cloud = synthetic_room(&mut rng, 3000, &ENFIELD_PROFILE);
    // rotation about the vertical axis keeps height; NN and curvature are fully invariant
    let rot = Rotation3::from_euler_angles(0.0, 0.0, 0.7);
    let shift = Vector3::new(12.5, -3.0, 1.25);
    let moved = cloud_of(
        cloud
            .points()
            .iter()
            .map(|p| {
                let v = rot * Vector3::from(p.xyz_f64()) + shift;
                Point3::new(v.x as f32, v.y as f32, v.z as f32)
            })
            .collect(),
    );
    let (a, b) = (build_index(&cloud).unwrap(), build_index(&moved).unwrap());
    let nn = (mean_nn_distance(&a).unwrap(), mean_nn_distance(&b).unwrap());
    assert!(((nn.0 - nn.1) / nn.0).abs() < 1e-4);
    let c = (
        mean_curvature(&a, 16).unwrap(),
        mean_curvature(&b, 16).unwrap(),
    );
    assert!((c.0 - c.1).abs() < 1e-3);
    assert!((scene_height(&cloud) - scene_height(&moved)).abs() < 1e-5);
}

#[test]
fn histograms_conserve_counts_across_sequences() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let seqs: Vec<SequenceId> = (0..20).map(|i| SequenceId::new(i).unwrap()).collect();
    for &s in &seqs {
        let n = rng.random_range(50..400);
        build_sequence(
            &synthetic_room(&mut rng, n, &ENFIELD_PROFILE),
            dir.path(),
            s,
            "enfield",
        )
        .unwrap();
    }
    let report = summarize_geometry(dir.path(), seqs, 7, 16, LabelPolicy::Strict).unwrap();
    assert_eq!(report.sequences.len(), 20);
    for (_, h) in &report.histograms {
        assert_eq!(h.total(), 20);
        assert_eq!(h.bins.len(), 7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn knn_matches_brute_force(seed in any::<u64>(), n in 1usize..2000, k in 1usize..32) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // coarse grid so ties are common
        let pts: Vec<[f64; 3]> = (0..n)
            .map(|_| [rng.random_range(0..8) as f64, rng.random_range(0..8) as f64, rng.random_range(0..4) as f64])
            .collect();
        let tree = KdTree::new(pts.clone());
        for i in (0..n).step_by((n / 25).max(1)) {
            let got: Vec<(f64, usize)> = tree.knn_of(i, k).iter().map(|nb| (nb.distance * nb.distance, nb.index)).collect();
            let want = brute_knn(&pts, i, k);
            prop_assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                prop_assert_eq!(g.1, w.1);
            }
        }
    }
}
