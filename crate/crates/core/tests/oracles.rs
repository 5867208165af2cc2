use affinity_core::embed::{apply_projection, fit_fourier_embedding, fit_span_projection};
use affinity_core::field::{evaluate_affinity_field, GridSpec};
use affinity_core::model::{BoundingBox, ClusterModel};
use affinity_core::oracle::{exact_affinity_2d, exact_affinity_2d_with, grid_affinity};
use affinity_core::rng::rng_from_seed;
use affinity_core::synth::five_cluster_centers;
use affinity_core::{affinity_point, DistanceMeasure, Generator, SamplerConfig};
use rand::Rng;
use rand_distr::StandardNormal;

const EUCLID: DistanceMeasure = DistanceMeasure::SquaredEuclidean;

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

fn five() -> (ClusterModel, BoundingBox) {
    let centers = five_cluster_centers(2, 2.0).unwrap();
    let bounds = BoundingBox::covering(centers.iter().map(Vec::as_slice), 2.0).unwrap();
    (ClusterModel::new(centers).unwrap(), bounds)
}

#[test]
fn grid_refinement_approaches_exact_in_2d() {
    let (model, bounds) = five();
    for x in [[0.7, 0.3], [1.1, -0.9], [-0.2, 1.5]] {
        let exact = exact_affinity_2d(&x, &model, &bounds).unwrap();
        let coarse = grid_affinity(&x, &model, &EUCLID, 32, &bounds).unwrap();
        let fine = grid_affinity(&x, &model, &EUCLID, 256, &bounds).unwrap();
        let (e32, e256) = (
            max_dev(&coarse.alphas, &exact.alphas),
            max_dev(&fine.alphas, &exact.alphas),
        );
        assert!(e32 <= 1.0 / 32.0, "{x:?}: {e32}");
        assert!(e256 <= 1.0 / 256.0, "{x:?}: {e256}");
    }
}

#[test]
fn tetrahedron_centroid_is_symmetric_on_the_grid() {
    let s = 1.0;
    let centers = vec![
        vec![s, s, s],
        vec![s, -s, -s],
        vec![-s, s, -s],
        vec![-s, -s, s],
    ];
    let bounds = BoundingBox::covering(centers.iter().map(Vec::as_slice), 2.0).unwrap();
    let model = ClusterModel::new(centers).unwrap();
    let a = grid_affinity(&[0.0; 3], &model, &EUCLID, 64, &bounds).unwrap();
    for &v in &a.alphas {
        assert!((v - 0.25).abs() <= 1.0 / 64.0, "{:?}", a.alphas);
    }
}

#[test]
fn sampled_affinity_tracks_exact_in_2d() {
    let (model, bounds) = five();
    let config = SamplerConfig {
        seed: 17,
        ..SamplerConfig::default()
    };
    for x in [[0.7, 0.3], [1.1, -0.9], [-0.2, 1.5], [0.05, -0.05]] {
        let exact = exact_affinity_2d(&x, &model, &bounds).unwrap();
        let est = affinity_point(&x, &model, &EUCLID, &bounds, &config).unwrap();
        assert!(
            max_dev(&est.alphas, &exact.alphas) <= 0.04,
            "{x:?}: {:?} vs {:?}",
            est.alphas,
            exact.alphas
        );
    }
}

#[test]
fn kl_sampled_affinity_tracks_exact_in_2d() {
    let kl = DistanceMeasure::Bregman(Generator::GeneralizedKl);
    let model = ClusterModel::new(vec![
        vec![1.0, 1.0],
        vec![3.0, 1.0],
        vec![1.0, 3.0],
        vec![3.0, 3.0],
    ])
    .unwrap();
    let bounds = BoundingBox::new(vec![1e-6, 1e-6], vec![6.0, 6.0]).unwrap();
    let config = SamplerConfig {
        seed: 3,
        ..SamplerConfig::default()
    };
    for x in [[2.0, 2.0], [1.6, 2.3], [2.8, 1.4]] {
        let exact = exact_affinity_2d_with(&x, &model, &kl, &bounds).unwrap();
        let est = affinity_point(&x, &model, &kl, &bounds, &config).unwrap();
        assert!((exact.alphas.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(
            max_dev(&est.alphas, &exact.alphas) <= 0.04,
            "{x:?}: {:?} vs {:?}",
            est.alphas,
            exact.alphas
        );
    }
}

/// Random orthonormal 2-frame in `d` dimensions.
fn frame(d: usize, seed: u64) -> [Vec<f64>; 2] {
    let mut rng = rng_from_seed(seed);
    let mut a: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    a.iter_mut().for_each(|v| *v /= n);
    let mut b: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let p: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    b.iter_mut().zip(&a).for_each(|(v, u)| *v -= p * u);
    let n = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    b.iter_mut().for_each(|v| *v /= n);
    [a, b]
}

#[test]
fn projection_preserves_exact_affinity() {
    let centers = five_cluster_centers(2, 2.0).unwrap();
    let queries = [[0.7, 0.3], [0.4, -0.6], [-0.5, 0.2]];
    let bounds2 = BoundingBox::covering(centers.iter().map(Vec::as_slice), 2.0).unwrap();
    let model2 = ClusterModel::new(centers.clone()).unwrap();
    for d in [10, 50] {
        let [e1, e2] = frame(d, d as u64);
        let offset: Vec<f64> = (0..d).map(|i| i as f64 * 0.1).collect();
        let lift = |p: &[f64]| -> Vec<f64> {
            (0..d)
                .map(|i| offset[i] + p[0] * e1[i] + p[1] * e2[i])
                .collect()
        };
        let high = ClusterModel::new(centers.iter().map(|c| lift(c)).collect()).unwrap();
        let proj = fit_span_projection(&high).unwrap();
        assert_eq!(proj.rank(), 2);
        assert!(apply_projection(&proj, proj.mean())
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-12));
        let low = proj.project_model(&high).unwrap();
        let bounds_low = BoundingBox::covering(low.representatives(), 2.0).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let orig = ((centers[i][0] - centers[j][0]).powi(2)
                    + (centers[i][1] - centers[j][1]).powi(2))
                .sqrt();
                let (a, b) = (low.representative(i), low.representative(j));
                let proj_d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                assert!((orig - proj_d).abs() < 1e-9);
            }
        }
        for q in queries {
            let mut y = lift(&q);
            // Component orthogonal to the hull: shared by every site, so irrelevant.
            let mut rng = rng_from_seed(99);
            let mut noise: Vec<f64> = (0..d)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            for e in [&e1, &e2] {
                let p: f64 = noise.iter().zip(e).map(|(a, b)| a * b).sum();
                noise.iter_mut().zip(e).for_each(|(v, u)| *v -= p * u);
            }
            for (v, n) in y.iter_mut().zip(&noise) {
                *v += n;
            }
            let residual = proj.residual(&y).unwrap();
            for b in proj.basis() {
                assert!(
                    b.iter()
                        .zip(&residual)
                        .map(|(u, v)| u * v)
                        .sum::<f64>()
                        .abs()
                        < 1e-9
                );
            }
            let reference = exact_affinity_2d(&q, &model2, &bounds2).unwrap();
            assert!(!reference.clipped);
            let yp = apply_projection(&proj, &y).unwrap();
            let got = exact_affinity_2d(&yp, &low, &bounds_low).unwrap();
            assert!(!got.clipped);
            assert!(
                max_dev(&got.alphas, &reference.alphas) < 1e-9,
                "d={d} {q:?}"
            );
        }
    }
}

fn rff_error(features: usize, seed: u64) -> f64 {
    let sigma = 1.5;
    let fe = fit_fourier_embedding(4, features, sigma, seed).unwrap();
    let mut rng = rng_from_seed(1000 + seed);
    let mut total = 0.0;
    for _ in 0..100 {
        let a: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
        let b: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
        let d2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
        let exact = (-d2 / (2.0 * sigma * sigma)).exp();
        let (za, zb) = (fe.embed(&a).unwrap(), fe.embed(&b).unwrap());
        let approx: f64 = za.iter().zip(&zb).map(|(x, y)| x * y).sum();
        total += (approx - exact).abs();
    }
    total / 100.0
}

#[test]
fn fourier_error_shrinks_with_more_features() {
    let sizes = [64, 256, 1024];
    let errors: Vec<f64> = sizes
        .iter()
        .map(|&f| (0..3).map(|s| rff_error(f, s)).sum::<f64>() / 3.0)
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    assert!(errors[2] < 0.05, "{errors:?}");
}

#[test]
fn field_nodes_follow_cluster_geometry() {
    let (model, bounds) = five();
    let config = SamplerConfig {
        samples: 300,
        burn_in: 200,
        ..SamplerConfig::default()
    };
    // 9x9 over [-4, 4]^2: spacing 1, so centers (+-2, +-2) and the origin are nodes.
    let spec = GridSpec::spanning([-4.0, -4.0], [4.0, 4.0], 9, 9).unwrap();
    let grid = evaluate_affinity_field(&model, &EUCLID, &bounds, &config, spec).unwrap();
    assert_eq!(grid.score(4, 4), 1.0);
    assert_eq!(grid.score(6, 6), 1.0);
    // Midway between (-2, -2) and (2, -2).
    assert!(grid.score(4, 2) < 1.0);

    let single = ClusterModel::new(vec![vec![0.0, 0.0]]).unwrap();
    let spec = GridSpec::spanning([-1.0, -1.0], [1.0, 1.0], 4, 4).unwrap();
    let grid = evaluate_affinity_field(&single, &EUCLID, &bounds, &config, spec).unwrap();
    assert!(grid.scores().iter().all(|&s| s == 1.0));
}
