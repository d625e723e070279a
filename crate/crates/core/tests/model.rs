use corrconv_core::csbm_model::{
    expected_adjacency_matvec, reduce_to_1d, sample_features, sample_graph, sample_partition,
    signal_vector, ModelParams,
};
use corrconv_core::oracle::{dense_adjacency, dense_expected_adjacency, random_vector};
use corrconv_core::rng::{derive_seed, Stream};
use proptest::prelude::*;

#[test]
fn empirical_adjacency_mean_matches_blocks() {
    let n = 24;
    let samples = 400;
    let params = ModelParams::graph_only(n, 0.6, 0.2).unwrap();
    let part = sample_partition(n, true, 1).unwrap();
    let expected = dense_expected_adjacency(&params, &part).unwrap();
    let mut mean = vec![0.0; n * n];
    for t in 0..samples {
        let g = sample_graph(&params, &part, derive_seed(3, 0, t, Stream::Graph)).unwrap();
        let a = dense_adjacency(&g).unwrap();
        for i in 0..n {
            for j in 0..n {
                mean[i * n + j] += a.get(i, j) / samples as f64;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                assert_eq!(mean[i * n + j], 0.0);
                continue;
            }
            let p = expected.get(i, j);
            let se = (p * (1.0 - p) / samples as f64).sqrt();
            assert!(
                (mean[i * n + j] - p).abs() <= 5.0 * se,
                "({i},{j}): {} vs {p}",
                mean[i * n + j]
            );
        }
    }
}

#[test]
fn expected_adjacency_matvec_matches_dense() {
    let params = ModelParams::graph_only(30, 0.35, 0.15).unwrap();
    let part = sample_partition(30, true, 8).unwrap();
    let s = signal_vector(&part);
    let dense = dense_expected_adjacency(&params, &part).unwrap();
    let x = random_vector(30, 2);
    let got = expected_adjacency_matvec(&params, &s, &x).unwrap();
    let want = dense.matvec(&x).unwrap();
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn end_to_end_reduction_noise_level() {
    let n = 1000;
    let mu = vec![0.4, -0.2, 0.1];
    let nu = vec![-0.1, 0.3, 0.0];
    let sigma = 1.5;
    let params = ModelParams::new(n, 0.1, 0.02, mu.clone(), nu.clone(), sigma).unwrap();
    let part = sample_partition(n, true, 4).unwrap();
    let s = signal_vector(&part);
    let feats = sample_features(&params, &part, 9).unwrap();
    let red = reduce_to_1d(&feats, &params).unwrap();
    let resid: Vec<f64> = red.x.iter().zip(s.as_slice()).map(|(a, b)| a - b).collect();
    let mean = resid.iter().sum::<f64>() / n as f64;
    let sd = (resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    assert!(
        (sd / red.sigma_prime - 1.0).abs() < 0.1,
        "{sd} vs {}",
        red.sigma_prime
    );
    assert!(mean.abs() < 5.0 * red.sigma_prime / (n as f64).sqrt());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_reduction_is_exact(
        half in 1usize..40,
        m in 1usize..5,
        seed in any::<u64>(),
        shift in -3.0f64..3.0,
    ) {
        let n = 2 * half;
        let mu: Vec<f64> = random_vector(m, seed).iter().map(|v| v + shift).collect();
        let nu: Vec<f64> = random_vector(m, seed ^ 7).iter().map(|v| v - shift).collect();
        prop_assume!(mu.iter().zip(&nu).map(|(a, b)| (a - b).powi(2)).sum::<f64>() > 1e-3);
        let params = ModelParams::new(n, 0.5, 0.5, mu, nu, 0.0).unwrap();
        let part = sample_partition(n, true, seed).unwrap();
        let s = signal_vector(&part);
        let red = reduce_to_1d(&sample_features(&params, &part, seed).unwrap(), &params).unwrap();
        for (a, b) in red.x.iter().zip(s.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs());
        }
    }

    #[test]
    fn graphs_are_simple(half in 1usize..30, p in 0.0f64..=1.0, q in 0.0f64..=1.0, seed in any::<u64>()) {
        let n = 2 * half;
        let params = ModelParams::graph_only(n, p, q).unwrap();
        let part = sample_partition(n, true, seed).unwrap();
        let g = sample_graph(&params, &part, seed).unwrap();
        let a = dense_adjacency(&g).unwrap();
        prop_assert!(a.max_asymmetry() == 0.0);
        for v in 0..n {
            prop_assert_eq!(a.get(v, v), 0.0);
            prop_assert_eq!(a.row(v).iter().sum::<f64>() as usize, g.degree(v));
        }
        if p == 1.0 && q == 1.0 {
            prop_assert_eq!(g.edge_count(), n * (n - 1) / 2);
        }
    }
}
