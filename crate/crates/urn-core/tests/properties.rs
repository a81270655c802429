#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use urn_core::graph::{generate_graph, DirectedGraph, GraphFamily, GraphParams};
use urn_core::rng::seeded;
use urn_core::spectral::{eigenvalues, invert, lyapunov_solve, symmetric_eigen, Matrix};
use urn_core::theory::{
    clt_covariance, consensus_equilibrium, drift, explicit_inverse_equilibrium, h_matrix, heterogeneous_limit, rho,
};
use urn_core::urn::{HeterogeneousScheme, ReplacementMatrix, Scheme, Simulator, UrnState};

/// Random directed graph with every vertex given an in-edge.
fn arb_graph() -> impl Strategy<Value = DirectedGraph> {
    (1usize..9).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            let mut edges: Vec<(usize, usize)> =
                (0..n * n).filter(|&k| bits[k]).map(|k| (k / n, k % n)).collect();
            let mut indeg = vec![0; n];
            edges.iter().for_each(|&(_, j)| indeg[j] += 1);
            for (v, d) in indeg.iter().enumerate() {
                if *d == 0 {
                    edges.push((v, v));
                }
            }
            DirectedGraph::new(n, edges).unwrap()
        })
    })
}

fn arb_family_graph() -> impl Strategy<Value = DirectedGraph> {
    (0usize..6, 3usize..12, any::<u64>()).prop_filter_map("family params", |(f, n, seed)| {
        let family = GraphFamily::ALL[f];
        let params = GraphParams { n, d: Some(2), p: Some(0.3) };
        generate_graph(family, &params, seed).ok()
    })
}

fn arb_params() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..=1.0, 0.0f64..=1.0).prop_filter("non-Pólya", |(a, b)| a + b < 1.99)
}

fn regular_graph(n: usize, d: usize, seed: u64) -> Option<DirectedGraph> {
    generate_graph(GraphFamily::DRegularRandom, &GraphParams::regular(n, d), seed).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weighted_adjacency_is_column_stochastic(g in prop_oneof![arb_graph(), arb_family_graph()]) {
        let a = g.weighted_adjacency().unwrap();
        for s in a.column_sums() {
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn regular_undirected_is_doubly_stochastic(n in 4usize..14, d in 1usize..4, seed in any::<u64>()) {
        prop_assume!(d < n && (n * d) % 2 == 0);
        let g = regular_graph(n, d, seed).unwrap();
        let a = g.weighted_adjacency().unwrap();
        prop_assert!(a.is_symmetric(1e-15));
        for s in a.row_sums() {
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn generation_is_deterministic(f in 0usize..6, n in 3usize..12, seed in any::<u64>()) {
        let params = GraphParams { n, d: Some(2), p: Some(0.4) };
        let a = generate_graph(GraphFamily::ALL[f], &params, seed);
        let b = generate_graph(GraphFamily::ALL[f], &params, seed);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn weighted_adjacency_spectrum(g in prop_oneof![arb_graph(), arb_family_graph()]) {
        let spec = eigenvalues(&g.weighted_adjacency().unwrap()).unwrap();
        prop_assert_eq!(spec.len(), g.n_vertices());
        prop_assert!(spec.eigenvalues.iter().any(|z| (z.re - 1.0).abs() <= 1e-9 && z.im.abs() <= 1e-9));
        prop_assert!(spec.eigenvalues.iter().all(|z| z.norm() <= 1.0 + 1e-9));
        if let Some(l2) = spec.second_max_real {
            prop_assert!(spec.min_real <= l2 + 1e-12 && l2 <= spec.max_real + 1e-12);
        }
    }

    #[test]
    fn lyapunov_symmetric_and_psd(g in arb_graph(), (al, be) in arb_params()) {
        let a = g.weighted_adjacency().unwrap();
        let info = rho(al, be, &a).unwrap();
        prop_assume!(info.rho > 0.5 + 1e-3);
        let n = a.rows();
        let b = &h_matrix(&a, al, be) - &Matrix::identity(n).scale(0.5);
        let q = a.transpose().matmul(&a);
        let s = lyapunov_solve(&b, &q).unwrap();
        let residual = (&(&b.transpose().matmul(&s) + &s.matmul(&b)) - &q).frobenius_norm();
        prop_assert!(residual <= 1e-10 * q.frobenius_norm().max(1.0));
        prop_assert!(s.is_symmetric(1e-12));
        let (vals, _) = symmetric_eigen(&s).unwrap();
        prop_assert!(vals.iter().all(|&v| v >= -1e-9 * s.max_abs().max(1.0)));
    }

    #[test]
    fn invert_twice_is_identity(g in arb_graph(), r in -0.99f64..0.99) {
        let a = g.weighted_adjacency().unwrap();
        let m = &a.scale(r) - &Matrix::identity(a.rows());
        let back = invert(&invert(&m).unwrap()).unwrap();
        prop_assert!((&back - &m).max_abs() <= 1e-8);
        let prod = m.matmul(&invert(&m).unwrap());
        prop_assert!((&prod - &Matrix::identity(a.rows())).frobenius_norm() <= 1e-10 * a.rows() as f64);
    }

    #[test]
    fn drift_vanishes_and_inverse_agrees(g in prop_oneof![arb_graph(), arb_family_graph()], (al, be) in arb_params()) {
        let a = g.weighted_adjacency().unwrap();
        let n = a.rows();
        let c = consensus_equilibrium(al, be).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
        let h = drift(&vec![c; n], &a, al, be).unwrap();
        prop_assert!(h.iter().all(|x| x.abs() <= 1e-12));
        let r = al + be - 1.0;
        if r.abs() < 1.0 {
            prop_assert!(invert(&(&a.scale(r) - &Matrix::identity(n))).is_ok());
        }
        let z = explicit_inverse_equilibrium(al, be, &a).unwrap();
        prop_assert!(z.iter().all(|x| (x - c).abs() <= 1e-10));
    }

    #[test]
    fn rho_is_min_real_part_of_h(g in prop_oneof![arb_graph(), arb_family_graph()], (al, be) in arb_params()) {
        let a = g.weighted_adjacency().unwrap();
        let info = rho(al, be, &a).unwrap();
        let spec = eigenvalues(&h_matrix(&a, al, be)).unwrap();
        prop_assert!((spec.min_real - info.rho).abs() <= 1e-9);
    }

    #[test]
    fn heterogeneous_limit_in_unit_interval(
        g in arb_graph(),
        raw in proptest::collection::vec((0u64..=6, 0u64..=6, 1u64..=6), 8),
    ) {
        let n = g.n_vertices();
        let mats: Vec<ReplacementMatrix> = raw[..n]
            .iter()
            .map(|&(a, b, m)| ReplacementMatrix::new(a.min(m), b.min(m), m).unwrap())
            .collect();
        prop_assume!(!mats.iter().any(|r| r.is_polya()));
        if let Ok(z) = heterogeneous_limit(&g, &HeterogeneousScheme::new(mats), None) {
            prop_assert!(z.iter().all(|&x| (-1e-9..=1.0 + 1e-9).contains(&x)));
        }
    }

    #[test]
    fn homogeneous_ball_counts_are_exact(
        g in arb_graph(),
        (a, b, m) in (0u64..=5, 0u64..=5, 1u64..=5),
        steps in 0u64..40,
        seed in any::<u64>(),
    ) {
        let r = ReplacementMatrix::new(a.min(m), b.min(m), m).unwrap();
        let n = g.n_vertices();
        let init = UrnState::uniform(n);
        let mut sim = Simulator::new(&g, Scheme::from(r), init.clone()).unwrap();
        let mut rng = seeded(seed);
        let deg = g.in_degrees();
        for t in 1..=steps {
            let before = sim.state().clone();
            sim.step(&mut rng).unwrap();
            let s = sim.state();
            for i in 0..n {
                prop_assert_eq!(s.total(i), init.total(i) + t * m * deg[i] as u64);
                // the white gain is a sum of one of {a, m - b} per in-neighbour
                let gain = s.white[i] - before.white[i];
                let k = deg[i] as u64;
                let feasible = (0..=k).any(|w| w * r.a() + (k - w) * (m - r.b()) == gain);
                prop_assert!(feasible);
            }
            let total: u64 = (0..n).map(|i| s.total(i)).sum();
            prop_assert_eq!(total, 2 * n as u64 + t * m * g.n_edges() as u64);
        }
    }
}

#[test]
fn sigma_matches_closed_form_on_random_regular_graphs() {
    let (al, be) = (0.5, 0.7);
    let mut checked = 0;
    for seed in 0..20u64 {
        let (n, d) = [(10, 3), (12, 4), (8, 3), (16, 5)][seed as usize % 4];
        let g = regular_graph(n, d, seed).unwrap();
        let a = g.weighted_adjacency().unwrap();
        let sigma = clt_covariance(al, be, &a).unwrap();
        let r = al + be - 1.0;
        let cv = urn_core::theory::noise_variance_c(al, be).unwrap();
        let inner = invert(&(&Matrix::identity(n) - &a.scale(2.0 * r))).unwrap();
        let closed = a.matmul(&a).matmul(&inner).scale(cv);
        assert!(sigma.relative_error(&closed) <= 1e-8, "seed {seed}");
        checked += 1;
    }
    assert_eq!(checked, 20);
}
