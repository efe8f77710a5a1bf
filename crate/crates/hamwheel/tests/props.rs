//! Property tests pitting the optimized implementations against the
//! plain brute-force references on random small instances.

use proptest::prelude::*;

use hamwheel::expander::{self, CertLevel, ExpanderParams};
use hamwheel::gen::{self, Family};
use hamwheel::graph::{Graph, VertexSet};
use hamwheel::hamcount::{self, CountBudget};
use hamwheel::oracle;
use hamwheel::{crux, graph6, Rational};

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .collect();
        let len = pairs.len();
        proptest::collection::vec(any::<bool>(), len).prop_map(move |bits| {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .zip(&bits)
                .filter(|(_, &b)| b)
                .map(|(&e, _)| e)
                .collect();
            Graph::from_edges(n, &edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph6_round_trips(g in arb_graph(40)) {
        let enc = graph6::encode(&g);
        prop_assert_eq!(graph6::decode(&enc).unwrap(), g.clone());
        let txt = graph6::encode_edge_list(&g);
        prop_assert_eq!(graph6::decode_edge_list(&txt).unwrap(), g);
    }

    #[test]
    fn counting_matches_the_naive_oracle(g in arb_graph(9)) {
        let fast = hamcount::count_hamiltonian_subsets(&g, &CountBudget::default()).unwrap();
        let (total, per_vertex) = oracle::count_hamiltonian_subsets_naive(&g);
        prop_assert_eq!(fast.total, total);
        prop_assert_eq!(fast.per_vertex, per_vertex);
    }

    #[test]
    fn crux_matches_the_naive_oracle(g in arb_graph(9), num in 1u64..5, den in 5u64..9) {
        prop_assume!(g.m() > 0);
        let alpha = Rational::new(num, den);
        prop_assume!(alpha < Rational::from_integer(1));
        let cert = crux::crux_exact(&g, alpha, g.n()).unwrap();
        let (naive, _) = oracle::crux_naive(&g, alpha);
        prop_assert_eq!(cert.value, naive);
        prop_assert!(crux::verify_witness(&g, &cert));
    }

    #[test]
    fn neighborhoods_match_the_naive_oracle(g in arb_graph(16), mask in any::<u16>()) {
        let m = mask as u64 & ((1u64 << g.n()) - 1);
        prop_assume!(m != 0);
        let x = VertexSet::from_mask(g.n(), m);
        prop_assert_eq!(x.neighborhood(&g).len(), oracle::neighborhood_size_naive(&g, &x));
    }

    #[test]
    fn exhaustive_expander_verdict_matches_subset_scan(seed in 0u64..200) {
        let n = 8 + (seed % 7) as usize;
        let g = gen::generate(&Family::Gnp { n, p: 0.35 }, seed).unwrap();
        let params = ExpanderParams::new(0.3, 4, 2.0).unwrap();
        let cert = expander::verify_expander(&g, &params, CertLevel::Exhaustive);
        // recheck the verdict against a direct scan over the window
        let (lo, hi) = expander::size_window(g.n(), params.k);
        let mut found = None;
        'scan: for mask in 1u64..(1u64 << n) {
            let k = mask.count_ones() as usize;
            if k < lo || k > hi {
                continue;
            }
            let x = VertexSet::from_mask(n, mask);
            let need = expander::eps(k as f64, params.eps1, params.k) * k as f64;
            if (oracle::neighborhood_size_naive(&g, &x) as f64) < need {
                found = Some(x);
                break 'scan;
            }
        }
        prop_assert_eq!(cert.certified(), found.is_none());
    }
}
