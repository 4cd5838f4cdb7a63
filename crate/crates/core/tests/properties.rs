use proptest::collection::vec;
use proptest::prelude::*;

use cplds::graph::Edge;
use cplds::oracle::peel::{brute_force_coreness, graph_from_masks};
use cplds::oracle::{audit_lds, check_bound, check_history, exact_coreness, ReadMode, ReadRecord};
use cplds::{Cplds, EdgeBatch, Graph, LevelParams, LevelState, NoHooks};

fn edges(n: u32, max: usize) -> impl Strategy<Value = Vec<Edge>> {
    vec((0..n, 0..n), 0..max)
}

fn build(n: usize, e: &[Edge]) -> Graph {
    let mut g = Graph::new(n);
    let (b, _) = g.normalize_batch(&EdgeBatch::insert(e.to_vec()));
    g.apply_batch(&b).unwrap();
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn insert_then_delete_restores_graph(base in edges(30, 80), extra in edges(30, 80)) {
        let mut g = build(30, &base);
        let before = g.edges();
        let (ins, _) = g.normalize_batch(&EdgeBatch::insert(extra));
        g.apply_batch(&ins).unwrap();
        g.audit().unwrap();
        let (del, dropped) = g.normalize_batch(&EdgeBatch::delete(ins.edges.clone()));
        prop_assert_eq!(dropped, 0);
        g.apply_batch(&del).unwrap();
        prop_assert_eq!(g.edges(), before);
    }

    #[test]
    fn coreness_ignores_vertex_names(e in edges(12, 40), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut perm: Vec<u32> = (0..12).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let g = build(12, &e);
        let renamed: Vec<Edge> = e.iter().map(|&(u, v)| (perm[u as usize], perm[v as usize])).collect();
        let h = build(12, &renamed);
        let (a, b) = (exact_coreness(&g), exact_coreness(&h));
        for v in 0..12 {
            prop_assert_eq!(a[v], b[perm[v] as usize]);
        }
    }

    #[test]
    fn peel_matches_brute_force(e in edges(9, 30)) {
        let g = build(9, &e);
        let mut adj = vec![0u32; 9];
        for (u, v) in g.edges() {
            adj[u as usize] |= 1 << v;
            adj[v as usize] |= 1 << u;
        }
        prop_assert_eq!(exact_coreness(&graph_from_masks(&adj)), brute_force_coreness(&adj));
    }

    #[test]
    fn invariants_hold_after_random_batches(batches in vec((any::<bool>(), edges(60, 150)), 1..8)) {
        let n = 60;
        let params = LevelParams::new(n, 0.2, 9.0).unwrap();
        let mut g = Graph::new(n);
        let mut st = LevelState::new(params);
        for (insert, e) in batches {
            let raw = if insert {
                EdgeBatch::insert(e)
            } else {
                EdgeBatch::delete(g.edges().into_iter().filter(|x| e.len() % 2 == 0 || x.0 % 2 == 0).collect())
            };
            let (b, _) = g.normalize_batch(&raw);
            g.apply_batch(&b).unwrap();
            st.apply(&g, &b, &NoHooks).unwrap();
            prop_assert!(audit_lds(&g, &st).is_empty());
            st.audit_bookkeeping(&g).unwrap();
            let r = check_bound(&st.estimates(), &exact_coreness(&g), 2.8);
            prop_assert!(r.passes(), "{:?}", r.offenders);
        }
    }

    #[test]
    fn sequential_histories_pass(batches in vec(edges(40, 60), 1..6), picks in vec(0u32..40, 1..20)) {
        let mut c = Cplds::new(LevelParams::new(40, 0.2, 9.0).unwrap(), 1, true).unwrap();
        let reader = c.reader();
        let mut reads = Vec::new();
        let mut records = Vec::new();
        let sample = |reads: &mut Vec<ReadRecord>| {
            for &v in &picks {
                let inv = cplds::clock::now_ns();
                let level = reader.read(v).level;
                let ret = cplds::clock::now_ns().max(inv + 1);
                reads.push(ReadRecord { vertex: v, invoke_ts: inv, return_ts: ret, level, mode: ReadMode::Cplds });
            }
        };
        sample(&mut reads);
        for e in batches {
            records.push(c.apply(&EdgeBatch::insert(e)).unwrap().record);
            sample(&mut reads);
        }
        prop_assert!(check_history(&records, &reads).unwrap().is_empty());
    }
}
