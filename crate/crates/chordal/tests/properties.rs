//! Cross-cutting invariants: evaporation structure, automorphism-invariant
//! layers, gluing, counter monotonicity, invariance of counts under
//! conjugation/inversion, and the term-level behavior of the sampler.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use chordal::dp::{CounterKey, Mask};
use chordal::graph::{evaporation_sequence, glue, is_automorphism};
use chordal::oracle;
use chordal::sample::{choose_term, sample_counter, sample_fixed};
use chordal::stats;
use chordal::{DpContext, Permutation, RandomStream};

fn ctx(n: u32, perm: &str) -> DpContext {
    DpContext::new(n, Permutation::parse(perm, n).unwrap())
}

#[test]
fn evaporation_layers_partition_and_match_recomputation() {
    // layers partition V \ X and each layer is exactly the simplicial set
    // outside X of the residual graph
    let mut rng = RandomStream::new(10);
    let c = ctx(6, "id");
    for _ in 0..50 {
        let g = sample_fixed(&c, &mut rng).unwrap();
        for x in [vec![], g.vertices().iter().copied().take(1).collect::<Vec<_>>()] {
            if !g.is_clique(&x) {
                continue;
            }
            let es = evaporation_sequence(&g, &x).unwrap();
            let mut seen: Vec<u32> = x.clone();
            let mut residual = g.clone();
            for layer in &es.layers {
                let expected: Vec<u32> = residual
                    .vertices()
                    .iter()
                    .copied()
                    .filter(|&v| !x.contains(&v) && residual.is_simplicial(v))
                    .collect();
                assert_eq!(layer, &expected);
                for &v in layer {
                    assert!(!seen.contains(&v));
                    seen.push(v);
                }
                residual = residual.without(layer);
            }
            seen.sort_unstable();
            let mut all: Vec<u32> = g.vertices().to_vec();
            all.sort_unstable();
            assert_eq!(seen, all);
        }
    }
}

#[test]
fn layers_invariant_under_automorphism() {
    // for chordal G with automorphism and a setwise-invariant clique X,
    // every evaporation layer is invariant under the automorphism
    for (n, perm) in [(5u32, "(1 2)"), (6, "(1 2)(3 4)"), (6, "(1 2 3)")] {
        let c = ctx(n, perm);
        let pi = Permutation::parse(perm, n).unwrap();
        let mut rng = RandomStream::new(n as u64);
        for _ in 0..40 {
            let g = sample_fixed(&c, &mut rng).unwrap();
            // candidate invariant cliques: the empty set and any invariant
            // maximal clique
            let mut exceptions: Vec<Vec<u32>> = vec![vec![]];
            for mc in g.maximal_cliques() {
                let image: Vec<u32> = {
                    let mut im: Vec<u32> = mc.iter().map(|&v| pi.apply(v)).collect();
                    im.sort_unstable();
                    im
                };
                if image == mc {
                    exceptions.push(mc);
                }
            }
            for x in exceptions {
                let es = evaporation_sequence(&g, &x).unwrap();
                for layer in &es.layers {
                    let mut image: Vec<u32> = layer.iter().map(|&v| pi.apply(v)).collect();
                    image.sort_unstable();
                    assert_eq!(&image, layer, "layer not invariant for pi={perm}");
                }
            }
        }
    }
}

#[test]
fn glue_of_chordal_graphs_is_chordal() {
    // enumerate pairs of small chordal graphs overlapping in {3, 4}; when
    // the overlap is a clique in both, the glue must be chordal
    let left = oracle::enumerate_chordal(&[1, 2, 3, 4]).unwrap();
    let right = oracle::enumerate_chordal(&[3, 4, 5, 6]).unwrap();
    let mut glued = 0;
    for g1 in left.iter().take(40) {
        for g2 in right.iter().take(40) {
            let overlap = [3u32, 4];
            if !(g1.is_clique(&overlap) && g2.is_clique(&overlap)) {
                continue;
            }
            let g = glue(g1, g2).unwrap();
            assert!(g.is_chordal());
            glued += 1;
        }
    }
    assert!(glued > 100);
}

#[test]
fn noncomplete_chordal_has_two_nonadjacent_simplicial_vertices() {
    for g in oracle::enumerate_chordal(&[1, 2, 3, 4, 5]).unwrap() {
        let complete = g.edge_count() == g.len() * (g.len() - 1) / 2;
        if complete {
            continue;
        }
        let simp: Vec<u32> = g
            .vertices()
            .iter()
            .copied()
            .filter(|&v| g.is_simplicial(v))
            .collect();
        assert!(
            simp.iter()
                .any(|&u| simp.iter().any(|&v| u != v && !g.has_edge(u, v))),
            "no non-adjacent simplicial pair in {g:?}"
        );
    }
}

#[test]
fn maximal_clique_count_at_most_n() {
    for g in oracle::enumerate_chordal(&[1, 2, 3, 4, 5]).unwrap() {
        assert!(g.maximal_cliques().len() <= g.len());
    }
}

#[test]
fn counts_invariant_under_conjugation_and_inversion() {
    // |Fix| depends only on the cycle type
    let n = 6u32;
    for perm in ["(1 2)", "(1 2 3)", "(1 2)(3 4)", "(1 2 3 4 5 6)"] {
        let pi = Permutation::parse(perm, n).unwrap();
        let base = DpContext::new(n, pi.clone()).count_fixed();
        let inv = DpContext::new(n, pi.inverse()).count_fixed();
        assert_eq!(base, inv, "inversion changed the count for {perm}");
        for conj in ["(1 6)", "(2 5)(3 6)", "(1 3 5)"] {
            let sigma = Permutation::parse(conj, n).unwrap();
            let conjugated = sigma.compose(&pi).compose(&sigma.inverse());
            let got = DpContext::new(n, conjugated).count_fixed();
            assert_eq!(base, got, "conjugation by {conj} changed the count for {perm}");
        }
    }
}

#[test]
fn connected_count_at_most_total_count() {
    let c = ctx(6, "(1 2)(3 4)");
    let sigma = c.sigma_for(1);
    for k in 0..=6u32 {
        for m in chordal::dp::families::invariant_subsets(
            c.full_mask(),
            &sigma,
            0,
            k as usize,
            Mask::EMPTY,
        ) {
            let a = c.eval(&CounterKey::a(k, 1, m)).unwrap();
            let conn = c.eval(&CounterKey::c(k, 1, m)).unwrap();
            assert!(conn <= a);
        }
    }
}

#[test]
fn identity_specialization_matches_plain_counts() {
    // with pi = id every moved set is empty and a(k, 1, {}) is the plain
    // labeled chordal count
    let c = ctx(6, "id");
    for k in 1..=6u32 {
        let verts: Vec<u32> = (1..=k).collect();
        let plain = BigUint::from(oracle::count_graphs_where(&verts, |g| g.is_chordal()));
        assert_eq!(c.count_a(k, 1, &[]).unwrap(), plain);
    }
}

#[test]
fn sampled_evaporation_time_matches_key() {
    // sampling from g~1(t, 0, k | ...) yields graphs that evaporate at
    // exactly t, and the marginal over t matches the term weights of c
    let c = ctx(5, "(1 2)");
    let m = c.labels_mask(&[1, 2]);
    let key = CounterKey::c(5, 1, m);
    let terms = c.terms(&key).unwrap();
    let weights: Vec<f64> = terms
        .iter()
        .map(|t| t.weight.to_f64().unwrap())
        .collect();
    let mut rng = RandomStream::new(31);
    let mut observed = vec![0u64; terms.len()];
    let draws = 6000;
    for _ in 0..draws {
        let g = sample_counter(&c, &key, &mut rng).unwrap();
        let es = evaporation_sequence(&g, &[]).unwrap();
        let t = es.time() as u32;
        let idx = terms
            .iter()
            .position(|term| matches!(term.meta, chordal::dp::TermMeta::CTime { t: tt } if tt == t))
            .expect("evaporation time must correspond to a term");
        observed[idx] += 1;
    }
    let p = stats::weighted_fit_pvalue(&observed, &weights);
    assert!(p > 0.001, "evaporation-time marginal off: p = {p}");

    // direct conditional check for one inner key
    let g1 = CounterKey::g1(2, 0, 5, 1, Mask::EMPTY, m);
    if !c.eval(&g1).unwrap().to_f64().unwrap().eq(&0.0) {
        for _ in 0..200 {
            let g = sample_counter(&c, &g1, &mut rng).unwrap();
            let es = evaporation_sequence(&g, &[]).unwrap();
            assert_eq!(es.time(), 2);
        }
    }
}

#[test]
fn term_frequencies_match_weights() {
    // the decomposition choice of a(3, 1, {1,2}) splits 1 : 2 : 1 across
    // (k'=2, invariant), (k'=3, invariant), and the orbit case
    let c = ctx(3, "(1 2)");
    let key = CounterKey::a(3, 1, c.labels_mask(&[1, 2]));
    let terms = c.terms(&key).unwrap();
    let weights: Vec<f64> = terms.iter().map(|t| t.weight.to_f64().unwrap()).collect();
    assert_eq!(
        terms.iter().map(|t| t.weight.to_u64().unwrap()).sum::<u64>(),
        4
    );
    let mut rng = RandomStream::new(8);
    let mut observed = vec![0u64; terms.len()];
    for _ in 0..10_000 {
        let (idx, _) = choose_term(&c, &key, &mut rng).unwrap();
        observed[idx] += 1;
    }
    let p = stats::weighted_fit_pvalue(&observed, &weights);
    assert!(p > 0.001, "term frequencies off: p = {p}, obs = {observed:?}");
}

#[test]
fn orbit_reassembly_symmetric_under_pi() {
    // pi = (1 2): a component on {1} must be copied to {2}, and the result
    // must admit (1 2); exercised densely by sampling
    let c = ctx(4, "(1 2)");
    let pi = Permutation::parse("(1 2)", 4).unwrap();
    let mut rng = RandomStream::new(12);
    let mut saw_split_pair = false;
    for _ in 0..400 {
        let g = sample_fixed(&c, &mut rng).unwrap();
        assert!(is_automorphism(&g, &pi).unwrap());
        let comps = g.components();
        let c1 = comps.iter().find(|c| c.contains(&1));
        let c2 = comps.iter().find(|c| c.contains(&2));
        if let (Some(a), Some(b)) = (c1, c2) {
            if a != b {
                // the two components are exchanged by pi, hence isomorphic
                saw_split_pair = true;
                let image: Vec<u32> = {
                    let mut im: Vec<u32> = a.iter().map(|&v| pi.apply(v)).collect();
                    im.sort_unstable();
                    im
                };
                assert_eq!(&image, b);
            }
        }
    }
    assert!(saw_split_pair, "never saw an orbit pair; seed too unlucky?");
}

#[test]
fn vertex_layout_respects_oracle_membership() {
    // the g-layout example: x=2, k=1, M_X={3,4} with pi=(3 4): the oracle
    // and the DP agree on the key, confirming the layout's label choice
    let c = ctx(4, "(3 4)");
    let mx = c.labels_mask(&[3, 4]);
    let key = CounterKey::g(
        chordal::CounterKind::G,
        1,
        2,
        1,
        0,
        1,
        mx,
        Mask::EMPTY,
        Mask::EMPTY,
    );
    let lay = c.layout(&key);
    assert_eq!(lay.x, vec![3, 4]);
    assert_eq!(lay.v, vec![1, 3, 4]);
    assert_eq!(
        c.eval(&key).unwrap(),
        oracle::oracle_counter(&c, &key).unwrap()
    );
}

#[test]
fn fresh_graph_every_draw_spans_layout() {
    // samples from an f-kind key sit on the key's exact layout
    let c = ctx(6, "(1 2)");
    let mk = c.labels_mask(&[1, 2]);
    let key = CounterKey::f(2, 1, 1, 3, 1, Mask::EMPTY, Mask::EMPTY, mk);
    let total = c.eval(&key).unwrap();
    if total > BigUint::from(0u32) {
        let mut rng = RandomStream::new(77);
        let lay = c.layout(&key);
        for _ in 0..150 {
            let g = sample_counter(&c, &key, &mut rng).unwrap();
            assert_eq!(g.vertices(), lay.v.as_slice());
        }
    } else {
        panic!("chose a zero-count key for the layout test");
    }
}
