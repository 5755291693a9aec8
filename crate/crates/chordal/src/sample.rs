//! Uniform sampling of counted graph classes by the sampling-to-counting
//! reduction: re-run each recurrence, pick a summand with probability
//! proportional to its contribution, realize the label choices behind the
//! binomial factors, sample the children recursively, and reassemble with
//! the inverse relabeling maps.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::dp::{base_case_value, CounterKey, CounterKind, DpContext, Mask, Term, TermMeta};
use crate::error::SampleError;
use crate::graph::{is_automorphism, LabeledGraph};
use crate::rng::{uniform_subset, weighted_choice, DrawSource};

/// Sample uniformly from the class counted by `key`.
pub fn sample_counter(
    ctx: &DpContext,
    key: &CounterKey,
    rng: &mut dyn DrawSource,
) -> Result<LabeledGraph, SampleError> {
    ctx.validate(key)?;
    let total = ctx.eval(key)?;
    if total.is_zero() {
        return Err(SampleError::ZeroCount);
    }
    let g = sample_inner(ctx, key, rng)?;
    debug_assert!(
        crate::oracle::key_satisfies(ctx, key, &g),
        "sampled graph violates the semantics of {key:?}: {g:?}"
    );
    Ok(g)
}

/// A chordal graph on [n] admitting pi as automorphism, exactly uniform over
/// that class. Forces the full count on first use of the context.
pub fn sample_fixed(ctx: &DpContext, rng: &mut dyn DrawSource) -> Result<LabeledGraph, SampleError> {
    let key = CounterKey::a(ctx.n(), ctx.canon_p(1), ctx.full_mask());
    let g = sample_counter(ctx, &key, rng)?;
    assert_eq!(g.vertices(), ctx.layout(&key).v.as_slice());
    assert!(g.is_chordal(), "sampler produced a non-chordal graph");
    assert!(
        is_automorphism(&g, ctx.pi()).unwrap(),
        "sampler output does not admit pi"
    );
    Ok(g)
}

/// Pick one summand of `key`'s recurrence with probability proportional to
/// its weight. Exposed for the term-frequency tests.
pub fn choose_term(
    ctx: &DpContext,
    key: &CounterKey,
    rng: &mut dyn DrawSource,
) -> Result<(usize, Term), SampleError> {
    let terms = ctx.terms(key)?;
    if terms.is_empty() {
        return Err(SampleError::ZeroCount);
    }
    let weights: Vec<BigUint> = terms.iter().map(|t| t.weight.clone()).collect();
    debug_assert_eq!(
        weights.iter().sum::<BigUint>(),
        ctx.eval(key).unwrap(),
        "term weights must add up to the count"
    );
    let idx = weighted_choice(&weights, rng)?;
    let term = terms.into_iter().nth(idx).unwrap();
    Ok((idx, term))
}

fn sample_inner(
    ctx: &DpContext,
    key: &CounterKey,
    rng: &mut dyn DrawSource,
) -> Result<LabeledGraph, SampleError> {
    if let Some(g) = base_graph(ctx, key) {
        return Ok(g);
    }
    let (_, term) = choose_term(ctx, key, rng)?;
    reassemble(ctx, key, &term, rng)
}

/// The unique graph of a base-case key with count one.
fn base_graph(ctx: &DpContext, key: &CounterKey) -> Option<LabeledGraph> {
    let value = base_case_value(key)?;
    assert!(!value.is_zero(), "cannot sample from an empty base class");
    let lay = ctx.layout(key);
    match key.kind {
        CounterKind::A => Some(LabeledGraph::new(vec![])),
        // k = 0 everywhere below: the graph is the clique on the exception
        // side (X, or X ∪ L for f at t = 1).
        CounterKind::G | CounterKind::GTilde | CounterKind::GTildeP => {
            Some(LabeledGraph::complete(lay.x))
        }
        CounterKind::F => {
            let mut xl = lay.x;
            xl.extend(lay.l);
            Some(LabeledGraph::complete(xl))
        }
        _ => unreachable!("base value one only occurs for A, g-kinds, and f at t=1"),
    }
}

/// Rebuild a graph of `key`'s class from a chosen term: realize the label
/// choices, sample children, relabel them into place, materialize orbit
/// copies, and glue.
fn reassemble(
    ctx: &DpContext,
    key: &CounterKey,
    term: &Term,
    rng: &mut dyn DrawSource,
) -> Result<LabeledGraph, SampleError> {
    let lay = ctx.layout(key);
    let unmoved = |labels: &[u32]| -> Vec<u32> {
        labels
            .iter()
            .copied()
            .filter(|v| !ctx.is_moved_label(*v))
            .collect()
    };
    let vx = unmoved(&lay.x);
    let vl = unmoved(&lay.l);
    let vr = unmoved(&lay.rest);
    let vz = unmoved(&lay.z);
    let s = lay.rest.first().copied();

    // Draw the unmoved part of the s-component, honoring the rule that s
    // itself joins it whenever s is unmoved.
    let pick_component = |r: usize, rng: &mut dyn DrawSource| -> Vec<u32> {
        let s = s.expect("component picks only occur with free vertices");
        if ctx.is_moved_label(s) {
            uniform_subset(&vr, r, rng)
        } else {
            let rest: Vec<u32> = vr.iter().copied().filter(|&v| v != s).collect();
            let mut c = uniform_subset(&rest, r - 1, rng);
            c.push(s);
            c.sort_unstable();
            c
        }
    };
    // Plain draw without the s rule (the I families).
    let pick_plain = |r: usize, rng: &mut dyn DrawSource| uniform_subset(&vr, r, rng);
    // Draw the unmoved neighborhood part inside X, re-drawing until it
    // escapes Z when the moved part alone does not.
    let pick_xhat = |r: usize, must_escape: bool, rng: &mut dyn DrawSource| -> Vec<u32> {
        loop {
            let pick = uniform_subset(&vx, r, rng);
            if !must_escape || pick.iter().any(|v| !vz.contains(v)) {
                return pick;
            }
        }
    };

    let sorted_union = |a: &[u32], b: &[u32]| -> Vec<u32> {
        let mut out: Vec<u32> = a.iter().chain(b).copied().collect();
        out.sort_unstable();
        out
    };
    let diff = |a: &[u32], b: &[u32]| -> Vec<u32> {
        a.iter().copied().filter(|v| !b.contains(v)).collect()
    };

    let g = match term.meta {
        TermMeta::CTime { .. } | TermMeta::FtZero => {
            // child lives on the identical layout
            sample_inner(ctx, &term.children[0], rng)?
        }

        TermMeta::AInv { kp, m } => {
            let c_hat = pick_component((kp - m.len()) as usize, rng);
            let c_target = sorted_union(&ctx.mask_labels(m), &c_hat);
            let d = diff(&lay.v, &c_target);
            let g1 = sample_child(ctx, &term.children[0], rng, &[(Part::Rest, c_target)])?;
            let g2 = sample_child(ctx, &term.children[1], rng, &[(Part::Rest, d)])?;
            g1.union(&g2)
        }

        TermMeta::AOrbit { c, p_c } => {
            let closure_labels = orbit_closure_labels(ctx, key.p, c, p_c);
            let g1 = sample_child(ctx, &term.children[0], rng, &[(Part::Rest, ctx.mask_labels(c))])?;
            let mut g = orbit_union(ctx, &g1, key.p, p_c);
            let d = diff(&lay.v, &closure_labels);
            let g2 = sample_child(ctx, &term.children[1], rng, &[(Part::Rest, d)])?;
            g = g.union(&g2);
            g
        }

        TermMeta::G1Pick { l, m } => {
            let l_hat = pick_plain((l - m.len()) as usize, rng);
            let l_target = sorted_union(&ctx.mask_labels(m), &l_hat);
            let d = diff(&lay.rest, &l_target);
            sample_child(
                ctx,
                &term.children[0],
                rng,
                &[(Part::X, lay.x.clone()), (Part::L, l_target), (Part::Rest, d)],
            )?
        }

        TermMeta::FPick { kp, m } => {
            let a_hat = pick_plain((kp - m.len()) as usize, rng);
            let a_target = sorted_union(&ctx.mask_labels(m), &a_hat);
            let b = diff(&lay.rest, &a_target);
            let g1 = sample_child(
                ctx,
                &term.children[0],
                rng,
                &[(Part::X, lay.x.clone()), (Part::L, lay.l.clone()), (Part::Rest, a_target)],
            )?;
            let xl = sorted_union(&lay.x, &lay.l);
            let g2 = sample_child(ctx, &term.children[1], rng, &[(Part::X, xl), (Part::Rest, b)])?;
            g1.union(&g2)
        }

        TermMeta::GPick { kp, m } => {
            let a_hat = pick_plain((kp - m.len()) as usize, rng);
            let a_target = sorted_union(&ctx.mask_labels(m), &a_hat);
            let b = diff(&lay.rest, &a_target);
            let g1 = sample_child(
                ctx,
                &term.children[0],
                rng,
                &[(Part::X, lay.x.clone()), (Part::Rest, a_target)],
            )?;
            let g2 = sample_child(
                ctx,
                &term.children[1],
                rng,
                &[(Part::X, lay.x.clone()), (Part::Rest, b)],
            )?;
            g1.union(&g2)
        }

        TermMeta::GtInv { kp, xp, m, mp } => {
            let c_hat = pick_component((kp - m.len()) as usize, rng);
            let c_target = sorted_union(&ctx.mask_labels(m), &c_hat);
            let x_hat = pick_xhat((xp - mp.len()) as usize, mp.subset_of(key.mz), rng);
            let x_target = sorted_union(&ctx.mask_labels(mp), &x_hat);
            let d = diff(&lay.rest, &c_target);
            let g1 = sample_child(
                ctx,
                &term.children[0],
                rng,
                &[(Part::X, x_target), (Part::Rest, c_target)],
            )?;
            let g2 = sample_child(
                ctx,
                &term.children[1],
                rng,
                &[(Part::X, lay.x.clone()), (Part::Rest, d)],
            )?;
            g1.union(&g2)
        }

        TermMeta::GtOrbit { c, p_c, xp, mp } => {
            let x_hat = pick_xhat((xp - mp.len()) as usize, mp.subset_of(key.mz), rng);
            let x_target = sorted_union(&ctx.mask_labels(mp), &x_hat);
            let g1 = sample_child(
                ctx,
                &term.children[0],
                rng,
                &[(Part::X, x_target), (Part::Rest, ctx.mask_labels(c))],
            )?;
            let mut g = orbit_union(ctx, &g1, key.p, p_c);
            let closure_labels = orbit_closure_labels(ctx, key.p, c, p_c);
            let d = diff(&lay.rest, &closure_labels);
            let g2 = sample_child(
                ctx,
                &term.children[1],
                rng,
                &[(Part::X, lay.x.clone()), (Part::Rest, d)],
            )?;
            g = g.union(&g2);
            g
        }

        TermMeta::Ge2Inv { kp, m } => {
            let c_hat = pick_component((kp - m.len()) as usize, rng);
            let c_target = sorted_union(&ctx.mask_labels(m), &c_hat);
            let d = diff(&lay.rest, &c_target);
            let g1 = sample_child(
                ctx,
                &term.children[0],
                rng,
                &[(Part::X, lay.x.clone()), (Part::Rest, c_target)],
            )?;
            let g2 = sample_child(
                ctx,
                &term.children[1],
                rng,
                &[(Part::X, lay.x.clone()), (Part::Rest, d)],
            )?;
            g1.union(&g2)
        }

        TermMeta::Ge2Orbit { c, p_c } => {
            let g1 = sample_child(
                ctx,
                &term.children[0],
                rng,
                &[(Part::X, lay.x.clone()), (Part::Rest, ctx.mask_labels(c))],
            )?;
            let mut g = orbit_union(ctx, &g1, key.p, p_c);
            if term.children.len() == 2 {
                let closure_labels = orbit_closure_labels(ctx, key.p, c, p_c);
                let d = diff(&lay.rest, &closure_labels);
                let g2 = sample_child(
                    ctx,
                    &term.children[1],
                    rng,
                    &[(Part::X, lay.x.clone()), (Part::Rest, d)],
                )?;
                g = g.union(&g2);
            }
            g
        }

        TermMeta::FtOne { kp, m } => {
            let a_hat = pick_plain((kp - m.len()) as usize, rng);
            let a_target = sorted_union(&ctx.mask_labels(m), &a_hat);
            let b = diff(&lay.rest, &a_target);
            let xl = sorted_union(&lay.x, &lay.l);
            let g1 = sample_child(
                ctx,
                &term.children[0],
                rng,
                &[(Part::X, xl), (Part::Rest, a_target)],
            )?;
            let g2 = sample_child(
                ctx,
                &term.children[1],
                rng,
                &[(Part::X, lay.x.clone()), (Part::L, lay.l.clone()), (Part::Rest, b)],
            )?;
            g1.union(&g2)
        }

        TermMeta::FtMany { kp, m } => {
            let a_hat = pick_plain((kp - m.len()) as usize, rng);
            let a_target = sorted_union(&ctx.mask_labels(m), &a_hat);
            let b = diff(&lay.rest, &a_target);
            let xl = sorted_union(&lay.x, &lay.l);
            let g1 = sample_child(
                ctx,
                &term.children[0],
                rng,
                &[(Part::X, xl.clone()), (Part::Rest, a_target)],
            )?;
            let g2 = sample_child(
                ctx,
                &term.children[1],
                rng,
                &[(Part::X, xl), (Part::Rest, b)],
            )?;
            g1.union(&g2)
        }

        TermMeta::FtpInv { kp, xp, lp, m, mxp, mlp } => {
            let c_hat = pick_component((kp - m.len()) as usize, rng);
            let c_target = sorted_union(&ctx.mask_labels(m), &c_hat);
            let must_escape = lp == 0 && mxp.subset_of(key.mz);
            let x_hat = pick_xhat((xp - mxp.len()) as usize, must_escape, rng);
            let x_prime = sorted_union(&ctx.mask_labels(mxp), &x_hat);
            let l_hat = uniform_subset(&vl, (lp - mlp.len()) as usize, rng);
            let l_prime = sorted_union(&ctx.mask_labels(mlp), &l_hat);
            let d = diff(&lay.rest, &c_target);
            let g1 = sample_child(
                ctx,
                &term.children[0],
                rng,
                &[(Part::X, sorted_union(&x_prime, &l_prime)), (Part::Rest, c_target)],
            )?;
            let g2 = if term.children[1].kind == CounterKind::FTildePZ {
                sample_child(
                    ctx,
                    &term.children[1],
                    rng,
                    &[
                        (Part::X, sorted_union(&lay.x, &l_prime)),
                        (Part::L, diff(&lay.l, &l_prime)),
                        (Part::Rest, d),
                    ],
                )?
            } else {
                sample_child(
                    ctx,
                    &term.children[1],
                    rng,
                    &[(Part::X, sorted_union(&lay.x, &lay.l)), (Part::Rest, d)],
                )?
            };
            g1.union(&g2)
        }

        TermMeta::FtpOrbit { c, p_c, xp, lp, mxp, mlp } => {
            let must_escape = lp == 0 && mxp.subset_of(key.mz);
            let x_hat = pick_xhat((xp - mxp.len()) as usize, must_escape, rng);
            let x_prime = sorted_union(&ctx.mask_labels(mxp), &x_hat);
            let l_hat = uniform_subset(&vl, (lp - mlp.len()) as usize, rng);
            let l_prime = sorted_union(&ctx.mask_labels(mlp), &l_hat);
            let g1 = sample_child(
                ctx,
                &term.children[0],
                rng,
                &[(Part::X, sorted_union(&x_prime, &l_prime)), (Part::Rest, ctx.mask_labels(c))],
            )?;
            let mut g = orbit_union(ctx, &g1, key.p, p_c);
            let closure_labels = orbit_closure_labels(ctx, key.p, c, p_c);
            let d = diff(&lay.rest, &closure_labels);
            let g2 = if term.children[1].kind == CounterKind::FTildePZ {
                // the orbit absorbs the pi^p-closure of L' into the exception
                let sigma = ctx.sigma_for(key.p);
                let mlstar = ctx.closure_under(&sigma, mlp);
                let l_absorbed = sorted_union(&ctx.mask_labels(mlstar), &l_hat);
                sample_child(
                    ctx,
                    &term.children[1],
                    rng,
                    &[
                        (Part::X, sorted_union(&lay.x, &l_absorbed)),
                        (Part::L, diff(&lay.l, &l_absorbed)),
                        (Part::Rest, d),
                    ],
                )?
            } else {
                sample_child(
                    ctx,
                    &term.children[1],
                    rng,
                    &[(Part::X, sorted_union(&lay.x, &lay.l)), (Part::Rest, d)],
                )?
            };
            g = g.union(&g2);
            g
        }
    };

    assert_eq!(
        g.vertices(),
        lay.v.as_slice(),
        "reassembled graph must sit on the parent layout"
    );
    assert!(
        is_automorphism(&g, &ctx.label_perm(key.p)).unwrap(),
        "reassembled graph must admit pi^p"
    );
    Ok(g)
}

/// Which part of a child's layout a relabeling target refers to.
#[derive(Clone, Copy, Debug)]
enum Part {
    X,
    L,
    Rest,
}

/// Sample a child key and relabel it into the parent's coordinates: moved
/// labels stay fixed, each layout part's unmoved labels map
/// order-preservingly onto the target's unmoved labels.
fn sample_child(
    ctx: &DpContext,
    child: &CounterKey,
    rng: &mut dyn DrawSource,
    targets: &[(Part, Vec<u32>)],
) -> Result<LabeledGraph, SampleError> {
    let g = sample_inner(ctx, child, rng)?;
    let clay = ctx.layout(child);
    let mut map: HashMap<u32, u32> = HashMap::new();
    for (part, target) in targets {
        let from = match part {
            Part::X => &clay.x,
            Part::L => &clay.l,
            Part::Rest => &clay.rest,
        };
        let from_unmoved: Vec<u32> = from
            .iter()
            .copied()
            .filter(|v| !ctx.is_moved_label(*v))
            .collect();
        let to_unmoved: Vec<u32> = target
            .iter()
            .copied()
            .filter(|v| !ctx.is_moved_label(*v))
            .collect();
        assert_eq!(
            from_unmoved.len(),
            to_unmoved.len(),
            "part sizes must agree for {child:?}"
        );
        debug_assert_eq!(
            from.iter().copied().filter(|v| ctx.is_moved_label(*v)).collect::<Vec<_>>(),
            target.iter().copied().filter(|v| ctx.is_moved_label(*v)).collect::<Vec<_>>(),
            "moved labels must already be in place for {child:?}"
        );
        for (a, b) in from_unmoved.into_iter().zip(to_unmoved) {
            map.insert(a, b);
        }
        for v in from.iter().copied().filter(|v| ctx.is_moved_label(*v)) {
            map.insert(v, v);
        }
    }
    Ok(g.relabel(|v| map[&v]))
}

/// Union of the p_c orbit copies of a sampled component graph: copy i is the
/// image of the first under pi^{p(i-1)}.
fn orbit_union(ctx: &DpContext, g1: &LabeledGraph, p: u64, p_c: u64) -> LabeledGraph {
    let mut g = g1.clone();
    for i in 1..p_c {
        let shift = ctx.label_perm(p * i);
        g = g.union(&g1.apply_perm(&shift));
    }
    g
}

/// Labels of the full orbit closure of a moved component set.
fn orbit_closure_labels(ctx: &DpContext, p: u64, c: Mask, p_c: u64) -> Vec<u32> {
    let sigma = ctx.sigma_for(p);
    let mut cl = c;
    for _ in 1..p_c {
        cl = cl.union(sigma.map_mask(cl));
    }
    ctx.mask_labels(cl)
}

/// Deterministic batch sampling with derived per-sample streams: sample i
/// uses (seed, stream = i), so the output is independent of thread count.
pub fn sample_fixed_many(
    ctx: &DpContext,
    seed: u64,
    count: usize,
) -> Result<Vec<LabeledGraph>, SampleError> {
    // force the count once so workers share a warm memo
    let key = CounterKey::a(ctx.n(), ctx.canon_p(1), ctx.full_mask());
    if ctx.eval(&key)?.is_zero() {
        return Err(SampleError::ZeroCount);
    }
    let sample_one = |i: usize| -> Result<LabeledGraph, SampleError> {
        let mut rng = crate::rng::RandomStream::with_stream(seed, i as u64);
        sample_fixed(ctx, &mut rng)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(sample_one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(sample_one).collect()
    }
}
