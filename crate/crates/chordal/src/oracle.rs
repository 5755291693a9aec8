//! Brute-force ground truth: exhaustive enumeration over edge bitmasks,
//! chordality filtering, fixed-point counting, canonical census, and
//! direct-from-definition evaluation of every counter function at tiny
//! sizes. Nothing here consults the DP engine; equality between the two is
//! what the test suites assert.

use std::collections::HashMap;

use num_bigint::BigUint;

use crate::dp::{CounterKey, CounterKind, DpContext};
use crate::error::OracleError;
use crate::graph::{evaporation_sequence, is_automorphism, LabeledGraph};
use crate::math::factorial;
use crate::perm::Permutation;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub const ENUM_LIMIT: usize = 7;
pub const CANON_LIMIT: usize = 8;

/// Pair order shared with graph6: (0,1), (0,2), (1,2), (0,3), ...
fn pair_index_order(m: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    for j in 1..m {
        for i in 0..j {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Build the graph on `verts` whose upper-triangle bits are `mask` in the
/// shared pair order.
pub fn graph_from_bits(verts: &[u32], mask: u64) -> LabeledGraph {
    let mut g = LabeledGraph::new(verts.to_vec());
    for (b, (i, j)) in pair_index_order(verts.len()).into_iter().enumerate() {
        if mask >> b & 1 == 1 {
            g.add_edge(verts[i], verts[j]);
        }
    }
    g
}

pub fn bits_from_graph(g: &LabeledGraph) -> u64 {
    let verts = g.vertices();
    let mut mask = 0u64;
    for (b, (i, j)) in pair_index_order(verts.len()).into_iter().enumerate() {
        if g.has_edge(verts[i], verts[j]) {
            mask |= 1 << b;
        }
    }
    mask
}

/// Fold `f` over every graph on `verts` (all 2^C(m,2) edge subsets), merging
/// with `merge`. Parallel over bitmask ranges when the feature is enabled.
pub fn fold_graphs<T, F, M>(verts: &[u32], init: T, f: F, merge: M) -> T
where
    T: Send + Sync + Clone,
    F: Fn(T, &LabeledGraph) -> T + Sync,
    M: Fn(T, T) -> T + Sync + Send,
{
    let m = verts.len();
    let nbits = m * m.saturating_sub(1) / 2;
    let total: u64 = 1 << nbits;
    fold_graphs_impl(verts, total, init, f, merge)
}

#[cfg(feature = "parallel")]
fn fold_graphs_impl<T, F, M>(verts: &[u32], total: u64, init: T, f: F, merge: M) -> T
where
    T: Send + Sync + Clone,
    F: Fn(T, &LabeledGraph) -> T + Sync,
    M: Fn(T, T) -> T + Sync + Send,
{
    (0..total)
        .into_par_iter()
        .fold(
            || init.clone(),
            |acc, mask| f(acc, &graph_from_bits(verts, mask)),
        )
        .reduce(|| init.clone(), merge)
}

#[cfg(not(feature = "parallel"))]
fn fold_graphs_impl<T, F, M>(verts: &[u32], total: u64, init: T, f: F, merge: M) -> T
where
    T: Send + Sync + Clone,
    F: Fn(T, &LabeledGraph) -> T + Sync,
    M: Fn(T, T) -> T + Sync + Send,
{
    let _ = merge;
    (0..total).fold(init, |acc, mask| f(acc, &graph_from_bits(verts, mask)))
}

/// Sequential fold over all graphs on `verts`, regardless of features.
/// The benches use this as the baseline against the default path.
pub fn fold_graphs_seq<T, F>(verts: &[u32], init: T, f: F) -> T
where
    F: Fn(T, &LabeledGraph) -> T,
{
    let m = verts.len();
    let nbits = m * m.saturating_sub(1) / 2;
    (0u64..1 << nbits).fold(init, |acc, mask| f(acc, &graph_from_bits(verts, mask)))
}

/// Count graphs on `verts` satisfying a predicate.
pub fn count_graphs_where<P>(verts: &[u32], pred: P) -> u64
where
    P: Fn(&LabeledGraph) -> bool + Sync,
{
    fold_graphs(
        verts,
        0u64,
        |acc, g| if pred(g) { acc + 1 } else { acc },
        |a, b| a + b,
    )
}

fn check_limit(n: usize, limit: usize) -> Result<(), OracleError> {
    if n > limit {
        Err(OracleError::TooLarge { n, limit })
    } else {
        Ok(())
    }
}

/// All chordal graphs on `verts`, each exactly once, in bitmask order.
pub fn enumerate_chordal(verts: &[u32]) -> Result<Vec<LabeledGraph>, OracleError> {
    check_limit(verts.len(), ENUM_LIMIT)?;
    let m = verts.len();
    let nbits = m * m.saturating_sub(1) / 2;
    let mut out = Vec::new();
    for mask in 0u64..(1 << nbits) {
        let g = graph_from_bits(verts, mask);
        if g.is_chordal() {
            out.push(g);
        }
    }
    Ok(out)
}

/// |Fix(pi)|: labeled chordal graphs on [n] with pi as automorphism.
pub fn oracle_fix(n: usize, pi: &Permutation) -> Result<BigUint, OracleError> {
    check_limit(n, ENUM_LIMIT)?;
    let verts: Vec<u32> = (1..=n as u32).collect();
    let count = count_graphs_where(&verts, |g| {
        g.is_chordal() && is_automorphism(g, pi).unwrap_or(false)
    });
    Ok(BigUint::from(count))
}

/// Sequential baseline of `oracle_fix` for the benches.
pub fn oracle_fix_seq(n: usize, pi: &Permutation) -> Result<BigUint, OracleError> {
    check_limit(n, ENUM_LIMIT)?;
    let verts: Vec<u32> = (1..=n as u32).collect();
    let count = fold_graphs_seq(&verts, 0u64, |acc, g| {
        if g.is_chordal() && is_automorphism(g, pi).unwrap_or(false) {
            acc + 1
        } else {
            acc
        }
    });
    Ok(BigUint::from(count))
}

/// Neighborhood of a vertex set: all vertices outside `set` adjacent to it.
fn set_neighborhood(g: &LabeledGraph, set: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = g
        .vertices()
        .iter()
        .copied()
        .filter(|v| !set.contains(v) && set.iter().any(|&u| g.has_edge(u, *v)))
        .collect();
    out.sort_unstable();
    out
}

fn sees_all_of(g: &LabeledGraph, comp: &[u32], target: &[u32]) -> bool {
    let nb = set_neighborhood(g, comp);
    target.iter().all(|v| nb.contains(v))
}

/// Does `g` (on exactly the key's vertex layout) satisfy every clause of the
/// key's definition? This is the definitional semantics the DP must agree
/// with, and the invariant the sampler asserts on rebuilt graphs.
pub fn key_satisfies(ctx: &DpContext, key: &CounterKey, g: &LabeledGraph) -> bool {
    let lay = ctx.layout(key);
    debug_assert_eq!(g.vertices(), lay.v.as_slice(), "graph must sit on the key's layout");
    if !g.is_chordal() {
        return false;
    }
    let sigma = ctx.label_perm(key.p);
    if !is_automorphism(g, &sigma).unwrap_or(false) {
        return false;
    }
    match key.kind {
        CounterKind::A => true,
        CounterKind::C => g.is_connected(),
        CounterKind::G | CounterKind::GTilde | CounterKind::GTildeP => {
            if !g.is_clique(&lay.x) {
                return false;
            }
            let es = match evaporation_sequence(g, &lay.x) {
                Ok(es) => es,
                Err(_) => return false,
            };
            if es.time() > key.t as usize {
                return false;
            }
            let comps = g.without(&lay.x).components();
            let x_minus_z: Vec<u32> = lay.x.iter().copied().filter(|v| !lay.z.contains(v)).collect();
            for comp in &comps {
                let nb = set_neighborhood(g, comp);
                if !nb.iter().any(|v| x_minus_z.contains(v)) {
                    return false;
                }
            }
            match key.kind {
                CounterKind::G => true,
                _ => {
                    // every component evaporates at exactly t
                    if comps.iter().any(|c| es.subset_time(c) != key.t as usize) {
                        return false;
                    }
                    if key.kind == CounterKind::GTildeP {
                        comps.iter().all(|c| !sees_all_of(g, c, &lay.x))
                    } else {
                        true
                    }
                }
            }
        }
        CounterKind::GTilde1 | CounterKind::GTildeGe2 => {
            if !g.is_clique(&lay.x) {
                return false;
            }
            let es = match evaporation_sequence(g, &lay.x) {
                Ok(es) => es,
                Err(_) => return false,
            };
            let comps = g.without(&lay.x).components();
            let want = if key.kind == CounterKind::GTilde1 { comps.len() == 1 } else { comps.len() >= 2 };
            if !want {
                return false;
            }
            comps
                .iter()
                .all(|c| es.subset_time(c) == key.t as usize && sees_all_of(g, c, &lay.x))
        }
        CounterKind::F | CounterKind::FTilde | CounterKind::FTildePZ => {
            let mut xl: Vec<u32> = lay.x.iter().chain(&lay.l).copied().collect();
            xl.sort_unstable();
            if !g.is_clique(&xl) {
                return false;
            }
            let es = match evaporation_sequence(g, &lay.x) {
                Ok(es) => es,
                Err(_) => return false,
            };
            if es.time() != key.t as usize {
                return false;
            }
            let mut last = es.last_layer().to_vec();
            last.sort_unstable();
            if last != lay.l {
                return false;
            }
            // connectivity: G \ X for f and f~, G \ Z for f~p(z)
            let cut = if key.kind == CounterKind::FTildePZ { &lay.z } else { &lay.x };
            let reduced = g.without(cut);
            if !reduced.is_empty() && !reduced.is_connected() {
                return false;
            }
            if key.kind == CounterKind::F {
                return true;
            }
            let comps = g.without(&xl).components();
            if comps.is_empty() {
                return false;
            }
            if comps
                .iter()
                .any(|c| es.subset_time(c) != key.t as usize - 1)
            {
                return false;
            }
            if key.kind == CounterKind::FTildePZ {
                comps.iter().all(|c| !sees_all_of(g, c, &xl))
            } else {
                true
            }
        }
    }
}

/// Evaluate a counter key by enumerating all graphs on its layout and
/// filtering by `key_satisfies`.
pub fn oracle_counter(ctx: &DpContext, key: &CounterKey) -> Result<BigUint, OracleError> {
    let lay = ctx.layout(key);
    check_limit(lay.v.len(), ENUM_LIMIT)?;
    let count = count_graphs_where(&lay.v, |g| key_satisfies(ctx, key, g));
    Ok(BigUint::from(count))
}

// ---- canonical forms and the census ---------------------------------------

/// Canonical form of a graph with at most CANON_LIMIT vertices: the minimum
/// upper-triangle bitstring over all relabelings, found by DFS with prefix
/// pruning. Bits are packed so that lexicographic order on the bit sequence
/// is numeric order on the returned integer.
pub fn canonical_bits(g: &LabeledGraph) -> Result<u64, OracleError> {
    let n = g.len();
    check_limit(n, CANON_LIMIT)?;
    if n <= 1 {
        return Ok(0);
    }
    let nbits = n * n.saturating_sub(1) / 2;
    // adjacency among indices
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i != j && g.has_edge(g.vertices()[i], g.vertices()[j]))
                .collect()
        })
        .collect();

    // bit position of pair (i, j), i < j, in the packed representation:
    // pair b (in column-major order) sits at bit nbits - 1 - b.
    let mut best: Option<u64> = None;
    let mut assign: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    // prefix[j] = packed bits among the first j assigned positions
    fn dfs(
        n: usize,
        nbits: usize,
        adj: &[Vec<bool>],
        assign: &mut Vec<usize>,
        used: &mut [bool],
        prefix: u64,
        best: &mut Option<u64>,
    ) {
        let j = assign.len();
        if j == n {
            if best.map_or(true, |b| prefix < b) {
                *best = Some(prefix);
            }
            return;
        }
        let col_bits = j; // pairs (0,j), ..., (j-1,j)
        let done_bits = j * j.saturating_sub(1) / 2;
        for v in 0..n {
            if used[v] {
                continue;
            }
            let mut col = 0u64;
            for (i, &u) in assign.iter().enumerate() {
                if adj[u][v] {
                    col |= 1 << (col_bits - 1 - i);
                }
            }
            let new_prefix = prefix | col << (nbits - done_bits - col_bits);
            // prune: compare the decided prefix against best
            if let Some(b) = *best {
                let decided = done_bits + col_bits;
                let b_prefix = b >> (nbits - decided) << (nbits - decided);
                let np_prefix = new_prefix; // bits below `decided` are zero
                if np_prefix > b_prefix {
                    continue;
                }
            }
            assign.push(v);
            used[v] = true;
            dfs(n, nbits, adj, assign, used, new_prefix, best);
            assign.pop();
            used[v] = false;
        }
    }
    dfs(n, nbits, &adj, &mut assign, &mut used, 0, &mut best);
    Ok(best.unwrap())
}

/// Rebuild the canonical representative on [n] from packed canonical bits.
pub fn graph_from_canonical_bits(n: usize, canon: u64) -> LabeledGraph {
    let nbits = n * n.saturating_sub(1) / 2;
    let verts: Vec<u32> = (1..=n as u32).collect();
    // unpack: pair b holds bit nbits - 1 - b
    let mut mask = 0u64;
    for b in 0..nbits {
        if canon >> (nbits - 1 - b) & 1 == 1 {
            mask |= 1 << b;
        }
    }
    graph_from_bits(&verts, mask)
}

/// The unlabeled census of chordal graphs on [n]: canonical classes with
/// labeled orbit sizes.
#[derive(Clone, Debug)]
pub struct Census {
    pub n: usize,
    pub labeled_count: BigUint,
    /// (canonical form, orbit size), sorted by canonical form.
    pub classes: Vec<(u64, u64)>,
}

impl Census {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn representative(&self, idx: usize) -> LabeledGraph {
        graph_from_canonical_bits(self.n, self.classes[idx].0)
    }

    pub fn class_index(&self, canon: u64) -> Option<usize> {
        self.classes.binary_search_by_key(&canon, |c| c.0).ok()
    }

    /// Export lines "<canonical-graph6> <orbit-size>".
    pub fn export(&self) -> String {
        let mut out = String::new();
        for &(canon, orbit) in &self.classes {
            let rep = graph_from_canonical_bits(self.n, canon);
            let g6 = crate::format::to_graph6(&rep).expect("census n is small");
            out.push_str(&format!("{g6} {orbit}\n"));
        }
        out
    }
}

pub fn census(n: usize) -> Result<Census, OracleError> {
    check_limit(n, ENUM_LIMIT)?;
    let verts: Vec<u32> = (1..=n as u32).collect();
    let map = fold_graphs(
        &verts,
        HashMap::<u64, u64>::new(),
        |mut acc, g| {
            if g.is_chordal() {
                let canon = canonical_bits(g).expect("n within canon limit");
                *acc.entry(canon).or_insert(0) += 1;
            }
            acc
        },
        |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        },
    );
    Ok(census_from_classes(n, map))
}

/// Sequential baseline of `census` for the benches.
pub fn census_seq(n: usize) -> Result<Census, OracleError> {
    check_limit(n, ENUM_LIMIT)?;
    let verts: Vec<u32> = (1..=n as u32).collect();
    let map = fold_graphs_seq(&verts, HashMap::<u64, u64>::new(), |mut acc, g| {
        if g.is_chordal() {
            let canon = canonical_bits(g).expect("n within canon limit");
            *acc.entry(canon).or_insert(0) += 1;
        }
        acc
    });
    Ok(census_from_classes(n, map))
}

fn census_from_classes(n: usize, map: HashMap<u64, u64>) -> Census {
    let mut classes: Vec<(u64, u64)> = map.into_iter().collect();
    classes.sort_unstable();
    let labeled: u64 = classes.iter().map(|(_, c)| c).sum();
    Census {
        n,
        labeled_count: BigUint::from(labeled),
        classes,
    }
}

// ---- the DP-vs-oracle grid ---------------------------------------------------

/// Outcome of a grid run: keys compared and any disagreements found.
#[derive(Clone, Debug, Default)]
pub struct GridOutcome {
    pub keys_checked: u64,
    pub mismatches: Vec<String>,
}

/// Enumerate every in-domain counter key for (n, pi) with x + l + k at most
/// `max_size`, evaporation-time argument at most one beyond the free vertex
/// count, and all valid mask/p combinations.
pub fn grid_keys(ctx: &DpContext, max_size: u32) -> Vec<CounterKey> {
    use crate::dp::families::invariant_subsets as inv;
    let full = ctx.full_mask();
    let mut keys = Vec::new();
    let push = |ctx: &DpContext, keys: &mut Vec<CounterKey>, key: CounterKey| {
        if ctx.validate(&key).is_ok() {
            keys.push(key);
        }
    };
    for p in 1..=ctx.order() {
        let sigma = ctx.sigma_for(p);
        // a and c
        for k in 0..=max_size {
            for mk in inv(full, &sigma, 0, k as usize, crate::dp::Mask::EMPTY) {
                push(ctx, &mut keys, CounterKey::a(k, p, mk));
                push(ctx, &mut keys, CounterKey::c(k, p, mk));
            }
        }
        // g-family
        for x in 0..=max_size {
            for k in 0..=max_size - x {
                let t_hi = (k + 1).min(max_size);
                for mx in inv(full, &sigma, 0, x as usize, crate::dp::Mask::EMPTY) {
                    for mk in inv(full.minus(mx), &sigma, 0, k as usize, crate::dp::Mask::EMPTY) {
                        for t in 0..=t_hi {
                            for kind in [CounterKind::GTilde1, CounterKind::GTildeGe2] {
                                push(
                                    ctx,
                                    &mut keys,
                                    CounterKey { kind, ..CounterKey::g1(t, x, k, p, mx, mk) },
                                );
                            }
                            for z in 0..=x {
                                for mz in inv(mx, &sigma, 0, z as usize, crate::dp::Mask::EMPTY) {
                                    for kind in
                                        [CounterKind::G, CounterKind::GTilde, CounterKind::GTildeP]
                                    {
                                        push(
                                            ctx,
                                            &mut keys,
                                            CounterKey::g(kind, t, x, k, z, p, mx, mk, mz),
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        // f-family
        for x in 0..=max_size {
            for l in 1..=max_size - x {
                for k in 0..=max_size - x - l {
                    let t_hi = (x + l + k + 1).min(max_size + 1);
                    for mx in inv(full, &sigma, 0, x as usize, crate::dp::Mask::EMPTY) {
                        for ml in inv(full.minus(mx), &sigma, 0, l as usize, crate::dp::Mask::EMPTY)
                        {
                            let rest = full.minus(mx).minus(ml);
                            for mk in inv(rest, &sigma, 0, k as usize, crate::dp::Mask::EMPTY) {
                                for t in 1..=t_hi {
                                    push(
                                        ctx,
                                        &mut keys,
                                        CounterKey::f(t, x, l, k, p, mx, ml, mk),
                                    );
                                    push(
                                        ctx,
                                        &mut keys,
                                        CounterKey::ft(t, x, l, k, p, mx, ml, mk),
                                    );
                                    for z in 0..=x {
                                        for mz in
                                            inv(mx, &sigma, 0, z as usize, crate::dp::Mask::EMPTY)
                                        {
                                            push(
                                                ctx,
                                                &mut keys,
                                                CounterKey::ftpz(
                                                    t, x, l, k, z, p, mx, ml, mk, mz,
                                                ),
                                            );
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    keys.sort_unstable();
    keys.dedup();
    keys
}

/// Compare the DP against the oracle on the full in-domain grid.
pub fn counter_grid_check(n: u32, pi: &Permutation, max_size: u32) -> GridOutcome {
    let ctx = DpContext::new(n, pi.clone());
    let keys = grid_keys(&ctx, max_size);
    let compare = |key: &CounterKey| -> Option<String> {
        let dp = ctx.eval(key).expect("grid keys are valid");
        let oracle = oracle_counter(&ctx, key).expect("grid sizes are small");
        if dp != oracle {
            Some(format!("{key:?}: dp={dp} oracle={oracle}"))
        } else {
            None
        }
    };
    #[cfg(feature = "parallel")]
    let mismatches: Vec<String> = keys.par_iter().filter_map(compare).collect();
    #[cfg(not(feature = "parallel"))]
    let mismatches: Vec<String> = keys.iter().filter_map(compare).collect();
    GridOutcome {
        keys_checked: keys.len() as u64,
        mismatches,
    }
}

// ---- cycle types ------------------------------------------------------------

/// All partitions of n (as sorted-descending part lists).
pub fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn rec(n: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=max.min(n)).rev() {
            cur.push(part);
            rec(n - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Cycle types with exactly mu moved points: partitions of mu into parts
/// >= 2, padded with fixed points to n.
pub fn cycle_types_with_moved(n: u32, mu: u32) -> Vec<Vec<u32>> {
    partitions(mu)
        .into_iter()
        .filter(|p| p.iter().all(|&part| part >= 2))
        .map(|mut p| {
            p.extend(std::iter::repeat(1).take((n - mu) as usize));
            p
        })
        .collect()
}

/// A representative permutation of the given cycle type (consecutive labels).
pub fn perm_of_type(n: u32, cycle_type: &[u32]) -> Permutation {
    let mut image: Vec<u32> = (1..=n).collect();
    let mut next = 1u32;
    for &len in cycle_type {
        if len >= 2 {
            let labels: Vec<u32> = (next..next + len).collect();
            for i in 0..len as usize {
                image[(labels[i] - 1) as usize] = labels[(i + 1) % len as usize];
            }
        }
        next += len;
    }
    Permutation::from_image(image).unwrap()
}

/// Number of permutations of [n] with the given cycle type:
/// n! / prod(l^{m_l} * m_l!).
pub fn perms_of_type_count(n: u32, cycle_type: &[u32]) -> BigUint {
    let mut mult: HashMap<u32, u64> = HashMap::new();
    for &l in cycle_type {
        *mult.entry(l).or_insert(0) += 1;
    }
    let mut denom = BigUint::from(1u32);
    for (l, m) in mult {
        denom *= BigUint::from(l as u64).pow(m as u32) * factorial(m);
    }
    factorial(n as u64) / denom
}
