//! Enumeration of the set families appearing in the recurrences: invariant
//! subsets (the P/I/J families) and orbit components (the Q families).
//!
//! Everything here works on masks over the fixed ordering of M_pi, with a
//! permutation of mask indices standing in for pi^p. Families are produced
//! by filtering submasks; mu is small, so 2^mu enumeration is the plan of
//! record rather than anything cleverer.

use super::key::Mask;

/// A permutation of M_pi's index space (the action of some power of pi on
/// the moved points).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxPerm(pub Vec<u8>);

impl IdxPerm {
    pub fn identity(mu: usize) -> Self {
        IdxPerm((0..mu as u8).collect())
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn map_mask(&self, m: Mask) -> Mask {
        let mut out = Mask::EMPTY;
        for b in m.bits() {
            out = out.with(self.apply(b));
        }
        out
    }

    pub fn is_invariant(&self, m: Mask) -> bool {
        self.map_mask(m) == m
    }

    pub fn compose(&self, other: &IdxPerm) -> IdxPerm {
        IdxPerm(other.0.iter().map(|&i| self.0[i as usize]).collect())
    }
}

/// All submasks of `container` that are unions of sigma-cycles, have size in
/// `lo..=hi`, and contain every bit of `required`.
pub fn invariant_subsets(
    container: Mask,
    sigma: &IdxPerm,
    lo: usize,
    hi: usize,
    required: Mask,
) -> Vec<Mask> {
    let mut out = Vec::new();
    let mut m = container.0;
    loop {
        let cand = Mask(m);
        let sz = cand.len() as usize;
        if sz >= lo && sz <= hi && required.subset_of(cand) && sigma.is_invariant(cand) {
            out.push(cand);
        }
        if m == 0 {
            break;
        }
        m = (m - 1) & container.0;
    }
    out.sort_unstable();
    out
}

/// An orbit component candidate: a set C whose elements all have the same
/// period p_c >= 2 with respect to (C, sigma), together with the closure
/// C ∪ sigma(C) ∪ ... ∪ sigma^{p_c - 1}(C).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrbitComponent {
    pub c: Mask,
    pub p_c: u64,
    pub closure: Mask,
}

/// Period of index `i` with respect to (C, sigma): smallest j >= 1 with
/// sigma^j(i) in C ("in C" tested on the mask).
fn period_idx(i: usize, c: Mask, sigma: &IdxPerm) -> u64 {
    let mut v = sigma.apply(i);
    let mut j = 1u64;
    while !c.contains(v) {
        v = sigma.apply(v);
        j += 1;
        debug_assert!(j <= 64, "period exceeds any possible order");
    }
    j
}

/// All C ⊆ container containing `s_bit` whose elements share a period
/// p_c >= 2 with respect to (C, sigma). The shifts sigma^j(C) are then
/// automatically pairwise disjoint, and the closure is their union.
pub fn orbit_components(container: Mask, sigma: &IdxPerm, s_bit: usize) -> Vec<OrbitComponent> {
    let mut out = Vec::new();
    if !container.contains(s_bit) {
        return out;
    }
    let others = container.minus(Mask::EMPTY.with(s_bit));
    let mut m = others.0;
    loop {
        let c = Mask(m).with(s_bit);
        let mut per = None;
        let mut uniform = true;
        for b in c.bits() {
            let p = period_idx(b, c, sigma);
            match per {
                None => per = Some(p),
                Some(q) if q != p => {
                    uniform = false;
                    break;
                }
                _ => {}
            }
        }
        let p_c = per.expect("c is nonempty");
        if uniform && p_c >= 2 {
            let mut closure = c;
            let mut shifted = c;
            for _ in 1..p_c {
                shifted = sigma.map_mask(shifted);
                debug_assert!(closure.disjoint(shifted));
                closure = closure.union(shifted);
            }
            out.push(OrbitComponent { c, p_c, closure });
        }
        if m == 0 {
            break;
        }
        m = (m - 1) & others.0;
    }
    out.sort_unstable_by_key(|oc| (oc.c, oc.p_c));
    out
}
