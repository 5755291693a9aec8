//! Deterministic vertex layouts for counter keys.
//!
//! Moved labels appear verbatim; the remaining slots are filled with the
//! smallest natural numbers outside M_pi, allocated to X, then L, then the
//! rest, in that order. Z takes a prefix of X's unmoved part. Labels may
//! exceed n: the layout lives in the naturals, and pi fixes everything
//! past n.

use super::key::{CounterKey, CounterKind};
use crate::dp::DpContext;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    /// Whole vertex set, sorted.
    pub v: Vec<u32>,
    /// Exception set X_args (empty for A/C kinds).
    pub x: Vec<u32>,
    /// Last-layer set L_args (f-family only).
    pub l: Vec<u32>,
    /// Everything else: V \ (X ∪ L).
    pub rest: Vec<u32>,
    /// Z_args ⊆ X_args (z-carrying kinds only).
    pub z: Vec<u32>,
}

impl DpContext {
    /// First `count` naturals outside M_pi, skipping the first `skip` of them.
    pub(crate) fn unmoved_naturals(&self, skip: usize, count: usize) -> Vec<u32> {
        (1u32..)
            .filter(|v| !self.is_moved_label(*v))
            .skip(skip)
            .take(count)
            .collect()
    }

    /// The vertex layout of a counter key (Definition-driven; see module doc).
    pub fn layout(&self, key: &CounterKey) -> Layout {
        let mx = key.mx.len() as usize;
        let ml = key.ml.len() as usize;
        let mk = key.mk.len() as usize;
        let mz = key.mz.len() as usize;
        let (x, l, k, z) = (key.x as usize, key.l as usize, key.k as usize, key.z as usize);
        match key.kind {
            CounterKind::A | CounterKind::C => {
                let mut v = self.unmoved_naturals(0, k - mk);
                v.extend(self.mask_labels(key.mk));
                v.sort_unstable();
                Layout {
                    rest: v.clone(),
                    v,
                    x: vec![],
                    l: vec![],
                    z: vec![],
                }
            }
            _ => {
                let vx = self.unmoved_naturals(0, x - mx);
                let vl = if key.kind.is_f_family() {
                    self.unmoved_naturals(x - mx, l - ml)
                } else {
                    vec![]
                };
                let vk = self.unmoved_naturals(x - mx + vl.len(), k - mk);

                let mut xs: Vec<u32> = vx.clone();
                xs.extend(self.mask_labels(key.mx));
                xs.sort_unstable();

                let mut ls: Vec<u32> = vl;
                ls.extend(self.mask_labels(key.ml));
                ls.sort_unstable();

                let mut rest: Vec<u32> = vk;
                rest.extend(self.mask_labels(key.mk));
                rest.sort_unstable();

                let zs = if key.kind.has_z() {
                    let mut zs: Vec<u32> = vx[..z - mz].to_vec();
                    zs.extend(self.mask_labels(key.mz));
                    zs.sort_unstable();
                    zs
                } else {
                    vec![]
                };

                let mut v: Vec<u32> = xs.iter().chain(&ls).chain(&rest).copied().collect();
                v.sort_unstable();
                Layout {
                    v,
                    x: xs,
                    l: ls,
                    rest,
                    z: zs,
                }
            }
        }
    }

    /// Smallest label of V \ X (g-kinds, A, C) or V \ (X ∪ L) (f-kinds);
    /// None when that set is empty.
    pub fn smallest_free_label(&self, key: &CounterKey) -> Option<u32> {
        let lay = self.layout(key);
        lay.rest.first().copied()
    }
}
