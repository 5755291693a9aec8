//! Counter-function keys: the memo-table index space.

use std::fmt;

/// A subset of the moved points M_pi, as a bitmask over the fixed sorted
/// ordering of M_pi.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Mask(pub u64);

impl Mask {
    pub const EMPTY: Mask = Mask(0);

    #[inline]
    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, bit: usize) -> bool {
        self.0 >> bit & 1 == 1
    }

    #[inline]
    pub fn with(self, bit: usize) -> Mask {
        Mask(self.0 | 1 << bit)
    }

    #[inline]
    pub fn union(self, other: Mask) -> Mask {
        Mask(self.0 | other.0)
    }

    #[inline]
    pub fn minus(self, other: Mask) -> Mask {
        Mask(self.0 & !other.0)
    }

    #[inline]
    pub fn intersect(self, other: Mask) -> Mask {
        Mask(self.0 & other.0)
    }

    #[inline]
    pub fn subset_of(self, other: Mask) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn disjoint(self, other: Mask) -> bool {
        self.0 & other.0 == 0
    }

    pub fn bits(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&b| self.contains(b))
    }
}

impl fmt::Debug for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mask({:b})", self.0)
    }
}

/// The ten counter-function kinds.
///
/// `A` and `C` count all (resp. connected) chordal graphs on V_{k,M}. The
/// g-family counts graphs with an exception clique X; the f-family
/// additionally tracks the last evaporation layer L. `FTildePZ` carries the
/// connectivity-relaxation argument z; the z-less variant is the z = x
/// special case and is not a separate kind.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum CounterKind {
    A,
    C,
    G,
    GTilde,
    GTildeP,
    GTilde1,
    GTildeGe2,
    F,
    FTilde,
    FTildePZ,
}

impl CounterKind {
    pub fn tag(self) -> &'static str {
        match self {
            CounterKind::A => "A",
            CounterKind::C => "C",
            CounterKind::G => "G",
            CounterKind::GTilde => "GT",
            CounterKind::GTildeP => "GTP",
            CounterKind::GTilde1 => "GT1",
            CounterKind::GTildeGe2 => "GTGE2",
            CounterKind::F => "F",
            CounterKind::FTilde => "FT",
            CounterKind::FTildePZ => "FTPZ",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        Some(match s {
            "A" => CounterKind::A,
            "C" => CounterKind::C,
            "G" => CounterKind::G,
            "GT" => CounterKind::GTilde,
            "GTP" => CounterKind::GTildeP,
            "GT1" => CounterKind::GTilde1,
            "GTGE2" => CounterKind::GTildeGe2,
            "F" => CounterKind::F,
            "FT" => CounterKind::FTilde,
            "FTPZ" => CounterKind::FTildePZ,
            _ => return None,
        })
    }

    /// Does the vertex layout carry an L part?
    pub fn is_f_family(self) -> bool {
        matches!(
            self,
            CounterKind::F | CounterKind::FTilde | CounterKind::FTildePZ
        )
    }

    pub fn has_z(self) -> bool {
        matches!(
            self,
            CounterKind::G | CounterKind::GTilde | CounterKind::GTildeP | CounterKind::FTildePZ
        )
    }

    pub const ALL: [CounterKind; 10] = [
        CounterKind::A,
        CounterKind::C,
        CounterKind::G,
        CounterKind::GTilde,
        CounterKind::GTildeP,
        CounterKind::GTilde1,
        CounterKind::GTildeGe2,
        CounterKind::F,
        CounterKind::FTilde,
        CounterKind::FTildePZ,
    ];
}

/// One counter-function evaluation: the memo-table key. Unused integer
/// fields are zero and unused masks empty. `p` is stored in canonical form
/// (reduced modulo the order of pi, with multiples of the order mapped to
/// the order itself).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CounterKey {
    pub kind: CounterKind,
    pub t: u32,
    pub x: u32,
    pub l: u32,
    pub k: u32,
    pub z: u32,
    pub p: u64,
    pub mx: Mask,
    pub ml: Mask,
    pub mk: Mask,
    pub mz: Mask,
}

impl CounterKey {
    pub fn a(k: u32, p: u64, m: Mask) -> Self {
        CounterKey {
            kind: CounterKind::A,
            t: 0,
            x: 0,
            l: 0,
            k,
            z: 0,
            p,
            mx: Mask::EMPTY,
            ml: Mask::EMPTY,
            mk: m,
            mz: Mask::EMPTY,
        }
    }

    pub fn c(k: u32, p: u64, m: Mask) -> Self {
        CounterKey {
            kind: CounterKind::C,
            ..Self::a(k, p, m)
        }
    }

    pub fn g(kind: CounterKind, t: u32, x: u32, k: u32, z: u32, p: u64, mx: Mask, mk: Mask, mz: Mask) -> Self {
        debug_assert!(matches!(
            kind,
            CounterKind::G | CounterKind::GTilde | CounterKind::GTildeP
        ));
        CounterKey {
            kind,
            t,
            x,
            l: 0,
            k,
            z,
            p,
            mx,
            ml: Mask::EMPTY,
            mk,
            mz,
        }
    }

    pub fn g1(t: u32, x: u32, k: u32, p: u64, mx: Mask, mk: Mask) -> Self {
        CounterKey {
            kind: CounterKind::GTilde1,
            t,
            x,
            l: 0,
            k,
            z: 0,
            p,
            mx,
            ml: Mask::EMPTY,
            mk,
            mz: Mask::EMPTY,
        }
    }

    pub fn ge2(t: u32, x: u32, k: u32, p: u64, mx: Mask, mk: Mask) -> Self {
        CounterKey {
            kind: CounterKind::GTildeGe2,
            ..Self::g1(t, x, k, p, mx, mk)
        }
    }

    pub fn f(t: u32, x: u32, l: u32, k: u32, p: u64, mx: Mask, ml: Mask, mk: Mask) -> Self {
        CounterKey {
            kind: CounterKind::F,
            t,
            x,
            l,
            k,
            z: 0,
            p,
            mx,
            ml,
            mk,
            mz: Mask::EMPTY,
        }
    }

    pub fn ft(t: u32, x: u32, l: u32, k: u32, p: u64, mx: Mask, ml: Mask, mk: Mask) -> Self {
        CounterKey {
            kind: CounterKind::FTilde,
            ..Self::f(t, x, l, k, p, mx, ml, mk)
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn ftpz(
        t: u32,
        x: u32,
        l: u32,
        k: u32,
        z: u32,
        p: u64,
        mx: Mask,
        ml: Mask,
        mk: Mask,
        mz: Mask,
    ) -> Self {
        CounterKey {
            kind: CounterKind::FTildePZ,
            t,
            x,
            l,
            k,
            z,
            p,
            mx,
            ml,
            mk,
            mz,
        }
    }
}

impl fmt::Debug for CounterKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(t={},x={},l={},k={},z={} | p={}, mx={:b}, ml={:b}, mk={:b}, mz={:b})",
            self.kind.tag(),
            self.t,
            self.x,
            self.l,
            self.k,
            self.z,
            self.p,
            self.mx.0,
            self.ml.0,
            self.mk.0,
            self.mz.0
        )
    }
}
