//! Permutations of [n] with cycle structure, powers, and the moved-point set.

use crate::error::PermError;
use std::fmt;

/// A permutation of [n] = {1, ..., n}. Labels larger than n are treated as
/// fixed points everywhere, which lets a permutation act on vertex sets that
/// extend past [n].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    n: u32,
    /// image[i] is the image of label i+1, stored as a 1-based label.
    image: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: u32) -> Self {
        Permutation {
            n,
            image: (1..=n).collect(),
        }
    }

    /// Build from a 1-based image list; `image[i]` is where label `i+1` goes.
    pub fn from_image(image: Vec<u32>) -> Result<Self, PermError> {
        let n = image.len() as u32;
        let mut seen = vec![false; n as usize];
        for &v in &image {
            if v == 0 || v > n {
                return Err(PermError::NotBijection);
            }
            if seen[(v - 1) as usize] {
                return Err(PermError::NotBijection);
            }
            seen[(v - 1) as usize] = true;
        }
        Ok(Permutation { n, image })
    }

    /// Parse either an image list "2,1,3" or cycle notation "(1 2)(3 4 5)".
    /// Cycle form needs `n` to know how many fixed points to add.
    pub fn parse(s: &str, n: u32) -> Result<Self, PermError> {
        let s = s.trim();
        if s.is_empty() || s == "id" {
            return Ok(Self::identity(n));
        }
        if s.starts_with('(') {
            Self::from_cycles(s, n)
        } else {
            let image: Result<Vec<u32>, _> = s
                .split(',')
                .map(|t| t.trim().parse::<u32>().map_err(|e| PermError::BadSyntax(e.to_string())))
                .collect();
            let image = image?;
            if image.len() as u32 != n {
                return Err(PermError::BadSyntax(format!(
                    "image list has {} entries, expected {}",
                    image.len(),
                    n
                )));
            }
            Self::from_image(image)
        }
    }

    /// Parse cycle notation "(1 2)(3 4 5)"; fixed points omitted.
    pub fn from_cycles(s: &str, n: u32) -> Result<Self, PermError> {
        let mut image: Vec<u32> = (1..=n).collect();
        let mut assigned = vec![false; n as usize];
        let s = s.trim();
        let mut rest = s;
        while !rest.is_empty() {
            let open = rest
                .find('(')
                .ok_or_else(|| PermError::BadSyntax(format!("expected '(' in {rest:?}")))?;
            if rest[..open].trim() != "" {
                return Err(PermError::BadSyntax(format!("junk before cycle: {rest:?}")));
            }
            let close = rest
                .find(')')
                .ok_or_else(|| PermError::BadSyntax("unclosed cycle".into()))?;
            let body = &rest[open + 1..close];
            let labels: Result<Vec<u32>, _> = body
                .split(|c: char| c == ' ' || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<u32>().map_err(|e| PermError::BadSyntax(e.to_string())))
                .collect();
            let labels = labels?;
            if labels.is_empty() {
                return Err(PermError::BadSyntax("empty cycle".into()));
            }
            for &v in &labels {
                if v == 0 || v > n {
                    return Err(PermError::OutOfRange(v, n));
                }
                if assigned[(v - 1) as usize] {
                    return Err(PermError::BadSyntax(format!("label {v} appears twice")));
                }
                assigned[(v - 1) as usize] = true;
            }
            for i in 0..labels.len() {
                let from = labels[i];
                let to = labels[(i + 1) % labels.len()];
                image[(from - 1) as usize] = to;
            }
            rest = &rest[close + 1..];
        }
        Self::from_image(image)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Image of a label; labels beyond n are fixed.
    #[inline]
    pub fn apply(&self, v: u32) -> u32 {
        if v >= 1 && v <= self.n {
            self.image[(v - 1) as usize]
        } else {
            v
        }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| v == i as u32 + 1)
    }

    /// Moved points M_pi, sorted.
    pub fn moved_points(&self) -> Vec<u32> {
        (1..=self.n).filter(|&v| self.apply(v) != v).collect()
    }

    /// Cycle decomposition, fixed points omitted; each cycle starts at its
    /// smallest label, cycles sorted by that label.
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut seen = vec![false; self.n as usize];
        for start in 1..=self.n {
            if seen[(start - 1) as usize] || self.apply(start) == start {
                continue;
            }
            let mut cyc = vec![start];
            seen[(start - 1) as usize] = true;
            let mut v = self.apply(start);
            while v != start {
                seen[(v - 1) as usize] = true;
                cyc.push(v);
                v = self.apply(v);
            }
            out.push(cyc);
        }
        out
    }

    /// Multiset of cycle lengths including fixed points, sorted descending.
    pub fn cycle_type(&self) -> Vec<u32> {
        let mut lens: Vec<u32> = self.cycles().iter().map(|c| c.len() as u32).collect();
        let fixed = self.n as usize - lens.iter().sum::<u32>() as usize;
        lens.extend(std::iter::repeat(1).take(fixed));
        lens.sort_unstable_by(|a, b| b.cmp(a));
        lens
    }

    /// Order of the permutation (lcm of cycle lengths).
    pub fn order(&self) -> u64 {
        self.cycles()
            .iter()
            .map(|c| c.len() as u64)
            .fold(1u64, num_integer::lcm)
    }

    pub fn compose(&self, other: &Permutation) -> Permutation {
        // (self ∘ other)(v) = self(other(v))
        assert_eq!(self.n, other.n);
        Permutation {
            n: self.n,
            image: (1..=self.n).map(|v| self.apply(other.apply(v))).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0u32; self.n as usize];
        for v in 1..=self.n {
            image[(self.apply(v) - 1) as usize] = v;
        }
        Permutation { n: self.n, image }
    }

    /// pi^p for p >= 0 (p reduced modulo the order).
    pub fn power(&self, p: u64) -> Permutation {
        let ord = self.order();
        let mut e = p % ord;
        let mut result = Permutation::identity(self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = base.compose(&result);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        result
    }

    /// Image list rendering "2,1,3" (1-based).
    pub fn image_list(&self) -> String {
        self.image
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Cycle rendering "(1 2)(3 4 5)"; "id" for the identity.
    pub fn cycle_string(&self) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "id".to_string();
        }
        cycles
            .iter()
            .map(|c| {
                format!(
                    "({})",
                    c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
                )
            })
            .collect::<String>()
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({})", self.cycle_string())
    }
}

/// Period of `i` with respect to (C, sigma): the smallest j >= 1 such that
/// sigma^j(i) lies in C.
pub fn period(i: u32, c: &[u32], sigma: &Permutation) -> Result<u64, crate::error::GraphError> {
    if !c.contains(&i) {
        return Err(crate::error::GraphError::NotInSet(i));
    }
    let mut v = sigma.apply(i);
    let mut j = 1u64;
    while !c.contains(&v) {
        v = sigma.apply(v);
        j += 1;
    }
    Ok(j)
}

/// Cycles of sigma^p restricted to S. S must be invariant under sigma^p.
pub fn cycles_restricted(
    sigma: &Permutation,
    p: u64,
    s: &[u32],
) -> Result<Vec<Vec<u32>>, crate::error::GraphError> {
    let sp = sigma.power(p);
    for &v in s {
        if !s.contains(&sp.apply(v)) {
            return Err(crate::error::GraphError::NotInvariant);
        }
    }
    let mut out = Vec::new();
    let mut seen: Vec<u32> = Vec::new();
    for &start in s {
        if seen.contains(&start) {
            continue;
        }
        let mut cyc = vec![start];
        seen.push(start);
        let mut v = sp.apply(start);
        while v != start {
            cyc.push(v);
            seen.push(v);
            v = sp.apply(v);
        }
        out.push(cyc);
    }
    Ok(out)
}
