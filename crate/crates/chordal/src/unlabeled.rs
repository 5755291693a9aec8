//! Uniform sampling of unlabeled chordal graphs: draw mu with probability
//! B_mu / B, draw pi uniformly from R_mu, restart with exact probability
//! 1 - |R_mu| * Fix(pi) / B_mu, then sample a labeled graph with automorphism
//! pi and forget the labels. Every surviving (pi, G) pair lands with
//! probability 1/B per iteration, so automorphism classes are equiprobable.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::dp::DpContext;
use crate::error::SampleError;
use crate::graph::LabeledGraph;
use crate::math::{big_pow, count_r, div_ceil_big, factorial, pow2_ceil};
use crate::oracle;
use crate::perm::Permutation;
use crate::rng::{shuffle, uniform_below, uniform_subset, weighted_choice, DrawSource};
use crate::sample::sample_fixed;

pub const BRUTE_LIMIT: u32 = 7;

/// How the dominating weights B_mu are produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundMode {
    /// Resolve to Brute for n <= BRUTE_LIMIT, Paper beyond.
    Auto,
    /// No bounds at all: uniform over the oracle census classes.
    Brute,
    /// B_mu = |R_mu| * max over cycle types of the oracle's Fix count.
    ExactSmallN,
    /// The closed-form bounds, integerized upward; dominance is asserted at
    /// run time and violations abort the sample.
    Paper,
    /// B_mu = |R_mu| * max over cycle types of the DP count for mu up to
    /// mu_max, zero beyond; the truncation bias is reported, not hidden.
    Empirical { mu_max: u32 },
    /// Caller-supplied weights (testing).
    Injected(Vec<BigUint>),
}

impl BoundMode {
    pub fn tag(&self) -> &'static str {
        match self {
            BoundMode::Auto => "auto",
            BoundMode::Brute => "brute",
            BoundMode::ExactSmallN => "exact",
            BoundMode::Paper => "paper",
            BoundMode::Empirical { .. } => "empirical",
            BoundMode::Injected(_) => "injected",
        }
    }
}

/// The per-mu dominating weights and their sum.
#[derive(Clone, Debug)]
pub struct BoundTable {
    pub n: u32,
    pub mode: BoundMode,
    /// b[mu] for mu in 0..=n (index 1 is always zero).
    pub b: Vec<BigUint>,
    pub b_sum: BigUint,
    /// Empirical mode only: (sum of closed-form bounds beyond mu_max, B_0),
    /// the numerator and denominator of the truncation bias estimate.
    pub truncation_bias: Option<(BigUint, BigUint)>,
}

/// ceil(log2 n): the exponent upper bound used in the small-mu window test.
pub fn ceil_log2(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros() as u64
    }
}

/// Is mu inside the small-mu window 2 <= mu <= n / (200 log2 n)?
pub fn in_small_mu_window(n: u64, mu: u64) -> bool {
    mu >= 2 && mu * 200 * ceil_log2(n) <= n
}

/// Closed-form bound for the small-mu window (every real factor rounded up):
/// (ceil(B0 (9/10)^n) + 2^n 2^{2n^2/9} + n 2^{n^2/4 + n/2}) n^mu mu!.
pub fn paper_bound_small_mu(n: u64, mu: u64, b0: &BigUint) -> BigUint {
    let term1 = div_ceil_big(&(b0 * big_pow(9, n)), &big_pow(10, n));
    let term2 = (BigUint::one() << n) * pow2_ceil(Ratio::new(2 * (n * n) as i64, 9)).unwrap();
    let term3 = BigUint::from(n)
        * pow2_ceil(Ratio::new((n * n) as i64, 4) + Ratio::new(n as i64, 2)).unwrap();
    (term1 + term2 + term3) * big_pow(n, mu) * factorial(mu)
}

/// Closed-form bound valid for all mu: n^{2n+1} 2^{n^2/4 - f(mu)} n^mu mu!
/// with f(mu) = mu^2/900 - mu/10, rounded up.
pub fn paper_bound_large_mu(n: u64, mu: u64) -> BigUint {
    let exponent = Ratio::new((n * n) as i64, 4) - Ratio::new((mu * mu) as i64, 900)
        + Ratio::new(mu as i64, 10);
    big_pow(n, 2 * n + 1) * pow2_ceil(exponent).unwrap() * big_pow(n, mu) * factorial(mu)
}

/// The Lemma lower bound on the number of labeled chordal graphs:
/// ceil(2^n 2^{n^2/4} / n^2). Requires 4 | n^2 exactness only through the
/// ceiling, so any n >= 2 works.
pub fn chordal_count_lower_bound(n: u64) -> BigUint {
    let num = pow2_ceil(Ratio::new((n * n) as i64, 4)).unwrap() << n;
    div_ceil_big(&num, &big_pow(n, 2))
}

/// One row of the small-mu ratio check B_mu * n^{16 mu} <= 3 * lower(B_0).
#[derive(Clone, Debug)]
pub struct RatioCheck {
    pub mu: u64,
    pub lhs_bits: u64,
    pub rhs_bits: u64,
    pub holds: bool,
}

/// Instantiate the small-mu ratio inequality at scale, with B_0 replaced by
/// its lower bound on both sides (no DP run).
pub fn paper_ratio_check(n: u64) -> Vec<RatioCheck> {
    let b_lower = chordal_count_lower_bound(n);
    let rhs = &b_lower * BigUint::from(3u32);
    let mut out = Vec::new();
    for mu in 2..=n {
        if !in_small_mu_window(n, mu) {
            continue;
        }
        let b_mu = paper_bound_small_mu(n, mu, &b_lower);
        let lhs = &b_mu * big_pow(n, 16 * mu);
        out.push(RatioCheck {
            mu,
            lhs_bits: lhs.bits(),
            rhs_bits: rhs.bits(),
            holds: lhs <= rhs,
        });
    }
    out
}

/// Build the bound table for the requested mode. `Auto` resolves here.
pub fn build_bounds(n: u32, mode: BoundMode) -> Result<BoundTable, SampleError> {
    let mode = match mode {
        BoundMode::Auto => {
            if n <= BRUTE_LIMIT {
                BoundMode::Brute
            } else {
                BoundMode::Paper
            }
        }
        m => m,
    };
    let mut b = vec![BigUint::zero(); n as usize + 1];
    let mut truncation_bias = None;
    match &mode {
        BoundMode::Auto => unreachable!(),
        BoundMode::Brute => {
            if n > BRUTE_LIMIT {
                return Err(SampleError::TooLarge { n: n as usize, limit: BRUTE_LIMIT as usize });
            }
            // no table needed; leave zeros
        }
        BoundMode::ExactSmallN => {
            if n as usize > oracle::ENUM_LIMIT {
                return Err(SampleError::TooLarge { n: n as usize, limit: oracle::ENUM_LIMIT });
            }
            for mu in std::iter::once(0).chain(2..=n) {
                let max_fix = oracle::cycle_types_with_moved(n, mu)
                    .into_iter()
                    .map(|t| oracle::oracle_fix(n as usize, &oracle::perm_of_type(n, &t)).unwrap())
                    .max()
                    .unwrap_or_else(BigUint::zero);
                b[mu as usize] = count_r(n as u64, mu as u64).unwrap() * max_fix;
            }
        }
        BoundMode::Paper => {
            let id_ctx = DpContext::new(n, Permutation::identity(n));
            let b0 = id_ctx.count_fixed();
            b[0] = b0.clone();
            for mu in 2..=n as u64 {
                b[mu as usize] = if in_small_mu_window(n as u64, mu) {
                    paper_bound_small_mu(n as u64, mu, &b0)
                } else {
                    paper_bound_large_mu(n as u64, mu)
                };
            }
        }
        BoundMode::Empirical { mu_max } => {
            let id_ctx = DpContext::new(n, Permutation::identity(n));
            let b0 = id_ctx.count_fixed();
            b[0] = b0.clone();
            let mut tail = BigUint::zero();
            for mu in 2..=n {
                if mu <= *mu_max {
                    let max_count = oracle::cycle_types_with_moved(n, mu)
                        .into_iter()
                        .map(|t| {
                            let pi = oracle::perm_of_type(n, &t);
                            DpContext::new(n, pi).count_fixed()
                        })
                        .max()
                        .unwrap_or_else(BigUint::zero);
                    b[mu as usize] = count_r(n as u64, mu as u64).unwrap() * max_count;
                } else {
                    tail += paper_bound_large_mu(n as u64, mu as u64);
                }
            }
            truncation_bias = Some((tail, b0));
        }
        BoundMode::Injected(values) => {
            if values.len() != n as usize + 1 {
                return Err(SampleError::TooLarge { n: values.len(), limit: n as usize + 1 });
            }
            b = values.clone();
        }
    }
    let b_sum = b.iter().sum();
    Ok(BoundTable {
        n,
        mode,
        b,
        b_sum,
        truncation_bias,
    })
}

impl BoundTable {
    /// The truncation bias as a short decimal string, empirical mode only.
    pub fn bias_display(&self) -> Option<String> {
        let (num, den) = self.truncation_bias.as_ref()?;
        Some(ratio_decimal(num, den, 3))
    }
}

/// Render num/den with `sig` significant decimal digits (for diagnostics
/// only; nothing downstream consumes this). Ratios whose magnitude escapes
/// f64 are shown as a power of two.
pub fn ratio_decimal(num: &BigUint, den: &BigUint, sig: usize) -> String {
    if den.is_zero() {
        return "inf".into();
    }
    if num.is_zero() {
        return "0".into();
    }
    // normalized mantissa in [1/2, 1) from the top 64 bits of each side,
    // remaining magnitude in the bit-length difference
    let frac = |v: &BigUint| -> f64 {
        let b = v.bits();
        let r = if b > 64 { v >> (b - 64) } else { v.clone() };
        r.to_f64().unwrap() / 2f64.powi(b.min(64) as i32)
    };
    let exp2 = num.bits() as i64 - den.bits() as i64;
    let mantissa = frac(num) / frac(den); // in (1/2, 2)
    if exp2.abs() < 900 {
        let value = mantissa * 2f64.powi(exp2 as i32);
        format!("{:.*e}", sig.saturating_sub(1), value)
    } else {
        let log10 = (mantissa.log2() + exp2 as f64) * std::f64::consts::LOG10_2;
        format!("~10^{n}", n = log10.round() as i64)
    }
}

/// One unlabeled sample with its provenance.
#[derive(Clone, Debug)]
pub struct UnlabeledSample {
    /// An arbitrary labeled representative; the labels carry no meaning.
    pub graph: LabeledGraph,
    pub iterations: u64,
    pub mu_used: Option<u32>,
    pub pi_used: Option<Permutation>,
    pub mode: &'static str,
}

/// Uniform element of R_mu: a uniform mu-subset of [n] as support carrying a
/// uniform derangement, found by rejection.
pub fn sample_perm(n: u32, mu: u32, rng: &mut dyn DrawSource) -> Result<Permutation, SampleError> {
    if mu == 1 {
        return Err(SampleError::Math(crate::error::MathError::MuOne));
    }
    if mu == 0 {
        return Ok(Permutation::identity(n));
    }
    let all: Vec<u32> = (1..=n).collect();
    let support = uniform_subset(&all, mu as usize, rng);
    loop {
        let mut images = support.clone();
        shuffle(&mut images, rng);
        if support.iter().zip(&images).all(|(a, b)| a != b) {
            let mut image: Vec<u32> = (1..=n).collect();
            for (a, b) in support.iter().zip(&images) {
                image[(*a - 1) as usize] = *b;
            }
            return Ok(Permutation::from_image(image).unwrap());
        }
    }
}

/// A sampling session: the bound table plus a cache of DP contexts, one per
/// distinct permutation encountered.
pub struct UnlabeledSampler {
    pub bounds: BoundTable,
    ctxs: Mutex<HashMap<Vec<u32>, Arc<DpContext>>>,
    census: Option<oracle::Census>,
}

impl UnlabeledSampler {
    pub fn new(n: u32, mode: BoundMode) -> Result<Self, SampleError> {
        let bounds = build_bounds(n, mode)?;
        let census = if bounds.mode == BoundMode::Brute {
            Some(oracle::census(n as usize).map_err(|e| match e {
                crate::error::OracleError::TooLarge { n, limit } => {
                    SampleError::TooLarge { n, limit }
                }
            })?)
        } else {
            None
        };
        Ok(UnlabeledSampler {
            bounds,
            ctxs: Mutex::new(HashMap::new()),
            census: census,
        })
    }

    pub fn n(&self) -> u32 {
        self.bounds.n
    }

    fn ctx_for(&self, pi: &Permutation) -> Arc<DpContext> {
        let key: Vec<u32> = (1..=self.n()).map(|v| pi.apply(v)).collect();
        let mut cache = self.ctxs.lock().unwrap();
        cache
            .entry(key)
            .or_insert_with(|| Arc::new(DpContext::new(self.n(), pi.clone())))
            .clone()
    }

    /// One uniform unlabeled chordal graph on [n].
    pub fn sample(&self, rng: &mut dyn DrawSource) -> Result<UnlabeledSample, SampleError> {
        if self.bounds.mode == BoundMode::Brute {
            return self.brute_sample(rng);
        }
        let n = self.n();
        let mut iterations = 0u64;
        loop {
            iterations += 1;
            let mu = weighted_choice(&self.bounds.b, rng)? as u32;
            let pi = sample_perm(n, mu, rng)?;
            let ctx = self.ctx_for(&pi);
            let count = ctx.count_fixed();
            let threshold = count_r(n as u64, mu as u64).unwrap() * &count;
            let b_mu = &self.bounds.b[mu as usize];
            if &threshold > b_mu {
                return Err(SampleError::BoundViolation { mu: mu as usize });
            }
            let draw = uniform_below(b_mu, rng)?;
            if draw < threshold {
                let graph = sample_fixed(&ctx, rng)?;
                debug_assert!(crate::graph::is_automorphism(&graph, &pi).unwrap());
                return Ok(UnlabeledSample {
                    graph,
                    iterations,
                    mu_used: Some(mu),
                    pi_used: Some(pi),
                    mode: self.bounds.mode.tag(),
                });
            }
        }
    }

    /// Brute-force path: uniform over the census classes.
    fn brute_sample(&self, rng: &mut dyn DrawSource) -> Result<UnlabeledSample, SampleError> {
        let census = self.census.as_ref().expect("brute mode builds the census");
        let idx = uniform_below(&BigUint::from(census.class_count()), rng)?
            .to_usize()
            .unwrap();
        Ok(UnlabeledSample {
            graph: census.representative(idx),
            iterations: 1,
            mu_used: None,
            pi_used: None,
            mode: "brute",
        })
    }

    /// Deterministic batch: sample i draws from the stream (seed, i).
    pub fn sample_many(
        &self,
        seed: u64,
        count: usize,
    ) -> Result<Vec<UnlabeledSample>, SampleError> {
        let one = |i: usize| {
            let mut rng = crate::rng::RandomStream::with_stream(seed, i as u64);
            self.sample(&mut rng)
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(one).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..count).map(one).collect()
        }
    }
}

/// Uniform unlabeled chordal graph by full enumeration (n small).
pub fn brute_sample_unlabeled(
    n: u32,
    rng: &mut dyn DrawSource,
) -> Result<UnlabeledSample, SampleError> {
    let sampler = UnlabeledSampler::new(n, BoundMode::Brute)?;
    sampler.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    #[test]
    fn window_threshold() {
        // ceil(log2 8192) = 13, so the window at n = 8192 is mu in {2, 3}.
        assert_eq!(ceil_log2(8192), 13);
        assert!(in_small_mu_window(8192, 2));
        assert!(in_small_mu_window(8192, 3));
        assert!(!in_small_mu_window(8192, 4));
        // tiny n: empty window
        assert!(!in_small_mu_window(4, 2));
    }

    #[test]
    fn paper_bound_large_mu_example() {
        // n = 4, mu = 2: 4^9 * 2^5 * 4^2 * 2
        let b = paper_bound_large_mu(4, 2);
        assert_eq!(b, BigUint::from(268435456u64));
    }

    #[test]
    fn exact_bounds_small() {
        let t = build_bounds(3, BoundMode::ExactSmallN).unwrap();
        // B_0 = 8; B_2 = |R_2| * Fix((1 2)) = 3 * 4 = 12; B_3 = 2 * Fix((1 2 3))
        assert_eq!(t.b[0], BigUint::from(8u32));
        assert_eq!(t.b[1], BigUint::zero());
        assert_eq!(t.b[2], BigUint::from(12u32));
        let fix123 = oracle::oracle_fix(3, &Permutation::parse("(1 2 3)", 3).unwrap()).unwrap();
        assert_eq!(t.b[3], BigUint::from(2u32) * fix123);
    }

    #[test]
    fn sample_perm_unique_derangement() {
        let mut rng = RandomStream::new(1);
        for _ in 0..20 {
            let p = sample_perm(2, 2, &mut rng).unwrap();
            assert_eq!(p.cycle_string(), "(1 2)");
        }
        assert!(sample_perm(4, 1, &mut rng).is_err());
        assert!(sample_perm(4, 0, &mut rng).unwrap().is_identity());
    }

    #[test]
    fn sample_perm_uniform_over_transpositions() {
        let mut rng = RandomStream::new(77);
        let mut counts = std::collections::HashMap::new();
        for _ in 0..6000 {
            let p = sample_perm(4, 2, &mut rng).unwrap();
            *counts.entry(p.cycle_string()).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 6);
        let obs: Vec<u64> = counts.values().copied().collect();
        assert!(crate::stats::uniform_fit_pvalue(&obs) > 0.001);
    }

    #[test]
    fn n1_single_vertex() {
        let mut rng = RandomStream::new(3);
        let s = brute_sample_unlabeled(1, &mut rng).unwrap();
        assert_eq!(s.graph.len(), 1);
        assert_eq!(s.iterations, 1);
        let sampler = UnlabeledSampler::new(1, BoundMode::ExactSmallN).unwrap();
        let s = sampler.sample(&mut rng).unwrap();
        assert_eq!(s.graph.len(), 1);
        assert_eq!(s.mu_used, Some(0));
    }

    #[test]
    fn brute_uniform_over_classes() {
        let mut rng = RandomStream::new(5);
        let mut counts = std::collections::HashMap::new();
        for _ in 0..8000 {
            let s = brute_sample_unlabeled(3, &mut rng).unwrap();
            let canon = oracle::canonical_bits(&s.graph).unwrap();
            *counts.entry(canon).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 4);
        let obs: Vec<u64> = counts.values().copied().collect();
        assert!(crate::stats::uniform_fit_pvalue(&obs) > 0.001);
    }

    #[test]
    fn injected_all_mass_on_zero_matches_fixed_sampler() {
        // with all mass on mu = 0 the loop always accepts the identity
        let n = 4u32;
        let id_count = DpContext::new(n, Permutation::identity(n)).count_fixed();
        let mut b = vec![BigUint::zero(); n as usize + 1];
        b[0] = id_count;
        let sampler = UnlabeledSampler::new(n, BoundMode::Injected(b)).unwrap();
        let mut rng = RandomStream::new(9);
        let s = sampler.sample(&mut rng).unwrap();
        assert_eq!(s.mu_used, Some(0));
        assert_eq!(s.iterations, 1);
        assert!(s.graph.is_chordal());
    }

    #[test]
    fn bound_violation_detected() {
        // inject a bound that is too small for mu = 0
        let n = 3u32;
        let mut b = vec![BigUint::zero(); 4];
        b[0] = BigUint::from(3u32); // true count is 8
        let sampler = UnlabeledSampler::new(n, BoundMode::Injected(b)).unwrap();
        let mut rng = RandomStream::new(2);
        match sampler.sample(&mut rng) {
            Err(SampleError::BoundViolation { mu: 0 }) => {}
            other => panic!("expected BoundViolation, got {other:?}"),
        }
    }
}
