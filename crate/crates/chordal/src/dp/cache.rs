//! Memo-table persistence.
//!
//! Format: a header line `CHORDAL-MEMO 1 n=<n> perm=<image-list>` followed by
//! one line per entry: `<kind> <t> <x> <l> <k> <z> <p> <maskX> <maskL>
//! <maskK> <maskZ> <value-hex>`. A table loads only when the header matches
//! the session's (n, pi) exactly.

use std::io::{BufRead, BufReader, Read, Write};

use num_bigint::BigUint;
use num_traits::Num;

use super::ctx::DpContext;
use super::key::{CounterKey, CounterKind, Mask};
use crate::error::CacheError;

fn header(ctx: &DpContext) -> String {
    format!("CHORDAL-MEMO 1 n={} perm={}", ctx.n(), ctx.pi().image_list())
}

pub fn save_memo(ctx: &DpContext, w: &mut dyn Write) -> Result<(), CacheError> {
    writeln!(w, "{}", header(ctx))?;
    for (key, value) in ctx.memo_snapshot() {
        writeln!(
            w,
            "{} {} {} {} {} {} {} {} {} {} {} {}",
            key.kind.tag(),
            key.t,
            key.x,
            key.l,
            key.k,
            key.z,
            key.p,
            key.mx.0,
            key.ml.0,
            key.mk.0,
            key.mz.0,
            value.to_str_radix(16),
        )?;
    }
    Ok(())
}

pub fn load_memo(ctx: &DpContext, r: &mut dyn Read) -> Result<usize, CacheError> {
    let mut reader = BufReader::new(r);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let found = first.trim_end().to_string();
    let expected = header(ctx);
    if found != expected {
        return Err(CacheError::Mismatch { expected, found });
    }
    let mut entries = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let bad = || CacheError::Malformed(format!("line {}", lineno + 2));
        let kind = CounterKind::from_tag(it.next().ok_or_else(bad)?).ok_or_else(bad)?;
        let mut nums = [0u64; 11];
        for slot in nums.iter_mut().skip(1) {
            *slot = it
                .next()
                .ok_or_else(bad)?
                .parse::<u64>()
                .map_err(|_| bad())?;
        }
        let value_hex = it.next().ok_or_else(bad)?;
        if it.next().is_some() {
            return Err(bad());
        }
        let value = BigUint::from_str_radix(value_hex, 16).map_err(|_| bad())?;
        let key = CounterKey {
            kind,
            t: nums[1] as u32,
            x: nums[2] as u32,
            l: nums[3] as u32,
            k: nums[4] as u32,
            z: nums[5] as u32,
            p: nums[6],
            mx: Mask(nums[7]),
            ml: Mask(nums[8]),
            mk: Mask(nums[9]),
            mz: Mask(nums[10]),
        };
        ctx.validate(&key)
            .map_err(|e| CacheError::Malformed(format!("line {}: {e}", lineno + 2)))?;
        entries.push((key, value));
    }
    let n = entries.len();
    ctx.memo_load(entries);
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Permutation;

    #[test]
    fn round_trip_and_header_check() {
        let pi = Permutation::parse("(1 2)", 4).unwrap();
        let ctx = DpContext::new(4, pi.clone());
        let want = ctx.count_fixed();

        let mut buf = Vec::new();
        save_memo(&ctx, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("CHORDAL-MEMO 1 n=4 perm=2,1,3,4\n"));

        let fresh = DpContext::new(4, pi);
        let loaded = load_memo(&fresh, &mut buf.as_slice()).unwrap();
        assert!(loaded > 0);
        assert_eq!(fresh.count_fixed(), want);

        // mismatched session rejects
        let other = DpContext::new(4, Permutation::identity(4));
        let err = load_memo(&other, &mut buf.as_slice()).unwrap_err();
        assert!(matches!(err, CacheError::Mismatch { .. }));
    }
}
