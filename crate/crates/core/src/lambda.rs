//! The von Mangoldt function, sieved windows of it, and Chebyshev's ψ.
//!
//! Entries keep the exact prime-power structure `(p, k)` next to the cached
//! `ln p`, so every structural question is answered with integer arithmetic.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, isqrt, prime_power, primes_up_to};
use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// Largest upper limit accepted by [`sieve_window`]. Base primes go up to its
/// square root (2^24), which keeps the base sieve small.
pub const MAX_SIEVE_HI: u64 = 1 << 48;

/// Λ(n). Exact prime-power detection, never a floating-point test.
pub fn lambda(n: u64) -> f64 {
    match prime_power(n) {
        Some((p, _)) => (p as f64).ln(),
        None => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaEntry {
    Zero,
    PrimePower { p: u64, k: u32, log_p: f64 },
}

impl LambdaEntry {
    pub fn prime_power(p: u64, k: u32) -> Self {
        LambdaEntry::PrimePower {
            p,
            k,
            log_p: (p as f64).ln(),
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        match *self {
            LambdaEntry::Zero => 0.0,
            LambdaEntry::PrimePower { log_p, .. } => log_p,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LambdaEntry::Zero)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SieveConfig {
    pub segment_len: usize,
    pub parallel: bool,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            segment_len: 1 << 20,
            parallel: true,
        }
    }
}

/// Λ over the closed integer range `[lo, hi]`. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaWindow {
    lo: u64,
    hi: u64,
    entries: Vec<LambdaEntry>,
}

impl LambdaWindow {
    /// Builds a window from explicit entries; `entries.len()` must equal
    /// `hi - lo + 1`. Structure is not re-verified.
    pub fn from_entries(lo: u64, entries: Vec<LambdaEntry>) -> Result<Self> {
        if lo == 0 || entries.is_empty() {
            return Err(Error::InvalidRange {
                lo,
                hi: lo + entries.len() as u64,
            });
        }
        let hi = lo + entries.len() as u64 - 1;
        Ok(LambdaWindow { lo, hi, entries })
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LambdaEntry] {
        &self.entries
    }

    pub fn covers(&self, lo: u64, hi: u64) -> bool {
        lo >= self.lo && hi <= self.hi
    }

    pub fn require(&self, lo: u64, hi: u64) -> Result<()> {
        if self.covers(lo, hi) {
            Ok(())
        } else {
            Err(Error::Coverage {
                lo: self.lo,
                hi: self.hi,
                need_lo: lo,
                need_hi: hi,
            })
        }
    }

    pub fn entry(&self, n: u64) -> Option<&LambdaEntry> {
        if n < self.lo || n > self.hi {
            return None;
        }
        self.entries.get((n - self.lo) as usize)
    }

    /// Λ(n); panics outside the window.
    #[inline]
    pub fn value(&self, n: u64) -> f64 {
        self.entries[(n - self.lo) as usize].value()
    }

    pub fn get(&self, n: u64) -> Result<f64> {
        self.require(n, n)?;
        Ok(self.value(n))
    }

    /// Λ values for `[lo, hi]`, in order.
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(LambdaEntry::value).collect()
    }

    /// Λ values for `[0, upto]` with Λ(0) = 0; the window must start at 1.
    pub fn dense_from_zero(&self, upto: u64) -> Result<Vec<f64>> {
        self.require(1, upto.max(1))?;
        let mut out = Vec::with_capacity(upto as usize + 1);
        out.push(0.0);
        out.extend(self.entries[..upto as usize].iter().map(LambdaEntry::value));
        Ok(out)
    }
}

/// Sieves Λ on `[lo, hi]` with the default segment size.
pub fn sieve_window(lo: u64, hi: u64) -> Result<LambdaWindow> {
    sieve_window_with(lo, hi, &SieveConfig::default())
}

pub fn sieve_window_with(lo: u64, hi: u64, cfg: &SieveConfig) -> Result<LambdaWindow> {
    if lo == 0 || lo > hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    if hi > MAX_SIEVE_HI {
        return Err(Error::RangeOverflow {
            hi,
            max: MAX_SIEVE_HI,
        });
    }
    let base = primes_up_to(isqrt(hi));
    let len = (hi - lo + 1) as usize;
    let seg = cfg.segment_len.max(1);
    let mut entries = vec![LambdaEntry::Zero; len];
    let fill = |(i, chunk): (usize, &mut [LambdaEntry])| {
        let a = lo + (i * seg) as u64;
        sieve_segment(a, chunk, &base);
    };
    if cfg.parallel {
        entries.par_chunks_mut(seg).enumerate().for_each(fill);
    } else {
        entries.chunks_mut(seg).enumerate().for_each(fill);
    }
    Ok(LambdaWindow { lo, hi, entries })
}

fn sieve_segment(a: u64, out: &mut [LambdaEntry], base: &[u64]) {
    let b = a + out.len() as u64 - 1;
    let mut composite = vec![false; out.len()];
    for &p in base {
        if p * p > b {
            break;
        }
        let first = (p * p).max(a.div_ceil(p) * p);
        let mut m = first;
        while m <= b {
            composite[(m - a) as usize] = true;
            m += p;
        }
    }
    for (i, slot) in out.iter_mut().enumerate() {
        let n = a + i as u64;
        if n >= 2 && !composite[i] {
            *slot = LambdaEntry::prime_power(n, 1);
        }
    }
    // higher powers: p^k with k >= 2 forces p <= sqrt(hi), so p is a base prime
    for &p in base {
        let mut pk = match p.checked_mul(p) {
            Some(v) => v,
            None => break,
        };
        if pk > b {
            break;
        }
        let mut k = 2;
        while pk <= b {
            if pk >= a {
                out[(pk - a) as usize] = LambdaEntry::prime_power(p, k);
            }
            match pk.checked_mul(p) {
                Some(v) => pk = v,
                None => break,
            }
            k += 1;
        }
    }
}

/// Trial-division classification of a single `n`, independent of the sieve.
pub fn trial_division_entry(n: u64) -> LambdaEntry {
    if n < 2 {
        return LambdaEntry::Zero;
    }
    let mut m = n;
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            let mut k = 0;
            while m % d == 0 {
                m /= d;
                k += 1;
            }
            return if m == 1 {
                LambdaEntry::prime_power(d, k)
            } else {
                LambdaEntry::Zero
            };
        }
        d += 1;
    }
    debug_assert!(is_prime(m));
    LambdaEntry::prime_power(m, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiValue {
    pub x: u64,
    pub value: f64,
}

/// ψ(x) by ascending compensated summation over a window covering `[1, x]`.
pub fn psi(x: u64, window: &LambdaWindow) -> Result<PsiValue> {
    if x <= 1 {
        return Ok(PsiValue { x, value: 0.0 });
    }
    window.require(1, x)?;
    let value = window.entries[..x as usize]
        .iter()
        .map(LambdaEntry::value)
        .collect::<NeumaierSum>()
        .value();
    Ok(PsiValue { x, value })
}

/// Anything that can answer ψ(n) on the integers a check needs.
pub trait PsiSource {
    fn psi_at(&self, n: u64) -> Result<f64>;
}

/// Prefix table of ψ built as one compensated running sum.
#[derive(Debug, Clone)]
pub struct PsiTable {
    prefix: Vec<f64>,
}

impl PsiTable {
    pub fn new(window: &LambdaWindow) -> Result<Self> {
        if window.lo() != 1 {
            return Err(Error::Coverage {
                lo: window.lo(),
                hi: window.hi(),
                need_lo: 1,
                need_hi: window.hi(),
            });
        }
        let mut prefix = Vec::with_capacity(window.len() + 1);
        prefix.push(0.0);
        let mut acc = NeumaierSum::new();
        for e in window.entries() {
            acc.add(e.value());
            prefix.push(acc.value());
        }
        Ok(PsiTable { prefix })
    }

    pub fn max_x(&self) -> u64 {
        (self.prefix.len() - 1) as u64
    }

    pub fn psi(&self, x: u64) -> Result<PsiValue> {
        let value = self.psi_at(x)?;
        Ok(PsiValue { x, value })
    }
}

impl PsiSource for PsiTable {
    fn psi_at(&self, n: u64) -> Result<f64> {
        self.prefix.get(n as usize).copied().ok_or(Error::Coverage {
            lo: 1,
            hi: self.max_x(),
            need_lo: 1,
            need_hi: n,
        })
    }
}

/// Synthetic ψ(n) = n, used to isolate zero terms in checks.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearPsi;

impl PsiSource for LinearPsi {
    fn psi_at(&self, n: u64) -> Result<f64> {
        Ok(n as f64)
    }
}

const CACHE_MAGIC: [u8; 4] = *b"LMBW";
pub const CACHE_VERSION: u32 = 1;

/// Writes the binary window cache.
///
/// Layout (little endian): magic `LMBW`, `u32` version, `u64` lo, `u64` hi,
/// then one record per n in `[lo, hi]`: `u64` p (0 for Λ(n) = 0) and `u8` k.
/// `ln p` is recomputed on load.
pub fn write_cache(window: &LambdaWindow, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
    put(&CACHE_MAGIC)?;
    put(&CACHE_VERSION.to_le_bytes())?;
    put(&window.lo.to_le_bytes())?;
    put(&window.hi.to_le_bytes())?;
    for e in &window.entries {
        let (p, k) = match *e {
            LambdaEntry::Zero => (0u64, 0u8),
            LambdaEntry::PrimePower { p, k, .. } => (p, k as u8),
        };
        put(&p.to_le_bytes())?;
        put(&[k])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_cache(path: &Path) -> Result<LambdaWindow> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let bad = |msg: &str| Error::CacheFormat {
        path: path.to_path_buf(),
        msg: msg.to_string(),
    };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| bad("truncated header"))?;
    if magic != CACHE_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4).map_err(|_| bad("truncated header"))?;
    let version = u32::from_le_bytes(b4);
    if version != CACHE_VERSION {
        return Err(Error::CacheVersion {
            path: path.to_path_buf(),
            found: version,
            expected: CACHE_VERSION,
        });
    }
    r.read_exact(&mut b8).map_err(|_| bad("truncated header"))?;
    let lo = u64::from_le_bytes(b8);
    r.read_exact(&mut b8).map_err(|_| bad("truncated header"))?;
    let hi = u64::from_le_bytes(b8);
    if lo == 0 || lo > hi || hi > MAX_SIEVE_HI {
        return Err(bad("invalid range in header"));
    }
    let len = (hi - lo + 1) as usize;
    let mut entries = Vec::with_capacity(len);
    let mut rec = [0u8; 9];
    for _ in 0..len {
        r.read_exact(&mut rec).map_err(|_| bad("truncated body"))?;
        let p = u64::from_le_bytes(rec[..8].try_into().unwrap());
        let k = rec[8] as u32;
        entries.push(if p == 0 {
            LambdaEntry::Zero
        } else {
            LambdaEntry::prime_power(p, k)
        });
    }
    if r.read(&mut rec).map_err(|e| Error::io(path, e))? != 0 {
        return Err(bad("trailing bytes"));
    }
    Ok(LambdaWindow { lo, hi, entries })
}
