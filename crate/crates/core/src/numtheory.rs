//! Arithmetic functions, coprime counting and the coprime graph `Γ_h`.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Default size of the process-wide smallest-prime-factor table.
pub const DEFAULT_SIEVE_LIMIT: u64 = 10_000_000;

/// Smallest-prime-factor table up to a fixed limit.
#[derive(Debug, Clone)]
pub struct Sieve {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl Sieve {
    /// Linear sieve on `0..=limit`.
    pub fn new(limit: u64) -> Self {
        let limit = limit.max(2) as usize;
        let mut spf = vec![0u32; limit + 1];
        let mut primes = Vec::new();
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = p as usize * i;
                if p > si || m > limit {
                    break;
                }
                spf[m] = p;
            }
        }
        Sieve { spf, primes }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Prime factorisation as `(prime, exponent)` pairs in increasing order.
    pub fn factorize(&self, n: u64) -> Vec<(u64, u32)> {
        assert!(n >= 1, "factorize(0)");
        if n <= self.limit() {
            let mut out: Vec<(u64, u32)> = Vec::new();
            let mut m = n as usize;
            while m > 1 {
                let p = self.spf[m] as u64;
                m /= p as usize;
                match out.last_mut() {
                    Some((q, e)) if *q == p => *e += 1,
                    _ => out.push((p, 1)),
                }
            }
            out
        } else {
            trial_factorize(n)
        }
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n <= self.limit() {
            n >= 2 && self.spf[n as usize] as u64 == n
        } else {
            is_prime_u64(n)
        }
    }
}

fn trial_factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The process-wide sieve, built on first use.
pub fn sieve() -> &'static Sieve {
    static SIEVE: OnceLock<Sieve> = OnceLock::new();
    SIEVE.get_or_init(|| Sieve::new(DEFAULT_SIEVE_LIMIT))
}

/// Euler's totient `φ(n)`.
pub fn totient(n: u64) -> u64 {
    sieve()
        .factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Number of divisors `d(n)`.
pub fn ndivisors(n: u64) -> u64 {
    sieve()
        .factorize(n)
        .iter()
        .map(|&(_, e)| e as u64 + 1)
        .product()
}

/// Number of square-free divisors, `2^ω(n)`.
pub fn nsquarefree_divisors(n: u64) -> u64 {
    1 << sieve().factorize(n).len()
}

pub fn mobius(n: u64) -> i8 {
    let f = sieve().factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Smallest prime strictly greater than `k`.
pub fn nextprime(k: u64) -> u64 {
    let s = sieve();
    let mut c = k + 1;
    while !s.is_prime(c) {
        c += 1;
    }
    c
}

/// `#[m]_n`: how many of `1..=m` are coprime to `n`, by Möbius inversion
/// over the square-free divisors of `n`.
pub fn coprime_count(m: u64, n: u64) -> u64 {
    assert!(n >= 1, "coprime_count with n = 0");
    let primes: Vec<u64> = sieve().factorize(n).into_iter().map(|(p, _)| p).collect();
    let mut total: i64 = 0;
    for mask in 0u32..(1 << primes.len()) {
        let mut d = 1u64;
        for (i, p) in primes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                d *= p;
            }
        }
        let term = (m / d) as i64;
        if mask.count_ones() % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total as u64
}

/// Bulk arithmetic-function tables on `1..=limit` (index 0 unused).
#[derive(Debug, Clone)]
pub struct Tables {
    pub phi: Vec<u64>,
    pub ndiv: Vec<u32>,
}

impl Tables {
    pub fn new(limit: usize) -> Self {
        let mut phi: Vec<u64> = (0..=limit as u64).collect();
        let mut ndiv = vec![0u32; limit + 1];
        for p in 2..=limit {
            if phi[p] == p as u64 {
                for m in (p..=limit).step_by(p) {
                    phi[m] -= phi[m] / p as u64;
                }
            }
        }
        for d in 1..=limit {
            for m in (d..=limit).step_by(d) {
                ndiv[m] += 1;
            }
        }
        Tables { phi, ndiv }
    }
}

/// Exact partial sums with diagnostic ratios.
#[derive(Debug, Clone, Serialize)]
pub struct PartialSums {
    pub h: u64,
    /// `Σ_{k≤h} φ(k)`.
    pub sum_phi: u64,
    /// `Σ_{k≤h} d(k)`.
    pub sum_d: u64,
    /// `Σ_{k≤h} φ(k)/k` in double precision (compensated summation).
    pub sum_phi_over_k: f64,
    /// `sum_d / (h ln h)`; undefined (NaN) at `h = 1`.
    pub dirichlet_ratio: f64,
    /// `sum_phi_over_k / h`; tends to `6/π²`.
    pub phi_over_k_ratio: f64,
}

pub fn partial_sums(h: u64) -> PartialSums {
    assert!(h >= 1, "partial_sums(0)");
    let t = Tables::new(h as usize);
    let mut sum_phi = 0u64;
    let mut sum_d = 0u64;
    let (mut acc, mut comp) = (0.0f64, 0.0f64);
    for k in 1..=h as usize {
        sum_phi += t.phi[k];
        sum_d += t.ndiv[k] as u64;
        let y = t.phi[k] as f64 / k as f64 - comp;
        let s = acc + y;
        comp = (s - acc) - y;
        acc = s;
    }
    let hf = h as f64;
    PartialSums {
        h,
        sum_phi,
        sum_d,
        sum_phi_over_k: acc,
        dirichlet_ratio: sum_d as f64 / (hf * hf.ln()),
        phi_over_k_ratio: acc / hf,
    }
}

/// `Σ_{k≤h} φ(k)/k` as an exact rational. The denominator is the primorial
/// of `h`, so this is only practical for moderate `h`.
pub fn sum_phi_over_k_exact(h: u64) -> BigRational {
    let mut acc = BigRational::zero();
    for k in 1..=h {
        acc += BigRational::new(BigInt::from(totient(k)), BigInt::from(k));
    }
    acc
}

/// The graph on `{1, …, h}` with `k ∼ k'` iff `gcd(k, k') = 1` and `k + k' > h`.
#[derive(Debug, Clone, Serialize)]
pub struct GammaGraph {
    pub h: u64,
    /// Edges `(k, k')` with `k < k'`, sorted.
    pub edges: Vec<(u64, u64)>,
}

impl GammaGraph {
    pub fn degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.h as usize + 1];
        for &(a, b) in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        deg
    }

    /// `Σ_edges 2/(k·k')`, exactly.
    ///
    /// Summed over the common denominator `L²` with `L = lcm(1..=h)`, so each
    /// term is an integer and the sum is reduced once at the end.
    pub fn weight_sum(&self) -> BigRational {
        let h = self.h as usize;
        let mut lcm = BigUint::one();
        for k in 2..=self.h {
            lcm = lcm.lcm(&BigUint::from(k));
        }
        let quot: Vec<BigUint> = (0..=h)
            .map(|k| if k == 0 { BigUint::zero() } else { &lcm / k })
            .collect();
        // Σ_k (L/k) · Σ_{k'∼k} (L/k'), which counts each edge twice.
        let mut inner = vec![BigUint::zero(); h + 1];
        for &(a, b) in &self.edges {
            inner[a as usize] += &quot[b as usize];
            inner[b as usize] += &quot[a as usize];
        }
        let mut num = BigUint::zero();
        for k in 1..=h {
            if !inner[k].is_zero() {
                num += &quot[k] * &inner[k];
            }
        }
        let den = &lcm * &lcm;
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    /// Checks the degree and weight identities; returns the first failure.
    pub fn verify(&self) -> Result<()> {
        let deg = self.degrees();
        for k in 1..=self.h {
            if deg[k as usize] != totient(k) {
                return Err(Error::Invariant(format!(
                    "Γ_{}: degree of {k} is {}, φ({k}) = {}",
                    self.h,
                    deg[k as usize],
                    totient(k)
                )));
            }
        }
        let w = self.weight_sum();
        if !w.is_one() {
            return Err(Error::Invariant(format!(
                "Γ_{}: weight sum is {w}, expected 1",
                self.h
            )));
        }
        Ok(())
    }

    pub fn to_dot(&self) -> String {
        let mut out = format!("graph gamma_{} {{\n", self.h);
        for k in 1..=self.h {
            out.push_str(&format!("  {k};\n"));
        }
        for &(a, b) in &self.edges {
            out.push_str(&format!("  {a} -- {b} [label=\"2/{}\"];\n", a * b));
        }
        out.push_str("}\n");
        out
    }
}

/// Builds `Γ_h` and checks its invariants.
pub fn gamma_graph(h: u64) -> Result<GammaGraph> {
    let g = gamma_graph_unchecked(h)?;
    g.verify()?;
    Ok(g)
}

pub fn gamma_graph_unchecked(h: u64) -> Result<GammaGraph> {
    if h < 2 {
        return Err(Error::Invariant(format!("Γ_h needs h >= 2, got {h}")));
    }
    let mut edges = Vec::new();
    for a in 1..=h {
        for b in (a + 1)..=h {
            if a + b > h && a.gcd(&b) == 1 {
                edges.push((a, b));
            }
        }
    }
    Ok(GammaGraph { h, edges })
}

/// Exact rational helper used by callers that report `Γ_h` weights.
pub fn edge_weight(k: u64, k2: u64) -> BigRational {
    BigRational::new(BigInt::from(2), BigInt::from(k * k2))
}
