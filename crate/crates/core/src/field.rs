//! Finite fields F_q = F_p[x]/(f) with elements encoded as integers in [0, q).
//!
//! An element sum c_i x^i is stored as the integer sum c_i p^i.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_FIELD_SIZE: u64 = 1 << 20;
const ADD_TABLE_LIMIT: u32 = 1024;

/// Field element code.
pub type Fe = u32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub k: u32,
    /// Monic defining polynomial, constant term first, length k + 1.
    pub poly: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct FieldDescriptor {
    p: u32,
    k: u32,
    q: u32,
    poly: Vec<u32>,
    neg_t: Vec<Fe>,
    // exp_t has length 2(q-1) so that log a + log b never needs a reduction
    exp_t: Vec<Fe>,
    log_t: Vec<u32>,
    add_t: Option<Vec<Fe>>,
    generator: Fe,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for d in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(d) {
            return n == d;
        }
    }
    // deterministic Miller-Rabin for 64-bit inputs
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits q = p^k, or None if q is not a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = prime_factors(q)[0];
    let mut k = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p as u32, k))
}

// Polynomials over F_p, constant term first.

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = inv_mod_p(b[db], p);
    while r.len() > db {
        let top = r.len() - 1;
        let c = (r[top] as u64 * lead_inv as u64 % p as u64) as u32;
        let shift = top - db;
        for (i, &bi) in b.iter().enumerate() {
            let sub = (c as u64 * bi as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn digits_of(mut n: u64, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = (n % p as u64) as u32;
        n /= p as u64;
    }
    out
}

/// Exhaustive trial division by every monic polynomial of degree at most k/2.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let k = poly.len() - 1;
    if k == 0 {
        return false;
    }
    for d in 1..=k / 2 {
        let count = (p as u64).pow(d as u32);
        for n in 0..count {
            let mut f = digits_of(n, p, d);
            f.push(1);
            if poly_rem(poly, &f, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// First irreducible monic polynomial of degree k in the radix order used
/// throughout: coefficient a_i is the i-th base-p digit of the running index.
pub fn default_polynomial(p: u32, k: u32) -> Vec<u32> {
    let count = (p as u64).pow(k);
    for n in 0..count {
        let mut f = digits_of(n, p, k as usize);
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl FieldDescriptor {
    pub fn new(p: u32, k: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NonPrimeCharacteristic(p));
        }
        Self::check_size(p, k)?;
        Self::with_polynomial(p, k, &default_polynomial(p, k))
    }

    pub fn from_order(q: u64) -> Result<Self> {
        let (p, k) = prime_power(q).ok_or_else(|| {
            Error::InvalidParameter(format!("{q} is not a prime power"))
        })?;
        Self::new(p, k)
    }

    fn check_size(p: u32, k: u32) -> Result<()> {
        if k == 0 {
            return Err(Error::InvalidParameter("degree must be positive".into()));
        }
        let q = (p as u128).checked_pow(k).unwrap_or(u128::MAX);
        if q > MAX_FIELD_SIZE as u128 {
            return Err(Error::FieldTooLarge(q.min(u64::MAX as u128) as u64));
        }
        Ok(())
    }

    /// `poly` is monic of degree k, constant term first.
    pub fn with_polynomial(p: u32, k: u32, poly: &[u32]) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NonPrimeCharacteristic(p));
        }
        Self::check_size(p, k)?;
        if poly.len() != k as usize + 1 || poly[k as usize] != 1 || poly.iter().any(|&c| c >= p) {
            return Err(Error::InvalidParameter("polynomial must be monic of degree k over F_p".into()));
        }
        if !is_irreducible(poly, p) {
            return Err(Error::ReduciblePolynomial(p));
        }
        let q = p.pow(k);
        let mut f = FieldDescriptor {
            p,
            k,
            q,
            poly: poly.to_vec(),
            neg_t: Vec::new(),
            exp_t: Vec::new(),
            log_t: Vec::new(),
            add_t: None,
            generator: 0,
        };
        f.neg_t = (0..q).map(|a| f.neg_slow(a)).collect();
        if q <= ADD_TABLE_LIMIT {
            let mut t = vec![0; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    t[(a * q + b) as usize] = f.add_slow(a, b);
                }
            }
            f.add_t = Some(t);
        }
        f.generator = f.find_generator()?;
        let n = (q - 1) as usize;
        let mut exp_t = Vec::with_capacity(2 * n);
        let mut log_t = vec![0u32; q as usize];
        let mut x: Fe = 1;
        for i in 0..n {
            exp_t.push(x);
            log_t[x as usize] = i as u32;
            x = f.mul_slow(x, f.generator);
        }
        for i in 0..n {
            exp_t.push(exp_t[i]);
        }
        f.exp_t = exp_t;
        f.log_t = log_t;
        Ok(f)
    }

    fn find_generator(&self) -> Result<Fe> {
        let order = (self.q - 1) as u64;
        let primes = prime_factors(order);
        for g in 1..self.q {
            if primes
                .iter()
                .all(|&r| self.pow_slow(g, order / r) != 1)
            {
                return Ok(g);
            }
        }
        Err(Error::SearchBudgetExceeded("no primitive element".into()))
    }

    fn add_slow(&self, a: Fe, b: Fe) -> Fe {
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut scale = 1;
        for _ in 0..self.k {
            out += ((a % self.p + b % self.p) % self.p) * scale;
            a /= self.p;
            b /= self.p;
            scale *= self.p;
        }
        out
    }

    fn neg_slow(&self, a: Fe) -> Fe {
        let mut a = a;
        let mut out = 0;
        let mut scale = 1;
        for _ in 0..self.k {
            out += ((self.p - a % self.p) % self.p) * scale;
            a /= self.p;
            scale *= self.p;
        }
        out
    }

    fn mul_slow(&self, a: Fe, b: Fe) -> Fe {
        let k = self.k as usize;
        let p = self.p as u64;
        let da = digits_of(a as u64, self.p, k);
        let db = digits_of(b as u64, self.p, k);
        let mut prod = vec![0u64; 2 * k - 1];
        for i in 0..k {
            for j in 0..k {
                prod[i + j] = (prod[i + j] + da[i] as u64 * db[j] as u64) % p;
            }
        }
        let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
        self.from_digits(&poly_rem(&prod, &self.poly, self.p))
    }

    fn pow_slow(&self, a: Fe, mut e: u64) -> Fe {
        let mut r = 1;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_slow(r, b);
            }
            b = self.mul_slow(b, b);
            e >>= 1;
        }
        r
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn polynomial(&self) -> &[u32] {
        &self.poly
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec { p: self.p, k: self.k, poly: self.poly.clone() }
    }

    pub fn generator(&self) -> Fe {
        self.generator
    }

    pub fn digits(&self, a: Fe) -> Vec<u32> {
        digits_of(a as u64, self.p, self.k as usize)
    }

    pub fn from_digits(&self, d: &[u32]) -> Fe {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c % self.p)
    }

    /// Image of an integer under Z -> F_p -> F_q.
    pub fn from_int(&self, n: i64) -> Fe {
        n.rem_euclid(self.p as i64) as Fe
    }

    /// F_p-basis 1, x, ..., x^{k-1}.
    pub fn prime_basis(&self) -> Vec<Fe> {
        (0..self.k).map(|i| self.p.pow(i)).collect()
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        match &self.add_t {
            Some(t) => t[(a * self.q + b) as usize],
            None if self.k == 1 => {
                let s = a + b;
                if s >= self.p {
                    s - self.p
                } else {
                    s
                }
            }
            None => self.add_slow(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        self.neg_t[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp_t[(self.log_t[a as usize] + self.log_t[b as usize]) as usize]
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a == 0 {
            return Err(Error::SingularMatrix);
        }
        let n = self.q - 1;
        Ok(self.exp_t[((n - self.log_t[a as usize]) % n) as usize])
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = (self.q - 1) as u64;
        self.exp_t[((self.log_t[a as usize] as u64 * (e % n)) % n) as usize]
    }

    /// Discrete logarithm to the base `generator()`.
    pub fn log(&self, a: Fe) -> Option<u32> {
        (a != 0).then(|| self.log_t[a as usize])
    }

    /// generator()^i
    pub fn exp(&self, i: u64) -> Fe {
        self.exp_t[(i % (self.q as u64 - 1)) as usize]
    }

    pub fn frobenius(&self, a: Fe) -> Fe {
        self.pow(a, self.p as u64)
    }

    /// Absolute trace to F_p, returned as an integer in [0, p).
    pub fn trace(&self, a: Fe) -> u32 {
        let mut acc = 0;
        let mut x = a;
        for _ in 0..self.k {
            acc = self.add(acc, x);
            x = self.frobenius(x);
        }
        debug_assert!(acc < self.p);
        acc
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        0..self.q
    }

    pub fn units(&self) -> impl Iterator<Item = Fe> {
        1..self.q
    }

    pub fn format(&self, a: Fe) -> String {
        if self.k == 1 {
            return a.to_string();
        }
        let d = self.digits(a);
        let terms: Vec<String> = d
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "x".into(),
                (1, c) => format!("{c}x"),
                (i, 1) => format!("x^{i}"),
                (i, c) => format!("{c}x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_polynomials() {
        assert_eq!(default_polynomial(2, 1), vec![0, 1]);
        assert_eq!(default_polynomial(2, 2), vec![1, 1, 1]);
        assert_eq!(default_polynomial(3, 2), vec![1, 0, 1]);
        assert_eq!(default_polynomial(2, 3), vec![1, 1, 0, 1]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(FieldDescriptor::new(4, 1), Err(Error::NonPrimeCharacteristic(4))));
        assert!(matches!(
            FieldDescriptor::with_polynomial(2, 2, &[1, 0, 1]),
            Err(Error::ReduciblePolynomial(2))
        ));
        assert!(FieldDescriptor::new(2, 21).is_err());
    }

    #[test]
    fn f4_arithmetic() {
        let f = FieldDescriptor::new(2, 2).unwrap();
        // x * x = x + 1
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.add(2, 3), 1);
        for a in f.units() {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        assert_eq!(f.trace(2), 1);
        assert_eq!(f.trace(1), 0);
    }

    #[test]
    fn field_axioms_small() {
        for (p, k) in [(2, 1), (3, 1), (2, 2), (3, 2), (5, 1), (2, 3), (7, 1)] {
            let f = FieldDescriptor::new(p, k).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), 0);
                for b in f.elements() {
                    assert_eq!(f.mul(a, b), f.mul_slow(a, b));
                    for c in f.elements() {
                        assert_eq!(
                            f.mul(a, f.add(b, c)),
                            f.add(f.mul(a, b), f.mul(a, c))
                        );
                    }
                }
            }
            // Frobenius fixes exactly the prime field
            let fixed = f.elements().filter(|&a| f.frobenius(a) == a).count();
            assert_eq!(fixed as u32, p);
        }
    }

    #[test]
    fn large_field_without_tables() {
        let f = FieldDescriptor::new(3, 7).unwrap();
        let g = f.generator();
        assert_eq!(f.pow(g, (f.q() - 1) as u64), 1);
        let a = 1234;
        assert_eq!(f.sub(f.add(a, 999), 999), a);
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(2_147_483_647));
        assert!(!is_prime(3_215_031_751));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(12), None);
    }
}
