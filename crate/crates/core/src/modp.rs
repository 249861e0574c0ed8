//! The computation field F_l' used for character values, plus dense linear
//! algebra and polynomial root finding over it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{is_prime, prime_factors, FieldDescriptor};

/// Largest admissible l'; products of two residues must fit in u64.
pub const MAX_ELL: u64 = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComputationField {
    pub ell: u64,
    /// M = lcm(exp G, p); zeta has exact order M.
    pub order: u64,
    pub zeta: u64,
    pub generator: u64,
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

pub fn gl_order(n: usize, q: u64) -> u128 {
    let qn = (q as u128).pow(n as u32);
    (0..n as u32).map(|i| qn - (q as u128).pow(i)).product()
}

/// Exponent of GL_n(F_q): p^a lcm(q^i - 1), p^a the least power of p with p^a >= n.
pub fn gl_exponent(n: usize, p: u64, q: u64) -> u64 {
    let mut pa = 1;
    while pa < n as u64 {
        pa *= p;
    }
    (1..=n as u32).fold(pa, |acc, i| lcm(acc, q.pow(i) - 1))
}

impl ComputationField {
    /// Smallest prime l' = 1 mod M exceeding |GL_n(F_q)|.
    pub fn for_group(n: usize, field: &FieldDescriptor) -> Result<Self> {
        let q = field.q() as u64;
        let p = field.p() as u64;
        let size = gl_order(n, q);
        let m = lcm(gl_exponent(n, p, q), p);
        let mut t = (size / m as u128) as u64;
        loop {
            let ell = t.checked_mul(m).and_then(|x| x.checked_add(1)).unwrap_or(u64::MAX);
            if ell >= MAX_ELL {
                return Err(Error::SearchBudgetExceeded(format!(
                    "no prime l' = 1 mod {m} below 2^31"
                )));
            }
            if (ell as u128) > size && is_prime(ell) {
                return Self::new(ell, m);
            }
            t += 1;
        }
    }

    pub fn new(ell: u64, order: u64) -> Result<Self> {
        if !is_prime(ell) || ell >= MAX_ELL || !(ell - 1).is_multiple_of(order) {
            return Err(Error::InvalidParameter(format!("l' = {ell} unsuitable for order {order}")));
        }
        let primes = prime_factors(ell - 1);
        let mut f = ComputationField { ell, order, zeta: 0, generator: 0 };
        let g = (2..ell)
            .find(|&g| primes.iter().all(|&r| f.pow(g, (ell - 1) / r) != 1))
            .unwrap_or(1);
        f.generator = g;
        f.zeta = f.pow(g, (ell - 1) / order);
        Ok(f)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.ell {
            s - self.ell
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.ell - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.ell - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.ell
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        let mut b = a % self.ell;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a.is_multiple_of(self.ell) {
            return Err(Error::NonInvertibleOrder(a));
        }
        Ok(self.pow(a, self.ell - 2))
    }

    pub fn from_i64(&self, n: i64) -> u64 {
        n.rem_euclid(self.ell as i64) as u64
    }

    pub fn from_u128(&self, n: u128) -> u64 {
        (n % self.ell as u128) as u64
    }

    /// Primitive d-th root of unity, d | M.
    pub fn root_of_unity(&self, d: u64) -> Result<u64> {
        if d == 0 || !self.order.is_multiple_of(d) {
            return Err(Error::InvalidParameter(format!("{d} does not divide {}", self.order)));
        }
        Ok(self.pow(self.zeta, self.order / d))
    }

    /// Symmetric lift to the integers.
    pub fn lift(&self, a: u64) -> i64 {
        if a > self.ell / 2 {
            a as i64 - self.ell as i64
        } else {
            a as i64
        }
    }

    pub fn sqrt_int(&self, a: u64) -> Option<u64> {
        let r = (a as f64).sqrt().round() as u64;
        (r.saturating_sub(1)..=r + 1).find(|&s| s * s == a)
    }
}

/// Dense row-major matrix over F_l'.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Mat { rows: rows.len(), cols, data: rows.concat() }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, f: &ComputationField, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.add(out.at(i, j), f.mul(a, other.at(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, f: &ComputationField, v: &[u64]) -> Vec<u64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b))))
            .collect()
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self, f: &ComputationField) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.at(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    self.data.swap(pr * self.cols + j, r * self.cols + j);
                }
            }
            let inv = f.inv(self.at(r, c)).expect("nonzero pivot");
            for j in c..self.cols {
                let v = f.mul(self.at(r, j), inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.at(i, c);
                if factor == 0 {
                    continue;
                }
                for j in c..self.cols {
                    let v = f.sub(self.at(i, j), f.mul(factor, self.at(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, f: &ComputationField) -> usize {
        self.clone().rref(f).len()
    }

    /// Basis of {v : A v = 0}.
    pub fn kernel(&self, f: &ComputationField) -> Vec<Vec<u64>> {
        let mut m = self.clone();
        let pivots = m.rref(f);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![0; self.cols];
                v[fc] = 1;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(m.at(r, fc));
                }
                v
            })
            .collect()
    }

    /// Characteristic polynomial det(xI - A), constant term first, via
    /// reduction to upper Hessenberg form.
    pub fn charpoly(&self, f: &ComputationField) -> Vec<u64> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut h = self.clone();
        for c in 0..n.saturating_sub(2) {
            let Some(piv) = (c + 1..n).find(|&i| h.at(i, c) != 0) else {
                continue;
            };
            if piv != c + 1 {
                for j in 0..n {
                    h.data.swap(piv * n + j, (c + 1) * n + j);
                }
                for i in 0..n {
                    h.data.swap(i * n + piv, i * n + c + 1);
                }
            }
            let inv = f.inv(h.at(c + 1, c)).expect("pivot");
            for i in c + 2..n {
                let t = f.mul(h.at(i, c), inv);
                if t == 0 {
                    continue;
                }
                for j in 0..n {
                    let v = f.sub(h.at(i, j), f.mul(t, h.at(c + 1, j)));
                    h.set(i, j, v);
                }
                for r in 0..n {
                    let v = f.add(h.at(r, c + 1), f.mul(t, h.at(r, i)));
                    h.set(r, c + 1, v);
                }
            }
        }
        // p_k = char poly of leading k x k block
        let mut polys: Vec<Vec<u64>> = vec![vec![1]];
        for k in 0..n {
            let mut next = vec![0; k + 2];
            // (x - h_kk) p_k
            for (i, &c) in polys[k].iter().enumerate() {
                next[i + 1] = f.add(next[i + 1], c);
                next[i] = f.sub(next[i], f.mul(h.at(k, k), c));
            }
            let mut prod = 1;
            for i in (0..k).rev() {
                prod = f.mul(prod, h.at(i + 1, i));
                let coef = f.mul(prod, h.at(i, k));
                if coef == 0 {
                    continue;
                }
                for (j, &c) in polys[i].iter().enumerate() {
                    next[j] = f.sub(next[j], f.mul(coef, c));
                }
            }
            polys.push(next);
        }
        polys.pop().unwrap()
    }
}

// Polynomials over F_l', constant term first.

fn ptrim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn pmulmod(f: &ComputationField, a: &[u64], b: &[u64], m: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    prem(f, &out, m)
}

fn prem(f: &ComputationField, a: &[u64], m: &[u64]) -> Vec<u64> {
    let mut r = a.to_vec();
    ptrim(&mut r);
    let dm = m.len() - 1;
    let inv = f.inv(m[dm]).expect("nonzero modulus");
    while r.len() > dm {
        let top = r.len() - 1;
        let c = f.mul(r[top], inv);
        for (i, &mi) in m.iter().enumerate() {
            let idx = top - dm + i;
            r[idx] = f.sub(r[idx], f.mul(c, mi));
        }
        ptrim(&mut r);
    }
    r
}

fn pgcd(f: &ComputationField, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    ptrim(&mut a);
    ptrim(&mut b);
    while !b.is_empty() {
        let r = prem(f, &a, &b);
        a = b;
        b = r;
    }
    if let Some(&lead) = a.last() {
        let inv = f.inv(lead).unwrap();
        for c in a.iter_mut() {
            *c = f.mul(*c, inv);
        }
    }
    a
}

fn ppowmod(f: &ComputationField, base: &[u64], mut e: u64, m: &[u64]) -> Vec<u64> {
    let mut r = vec![1];
    let mut b = prem(f, base, m);
    while e > 0 {
        if e & 1 == 1 {
            r = pmulmod(f, &r, &b, m);
        }
        b = pmulmod(f, &b, &b, m);
        e >>= 1;
    }
    r
}

/// Distinct roots in F_l' of a nonzero polynomial, sorted ascending.
pub fn roots<R: Rng>(f: &ComputationField, poly: &[u64], rng: &mut R) -> Vec<u64> {
    let mut poly = poly.to_vec();
    ptrim(&mut poly);
    if poly.len() <= 1 {
        return Vec::new();
    }
    // g = gcd(poly, x^l - x) is the product of the distinct linear factors
    let xl = ppowmod(f, &[0, 1], f.ell, &poly);
    let mut diff = xl;
    diff.resize(diff.len().max(2), 0);
    diff[1] = f.sub(diff[1], 1);
    let g = pgcd(f, &poly, &diff);
    let mut out = Vec::new();
    split(f, g, rng, &mut out);
    out.sort_unstable();
    out
}

fn split<R: Rng>(f: &ComputationField, g: Vec<u64>, rng: &mut R, out: &mut Vec<u64>) {
    match g.len() {
        0 | 1 => {}
        2 => out.push(f.neg(f.mul(g[0], f.inv(g[1]).unwrap()))),
        _ => {
            if f.ell == 2 {
                for x in 0..2 {
                    if g.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c)) == 0 {
                        out.push(x);
                    }
                }
                return;
            }
            loop {
                let a = rng.gen_range(0..f.ell);
                let mut h = ppowmod(f, &[a, 1], (f.ell - 1) / 2, &g);
                if h.is_empty() {
                    h.push(0);
                }
                h[0] = f.sub(h[0], 1);
                let d = pgcd(f, &g, &h);
                if d.len() > 1 && d.len() < g.len() {
                    let (q, _) = pdivmod(f, &g, &d);
                    split(f, d, rng, out);
                    split(f, q, rng, out);
                    return;
                }
            }
        }
    }
}

fn pdivmod(f: &ComputationField, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let mut r = a.to_vec();
    ptrim(&mut r);
    let db = b.len() - 1;
    let inv = f.inv(b[db]).unwrap();
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![0; r.len() - db];
    while r.len() > db {
        let top = r.len() - 1;
        let c = f.mul(r[top], inv);
        q[top - db] = c;
        for (i, &bi) in b.iter().enumerate() {
            let idx = top - db + i;
            r[idx] = f.sub(r[idx], f.mul(c, bi));
        }
        ptrim(&mut r);
    }
    (q, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn oracle_fields() {
        let f2 = FieldDescriptor::new(2, 1).unwrap();
        let c = ComputationField::for_group(2, &f2).unwrap();
        assert_eq!((c.ell, c.order, c.zeta), (7, 6, 3));
        let c = ComputationField::for_group(1, &f2).unwrap();
        assert_eq!(c.ell, 3);
        let f3 = FieldDescriptor::new(3, 1).unwrap();
        assert_eq!(ComputationField::for_group(2, &f3).unwrap().ell, 73);
        assert_eq!(ComputationField::for_group(3, &f2).unwrap().ell, 337);
        assert_eq!(gl_order(3, 2), 168);
    }

    #[test]
    fn zeta_has_exact_order() {
        let f4 = FieldDescriptor::new(2, 2).unwrap();
        let c = ComputationField::for_group(2, &f4).unwrap();
        assert_eq!(c.pow(c.zeta, c.order), 1);
        for r in prime_factors(c.order) {
            assert_ne!(c.pow(c.zeta, c.order / r), 1);
        }
    }

    #[test]
    fn charpoly_and_roots() {
        let f = ComputationField::new(73, 24).unwrap();
        // diag(2, 5, 5) conjugated by an upper unitriangular matrix
        let a = Mat::from_rows(&[vec![2, 1, 7], vec![0, 5, 3], vec![0, 0, 5]]);
        let cp = a.charpoly(&f);
        // (x-2)(x-5)^2 = x^3 - 12x^2 + 45x - 50
        assert_eq!(cp, vec![f.from_i64(-50), 45, f.from_i64(-12), 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(roots(&f, &cp, &mut rng), vec![2, 5]);
    }

    #[test]
    fn kernel_dimension() {
        let f = ComputationField::new(7, 6).unwrap();
        let a = Mat::from_rows(&[vec![1, 2, 3], vec![2, 4, 6]]);
        let k = a.kernel(&f);
        assert_eq!(k.len(), 2);
        for v in k {
            assert!(a.mul_vec(&f, &v).iter().all(|&x| x == 0));
        }
    }
}
