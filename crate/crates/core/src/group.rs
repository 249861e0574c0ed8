//! Enumeration of GL_n(F_q) and matrix arithmetic over F_q.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Fe, FieldDescriptor};
use crate::modp::gl_order;

pub const DEFAULT_ENUMERATION_BOUND: u128 = 1_000_000;
const DENSE_LOOKUP_LIMIT: u64 = 1 << 24;

/// Square matrix over F_q, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqMatrix {
    pub n: usize,
    pub e: Vec<Fe>,
}

impl FqMatrix {
    pub fn identity(n: usize) -> Self {
        let mut e = vec![0; n * n];
        for i in 0..n {
            e[i * n + i] = 1;
        }
        FqMatrix { n, e }
    }

    pub fn from_rows(rows: &[Vec<Fe>]) -> Self {
        FqMatrix { n: rows.len(), e: rows.concat() }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Fe {
        self.e[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Fe) {
        self.e[i * self.n + j] = v;
    }

    pub fn diag(entries: &[Fe]) -> Self {
        let n = entries.len();
        let mut m = FqMatrix { n, e: vec![0; n * n] };
        for (i, &d) in entries.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn mul(&self, f: &FieldDescriptor, o: &FqMatrix) -> FqMatrix {
        let n = self.n;
        let mut e = vec![0; n * n];
        mat_mul_into(f, n, &self.e, &o.e, &mut e);
        FqMatrix { n, e }
    }

    pub fn det(&self, f: &FieldDescriptor) -> Fe {
        det(f, self.n, &self.e)
    }

    pub fn inv(&self, f: &FieldDescriptor) -> Result<FqMatrix> {
        Ok(FqMatrix { n: self.n, e: inverse(f, self.n, &self.e)? })
    }

    pub fn trace(&self, f: &FieldDescriptor) -> Fe {
        (0..self.n).fold(0, |acc, i| f.add(acc, self.at(i, i)))
    }
}

pub fn mat_mul_into(f: &FieldDescriptor, n: usize, a: &[Fe], b: &[Fe], out: &mut [Fe]) {
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0;
            for k in 0..n {
                acc = f.add(acc, f.mul(a[i * n + k], b[k * n + j]));
            }
            out[i * n + j] = acc;
        }
    }
}

pub fn det(f: &FieldDescriptor, n: usize, a: &[Fe]) -> Fe {
    let mut m = a.to_vec();
    let mut d: Fe = 1;
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| m[r * n + c] != 0) else {
            return 0;
        };
        if p != c {
            for j in 0..n {
                m.swap(p * n + j, c * n + j);
            }
            d = f.neg(d);
        }
        let piv = m[c * n + c];
        d = f.mul(d, piv);
        let inv = f.inv(piv).unwrap();
        for r in c + 1..n {
            let t = f.mul(m[r * n + c], inv);
            if t == 0 {
                continue;
            }
            for j in c..n {
                m[r * n + j] = f.sub(m[r * n + j], f.mul(t, m[c * n + j]));
            }
        }
    }
    d
}

pub fn inverse(f: &FieldDescriptor, n: usize, a: &[Fe]) -> Result<Vec<Fe>> {
    let mut m = a.to_vec();
    let mut inv = FqMatrix::identity(n).e;
    for c in 0..n {
        let p = (c..n).find(|&r| m[r * n + c] != 0).ok_or(Error::SingularMatrix)?;
        for j in 0..n {
            m.swap(p * n + j, c * n + j);
            inv.swap(p * n + j, c * n + j);
        }
        let pi = f.inv(m[c * n + c])?;
        for j in 0..n {
            m[c * n + j] = f.mul(m[c * n + j], pi);
            inv[c * n + j] = f.mul(inv[c * n + j], pi);
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let t = m[r * n + c];
            if t == 0 {
                continue;
            }
            for j in 0..n {
                m[r * n + j] = f.sub(m[r * n + j], f.mul(t, m[c * n + j]));
                inv[r * n + j] = f.sub(inv[r * n + j], f.mul(t, inv[c * n + j]));
            }
        }
    }
    Ok(inv)
}

enum Lookup {
    Dense(Vec<u32>),
    Hash(HashMap<u64, u32>),
}

/// GL_n(F_q) listed in row-major radix order of the entries.
pub struct GlGroup {
    pub n: usize,
    pub field: Arc<FieldDescriptor>,
    elems: Vec<Fe>,
    lookup: Lookup,
    inv: Vec<u32>,
    identity: u32,
}

impl GlGroup {
    pub fn new(n: usize, field: Arc<FieldDescriptor>) -> Result<Self> {
        Self::with_bound(n, field, DEFAULT_ENUMERATION_BOUND)
    }

    pub fn with_bound(n: usize, field: Arc<FieldDescriptor>, bound: u128) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let q = field.q() as u64;
        let size = gl_order(n, q);
        if size > bound {
            return Err(Error::EnumerationBoundExceeded { size, bound });
        }
        let total = (q as u128).pow((n * n) as u32);
        if total > u64::MAX as u128 / 2 {
            return Err(Error::EnumerationBoundExceeded { size: total, bound });
        }
        let total = total as u64;
        let nn = n * n;
        let mut elems = Vec::with_capacity(size as usize * nn);
        let mut digits = vec![0 as Fe; nn];
        let mut codes = Vec::with_capacity(size as usize);
        for code in 0..total {
            if code > 0 {
                // increment big-endian radix counter
                let mut i = nn;
                loop {
                    i -= 1;
                    digits[i] += 1;
                    if digits[i] < q as Fe {
                        break;
                    }
                    digits[i] = 0;
                }
            }
            if det(&field, n, &digits) != 0 {
                elems.extend_from_slice(&digits);
                codes.push(code);
            }
        }
        debug_assert_eq!(codes.len() as u128, size);
        let lookup = if total <= DENSE_LOOKUP_LIMIT {
            let mut d = vec![u32::MAX; total as usize];
            for (i, &c) in codes.iter().enumerate() {
                d[c as usize] = i as u32;
            }
            Lookup::Dense(d)
        } else {
            Lookup::Hash(codes.iter().enumerate().map(|(i, &c)| (c, i as u32)).collect())
        };
        let mut g = GlGroup { n, field, elems, lookup, inv: Vec::new(), identity: 0 };
        g.identity = g.index_of(&FqMatrix::identity(n).e).unwrap();
        let inv: Vec<u32> = (0..g.order() as u32)
            .map(|i| {
                let m = inverse(&g.field, n, g.elem(i)).unwrap();
                g.index_of(&m).unwrap()
            })
            .collect();
        g.inv = inv;
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.elems.len() / (self.n * self.n)
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    #[inline]
    pub fn elem(&self, i: u32) -> &[Fe] {
        let nn = self.n * self.n;
        &self.elems[i as usize * nn..(i as usize + 1) * nn]
    }

    pub fn matrix(&self, i: u32) -> FqMatrix {
        FqMatrix { n: self.n, e: self.elem(i).to_vec() }
    }

    pub fn code(&self, e: &[Fe]) -> u64 {
        let q = self.field.q() as u64;
        e.iter().fold(0, |acc, &x| acc * q + x as u64)
    }

    pub fn index_of(&self, e: &[Fe]) -> Option<u32> {
        let c = self.code(e);
        match &self.lookup {
            Lookup::Dense(d) => d.get(c as usize).copied().filter(|&i| i != u32::MAX),
            Lookup::Hash(h) => h.get(&c).copied(),
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let nn = self.n * self.n;
        let mut buf = [0 as Fe; 64];
        let out = &mut buf[..nn];
        mat_mul_into(&self.field, self.n, self.elem(a), self.elem(b), out);
        self.index_of(out).expect("product lies in the group")
    }

    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }

    pub fn conj(&self, g: u32, x: u32) -> u32 {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn det(&self, a: u32) -> Fe {
        det(&self.field, self.n, self.elem(a))
    }

    /// Generators: transvections 1 + b E_ij for b in an F_p-basis, and diag(g, 1, ..., 1).
    pub fn generators(&self) -> Vec<u32> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for b in self.field.prime_basis() {
                    let mut m = FqMatrix::identity(n);
                    m.set(i, j, b);
                    out.push(self.index_of(&m.e).unwrap());
                }
            }
        }
        let mut d = FqMatrix::identity(n);
        d.set(0, 0, self.field.generator());
        out.push(self.index_of(&d.e).unwrap());
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Multiplicative order of an element.
    pub fn element_order(&self, a: u32) -> u64 {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Upper unitriangular matrices, in index order.
    pub fn unipotent_upper(&self) -> Vec<u32> {
        let n = self.n;
        (0..self.order() as u32)
            .filter(|&i| {
                let e = self.elem(i);
                (0..n).all(|r| {
                    (0..n).all(|c| match r.cmp(&c) {
                        std::cmp::Ordering::Equal => e[r * n + c] == 1,
                        std::cmp::Ordering::Greater => e[r * n + c] == 0,
                        _ => true,
                    })
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modp::gl_exponent;

    #[test]
    fn group_orders() {
        for (n, p, k, expect) in [(1, 2, 1, 1), (2, 2, 1, 6), (2, 3, 1, 48), (3, 2, 1, 168), (2, 2, 2, 180)] {
            let f = Arc::new(FieldDescriptor::new(p, k).unwrap());
            let g = GlGroup::new(n, f).unwrap();
            assert_eq!(g.order(), expect);
        }
    }

    #[test]
    fn exponent_matches_element_orders() {
        for (n, p, k) in [(2, 2, 1), (2, 3, 1), (3, 2, 1), (2, 2, 2), (2, 5, 1)] {
            let f = Arc::new(FieldDescriptor::new(p, k).unwrap());
            let g = GlGroup::new(n, f.clone()).unwrap();
            let e = (0..g.order() as u32)
                .map(|a| g.element_order(a))
                .fold(1, crate::modp::lcm);
            assert_eq!(e, gl_exponent(n, p as u64, f.q() as u64));
        }
    }

    #[test]
    fn bound_is_enforced() {
        let f = Arc::new(FieldDescriptor::new(5, 1).unwrap());
        assert!(matches!(
            GlGroup::with_bound(3, f, 1000),
            Err(Error::EnumerationBoundExceeded { .. })
        ));
    }

    #[test]
    fn inverses_and_generators() {
        let f = Arc::new(FieldDescriptor::new(3, 1).unwrap());
        let g = GlGroup::new(2, f).unwrap();
        for a in 0..g.order() as u32 {
            assert_eq!(g.mul(a, g.inv(a)), g.identity());
        }
        // generators produce the whole group
        let gens = g.generators();
        let mut seen = vec![false; g.order()];
        let mut stack = vec![g.identity()];
        seen[g.identity() as usize] = true;
        while let Some(x) = stack.pop() {
            for &s in &gens {
                let y = g.mul(x, s);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    stack.push(y);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(g.unipotent_upper().len(), 3);
    }
}
