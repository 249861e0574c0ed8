//! Truncated Laurent series over F_q, matrices over them, and pattern groups.
//!
//! The local field is F = F_q((t)) with uniformiser t. A scalar is stored as
//! t^v (c_0 + c_1 t + ...) known modulo t^prec; every operation keeps track of
//! the absolute precision it can certify.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, FieldDescriptor};
use crate::group::FqMatrix;

/// Maximal number of stored coefficients per scalar.
pub const CAP: usize = 96;

#[derive(Clone, Copy)]
pub struct Ls {
    /// Valuation of the leading stored term; equals prec when the value is zero.
    v: i32,
    /// Known modulo t^prec.
    prec: i32,
    /// Index past the last nonzero coefficient, zero for a zero value.
    nz: u8,
    c: [u16; CAP],
}

impl Ls {
    pub fn valuation(&self) -> Option<i32> {
        (self.nz > 0).then_some(self.v)
    }

    pub fn precision(&self) -> i32 {
        self.prec
    }

    pub fn is_known_zero(&self) -> bool {
        self.nz == 0
    }

    /// Coefficient of t^e; the caller must ensure e < prec.
    #[inline]
    fn raw(&self, e: i32) -> u32 {
        let i = e - self.v;
        if i < 0 || i >= self.nz as i32 {
            0
        } else {
            self.c[i as usize] as u32
        }
    }

    pub fn coeff(&self, e: i32) -> Result<Fe> {
        if e >= self.prec {
            return Err(Error::PrecisionLoss(format!("coefficient of t^{e} beyond precision {}", self.prec)));
        }
        Ok(self.raw(e))
    }

    /// Coefficients of t^v, ..., in order, trimmed.
    pub fn terms(&self) -> Vec<(i32, Fe)> {
        (0..self.nz as usize)
            .filter(|&i| self.c[i] != 0)
            .map(|i| (self.v + i as i32, self.c[i] as Fe))
            .collect()
    }
}

impl PartialEq for Ls {
    fn eq(&self, o: &Self) -> bool {
        self.prec == o.prec && self.terms() == o.terms()
    }
}

impl fmt::Debug for Ls {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "O(t^{})", self.prec);
        }
        for (e, c) in terms {
            write!(f, "{c}t^{e} + ")?;
        }
        write!(f, "O(t^{})", self.prec)
    }
}

/// Declared window: valuations at least -b, precision at most n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub b: i32,
    pub n: i32,
}

impl Window {
    /// Default window for a depth-zero computation at level m.
    pub fn depth_zero(n: usize, m: u32) -> Self {
        let b = (n as i32 - 1) * (m as i32 + 1);
        Window { b, n: 2 * n as i32 * (m as i32 + 1) + b }
    }
}

#[derive(Clone)]
pub struct LocalRing {
    pub field: Arc<FieldDescriptor>,
    pub window: Window,
}

impl LocalRing {
    pub fn new(field: Arc<FieldDescriptor>, window: Window) -> Result<Self> {
        if field.q() > u16::MAX as u32 {
            return Err(Error::InvalidParameter("residue field too large for local arithmetic".into()));
        }
        if window.b < 0 || window.n <= 0 || (window.n + window.b) as usize > CAP {
            return Err(Error::InvalidParameter(format!(
                "window {window:?} exceeds {CAP} stored coefficients"
            )));
        }
        Ok(LocalRing { field, window })
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    fn zero_at(&self, prec: i32) -> Ls {
        Ls { v: prec, prec, nz: 0, c: [0; CAP] }
    }

    pub fn zero(&self) -> Ls {
        self.zero_at(self.window.n)
    }

    pub fn one(&self) -> Ls {
        self.constant(1)
    }

    pub fn constant(&self, x: Fe) -> Ls {
        self.monomial_scaled(x, 0).expect("constants fit the window")
    }

    /// t^k
    pub fn monomial(&self, k: i32) -> Result<Ls> {
        self.monomial_scaled(1, k)
    }

    /// x t^k
    pub fn monomial_scaled(&self, x: Fe, k: i32) -> Result<Ls> {
        self.from_coeffs(k, &[x], self.window.n)
    }

    /// sum_i coeffs[i] t^{v0 + i} modulo t^prec.
    pub fn from_coeffs(&self, v0: i32, coeffs: &[Fe], prec: i32) -> Result<Ls> {
        let prec = prec.min(self.window.n);
        let len = (prec - v0).max(0) as usize;
        let mut buf = [0u32; CAP];
        let take = coeffs.len().min(len).min(CAP);
        buf[..take].copy_from_slice(&coeffs[..take]);
        self.normalize(v0, prec, &buf, len)
    }

    fn normalize(&self, v0: i32, prec: i32, buf: &[u32; CAP], len: usize) -> Result<Ls> {
        let mut prec = prec.min(self.window.n);
        let mut len = len.min((prec - v0).max(0) as usize);
        if len > CAP {
            len = CAP;
            prec = v0 + CAP as i32;
        }
        let Some(i0) = buf[..len].iter().position(|&x| x != 0) else {
            return Ok(self.zero_at(prec));
        };
        let v = v0 + i0 as i32;
        if v < -self.window.b {
            return Err(Error::WindowOverflow(format!(
                "valuation {v} below window bound -{}",
                self.window.b
            )));
        }
        let last = buf[..len].iter().rposition(|&x| x != 0).unwrap();
        let mut c = [0u16; CAP];
        for i in i0..=last {
            c[i - i0] = buf[i] as u16;
        }
        Ok(Ls { v, prec, nz: (last + 1 - i0) as u8, c })
    }

    pub fn add(&self, a: &Ls, b: &Ls) -> Result<Ls> {
        let prec = a.prec.min(b.prec);
        let v0 = a.v.min(b.v);
        if v0 >= prec {
            return Ok(self.zero_at(prec));
        }
        let len = ((prec - v0) as usize).min(CAP);
        let f = &self.field;
        let mut buf = [0u32; CAP];
        for (i, slot) in buf.iter_mut().enumerate().take(len) {
            let e = v0 + i as i32;
            *slot = f.add(a.raw(e), b.raw(e));
        }
        self.normalize(v0, prec, &buf, len)
    }

    pub fn neg(&self, a: &Ls) -> Ls {
        let mut out = *a;
        for i in 0..a.nz as usize {
            out.c[i] = self.field.neg(a.c[i] as u32) as u16;
        }
        out
    }

    pub fn sub(&self, a: &Ls, b: &Ls) -> Result<Ls> {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Ls, b: &Ls) -> Result<Ls> {
        let prec = (a.prec.saturating_add(b.v)).min(b.prec.saturating_add(a.v)).min(self.window.n);
        if a.nz == 0 || b.nz == 0 {
            return Ok(self.zero_at(prec));
        }
        let v = a.v + b.v;
        if v >= prec {
            return Ok(self.zero_at(prec));
        }
        let len = ((prec - v) as usize).min(CAP);
        let f = &self.field;
        let mut buf = [0u32; CAP];
        for i in 0..(a.nz as usize).min(len) {
            let x = a.c[i] as u32;
            if x == 0 {
                continue;
            }
            for j in 0..(b.nz as usize).min(len - i) {
                let y = b.c[j] as u32;
                if y != 0 {
                    buf[i + j] = f.add(buf[i + j], f.mul(x, y));
                }
            }
        }
        self.normalize(v, prec, &buf, len)
    }

    pub fn inv(&self, a: &Ls) -> Result<Ls> {
        if a.nz == 0 {
            return Err(Error::PrecisionLoss("inverting a value not known to be nonzero".into()));
        }
        let v = -a.v;
        let rel = a.prec - a.v;
        let prec = (v + rel).min(self.window.n);
        let len = ((prec - v).max(0) as usize).min(CAP);
        let f = &self.field;
        let c0 = f.inv(a.c[0] as u32)?;
        let mut w = [0u32; CAP];
        if len > 0 {
            w[0] = c0;
        }
        for k in 1..len {
            let mut s = 0;
            for i in 1..=k.min(a.nz as usize - 1) {
                s = f.add(s, f.mul(a.c[i] as u32, w[k - i]));
            }
            w[k] = f.neg(f.mul(c0, s));
        }
        self.normalize(v, prec, &w, len)
    }

    /// Multiplication by t^k, exact.
    pub fn shift(&self, a: &Ls, k: i32) -> Result<Ls> {
        if a.nz == 0 {
            return Ok(self.zero_at((a.prec + k).min(self.window.n)));
        }
        let mut buf = [0u32; CAP];
        for i in 0..a.nz as usize {
            buf[i] = a.c[i] as u32;
        }
        let len = (a.prec - a.v) as usize;
        self.normalize(a.v + k, a.prec + k, &buf, len.min(CAP))
    }

    /// val(a) >= k, certified.
    pub fn val_at_least(&self, a: &Ls, k: i32) -> Result<bool> {
        match a.valuation() {
            Some(v) => Ok(v >= k),
            None if a.prec >= k => Ok(true),
            None => Err(Error::PrecisionLoss(format!("need precision {k}, have {}", a.prec))),
        }
    }

    /// Exact valuation; fails for a value not known to be nonzero.
    pub fn val(&self, a: &Ls) -> Result<i32> {
        a.valuation()
            .ok_or_else(|| Error::PrecisionLoss(format!("value vanishes to precision {}", a.prec)))
    }

    pub fn is_unit(&self, a: &Ls) -> bool {
        a.valuation() == Some(0)
    }

    /// Image in the residue field of an integral value.
    pub fn residue(&self, a: &Ls) -> Result<Fe> {
        if !self.val_at_least(a, 0)? {
            return Err(Error::NotIntegral);
        }
        a.coeff(0)
    }

    /// Reduction modulo p^m as coefficient list of t^0..t^{m-1}.
    pub fn truncate(&self, a: &Ls, m: i32) -> Result<Vec<Fe>> {
        if !self.val_at_least(a, 0)? {
            return Err(Error::NotIntegral);
        }
        (0..m).map(|e| a.coeff(e)).collect()
    }

    pub fn from_int(&self, n: i64) -> Ls {
        self.constant(self.field.from_int(n))
    }

    /// Uniform random element of p^lo / p^hi, as an element known to full precision.
    pub fn random<R: Rng>(&self, rng: &mut R, lo: i32, hi: i32) -> Result<Ls> {
        let coeffs: Vec<Fe> = (lo..hi).map(|_| rng.gen_range(0..self.q())).collect();
        self.from_coeffs(lo, &coeffs, self.window.n)
    }

    /// Random unit of o known through t^{hi-1}.
    pub fn random_unit<R: Rng>(&self, rng: &mut R, hi: i32) -> Result<Ls> {
        let mut coeffs: Vec<Fe> = (0..hi.max(1)).map(|_| rng.gen_range(0..self.q())).collect();
        coeffs[0] = rng.gen_range(1..self.q());
        self.from_coeffs(0, &coeffs, self.window.n)
    }
}

/// Square matrix over the local ring, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LMat {
    pub n: usize,
    pub e: Vec<Ls>,
}

impl LMat {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &Ls {
        &self.e[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Ls) {
        self.e[i * self.n + j] = v;
    }
}

impl LocalRing {
    pub fn identity(&self, n: usize) -> LMat {
        let mut e = vec![self.zero(); n * n];
        for i in 0..n {
            e[i * n + i] = self.one();
        }
        LMat { n, e }
    }

    pub fn zeros(&self, n: usize) -> LMat {
        LMat { n, e: vec![self.zero(); n * n] }
    }

    /// diag(t^{d_1}, ..., t^{d_n})
    pub fn diag_pow(&self, d: &[i32]) -> Result<LMat> {
        let n = d.len();
        let mut m = self.zeros(n);
        for (i, &k) in d.iter().enumerate() {
            m.set(i, i, self.monomial(k)?);
        }
        Ok(m)
    }

    /// Sigma_n = diag(t^{n-1}, ..., t, 1).
    pub fn sigma(&self, n: usize) -> Result<LMat> {
        let d: Vec<i32> = (0..n).map(|i| (n - 1 - i) as i32).collect();
        self.diag_pow(&d)
    }

    pub fn lift(&self, m: &FqMatrix) -> LMat {
        LMat { n: m.n, e: m.e.iter().map(|&x| self.constant(x)).collect() }
    }

    pub fn scalar(&self, n: usize, s: &Ls) -> LMat {
        let mut m = self.zeros(n);
        for i in 0..n {
            m.set(i, i, *s);
        }
        m
    }

    pub fn mat_mul(&self, a: &LMat, b: &LMat) -> Result<LMat> {
        let n = a.n;
        let mut e = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = self.zero();
                for k in 0..n {
                    acc = self.add(&acc, &self.mul(a.at(i, k), b.at(k, j))?)?;
                }
                e.push(acc);
            }
        }
        Ok(LMat { n, e })
    }

    pub fn mat_mul3(&self, a: &LMat, b: &LMat, c: &LMat) -> Result<LMat> {
        self.mat_mul(&self.mat_mul(a, b)?, c)
    }

    pub fn mat_add(&self, a: &LMat, b: &LMat) -> Result<LMat> {
        let e = a.e.iter().zip(&b.e).map(|(x, y)| self.add(x, y)).collect::<Result<_>>()?;
        Ok(LMat { n: a.n, e })
    }

    pub fn mat_sub(&self, a: &LMat, b: &LMat) -> Result<LMat> {
        let e = a.e.iter().zip(&b.e).map(|(x, y)| self.sub(x, y)).collect::<Result<_>>()?;
        Ok(LMat { n: a.n, e })
    }

    pub fn mat_scale(&self, s: &Ls, a: &LMat) -> Result<LMat> {
        let e = a.e.iter().map(|x| self.mul(s, x)).collect::<Result<_>>()?;
        Ok(LMat { n: a.n, e })
    }

    /// Gauss-Jordan with pivots of least valuation.
    pub fn mat_inv(&self, a: &LMat) -> Result<LMat> {
        let n = a.n;
        let mut m = a.clone();
        let mut inv = self.identity(n);
        for c in 0..n {
            let p = (c..n)
                .filter_map(|r| m.at(r, c).valuation().map(|v| (v, r)))
                .min()
                .map(|(_, r)| r)
                .ok_or_else(|| Error::PrecisionLoss("no certified pivot; matrix may be singular".into()))?;
            for j in 0..n {
                m.e.swap(p * n + j, c * n + j);
                inv.e.swap(p * n + j, c * n + j);
            }
            let pi = self.inv(m.at(c, c))?;
            for j in 0..n {
                let x = self.mul(m.at(c, j), &pi)?;
                m.set(c, j, x);
                let y = self.mul(inv.at(c, j), &pi)?;
                inv.set(c, j, y);
            }
            for r in 0..n {
                if r == c || m.at(r, c).nz == 0 {
                    continue;
                }
                let t = *m.at(r, c);
                for j in 0..n {
                    let x = self.sub(m.at(r, j), &self.mul(&t, m.at(c, j))?)?;
                    m.set(r, j, x);
                    let y = self.sub(inv.at(r, j), &self.mul(&t, inv.at(c, j))?)?;
                    inv.set(r, j, y);
                }
            }
        }
        Ok(inv)
    }

    pub fn det(&self, a: &LMat) -> Result<Ls> {
        let n = a.n;
        let mut m = a.clone();
        let mut d = self.one();
        for c in 0..n {
            let Some(p) = (c..n)
                .filter_map(|r| m.at(r, c).valuation().map(|v| (v, r)))
                .min()
                .map(|(_, r)| r)
            else {
                let prec = (c..n).map(|r| m.at(r, c).prec).min().unwrap();
                return self.mul(&d, &self.zero_at(prec));
            };
            if p != c {
                for j in 0..n {
                    m.e.swap(p * n + j, c * n + j);
                }
                d = self.neg(&d);
            }
            let piv = *m.at(c, c);
            d = self.mul(&d, &piv)?;
            if c + 1 == n {
                break;
            }
            let pi = self.inv(&piv)?;
            for r in c + 1..n {
                if m.at(r, c).nz == 0 {
                    continue;
                }
                let t = self.mul(m.at(r, c), &pi)?;
                for j in c..n {
                    let x = self.sub(m.at(r, j), &self.mul(&t, m.at(c, j))?)?;
                    m.set(r, j, x);
                }
            }
        }
        Ok(d)
    }

    /// g x g^{-1}
    pub fn conj(&self, g: &LMat, x: &LMat) -> Result<LMat> {
        self.mat_mul3(g, x, &self.mat_inv(g)?)
    }

    pub fn is_integral(&self, a: &LMat) -> Result<bool> {
        for x in &a.e {
            if !self.val_at_least(x, 0)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Membership in K = GL_n(o).
    pub fn in_k(&self, a: &LMat) -> Result<bool> {
        Ok(self.is_integral(a)? && self.is_unit(&self.det(a)?))
    }

    /// Reduction modulo p; requires integral entries.
    pub fn reduce(&self, a: &LMat) -> Result<FqMatrix> {
        let e = a.e.iter().map(|x| self.residue(x)).collect::<Result<_>>()?;
        Ok(FqMatrix { n: a.n, e })
    }

    /// Membership in K(m): K with last row congruent to (0, ..., 0, 1) mod p^m.
    pub fn in_k_level(&self, a: &LMat, m: i32) -> Result<bool> {
        if !self.in_k(a)? {
            return Ok(false);
        }
        let n = a.n;
        for j in 0..n - 1 {
            if !self.val_at_least(a.at(n - 1, j), m)? {
                return Ok(false);
            }
        }
        let c = self.sub(a.at(n - 1, n - 1), &self.one())?;
        self.val_at_least(&c, m)
    }

    /// Valuation of the determinant.
    pub fn det_val(&self, a: &LMat) -> Result<i32> {
        self.val(&self.det(a)?)
    }

    /// Least valuation over the entries.
    pub fn min_val(&self, a: &LMat) -> Result<i32> {
        a.e.iter()
            .filter_map(|x| x.valuation())
            .min()
            .ok_or_else(|| Error::PrecisionLoss("zero matrix".into()))
    }
}

/// Entry condition val(x_ij - [shift] 1) >= bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryCond {
    pub bound: i32,
    pub minus_one: bool,
}

/// Subgroup of GL_n(F) cut out by entrywise valuation conditions together
/// with invertibility of the determinant in o.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternGroup {
    pub n: usize,
    pub cond: Vec<EntryCond>,
}

impl PatternGroup {
    pub fn from_bounds(n: usize, bounds: &[i32]) -> Self {
        PatternGroup { n, cond: bounds.iter().map(|&b| EntryCond { bound: b, minus_one: false }).collect() }
    }

    pub fn at(&self, i: usize, j: usize) -> EntryCond {
        self.cond[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, c: EntryCond) {
        self.cond[i * self.n + j] = c;
    }

    pub fn k(n: usize) -> Self {
        Self::from_bounds(n, &vec![0; n * n])
    }

    /// K(m), the stabiliser of (0, ..., 0, 1) modulo p^m.
    pub fn k_level(n: usize, m: i32) -> Self {
        let mut p = Self::k(n);
        if m > 0 {
            for j in 0..n - 1 {
                p.set(n - 1, j, EntryCond { bound: m, minus_one: false });
            }
            p.set(n - 1, n - 1, EntryCond { bound: m, minus_one: true });
        }
        p
    }

    /// U^r = 1 + M_n(p^r).
    pub fn principal(n: usize, r: i32) -> Self {
        let mut p = Self::from_bounds(n, &vec![r; n * n]);
        for i in 0..n {
            p.set(i, i, EntryCond { bound: r, minus_one: true });
        }
        p
    }

    /// g P g^{-1} for g = diag(t^{d_i}).
    pub fn conjugate(&self, d: &[i32]) -> Self {
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let c = self.at(i, j);
                    out.set(i, j, EntryCond { bound: c.bound + d[i] - d[j], minus_one: c.minus_one });
                }
            }
        }
        out
    }

    /// Entrywise intersection.
    pub fn intersect(&self, o: &Self) -> Result<Self> {
        let mut out = self.clone();
        for idx in 0..self.cond.len() {
            let (a, b) = (self.cond[idx], o.cond[idx]);
            out.cond[idx] = match (a.minus_one, b.minus_one) {
                (false, false) => EntryCond { bound: a.bound.max(b.bound), minus_one: false },
                (true, true) => EntryCond { bound: a.bound.max(b.bound), minus_one: true },
                (true, false) | (false, true) => {
                    let (one, plain) = if a.minus_one { (a, b) } else { (b, a) };
                    if plain.bound > 0 && one.bound > 0 {
                        return Err(Error::InvalidParameter("empty intersection".into()));
                    }
                    if one.bound > 0 {
                        one
                    } else {
                        plain
                    }
                }
            };
        }
        Ok(out)
    }

    pub fn bounds(&self) -> Vec<i32> {
        self.cond.iter().map(|c| c.bound).collect()
    }

    pub fn contains(&self, ring: &LocalRing, x: &LMat) -> Result<bool> {
        let one = ring.one();
        for i in 0..self.n {
            for j in 0..self.n {
                let c = self.at(i, j);
                let v = if c.minus_one { ring.sub(x.at(i, j), &one)? } else { *x.at(i, j) };
                if !ring.val_at_least(&v, c.bound)? {
                    return Ok(false);
                }
            }
        }
        Ok(ring.is_unit(&ring.det(x)?))
    }

    /// Random element: each entry uniform in its allowed range truncated
    /// `depth` digits above the bound; residues are redrawn until the
    /// determinant is a unit.
    pub fn sample<R: Rng>(&self, ring: &LocalRing, rng: &mut R, depth: i32) -> Result<LMat> {
        let n = self.n;
        for _ in 0..10_000 {
            let mut m = ring.zeros(n);
            for i in 0..n {
                for j in 0..n {
                    let c = self.at(i, j);
                    let mut x = ring.random(rng, c.bound, c.bound + depth)?;
                    if c.minus_one {
                        x = ring.add(&x, &ring.one())?;
                    }
                    m.set(i, j, x);
                }
            }
            if ring.is_unit(&ring.det(&m)?) {
                return Ok(m);
            }
        }
        Err(Error::SearchBudgetExceeded("pattern sampling".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring(q: u64, b: i32, n: i32) -> LocalRing {
        LocalRing::new(Arc::new(FieldDescriptor::from_order(q).unwrap()), Window { b, n }).unwrap()
    }

    #[test]
    fn geometric_series() {
        let r = ring(3, 2, 10);
        let one_minus_t = r.sub(&r.one(), &r.monomial(1).unwrap()).unwrap();
        let inv = r.inv(&one_minus_t).unwrap();
        assert_eq!(inv.terms().len(), 10);
        assert!(inv.terms().iter().all(|&(_, c)| c == 1));
        let back = r.mul(&inv, &one_minus_t).unwrap();
        assert_eq!(back, r.one());
    }

    #[test]
    fn precision_tracking() {
        let r = ring(2, 4, 8);
        let t_inv = r.monomial(-3).unwrap();
        let x = r.mul(&t_inv, &r.one()).unwrap();
        // 1 is known mod t^8, so t^-3 * 1 is known mod t^5
        assert_eq!(x.precision(), 5);
        assert!(r.monomial(-5).is_err());
        let z = r.sub(&r.one(), &r.one()).unwrap();
        assert!(r.inv(&z).is_err());
    }

    #[test]
    fn pattern_conjugation() {
        let k2 = PatternGroup::k_level(2, 2);
        let c = k2.conjugate(&[1, 0]);
        assert_eq!(c.bounds(), vec![0, 1, 1, 2]);
    }

    #[test]
    fn matrix_inverse_roundtrip() {
        let r = ring(5, 6, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = PatternGroup::k(3);
        for _ in 0..20 {
            let a = k.sample(&r, &mut rng, 6).unwrap();
            let b = r.mat_inv(&a).unwrap();
            let prod = r.mat_mul(&a, &b).unwrap();
            let red = r.reduce(&prod).unwrap();
            assert_eq!(red, FqMatrix::identity(3));
            assert!(r.in_k(&b).unwrap());
        }
    }

    #[test]
    fn level_membership() {
        let r = ring(2, 4, 10);
        let k3 = PatternGroup::k_level(2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            let a = k3.sample(&r, &mut rng, 5).unwrap();
            assert!(r.in_k_level(&a, 3).unwrap());
            assert!(k3.contains(&r, &a).unwrap());
        }
    }

    #[test]
    fn window_rejects_oversize() {
        let f = Arc::new(FieldDescriptor::from_order(2).unwrap());
        assert!(LocalRing::new(f, Window { b: 50, n: 60 }).is_err());
    }
}
