//! Coset representatives for K \ G / K(m), the Mackey sum over them and the
//! resulting conductor and oldform dimensions of depth-zero cuspidals.

use std::collections::{HashMap, HashSet};
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::characters::{invariant_dim, lower_unipotent_radical, CharacterTable, GroupContext};
use crate::error::{Error, Result};
use crate::field::{Fe, FieldDescriptor};
use crate::group::FqMatrix;
use crate::local::{LMat, LocalRing, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A1,
    A2,
    B,
    C,
    D,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A1" => Ok(Family::A1),
            "A2" => Ok(Family::A2),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            _ => Err(Error::UnknownFamily(s.into())),
        }
    }
}

/// One representative. `alpha` lists (alpha_1, ..., alpha_{n-1}); residues are
/// integer codes of elements of o/p^m (digit e is the coefficient of t^e).
#[derive(Clone, Debug)]
pub struct CosetRep {
    pub family: Family,
    pub alpha: Vec<u32>,
    /// A2 only: the index j of the special row, 1 <= j <= n-1.
    pub j: usize,
    pub residues: Vec<u64>,
    pub matrix: LMat,
}

impl CosetRep {
    pub fn is_diagonal(&self) -> bool {
        matches!(self.family, Family::B | Family::D) || (self.family == Family::C && self.residues.iter().all(|&r| r == 0))
    }

    /// Exponents of the diagonal part, top to bottom.
    pub fn exponents(&self) -> Vec<i32> {
        diag_exponents(&self.alpha)
    }
}

/// Bounds on the infinite families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub alpha_max: u32,
    pub residue_cap: usize,
    pub seed: u64,
}

impl Truncation {
    pub fn for_level(m: u32) -> Self {
        Truncation { alpha_max: m + 1, residue_cap: 256, seed: 0 }
    }
}

/// diag(t^{alpha_{n-1}}, ..., t^{alpha_1}, 1) as exponent list.
pub fn diag_exponents(alpha: &[u32]) -> Vec<i32> {
    let mut d: Vec<i32> = alpha.iter().rev().map(|&a| a as i32).collect();
    d.push(0);
    d
}

pub fn binomial(n: i64, k: i64) -> u64 {
    if k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n as u128 - i as u128) / (i as u128 + 1);
    }
    r as u64
}

/// Non-decreasing chains 0 <= alpha_1 <= ... <= alpha_{len} <= max.
pub fn alpha_chains(len: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(len: usize, lo: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for a in lo..=max {
            cur.push(a);
            rec(len, a, max, cur, out);
            cur.pop();
        }
    }
    rec(len, 0, max, &mut cur, &mut out);
    out
}

/// D_n(m): strict chains 0 < alpha_1 < ... < alpha_{n-1} < m.
pub fn d_family(n: usize, m: u32) -> Vec<Vec<u32>> {
    alpha_chains(n - 1, m)
        .into_iter()
        .filter(|a| a.first().is_none_or(|&x| x > 0) && a.windows(2).all(|w| w[0] < w[1]) && a.last().is_none_or(|&x| x < m))
        .collect()
}

pub fn is_strict_chain(alpha: &[u32], m: u32) -> bool {
    alpha.first().is_none_or(|&x| x > 0) && alpha.windows(2).all(|w| w[0] < w[1]) && alpha.last().is_none_or(|&x| x < m)
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    /// o / p^m
    Any,
    /// p^k / p^m
    Deep(u32),
    /// (o / p^m)^x
    Unit,
    /// 0 or an element of valuation < a
    Shallow(u32),
}

fn slot_count(s: Slot, q: u64, m: u32) -> u64 {
    let qm = q.pow(m);
    match s {
        Slot::Any => qm,
        Slot::Deep(k) => q.pow(m.saturating_sub(k)),
        Slot::Unit => qm - qm / q,
        Slot::Shallow(a) => {
            let a = a.min(m);
            1 + qm - q.pow(m - a)
        }
    }
}

fn slot_code(s: Slot, q: u64, m: u32, idx: u64) -> u64 {
    match s {
        Slot::Any => idx,
        Slot::Deep(k) => idx * q.pow(k.min(m)),
        Slot::Unit => (idx % (q - 1) + 1) + q * (idx / (q - 1)),
        Slot::Shallow(a) => {
            if idx == 0 {
                return 0;
            }
            let a = a.min(m);
            let qa = q.pow(a);
            let k = idx - 1;
            (k % (qa - 1) + 1) + qa * (k / (qa - 1))
        }
    }
}

/// Every combination when few enough, a seeded sample of `cap` otherwise.
fn residue_tuples(slots: &[Slot], q: u64, m: u32, cap: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<u64>> {
    let counts: Vec<u64> = slots.iter().map(|&s| slot_count(s, q, m)).collect();
    let total = counts.iter().try_fold(1u64, |acc, &c| acc.checked_mul(c));
    match total {
        Some(t) if t as u128 <= cap as u128 => (0..t)
            .map(|mut code| {
                slots
                    .iter()
                    .zip(&counts)
                    .map(|(&s, &c)| {
                        let i = code % c;
                        code /= c;
                        slot_code(s, q, m, i)
                    })
                    .collect()
            })
            .collect(),
        _ => (0..cap)
            .map(|_| slots.iter().zip(&counts).map(|(&s, &c)| slot_code(s, q, m, rng.gen_range(0..c))).collect())
            .collect(),
    }
}

pub fn residue_digits(code: u64, q: u64, m: u32) -> Vec<Fe> {
    let mut c = code;
    (0..m)
        .map(|_| {
            let d = (c % q) as Fe;
            c /= q;
            d
        })
        .collect()
}

fn lift(ring: &LocalRing, code: u64, m: u32) -> Result<crate::local::Ls> {
    ring.from_coeffs(0, &residue_digits(code, ring.q() as u64, m), ring.window.n)
}

fn a1_matrix(ring: &LocalRing, n: usize, m: u32, res: &[u64]) -> Result<LMat> {
    let mut a = ring.identity(n);
    for c in 0..n {
        a.set(n - 1, c, lift(ring, res[c], m)?);
    }
    Ok(a)
}

/// Rows: identity except row s = n-j-1 = (w1 | w2 | w3 | x) and the last row e_s.
fn a2_matrix(ring: &LocalRing, n: usize, m: u32, j: usize, res: &[u64]) -> Result<LMat> {
    let s = n - j - 1;
    let mut a = ring.identity(n);
    for c in 0..n {
        a.set(s, c, lift(ring, res[c], m)?);
    }
    for c in 0..n {
        a.set(n - 1, c, if c == s { ring.one() } else { ring.zero() });
    }
    Ok(a)
}

fn a2_slots(n: usize, j: usize) -> Vec<Slot> {
    let s = n - j - 1;
    (0..n)
        .map(|c| match c {
            c if c < s => Slot::Any,
            c if c == n - 1 => Slot::Unit,
            _ => Slot::Deep(1),
        })
        .collect()
}

/// Stream of representatives of one family at level m.
pub fn enumerate_family(ring: &LocalRing, family: Family, n: usize, m: u32, trunc: &Truncation) -> Result<Vec<CosetRep>> {
    if n < 2 {
        return Err(Error::InvalidParameter("coset families need n >= 2".into()));
    }
    let q = ring.q() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(trunc.seed);
    let mut out = Vec::new();
    match family {
        Family::A1 | Family::A2 if m == 0 => {}
        Family::A1 => {
            let mut slots = vec![Slot::Any; n - 1];
            slots.push(Slot::Unit);
            for res in residue_tuples(&slots, q, m, trunc.residue_cap, &mut rng) {
                let matrix = a1_matrix(ring, n, m, &res)?;
                out.push(CosetRep { family, alpha: vec![], j: 0, residues: res, matrix });
            }
        }
        Family::A2 => {
            for j in 1..n {
                for res in residue_tuples(&a2_slots(n, j), q, m, trunc.residue_cap, &mut rng) {
                    let matrix = a2_matrix(ring, n, m, j, &res)?;
                    out.push(CosetRep { family, alpha: vec![], j, residues: res, matrix });
                }
            }
        }
        Family::B | Family::D => {
            let chains = if family == Family::D { d_family(n, m) } else { alpha_chains(n - 1, trunc.alpha_max) };
            for alpha in chains {
                let matrix = ring.diag_pow(&diag_exponents(&alpha))?;
                out.push(CosetRep { family, alpha, j: 0, residues: vec![], matrix });
            }
        }
        Family::C => {
            for alpha in alpha_chains(n - 1, trunc.alpha_max) {
                let d = diag_exponents(&alpha);
                let slots: Vec<Slot> = (0..n - 1).map(|c| Slot::Shallow(d[c] as u32)).collect();
                let mut seen = HashSet::new();
                let zero = vec![0u64; n - 1];
                let tuples = std::iter::once(zero).chain(residue_tuples(&slots, q, m, trunc.residue_cap, &mut rng));
                for res in tuples {
                    if !seen.insert(res.clone()) {
                        continue;
                    }
                    let mut matrix = ring.diag_pow(&d)?;
                    for (c, &r) in res.iter().enumerate() {
                        matrix.set(n - 1, c, lift(ring, r, m)?);
                    }
                    out.push(CosetRep { family, alpha: alpha.clone(), j: 0, residues: res, matrix });
                }
            }
        }
    }
    Ok(out)
}

/// Products b * a2 with b diagonal in B and a2 in A2.
pub fn enumerate_a2b(ring: &LocalRing, n: usize, m: u32, trunc: &Truncation) -> Result<Vec<CosetRep>> {
    let a2 = enumerate_family(ring, Family::A2, n, m, trunc)?;
    let mut out = Vec::with_capacity(a2.len());
    for alpha in alpha_chains(n - 1, trunc.alpha_max) {
        let b = ring.diag_pow(&diag_exponents(&alpha))?;
        for a in &a2 {
            out.push(CosetRep {
                family: Family::A2,
                alpha: alpha.clone(),
                j: a.j,
                residues: a.residues.clone(),
                matrix: ring.mat_mul(&b, &a.matrix)?,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub n: usize,
    pub q: u64,
    pub m: u32,
    pub a1: u64,
    pub a2: u64,
    pub orbit_size: u64,
    pub passed: bool,
}

/// Checks that a -> e_n a^{-1} mod p^m maps A1 and A2 bijectively onto the
/// vectors of (o/p^m)^n with a unit coordinate.
pub fn verify_coset_partition(field: Arc<FieldDescriptor>, n: usize, m: u32) -> Result<PartitionReport> {
    if n < 2 || m == 0 {
        return Err(Error::InvalidParameter("partition check needs n >= 2 and m >= 1".into()));
    }
    let q = field.q() as u64;
    let qm = q.pow(m);
    let expected = (qm as u128).pow(n as u32) - ((qm / q) as u128).pow(n as u32);
    let ring = LocalRing::new(field, Window { b: 0, n: m as i32 })?;
    let all = Truncation { alpha_max: 0, residue_cap: usize::MAX, seed: 0 };
    let mut seen = HashSet::new();
    let mut counts = [0u64; 2];
    for (fi, fam) in [Family::A1, Family::A2].into_iter().enumerate() {
        for rep in enumerate_family(&ring, fam, n, m, &all)? {
            counts[fi] += 1;
            let inv = ring.mat_inv(&rep.matrix)?;
            let mut code: u128 = 0;
            let mut primitive = false;
            for c in (0..n).rev() {
                let x = inv.at(n - 1, c);
                let digits = ring.truncate(x, m as i32)?;
                primitive |= digits[0] != 0;
                let v = digits.iter().rev().fold(0u64, |acc, &d| acc * q + d as u64);
                code = code * qm as u128 + v as u128;
            }
            if !primitive {
                return Err(Error::PartitionFailure(format!("{:?} {:?} maps outside the orbit", fam, rep.residues)));
            }
            if !seen.insert(code) {
                return Err(Error::PartitionFailure(format!("vector {code} hit twice, last by {:?} {:?}", fam, rep.residues)));
            }
        }
    }
    let orbit = seen.len() as u128;
    if orbit != expected {
        return Err(Error::PartitionFailure(format!("covered {orbit} of {expected} orbit vectors")));
    }
    Ok(PartitionReport { n, q, m, a1: counts[0], a2: counts[1], orbit_size: orbit as u64, passed: true })
}

/// Zero pattern of the reduction of K ∩ g K(m) g^{-1} for g = diag(t^d):
/// entry (i, j) is forced to vanish when its bound is positive; the corner is
/// forced to 1 when m >= 1.
pub fn diagonal_image_pattern(d: &[i32], m: u32) -> Vec<bool> {
    let n = d.len();
    let mut forced = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let base = if i == n - 1 { m as i32 } else { 0 };
            forced[i * n + j] = base + d[i] - d[j] >= 1;
        }
    }
    forced
}

pub fn pattern_elements(ctx: &GroupContext, forced_zero: &[bool], corner_one: bool) -> Vec<u32> {
    let n = ctx.n;
    (0..ctx.group.order() as u32)
        .filter(|&g| {
            let e = ctx.group.elem(g);
            forced_zero.iter().zip(e).all(|(&z, &x)| !z || x == 0) && (!corner_one || e[n * n - 1] == 1)
        })
        .collect()
}

fn expect_reduction(ring: &LocalRing, y: &LMat, target: &FqMatrix, what: &str) -> Result<()> {
    if !ring.in_k(y)? {
        return Err(Error::WitnessConjugationFailure(format!("{what}: conjugate not in K")));
    }
    if ring.reduce(y)? != *target {
        return Err(Error::WitnessConjugationFailure(format!("{what}: conjugate reduces wrongly")));
    }
    Ok(())
}

/// For g = [[D, 0], [v, 1]] in C with v != 0 and r the last nonzero column of
/// v, certifies that the reduction of K ∩ g K(m) g^{-1} contains every
/// 1 + c E_{kl} with k > r >= l. Returns r + 1, the column count of the
/// radical N_{r+1, n-r-1} so generated.
pub fn certify_c(ring: &LocalRing, rep: &CosetRep, m: u32) -> Result<usize> {
    let g = &rep.matrix;
    let n = g.n;
    let d = rep.exponents();
    let r = (0..n - 1)
        .rev()
        .find(|&c| rep.residues[c] != 0)
        .ok_or_else(|| Error::InvalidParameter("diagonal element has no witness".into()))?;
    let v_r = *g.at(n - 1, r);
    let basis = ring.field.prime_basis();
    let g_inv = ring.mat_inv(g)?;
    for k in r + 1..n {
        for l in 0..=r {
            for &c in &basis {
                let mut x = ring.identity(n);
                if k == n - 1 {
                    let s = ring.mul(&ring.monomial_scaled(c, d[l])?, &ring.inv(&v_r)?)?;
                    x.set(r, l, ring.add(x.at(r, l), &s)?);
                } else {
                    x.set(k, l, ring.monomial_scaled(c, d[l] - d[k])?);
                }
                if !ring.in_k_level(&x, m as i32)? {
                    return Err(Error::WitnessConjugationFailure(format!("C witness ({k},{l}) not in K(m)")));
                }
                let y = ring.mat_mul3(g, &x, &g_inv)?;
                let mut target = FqMatrix::identity(n);
                target.set(k, l, c);
                expect_reduction(ring, &y, &target, "C witness")?;
            }
        }
    }
    Ok(r + 1)
}

/// For g = b a2 in A2 B, certifies that the reduction of K ∩ g K(m) g^{-1}
/// contains the radical N_{n-1,1}.
pub fn certify_a2b(ring: &LocalRing, rep: &CosetRep, m: u32) -> Result<()> {
    let g = &rep.matrix;
    let n = g.n;
    let s = n - rep.j - 1;
    let d = rep.exponents();
    let w: Vec<_> = rep.residues.iter().map(|&r| lift(ring, r, m)).collect::<Result<_>>()?;
    let basis = ring.field.prime_basis();
    let g_inv = ring.mat_inv(g)?;
    for l in 0..n - 1 {
        for &beta in &basis {
            let (mut a, mut b, mut c) = (vec![0 as Fe; n], vec![0 as Fe; n], 0 as Fe);
            match l.cmp(&s) {
                std::cmp::Ordering::Less => a[l] = beta,
                std::cmp::Ordering::Equal => c = beta,
                std::cmp::Ordering::Greater => b[l] = beta,
            }
            let cw = ring.monomial_scaled(c, d[s])?;
            let mut x = ring.identity(n);
            for t in 0..n - 1 {
                if t == s {
                    continue;
                }
                let coef = if t < s { a[t] } else { b[t] };
                let e = ring.add(&ring.monomial_scaled(coef, d[t])?, &ring.mul(&cw, &w[t])?)?;
                x.set(s, t, e);
            }
            x.set(s, n - 1, ring.mul(&cw, &w[n - 1])?);
            if !ring.in_k_level(&x, m as i32)? {
                return Err(Error::WitnessConjugationFailure(format!("A2 witness column {l} not in K(m)")));
            }
            let y = ring.mat_mul3(g, &x, &g_inv)?;
            let mut target = FqMatrix::identity(n);
            target.set(n - 1, l, beta);
            expect_reduction(ring, &y, &target, "A2 witness")?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyTally {
    pub diagonal: u64,
    pub diagonal_nonzero: u64,
    pub c_certified: u64,
    pub a2b_certified: u64,
    pub sampled: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OldformReport {
    pub n: usize,
    pub q: u64,
    pub row: usize,
    pub m: u32,
    pub dimension: u64,
    pub expected: u64,
    pub d_size: u64,
    pub tally: FamilyTally,
    pub truncation: Truncation,
}

/// Mackey sums for a fixed cuspidal row.
pub struct MackeyEngine<'a> {
    pub ctx: &'a GroupContext,
    pub table: &'a CharacterTable,
    pub row: usize,
    diag_cache: HashMap<(Vec<bool>, bool), u64>,
    radical_cache: HashMap<usize, u64>,
}

impl<'a> MackeyEngine<'a> {
    pub fn new(ctx: &'a GroupContext, table: &'a CharacterTable, row: usize) -> Result<Self> {
        if ctx.n < 2 {
            return Err(Error::InvalidParameter("depth-zero engine needs n >= 2".into()));
        }
        if !table.cuspidal[row] {
            return Err(Error::NotCuspidal(row));
        }
        Ok(MackeyEngine { ctx, table, row, diag_cache: HashMap::new(), radical_cache: HashMap::new() })
    }

    pub fn ring(&self, m: u32) -> Result<LocalRing> {
        let b = 2 * (m as i32 + 2);
        LocalRing::new(self.ctx.field.clone(), Window { b, n: 3 * (m as i32 + 2) + b })
    }

    pub fn diagonal_contribution(&mut self, d: &[i32], m: u32) -> Result<u64> {
        let key = (diagonal_image_pattern(d, m), m >= 1);
        if let Some(&v) = self.diag_cache.get(&key) {
            return Ok(v);
        }
        let h = pattern_elements(self.ctx, &key.0, key.1);
        let v = invariant_dim(self.ctx, self.table, self.row, &h)?;
        self.diag_cache.insert(key, v);
        Ok(v)
    }

    fn radical_dim(&mut self, n1: usize) -> Result<u64> {
        if let Some(&v) = self.radical_cache.get(&n1) {
            return Ok(v);
        }
        let h = lower_unipotent_radical(self.ctx, n1);
        let v = invariant_dim(self.ctx, self.table, self.row, &h)?;
        self.radical_cache.insert(n1, v);
        Ok(v)
    }

    /// dim Hom over the reduction of K ∩ g K(m) g^{-1}; zero for certified
    /// non-diagonal representatives.
    pub fn contribution(&mut self, ring: &LocalRing, rep: &CosetRep, m: u32) -> Result<u64> {
        if rep.is_diagonal() {
            return self.diagonal_contribution(&rep.exponents(), m);
        }
        let n1 = match rep.family {
            Family::C => certify_c(ring, rep, m)?,
            Family::A2 => {
                certify_a2b(ring, rep, m)?;
                self.ctx.n - 1
            }
            f => return Err(Error::UnknownFamily(format!("{f:?} has no vanishing certificate"))),
        };
        let v = self.radical_dim(n1)?;
        if v != 0 {
            return Err(Error::VerificationFailure(format!("radical N with {n1} columns has {v} invariants")));
        }
        Ok(0)
    }

    pub fn oldform_dimension(&mut self, m: u32, trunc: &Truncation) -> Result<OldformReport> {
        let n = self.ctx.n;
        let ring = self.ring(m)?;
        let mut tally = FamilyTally::default();
        let mut dim = 0;
        let c_family = if m == 0 {
            enumerate_family(&ring, Family::B, n, m, trunc)?
        } else {
            enumerate_family(&ring, Family::C, n, m, trunc)?
        };
        for rep in &c_family {
            let v = self.contribution(&ring, rep, m)?;
            if rep.is_diagonal() {
                tally.diagonal += 1;
                let expect = u64::from(m >= 1 && is_strict_chain(&rep.alpha, m));
                if v != expect {
                    return Err(Error::VerificationFailure(format!(
                        "diagonal alpha {:?} at m={m} contributes {v}, expected {expect}",
                        rep.alpha
                    )));
                }
                tally.diagonal_nonzero += v;
            } else {
                tally.c_certified += 1;
            }
            dim += v;
        }
        if m >= 1 {
            for rep in enumerate_a2b(&ring, n, m, trunc)? {
                dim += self.contribution(&ring, &rep, m)?;
                tally.a2b_certified += 1;
            }
        }
        let q = self.ctx.field.q() as u64;
        let full = (q.pow(m) as u128).checked_pow(n as u32 - 1).unwrap_or(u128::MAX);
        tally.sampled = full > trunc.residue_cap as u128;
        let expected = if m == 0 { 0 } else { binomial(m as i64 - 1, n as i64 - 1) };
        let report = OldformReport {
            n,
            q,
            row: self.row,
            m,
            dimension: dim,
            expected,
            d_size: d_family(n, m).len() as u64,
            tally,
            truncation: *trunc,
        };
        if dim != expected || report.d_size != expected {
            return Err(Error::VerificationFailure(format!(
                "level {m}: Mackey sum {dim}, |D| = {}, binomial {expected}",
                report.d_size
            )));
        }
        Ok(report)
    }

    /// Least m with a nonzero K(m)-fixed vector, scanning m = 0, 1, ...
    pub fn conductor(&mut self, m_max: u32, seed: u64) -> Result<(u32, Vec<OldformReport>)> {
        let mut reports = Vec::new();
        for m in 0..=m_max {
            let trunc = Truncation { seed, ..Truncation::for_level(m) };
            let r = self.oldform_dimension(m, &trunc)?;
            let dim = r.dimension;
            reports.push(r);
            if dim > 0 {
                if dim != 1 {
                    return Err(Error::VerificationFailure(format!("first nonzero level {m} has dimension {dim}")));
                }
                return Ok((m, reports));
            }
        }
        Err(Error::VerificationFailure(format!("no fixed vector up to level {m_max}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::character_table;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(1, 1), 1);
        assert_eq!(binomial(1, 2), 0);
        for n in 2..5 {
            for m in 0..9 {
                assert_eq!(d_family(n, m).len() as u64, binomial(m as i64 - 1, n as i64 - 1));
            }
        }
    }

    #[test]
    fn d_examples() {
        assert_eq!(d_family(2, 2), vec![vec![1]]);
        assert_eq!(d_family(3, 3), vec![vec![1, 2]]);
        assert!(d_family(3, 2).is_empty());
    }

    #[test]
    fn family_name_parsing() {
        assert_eq!("c".parse::<Family>().unwrap(), Family::C);
        assert!(matches!("E".parse::<Family>(), Err(Error::UnknownFamily(_))));
    }

    #[test]
    fn a1_count() {
        for q in [2u64, 3] {
            let f = Arc::new(FieldDescriptor::from_order(q).unwrap());
            let ring = LocalRing::new(f, Window { b: 0, n: 1 }).unwrap();
            let all = Truncation { alpha_max: 0, residue_cap: usize::MAX, seed: 0 };
            let a1 = enumerate_family(&ring, Family::A1, 2, 1, &all).unwrap();
            assert_eq!(a1.len() as u64, q * (q - 1));
        }
    }

    #[test]
    fn partition_examples() {
        let f2 = Arc::new(FieldDescriptor::from_order(2).unwrap());
        let r = verify_coset_partition(f2.clone(), 2, 1).unwrap();
        assert_eq!((r.orbit_size, r.a1, r.a2), (3, 2, 1));
        assert_eq!(verify_coset_partition(f2, 3, 1).unwrap().orbit_size, 7);
        let f3 = Arc::new(FieldDescriptor::from_order(3).unwrap());
        assert_eq!(verify_coset_partition(f3, 2, 2).unwrap().orbit_size, 72);
    }

    #[test]
    fn sigma_image_is_bop() {
        let ctx = GroupContext::from_order(2, 3).unwrap();
        let h = pattern_elements(&ctx, &diagonal_image_pattern(&[1, 0], 2), true);
        assert_eq!(h, crate::bessel::bop(&ctx));
        let ctx = GroupContext::from_order(3, 2).unwrap();
        let h = pattern_elements(&ctx, &diagonal_image_pattern(&[2, 1, 0], 3), true);
        assert_eq!(h, crate::bessel::bop(&ctx));
    }

    #[test]
    fn oldforms_gl2_f3() {
        let ctx = GroupContext::from_order(2, 3).unwrap();
        let t = character_table(&ctx, 0).unwrap();
        let row = t.cuspidal_rows()[0];
        let mut e = MackeyEngine::new(&ctx, &t, row).unwrap();
        let (c, _) = e.conductor(4, 0).unwrap();
        assert_eq!(c, 2);
        let r = e.oldform_dimension(3, &Truncation::for_level(3)).unwrap();
        assert_eq!(r.dimension, 2);
    }

    #[test]
    fn gl3_level_two_vanishes() {
        let ctx = GroupContext::from_order(3, 2).unwrap();
        let t = character_table(&ctx, 0).unwrap();
        let row = t.cuspidal_rows()[0];
        let mut e = MackeyEngine::new(&ctx, &t, row).unwrap();
        assert_eq!(e.oldform_dimension(2, &Truncation::for_level(2)).unwrap().dimension, 0);
        assert_eq!(e.oldform_dimension(3, &Truncation::for_level(3)).unwrap().dimension, 1);
    }
}
