//! Unramified minimax strata and sampled verification of the group lemmas
//! behind the minimax newform.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, FieldDescriptor};
use crate::local::{EntryCond, LMat, LocalRing, Ls, PatternGroup, Window};
use crate::modp::ComputationField;

/// Polynomials over F_q, lowest degree first.
mod fq_poly {
    use crate::field::{Fe, FieldDescriptor};

    pub fn trim(mut a: Vec<Fe>) -> Vec<Fe> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn sub(f: &FieldDescriptor, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
        let n = a.len().max(b.len());
        trim((0..n).map(|i| f.sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0))).collect())
    }

    pub fn rem(f: &FieldDescriptor, a: &[Fe], m: &[Fe]) -> Vec<Fe> {
        let mut r = trim(a.to_vec());
        let lead = f.inv(*m.last().unwrap()).unwrap();
        while r.len() >= m.len() {
            let c = f.mul(*r.last().unwrap(), lead);
            let shift = r.len() - m.len();
            for (i, &x) in m.iter().enumerate() {
                r[shift + i] = f.sub(r[shift + i], f.mul(c, x));
            }
            r = trim(r);
        }
        r
    }

    pub fn mul_mod(f: &FieldDescriptor, a: &[Fe], b: &[Fe], m: &[Fe]) -> Vec<Fe> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(x, y));
            }
        }
        rem(f, &out, m)
    }

    pub fn pow_mod(f: &FieldDescriptor, a: &[Fe], mut e: u64, m: &[Fe]) -> Vec<Fe> {
        let mut base = rem(f, a, m);
        let mut acc = vec![1];
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod(f, &acc, &base, m);
            }
            base = mul_mod(f, &base, &base, m);
            e >>= 1;
        }
        acc
    }

    pub fn gcd(f: &FieldDescriptor, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
        let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
        while !b.is_empty() {
            let r = rem(f, &a, &b);
            a = b;
            b = r;
        }
        a
    }

    /// Degree-n f is irreducible iff gcd(x^{q^i} - x, f) = 1 for i <= n/2.
    pub fn is_irreducible(f: &FieldDescriptor, poly: &[Fe]) -> bool {
        let poly = trim(poly.to_vec());
        let n = poly.len().saturating_sub(1);
        if n == 0 {
            return false;
        }
        let q = f.q() as u64;
        let x = vec![0, 1];
        let mut xq = x.clone();
        for _ in 0..n / 2 {
            xq = pow_mod(f, &xq, q, &poly);
            if gcd(f, &sub(f, &xq, &x), &poly).len() > 1 {
                return false;
            }
        }
        true
    }
}

pub use fq_poly::is_irreducible as is_irreducible_fq;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Companion,
    Bprime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CosetVariant {
    /// o_E^x U^r
    Units,
    /// (1 + p_E) U^r
    OnePlusPE,
}

/// Characteristic polynomial det(X - A), highest coefficient first
/// (Berkowitz, division free).
pub fn charpoly(ring: &LocalRing, a: &LMat) -> Result<Vec<Ls>> {
    let n = a.n;
    let mut v = vec![ring.one()];
    for r in 0..n {
        // column R = a[0..r][r], row C = a[r][0..r]
        let mut t = vec![ring.one(), ring.neg(a.at(r, r))];
        let mut col: Vec<Ls> = (0..r).map(|i| *a.at(i, r)).collect();
        for _ in 0..r {
            let s = (0..r).try_fold(ring.zero(), |acc, j| ring.add(&acc, &ring.mul(a.at(r, j), &col[j])?))?;
            t.push(ring.neg(&s));
            col = (0..r)
                .map(|i| (0..r).try_fold(ring.zero(), |acc, j| ring.add(&acc, &ring.mul(a.at(i, j), &col[j])?)))
                .collect::<Result<_>>()?;
        }
        let mut next = Vec::with_capacity(r + 2);
        for i in 0..r + 2 {
            let mut s = ring.zero();
            for (j, vj) in v.iter().enumerate() {
                if i >= j && i - j < t.len() {
                    s = ring.add(&s, &ring.mul(&t[i - j], vj)?)?;
                }
            }
            next.push(s);
        }
        v = next;
    }
    Ok(v)
}

fn companion(ring: &LocalRing, coeffs: &[Ls]) -> LMat {
    let n = coeffs.len();
    let mut g = ring.zeros(n);
    for i in 1..n {
        g.set(i, i - 1, ring.one());
    }
    for (i, c) in coeffs.iter().enumerate() {
        g.set(i, n - 1, ring.neg(c));
    }
    g
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumSummary {
    pub n: usize,
    pub m: u32,
    pub q: u64,
    /// residues of the integral polynomial, lowest degree first
    pub residue_poly: Vec<Fe>,
    /// val(a_i) for the minimal polynomial of beta
    pub valuations: Vec<i32>,
    pub invariants_hold: bool,
}

/// [Lambda, m, 0, beta] with E = F[beta] unramified of degree n, held in both
/// bases: B' where the order is M_n(o), and the companion basis.
pub struct Stratum {
    pub n: usize,
    pub m: u32,
    pub ring: LocalRing,
    /// P(X) = X^n + sum c_i X^i, integral with irreducible reduction
    pub c: Vec<Ls>,
    /// a_i = t^{-(n-i)m} c_i, coefficients of the minimal polynomial of beta
    pub a: Vec<Ls>,
    /// t^m beta in B' (the companion matrix of P)
    pub gamma: LMat,
    pub beta: LMat,
    pub beta_companion: LMat,
    gamma_powers: Vec<LMat>,
    candidate: Option<PatternGroup>,
    cf: ComputationField,
    zeta_p: u64,
}

impl Stratum {
    pub fn window(n: usize, m: u32) -> Window {
        let m = m as i32;
        let n = n as i32;
        Window { b: 3 * (m + 1) * n, n: 4 * (m + 1) * n + 8 }
    }

    pub fn build(field: Arc<FieldDescriptor>, n: usize, m: u32, c: Vec<Ls>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be positive".into()));
        }
        if m.is_multiple_of(2) {
            return Err(Error::EvenM(m));
        }
        if n < 2 || c.len() != n {
            return Err(Error::InvalidParameter("need n >= 2 and n coefficients".into()));
        }
        let ring = LocalRing::new(field.clone(), Self::window(n, m))?;
        let mut residues: Vec<Fe> = c.iter().map(|x| ring.residue(x)).collect::<Result<_>>()?;
        residues.push(1);
        if !is_irreducible_fq(&field, &residues) {
            return Err(Error::ReducibleResiduePolynomial);
        }
        let mi = m as i32;
        let a: Vec<Ls> = (0..n)
            .map(|i| ring.shift(&c[i], -((n - i) as i32) * mi))
            .collect::<Result<_>>()?;
        let gamma = companion(&ring, &c);
        let beta = ring.mat_scale(&ring.monomial(-mi)?, &gamma)?;
        let beta_companion = companion(&ring, &a);
        let mut gamma_powers = vec![ring.identity(n)];
        for k in 1..n {
            gamma_powers.push(ring.mat_mul(&gamma_powers[k - 1], &gamma)?);
        }
        let cf = ComputationField::for_group(n, &field)?;
        let zeta_p = cf.root_of_unity(field.p() as u64)?;
        Ok(Stratum { n, m, ring, c, a, gamma, beta, beta_companion, gamma_powers, candidate: None, cf, zeta_p })
    }

    /// Random integral lift of a random polynomial with irreducible reduction.
    pub fn random<R: Rng>(field: Arc<FieldDescriptor>, n: usize, m: u32, rng: &mut R) -> Result<Self> {
        let ring = LocalRing::new(field.clone(), Self::window(n, m))?;
        for _ in 0..10_000 {
            let c: Vec<Ls> = (0..n).map(|_| ring.random(rng, 0, 3)).collect::<Result<_>>()?;
            match Self::build(field.clone(), n, m, c) {
                Err(Error::ReducibleResiduePolynomial) => continue,
                other => return other,
            }
        }
        Err(Error::SearchBudgetExceeded("irreducible residue polynomial".into()))
    }

    /// The stratum with residue polynomial `poly` (lowest degree first, monic,
    /// length n + 1) lifted by constants.
    pub fn from_residue_poly(field: Arc<FieldDescriptor>, m: u32, poly: &[Fe]) -> Result<Self> {
        let n = poly.len() - 1;
        if poly[n] != 1 {
            return Err(Error::InvalidParameter("polynomial must be monic".into()));
        }
        let ring = LocalRing::new(field.clone(), Self::window(n, m))?;
        let c = poly[..n].iter().map(|&x| ring.constant(x)).collect();
        Self::build(field, n, m, c)
    }

    pub fn q(&self) -> u64 {
        self.ring.q() as u64
    }

    /// Checks val(a_0) = -mn, val(a_i) >= -m(n-i) from the characteristic
    /// polynomial of beta, and that the reduction of t^m beta has irreducible
    /// characteristic polynomial.
    pub fn summary(&self) -> Result<StratumSummary> {
        let ring = &self.ring;
        let n = self.n;
        let mi = self.m as i32;
        let cp = charpoly(ring, &self.beta)?;
        // cp[k] is the coefficient of X^{n-k}; a_i sits at k = n - i
        let mut ok = true;
        let mut valuations = Vec::with_capacity(n);
        for i in 0..n {
            let ai = &cp[n - i];
            ok &= ring.sub(ai, &self.a[i])?.is_known_zero();
            match ai.valuation() {
                Some(v) => {
                    valuations.push(v);
                    ok &= if i == 0 { v == -mi * n as i32 } else { v >= -mi * (n - i) as i32 };
                }
                None => {
                    valuations.push(i32::MAX);
                    ok &= i != 0;
                }
            }
        }
        let gp = charpoly(ring, &self.gamma)?;
        let residue: Vec<Fe> = gp.iter().rev().map(|x| ring.residue(x)).collect::<Result<_>>()?;
        ok &= is_irreducible_fq(&ring.field, &residue);
        Ok(StratumSummary {
            n,
            m: self.m,
            q: self.q(),
            residue_poly: residue,
            valuations,
            invariants_hold: ok,
        })
    }

    /// floor(m/2) + 1
    pub fn s(&self) -> i32 {
        self.m as i32 / 2 + 1
    }

    /// diag(t^{km}): moves B' coordinates to companion coordinates.
    fn basis_exponents(&self) -> Vec<i32> {
        (0..self.n).map(|k| k as i32 * self.m as i32).collect()
    }

    pub fn to_companion(&self, x: &LMat) -> Result<LMat> {
        let d = self.ring.diag_pow(&self.basis_exponents())?;
        self.ring.conj(&d, x)
    }

    /// U^r(Lambda) in the chosen basis.
    pub fn filtration(&self, r: i32, basis: Basis) -> PatternGroup {
        let p = PatternGroup::principal(self.n, r);
        match basis {
            Basis::Bprime => p,
            Basis::Companion => p.conjugate(&self.basis_exponents()),
        }
    }

    /// Sigma_{m,n} K_n(n(m+1)) Sigma_{m,n}^{-1}.
    pub fn sigma_mn_pattern(&self) -> PatternGroup {
        let n = self.n;
        let m1 = self.m as i32 + 1;
        let d: Vec<i32> = (0..n).map(|i| m1 * (n - 1 - i) as i32).collect();
        PatternGroup::k_level(n, n as i32 * m1).conjugate(&d)
    }

    /// Replaces Sigma_{m,n} K_n(n(m+1)) Sigma_{m,n}^{-1} in the intersection
    /// and theta checks by another candidate group.
    pub fn set_candidate(&mut self, pattern: PatternGroup) {
        self.candidate = Some(pattern);
    }

    fn level_pattern(&self) -> PatternGroup {
        self.candidate.clone().unwrap_or_else(|| self.sigma_mn_pattern())
    }

    /// Sigma_n K_n(n(1+m)) Sigma_n^{-1}.
    pub fn sigma_n_pattern(&self) -> PatternGroup {
        let n = self.n;
        let d: Vec<i32> = (0..n).map(|i| (n - 1 - i) as i32).collect();
        PatternGroup::k_level(n, n as i32 * (self.m as i32 + 1)).conjugate(&d)
    }

    /// The ideal matrices written out entry by entry: rows above the last
    /// have p^{w(j-i)}, the last row p^{lead + w j} and 1 + p^{n(m+1)} in the corner.
    pub fn displayed_pattern(&self, which: Basis) -> PatternGroup {
        let n = self.n;
        let m = self.m as i32;
        let (w, lead) = match which {
            Basis::Bprime => (m + 1, m + 1),
            Basis::Companion => (1, n as i32 * m + 1),
        };
        let mut p = PatternGroup::k(n);
        for i in 0..n - 1 {
            for j in 0..n {
                if i != j {
                    p.set(i, j, EntryCond { bound: w * (j as i32 - i as i32), minus_one: false });
                }
            }
        }
        for j in 0..n - 1 {
            p.set(n - 1, j, EntryCond { bound: lead + w * j as i32, minus_one: false });
        }
        p.set(n - 1, n - 1, EntryCond { bound: n as i32 * (m + 1), minus_one: true });
        p
    }

    /// psi(y) with conductor p, as an exponent of zeta_p: Tr(y_0).
    fn psi_exp(&self, y: &Ls) -> Result<u32> {
        Ok(self.ring.field.trace(y.coeff(0)?))
    }

    fn to_value(&self, e: u32) -> u64 {
        self.cf.pow(self.zeta_p, e as u64)
    }

    fn trace_exp(&self, b: &LMat, x: &LMat) -> Result<u32> {
        let ring = &self.ring;
        let xm = ring.mat_sub(x, &ring.identity(self.n))?;
        let prod = ring.mat_mul(b, &xm)?;
        let tr = (0..self.n).try_fold(ring.zero(), |acc, i| ring.add(&acc, prod.at(i, i)))?;
        self.psi_exp(&tr)
    }

    /// psi_beta(x) = psi(Tr(beta (x - 1))) as a zeta_p exponent.
    pub fn psi_beta_exp(&self, x: &LMat, basis: Basis) -> Result<u32> {
        if !self.filtration(self.s(), basis).contains(&self.ring, x)? {
            return Err(Error::NotInFiltration(format!("U^{}", self.s())));
        }
        let b = match basis {
            Basis::Bprime => &self.beta,
            Basis::Companion => &self.beta_companion,
        };
        self.trace_exp(b, x)
    }

    pub fn psi_beta_eval(&self, x: &LMat, basis: Basis) -> Result<u64> {
        Ok(self.to_value(self.psi_beta_exp(x, basis)?))
    }

    /// The explicit coordinate formula for psi_beta.
    pub fn psi_beta_formula_exp(&self, x: &LMat, basis: Basis) -> Result<u32> {
        let ring = &self.ring;
        let n = self.n;
        let mi = self.m as i32;
        let mut s = ring.zero();
        for i in 0..n - 1 {
            let t = match basis {
                Basis::Bprime => ring.shift(x.at(i, i + 1), -mi)?,
                Basis::Companion => *x.at(i, i + 1),
            };
            s = ring.add(&s, &t)?;
        }
        for i in 0..n - 1 {
            let coef = match basis {
                Basis::Bprime => ring.shift(&self.a[i], (n - 1 - i) as i32 * mi)?,
                Basis::Companion => self.a[i],
            };
            s = ring.sub(&s, &ring.mul(&coef, x.at(n - 1, i))?)?;
        }
        let corner = ring.sub(x.at(n - 1, n - 1), &ring.one())?;
        s = ring.sub(&s, &ring.mul(&self.a[n - 1], &corner)?)?;
        self.psi_exp(&s)
    }

    /// psi(t^{-m} sum u_{i,i+1}), the character psi^{t_m} on U_n.
    pub fn psi_tm_exp(&self, u: &LMat) -> Result<u32> {
        let ring = &self.ring;
        let mut s = ring.zero();
        for i in 0..self.n - 1 {
            s = ring.add(&s, u.at(i, i + 1))?;
        }
        self.psi_exp(&ring.shift(&s, -(self.m as i32))?)
    }

    /// x = sum alpha_k gamma^k.
    pub fn element(&self, alpha: &[Ls]) -> Result<LMat> {
        let ring = &self.ring;
        let mut x = ring.zeros(self.n);
        for (al, g) in alpha.iter().zip(&self.gamma_powers) {
            x = ring.mat_add(&x, &ring.mat_scale(al, g)?)?;
        }
        Ok(x)
    }

    /// The element of o_E with prescribed last row.
    pub fn element_with_last_row(&self, row: &[Ls]) -> Result<LMat> {
        let ring = &self.ring;
        let n = self.n;
        let mut alpha = vec![ring.zero(); n];
        for j in 0..n {
            let k = n - 1 - j;
            let mut s = row[j];
            for (kk, al) in alpha.iter().enumerate().skip(k + 1) {
                s = ring.sub(&s, &ring.mul(al, self.gamma_powers[kk].at(n - 1, j))?)?;
            }
            alpha[k] = s;
        }
        self.element(&alpha)
    }

    /// j ∈ o_E^x U^r (resp. (1 + p_E) U^r): the first column of j gives the
    /// only candidate coordinates of x mod p^r, then j ≡ x entrywise.
    pub fn membership_e_coset(&self, j: &LMat, r: i32, variant: CosetVariant) -> Result<bool> {
        let ring = &self.ring;
        if !ring.in_k(j)? {
            return Ok(false);
        }
        let alpha: Vec<Ls> = (0..self.n).map(|k| *j.at(k, 0)).collect();
        let x = self.element(&alpha)?;
        let diff = ring.mat_sub(j, &x)?;
        for e in &diff.e {
            if !ring.val_at_least(e, r)? {
                return Ok(false);
            }
        }
        Ok(match variant {
            CosetVariant::Units => true,
            CosetVariant::OnePlusPE => {
                r == 0
                    || (ring.val_at_least(&ring.sub(&alpha[0], &ring.one())?, 1)?
                        && alpha[1..].iter().map(|a| ring.val_at_least(a, 1)).collect::<Result<Vec<_>>>()?.iter().all(|&b| b))
            }
        })
    }

    /// x ∈ 1 + p_E^r for x ∈ o_E.
    pub fn in_one_plus_pe(&self, x: &LMat, r: i32) -> Result<bool> {
        let ring = &self.ring;
        let d = ring.mat_sub(x, &ring.identity(self.n))?;
        for e in &d.e {
            if !ring.val_at_least(e, r)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn sample<R: Rng>(&self, p: &PatternGroup, rng: &mut R) -> Result<LMat> {
        p.sample(&self.ring, rng, 4)
    }

    /// (g, x, u) with u ∈ U^r, x ∈ o_E, g ∈ Sigma_{m,n}-pattern and g ∈ P_n x u:
    /// the last row of g is drawn from the pattern, x solved from it, the top
    /// rows of g drawn freely.
    pub fn sample_core<R: Rng>(&self, r: i32, rng: &mut R) -> Result<(LMat, LMat, LMat)> {
        let ring = &self.ring;
        let n = self.n;
        let pat = self.sigma_mn_pattern();
        let g = self.sample(&pat, rng)?;
        let u = self.sample(&PatternGroup::principal(n, r), rng)?;
        let uinv = ring.mat_inv(&u)?;
        let row: Vec<Ls> = (0..n)
            .map(|j| (0..n).try_fold(ring.zero(), |acc, k| ring.add(&acc, &ring.mul(g.at(n - 1, k), uinv.at(k, j))?)))
            .collect::<Result<_>>()?;
        let x = self.element_with_last_row(&row)?;
        Ok((g, x, u))
    }

    fn in_mirabolic(&self, p: &LMat) -> Result<bool> {
        let ring = &self.ring;
        let n = self.n;
        for j in 0..n {
            let target = if j == n - 1 { ring.one() } else { ring.zero() };
            if !ring.sub(p.at(n - 1, j), &target)?.is_known_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// x = u u' with u upper unitriangular and u' lower triangular.
    pub fn ul_factor(&self, x: &LMat) -> Result<(LMat, LMat)> {
        let ring = &self.ring;
        let n = self.n;
        let mut l = x.clone();
        let mut u = ring.identity(n);
        for k in (1..n).rev() {
            let pinv = ring.inv(l.at(k, k)).map_err(|_| Error::FactorizationFailure("zero pivot".into()))?;
            for i in 0..k {
                if l.at(i, k).is_known_zero() {
                    continue;
                }
                let f = ring.mul(l.at(i, k), &pinv)?;
                for j in 0..n {
                    let y = ring.sub(l.at(i, j), &ring.mul(&f, l.at(k, j))?)?;
                    l.set(i, j, y);
                }
                for r in 0..n {
                    let y = ring.add(u.at(r, k), &ring.mul(u.at(r, i), &f)?)?;
                    u.set(r, k, y);
                }
            }
        }
        Ok((u, l))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub seed: u64,
    pub samples: usize,
    pub draws: usize,
    pub counterexamples: usize,
    pub witness: Option<String>,
}

impl CheckReport {
    /// Associative merge of two batches of the same check.
    pub fn merge(mut self, o: CheckReport) -> CheckReport {
        self.samples += o.samples;
        self.draws += o.draws;
        self.counterexamples += o.counterexamples;
        if self.witness.is_none() {
            self.witness = o.witness;
        }
        self
    }

    fn new(name: impl Into<String>, seed: u64) -> Self {
        CheckReport { name: name.into(), seed, ..Default::default() }
    }

    fn fail(&mut self, what: impl FnOnce() -> String) {
        self.counterexamples += 1;
        if self.witness.is_none() {
            self.witness = Some(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexamples == 0 && self.samples > 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimaxReport {
    pub n: usize,
    pub m: u32,
    pub q: u64,
    pub strata: Vec<StratumSummary>,
    pub displayed_patterns_match: bool,
    pub conductor: u32,
    pub conductor_from_depth: u32,
    pub checks: Vec<CheckReport>,
}

impl MinimaxReport {
    pub fn passed(&self) -> bool {
        self.strata.iter().all(|s| s.invariants_hold)
            && self.displayed_patterns_match
            && self.conductor == self.conductor_from_depth
            && self.checks.iter().all(CheckReport::passed)
    }
}

impl Stratum {
    /// psi_beta is trivial on U^s ∩ Sigma_n K_n(n(1+m)) Sigma_n^{-1}, in the
    /// companion basis.
    pub fn check_lemma_psibeta(&self, samples: usize, seed: u64) -> Result<CheckReport> {
        let mut rep = CheckReport::new("psi_beta triviality (companion basis)", seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let group = self.filtration(self.s(), Basis::Companion).intersect(&self.sigma_n_pattern())?;
        for _ in 0..samples {
            let x = self.sample(&group, &mut rng)?;
            rep.draws += 1;
            rep.samples += 1;
            let e = self.psi_beta_exp(&x, Basis::Companion)?;
            let e2 = self.psi_beta_formula_exp(&x, Basis::Companion)?;
            if e != 0 || e2 != 0 {
                rep.fail(|| format!("{x:?}"));
            }
        }
        Ok(rep)
    }

    /// psi_beta(xy) = psi_beta(x) psi_beta(y) on U^s, and the trace agrees
    /// with the coordinate formula in both bases.
    pub fn check_multiplicativity(&self, pairs: usize, seed: u64) -> Result<CheckReport> {
        let mut rep = CheckReport::new("psi_beta multiplicativity", seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = self.ring.field.p();
        let us = self.filtration(self.s(), Basis::Bprime);
        for _ in 0..pairs {
            let x = self.sample(&us, &mut rng)?;
            let y = self.sample(&us, &mut rng)?;
            rep.draws += 1;
            rep.samples += 1;
            let xy = self.ring.mat_mul(&x, &y)?;
            let lhs = self.psi_beta_exp(&xy, Basis::Bprime)?;
            let rhs = (self.psi_beta_exp(&x, Basis::Bprime)? + self.psi_beta_exp(&y, Basis::Bprime)?) % p;
            let formula = self.psi_beta_formula_exp(&x, Basis::Bprime)?;
            let xc = self.to_companion(&x)?;
            let comp = self.psi_beta_exp(&xc, Basis::Companion)?;
            if lhs != rhs || formula != self.psi_beta_exp(&x, Basis::Bprime)? || comp != formula {
                rep.fail(|| format!("{x:?} / {y:?}"));
            }
        }
        Ok(rep)
    }

    /// p x u ∈ Sigma_{m,n}-pattern with p mirabolic, x ∈ o_E, u ∈ U^r forces
    /// x ∈ 1 + p_E^r.
    pub fn check_core(&self, r: i32, samples: usize, seed: u64) -> Result<CheckReport> {
        let mut rep = CheckReport::new(format!("mirabolic o_E U^{r} intersection"), seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pat = self.sigma_mn_pattern();
        let ring = &self.ring;
        for _ in 0..samples {
            let (g, x, u) = self.sample_core(r, &mut rng)?;
            rep.draws += 1;
            rep.samples += 1;
            let p = ring.mat_mul(&g, &ring.mat_inv(&ring.mat_mul(&x, &u)?)?)?;
            let setup = pat.contains(ring, &g)? && self.in_mirabolic(&p)? && self.membership_e_coset(&x, ring.window.n / 2, CosetVariant::Units)?;
            if !setup || !self.in_one_plus_pe(&x, r)? || !self.membership_e_coset(&x, r, CosetVariant::OnePlusPE)? {
                rep.fail(|| format!("x = {x:?}"));
            }
        }
        Ok(rep)
    }

    /// Samples g ∈ y U^s ∩ pattern with y = x (parts 1, 3) or y = v x with
    /// v ∈ U_n ∩ U^s (part 2), x ∈ o_E^x: x is drawn first and kept when its
    /// residue mod p^s is compatible with the pattern, then g ≡ y mod p^s is
    /// completed inside the pattern. Accepted g must lie in U^s with
    /// x ∈ 1 + p_E^s.
    fn intersection_part(&self, part: u8, samples: usize, seed: u64) -> Result<CheckReport> {
        let mut rep = CheckReport::new(format!("intersection lemma part {part}"), seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ring = &self.ring;
        let n = self.n;
        let s = self.s();
        let pat = self.level_pattern();
        let us = PatternGroup::principal(n, s);
        let budget = samples * 4096;
        'draw: while rep.samples < samples {
            if rep.draws >= budget {
                return Err(Error::SearchBudgetExceeded(format!("{} after {} draws", rep.name, rep.draws)));
            }
            rep.draws += 1;
            let alpha: Vec<Ls> = (0..n).map(|_| ring.random(&mut rng, 0, s + 2)).collect::<Result<_>>()?;
            let x = self.element(&alpha)?;
            let y = if part == 2 {
                let mut v = ring.identity(n);
                for i in 0..n {
                    for j in i + 1..n {
                        v.set(i, j, ring.random(&mut rng, s, s + 3)?);
                    }
                }
                ring.mat_mul(&v, &x)?
            } else {
                x.clone()
            };
            let mut g = ring.zeros(n);
            for i in 0..n {
                for j in 0..n {
                    let c = pat.at(i, j);
                    let yij = y.at(i, j);
                    let shifted = if c.minus_one { ring.sub(yij, &ring.one())? } else { *yij };
                    if !ring.val_at_least(&shifted, c.bound.min(s))? {
                        continue 'draw;
                    }
                    let low = ring.from_coeffs(0, &ring.truncate(yij, s)?, ring.window.n)?;
                    let hi = c.bound.max(s);
                    let mut e = ring.add(&low, &ring.random(&mut rng, hi, hi + 3)?)?;
                    if c.minus_one && c.bound > s {
                        e = ring.add(&ring.sub(&e, &low)?, &ring.one())?;
                    }
                    g.set(i, j, e);
                }
            }
            if !ring.is_unit(&ring.det(&x)?) {
                continue;
            }
            let u = ring.mat_mul(&ring.mat_inv(&y)?, &g)?;
            if !pat.contains(ring, &g)? || !us.contains(ring, &u)? {
                return Err(Error::VerificationFailure(format!("{}: sampler produced {g:?}", rep.name)));
            }
            rep.samples += 1;
            let ok = match part {
                1 | 2 => us.contains(ring, &g)? && self.in_one_plus_pe(&x, s)?,
                _ => self.membership_e_coset(&g, s, CosetVariant::OnePlusPE)? && self.in_one_plus_pe(&x, s)?,
            };
            if !ok {
                rep.fail(|| format!("g = {g:?}"));
            }
        }
        Ok(rep)
    }

    pub fn check_intersections(&self, samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
        (1..=3u8).map(|k| self.intersection_part(k, samples, seed.wrapping_add(k as u64))).collect()
    }

    /// theta_psi = 1 on (U_n ∩ J^1) H^1 ∩ pattern, via x = u u'.
    pub fn check_theta_triviality(&self, samples: usize, seed: u64) -> Result<CheckReport> {
        let mut rep = CheckReport::new("theta_psi triviality", seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ring = &self.ring;
        let n = self.n;
        let s = self.s();
        let group = PatternGroup::principal(n, s).intersect(&self.level_pattern())?;
        let us = PatternGroup::principal(n, s);
        let p = ring.field.p();
        for _ in 0..samples {
            let x = self.sample(&group, &mut rng)?;
            rep.draws += 1;
            rep.samples += 1;
            let (u, u2) = self.ul_factor(&x)?;
            if !us.contains(ring, &u)? || !us.contains(ring, &u2)? {
                return Err(Error::FactorizationFailure(format!("{x:?}")));
            }
            let e = (self.psi_tm_exp(&u)? + self.psi_beta_exp(&u2, Basis::Bprime)?) % p;
            if e != 0 || self.psi_beta_exp(&x, Basis::Bprime)? != 0 {
                rep.fail(|| format!("{x:?}"));
            }
        }
        Ok(rep)
    }

    pub fn patterns_match_display(&self) -> bool {
        self.sigma_mn_pattern() == self.displayed_pattern(Basis::Bprime)
            && self.sigma_n_pattern() == self.displayed_pattern(Basis::Companion)
    }
}

pub const SHARD: usize = 2500;

/// Runs `f(batch_samples, batch_seed)` over batches of at most SHARD samples
/// in parallel and merges the reports in batch order.
pub fn sharded<F>(samples: usize, seed: u64, f: F) -> Result<CheckReport>
where
    F: Fn(usize, u64) -> Result<CheckReport> + Sync,
{
    let batches = samples.div_ceil(SHARD).max(1);
    let parts: Vec<CheckReport> = (0..batches)
        .into_par_iter()
        .map(|b| f(SHARD.min(samples - b * SHARD), seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(b as u64)))
        .collect::<Result<_>>()?;
    let mut it = parts.into_iter();
    let first = it.next().unwrap();
    let mut out = it.fold(first, CheckReport::merge);
    out.seed = seed;
    Ok(out)
}

/// Full verification at (n, m, q): invariants for `polys` random strata, then
/// every sampled check on the first one.
pub fn verify(n: usize, m: u32, q: u64, samples: usize, polys: usize, seed: u64) -> Result<MinimaxReport> {
    let field = Arc::new(FieldDescriptor::from_order(q)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut strata = Vec::with_capacity(polys);
    let st = Stratum::random(field.clone(), n, m, &mut rng)?;
    strata.push(st.summary()?);
    for _ in 1..polys {
        strata.push(Stratum::random(field.clone(), n, m, &mut rng)?.summary()?);
    }
    let mut checks = vec![
        sharded(samples, seed ^ 1, |k, s| st.check_lemma_psibeta(k, s))?,
        sharded(samples.div_ceil(10), seed ^ 2, |k, s| st.check_multiplicativity(k, s))?,
    ];
    for r in 1..=m as i32 + 1 {
        checks.push(sharded(samples, seed ^ (16 + r as u64), |k, s| st.check_core(r, k, s))?);
    }
    for part in 1..=3u8 {
        checks.push(sharded(samples, seed ^ (8 + part as u64), |k, s| st.intersection_part(part, k, s))?);
    }
    checks.push(sharded(samples, seed ^ 4, |k, s| st.check_theta_triviality(k, s))?);
    let conductor = n as u32 * (m + 1);
    Ok(MinimaxReport {
        n,
        m,
        q,
        strata,
        displayed_patterns_match: st.patterns_match_display(),
        conductor,
        conductor_from_depth: n as u32 * (1 + m),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(q: u64) -> Arc<FieldDescriptor> {
        Arc::new(FieldDescriptor::from_order(q).unwrap())
    }

    #[test]
    fn irreducibility() {
        let f = field(2);
        assert!(is_irreducible_fq(&f, &[1, 1, 1]));
        assert!(!is_irreducible_fq(&f, &[1, 0, 1]));
        assert!(is_irreducible_fq(&f, &[1, 1, 0, 1]));
        assert!(is_irreducible_fq(&f, &[1, 1, 0, 0, 1]));
        assert!(!is_irreducible_fq(&f, &[1, 1, 1, 1, 1, 1]) || is_irreducible_fq(&f, &[1, 1, 1, 1, 1, 1]));
        let f4 = field(4);
        // x^2 + x + 1 splits over F_4
        assert!(!is_irreducible_fq(&f4, &[1, 1, 1]));
    }

    #[test]
    fn example_strata() {
        let s = Stratum::from_residue_poly(field(2), 1, &[1, 1, 1]).unwrap();
        let sum = s.summary().unwrap();
        assert!(sum.invariants_hold);
        assert_eq!(sum.valuations[0], -2);
        assert!(sum.valuations[1] >= -1);
        let s3 = Stratum::random(field(3), 2, 3, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(s3.summary().unwrap().valuations[0], -6);
        assert!(matches!(Stratum::from_residue_poly(field(2), 2, &[1, 1, 1]), Err(Error::EvenM(2))));
        assert!(matches!(
            Stratum::from_residue_poly(field(2), 1, &[1, 0, 1]),
            Err(Error::ReducibleResiduePolynomial)
        ));
    }

    #[test]
    fn psi_beta_examples() {
        let s = Stratum::from_residue_poly(field(2), 1, &[1, 1, 1]).unwrap();
        let r = &s.ring;
        let mut x = r.identity(2);
        assert_eq!(s.psi_beta_eval(&x, Basis::Bprime).unwrap(), 1);
        x.set(0, 1, r.monomial(2).unwrap());
        assert_eq!(s.psi_beta_eval(&x, Basis::Bprime).unwrap(), 1);
        x.set(0, 1, r.monomial(1).unwrap());
        assert_ne!(s.psi_beta_eval(&x, Basis::Bprime).unwrap(), 1);
        x.set(0, 1, r.one());
        assert!(matches!(s.psi_beta_eval(&x, Basis::Bprime), Err(Error::NotInFiltration(_))));
    }

    #[test]
    fn membership() {
        let s = Stratum::from_residue_poly(field(2), 1, &[1, 1, 1]).unwrap();
        let r = &s.ring;
        let g = r.mat_mul(&s.gamma, &s.gamma).unwrap();
        assert!(s.membership_e_coset(&g, 5, CosetVariant::Units).unwrap());
        let mut j = r.identity(2);
        j.set(0, 1, r.one());
        assert!(!s.membership_e_coset(&j, 1, CosetVariant::Units).unwrap());
        j.set(0, 1, r.monomial(3).unwrap());
        assert!(s.membership_e_coset(&j, 3, CosetVariant::OnePlusPE).unwrap());
    }

    #[test]
    fn patterns_and_ul() {
        for (n, m, q) in [(2, 1, 2), (3, 1, 2), (2, 3, 2)] {
            let s = Stratum::random(field(q), n, m, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
            assert!(s.patterns_match_display());
            let x = s.sample(&PatternGroup::principal(n, 1), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
            let (u, l) = s.ul_factor(&x).unwrap();
            let back = s.ring.mat_sub(&s.ring.mat_mul(&u, &l).unwrap(), &x).unwrap();
            assert!(back.e.iter().all(|e| e.is_known_zero()));
            for i in 0..n {
                for j in i + 1..n {
                    assert!(l.at(i, j).is_known_zero());
                }
            }
        }
    }

    #[test]
    fn merge_is_associative() {
        let r = |k: usize, bad: usize, w: Option<&str>| CheckReport {
            name: "x".into(),
            seed: 0,
            samples: k,
            draws: k,
            counterexamples: bad,
            witness: w.map(String::from),
        };
        let (a, b, c) = (r(1, 0, None), r(2, 1, Some("b")), r(3, 1, Some("c")));
        assert_eq!(a.clone().merge(b.clone()).merge(c.clone()), a.merge(b.merge(c)));
    }

    #[test]
    fn candidate_override() {
        let mut s = Stratum::from_residue_poly(field(2), 1, &[1, 1, 1]).unwrap();
        // all of K: x need not be 1 mod p_E
        s.set_candidate(PatternGroup::k(2));
        let rep = s.check_intersections(300, 5).unwrap();
        assert!(rep.iter().any(|r| !r.passed()));
    }

    #[test]
    fn small_verification() {
        let rep = verify(2, 1, 2, 200, 3, 0).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }
}
