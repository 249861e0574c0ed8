//! The depth-zero newform f_new in ind_{ZK}^G(omega tau), evaluated two ways,
//! and its matrix coefficients.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bessel::{bessel_bop_average, bessel_function, bop, dual_row, AddChar, BesselTable, GelfandGraev};
use crate::characters::{CharacterTable, GroupContext};
use crate::cosets::residue_digits;
use crate::error::{Error, Result};
use crate::field::{Fe, FieldDescriptor};
use crate::group::FqMatrix;
use crate::local::{LMat, LocalRing, PatternGroup, Window};
use crate::modp::gl_order;

/// K^Sigma = Sigma^{-1} K Sigma: val x_ij >= i - j.
pub fn k_sigma(n: usize) -> PatternGroup {
    let b: Vec<i32> = (0..n * n).map(|idx| (idx / n) as i32 - (idx % n) as i32).collect();
    PatternGroup::from_bounds(n, &b)
}

/// K(n) ∩ K^Sigma.
pub fn transversal_subgroup(n: usize) -> Result<PatternGroup> {
    PatternGroup::k_level(n, n as i32).intersect(&k_sigma(n))
}

/// Permutations of 0..k in lexicographic order.
fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..k {
        for rest in permutations(k - 1) {
            let mut p = vec![first];
            p.extend(rest.into_iter().map(|x| if x >= first { x + 1 } else { x }));
            out.push(p);
        }
    }
    out
}

/// Bruhat representatives w u of B \ GL_k(F_q), B upper triangular: u runs
/// over upper unitriangular matrices supported where w^{-1} reverses order.
pub fn borel_cosets(field: &FieldDescriptor, k: usize) -> Vec<FqMatrix> {
    let q = field.q() as u64;
    let mut out = Vec::new();
    for sigma in permutations(k) {
        let mut pos = vec![0; k];
        for (a, &s) in sigma.iter().enumerate() {
            pos[s] = a;
        }
        let free: Vec<(usize, usize)> =
            (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).filter(|&(i, j)| pos[i] > pos[j]).collect();
        let mut w = FqMatrix { n: k, e: vec![0; k * k] };
        for (a, &s) in sigma.iter().enumerate() {
            w.set(a, s, 1);
        }
        for code in 0..q.pow(free.len() as u32) {
            let mut u = FqMatrix::identity(k);
            for (idx, &(i, j)) in free.iter().enumerate() {
                u.set(i, j, ((code / q.pow(idx as u32)) % q) as Fe);
            }
            out.push(w.mul(field, &u));
        }
    }
    out
}

/// Representatives of (K(n) ∩ K^Sigma) \ K(n), all inside GL_{n-1}(o):
/// y r with y = 1 + sum c_ij E_ij (c_ij ∈ p / p^{i-j}, i - j >= 2) running
/// over the Iwahori quotient and r over the Bruhat cosets.
pub fn pattern_transversal(ring: &LocalRing, n: usize) -> Result<Vec<LMat>> {
    let q = ring.q() as u64;
    let k = n - 1;
    let cells: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..i).map(move |j| (i, j))).filter(|(i, j)| i - j >= 2).collect();
    let sizes: Vec<u64> = cells.iter().map(|&(i, j)| q.pow((i - j - 1) as u32)).collect();
    let total: u64 = sizes.iter().product();
    let mut ys = Vec::with_capacity(total as usize);
    for mut code in 0..total {
        let mut y = ring.identity(n);
        for (&(i, j), &s) in cells.iter().zip(&sizes) {
            let c = code % s;
            code /= s;
            let digits = residue_digits(c, q, (i - j - 1) as u32);
            y.set(i, j, ring.from_coeffs(1, &digits, ring.window.n)?);
        }
        ys.push(y);
    }
    let mut out = Vec::with_capacity(ys.len() * 4);
    for y in &ys {
        for r in borel_cosets(&ring.field, k) {
            let mut lifted = ring.identity(n);
            for i in 0..k {
                for j in 0..k {
                    lifted.set(i, j, ring.constant(r.at(i, j)));
                }
            }
            out.push(ring.mat_mul(y, &lifted)?);
        }
    }
    Ok(out)
}

/// [K(n) : K(n) ∩ K^Sigma] = [GL_{n-1}(F_q) : B] q^{sum (i - j - 1)}.
pub fn transversal_index(n: usize, q: u64) -> u64 {
    let k = n.saturating_sub(1);
    let flags: u64 = (1..=k as u32).map(|i| (0..i).map(|e| q.pow(e)).sum::<u64>()).product();
    let deep: u32 = (0..k).flat_map(|i| (0..i).map(move |j| i - j)).filter(|&d| d >= 2).map(|d| d as u32 - 1).sum();
    flags * q.pow(deep)
}

/// Checks that distinct representatives lie in distinct cosets.
pub fn verify_transversal(ring: &LocalRing, ys: &[LMat]) -> Result<()> {
    let n = ys[0].n;
    let ks = k_sigma(n);
    let inv: Vec<LMat> = ys.iter().map(|y| ring.mat_inv(y)).collect::<Result<_>>()?;
    for a in 0..ys.len() {
        if !ring.in_k_level(&ys[a], n as i32)? {
            return Err(Error::VerificationFailure(format!("representative {a} not in K(n)")));
        }
        for b in 0..a {
            if ks.contains(ring, &ring.mat_mul(&ys[a], &inv[b])?)? {
                return Err(Error::VerificationFailure(format!("representatives {a} and {b} share a coset")));
            }
        }
    }
    Ok(())
}

/// g = t^v k Sigma y_index.
#[derive(Clone, Debug)]
pub struct SupportWitness {
    pub v: i32,
    pub index: usize,
    pub k: LMat,
}

/// A depth-zero cuspidal ind_{ZK}^G(omega tau) with everything needed to
/// evaluate its newform.
pub struct DepthZeroRep<'a> {
    pub ctx: &'a GroupContext,
    pub table: &'a CharacterTable,
    pub row: usize,
    pub dual: usize,
    pub psi: AddChar,
    /// omega_pi(t)
    pub omega: u64,
    pub ring: LocalRing,
    pub bessel: BesselTable,
    pub dual_bessel: BesselTable,
    /// f_new(Sigma) = sum_b b.B and its contragredient analogue.
    pub f_sigma: Vec<u64>,
    pub f_sigma_dual: Vec<u64>,
    pub bop: Vec<u32>,
    pub transversal: Vec<LMat>,
    /// y_i^{-1} Sigma^{-1}
    tails: Vec<LMat>,
    sigma: LMat,
    whittaker_reps: Vec<u32>,
}

impl<'a> DepthZeroRep<'a> {
    pub fn new(ctx: &'a GroupContext, table: &'a CharacterTable, row: usize, psi: AddChar, omega: u64) -> Result<Self> {
        let n = ctx.n;
        if n < 2 {
            return Err(Error::InvalidParameter("depth-zero engine needs n >= 2".into()));
        }
        if omega == 0 || omega >= ctx.cf.ell {
            return Err(Error::InvalidParameter("omega(t) must be a unit of the computation field".into()));
        }
        let ring = LocalRing::new(ctx.field.clone(), Window::depth_zero(n, 2 * n as u32))?;
        let bessel = bessel_function(ctx, table, row, psi)?;
        let dual = dual_row(ctx, table, row);
        let dual_bessel = bessel_function(ctx, table, dual, psi.inverse(ctx))?;
        let f_sigma = bessel_bop_average(ctx, &bessel);
        let f_sigma_dual = bessel_bop_average(ctx, &dual_bessel);
        let transversal = pattern_transversal(&ring, n)?;
        let mut rep = DepthZeroRep {
            ctx,
            table,
            row,
            dual,
            psi,
            omega,
            bessel,
            dual_bessel,
            f_sigma,
            f_sigma_dual,
            bop: bop(ctx),
            sigma: ring.sigma(n)?,
            ring,
            transversal: Vec::new(),
            tails: Vec::new(),
            whittaker_reps: GelfandGraev::new(ctx, psi).reps,
        };
        rep.set_transversal(transversal)?;
        Ok(rep)
    }

    pub fn set_transversal(&mut self, ys: Vec<LMat>) -> Result<()> {
        let sigma_inv = self.ring.mat_inv(&self.sigma)?;
        self.tails = ys
            .iter()
            .map(|y| self.ring.mat_mul(&self.ring.mat_inv(y)?, &sigma_inv))
            .collect::<Result<_>>()?;
        self.transversal = ys;
        Ok(())
    }

    /// Same cosets, other representatives: each y_i replaced by h y_i with h
    /// random in K(n) ∩ K^Sigma, in shuffled order.
    pub fn perturbed_transversal(&self, seed: u64) -> Result<Vec<LMat>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = transversal_subgroup(self.ctx.n)?;
        let mut ys = self
            .transversal
            .iter()
            .map(|y| self.ring.mat_mul(&h.sample(&self.ring, &mut rng, 4)?, y))
            .collect::<Result<Vec<_>>>()?;
        ys.shuffle(&mut rng);
        Ok(ys)
    }

    pub fn sigma(&self) -> &LMat {
        &self.sigma
    }

    fn omega_pow(&self, v: i32) -> u64 {
        let f = &self.ctx.cf;
        let w = if v >= 0 { self.omega } else { f.inv(self.omega).unwrap() };
        f.pow(w, v.unsigned_abs() as u64)
    }

    /// t^v, or None when x is not in Z K.
    fn in_zk(&self, x: &LMat) -> Result<Option<(i32, LMat)>> {
        let n = self.ctx.n as i32;
        let dv = self.ring.det_val(x)?;
        if dv.rem_euclid(n) != 0 {
            return Ok(None);
        }
        let v = dv / n;
        let k = self.ring.mat_scale(&self.ring.monomial(-v)?, x)?;
        Ok(self.ring.in_k(&k)?.then_some((v, k)))
    }

    fn index(&self, k: &LMat) -> Result<u32> {
        self.ctx.index(&self.ring.reduce(k)?)
    }

    /// Decides g ∈ Z K Sigma K(n) and returns the decomposition.
    pub fn support_membership(&self, g: &LMat) -> Result<Option<SupportWitness>> {
        let n = self.ctx.n as i32;
        let dv = self.ring.det_val(g)?;
        let num = dv - n * (n - 1) / 2;
        if num.rem_euclid(n) != 0 {
            return Ok(None);
        }
        let v = num / n;
        let scaled = self.ring.mat_scale(&self.ring.monomial(-v)?, g)?;
        for (index, tail) in self.tails.iter().enumerate() {
            let h = self.ring.mat_mul(&scaled, tail)?;
            if self.ring.in_k(&h)? {
                return Ok(Some(SupportWitness { v, index, k: h }));
            }
        }
        Ok(None)
    }

    /// f_new(g) as a function on GL_n(F_q): zero off the support, otherwise
    /// x -> omega(t)^v F(x k̄) for g = t^v k Sigma y.
    pub fn newform_eval(&self, g: &LMat) -> Result<Vec<u64>> {
        let grp = &self.ctx.group;
        let Some(w) = self.support_membership(g)? else {
            return Ok(vec![0; grp.order()]);
        };
        let kb = self.index(&w.k)?;
        let c = self.omega_pow(w.v);
        Ok((0..grp.order() as u32)
            .map(|x| self.ctx.cf.mul(c, self.f_sigma[grp.mul(x, kb) as usize]))
            .collect())
    }

    /// The K(n)-integral of the Bessel vector, as a finite sum over the
    /// transversal and B^op_{n-1}, with the K^1-part of measure one.
    pub fn newform_integral_eval(&self, g: &LMat) -> Result<Vec<u64>> {
        let grp = &self.ctx.group;
        let f = &self.ctx.cf;
        let mut out = vec![0; grp.order()];
        for tail in &self.tails {
            let h = self.ring.mat_mul(g, tail)?;
            for &b in &self.bop {
                let hb = self.ring.mat_mul(&h, &self.ring.lift(&grp.matrix(b)))?;
                let Some((v, k)) = self.in_zk(&hb)? else { continue };
                let kb = self.index(&k)?;
                let c = self.omega_pow(v);
                for (x, o) in out.iter_mut().enumerate() {
                    *o = f.add(*o, f.mul(c, self.bessel.at(grp.mul(x as u32, kb))));
                }
            }
        }
        Ok(out)
    }

    /// <W, W'> = sum over U \ G of W(k) W'(k).
    pub fn pairing(&self, w: &[u64], w_dual: &[u64]) -> u64 {
        let f = &self.ctx.cf;
        self.whittaker_reps.iter().fold(0, |acc, &k| f.add(acc, f.mul(w[k as usize], w_dual[k as usize])))
    }

    /// |G(F_q)| / (|U(F_q)| dim tau)
    pub fn coefficient_constant(&self) -> Result<u64> {
        let f = &self.ctx.cf;
        let n = self.ctx.n;
        let q = self.ctx.field.q() as u64;
        let u = (q as u128).pow((n * (n - 1) / 2) as u32);
        let num = f.from_u128(gl_order(n, q));
        let den = f.mul(f.from_u128(u), self.table.degrees[self.row] % f.ell);
        Ok(f.mul(num, f.inv(den)?))
    }

    fn double_bop_sum(&self, kb: u32) -> u64 {
        let f = &self.ctx.cf;
        let grp = &self.ctx.group;
        let mut s = 0;
        for &b in &self.bop {
            let bk = grp.mul(b, kb);
            for &b2 in &self.bop {
                s = f.add(s, self.bessel.at(grp.mul(bk, b2)));
            }
        }
        s
    }

    /// c_{f_new, f_new^v}(g) from the closed formula summed over the pairs
    /// (i, j) with Sigma y_j g y_i^{-1} Sigma^{-1} ∈ Z K.
    pub fn matrix_coeff_formula(&self, g: &LMat) -> Result<u64> {
        let f = &self.ctx.cf;
        let c = self.coefficient_constant()?;
        let mut total = 0;
        for yj in &self.transversal {
            let left = self.ring.mat_mul3(&self.sigma, yj, g)?;
            for tail in &self.tails {
                let x = self.ring.mat_mul(&left, tail)?;
                let Some((v, k)) = self.in_zk(&x)? else { continue };
                let term = f.mul(self.omega_pow(v), self.double_bop_sum(self.index(&k)?));
                total = f.add(total, f.mul(c, term));
            }
        }
        Ok(total)
    }

    /// The same coefficient from the pairing: sum_j <f_new(Sigma y_j g), F^v>.
    pub fn matrix_coeff_direct(&self, g: &LMat) -> Result<u64> {
        let f = &self.ctx.cf;
        let mut total = 0;
        for yj in &self.transversal {
            let w = self.newform_eval(&self.ring.mat_mul3(&self.sigma, yj, g)?)?;
            total = f.add(total, self.pairing(&w, &self.f_sigma_dual));
        }
        Ok(total)
    }

    /// c_{f_new, f_Sigma^v}(g) = <f_new(Sigma g), F^v>.
    pub fn matrix_coeff_single(&self, g: &LMat) -> Result<u64> {
        let w = self.newform_eval(&self.ring.mat_mul(&self.sigma, g)?)?;
        Ok(self.pairing(&w, &self.f_sigma_dual))
    }

    /// The closed formula for c_{f_new, f_Sigma^v} on K^Sigma.
    pub fn matrix_coeff_single_formula(&self, g: &LMat) -> Result<u64> {
        let x = self.ring.conj(&self.sigma, g)?;
        let Some((v, k)) = self.in_zk(&x)? else { return Ok(0) };
        let f = &self.ctx.cf;
        let s = f.mul(self.omega_pow(v), self.double_bop_sum(self.index(&k)?));
        Ok(f.mul(self.coefficient_constant()?, s))
    }

    pub fn sample_pattern<R: Rng>(&self, p: &PatternGroup, rng: &mut R) -> Result<LMat> {
        p.sample(&self.ring, rng, 4)
    }

    /// t^v k Sigma y with k ∈ K, y ∈ K(n) random.
    pub fn sample_support<R: Rng>(&self, rng: &mut R) -> Result<LMat> {
        let n = self.ctx.n;
        let v = rng.gen_range(-1..=1);
        let k = PatternGroup::k(n).sample(&self.ring, rng, 4)?;
        let y = PatternGroup::k_level(n, n as i32).sample(&self.ring, rng, 4)?;
        let z = self.ring.scalar(n, &self.ring.monomial(v)?);
        let g = self.ring.mat_mul3(&z, &k, &self.sigma)?;
        self.ring.mat_mul(&g, &y)
    }
}

/// Every n x n matrix with entries sum_{e=lo}^{hi} c_e t^e, nonsingular ones only.
pub fn window_matrices(ring: &LocalRing, n: usize, lo: i32, hi: i32) -> Result<Vec<LMat>> {
    let q = ring.q() as u64;
    let width = (hi - lo + 1) as u32;
    let per = q.pow(width);
    let total = per
        .checked_pow((n * n) as u32)
        .filter(|&t| t <= 1 << 20)
        .ok_or_else(|| Error::InvalidParameter("window enumeration too large".into()))?;
    let mut out = Vec::new();
    for code in 0..total {
        let mut g = ring.zeros(n);
        let mut c = code;
        for idx in 0..n * n {
            let digits = residue_digits(c % per, q, width);
            c /= per;
            g.e[idx] = ring.from_coeffs(lo, &digits, ring.window.n)?;
        }
        if !ring.det(&g)?.is_known_zero() {
            out.push(g);
        }
    }
    Ok(out)
}

/// Matrix with entries uniform in p^{lo} / p^{hi}, redrawn until invertible.
pub fn sample_generic<R: Rng>(ring: &LocalRing, n: usize, lo: i32, hi: i32, rng: &mut R) -> Result<LMat> {
    loop {
        let mut g = ring.zeros(n);
        for x in g.e.iter_mut() {
            *x = ring.random(rng, lo, hi)?;
        }
        if !ring.det(&g)?.is_known_zero() {
            return Ok(g);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::character_table;

    fn setup(n: usize, q: u64) -> (GroupContext, CharacterTable) {
        let ctx = GroupContext::from_order(n, q).unwrap();
        let t = character_table(&ctx, 0).unwrap();
        (ctx, t)
    }

    #[test]
    fn transversal_sizes() {
        for (n, q, r) in [(2usize, 3u64, 1u64), (3, 2, 3), (3, 3, 4), (4, 2, 42), (4, 3, 156)] {
            assert_eq!(transversal_index(n, q), r);
            let f = std::sync::Arc::new(FieldDescriptor::from_order(q).unwrap());
            let ring = LocalRing::new(f, Window::depth_zero(n, n as u32)).unwrap();
            let ys = pattern_transversal(&ring, n).unwrap();
            assert_eq!(ys.len() as u64, r);
            verify_transversal(&ring, &ys).unwrap();
        }
    }

    #[test]
    fn newform_at_sigma_and_identity() {
        let (ctx, t) = setup(2, 3);
        let psi = AddChar::new(&ctx, 1).unwrap();
        let rep = DepthZeroRep::new(&ctx, &t, t.cuspidal_rows()[0], psi, 1).unwrap();
        let w = rep.newform_eval(rep.sigma()).unwrap();
        assert_eq!(w[ctx.group.identity() as usize], 1);
        assert_eq!(w, rep.f_sigma);
        let id = rep.ring.identity(2);
        assert!(rep.support_membership(&id).unwrap().is_none());
        assert!(rep.newform_eval(&id).unwrap().iter().all(|&x| x == 0));
    }

    #[test]
    fn two_evaluations_agree() {
        for (n, q) in [(2, 3), (3, 2)] {
            let (ctx, t) = setup(n, q);
            let psi = AddChar::new(&ctx, 1).unwrap();
            let row = t.cuspidal_rows()[0];
            let rep = DepthZeroRep::new(&ctx, &t, row, psi, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for _ in 0..10 {
                let g = rep.sample_support(&mut rng).unwrap();
                assert!(rep.support_membership(&g).unwrap().is_some());
                assert_eq!(rep.newform_eval(&g).unwrap(), rep.newform_integral_eval(&g).unwrap());
            }
        }
    }

    #[test]
    fn coefficients_agree() {
        let (ctx, t) = setup(2, 3);
        let psi = AddChar::new(&ctx, 1).unwrap();
        let rep = DepthZeroRep::new(&ctx, &t, t.cuspidal_rows()[1], psi, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ks = k_sigma(2);
        for _ in 0..10 {
            let g = rep.sample_pattern(&ks, &mut rng).unwrap();
            assert_eq!(rep.matrix_coeff_formula(&g).unwrap(), rep.matrix_coeff_direct(&g).unwrap());
            assert_eq!(rep.matrix_coeff_single(&g).unwrap(), rep.matrix_coeff_single_formula(&g).unwrap());
        }
    }
}
