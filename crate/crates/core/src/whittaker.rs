//! Bessel function properties, the Gelfand Whittaker function and the
//! Whittaker newform of a depth-zero cuspidal.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_function, bessel_via_model, bop, dual_row, AddChar, GelfandGraev};
use crate::characters::{CharacterTable, GroupContext};
use crate::error::{Error, Result};
use crate::group::FqMatrix;
use crate::local::{LMat, LocalRing, Ls};
use crate::newform::DepthZeroRep;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BesselReport {
    pub n: usize,
    pub q: u64,
    pub row: usize,
    pub b1: bool,
    pub b2: bool,
    pub b3: bool,
    pub b4: bool,
    pub model: bool,
    pub counterexample: Option<String>,
}

impl BesselReport {
    pub fn passed(&self) -> bool {
        self.b1 && self.b2 && self.b3 && self.b4 && self.model
    }
}

/// Exhaustive check of (B1)-(B4) and of the model realization for one row.
pub fn check_bessel_properties(ctx: &GroupContext, t: &CharacterTable, row: usize, psi: AddChar) -> Result<BesselReport> {
    let grp = &ctx.group;
    let f = &ctx.cf;
    let n = ctx.n;
    let b = bessel_function(ctx, t, row, psi)?;
    let u = grp.unipotent_upper();
    let is_u = {
        let mut m = vec![false; grp.order()];
        for &x in &u {
            m[x as usize] = true;
        }
        m
    };
    let mut b1 = true;
    let mut b2 = b.at(grp.identity()) == 1;
    let mut b3 = true;
    let mut b4 = true;
    let mut msgs = Vec::new();
    for g in 0..grp.order() as u32 {
        let e = grp.elem(g);
        let mirabolic = (0..n).all(|c| e[(n - 1) * n + c] == u32::from(c == n - 1));
        if mirabolic && (b.at(g) != 0) != is_u[g as usize] && b1 {
            b1 = false;
            msgs.push(format!("B1 at element {g}"));
        }
    }
    'outer: for &x in &u {
        let px = psi.eval_unipotent(ctx, grp.elem(x));
        for &y in &u {
            let py = psi.eval_unipotent(ctx, grp.elem(y));
            for g in 0..grp.order() as u32 {
                let lhs = b.at(grp.mul(grp.mul(x, g), y));
                if lhs != f.mul(f.mul(px, py), b.at(g)) {
                    b2 = false;
                    msgs.push(format!("B2 at ({x}, {g}, {y})"));
                    break 'outer;
                }
            }
        }
    }
    let deg_inv = f.inv(t.degrees[row] % f.ell)?;
    for z in ctx.field.units() {
        let zi = grp.index_of(&FqMatrix::diag(&vec![z; n]).e).unwrap();
        let omega = f.mul(t.chi(ctx, row, zi), deg_inv);
        if let Some(a) = (0..grp.order() as u32).find(|&a| b.at(grp.mul(a, zi)) != f.mul(omega, b.at(a))) {
            b3 = false;
            msgs.push(format!("B3 at ({a}, z = {z})"));
            break;
        }
    }
    let dual = bessel_function(ctx, t, dual_row(ctx, t, row), psi.inverse(ctx))?;
    if let Some(a) = (0..grp.order() as u32).find(|&a| b.at(grp.inv(a)) != dual.at(a)) {
        b4 = false;
        msgs.push(format!("B4 at {a}"));
    }
    let model = bessel_via_model(ctx, t, row, psi)? == b.values;
    if !model {
        msgs.push("model realization differs".into());
    }
    Ok(BesselReport {
        n,
        q: ctx.field.q() as u64,
        row,
        b1,
        b2,
        b3,
        b4,
        model,
        counterexample: msgs.into_iter().next(),
    })
}

/// (1/|U|) sum_{u, b} psi^{-1}(u) alpha(b u g) = alpha(g) for alpha given by
/// its coordinates in the Gelfand-Graev model.
pub fn averaging_lemma_check(ctx: &GroupContext, gg: &GelfandGraev, alpha: &[u64], g: u32) -> Result<bool> {
    let f = &ctx.cf;
    let grp = &ctx.group;
    let u = grp.unipotent_upper();
    let mut s = 0;
    for &x in &u {
        let w = f.inv(gg.psi.eval_unipotent(ctx, grp.elem(x)))?;
        let xg = grp.mul(x, g);
        for &b in &bop(ctx) {
            s = f.add(s, f.mul(w, gg.value(ctx, alpha, grp.mul(b, xg))));
        }
    }
    let lhs = f.mul(s, f.inv(u.len() as u64 % f.ell)?);
    Ok(lhs == gg.value(ctx, alpha, g))
}

pub fn random_equivariant<R: Rng>(ctx: &GroupContext, gg: &GelfandGraev, rng: &mut R) -> Vec<u64> {
    (0..gg.dim()).map(|_| rng.gen_range(0..ctx.cf.ell)).collect()
}

/// B(k̄) for k ∈ GL_n(o).
pub fn gelfand_whittaker_finite(rep: &DepthZeroRep, k: &LMat) -> Result<u64> {
    if !rep.ring.in_k(k)? {
        return Err(Error::NotIntegral);
    }
    Ok(rep.bessel.at(rep.ctx.index(&rep.ring.reduce(k)?)?))
}

/// h = u a k with u upper unipotent, a diagonal, k ∈ K, by column operations
/// from the bottom row up.
pub fn iwasawa(ring: &LocalRing, h: &LMat) -> Result<(LMat, Vec<Ls>, LMat)> {
    let n = h.n;
    let mut m = h.clone();
    let mut e = ring.identity(n);
    let swap = |x: &mut LMat, a: usize, b: usize| {
        for r in 0..n {
            x.e.swap(r * n + a, r * n + b);
        }
    };
    for i in (0..n).rev() {
        let piv = (0..=i)
            .filter_map(|c| m.at(i, c).valuation().map(|v| (v, c)))
            .min()
            .map(|(_, c)| c)
            .ok_or_else(|| Error::PrecisionLoss("singular row in Iwasawa decomposition".into()))?;
        swap(&mut m, piv, i);
        swap(&mut e, piv, i);
        let pinv = ring.inv(m.at(i, i))?;
        for c in 0..i {
            if m.at(i, c).is_known_zero() {
                continue;
            }
            let fct = ring.mul(m.at(i, c), &pinv)?;
            for r in 0..n {
                let x = ring.sub(m.at(r, c), &ring.mul(&fct, m.at(r, i))?)?;
                m.set(r, c, x);
                let y = ring.sub(e.at(r, c), &ring.mul(&fct, e.at(r, i))?)?;
                e.set(r, c, y);
            }
        }
    }
    let diag: Vec<Ls> = (0..n).map(|i| *m.at(i, i)).collect();
    let mut u = ring.identity(n);
    for j in 0..n {
        let dinv = ring.inv(&diag[j])?;
        for i in 0..j {
            u.set(i, j, ring.mul(m.at(i, j), &dinv)?);
        }
    }
    Ok((u, diag, ring.mat_inv(&e)?))
}

/// psi'(x): residue character of the t^0 coefficient (conductor p).
fn psi_p(rep: &DepthZeroRep, x: &Ls) -> Result<u64> {
    Ok(rep.psi.eval(rep.ctx, x.coeff(0)?))
}

/// psi(x): residue character of the t^{-1} coefficient (conductor o).
fn psi_o(rep: &DepthZeroRep, x: &Ls) -> Result<u64> {
    Ok(rep.psi.eval(rep.ctx, x.coeff(-1)?))
}

/// W_Gel(z u k) = omega(z) psi'(u) B(k̄), zero off Z U K.
pub fn gelfand_whittaker(rep: &DepthZeroRep, h: &LMat) -> Result<u64> {
    let ring = &rep.ring;
    let n = h.n;
    let (u, diag, k) = iwasawa(ring, h)?;
    let vals: Vec<i32> = diag.iter().map(|d| ring.val(d)).collect::<Result<_>>()?;
    let v = vals[0];
    if vals.iter().any(|&x| x != v) {
        return Ok(0);
    }
    let f = &rep.ctx.cf;
    let mut kk = k;
    for i in 0..n {
        let s = ring.shift(&diag[i], -v)?;
        for j in 0..n {
            let x = ring.mul(&s, kk.at(i, j))?;
            kk.set(i, j, x);
        }
    }
    let mut phase = 1;
    for i in 0..n - 1 {
        phase = f.mul(phase, psi_p(rep, u.at(i, i + 1))?);
    }
    let omega = if v >= 0 { f.pow(rep.omega, v as u64) } else { f.pow(f.inv(rep.omega)?, (-v) as u64) };
    Ok(f.mul(f.mul(omega, phase), gelfand_whittaker_finite(rep, &kk)?))
}

fn require_gl2(rep: &DepthZeroRep) -> Result<()> {
    if rep.ctx.n != 2 {
        return Err(Error::InvalidParameter("Whittaker newform is implemented for n = 2".into()));
    }
    Ok(())
}

/// int_U psi^{-1}(u) c(u g) du with du(U ∩ K^Sigma) = 1, as a finite sum over
/// U(o) \ U with polar parts deep enough to reach the support of c.
pub fn whittaker_via_coefficient(rep: &DepthZeroRep, g: &LMat) -> Result<u64> {
    require_gl2(rep)?;
    let ring = &rep.ring;
    let f = &rep.ctx.cf;
    let dv = ring.det_val(g)?;
    if dv.rem_euclid(2) != 0 {
        return Ok(0);
    }
    let v = dv / 2;
    let lo = v - 1 + ring.min_val(&ring.mat_inv(g)?)?;
    let q = ring.q() as u64;
    let depth = (-lo).max(0) as u32;
    let mut total = 0;
    for code in 0..q.pow(depth) {
        let digits = crate::cosets::residue_digits(code, q, depth);
        let x = ring.from_coeffs(lo.min(0), &digits, ring.window.n)?;
        let mut u = ring.identity(2);
        u.set(0, 1, x);
        let c = rep.matrix_coeff_direct(&ring.mat_mul(&u, g)?)?;
        if c != 0 {
            total = f.add(total, f.mul(f.inv(psi_o(rep, &x)?)?, c));
        }
    }
    Ok(f.mul(total, f.inv(q % f.ell)?))
}

/// sum over K(2) / L of W_Gel(Sigma g k Sigma^{-1}), with k = diag(a, 1).
pub fn whittaker_via_gelfand(rep: &DepthZeroRep, g: &LMat) -> Result<u64> {
    require_gl2(rep)?;
    let ring = &rep.ring;
    let f = &rep.ctx.cf;
    let sigma = rep.sigma();
    let sigma_inv = ring.mat_inv(sigma)?;
    let left = ring.mat_mul(sigma, g)?;
    let mut total = 0;
    for a in rep.ctx.field.units() {
        let mut k = ring.identity(2);
        k.set(0, 0, ring.constant(a));
        let h = ring.mat_mul3(&left, &k, &sigma_inv)?;
        total = f.add(total, gelfand_whittaker(rep, &h)?);
    }
    Ok(total)
}

/// Both expressions divided by their value at the identity.
pub struct WhittakerNewform<'a, 'b> {
    pub rep: &'b DepthZeroRep<'a>,
    scale1: u64,
    scale2: u64,
}

impl<'a, 'b> WhittakerNewform<'a, 'b> {
    pub fn new(rep: &'b DepthZeroRep<'a>) -> Result<Self> {
        let f = &rep.ctx.cf;
        let id = rep.ring.identity(rep.ctx.n);
        let w1 = whittaker_via_coefficient(rep, &id)?;
        let w2 = whittaker_via_gelfand(rep, &id)?;
        let scale1 = f.inv(w1).map_err(|_| Error::VerificationFailure("W(1) = 0 for the coefficient integral".into()))?;
        let scale2 = f.inv(w2).map_err(|_| Error::VerificationFailure("W(1) = 0 for the Gelfand integral".into()))?;
        Ok(WhittakerNewform { rep, scale1, scale2 })
    }

    pub fn via_coefficient(&self, g: &LMat) -> Result<u64> {
        Ok(self.rep.ctx.cf.mul(self.scale1, whittaker_via_coefficient(self.rep, g)?))
    }

    pub fn via_gelfand(&self, g: &LMat) -> Result<u64> {
        Ok(self.rep.ctx.cf.mul(self.scale2, whittaker_via_gelfand(self.rep, g)?))
    }

    /// t^v u x k with u ∈ U(p^{-2}), x ∈ K^Sigma, k ∈ K(2).
    pub fn sample_support<R: Rng>(&self, rng: &mut R) -> Result<LMat> {
        let ring = &self.rep.ring;
        let u = self.upper(rng, -2)?;
        let x = crate::newform::k_sigma(2).sample(ring, rng, 3)?;
        let k = crate::local::PatternGroup::k_level(2, 2).sample(ring, rng, 3)?;
        let z = ring.scalar(2, &ring.monomial(rng.gen_range(-1..=1))?);
        ring.mat_mul(&ring.mat_mul3(&z, &u, &x)?, &k)
    }

    /// u diag(t^a, 1) k with a ≠ 0.
    pub fn sample_off_support<R: Rng>(&self, rng: &mut R) -> Result<LMat> {
        let ring = &self.rep.ring;
        let u = self.upper(rng, -2)?;
        let a = [-2, -1, 1, 2][rng.gen_range(0..4)];
        let d = ring.diag_pow(&[a, 0])?;
        let k = crate::local::PatternGroup::k_level(2, 2).sample(ring, rng, 3)?;
        ring.mat_mul3(&u, &d, &k)
    }

    fn upper<R: Rng>(&self, rng: &mut R, lo: i32) -> Result<LMat> {
        let ring = &self.rep.ring;
        let mut u = ring.identity(2);
        u.set(0, 1, ring.random(rng, lo, 2)?);
        Ok(u)
    }

    pub fn psi_o(&self, x: &Ls) -> Result<u64> {
        psi_o(self.rep, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::character_table;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bessel_properties_gl2_f3() {
        let ctx = GroupContext::from_order(2, 3).unwrap();
        let t = character_table(&ctx, 0).unwrap();
        let psi = AddChar::new(&ctx, 1).unwrap();
        for row in t.cuspidal_rows() {
            let r = check_bessel_properties(&ctx, &t, row, psi).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn averaging_lemma_gl2() {
        let ctx = GroupContext::from_order(2, 2).unwrap();
        let gg = GelfandGraev::new(&ctx, AddChar::new(&ctx, 1).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..5 {
            let a = random_equivariant(&ctx, &gg, &mut rng);
            for g in 0..ctx.group.order() as u32 {
                assert!(averaging_lemma_check(&ctx, &gg, &a, g).unwrap());
            }
        }
    }

    #[test]
    fn iwasawa_reassembles() {
        let ctx = GroupContext::from_order(3, 2).unwrap();
        let t = character_table(&ctx, 0).unwrap();
        let rep = DepthZeroRep::new(&ctx, &t, t.cuspidal_rows()[0], AddChar::new(&ctx, 1).unwrap(), 1).unwrap();
        let ring = &rep.ring;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let h = crate::newform::sample_generic(ring, 3, -1, 3, &mut rng).unwrap();
            let (u, d, k) = iwasawa(ring, &h).unwrap();
            assert!(ring.in_k(&k).unwrap());
            let mut a = ring.zeros(3);
            for (i, x) in d.iter().enumerate() {
                a.set(i, i, *x);
            }
            let diff = ring.mat_sub(&ring.mat_mul3(&u, &a, &k).unwrap(), &h).unwrap();
            assert!(diff.e.iter().all(|x| x.is_known_zero()));
        }
    }

    #[test]
    fn whittaker_expressions_gl2() {
        for q in [2, 3] {
            let ctx = GroupContext::from_order(2, q).unwrap();
            let t = character_table(&ctx, 0).unwrap();
            let rep = DepthZeroRep::new(&ctx, &t, t.cuspidal_rows()[0], AddChar::new(&ctx, 1).unwrap(), 1).unwrap();
            let w = WhittakerNewform::new(&rep).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..5 {
                let g = w.sample_support(&mut rng).unwrap();
                assert_eq!(w.via_coefficient(&g).unwrap(), w.via_gelfand(&g).unwrap());
                let g = w.sample_off_support(&mut rng).unwrap();
                assert_eq!(w.via_coefficient(&g).unwrap(), 0);
                assert_eq!(w.via_gelfand(&g).unwrap(), 0);
            }
        }
    }
}
