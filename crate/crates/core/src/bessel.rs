//! Additive characters, Bessel functions of cuspidal representations and the
//! Gelfand-Graev model.

use rayon::prelude::*;

use crate::characters::{check_subgroup, CharacterTable, GroupContext};
use crate::error::{Error, Result};
use crate::field::Fe;
use crate::group::FqMatrix;
use crate::modp::{ComputationField, Mat};

/// psi_c(x) = zeta_p^{Tr(c x)} on F_q.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AddChar {
    pub c: Fe,
    zeta_p: u64,
}

impl AddChar {
    pub fn new(ctx: &GroupContext, c: Fe) -> Result<Self> {
        if c == 0 || c >= ctx.field.q() {
            return Err(Error::InvalidParameter(format!("psi parameter {c} must be a nonzero field element")));
        }
        Ok(AddChar { c, zeta_p: ctx.cf.root_of_unity(ctx.field.p() as u64)? })
    }

    pub fn inverse(&self, ctx: &GroupContext) -> Self {
        AddChar { c: ctx.field.neg(self.c), zeta_p: self.zeta_p }
    }

    #[inline]
    pub fn eval(&self, ctx: &GroupContext, x: Fe) -> u64 {
        let t = ctx.field.trace(ctx.field.mul(self.c, x));
        ctx.cf.pow(self.zeta_p, t as u64)
    }

    /// psi(sum of superdiagonal entries) for u in U.
    pub fn eval_unipotent(&self, ctx: &GroupContext, u: &[Fe]) -> u64 {
        let n = ctx.n;
        let s = (0..n - 1).fold(0, |acc, i| ctx.field.add(acc, u[i * n + i + 1]));
        self.eval(ctx, s)
    }
}

/// Row of the contragredient: chi'(g) = chi(g^{-1}).
pub fn dual_row(ctx: &GroupContext, t: &CharacterTable, row: usize) -> usize {
    let target: Vec<u64> = (0..ctx.classes.count())
        .map(|k| t.values[row][ctx.classes.inv_class[k] as usize])
        .collect();
    t.values.iter().position(|v| *v == target).expect("dual character present")
}

/// B(g) = |U|^{-1} sum_u psi^{-1}(u) chi(g u), stored for every group element.
#[derive(Clone, Debug)]
pub struct BesselTable {
    pub row: usize,
    pub psi: AddChar,
    pub values: Vec<u64>,
}

impl BesselTable {
    #[inline]
    pub fn at(&self, g: u32) -> u64 {
        self.values[g as usize]
    }
}

pub fn bessel_function(
    ctx: &GroupContext,
    t: &CharacterTable,
    row: usize,
    psi: AddChar,
) -> Result<BesselTable> {
    if !t.cuspidal[row] {
        return Err(Error::NotCuspidal(row));
    }
    let f = &ctx.cf;
    let g = &ctx.group;
    let u = g.unipotent_upper();
    let weights: Vec<u64> = u
        .iter()
        .map(|&x| f.inv(psi.eval_unipotent(ctx, g.elem(x))).unwrap())
        .collect();
    let inv_u = f.inv(u.len() as u64 % f.ell)?;
    let values = (0..g.order() as u32)
        .into_par_iter()
        .map(|a| {
            let s = u.iter().zip(&weights).fold(0, |acc, (&x, &w)| {
                f.add(acc, f.mul(w, t.chi(ctx, row, g.mul(a, x))))
            });
            f.mul(s, inv_u)
        })
        .collect();
    Ok(BesselTable { row, psi, values })
}

/// Lower triangular invertible (n-1) x (n-1) blocks, padded with a 1 in the corner.
pub fn bop(ctx: &GroupContext) -> Vec<u32> {
    let n = ctx.n;
    (0..ctx.group.order() as u32)
        .filter(|&i| {
            let e = ctx.group.elem(i);
            (0..n).all(|r| {
                (0..n).all(|c| {
                    let v = e[r * n + c];
                    if r == n - 1 || c == n - 1 {
                        v == u32::from(r == c)
                    } else {
                        c <= r || v == 0
                    }
                })
            })
        })
        .collect()
}

/// F(g) = sum over b in B^op_{n-1} of B(g b).
pub fn bessel_bop_average(ctx: &GroupContext, b: &BesselTable) -> Vec<u64> {
    let f = &ctx.cf;
    let g = &ctx.group;
    let bs = bop(ctx);
    (0..g.order() as u32)
        .into_par_iter()
        .map(|x| bs.iter().fold(0, |acc, &y| f.add(acc, b.at(g.mul(x, y)))))
        .collect()
}

/// The induced representation ind_U^G psi with basis indexed by U\G.
pub struct GelfandGraev {
    pub reps: Vec<u32>,
    /// For every g: the coset index of U g and psi(u) where g = u * rep.
    pub coset: Vec<u32>,
    pub phase: Vec<u64>,
    pub psi: AddChar,
}

impl GelfandGraev {
    pub fn new(ctx: &GroupContext, psi: AddChar) -> Self {
        let g = &ctx.group;
        let u = g.unipotent_upper();
        let mut coset = vec![u32::MAX; g.order()];
        let mut phase = vec![0; g.order()];
        let mut reps = Vec::new();
        for x in 0..g.order() as u32 {
            if coset[x as usize] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            reps.push(x);
            for &y in &u {
                let ux = g.mul(y, x);
                coset[ux as usize] = id;
                phase[ux as usize] = psi.eval_unipotent(ctx, g.elem(y));
            }
        }
        GelfandGraev { reps, coset, phase, psi }
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// rho(g) v for the right regular action (rho(g) f)(y) = f(y g).
    pub fn act(&self, ctx: &GroupContext, g: u32, v: &[u64]) -> Vec<u64> {
        let f = &ctx.cf;
        let gi = ctx.group.inv(g);
        let mut out = vec![0; v.len()];
        for (xi, &x) in self.reps.iter().enumerate() {
            if v[xi] == 0 {
                continue;
            }
            let h = ctx.group.mul(x, gi);
            let c = self.coset[h as usize] as usize;
            let w = f.inv(self.phase[h as usize]).unwrap();
            out[c] = f.add(out[c], f.mul(w, v[xi]));
        }
        out
    }

    /// Value at g of the function with coordinates v.
    pub fn value(&self, ctx: &GroupContext, v: &[u64], g: u32) -> u64 {
        ctx.cf.mul(self.phase[g as usize], v[self.coset[g as usize] as usize])
    }

    /// Basis of the tau-isotypic subspace, the image of
    /// E = (d/|G|) sum chi(g^{-1}) rho(g).
    pub fn isotypic_basis(&self, ctx: &GroupContext, t: &CharacterTable, row: usize) -> Result<Vec<Vec<u64>>> {
        let f = &ctx.cf;
        let g = &ctx.group;
        let dim = self.dim();
        // column x of E: sum over h of chi(x^{-1} h) psi^{-1}(phase h) at coset(h)
        let cols: Vec<Vec<u64>> = self
            .reps
            .par_iter()
            .map(|&x| {
                let xi = g.inv(x);
                let mut col = vec![0; dim];
                for h in 0..g.order() as u32 {
                    let c = t.chi(ctx, row, g.mul(xi, h));
                    if c == 0 {
                        continue;
                    }
                    let w = f.inv(self.phase[h as usize]).unwrap();
                    let k = self.coset[h as usize] as usize;
                    col[k] = f.add(col[k], f.mul(c, w));
                }
                col
            })
            .collect();
        let mut m = Mat::from_rows(&cols);
        let rank = m.rref(f).len();
        let d = t.degrees[row] as usize;
        if rank != d {
            return Err(Error::ProjectionRankMismatch { expected: d, got: rank });
        }
        Ok((0..rank).map(|i| m.row(i).to_vec()).collect())
    }

    pub fn unipotent_generators(ctx: &GroupContext) -> Vec<u32> {
        let n = ctx.n;
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for b in ctx.field.prime_basis() {
                    let mut m = FqMatrix::identity(n);
                    m.set(i, j, b);
                    out.push(ctx.group.index_of(&m.e).unwrap());
                }
            }
        }
        out
    }
}

fn combine(f: &ComputationField, coeffs: &[u64], basis: &[Vec<u64>]) -> Vec<u64> {
    let mut v = vec![0; basis[0].len()];
    for (c, b) in coeffs.iter().zip(basis) {
        if *c == 0 {
            continue;
        }
        for (x, &y) in v.iter_mut().zip(b) {
            *x = f.add(*x, f.mul(*c, y));
        }
    }
    v
}

/// Bessel function recovered inside the Gelfand-Graev model: the unique
/// (U, psi)-equivariant vector of the isotypic component, normalised at 1.
pub fn bessel_via_model(ctx: &GroupContext, t: &CharacterTable, row: usize, psi: AddChar) -> Result<Vec<u64>> {
    if !t.cuspidal[row] {
        return Err(Error::NotCuspidal(row));
    }
    let f = &ctx.cf;
    let gg = GelfandGraev::new(ctx, psi);
    let basis = gg.isotypic_basis(ctx, t, row)?;
    let d = basis.len();
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for u in GelfandGraev::unipotent_generators(ctx) {
        let pu = psi.eval_unipotent(ctx, ctx.group.elem(u));
        let images: Vec<Vec<u64>> = basis
            .iter()
            .map(|b| {
                let rb = gg.act(ctx, u, b);
                rb.iter().zip(b).map(|(&x, &y)| f.sub(x, f.mul(pu, y))).collect()
            })
            .collect();
        for k in 0..gg.dim() {
            rows.push((0..d).map(|l| images[l][k]).collect());
        }
    }
    let ker = Mat::from_rows(&rows).kernel(f);
    if ker.len() != 1 {
        return Err(Error::ProjectionRankMismatch { expected: 1, got: ker.len() });
    }
    let v = combine(f, &ker[0], &basis);
    let one = gg.value(ctx, &v, ctx.group.identity());
    let scale = f.inv(one).map_err(|_| Error::VerificationFailure("model vector vanishes at 1".into()))?;
    Ok((0..ctx.group.order() as u32)
        .map(|g| f.mul(scale, gg.value(ctx, &v, g)))
        .collect())
}

/// dim of H-fixed vectors in the tau-isotypic part of the Gelfand-Graev model.
pub fn model_invariant_dim(
    ctx: &GroupContext,
    t: &CharacterTable,
    row: usize,
    psi: AddChar,
    h: &[u32],
) -> Result<usize> {
    check_subgroup(ctx, h, 0)?;
    let f = &ctx.cf;
    let gg = GelfandGraev::new(ctx, psi);
    let basis = gg.isotypic_basis(ctx, t, row)?;
    let averaged: Vec<Vec<u64>> = basis
        .par_iter()
        .map(|b| {
            let mut acc = vec![0; b.len()];
            for &x in h {
                for (a, y) in acc.iter_mut().zip(gg.act(ctx, x, b)) {
                    *a = f.add(*a, y);
                }
            }
            acc
        })
        .collect();
    Ok(Mat::from_rows(&averaged).rank(f))
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
    fn bessel_normalised_and_equivariant() {
        let (ctx, t) = setup(2, 3);
        let psi = AddChar::new(&ctx, 1).unwrap();
        let u = ctx.group.unipotent_upper();
        for r in t.cuspidal_rows() {
            let b = bessel_function(&ctx, &t, r, psi).unwrap();
            assert_eq!(b.at(ctx.group.identity()), 1);
            for a in (0..ctx.order() as u32).step_by(7) {
                for &u1 in &u {
                    for &u2 in &u {
                        let lhs = b.at(ctx.group.mul(ctx.group.mul(u1, a), u2));
                        let ph = ctx.cf.mul(
                            psi.eval_unipotent(&ctx, ctx.group.elem(u1)),
                            psi.eval_unipotent(&ctx, ctx.group.elem(u2)),
                        );
                        assert_eq!(lhs, ctx.cf.mul(ph, b.at(a)));
                    }
                }
            }
        }
    }

    #[test]
    fn non_cuspidal_rejected() {
        let (ctx, t) = setup(2, 3);
        let psi = AddChar::new(&ctx, 1).unwrap();
        assert!(matches!(bessel_function(&ctx, &t, 0, psi), Err(Error::NotCuspidal(0))));
    }

    #[test]
    fn model_agrees_with_formula() {
        for (n, q) in [(2, 2), (2, 3), (3, 2)] {
            let (ctx, t) = setup(n, q);
            let psi = AddChar::new(&ctx, 1).unwrap();
            for r in t.cuspidal_rows() {
                let b = bessel_function(&ctx, &t, r, psi).unwrap();
                assert_eq!(bessel_via_model(&ctx, &t, r, psi).unwrap(), b.values);
            }
        }
    }

    #[test]
    fn inverse_argument_is_dual_bessel() {
        let (ctx, t) = setup(2, 4);
        let psi = AddChar::new(&ctx, 1).unwrap();
        let psi_inv = psi.inverse(&ctx);
        for r in t.cuspidal_rows() {
            let b = bessel_function(&ctx, &t, r, psi).unwrap();
            let bd = bessel_function(&ctx, &t, dual_row(&ctx, &t, r), psi_inv).unwrap();
            for a in 0..ctx.order() as u32 {
                assert_eq!(b.at(ctx.group.inv(a)), bd.at(a));
            }
        }
    }

    #[test]
    fn bop_average_is_one_at_identity() {
        for (n, q) in [(2, 3), (3, 2)] {
            let (ctx, t) = setup(n, q);
            let psi = AddChar::new(&ctx, 1).unwrap();
            for r in t.cuspidal_rows() {
                let b = bessel_function(&ctx, &t, r, psi).unwrap();
                let f = bessel_bop_average(&ctx, &b);
                assert_eq!(f[ctx.group.identity() as usize], 1);
            }
        }
    }

    #[test]
    fn bop_sizes() {
        let (ctx, _) = setup(3, 2);
        assert_eq!(bop(&ctx).len(), 2);
        let (ctx, _) = setup(2, 5);
        assert_eq!(bop(&ctx).len(), 4);
    }
}
