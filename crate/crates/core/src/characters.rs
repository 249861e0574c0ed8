//! Conjugacy classes and character tables of GL_n(F_q) over F_l'.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, FieldDescriptor, FieldSpec};
use crate::group::{FqMatrix, GlGroup};
use crate::modp::{roots, ComputationField, Mat};

const MAX_SPLIT_ATTEMPTS: usize = 200;
const FULL_CLOSURE_LIMIT: usize = 1000;
const CLOSURE_SAMPLES: usize = 100_000;

pub struct Classes {
    /// Least group index in each class, ascending.
    pub reps: Vec<u32>,
    pub sizes: Vec<u64>,
    pub class_of: Vec<u32>,
    /// Class of g^{-1} for g in class k.
    pub inv_class: Vec<u32>,
}

impl Classes {
    pub fn compute(g: &GlGroup) -> Self {
        let gens = g.generators();
        let mut class_of = vec![u32::MAX; g.order()];
        let mut reps = Vec::new();
        let mut sizes = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..g.order() as u32 {
            if class_of[start as usize] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            reps.push(start);
            class_of[start as usize] = id;
            queue.push_back(start);
            let mut size = 0u64;
            while let Some(x) = queue.pop_front() {
                size += 1;
                for &s in &gens {
                    let y = g.conj(s, x);
                    if class_of[y as usize] == u32::MAX {
                        class_of[y as usize] = id;
                        queue.push_back(y);
                    }
                }
            }
            sizes.push(size);
        }
        let inv_class = reps.iter().map(|&r| class_of[g.inv(r) as usize]).collect();
        Classes { reps, sizes, class_of, inv_class }
    }

    pub fn count(&self) -> usize {
        self.reps.len()
    }

    /// Number of elements of each class inside a list of group elements.
    pub fn histogram(&self, elems: &[u32]) -> Vec<u64> {
        let mut h = vec![0; self.count()];
        for &x in elems {
            h[self.class_of[x as usize] as usize] += 1;
        }
        h
    }
}

/// Everything attached to a fixed GL_n(F_q).
pub struct GroupContext {
    pub n: usize,
    pub field: Arc<FieldDescriptor>,
    pub group: GlGroup,
    pub classes: Classes,
    pub cf: ComputationField,
}

impl GroupContext {
    pub fn new(n: usize, field: Arc<FieldDescriptor>) -> Result<Self> {
        let group = GlGroup::new(n, field.clone())?;
        let cf = ComputationField::for_group(n, &field)?;
        let classes = Classes::compute(&group);
        Ok(GroupContext { n, field, group, classes, cf })
    }

    pub fn from_order(n: usize, q: u64) -> Result<Self> {
        Self::new(n, Arc::new(FieldDescriptor::from_order(q)?))
    }

    pub fn order(&self) -> u64 {
        self.group.order() as u64
    }

    pub fn identity_class(&self) -> usize {
        self.classes.class_of[self.group.identity() as usize] as usize
    }

    pub fn index(&self, m: &FqMatrix) -> Result<u32> {
        self.group.index_of(&m.e).ok_or(Error::SingularMatrix)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CharacterTable {
    pub n: usize,
    pub field: FieldSpec,
    pub cf: ComputationField,
    pub seed: u64,
    pub class_reps: Vec<u32>,
    pub class_sizes: Vec<u64>,
    pub degrees: Vec<u64>,
    /// values[row][class] in F_l'
    pub values: Vec<Vec<u64>>,
    pub cuspidal: Vec<bool>,
}

impl CharacterTable {
    pub fn rows(&self) -> usize {
        self.values.len()
    }

    pub fn cuspidal_rows(&self) -> Vec<usize> {
        (0..self.rows()).filter(|&r| self.cuspidal[r]).collect()
    }

    #[inline]
    pub fn chi(&self, ctx: &GroupContext, row: usize, g: u32) -> u64 {
        self.values[row][ctx.classes.class_of[g as usize] as usize]
    }

    /// Row and column orthogonality plus sum of squared degrees.
    pub fn verify(&self, ctx: &GroupContext) -> Result<()> {
        let f = &ctx.cf;
        let r = self.rows();
        let k = ctx.classes.count();
        if r != k {
            return Err(Error::InconsistentOrthogonality(format!("{r} rows for {k} classes")));
        }
        let order = f.from_u128(ctx.order() as u128);
        let inv = &ctx.classes.inv_class;
        for a in 0..r {
            for b in a..r {
                let s = (0..k).fold(0, |acc, c| {
                    let t = f.mul(self.values[a][c], self.values[b][inv[c] as usize]);
                    f.add(acc, f.mul(t, self.class_sizes[c] % f.ell))
                });
                let expect = if a == b { order } else { 0 };
                if s != expect {
                    return Err(Error::InconsistentOrthogonality(format!("rows {a}, {b}")));
                }
            }
        }
        for c in 0..k {
            for d in c..k {
                let s = (0..r).fold(0, |acc, a| {
                    f.add(acc, f.mul(self.values[a][c], self.values[a][inv[d] as usize]))
                });
                let expect = if c == d { (ctx.order() / self.class_sizes[c]) % f.ell } else { 0 };
                if s != expect {
                    return Err(Error::InconsistentOrthogonality(format!("columns {c}, {d}")));
                }
            }
        }
        let sq: u128 = self.degrees.iter().map(|&d| d as u128 * d as u128).sum();
        if sq != ctx.order() as u128 {
            return Err(Error::InconsistentOrthogonality("sum of squared degrees".into()));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,degree,cuspidal");
        for c in 0..self.class_reps.len() {
            s.push_str(&format!(",c{c}"));
        }
        s.push('\n');
        for r in 0..self.rows() {
            s.push_str(&format!("{},{},{}", r, self.degrees[r], self.cuspidal[r]));
            for v in &self.values[r] {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Class multiplication coefficients a[k][i * r + j] = #{x in C_i : x^{-1} g_k in C_j}.
fn class_coefficients(ctx: &GroupContext) -> Vec<Vec<u32>> {
    let g = &ctx.group;
    let cl = &ctx.classes;
    let r = cl.count();
    cl.reps
        .par_iter()
        .map(|&gk| {
            let mut counts = vec![0u32; r * r];
            for x in 0..g.order() as u32 {
                let i = cl.class_of[x as usize] as usize;
                let j = cl.class_of[g.mul(g.inv(x), gk) as usize] as usize;
                counts[i * r + j] += 1;
            }
            counts
        })
        .collect()
}

/// Dixon-Schneider: simultaneous eigenvectors of the class matrices over F_l'.
pub fn character_table(ctx: &GroupContext, seed: u64) -> Result<CharacterTable> {
    let f = &ctx.cf;
    let r = ctx.classes.count();
    let coeffs = class_coefficients(ctx);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eigen: Vec<Vec<u64>> = Vec::new();
    let mut queue: Vec<Vec<Vec<u64>>> = vec![(0..r)
        .map(|i| {
            let mut v = vec![0; r];
            v[i] = 1;
            v
        })
        .collect()];
    let mut attempts = 0;
    while let Some(basis) = queue.pop() {
        if basis.len() == 1 {
            eigen.push(basis[0].clone());
            continue;
        }
        let pivots: Vec<usize> = basis
            .iter()
            .map(|b| b.iter().position(|&x| x != 0).unwrap())
            .collect();
        loop {
            attempts += 1;
            if attempts > MAX_SPLIT_ATTEMPTS {
                return Err(Error::EigenspaceSplitFailure(attempts - 1));
            }
            let c: Vec<u64> = (0..r).map(|_| rng.gen_range(0..f.ell)).collect();
            // A[j][k] = sum_i c_i a_{ijk}
            let mut a = Mat::zeros(r, r);
            for k in 0..r {
                for i in 0..r {
                    if c[i] == 0 {
                        continue;
                    }
                    for j in 0..r {
                        let n = coeffs[k][i * r + j];
                        if n != 0 {
                            let v = f.add(a.at(j, k), f.mul(c[i], n as u64 % f.ell));
                            a.set(j, k, v);
                        }
                    }
                }
            }
            let d = basis.len();
            let mut restricted = Mat::zeros(d, d);
            for (m, b) in basis.iter().enumerate() {
                let ab = a.mul_vec(f, b);
                for (l, &p) in pivots.iter().enumerate() {
                    restricted.set(l, m, ab[p]);
                }
            }
            let cp = restricted.charpoly(f);
            let lambdas = roots(f, &cp, &mut rng);
            if lambdas.len() < 2 {
                continue;
            }
            let mut pieces = Vec::new();
            for &lam in &lambdas {
                let mut shifted = restricted.clone();
                for l in 0..d {
                    let v = f.sub(shifted.at(l, l), lam);
                    shifted.set(l, l, v);
                }
                let ker = shifted.kernel(f);
                let vecs: Vec<Vec<u64>> = ker
                    .iter()
                    .map(|coord| {
                        let mut v = vec![0; r];
                        for (m, &cm) in coord.iter().enumerate() {
                            if cm == 0 {
                                continue;
                            }
                            for (x, &bx) in v.iter_mut().zip(&basis[m]) {
                                *x = f.add(*x, f.mul(cm, bx));
                            }
                        }
                        v
                    })
                    .collect();
                let mut m = Mat::from_rows(&vecs);
                let rank = m.rref(f).len();
                pieces.push((0..rank).map(|i| m.row(i).to_vec()).collect::<Vec<_>>());
            }
            if pieces.iter().map(|p| p.len()).sum::<usize>() != d {
                continue;
            }
            queue.extend(pieces);
            break;
        }
    }
    let id = ctx.identity_class();
    let order = ctx.order();
    let mut rows: Vec<(u64, Vec<u64>)> = Vec::with_capacity(r);
    for w in eigen {
        let w0 = w[id];
        let inv0 = f.inv(w0).map_err(|_| Error::InconsistentOrthogonality("zero at identity".into()))?;
        let w: Vec<u64> = w.iter().map(|&x| f.mul(x, inv0)).collect();
        let mut s = 0;
        for k in 0..r {
            let t = f.mul(w[k], w[ctx.classes.inv_class[k] as usize]);
            s = f.add(s, f.mul(t, f.inv(ctx.classes.sizes[k] % f.ell)?));
        }
        let d2 = f.mul(order % f.ell, f.inv(s)?);
        let d = f
            .sqrt_int(d2)
            .filter(|&d| d > 0 && order.is_multiple_of(d))
            .ok_or_else(|| Error::InconsistentOrthogonality(format!("degree^2 = {d2}")))?;
        let vals: Vec<u64> = (0..r)
            .map(|k| f.mul(d, f.mul(w[k], f.inv(ctx.classes.sizes[k] % f.ell).unwrap())))
            .collect();
        rows.push((d, vals));
    }
    rows.sort();
    let mut table = CharacterTable {
        n: ctx.n,
        field: ctx.field.spec(),
        cf: *f,
        seed,
        class_reps: ctx.classes.reps.clone(),
        class_sizes: ctx.classes.sizes.clone(),
        degrees: rows.iter().map(|r| r.0).collect(),
        values: rows.into_iter().map(|r| r.1).collect(),
        cuspidal: Vec::new(),
    };
    table.verify(ctx)?;
    table.cuspidal = cuspidal_flags(ctx, &table);
    Ok(table)
}

/// Lower block unipotent radical {[[1, 0], [X, 1]]} with X of size n2 x n1.
pub fn lower_unipotent_radical(ctx: &GroupContext, n1: usize) -> Vec<u32> {
    let n = ctx.n;
    let q = ctx.field.q() as u64;
    let n2 = n - n1;
    let cells = n1 * n2;
    let total = q.pow(cells as u32);
    (0..total)
        .map(|mut code| {
            let mut m = FqMatrix::identity(n);
            for i in 0..n2 {
                for j in 0..n1 {
                    m.set(n1 + i, j, (code % q) as Fe);
                    code /= q;
                }
            }
            ctx.group.index_of(&m.e).unwrap()
        })
        .collect()
}

fn cuspidal_flags(ctx: &GroupContext, t: &CharacterTable) -> Vec<bool> {
    let f = &ctx.cf;
    let hists: Vec<Vec<u64>> = (1..ctx.n)
        .map(|n1| ctx.classes.histogram(&lower_unipotent_radical(ctx, n1)))
        .collect();
    (0..t.rows())
        .map(|row| {
            hists.iter().all(|h| {
                let s = h.iter().zip(&t.values[row]).fold(0, |acc, (&c, &v)| {
                    f.add(acc, f.mul(c % f.ell, v))
                });
                s == 0
            })
        })
        .collect()
}

/// Checks identity membership and closure under products; full for small
/// subsets, on seeded random pairs otherwise.
pub fn check_subgroup(ctx: &GroupContext, elems: &[u32], seed: u64) -> Result<()> {
    let g = &ctx.group;
    let set: HashSet<u32> = elems.iter().copied().collect();
    if !set.contains(&g.identity()) {
        return Err(Error::NotASubgroup("missing identity".into()));
    }
    if elems.len() <= FULL_CLOSURE_LIMIT {
        for &a in elems {
            for &b in elems {
                if !set.contains(&g.mul(a, b)) {
                    return Err(Error::NotASubgroup(format!("{a} * {b}")));
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..CLOSURE_SAMPLES {
            let a = elems[rng.gen_range(0..elems.len())];
            let b = elems[rng.gen_range(0..elems.len())];
            if !set.contains(&g.mul(a, b)) {
                return Err(Error::NotASubgroup(format!("{a} * {b}")));
            }
        }
    }
    Ok(())
}

/// dim of the H-fixed vectors of the representation with the given row.
pub fn invariant_dim(ctx: &GroupContext, t: &CharacterTable, row: usize, h: &[u32]) -> Result<u64> {
    check_subgroup(ctx, h, 0)?;
    invariant_dim_unchecked(ctx, t, row, h)
}

pub fn invariant_dim_unchecked(
    ctx: &GroupContext,
    t: &CharacterTable,
    row: usize,
    h: &[u32],
) -> Result<u64> {
    let f = &ctx.cf;
    let hist = ctx.classes.histogram(h);
    let s = hist
        .iter()
        .zip(&t.values[row])
        .fold(0, |acc, (&c, &v)| f.add(acc, f.mul(c % f.ell, v)));
    let v = f.mul(s, f.inv(h.len() as u64 % f.ell)?);
    if v > t.degrees[row] {
        return Err(Error::VerificationFailure(format!("invariant dimension lifts to {v}")));
    }
    Ok(v)
}

/// Cuspidal character of GL_2(F_q) attached to the regular character
/// theta_j(gamma^i) = zeta^{(M/(q^2-1)) i j} of F_{q^2}^x, as class values.
pub fn gl2_cuspidal_oracle(ctx: &GroupContext, j: u64) -> Result<Vec<u64>> {
    if ctx.n != 2 {
        return Err(Error::InvalidParameter("oracle is for GL_2".into()));
    }
    let fq = &ctx.field;
    let f = &ctx.cf;
    let q = fq.q() as u64;
    let n = q * q - 1;
    if (j % n).is_multiple_of(q + 1) {
        return Err(Error::NonRegularTheta(j));
    }
    let big = FieldDescriptor::new(fq.p(), 2 * fq.k())?;
    // embed F_q into F_{q^2} through a root of the defining polynomial
    let poly = fq.polynomial();
    let alpha = big
        .elements()
        .find(|&a| {
            poly.iter()
                .rev()
                .fold(0, |acc, &c| big.add(big.mul(acc, a), c))
                == 0
        })
        .ok_or_else(|| Error::VerificationFailure("no embedding".into()))?;
    let embed = |x: Fe| -> Fe {
        fq.digits(x)
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &c)| big.add(acc, big.mul(c, big.pow(alpha, i as u64))))
    };
    let step = f.order / n;
    let theta = |x: Fe| -> u64 {
        let i = big.log(x).expect("nonzero") as u64;
        f.pow(f.zeta, step * ((i * j) % n))
    };
    let mut vals = Vec::with_capacity(ctx.classes.count());
    for &rep in &ctx.classes.reps {
        let m = ctx.group.matrix(rep);
        let tr = embed(m.trace(fq));
        let det = embed(m.det(fq));
        let eig: Vec<Fe> = big
            .units()
            .filter(|&x| big.add(big.sub(big.mul(x, x), big.mul(tr, x)), det) == 0)
            .collect();
        let in_fq = |x: Fe| big.pow(x, q) == x;
        let v = if m.at(0, 1) == 0 && m.at(1, 0) == 0 && m.at(0, 0) == m.at(1, 1) {
            f.mul((q - 1) % f.ell, theta(eig[0]))
        } else if eig.len() == 1 {
            f.neg(theta(eig[0]))
        } else if in_fq(eig[0]) {
            0
        } else {
            f.neg(f.add(theta(eig[0]), theta(eig[1])))
        };
        vals.push(v);
    }
    Ok(vals)
}

/// All GL_2 oracle characters, one per Frobenius orbit of regular theta.
pub fn gl2_cuspidal_oracle_all(ctx: &GroupContext) -> Result<Vec<Vec<u64>>> {
    let q = ctx.field.q() as u64;
    let n = q * q - 1;
    let mut seen = HashMap::new();
    for j in 0..n {
        if j % (q + 1) == 0 {
            continue;
        }
        let key = j.min(j * q % n);
        if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key) {
            e.insert(gl2_cuspidal_oracle(ctx, j)?);
        }
    }
    let mut out: Vec<Vec<u64>> = seen.into_values().collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl2_f2_is_s3() {
        let ctx = GroupContext::from_order(2, 2).unwrap();
        let t = character_table(&ctx, 0).unwrap();
        assert_eq!(t.degrees, vec![1, 1, 2]);
        // the sign character is the unique cuspidal
        assert_eq!(t.cuspidal, vec![false, true, false]);
    }

    #[test]
    fn class_counts() {
        for (n, q, k) in [(2, 3, 8), (3, 2, 6), (2, 4, 15), (2, 5, 24)] {
            let ctx = GroupContext::from_order(n, q).unwrap();
            assert_eq!(ctx.classes.count(), k);
            let total: u64 = ctx.classes.sizes.iter().sum();
            assert_eq!(total, ctx.order());
        }
    }

    #[test]
    fn cuspidal_counts_and_degrees() {
        // GL_2: (q^2 - q)/2 cuspidals of degree q - 1; GL_3(F_2): 2 of degree 3
        for (n, q, count, deg) in [(2, 3, 3, 2), (2, 4, 6, 3), (3, 2, 2, 3)] {
            let ctx = GroupContext::from_order(n, q).unwrap();
            let t = character_table(&ctx, 0).unwrap();
            let c = t.cuspidal_rows();
            assert_eq!(c.len(), count);
            assert!(c.iter().all(|&r| t.degrees[r] == deg));
        }
    }

    #[test]
    fn oracle_matches_gl2() {
        for q in [2, 3, 4, 5] {
            let ctx = GroupContext::from_order(2, q).unwrap();
            let t = character_table(&ctx, 1).unwrap();
            let mut ours: Vec<Vec<u64>> =
                t.cuspidal_rows().iter().map(|&r| t.values[r].clone()).collect();
            ours.sort();
            assert_eq!(ours, gl2_cuspidal_oracle_all(&ctx).unwrap());
        }
    }

    #[test]
    fn non_regular_theta_rejected() {
        let ctx = GroupContext::from_order(2, 3).unwrap();
        assert!(matches!(gl2_cuspidal_oracle(&ctx, 4), Err(Error::NonRegularTheta(4))));
    }

    #[test]
    fn seed_independent_table() {
        let ctx = GroupContext::from_order(2, 3).unwrap();
        let a = character_table(&ctx, 0).unwrap();
        let b = character_table(&ctx, 99).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn invariants_of_borel() {
        let ctx = GroupContext::from_order(2, 3).unwrap();
        let t = character_table(&ctx, 0).unwrap();
        let u = ctx.group.unipotent_upper();
        for r in t.cuspidal_rows() {
            assert_eq!(invariant_dim(&ctx, &t, r, &u).unwrap(), 0);
        }
        assert_eq!(invariant_dim(&ctx, &t, 0, &u).unwrap(), 1);
        assert!(matches!(
            invariant_dim(&ctx, &t, 0, &u[1..]),
            Err(Error::NotASubgroup(_))
        ));
    }
}
