//! The acceptance suite. Criteria 1-9 are computed here; reproducibility is
//! judged by comparing the payloads of two runs.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bessel::{AddChar, GelfandGraev};
use crate::cache::Cache;
use crate::characters::{character_table, gl2_cuspidal_oracle_all, CharacterTable, GroupContext};
use crate::cosets::{binomial, d_family, verify_coset_partition, MackeyEngine, Truncation};
use crate::error::Result;
use crate::field::FieldDescriptor;
use crate::local::{LMat, PatternGroup};
use crate::minimax;
use crate::newform::{k_sigma, window_matrices, DepthZeroRep};
use crate::report::Profile;
use crate::whittaker::{averaging_lemma_check, check_bessel_properties, random_equivariant, WhittakerNewform};

pub const CRITERIA: [&str; 10] = [
    "conductor of depth-zero cuspidals",
    "oldform dimensions",
    "Bessel function properties",
    "newform identity",
    "matrix coefficients",
    "Whittaker newform",
    "coset combinatorics",
    "minimax lemmas",
    "character table cross-check",
    "reproducibility",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub details: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestPayload {
    pub profile: Profile,
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
}

impl SelftestPayload {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

/// Criterion 10 from the payload bytes of two runs.
pub fn reproducibility(first: &[u8], second: &[u8]) -> CriterionResult {
    let same = first == second;
    CriterionResult {
        id: 10,
        name: CRITERIA[9].into(),
        passed: same,
        details: vec![format!(
            "payload sha256 {} / {}",
            crate::report::sha256_hex(first),
            crate::report::sha256_hex(second)
        )],
    }
}

type Group = Arc<(GroupContext, CharacterTable)>;

struct Env<'c> {
    profile: Profile,
    seed: u64,
    cache: Option<&'c Cache>,
    groups: BTreeMap<(usize, u64), Group>,
}

impl Env<'_> {
    fn group(&mut self, n: usize, q: u64) -> Result<Group> {
        if let Some(g) = self.groups.get(&(n, q)) {
            return Ok(g.clone());
        }
        let ctx = GroupContext::from_order(n, q)?;
        let t = match self.cache {
            Some(c) => c.character_table(&ctx, self.seed)?.0,
            None => character_table(&ctx, self.seed)?,
        };
        let g = Arc::new((ctx, t));
        self.groups.insert((n, q), g.clone());
        Ok(g)
    }

    fn desk(&self) -> bool {
        self.profile == Profile::Desk
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9))
    }
}

struct Outcome {
    passed: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { passed: true, details: Vec::new() }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.passed &= ok;
        self.details.push(format!("{} {detail}", if ok { "ok" } else { "FAIL" }));
    }
}

fn conductors(env: &mut Env) -> Result<Outcome> {
    let mut out = Outcome::new();
    let configs: &[(usize, u64)] = if env.desk() { &[(2, 2), (2, 3), (2, 5), (3, 2)] } else { &[(2, 2), (2, 3)] };
    for &(n, q) in configs {
        let g = env.group(n, q)?;
        let (ctx, t) = (&g.0, &g.1);
        for row in t.cuspidal_rows() {
            let mut engine = MackeyEngine::new(ctx, t, row)?;
            let (c, reports) = engine.conductor(n as u32 + 1, env.seed)?;
            let dims: Vec<u64> = reports.iter().map(|r| r.dimension).collect();
            let mut expect = vec![0; n];
            expect.push(1);
            out.check(c as usize == n && dims == expect, format!("({n},{q}) row {row}: c = {c}, dims m=0..={c}: {dims:?}"));
        }
    }
    Ok(out)
}

fn oldforms(env: &mut Env) -> Result<Outcome> {
    let mut out = Outcome::new();
    let configs: &[(usize, u64)] = if env.desk() { &[(2, 2), (2, 3), (2, 5), (3, 2)] } else { &[(2, 2), (2, 3)] };
    let extra = if env.desk() { 4 } else { 2 };
    for &(n, q) in configs {
        let g = env.group(n, q)?;
        let (ctx, t) = (&g.0, &g.1);
        for row in t.cuspidal_rows() {
            let mut engine = MackeyEngine::new(ctx, t, row)?;
            let mut dims = Vec::new();
            let mut ok = true;
            for m in n as u32..=n as u32 + extra {
                let trunc = Truncation { seed: env.seed, ..Truncation::for_level(m) };
                let r = engine.oldform_dimension(m, &trunc)?;
                ok &= r.dimension == binomial(m as i64 - 1, n as i64 - 1);
                dims.push(r.dimension);
            }
            out.check(ok, format!("({n},{q}) row {row}: dims m={n}..={}: {dims:?}", n as u32 + extra));
        }
    }
    Ok(out)
}

fn bessel(env: &mut Env) -> Result<Outcome> {
    let mut out = Outcome::new();
    let configs: &[(usize, u64)] = if env.desk() { &[(2, 2), (2, 3), (2, 4), (3, 2)] } else { &[(2, 2), (2, 3)] };
    for &(n, q) in configs {
        let g = env.group(n, q)?;
        let (ctx, t) = (&g.0, &g.1);
        let psi = AddChar::new(ctx, 1)?;
        for row in t.cuspidal_rows() {
            let r = check_bessel_properties(ctx, t, row, psi)?;
            let what = r.counterexample.clone().unwrap_or_else(|| "B1-B4 and model".into());
            out.check(r.passed(), format!("({n},{q}) row {row}: {what}"));
        }
    }
    Ok(out)
}

fn newform_identity(env: &mut Env) -> Result<Outcome> {
    let mut out = Outcome::new();
    let samples = if env.desk() { 100 } else { 20 };
    for (n, q) in [(2usize, 2u64), (2, 3), (3, 2)] {
        if !env.desk() && n == 3 {
            continue;
        }
        let g = env.group(n, q)?;
        let (ctx, t) = (&g.0, &g.1);
        let psi = AddChar::new(ctx, 1)?;
        let row = t.cuspidal_rows()[0];
        let omega = 2;
        let mut rep = DepthZeroRep::new(ctx, t, row, psi, omega)?;
        let f = &ctx.cf;
        let ring = rep.ring.clone();
        let id = ctx.group.identity() as usize;
        let a = rep.newform_eval(rep.sigma())?[id];
        let b = rep.newform_integral_eval(rep.sigma())?[id];
        let scale = f.mul(a, f.inv(b)?);
        let normalized = |rep: &DepthZeroRep, g: &LMat| -> Result<Vec<u64>> {
            Ok(rep.newform_integral_eval(g)?.iter().map(|&x| f.mul(x, scale)).collect())
        };
        let points: Vec<LMat> = if n == 2 && q == 2 {
            window_matrices(&ring, 2, -1, 1)?
        } else {
            let mut rng = env.rng(4 + q);
            (0..samples).map(|_| rep.sample_support(&mut rng)).collect::<Result<_>>()?
        };
        let mut support = 0;
        let mut bad = 0;
        for p in &points {
            let lhs = rep.newform_eval(p)?;
            support += usize::from(lhs.iter().any(|&x| x != 0));
            bad += usize::from(lhs != normalized(&rep, p)?);
        }
        let kind = if n == 2 && q == 2 { "exhaustive window" } else { "seeded support samples" };
        out.check(bad == 0, format!("({n},{q}) {kind}: {} points, {support} in support, {bad} mismatches", points.len()));

        let mut rng = env.rng(40 + q);
        let kn = PatternGroup::k_level(n, n as i32);
        let z = ring.scalar(n, &ring.monomial(1)?);
        let (mut inv_bad, mut center_bad) = (0, 0);
        let probe: Vec<LMat> = (0..20).map(|_| rep.sample_support(&mut rng)).collect::<Result<_>>()?;
        for p in &probe {
            let base = rep.newform_eval(p)?;
            let k = kn.sample(&ring, &mut rng, 3)?;
            inv_bad += usize::from(rep.newform_eval(&ring.mat_mul(p, &k)?)? != base);
            let scaled: Vec<u64> = base.iter().map(|&x| f.mul(x, omega)).collect();
            center_bad += usize::from(rep.newform_eval(&ring.mat_mul(&z, p)?)? != scaled);
        }
        out.check(inv_bad == 0, format!("({n},{q}) right K(n)-invariance on 20 points"));
        out.check(center_bad == 0, format!("({n},{q}) central character omega(t) = {omega} on 20 points"));
        let before: Vec<Vec<u64>> = probe.iter().map(|p| normalized(&rep, p)).collect::<Result<_>>()?;
        let ys = rep.perturbed_transversal(env.seed ^ 0x55)?;
        rep.set_transversal(ys)?;
        let after: Vec<Vec<u64>> = probe.iter().map(|p| normalized(&rep, p)).collect::<Result<_>>()?;
        out.check(before == after, format!("({n},{q}) integral independent of transversal representatives"));
    }
    Ok(out)
}

fn matrix_coefficients(env: &mut Env) -> Result<Outcome> {
    let mut out = Outcome::new();
    let samples = if env.desk() { 50 } else { 10 };
    for (n, q) in [(2usize, 2u64), (2, 3), (3, 2)] {
        if !env.desk() && n == 3 {
            continue;
        }
        let g = env.group(n, q)?;
        let (ctx, t) = (&g.0, &g.1);
        let psi = AddChar::new(ctx, 1)?;
        let f = &ctx.cf;
        for row in t.cuspidal_rows() {
            for omega in [1u64, 2] {
                let rep = DepthZeroRep::new(ctx, t, row, psi, omega)?;
                let ring = &rep.ring;
                let mut rng = env.rng(500 + 10 * q + row as u64 + omega);
                let tag = format!("({n},{q}) row {row} omega {omega}");
                let ks = k_sigma(n);
                let mut bad = 0;
                for _ in 0..samples {
                    let x = rep.sample_pattern(&ks, &mut rng)?;
                    bad += usize::from(rep.matrix_coeff_formula(&x)? != rep.matrix_coeff_direct(&x)?);
                }
                out.check(bad == 0, format!("{tag}: formula = direct on {samples} points of Sigma^-1 K Sigma"));
                let c = rep.coefficient_constant()?;
                let id = ring.identity(n);
                let at_one = rep.matrix_coeff_single_formula(&id)?;
                let paired = rep.matrix_coeff_single(&id)?;
                out.check(
                    at_one == c && paired == c,
                    format!(
                        "{tag}: c_(f_new, f_Sigma^v)(1) = {} (pairing {}) expected |G|/(|U| dim tau) = {}",
                        f.lift(at_one),
                        f.lift(paired),
                        f.lift(c)
                    ),
                );
                let kn = PatternGroup::k_level(n, n as i32);
                let z = ring.scalar(n, &ring.monomial(1)?);
                let (mut inv_bad, mut center_bad) = (0, 0);
                for _ in 0..samples {
                    let x = rep.sample_pattern(&ks, &mut rng)?;
                    let k1 = kn.sample(ring, &mut rng, 3)?;
                    let k2 = kn.sample(ring, &mut rng, 3)?;
                    let base = rep.matrix_coeff_direct(&x)?;
                    inv_bad += usize::from(rep.matrix_coeff_direct(&ring.mat_mul3(&k1, &x, &k2)?)? != base);
                    center_bad += usize::from(rep.matrix_coeff_direct(&ring.mat_mul(&z, &x)?)? != f.mul(omega, base));
                }
                out.check(inv_bad == 0, format!("{tag}: bi-K(n)-invariance on {samples} pairs"));
                out.check(center_bad == 0, format!("{tag}: central character on {samples} points"));
            }
        }
    }
    Ok(out)
}

fn whittaker(env: &mut Env) -> Result<Outcome> {
    let mut out = Outcome::new();
    let qs: &[u64] = if env.desk() { &[2, 3] } else { &[2] };
    for &q in qs {
        let g = env.group(2, q)?;
        let (ctx, t) = (&g.0, &g.1);
        let psi = AddChar::new(ctx, 1)?;
        for row in t.cuspidal_rows() {
            let rep = DepthZeroRep::new(ctx, t, row, psi, 2)?;
            let ring = &rep.ring;
            let w = WhittakerNewform::new(&rep)?;
            let tag = format!("(2,{q}) row {row}");
            let id = ring.identity(2);
            out.check(w.via_coefficient(&id)? == 1 && w.via_gelfand(&id)? == 1, format!("{tag}: W(1) = 1"));
            let mut rng = env.rng(600 + 10 * q + row as u64);
            let (mut bad, mut nonzero) = (0, 0);
            for _ in 0..20 {
                let x = w.sample_support(&mut rng)?;
                let a = w.via_coefficient(&x)?;
                nonzero += usize::from(a != 0);
                bad += usize::from(a != w.via_gelfand(&x)?);
            }
            out.check(bad == 0, format!("{tag}: expressions agree on 20 support points ({nonzero} nonzero)"));
            let mut off = 0;
            for _ in 0..50 {
                let x = w.sample_off_support(&mut rng)?;
                off += usize::from(w.via_coefficient(&x)? != 0 || w.via_gelfand(&x)? != 0);
            }
            out.check(off == 0, format!("{tag}: vanishing on 50 non-support points"));
            let k2 = PatternGroup::k_level(2, 2);
            let mut equiv = 0;
            for _ in 0..20 {
                let mut u = ring.identity(2);
                let x = ring.random(&mut rng, -2, 2)?;
                u.set(0, 1, x);
                let a = ring.constant(rng.gen_range(1..ctx.field.q()));
                let mut d = ring.identity(2);
                d.set(0, 0, a);
                let k = k2.sample(ring, &mut rng, 3)?;
                let h = ring.mat_mul3(&u, &d, &k)?;
                let expect = w.psi_o(&x)?;
                equiv += usize::from(w.via_coefficient(&h)? != expect || w.via_gelfand(&h)? != expect);
            }
            out.check(equiv == 0, format!("{tag}: W(u diag(a,1) k) = psi(u) on 20 points"));
        }
    }
    let runs: &[(usize, u64, usize)] = if env.desk() { &[(2, 3, 100), (3, 2, 20)] } else { &[(2, 2, 10)] };
    for &(r, q, count) in runs {
        let g = env.group(r, q)?;
        let ctx = &g.0;
        let gg = GelfandGraev::new(ctx, AddChar::new(ctx, 1)?);
        let mut rng = env.rng(700 + r as u64);
        let mut bad = 0;
        for _ in 0..count {
            let alpha = random_equivariant(ctx, &gg, &mut rng);
            for x in 0..ctx.group.order() as u32 {
                bad += usize::from(!averaging_lemma_check(ctx, &gg, &alpha, x)?);
            }
        }
        out.check(bad == 0, format!("averaging lemma GL_{r}(F_{q}): {count} functions, all g"));
    }
    Ok(out)
}

fn cosets(env: &mut Env) -> Result<Outcome> {
    let mut out = Outcome::new();
    let limit: u64 = if env.desk() { 1_000_000 } else { 10_000 };
    let qs: &[u64] = &[2, 3, 4, 5, 7, 8, 9, 11, 13, 16];
    let mut count = 0;
    let mut failures = Vec::new();
    for &q in qs {
        let field = Arc::new(FieldDescriptor::from_order(q)?);
        for n in 2..=4usize {
            let mut m = 1u32;
            while (q as u128).pow(n as u32 * m) <= limit as u128 {
                match verify_coset_partition(field.clone(), n, m) {
                    Ok(r) if r.passed => count += 1,
                    Ok(_) => failures.push(format!("({n},{q},{m})")),
                    Err(e) => failures.push(format!("({n},{q},{m}): {e}")),
                }
                m += 1;
            }
        }
    }
    out.check(failures.is_empty(), format!("partition of the orbit for {count} (n,q,m) with q^(nm) <= {limit} {failures:?}"));
    let mut bad = Vec::new();
    for n in 2..=4usize {
        for m in 0..=n as u32 + 6 {
            if d_family(n, m).len() as u64 != binomial(m as i64 - 1, n as i64 - 1) {
                bad.push((n, m));
            }
        }
    }
    out.check(bad.is_empty(), format!("|D_n(m)| = binom(m-1, n-1) for n <= 4, m <= n+6 {bad:?}"));
    Ok(out)
}

fn minimax_lemmas(env: &mut Env) -> Result<Outcome> {
    let mut out = Outcome::new();
    let (samples, polys) = if env.desk() { (10_000, 20) } else { (1_000, 5) };
    for (n, m, q) in [(2usize, 1u32, 2u64), (2, 1, 3), (2, 3, 2), (3, 1, 2)] {
        let r = minimax::verify(n, m, q, samples, polys, env.seed)?;
        let tag = format!("({n},{m},{q})");
        out.check(
            r.strata.iter().all(|s| s.invariants_hold),
            format!("{tag}: invariants of {} random strata", r.strata.len()),
        );
        out.check(r.displayed_patterns_match, format!("{tag}: conjugated level groups match the written-out ideals"));
        for c in &r.checks {
            out.check(c.passed(), format!("{tag}: {}: {} samples, {} counterexamples", c.name, c.samples, c.counterexamples));
        }
        out.check(
            r.conductor == r.conductor_from_depth,
            format!("{tag}: conductor {} = n(1 + depth) = {}", r.conductor, r.conductor_from_depth),
        );
    }
    Ok(out)
}

fn tables(env: &mut Env) -> Result<Outcome> {
    let mut out = Outcome::new();
    for q in [2u64, 3, 5] {
        let g = env.group(2, q)?;
        let (ctx, t) = (&g.0, &g.1);
        let mut dixon: Vec<Vec<u64>> = t.cuspidal_rows().iter().map(|&r| t.values[r].clone()).collect();
        dixon.sort();
        let oracle = gl2_cuspidal_oracle_all(ctx)?;
        out.check(dixon == oracle, format!("(2,{q}): {} cuspidal rows match the classical table", dixon.len()));
    }
    let keys: Vec<(usize, u64)> = env.groups.keys().copied().collect();
    for (n, q) in keys {
        let g = env.group(n, q)?;
        let ok = g.1.verify(&g.0).is_ok();
        out.check(ok, format!("({n},{q}): orthogonality of {} rows", g.1.rows()));
    }
    Ok(out)
}

type Runner = fn(&mut Env) -> Result<Outcome>;

const RUNNERS: [Runner; 9] =
    [conductors, oldforms, bessel, newform_identity, matrix_coefficients, whittaker, cosets, minimax_lemmas, tables];

/// Runs criteria 1-9, reporting each as it completes.
pub fn run_selftest(profile: Profile, seed: u64, cache: Option<&Cache>, progress: impl FnMut(&CriterionResult)) -> SelftestPayload {
    run_criteria(profile, seed, cache, &[1, 2, 3, 4, 5, 6, 7, 8, 9], progress)
}

/// Runs the listed criteria twice and appends criterion 10. Progress is
/// reported for the first pass only.
pub fn run_twice(
    profile: Profile,
    seed: u64,
    cache: Option<&Cache>,
    ids: &[u8],
    progress: impl FnMut(&CriterionResult),
) -> Result<SelftestPayload> {
    let mut first = run_criteria(profile, seed, cache, ids, progress);
    let second = run_criteria(profile, seed, cache, ids, |_| {});
    let r = reproducibility(&serde_json::to_vec(&first)?, &serde_json::to_vec(&second)?);
    first.criteria.push(r);
    Ok(first)
}

/// Runs the listed criteria (ids 1-9) in order.
pub fn run_criteria(
    profile: Profile,
    seed: u64,
    cache: Option<&Cache>,
    ids: &[u8],
    mut progress: impl FnMut(&CriterionResult),
) -> SelftestPayload {
    let mut env = Env { profile, seed, cache, groups: BTreeMap::new() };
    let mut criteria = Vec::new();
    for &id in ids.iter().filter(|&&i| (1..=9).contains(&i)) {
        let i = id as usize - 1;
        let r = match RUNNERS[i](&mut env) {
            Ok(o) => CriterionResult { id, name: CRITERIA[i].into(), passed: o.passed, details: o.details },
            Err(e) => CriterionResult { id, name: CRITERIA[i].into(), passed: false, details: vec![format!("error: {e}")] },
        };
        progress(&r);
        criteria.push(r);
    }
    SelftestPayload { profile, seed, criteria }
}
