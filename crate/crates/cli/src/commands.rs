use std::time::{Instant, SystemTime};

use anyhow::{bail, Context, Result};
use newform_core::bessel::{dual_row, AddChar};
use newform_core::cache::{Cache, DEFAULT_DIR};
use newform_core::cosets::{MackeyEngine, OldformReport, Truncation};
use newform_core::local::{LMat, LocalRing, Ls};
use newform_core::minimax;
use newform_core::modp::gl_order;
use newform_core::newform::{k_sigma, sample_generic, DepthZeroRep};
use newform_core::report::{Report, RunConfig};
use newform_core::selftest::{self, CriterionResult};
use newform_core::whittaker::WhittakerNewform;
use newform_core::{character_table, CharacterTable, FqMatrix, GroupContext};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::Point;

pub struct Output {
    pub csv: bool,
    pub use_cache: bool,
}

impl Output {
    fn cache(&self) -> Result<Option<Cache>> {
        Ok(if self.use_cache { Some(Cache::from_env(DEFAULT_DIR)?) } else { None })
    }
}

struct Clock(SystemTime, Instant);

fn clock() -> Clock {
    Clock(SystemTime::now(), Instant::now())
}

fn emit<T: Serialize>(cfg: &RunConfig, out: &Output, kind: &str, payload: T, csv: Option<String>, t: Clock) -> Result<()> {
    let report = Report::new(kind, cfg, payload, t.0, t.1.elapsed())?;
    let json = report.to_json()?;
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {dir}"))?;
        std::fs::write(format!("{dir}/{kind}.json"), &json)?;
        if let Some(c) = &csv {
            std::fs::write(format!("{dir}/{kind}.csv"), c)?;
        }
    }
    match csv {
        Some(c) if out.csv => {
            println!("# seed = {}", cfg.seed);
            print!("{c}");
        }
        _ => println!("{json}"),
    }
    Ok(())
}

fn group(cfg: &RunConfig, out: &Output) -> Result<(GroupContext, CharacterTable)> {
    cfg.validate()?;
    let order = gl_order(cfg.n, cfg.q());
    if order > cfg.bound as u128 {
        bail!("|GL_{}(F_{})| = {order} exceeds the enumeration bound {}", cfg.n, cfg.q(), cfg.bound);
    }
    let ctx = cfg.context()?;
    let table = match out.cache()? {
        Some(c) => {
            let (t, hit) = c.character_table(&ctx, cfg.seed)?;
            eprintln!("character table {} ({})", if hit { "loaded" } else { "computed" }, c.dir().display());
            t
        }
        None => character_table(&ctx, cfg.seed)?,
    };
    Ok((ctx, table))
}

fn rng(cfg: &RunConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ salt.wrapping_mul(0x9e37_79b9))
}

fn render_ls(ring: &LocalRing, x: &Ls) -> String {
    let terms: Vec<String> = x
        .terms()
        .into_iter()
        .map(|(e, c)| {
            let c = ring.field.format(c);
            match (e, c.as_str()) {
                (0, _) => c,
                (1, "1") => "t".into(),
                (_, "1") => format!("t^{e}"),
                (1, _) => format!("{c}t"),
                _ => format!("{c}t^{e}"),
            }
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn render(ring: &LocalRing, g: &LMat) -> String {
    let rows: Vec<String> = (0..g.n)
        .map(|i| {
            let r: Vec<String> = (0..g.n).map(|j| render_ls(ring, g.at(i, j))).collect();
            format!("[{}]", r.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

fn pick_row(t: &CharacterTable, row: Option<usize>) -> Result<usize> {
    let cusp = t.cuspidal_rows();
    match row {
        Some(r) if cusp.contains(&r) => Ok(r),
        Some(r) => bail!("row {r} is not cuspidal; cuspidal rows are {cusp:?}"),
        None => cusp.first().copied().context("no cuspidal rows"),
    }
}

#[derive(Serialize)]
struct ChartablePayload {
    n: usize,
    q: u64,
    /// the newform engine needs n >= 2
    newform_eligible: bool,
    table: CharacterTable,
}

pub fn chartable(cfg: &RunConfig, out: &Output) -> Result<bool> {
    let t0 = clock();
    let (_, table) = group(cfg, out)?;
    if cfg.n < 2 {
        eprintln!("note: n = {} is rejected by the newform commands", cfg.n);
    }
    let csv = table.to_csv();
    emit(cfg, out, "chartable", ChartablePayload { n: cfg.n, q: cfg.q(), newform_eligible: cfg.n >= 2, table }, Some(csv), t0)?;
    Ok(true)
}

#[derive(Serialize)]
struct Cuspidal {
    row: usize,
    degree: u64,
    dual: usize,
    /// (a, omega(a)) for scalar a, values in F_l'
    central_character: Vec<(String, u64)>,
}

pub fn cuspidals(cfg: &RunConfig, out: &Output) -> Result<bool> {
    let t0 = clock();
    let (ctx, t) = group(cfg, out)?;
    let cf = &ctx.cf;
    let mut rows = Vec::new();
    for row in t.cuspidal_rows() {
        let deg_inv = cf.inv(cf.from_u128(t.degrees[row] as u128))?;
        let mut central = Vec::new();
        for a in ctx.field.units() {
            let z = ctx.index(&FqMatrix::diag(&vec![a; ctx.n]))?;
            central.push((ctx.field.format(a), cf.mul(t.chi(&ctx, row, z), deg_inv)));
        }
        rows.push(Cuspidal { row, degree: t.degrees[row], dual: dual_row(&ctx, &t, row), central_character: central });
    }
    let mut csv = String::from("row,degree,dual\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{}\n", r.row, r.degree, r.dual));
    }
    emit(cfg, out, "cuspidals", rows, Some(csv), t0)?;
    Ok(true)
}

pub fn oldforms(cfg: &RunConfig, out: &Output) -> Result<bool> {
    let t0 = clock();
    let (ctx, t) = group(cfg, out)?;
    let mut reports: Vec<OldformReport> = Vec::new();
    for row in t.cuspidal_rows() {
        let mut engine = MackeyEngine::new(&ctx, &t, row)?;
        for m in cfg.m_min..=cfg.m_max {
            let trunc = Truncation { seed: cfg.seed, ..Truncation::for_level(m) };
            reports.push(engine.oldform_dimension(m, &trunc)?);
        }
    }
    let mut csv = String::from("row,m,dimension,expected\n");
    for r in &reports {
        csv.push_str(&format!("{},{},{},{}\n", r.row, r.m, r.dimension, r.expected));
    }
    let ok = reports.iter().all(|r| r.dimension == r.expected);
    emit(cfg, out, "oldforms", reports, Some(csv), t0)?;
    Ok(ok)
}

#[derive(Serialize)]
struct EvalPoint {
    kind: &'static str,
    g: String,
    in_support: bool,
    /// f_new(g) evaluated at 1 in GL_n(F_q)
    value_at_1: i64,
    integral_at_1: i64,
    agrees: bool,
}

#[derive(Serialize)]
struct EvalPayload {
    row: usize,
    omega: u64,
    mismatches: usize,
    points: Vec<EvalPoint>,
}

pub fn newform_eval(cfg: &RunConfig, out: &Output, row: Option<usize>, omega: u64) -> Result<bool> {
    let t0 = clock();
    let (ctx, t) = group(cfg, out)?;
    let row = pick_row(&t, row)?;
    let rep = DepthZeroRep::new(&ctx, &t, row, AddChar::new(&ctx, 1)?, omega)?;
    let f = &ctx.cf;
    let ring = &rep.ring;
    let id = ctx.group.identity() as usize;
    let a = rep.newform_eval(rep.sigma())?[id];
    let b = rep.newform_integral_eval(rep.sigma())?[id];
    let scale = f.mul(a, f.inv(b)?);

    let mut rng = rng(cfg, 4);
    let mut pts: Vec<(&'static str, LMat)> = vec![("sigma", rep.sigma().clone()), ("identity", ring.identity(ctx.n))];
    for _ in 0..cfg.samples {
        pts.push(("support", rep.sample_support(&mut rng)?));
    }
    for _ in 0..cfg.samples {
        pts.push(("generic", sample_generic(ring, ctx.n, -1, 1, &mut rng)?));
    }
    let mut points = Vec::new();
    for (kind, g) in pts {
        let direct = rep.newform_eval(&g)?;
        let integral: Vec<u64> = rep.newform_integral_eval(&g)?.iter().map(|&x| f.mul(x, scale)).collect();
        points.push(EvalPoint {
            kind,
            g: render(ring, &g),
            in_support: rep.support_membership(&g)?.is_some(),
            value_at_1: f.lift(direct[id]),
            integral_at_1: f.lift(integral[id]),
            agrees: direct == integral,
        });
    }
    let mismatches = points.iter().filter(|p| !p.agrees).count();
    let mut csv = String::from("kind,g,in_support,value_at_1,integral_at_1,agrees\n");
    for p in &points {
        csv.push_str(&format!("{},\"{}\",{},{},{},{}\n", p.kind, p.g, p.in_support, p.value_at_1, p.integral_at_1, p.agrees));
    }
    emit(cfg, out, "newform-eval", EvalPayload { row, omega, mismatches, points }, Some(csv), t0)?;
    Ok(mismatches == 0)
}

#[derive(Serialize)]
struct CoeffRow {
    g: String,
    formula: i64,
    direct: i64,
    equal: bool,
}

#[derive(Serialize)]
struct CoeffPayload {
    row: usize,
    omega: u64,
    /// |G(F_q)| / (|U(F_q)| dim tau)
    constant: i64,
    at_identity: i64,
    at_identity_pairing: i64,
    rows: Vec<CoeffRow>,
}

pub fn coeff(cfg: &RunConfig, out: &Output, row: Option<usize>, omega: u64) -> Result<bool> {
    let t0 = clock();
    let (ctx, t) = group(cfg, out)?;
    let row = pick_row(&t, row)?;
    let rep = DepthZeroRep::new(&ctx, &t, row, AddChar::new(&ctx, 1)?, omega)?;
    let f = &ctx.cf;
    let ring = &rep.ring;
    let ks = k_sigma(ctx.n);
    let mut rng = rng(cfg, 5);
    let mut rows = Vec::new();
    for _ in 0..cfg.samples {
        let g = rep.sample_pattern(&ks, &mut rng)?;
        let a = rep.matrix_coeff_formula(&g)?;
        let b = rep.matrix_coeff_direct(&g)?;
        rows.push(CoeffRow { g: render(ring, &g), formula: f.lift(a), direct: f.lift(b), equal: a == b });
    }
    let id = ring.identity(ctx.n);
    let payload = CoeffPayload {
        row,
        omega,
        constant: f.lift(rep.coefficient_constant()?),
        at_identity: f.lift(rep.matrix_coeff_single_formula(&id)?),
        at_identity_pairing: f.lift(rep.matrix_coeff_single(&id)?),
        rows,
    };
    let ok = payload.rows.iter().all(|r| r.equal);
    let mut csv = String::from("g,formula,direct,equal\n");
    for r in &payload.rows {
        csv.push_str(&format!("\"{}\",{},{},{}\n", r.g, r.formula, r.direct, r.equal));
    }
    emit(cfg, out, "coeff", payload, Some(csv), t0)?;
    Ok(ok)
}

#[derive(Serialize)]
struct WhittakerPoint {
    g: String,
    via_coefficient: i64,
    via_gelfand: i64,
    equal: bool,
}

#[derive(Serialize)]
struct WhittakerPayload {
    row: usize,
    omega: u64,
    points: Vec<WhittakerPoint>,
}

pub fn whittaker(cfg: &RunConfig, out: &Output, row: Option<usize>, omega: u64, at: Point) -> Result<bool> {
    if cfg.n != 2 {
        bail!("whittaker is implemented for n = 2 only");
    }
    let t0 = clock();
    let (ctx, t) = group(cfg, out)?;
    let row = pick_row(&t, row)?;
    let rep = DepthZeroRep::new(&ctx, &t, row, AddChar::new(&ctx, 1)?, omega)?;
    let w = WhittakerNewform::new(&rep)?;
    let ring = &rep.ring;
    let f = &ctx.cf;
    let mut rng = rng(cfg, 6);
    let gs: Vec<LMat> = match at {
        Point::Identity => vec![ring.identity(2)],
        Point::Support => (0..cfg.samples).map(|_| w.sample_support(&mut rng)).collect::<Result<_, _>>()?,
        Point::OffSupport => (0..cfg.samples).map(|_| w.sample_off_support(&mut rng)).collect::<Result<_, _>>()?,
    };
    let mut points = Vec::new();
    for g in &gs {
        let a = w.via_coefficient(g)?;
        let b = w.via_gelfand(g)?;
        points.push(WhittakerPoint { g: render(ring, g), via_coefficient: f.lift(a), via_gelfand: f.lift(b), equal: a == b });
    }
    let ok = points.iter().all(|p| p.equal);
    let mut csv = String::from("g,via_coefficient,via_gelfand\n");
    for p in &points {
        csv.push_str(&format!("\"{}\",{},{}\n", p.g, p.via_coefficient, p.via_gelfand));
    }
    emit(cfg, out, "whittaker", WhittakerPayload { row, omega, points }, Some(csv), t0)?;
    Ok(ok)
}

pub fn minimax_verify(cfg: &RunConfig, out: &Output, polys: usize) -> Result<bool> {
    cfg.validate()?;
    let t0 = clock();
    let r = minimax::verify(cfg.n, cfg.m_min, cfg.q(), cfg.samples, polys, cfg.seed)?;
    let ok = r.passed();
    for c in &r.checks {
        eprintln!("{:<4} {}: {} samples, {} counterexamples", if c.passed() { "ok" } else { "FAIL" }, c.name, c.samples, c.counterexamples);
    }
    emit(cfg, out, "minimax-verify", r, None, t0)?;
    Ok(ok)
}

fn progress(r: &CriterionResult) {
    eprintln!("{} {:>2} {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name);
    for d in r.details.iter().filter(|d| !d.starts_with("ok")) {
        eprintln!("       {d}");
    }
}

pub fn selftest(cfg: &RunConfig, out: &Output, only: &[u8]) -> Result<bool> {
    let t0 = clock();
    let ids: Vec<u8> = if only.is_empty() { (1..=9).collect() } else { only.to_vec() };
    let cache = out.cache()?;
    let payload = selftest::run_twice(cfg.profile, cfg.seed, cache.as_ref(), &ids, progress)?;
    if let Some(r) = payload.criteria.last() {
        progress(r);
    }
    let ok = payload.passed();
    emit(cfg, out, "selftest", payload, None, t0)?;
    Ok(ok)
}
