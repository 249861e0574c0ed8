//! On-disk cache for character tables, Bessel tables and transversals.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_function, AddChar, BesselTable};
use crate::characters::{character_table, CharacterTable, GroupContext};
use crate::error::{Error, Result};
use crate::field::Fe;
use crate::local::{LMat, LocalRing, Ls};
use crate::newform::{pattern_transversal, transversal_index, verify_transversal};
use crate::report::sha256_hex;

pub const FORMAT_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "NEWFORM_CACHE_DIR";
pub const DEFAULT_DIR: &str = ".newform-cache";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CacheKind {
    CharacterTable,
    BesselTable,
    Transversal,
}

impl CacheKind {
    fn slug(self) -> &'static str {
        match self {
            CacheKind::CharacterTable => "character-table",
            CacheKind::BesselTable => "bessel-table",
            CacheKind::Transversal => "transversal",
        }
    }
}

pub type Params = Vec<(String, String)>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CacheEntry<T> {
    pub format_version: u32,
    pub kind: CacheKind,
    pub key: String,
    pub params: Params,
    pub payload: T,
}

/// SHA-256 over the kind, the format version and the ordered parameters.
pub fn cache_key(kind: CacheKind, params: &Params) -> String {
    let mut s = format!("kind={}\nversion={FORMAT_VERSION}\n", kind.slug());
    for (k, v) in params {
        s.push_str(&format!("{k}={v}\n"));
    }
    sha256_hex(s.as_bytes())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct BesselPayload {
    row: usize,
    psi_c: Fe,
    values: Vec<u64>,
}

/// (v0, digits from t^{v0}, precision)
type WireLs = (i32, Vec<Fe>, i32);

fn ls_to_wire(x: &Ls) -> Result<WireLs> {
    let prec = x.precision();
    match x.valuation() {
        None => Ok((prec, Vec::new(), prec)),
        Some(v) => Ok((v, (v..prec).map(|e| x.coeff(e)).collect::<Result<_>>()?, prec)),
    }
}

fn ls_from_wire(ring: &LocalRing, w: &WireLs) -> Result<Ls> {
    ring.from_coeffs(w.0, &w.1, w.2)
}

fn field_params(ctx_field: &crate::field::FieldDescriptor) -> Params {
    let spec = ctx_field.spec();
    vec![
        ("p".into(), spec.p.to_string()),
        ("k".into(), spec.k.to_string()),
        ("poly".into(), format!("{:?}", spec.poly)),
    ]
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self> {
        std::fs::create_dir_all(dir.as_ref())?;
        Ok(Cache { dir: dir.as_ref().to_path_buf() })
    }

    /// $NEWFORM_CACHE_DIR, else `default`.
    pub fn from_env(default: impl AsRef<Path>) -> Result<Self> {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::new(d),
            _ => Self::new(default),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, kind: CacheKind, key: &str) -> PathBuf {
        self.dir.join(format!("{}-{key}.json", kind.slug()))
    }

    /// Writes to a temporary file in the cache directory and renames it into place.
    pub fn store<T: Serialize>(&self, kind: CacheKind, params: &Params, payload: &T) -> Result<PathBuf> {
        let key = cache_key(kind, params);
        let entry = CacheEntry { format_version: FORMAT_VERSION, kind, key: key.clone(), params: params.clone(), payload };
        let path = self.path(kind, &key);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(serde_json::to_string(&entry)?.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| Error::Cache(e.to_string()))?;
        Ok(path)
    }

    /// None when absent, written by another format version, or keyed differently.
    pub fn load<T: DeserializeOwned>(&self, kind: CacheKind, params: &Params) -> Result<Option<T>> {
        let key = cache_key(kind, params);
        let path = self.path(kind, &key);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let raw: serde_json::Value = serde_json::from_str(&text)?;
        if raw.get("format_version").and_then(|v| v.as_u64()) != Some(FORMAT_VERSION as u64) {
            return Ok(None);
        }
        let entry: CacheEntry<T> = serde_json::from_value(raw)?;
        if entry.key != key || entry.kind != kind || &entry.params != params {
            return Ok(None);
        }
        Ok(Some(entry.payload))
    }

    fn table_params(ctx: &GroupContext, seed: u64) -> Params {
        let mut p = vec![("n".to_string(), ctx.n.to_string())];
        p.extend(field_params(&ctx.field));
        p.push(("ell".into(), ctx.cf.ell.to_string()));
        p.push(("seed".into(), seed.to_string()));
        p
    }

    /// Loaded tables must pass orthogonality; otherwise they are recomputed
    /// and replaced. The flag reports a verified hit.
    pub fn character_table(&self, ctx: &GroupContext, seed: u64) -> Result<(CharacterTable, bool)> {
        let params = Self::table_params(ctx, seed);
        if let Some(t) = self.load::<CharacterTable>(CacheKind::CharacterTable, &params)? {
            if t.n == ctx.n && t.cf == ctx.cf && t.verify(ctx).is_ok() {
                return Ok((t, true));
            }
        }
        let t = character_table(ctx, seed)?;
        self.store(CacheKind::CharacterTable, &params, &t)?;
        Ok((t, false))
    }

    pub fn bessel_table(&self, ctx: &GroupContext, t: &CharacterTable, row: usize, psi: AddChar) -> Result<(BesselTable, bool)> {
        let mut params = Self::table_params(ctx, t.seed);
        params.push(("row".into(), row.to_string()));
        params.push(("psi".into(), psi.c.to_string()));
        if let Some(b) = self.load::<BesselPayload>(CacheKind::BesselTable, &params)? {
            let table = BesselTable { row: b.row, psi, values: b.values };
            if b.row == row && b.psi_c == psi.c && bessel_invariants_hold(ctx, &table) {
                return Ok((table, true));
            }
        }
        let b = bessel_function(ctx, t, row, psi)?;
        self.store(
            CacheKind::BesselTable,
            &params,
            &BesselPayload { row, psi_c: psi.c, values: b.values.clone() },
        )?;
        Ok((b, false))
    }

    pub fn transversal(&self, ring: &LocalRing, n: usize) -> Result<(Vec<LMat>, bool)> {
        let mut params = vec![("n".to_string(), n.to_string())];
        params.extend(field_params(&ring.field));
        params.push(("window".into(), format!("{}:{}", ring.window.b, ring.window.n)));
        if let Some(w) = self.load::<Vec<Vec<WireLs>>>(CacheKind::Transversal, &params)? {
            let ys: Result<Vec<LMat>> = w
                .iter()
                .map(|m| Ok(LMat { n, e: m.iter().map(|x| ls_from_wire(ring, x)).collect::<Result<_>>()? }))
                .collect();
            if let Ok(ys) = ys {
                let q = ring.q() as u64;
                if ys.len() as u64 == transversal_index(n, q) && verify_transversal(ring, &ys).is_ok() {
                    return Ok((ys, true));
                }
            }
        }
        let ys = pattern_transversal(ring, n)?;
        let wire: Vec<Vec<WireLs>> = ys
            .iter()
            .map(|m| m.e.iter().map(ls_to_wire).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        self.store(CacheKind::Transversal, &params, &wire)?;
        Ok((ys, false))
    }
}

/// B(1) = 1 and B(x g) = psi(x) B(g) for the unipotent generators x.
pub fn bessel_invariants_hold(ctx: &GroupContext, b: &BesselTable) -> bool {
    let grp = &ctx.group;
    let f = &ctx.cf;
    if b.values.len() != grp.order() || b.at(grp.identity()) != 1 {
        return false;
    }
    crate::bessel::GelfandGraev::unipotent_generators(ctx).iter().all(|&x| {
        let px = b.psi.eval_unipotent(ctx, grp.elem(x));
        (0..grp.order() as u32).all(|g| b.at(grp.mul(x, g)) == f.mul(px, b.at(g)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::Window;

    #[test]
    fn round_trip_and_stale_versions() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let ctx = GroupContext::from_order(2, 3).unwrap();
        let (t, hit) = cache.character_table(&ctx, 0).unwrap();
        assert!(!hit);
        let (t2, hit) = cache.character_table(&ctx, 0).unwrap();
        assert!(hit);
        assert_eq!(t, t2);

        let psi = AddChar::new(&ctx, 1).unwrap();
        let row = t.cuspidal_rows()[0];
        let (b, _) = cache.bessel_table(&ctx, &t, row, psi).unwrap();
        let (b2, hit) = cache.bessel_table(&ctx, &t, row, psi).unwrap();
        assert!(hit);
        assert_eq!(b.values, b2.values);

        let ring = LocalRing::new(ctx.field.clone(), Window::depth_zero(3, 3)).unwrap();
        let (ys, _) = cache.transversal(&ring, 3).unwrap();
        let (ys2, hit) = cache.transversal(&ring, 3).unwrap();
        assert!(hit);
        assert_eq!(ys.len(), ys2.len());
        for (a, b) in ys.iter().zip(&ys2) {
            assert!(ring.mat_sub(a, b).unwrap().e.iter().all(|x| x.is_known_zero()));
        }

        // an entry from another format version is ignored
        let params = Cache::table_params(&ctx, 0);
        let path = cache.path(CacheKind::CharacterTable, &cache_key(CacheKind::CharacterTable, &params));
        let text = std::fs::read_to_string(&path).unwrap().replace("\"format_version\":1", "\"format_version\":0");
        std::fs::write(&path, text).unwrap();
        assert!(cache.load::<CharacterTable>(CacheKind::CharacterTable, &params).unwrap().is_none());
        assert!(!cache.character_table(&ctx, 0).unwrap().1);
    }

    #[test]
    fn corrupted_table_is_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let ctx = GroupContext::from_order(2, 2).unwrap();
        let (mut t, _) = cache.character_table(&ctx, 0).unwrap();
        t.values[1][1] = (t.values[1][1] + 1) % ctx.cf.ell;
        let params = Cache::table_params(&ctx, 0);
        cache.store(CacheKind::CharacterTable, &params, &t).unwrap();
        let (t2, hit) = cache.character_table(&ctx, 0).unwrap();
        assert!(!hit);
        assert!(t2.verify(&ctx).is_ok());
    }

    #[test]
    fn keys_depend_on_every_parameter() {
        let a: Params = vec![("n".into(), "2".into()), ("seed".into(), "0".into())];
        let b: Params = vec![("n".into(), "2".into()), ("seed".into(), "1".into())];
        assert_ne!(cache_key(CacheKind::CharacterTable, &a), cache_key(CacheKind::CharacterTable, &b));
        assert_ne!(cache_key(CacheKind::CharacterTable, &a), cache_key(CacheKind::BesselTable, &a));
        assert_eq!(cache_key(CacheKind::Transversal, &a).len(), 64);
    }
}
