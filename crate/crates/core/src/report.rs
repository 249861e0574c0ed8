//! Run configuration and report envelopes.

use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bessel::BesselTable;
use crate::characters::GroupContext;
use crate::cosets::CosetRep;
use crate::error::{Error, Result};
use crate::field::{is_prime, FieldDescriptor};
use crate::modp::{gl_exponent, lcm, ComputationField};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    EqualChar,
    Mixed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    #[default]
    Desk,
    Smoke,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "smoke" => Ok(Profile::Smoke),
            _ => Err(Error::InvalidParameter(format!("unknown profile {s}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub n: usize,
    pub p: u32,
    pub k: u32,
    pub mode: Mode,
    pub m_min: u32,
    pub m_max: u32,
    /// l' override for the computation field
    pub ell: Option<u64>,
    pub seed: u64,
    /// cap on enumerated group or window sizes
    pub bound: u64,
    pub samples: usize,
    pub profile: Profile,
    pub output_dir: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 2,
            p: 2,
            k: 1,
            mode: Mode::EqualChar,
            m_min: 0,
            m_max: 6,
            ell: None,
            seed: 0,
            bound: 1 << 20,
            samples: 50,
            profile: Profile::Desk,
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.k)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p as u64) {
            return Err(Error::NonPrimeCharacteristic(self.p));
        }
        if self.k == 0 || self.n == 0 {
            return Err(Error::InvalidParameter("n and k must be positive".into()));
        }
        if self.mode == Mode::Mixed {
            return Err(Error::InvalidParameter("mixed characteristic is not supported; use equal-char".into()));
        }
        if self.m_min > self.m_max {
            return Err(Error::InvalidParameter("m-min exceeds m-max".into()));
        }
        Ok(())
    }

    pub fn field(&self) -> Result<Arc<FieldDescriptor>> {
        Ok(Arc::new(FieldDescriptor::new(self.p, self.k)?))
    }

    /// GL_n(F_q) with the l' override applied.
    pub fn context(&self) -> Result<GroupContext> {
        self.validate()?;
        let field = self.field()?;
        let mut ctx = GroupContext::new(self.n, field)?;
        if let Some(ell) = self.ell {
            let m = lcm(gl_exponent(self.n, self.p as u64, self.q()), self.p as u64);
            ctx.cf = ComputationField::new(ell, m)?;
        }
        Ok(ctx)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u64,
    pub elapsed_ms: u64,
}

/// Payload plus metadata. Only `payload` is hashed; `timing` varies between runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report<T> {
    pub kind: String,
    pub artifact_version: String,
    pub config: RunConfig,
    pub seed: u64,
    pub payload_sha256: String,
    pub payload: T,
    pub timing: Timing,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl<T: Serialize> Report<T> {
    pub fn new(kind: &str, config: &RunConfig, payload: T, started: SystemTime, elapsed: Duration) -> Result<Self> {
        let bytes = serde_json::to_vec(&payload)?;
        Ok(Report {
            kind: kind.into(),
            artifact_version: ARTIFACT_VERSION.into(),
            config: config.clone(),
            seed: config.seed,
            payload_sha256: sha256_hex(&bytes),
            payload,
            timing: Timing {
                started_unix_ms: started.duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0),
                elapsed_ms: elapsed.as_millis() as u64,
            },
        })
    }

    /// Canonical payload bytes, the region covered by `payload_sha256`.
    pub fn payload_bytes(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(&self.payload)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn bessel_csv(b: &BesselTable) -> String {
    let mut s = String::from("element,value\n");
    for (i, v) in b.values.iter().enumerate() {
        s.push_str(&format!("{i},{v}\n"));
    }
    s
}

pub fn cosets_csv(reps: &[CosetRep]) -> String {
    let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    let mut s = String::from("family,alpha,residues\n");
    for r in reps {
        let alpha: Vec<u64> = r.alpha.iter().map(|&a| a as u64).collect();
        s.push_str(&format!("{:?},{},{}\n", r.family, join(&alpha), join(&r.residues)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payload_hash_ignores_timing() {
        let cfg = RunConfig::default();
        let a = Report::new("x", &cfg, vec![1u32, 2], SystemTime::now(), Duration::from_millis(3)).unwrap();
        let b = Report::new("x", &cfg, vec![1u32, 2], UNIX_EPOCH, Duration::from_millis(900)).unwrap();
        assert_eq!(a.payload_sha256, b.payload_sha256);
        assert_eq!(a.payload_bytes().unwrap(), b.payload_bytes().unwrap());
    }

    #[test]
    fn config_checks() {
        assert!(RunConfig { p: 4, ..Default::default() }.validate().is_err());
        assert!(RunConfig { mode: Mode::Mixed, ..Default::default() }.validate().is_err());
        let ctx = RunConfig { n: 2, p: 3, ..Default::default() }.context().unwrap();
        assert_eq!(ctx.order(), 48);
        let json = serde_json::to_string(&RunConfig::default()).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), RunConfig::default());
    }
}
