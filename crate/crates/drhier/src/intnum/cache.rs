//! Persistent JSON cache of computed integrals.
//!
//! The cache file is a single JSON object:
//!
//! ```json
//! {
//!   "version": 1,
//!   "kind": "drhier-integral-cache",
//!   "hodge": [
//!     { "g": 1, "n": 1, "d": [0], "lambda": [1], "value": "1/24" }
//!   ],
//!   "dr": [
//!     { "g": 1, "profile": [2, -2], "pairing": "psi0^1", "value": "1/24" }
//!   ]
//! }
//! ```
//!
//! `hodge` records are top Hodge integrals keyed like the in-memory memo
//! (genus, sorted ψ-exponents, sorted λ-indices); `dr` records hold
//! pairings of double ramification cycles keyed by genus, ramification
//! profile and a pairing-class identifier. All values are exact
//! rationals rendered as `"num/den"`.
//!
//! Loading re-verifies a random one-percent sample (at least one record)
//! by recomputation before anything is inserted, and refuses records
//! that disagree with values already in memory.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use num::{BigInt, BigRational, Zero};
use once_cell::sync::Lazy;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::hodge;

/// Errors from reading, writing or checking the cache file.
#[derive(Debug, Error)]
pub enum CacheError {
    /// Filesystem failure.
    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),
    /// The file is not a well-formed cache of the expected kind.
    #[error("cache format: {0}")]
    Format(String),
    /// A cached value disagrees with recomputation or with memory.
    #[error("cache verification: {0}")]
    Verification(String),
}

/// Counts reported by cache operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheStats {
    /// Hodge-integral records in the file.
    pub hodge_entries: usize,
    /// DR-pairing records in the file.
    pub dr_entries: usize,
    /// Records re-verified by recomputation.
    pub checked: usize,
}

const CACHE_KIND: &str = "drhier-integral-cache";
const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    kind: String,
    #[serde(default)]
    hodge: Vec<HodgeRecord>,
    #[serde(default)]
    dr: Vec<DrRecord>,
}

#[derive(Serialize, Deserialize)]
struct HodgeRecord {
    g: u32,
    n: usize,
    d: Vec<u32>,
    lambda: Vec<u32>,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct DrRecord {
    g: u32,
    profile: Vec<i64>,
    pairing: String,
    value: String,
}

fn render(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn parse_rational(s: &str) -> Result<BigRational, CacheError> {
    let bad = || CacheError::Format(format!("malformed rational {s:?}"));
    let mut parts = s.split('/');
    let num = BigInt::from_str(parts.next().ok_or_else(bad)?.trim()).map_err(|_| bad())?;
    let den = match parts.next() {
        None => BigInt::from(1),
        Some(d) => BigInt::from_str(d.trim()).map_err(|_| bad())?,
    };
    if parts.next().is_some() || den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// DR-cycle pairings persisted alongside the Hodge memo.
type DrKey = (u32, Vec<i64>, String);

static DR_TABLE: Lazy<Mutex<BTreeMap<DrKey, BigRational>>> =
    Lazy::new(|| Mutex::new(BTreeMap::new()));

pub(crate) fn dr_insert(key: DrKey, value: BigRational) {
    let mut table = DR_TABLE.lock().unwrap();
    if let Some(old) = table.get(&key) {
        assert_eq!(*old, value, "divergent memoized DR pairing for {key:?}");
    } else {
        table.insert(key, value);
    }
}

pub(crate) fn dr_lookup(key: &DrKey) -> Option<BigRational> {
    DR_TABLE.lock().unwrap().get(key).cloned()
}

fn dr_snapshot() -> Vec<(DrKey, BigRational)> {
    DR_TABLE.lock().unwrap().iter().map(|(k, v)| (k.clone(), v.clone())).collect()
}

/// Write every memoized Hodge integral and DR pairing to `path`.
pub fn save_cache(path: &Path) -> Result<CacheStats, CacheError> {
    let hodge: Vec<HodgeRecord> = hodge::table_snapshot()
        .into_iter()
        .map(|((g, d, lambda), v)| HodgeRecord {
            g,
            n: d.len(),
            d,
            lambda,
            value: render(&v),
        })
        .collect();
    let dr: Vec<DrRecord> = dr_snapshot()
        .into_iter()
        .map(|((g, profile, pairing), v)| DrRecord { g, profile, pairing, value: render(&v) })
        .collect();
    let stats =
        CacheStats { hodge_entries: hodge.len(), dr_entries: dr.len(), checked: 0 };
    let file = CacheFile { version: CACHE_VERSION, kind: CACHE_KIND.to_string(), hodge, dr };
    let mut text = serde_json::to_string_pretty(&file)
        .map_err(|e| CacheError::Format(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(stats)
}

fn read_file(path: &Path) -> Result<CacheFile, CacheError> {
    let text = std::fs::read_to_string(path)?;
    let file: CacheFile =
        serde_json::from_str(&text).map_err(|e| CacheError::Format(e.to_string()))?;
    if file.kind != CACHE_KIND {
        return Err(CacheError::Format(format!("unexpected kind {:?}", file.kind)));
    }
    if file.version != CACHE_VERSION {
        return Err(CacheError::Format(format!(
            "unsupported version {} (expected {CACHE_VERSION})",
            file.version
        )));
    }
    for rec in &file.hodge {
        if rec.d.len() != rec.n {
            return Err(CacheError::Format(format!(
                "{} ψ-exponents on a record claiming {} points",
                rec.d.len(),
                rec.n
            )));
        }
    }
    Ok(file)
}

fn recompute_hodge(rec: &HodgeRecord) -> Result<BigRational, CacheError> {
    hodge::vertex_integral(rec.g, &rec.d, &[], &rec.lambda)
        .map_err(|e| CacheError::Verification(e.to_string()))
}

fn check_sample(file: &CacheFile, indices: &[usize]) -> Result<(), CacheError> {
    for &i in indices {
        let rec = &file.hodge[i];
        let stored = parse_rational(&rec.value)?;
        let fresh = recompute_hodge(rec)?;
        if fresh != stored {
            return Err(CacheError::Verification(format!(
                "record (g={}, d={:?}, λ={:?}) stores {} but recomputes to {}",
                rec.g,
                rec.d,
                rec.lambda,
                rec.value,
                render(&fresh)
            )));
        }
    }
    Ok(())
}

/// Load a cache file into the in-memory memo tables.
///
/// A random 1% of the Hodge records (at least one, when any exist) is
/// recomputed first; on any disagreement — with the recomputation or
/// with a value already in memory — nothing is inserted.
pub fn load_cache(path: &Path) -> Result<CacheStats, CacheError> {
    let file = read_file(path)?;
    let mut checked = 0;
    if !file.hodge.is_empty() {
        let want = (file.hodge.len().div_ceil(100)).max(1);
        let indices = sample(&mut rand::thread_rng(), file.hodge.len(), want).into_vec();
        check_sample(&file, &indices)?;
        checked = want;
    }
    let mut staged = Vec::with_capacity(file.hodge.len());
    for rec in &file.hodge {
        let value = parse_rational(&rec.value)?;
        let mut dk = rec.d.clone();
        dk.sort_unstable();
        let mut lk: Vec<u32> = rec.lambda.iter().copied().filter(|&k| k > 0).collect();
        lk.sort_unstable();
        let key = (rec.g, dk, lk);
        if let Some(existing) = hodge::table_lookup(&key) {
            if existing != value {
                return Err(CacheError::Verification(format!(
                    "record (g={}, d={:?}, λ={:?}) stores {} but memory holds {}",
                    rec.g,
                    rec.d,
                    rec.lambda,
                    rec.value,
                    render(&existing)
                )));
            }
        }
        staged.push((key, value));
    }
    let mut staged_dr = Vec::with_capacity(file.dr.len());
    for rec in &file.dr {
        let value = parse_rational(&rec.value)?;
        let key = (rec.g, rec.profile.clone(), rec.pairing.clone());
        if let Some(existing) = dr_lookup(&key) {
            if existing != value {
                return Err(CacheError::Verification(format!(
                    "DR record (g={}, profile={:?}, {}) stores {} but memory holds {}",
                    rec.g,
                    rec.profile,
                    rec.pairing,
                    rec.value,
                    render(&existing)
                )));
            }
        }
        staged_dr.push((key, value));
    }
    let stats = CacheStats {
        hodge_entries: file.hodge.len(),
        dr_entries: file.dr.len(),
        checked,
    };
    for (key, value) in staged {
        hodge::table_insert(key, value);
    }
    for (key, value) in staged_dr {
        dr_insert(key, value);
    }
    Ok(stats)
}

/// Recompute a fraction of the Hodge records in a cache file (all of
/// them at `fraction = 1.0`) and fail on the first discrepancy.
pub fn verify_cache(path: &Path, fraction: f64) -> Result<CacheStats, CacheError> {
    assert!((0.0..=1.0).contains(&fraction), "fraction must lie in [0, 1]");
    let file = read_file(path)?;
    let mut checked = 0;
    if !file.hodge.is_empty() && fraction > 0.0 {
        let want = ((file.hodge.len() as f64 * fraction).ceil() as usize)
            .clamp(1, file.hodge.len());
        let indices = sample(&mut rand::thread_rng(), file.hodge.len(), want).into_vec();
        check_sample(&file, &indices)?;
        checked = want;
    }
    Ok(CacheStats {
        hodge_entries: file.hodge.len(),
        dr_entries: file.dr.len(),
        checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intnum::hodge_psi_integral;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rational_rendering_roundtrip() {
        for r in [q(1, 24), q(-7, 5760), q(5, 1), q(0, 1)] {
            assert_eq!(parse_rational(&render(&r)).unwrap(), r);
        }
        assert_eq!(parse_rational("42").unwrap(), q(42, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1/2/3").is_err());
        assert!(parse_rational("x/2").is_err());
    }

    #[test]
    fn save_verify_load_roundtrip() {
        // Populate the memo with a few certified values.
        hodge_psi_integral(1, 1, &[0], &[1]).unwrap();
        hodge_psi_integral(1, 1, &[1], &[]).unwrap();
        hodge_psi_integral(2, 1, &[2], &[2]).unwrap();
        dr_insert((1, vec![1, -1], "unit".into(), ), q(1, 24));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.json");
        let saved = save_cache(&path).unwrap();
        assert!(saved.hodge_entries >= 3);
        assert!(saved.dr_entries >= 1);

        let verified = verify_cache(&path, 1.0).unwrap();
        assert_eq!(verified.checked, verified.hodge_entries);

        let loaded = load_cache(&path).unwrap();
        assert_eq!(loaded.hodge_entries, saved.hodge_entries);
        assert!(loaded.checked >= 1);
    }

    #[test]
    fn corrupted_values_are_rejected() {
        hodge_psi_integral(1, 1, &[0], &[1]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.json");
        save_cache(&path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        let tampered = text.replacen("\"1/24\"", "\"1/25\"", 1);
        assert_ne!(text, tampered, "fixture must contain the tampered value");
        std::fs::write(&path, tampered).unwrap();

        assert!(matches!(verify_cache(&path, 1.0), Err(CacheError::Verification(_))));
        // Loading refuses the file outright: either the sampled check or
        // the collision check against memory catches the bad record.
        assert!(load_cache(&path).is_err());
    }

    #[test]
    fn malformed_files_are_format_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.json");

        std::fs::write(&path, "{ not json").unwrap();
        assert!(matches!(load_cache(&path), Err(CacheError::Format(_))));

        std::fs::write(
            &path,
            r#"{"version": 1, "kind": "something-else", "hodge": []}"#,
        )
        .unwrap();
        assert!(matches!(load_cache(&path), Err(CacheError::Format(_))));

        std::fs::write(
            &path,
            r#"{"version": 9, "kind": "drhier-integral-cache", "hodge": []}"#,
        )
        .unwrap();
        assert!(matches!(load_cache(&path), Err(CacheError::Format(_))));

        std::fs::write(
            &path,
            r#"{"version": 1, "kind": "drhier-integral-cache",
                "hodge": [{"g": 1, "n": 2, "d": [0], "lambda": [1], "value": "1/24"}]}"#,
        )
        .unwrap();
        assert!(matches!(load_cache(&path), Err(CacheError::Format(_))));
    }
}
