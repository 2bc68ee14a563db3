//! Append-only verdict cache shared by search workers.
//!
//! One line per verdict: `m k rule digits verdict method`, tab separated.
//! A line only counts once its newline is on disk, so an interrupted write
//! is dropped on the next load.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::Result;
use crate::feasex::Method;
use crate::zmod::{DigitSet, ProgressionRule};

pub const CACHE_ENV: &str = "PROGFREE_CACHE";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Key {
    m: u32,
    k: usize,
    rule: ProgressionRule,
    digits: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CachedVerdict {
    pub admissible: bool,
    pub method: Method,
}

pub struct VerdictCache {
    path: Option<PathBuf>,
    map: Mutex<HashMap<Key, CachedVerdict>>,
    file: Option<Mutex<File>>,
}

fn rule_label(rule: ProgressionRule) -> &'static str {
    match rule {
        ProgressionRule::Distinct => "distinct",
        ProgressionRule::NonConstant => "non-constant",
    }
}

fn parse_line(line: &str) -> Option<(Key, CachedVerdict)> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() != 6 {
        return None;
    }
    let rule = match f[2] {
        "distinct" => ProgressionRule::Distinct,
        "non-constant" => ProgressionRule::NonConstant,
        _ => return None,
    };
    let admissible = match f[4] {
        "admissible" => true,
        "not-admissible" => false,
        _ => return None,
    };
    let key = Key {
        m: f[0].parse().ok()?,
        k: f[1].parse().ok()?,
        rule,
        digits: f[3].to_string(),
    };
    Some((
        key,
        CachedVerdict {
            admissible,
            method: Method::from_label(f[5])?,
        },
    ))
}

impl VerdictCache {
    pub fn in_memory() -> Self {
        VerdictCache {
            path: None,
            map: Mutex::new(HashMap::new()),
            file: None,
        }
    }

    /// Loads `path` if it exists and appends new verdicts to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut map = HashMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            let complete = match text.rfind('\n') {
                Some(i) => &text[..i],
                None => "",
            };
            for line in complete.lines() {
                if let Some((k, v)) = parse_line(line) {
                    map.insert(k, v);
                }
            }
            if !text.is_empty() && !text.ends_with('\n') {
                // Terminate the torn line so later appends start cleanly.
                OpenOptions::new().append(true).open(&path)?.write_all(b"\n")?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(VerdictCache {
            path: Some(path),
            map: Mutex::new(map),
            file: Some(Mutex::new(file)),
        })
    }

    /// Uses `PROGFREE_CACHE` when set, otherwise memory only.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CACHE_ENV) {
            Some(p) if !p.is_empty() => Self::open(p),
            _ => Ok(Self::in_memory()),
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn key(d: &DigitSet, k: usize, rule: ProgressionRule) -> Key {
        Key {
            m: d.m(),
            k,
            rule,
            digits: d.to_compact(),
        }
    }

    pub fn get(&self, d: &DigitSet, k: usize, rule: ProgressionRule) -> Option<CachedVerdict> {
        self.map.lock().expect("cache lock").get(&Self::key(d, k, rule)).copied()
    }

    /// Persists, then publishes.
    pub fn insert(&self, d: &DigitSet, k: usize, rule: ProgressionRule, v: CachedVerdict) -> Result<()> {
        let key = Self::key(d, k, rule);
        if let Some(file) = &self.file {
            let line = format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                key.m,
                key.k,
                rule_label(rule),
                key.digits,
                if v.admissible { "admissible" } else { "not-admissible" },
                v.method.label()
            );
            let mut f = file.lock().expect("cache file lock");
            f.write_all(line.as_bytes())?;
            f.flush()?;
        }
        self.map.lock().expect("cache lock").insert(key, v);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_torn_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("verdicts.tsv");
        let d = DigitSet::interval(11, 0, 5).unwrap();
        let e = DigitSet::interval(11, 0, 6).unwrap();
        {
            let c = VerdictCache::open(&path).unwrap();
            let v = CachedVerdict {
                admissible: true,
                method: Method::ReduceRref,
            };
            c.insert(&d, 3, ProgressionRule::Distinct, v).unwrap();
            assert_eq!(c.get(&d, 3, ProgressionRule::Distinct), Some(v));
            assert_eq!(c.get(&d, 3, ProgressionRule::NonConstant), None);
        }
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"11\t3\tdistinct\t0:6\tnot-admis").unwrap();
        drop(f);
        let c = VerdictCache::open(&path).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.get(&e, 3, ProgressionRule::Distinct), None);
        c.insert(
            &e,
            3,
            ProgressionRule::Distinct,
            CachedVerdict {
                admissible: false,
                method: Method::Lp,
            },
        )
        .unwrap();
        let c = VerdictCache::open(&path).unwrap();
        assert_eq!(c.len(), 2);
        assert!(!c.get(&e, 3, ProgressionRule::Distinct).unwrap().admissible);
    }

    #[test]
    fn garbage_lines_are_ignored() {
        assert!(parse_line("11\t3\tdistinct\t0:5\tadmissible\tsomething").is_none());
        assert!(parse_line("x\t3\tdistinct\t0:5\tadmissible\tlp").is_none());
        assert!(parse_line("11\t3\tdistinct\t0:5\tadmissible\tlp").is_some());
    }
}
