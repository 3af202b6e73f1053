//! Two-level coefficient cache: an in-process map in front of one text record
//! per `(target, degree, domain)` on disk.
//!
//! Records store every float with 17 significant digits, which round-trips
//! `f64` exactly, so a loaded result is bit-identical to a freshly computed
//! one. Files are written to a temporary sibling and renamed into place.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use super::{ApproxResult, ChebSeries, Interval, Target};
use crate::error::{Error, Result};

/// Environment variable overriding the cache directory. An empty value
/// disables the disk layer.
pub const CACHE_DIR_ENV: &str = "DIVEST_CACHE_DIR";
/// Bumped whenever the solver or record layout changes, so stale records are
/// never reused.
const RECORD_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    target: Target,
    degree: usize,
    lo: u64,
    hi: u64,
}

impl Key {
    fn new(target: Target, degree: usize, domain: Interval) -> Self {
        Self {
            target,
            degree,
            lo: domain.lo().to_bits(),
            hi: domain.hi().to_bits(),
        }
    }

    fn file_name(&self) -> String {
        format!(
            "v{RECORD_VERSION}-{}-d{}-{:016x}-{:016x}.txt",
            self.target.id(),
            self.degree,
            self.lo,
            self.hi
        )
    }
}

fn memory() -> &'static Mutex<HashMap<Key, Arc<ApproxResult>>> {
    static MEM: OnceLock<Mutex<HashMap<Key, Arc<ApproxResult>>>> = OnceLock::new();
    MEM.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Directory used for coefficient records, if any.
pub fn cache_dir() -> Option<PathBuf> {
    if let Some(dir) = std::env::var_os(CACHE_DIR_ENV) {
        return if dir.is_empty() {
            None
        } else {
            Some(PathBuf::from(dir))
        };
    }
    if let Some(xdg) = std::env::var_os("XDG_CACHE_HOME").filter(|d| !d.is_empty()) {
        return Some(PathBuf::from(xdg).join("divest"));
    }
    std::env::var_os("HOME")
        .filter(|d| !d.is_empty())
        .map(|h| PathBuf::from(h).join(".cache").join("divest"))
}

pub(crate) fn get_or_compute<F>(
    target: Target,
    degree: usize,
    domain: Interval,
    compute: F,
) -> Result<Arc<ApproxResult>>
where
    F: FnOnce() -> Result<ApproxResult>,
{
    let key = Key::new(target, degree, domain);
    if let Some(hit) = memory().lock().expect("cache lock poisoned").get(&key) {
        return Ok(Arc::clone(hit));
    }

    let dir = cache_dir();
    let from_disk = dir
        .as_ref()
        .and_then(|d| read_record(&d.join(key.file_name())).ok())
        .filter(|r| r.degree() == degree && r.cheb.domain() == domain);

    let result = match from_disk {
        Some(r) => r,
        None => {
            let r = compute()?;
            if let Some(d) = dir.as_ref() {
                if let Err(e) = write_record(&d.join(key.file_name()), target, &r) {
                    log::warn!("could not persist coefficient cache: {e}");
                }
            }
            r
        }
    };

    let result = Arc::new(result);
    let mut mem = memory().lock().expect("cache lock poisoned");
    Ok(Arc::clone(mem.entry(key).or_insert(result)))
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes a result to the record format.
pub fn render_record(target: Target, r: &ApproxResult) -> String {
    let mut s = String::new();
    let dom = r.cheb.domain();
    let _ = writeln!(s, "# divest coefficient record");
    let _ = writeln!(s, "target {}", target.id());
    let _ = writeln!(s, "degree {}", r.degree());
    let _ = writeln!(s, "lo {}", fmt17(dom.lo()));
    let _ = writeln!(s, "hi {}", fmt17(dom.hi()));
    let _ = writeln!(s, "iterations {}", r.iterations);
    let _ = writeln!(s, "error {}", fmt17(r.levelled_error));
    for (k, c) in r.poly.monomial_coeffs().iter().enumerate() {
        let _ = writeln!(s, "coeff {k} {}", fmt17(*c));
    }
    for (k, c) in r.cheb.coeffs().iter().enumerate() {
        let _ = writeln!(s, "cheb {k} {}", fmt17(*c));
    }
    for x in &r.equioscillation_points {
        let _ = writeln!(s, "point {}", fmt17(*x));
    }
    s
}

/// Writes a record atomically (temporary file in the same directory, then
/// rename).
pub fn write_record(path: &Path, target: Target, r: &ApproxResult) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(render_record(target, r).as_bytes())
        .map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Parses a record written by [`write_record`].
pub fn read_record(path: &Path) -> Result<ApproxResult> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_record(path, &text)
}

fn parse_record(path: &Path, text: &str) -> Result<ApproxResult> {
    let mut degree = None;
    let (mut lo, mut hi) = (None, None);
    let mut iterations = 0usize;
    let mut error = None;
    let mut coeffs = Vec::new();
    let mut cheb = Vec::new();
    let mut points = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| Error::parse(path, lineno + 1, msg);
        let fields: Vec<&str> = line.split_whitespace().collect();
        let float = |s: &str| s.parse::<f64>().map_err(|_| bad("bad float"));
        match fields.as_slice() {
            ["target", _] => {}
            ["degree", d] => degree = Some(d.parse::<usize>().map_err(|_| bad("bad degree"))?),
            ["lo", v] => lo = Some(float(v)?),
            ["hi", v] => hi = Some(float(v)?),
            ["iterations", v] => iterations = v.parse().map_err(|_| bad("bad iteration count"))?,
            ["error", v] => error = Some(float(v)?),
            ["coeff", k, v] => {
                if k.parse::<usize>().ok() != Some(coeffs.len()) {
                    return Err(bad("coefficients out of order"));
                }
                coeffs.push(float(v)?);
            }
            ["cheb", k, v] => {
                if k.parse::<usize>().ok() != Some(cheb.len()) {
                    return Err(bad("chebyshev coefficients out of order"));
                }
                cheb.push(float(v)?);
            }
            ["point", v] => points.push(float(v)?),
            _ => return Err(bad("unrecognized line")),
        }
    }

    let missing = |what: &str| Error::parse(path, 0, format!("missing {what}"));
    let degree = degree.ok_or_else(|| missing("degree"))?;
    let domain = Interval::new(
        lo.ok_or_else(|| missing("lo"))?,
        hi.ok_or_else(|| missing("hi"))?,
    )?;
    if coeffs.len() != degree + 1 || cheb.len() != degree + 1 || points.len() != degree + 2 {
        return Err(missing("complete coefficient / point lists"));
    }
    Ok(ApproxResult {
        poly: super::Polynomial::new(coeffs, domain)?,
        cheb: ChebSeries::new(cheb, domain),
        levelled_error: error.ok_or_else(|| missing("error"))?,
        equioscillation_points: points,
        iterations,
    })
}
