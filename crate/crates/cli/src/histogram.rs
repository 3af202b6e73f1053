//! Text histograms: one `symbol count` pair per line, `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub type SymbolCounts = BTreeMap<String, u64>;

pub fn parse_histogram(text: &str, origin: &str) -> Result<SymbolCounts> {
    let mut counts = SymbolCounts::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(symbol), Some(count), None) = (fields.next(), fields.next(), fields.next())
        else {
            bail!("{origin}:{}: expected `symbol count`", idx + 1);
        };
        let count: u64 = count
            .parse()
            .with_context(|| format!("{origin}:{}: bad count `{count}`", idx + 1))?;
        if counts.insert(symbol.to_string(), count).is_some() {
            bail!("{origin}:{}: duplicate symbol `{symbol}`", idx + 1);
        }
    }
    Ok(counts)
}

pub fn read_histogram(path: &Path) -> Result<SymbolCounts> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_histogram(&text, &path.display().to_string())
}

pub fn write_histogram(path: &Path, counts: &SymbolCounts) -> Result<()> {
    let mut out = String::new();
    for (symbol, count) in counts {
        writeln!(out, "{symbol} {count}").unwrap();
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Count vectors over the sorted union of both symbol sets, zero-filled.
pub fn align(p: &SymbolCounts, q: &SymbolCounts) -> (Vec<String>, Vec<u64>, Vec<u64>) {
    let mut symbols: Vec<String> = p.keys().chain(q.keys()).cloned().collect();
    symbols.sort();
    symbols.dedup();
    let pick = |h: &SymbolCounts| {
        symbols
            .iter()
            .map(|s| h.get(s).copied().unwrap_or(0))
            .collect()
    };
    let (pc, qc) = (pick(p), pick(q));
    (symbols, pc, qc)
}
