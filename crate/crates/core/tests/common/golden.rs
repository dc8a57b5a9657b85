//! Frozen oracle results. Each oracle's output is rendered as text and
//! compared with `tests/golden/<name>.txt`; set `BLESS=1` to (re)write the
//! files after a deliberate change to a generator or oracle.

use std::path::PathBuf;

pub fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.txt"))
}

/// Compare `actual` with the frozen file; `Err` describes the first difference.
pub fn check(name: &str, actual: &str) -> Result<(), String> {
    let path = path(name);
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(&path, actual).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path)
        .map_err(|e| format!("missing frozen oracle results {} ({e}); run with BLESS=1", path.display()))?;
    if expected == actual {
        return Ok(());
    }
    let line = expected
        .lines()
        .zip(actual.lines())
        .position(|(a, b)| a != b)
        .unwrap_or_else(|| expected.lines().count().min(actual.lines().count()));
    Err(format!(
        "{} differs from the frozen oracle results at line {}: expected {:?}, got {:?}",
        path.display(),
        line + 1,
        expected.lines().nth(line).unwrap_or("<end>"),
        actual.lines().nth(line).unwrap_or("<end>"),
    ))
}

pub fn assert_frozen(name: &str, actual: &str) {
    if let Err(e) = check(name, actual) {
        panic!("{e}");
    }
}
