//! On-disk formats: the `RSYM1` binary grid format and plane-wave JSON.
//!
//! `RSYM1` layout (little-endian): magic `RSYM`, version `u32 = 1`, `n u8`,
//! `k u16`, `N u32`, `L f64`, then `N^n·k²` samples as `(re, im)` f64 pairs,
//! points row-major and each matrix row-major.

use super::grid::Grid;
use super::gridsym::GridSymbol;
use super::plane::PlaneWaveSymbol;
use super::BaseSymbol;
use crate::coeff_algebra::{matrix_from_json, matrix_to_json};
use crate::{Error, Result, C64};
use serde_json::{json, Value};
use std::path::Path;

const MAGIC: &[u8; 4] = b"RSYM";
const HEADER: usize = 4 + 4 + 1 + 2 + 4 + 8;

pub fn write_rsym(s: &GridSymbol) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + s.data().len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&1u32.to_le_bytes());
    out.push(s.grid.n as u8);
    out.extend_from_slice(&(s.k as u16).to_le_bytes());
    out.extend_from_slice(&(s.grid.npts as u32).to_le_bytes());
    out.extend_from_slice(&s.grid.half_width.to_le_bytes());
    for z in s.data() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn fmt(offset: usize, msg: impl Into<String>) -> Error {
    Error::Format { offset, msg: msg.into() }
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const W: usize>(&mut self, what: &str) -> Result<[u8; W]> {
        if self.pos + W > self.b.len() {
            return Err(fmt(self.pos, format!("truncated while reading {what}")));
        }
        let mut a = [0u8; W];
        a.copy_from_slice(&self.b[self.pos..self.pos + W]);
        self.pos += W;
        Ok(a)
    }
}

pub fn read_rsym(bytes: &[u8]) -> Result<GridSymbol> {
    let mut r = Reader { b: bytes, pos: 0 };
    if &r.take::<4>("magic")? != MAGIC {
        return Err(fmt(0, "bad magic, expected RSYM"));
    }
    let version = u32::from_le_bytes(r.take("version")?);
    if version != 1 {
        return Err(fmt(4, format!("unsupported version {version}")));
    }
    let n = r.take::<1>("n")?[0] as usize;
    let k = u16::from_le_bytes(r.take("k")?) as usize;
    let npts = u32::from_le_bytes(r.take("N")?) as usize;
    let l = f64::from_le_bytes(r.take("L")?);
    if k == 0 {
        return Err(fmt(9, "matrix size k must be positive"));
    }
    let grid = Grid::new(n, npts, l).map_err(|e| fmt(8, e.to_string()))?;
    let count = grid.len() * k * k;
    let want = HEADER + count * 16;
    if bytes.len() != want {
        let at = bytes.len().min(want);
        return Err(fmt(at, format!("payload holds {} bytes, expected {}", bytes.len() - HEADER, count * 16)));
    }
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        let at = r.pos;
        let re = f64::from_le_bytes(r.take("sample")?);
        let im = f64::from_le_bytes(r.take("sample")?);
        if !re.is_finite() || !im.is_finite() {
            return Err(fmt(at, "non-finite sample"));
        }
        data.push(C64::new(re, im));
    }
    GridSymbol::from_data(grid, k, data)
}

pub fn plane_to_json(s: &PlaneWaveSymbol) -> Value {
    let terms: Vec<Value> = s.terms().map(|(m, c)| json!({"m": m, "coeff": matrix_to_json(c)})).collect();
    json!({"n": s.n, "L": s.half_width, "k": s.k, "terms": terms})
}

fn line_col_offset(text: &str, line: usize, col: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + col.saturating_sub(1)).min(text.len())
}

/// serde does not report offsets of values, so semantic errors point at the
/// key they concern.
fn key_offset(text: &str, key: &str) -> usize {
    text.find(&format!("\"{key}\"")).unwrap_or(0)
}

pub fn plane_from_json(text: &str) -> Result<PlaneWaveSymbol> {
    let v: Value = serde_json::from_str(text).map_err(|e| fmt(line_col_offset(text, e.line(), e.column()), e.to_string()))?;
    let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| fmt(key_offset(text, "n"), "missing or non-integer \"n\""))? as usize;
    let l = v.get("L").and_then(Value::as_f64).ok_or_else(|| fmt(key_offset(text, "L"), "missing or non-numeric \"L\""))?;
    if !(1..=2).contains(&n) || !(l > 0.0) {
        return Err(fmt(key_offset(text, "n"), format!("need n ∈ {{1, 2}} and L > 0, got n = {n}, L = {l}")));
    }
    let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| fmt(key_offset(text, "terms"), "missing \"terms\" array"))?;
    let at = key_offset(text, "terms");
    let mut k = v.get("k").and_then(Value::as_u64).map(|k| k as usize);
    let mut parsed = Vec::with_capacity(terms.len());
    for (i, t) in terms.iter().enumerate() {
        let m: Vec<i64> = t
            .get("m")
            .and_then(Value::as_array)
            .and_then(|a| a.iter().map(Value::as_i64).collect::<Option<Vec<_>>>())
            .ok_or_else(|| fmt(at, format!("term {i}: \"m\" must be an integer array")))?;
        if m.len() != n {
            return Err(fmt(at, format!("term {i}: frequency has {} components, expected {n}", m.len())));
        }
        let c = t.get("coeff").ok_or_else(|| fmt(at, format!("term {i}: missing \"coeff\"")))?;
        let c = matrix_from_json(c).map_err(|e| fmt(at, format!("term {i}: {e}")))?;
        match k {
            None => k = Some(c.nrows()),
            Some(k) if k != c.nrows() => return Err(fmt(at, format!("term {i}: coefficient is {0}×{0}, expected {k}×{k}", c.nrows()))),
            _ => {}
        }
        parsed.push((m, c));
    }
    let mut s = PlaneWaveSymbol::new(n, l, k.unwrap_or(1).max(1));
    for (m, c) in parsed {
        s.add_term(m, c);
    }
    Ok(s)
}

/// Reads either format, sniffing the `RSYM` magic.
pub fn read_symbol(path: &Path) -> Result<BaseSymbol> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        return read_rsym(&bytes).map(BaseSymbol::Grid);
    }
    let text = std::str::from_utf8(&bytes).map_err(|e| fmt(e.valid_up_to(), "neither RSYM1 nor UTF-8 JSON"))?;
    plane_from_json(text).map(BaseSymbol::Waves)
}

pub fn write_symbol(path: &Path, s: &BaseSymbol) -> Result<()> {
    match s {
        BaseSymbol::Grid(g) => std::fs::write(path, write_rsym(g))?,
        BaseSymbol::Waves(w) => std::fs::write(path, serde_json::to_string_pretty(&plane_to_json(w)).expect("json") + "\n")?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff_algebra::{identity, scalar};

    #[test]
    fn rsym_roundtrip_and_errors() {
        let g = Grid::new(2, 4, 1.5).unwrap();
        let s = GridSymbol::from_fn(g, 2, |x| identity(2) * C64::new(x[0], x[1]));
        let bytes = write_rsym(&s);
        assert_eq!(bytes.len(), HEADER + 16 * 4 * 16);
        assert_eq!(read_rsym(&bytes).unwrap(), s);
        match read_rsym(&bytes[..bytes.len() - 3]) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, bytes.len() - 3),
            other => panic!("{other:?}"),
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(read_rsym(&bad), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn json_roundtrip_and_offsets() {
        let mut s = PlaneWaveSymbol::new(2, 3.0, 1);
        s.add_term(vec![1, -2], scalar(1, C64::new(0.5, -1.0)));
        s.add_term(vec![0, 0], scalar(1, C64::new(2.0, 0.0)));
        let text = plane_to_json(&s).to_string();
        assert_eq!(plane_from_json(&text).unwrap(), s);
        let broken = "{\"n\": 1,\n \"L\": 2.0, \"terms\": [ }";
        match plane_from_json(broken) {
            Err(Error::Format { offset, .. }) => assert_eq!(&broken[offset..offset + 1], "}"),
            other => panic!("{other:?}"),
        }
    }
}
