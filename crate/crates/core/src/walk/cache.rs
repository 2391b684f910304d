//! JSON-lines persistence for walk traces.
//!
//! Line 1 is a header naming the format, version, group, laziness and mode.
//! Each further line is one record (`returns`, `pruned`, `watch`, `radial`,
//! `measure`, `extra`), and the file ends with an `end` record carrying the
//! record count so truncated files are detected. Elements are stored as the
//! hex of their canonical bytes and every float as a hex float, so a
//! round trip is bit-exact.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::measure::SparseMeasure;
use super::trace::{WalkMode, WalkTrace};
use crate::error::{Error, Result};
use crate::group::Group;

pub const CACHE_FORMAT: &str = "walklab-trace";
pub const CACHE_VERSION: u32 = 1;

/// First line of a cache file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub format: String,
    pub version: u32,
    pub group: String,
    pub laziness: String,
    pub mode: WalkMode,
    pub requested: usize,
    pub reached: usize,
}

/// C99 `%a`-style hex float: `0x1.8p-1`, `-0x0p+0`, `inf`, `nan`.
pub fn format_hex_float(x: f64) -> String {
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0x7ff {
        return if mant == 0 { format!("{sign}inf") } else { "nan".into() };
    }
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let digits = format!("{mant:013x}");
    let digits = digits.trim_end_matches('0');
    if digits.is_empty() {
        format!("{sign}0x{lead}p{e:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{e:+}")
    }
}

/// Parses the output of [`format_hex_float`].
pub fn parse_hex_float(s: &str) -> Option<f64> {
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let sign_bit = u64::from(negative) << 63;
    match body {
        "inf" => return Some(f64::from_bits(sign_bit | 0x7ff0_0000_0000_0000)),
        "nan" if !negative => return Some(f64::NAN),
        _ => {}
    }
    let body = body.strip_prefix("0x")?;
    let (mantissa, exp) = body.split_once('p')?;
    let exp: i64 = exp.parse().ok()?;
    let (lead, digits) = match mantissa.split_once('.') {
        Some((lead, digits)) if !digits.is_empty() => (lead, digits),
        Some(_) => return None,
        None => (mantissa, ""),
    };
    if digits.len() > 13 || !digits.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    let mant = if digits.is_empty() {
        0
    } else {
        u64::from_str_radix(&format!("{digits:0<13}"), 16).ok()?
    };
    let bits = match lead {
        "1" => {
            let biased = exp + 1023;
            if !(1..=2046).contains(&biased) {
                return None;
            }
            ((biased as u64) << 52) | mant
        }
        "0" if mant == 0 => 0,
        "0" if exp == -1022 => mant,
        _ => return None,
    };
    Some(f64::from_bits(sign_bit | bits))
}

fn hex_list(values: &[f64]) -> Vec<String> {
    values.iter().map(|&x| format_hex_float(x)).collect()
}

/// Writes `trace` plus named extra JSON payloads to `path`.
///
/// The file is written next to its destination and renamed into place, so
/// readers never see a half-written cache.
pub fn cache_store<G: Group>(
    path: &Path,
    trace: &WalkTrace<G>,
    extras: &BTreeMap<String, Value>,
) -> Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut out = BufWriter::new(fs::File::create(&tmp)?);
        let header = CacheHeader {
            format: CACHE_FORMAT.into(),
            version: CACHE_VERSION,
            group: trace.group.spec().to_string(),
            laziness: format_hex_float(trace.laziness),
            mode: trace.mode,
            requested: trace.requested,
            reached: trace.reached,
        };
        let mut records = 0usize;
        let mut emit = |out: &mut BufWriter<fs::File>, v: Value| -> Result<()> {
            serde_json::to_writer(&mut *out, &v).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
            records += 1;
            Ok(())
        };
        serde_json::to_writer(&mut out, &header).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        emit(&mut out, json!({"kind": "returns", "values": hex_list(&trace.returns)}))?;
        emit(&mut out, json!({"kind": "pruned", "values": hex_list(&trace.pruned)}))?;
        let elements: Vec<String> = trace
            .watch
            .iter()
            .map(|g| hex::encode(trace.group.encode_to_vec(g)))
            .collect();
        let values: Vec<Vec<String>> = trace.watch_values.iter().map(|v| hex_list(v)).collect();
        emit(&mut out, json!({"kind": "watch", "elements": elements, "values": values}))?;
        if !trace.radial.is_empty() {
            let values: Vec<Vec<String>> = trace.radial.iter().map(|v| hex_list(v)).collect();
            emit(&mut out, json!({"kind": "radial", "values": values}))?;
        }
        for (&n, mu) in &trace.retained {
            let atoms: Vec<[String; 2]> = mu
                .sorted_atoms()
                .into_iter()
                .map(|(g, p)| [hex::encode(trace.group.encode_to_vec(g)), format_hex_float(p)])
                .collect();
            emit(&mut out, json!({"kind": "measure", "step": n, "atoms": atoms}))?;
        }
        for (name, data) in extras {
            emit(&mut out, json!({"kind": "extra", "name": name, "data": data}))?;
        }
        let total = records;
        serde_json::to_writer(&mut out, &json!({"kind": "end", "records": total}))
            .map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        out.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptCache(msg.into())
}

/// Reads only the header line.
pub fn read_header(path: &Path) -> Result<CacheHeader> {
    let mut first = String::new();
    BufReader::new(fs::File::open(path)?).read_line(&mut first)?;
    parse_header(&first)
}

fn parse_header(line: &str) -> Result<CacheHeader> {
    let raw: Value = serde_json::from_str(line).map_err(|e| corrupt(format!("header: {e}")))?;
    if raw.get("format").and_then(Value::as_str) != Some(CACHE_FORMAT) {
        return Err(corrupt("not a walk trace cache"));
    }
    let version = raw
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| corrupt("header lacks a version"))? as u32;
    if version != CACHE_VERSION {
        return Err(Error::CacheVersion {
            found: version,
            expected: CACHE_VERSION,
        });
    }
    serde_json::from_value(raw).map_err(|e| corrupt(format!("header: {e}")))
}

fn floats(v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| corrupt("expected an array of hex floats"))?
        .iter()
        .map(|x| {
            x.as_str()
                .and_then(parse_hex_float)
                .ok_or_else(|| corrupt(format!("bad hex float {x}")))
        })
        .collect()
}

fn float_rows(v: &Value) -> Result<Vec<Vec<f64>>> {
    v.as_array()
        .ok_or_else(|| corrupt("expected an array of rows"))?
        .iter()
        .map(floats)
        .collect()
}

fn element<G: Group>(group: &G, v: &Value) -> Result<G::Elem> {
    let bytes = v
        .as_str()
        .and_then(|s| hex::decode(s).ok())
        .ok_or_else(|| corrupt(format!("bad element bytes {v}")))?;
    group.decode(&bytes)
}

/// Loads a trace for `group`, refusing files written for another group.
pub fn cache_load<G: Group>(
    path: &Path,
    group: G,
) -> Result<(WalkTrace<G>, BTreeMap<String, Value>)> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = parse_header(&lines.next().ok_or_else(|| corrupt("empty file"))??)?;
    let expected = group.spec().to_string();
    if header.group != expected {
        return Err(Error::SpecMismatch {
            found: header.group,
            expected,
        });
    }
    let laziness =
        parse_hex_float(&header.laziness).ok_or_else(|| corrupt("bad laziness value"))?;
    let mut trace = WalkTrace {
        group,
        laziness,
        mode: header.mode,
        requested: header.requested,
        reached: header.reached,
        returns: Vec::new(),
        pruned: Vec::new(),
        retained: BTreeMap::new(),
        watch: Vec::new(),
        watch_values: Vec::new(),
        radial: Vec::new(),
    };
    let mut extras = BTreeMap::new();
    let mut records = 0usize;
    let mut ended = false;
    for line in lines {
        let line = line?;
        if ended {
            return Err(corrupt("data after end record"));
        }
        let rec: Value = serde_json::from_str(&line).map_err(|e| corrupt(format!("record: {e}")))?;
        let field = |name: &str| rec.get(name).ok_or_else(|| corrupt(format!("record lacks {name}")));
        match rec.get("kind").and_then(Value::as_str) {
            Some("returns") => trace.returns = floats(field("values")?)?,
            Some("pruned") => trace.pruned = floats(field("values")?)?,
            Some("watch") => {
                trace.watch = field("elements")?
                    .as_array()
                    .ok_or_else(|| corrupt("watch elements"))?
                    .iter()
                    .map(|v| element(&trace.group, v))
                    .collect::<Result<_>>()?;
                trace.watch_values = float_rows(field("values")?)?;
            }
            Some("radial") => trace.radial = float_rows(field("values")?)?,
            Some("measure") => {
                let step = field("step")?.as_u64().ok_or_else(|| corrupt("measure step"))? as usize;
                let atoms = field("atoms")?
                    .as_array()
                    .ok_or_else(|| corrupt("measure atoms"))?
                    .iter()
                    .map(|pair| {
                        let g = element(&trace.group, &pair[0])?;
                        let p = pair[1]
                            .as_str()
                            .and_then(parse_hex_float)
                            .ok_or_else(|| corrupt("atom mass"))?;
                        Ok((g, p))
                    })
                    .collect::<Result<Vec<_>>>()?;
                trace.retained.insert(step, SparseMeasure::accumulate(atoms));
            }
            Some("extra") => {
                let name = field("name")?.as_str().ok_or_else(|| corrupt("extra name"))?;
                extras.insert(name.to_string(), field("data")?.clone());
            }
            Some("end") => {
                if field("records")?.as_u64() != Some(records as u64) {
                    return Err(corrupt("record count does not match end marker"));
                }
                ended = true;
                continue;
            }
            _ => return Err(corrupt("unknown record kind")),
        }
        records += 1;
    }
    if !ended {
        return Err(corrupt("missing end record (file truncated?)"));
    }
    let steps = trace.reached + 1;
    if trace.returns.len() != steps
        || trace.pruned.len() != steps
        || trace.watch_values.len() != steps
        || trace.watch_values.iter().any(|v| v.len() != trace.watch.len())
        || !(trace.radial.is_empty() || trace.radial.len() == steps)
    {
        return Err(corrupt("record lengths disagree with the reached step"));
    }
    Ok((trace, extras))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FreeAbelian, MemoryBudget};
    use crate::walk::walk_sequence;
    use proptest::prelude::*;

    #[test]
    fn hex_float_examples() {
        assert_eq!(format_hex_float(0.5), "0x1p-1");
        assert_eq!(format_hex_float(0.375), "0x1.8p-2");
        assert_eq!(format_hex_float(-0.0), "-0x0p+0");
        assert_eq!(format_hex_float(f64::MIN_POSITIVE / 4.0), "0x0.4p-1022");
        assert_eq!(parse_hex_float("0x1.8p-2"), Some(0.375));
        assert_eq!(parse_hex_float("0x2p+0"), None);
        assert_eq!(parse_hex_float("0x1.p+0"), None);
    }

    proptest! {
        #[test]
        fn hex_float_round_trip(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            let back = parse_hex_float(&format_hex_float(x)).unwrap();
            if x.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(back.to_bits(), bits);
            }
        }
    }

    #[test]
    fn round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z2.jsonl");
        let trace = walk_sequence(FreeAbelian::new(2), 3, MemoryBudget::default()).unwrap();
        cache_store(&path, &trace, &BTreeMap::new()).unwrap();
        let (back, _) = cache_load(&path, FreeAbelian::new(2)).unwrap();
        for n in 0..=trace.reached() {
            assert_eq!(
                back.return_prob(n).unwrap().to_bits(),
                trace.return_prob(n).unwrap().to_bits()
            );
            assert_eq!(back.measure(n).unwrap().len(), trace.measure(n).unwrap().len());
        }
        assert!(matches!(
            cache_load(&path, FreeAbelian::new(3)),
            Err(Error::SpecMismatch { .. })
        ));
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(
            cache_load(&path, FreeAbelian::new(2)),
            Err(Error::CorruptCache(_))
        ));
    }
}
