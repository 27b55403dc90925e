//! FCIDUMP integral files.
//!
//! The header is a Fortran namelist (`&FCI NORB=…, NELEC=…, … &END` or `/`);
//! every following line is `value i j k l` with 1-based orbital indices in
//! chemist notation. `ORBSYM`, `ISYM` and `MS2` are read and ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anqs_core::fermion::IntegralSet;

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("FCIDUMP line {line}: {message}")]
pub struct FcidumpError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FcidumpError {
    FcidumpError {
        line,
        message: message.into(),
    }
}

fn parse_real(token: &str) -> Option<f64> {
    token.replace(['D', 'd'], "E").parse().ok()
}

/// Splits the namelist into `KEY → values`, returning the index of the first
/// integral line.
fn parse_header(lines: &[&str]) -> Result<(BTreeMap<String, Vec<String>>, usize), FcidumpError> {
    let first = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or_else(|| err(1, "empty file"))?;
    let opening = lines[first].trim_start();
    if !opening
        .get(..4)
        .is_some_and(|s| s.eq_ignore_ascii_case("&FCI"))
    {
        return Err(err(
            first + 1,
            "expected namelist header starting with &FCI",
        ));
    }
    let mut fields: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut key: Option<String> = None;
    for (idx, raw) in lines.iter().enumerate().skip(first) {
        let mut text = raw.trim();
        if idx == first {
            text = &text[4..];
        }
        let (body, done) = match text
            .find("&END")
            .or_else(|| text.find("&end"))
            .or_else(|| text.find('/'))
        {
            Some(pos) => (&text[..pos], true),
            None => (text, false),
        };
        for piece in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let value = match piece.split_once('=') {
                Some((k, v)) => {
                    let k = k.trim().to_ascii_uppercase();
                    if k.is_empty() {
                        return Err(err(idx + 1, format!("missing key before '=' in {piece:?}")));
                    }
                    fields.entry(k.clone()).or_default();
                    key = Some(k);
                    v.trim()
                }
                None => piece,
            };
            if value.is_empty() {
                continue;
            }
            let k = key
                .as_ref()
                .ok_or_else(|| err(idx + 1, format!("value {value:?} without a key")))?;
            fields
                .get_mut(k)
                .expect("key inserted")
                .extend(value.split_whitespace().map(String::from));
        }
        if done {
            return Ok((fields, idx + 1));
        }
    }
    Err(err(
        lines.len(),
        "namelist header is not terminated by &END or /",
    ))
}

fn header_usize(
    fields: &BTreeMap<String, Vec<String>>,
    key: &str,
    line: usize,
) -> Result<usize, FcidumpError> {
    let values = fields
        .get(key)
        .ok_or_else(|| err(line, format!("header lacks {key}")))?;
    match values.as_slice() {
        [v] => v
            .parse()
            .map_err(|_| err(line, format!("{key} is not a non-negative integer: {v:?}"))),
        _ => Err(err(line, format!("{key} must have exactly one value"))),
    }
}

pub fn parse_fcidump(text: &str) -> Result<IntegralSet, FcidumpError> {
    let lines: Vec<&str> = text.lines().collect();
    let (fields, body) = parse_header(&lines)?;
    let m = header_usize(&fields, "NORB", body)?;
    let ne = header_usize(&fields, "NELEC", body)?;
    if m == 0 {
        return Err(err(body, "NORB must be positive"));
    }
    if ne > 2 * m {
        return Err(err(
            body,
            format!("NELEC = {ne} exceeds 2·NORB = {}", 2 * m),
        ));
    }
    let mut ints = IntegralSet::zeros(m, ne);
    for (idx, raw) in lines.iter().enumerate().skip(body) {
        let line = idx + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 5 {
            return Err(err(
                line,
                format!("expected `value i j k l`, found {} fields", tokens.len()),
            ));
        }
        let value = parse_real(tokens[0])
            .ok_or_else(|| err(line, format!("not a number: {:?}", tokens[0])))?;
        let mut index = [0usize; 4];
        for (slot, tok) in index.iter_mut().zip(&tokens[1..]) {
            *slot = tok
                .parse()
                .map_err(|_| err(line, format!("not an orbital index: {tok:?}")))?;
            if *slot > m {
                return Err(err(
                    line,
                    format!("orbital index {slot} exceeds NORB = {m}"),
                ));
            }
        }
        match index {
            [0, 0, 0, 0] => ints.core_energy = value,
            [i, j, 0, 0] if i > 0 && j > 0 => ints.set_one_body(i - 1, j - 1, value),
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                ints.set_two_body(i - 1, j - 1, k - 1, l - 1, value)
            }
            _ => return Err(err(line, format!("invalid index pattern {index:?}"))),
        }
    }
    Ok(ints)
}

/// Serializes the symmetry-unique nonzero entries; parsing the result gives
/// back the same tables.
pub fn write_fcidump(ints: &IntegralSet) -> String {
    let m = ints.n_spatial;
    let mut out = String::new();
    writeln!(out, " &FCI NORB={m},NELEC={},MS2=0,", ints.n_electrons).unwrap();
    writeln!(out, "  ORBSYM={}", "1,".repeat(m)).unwrap();
    writeln!(out, "  ISYM=1,\n &END").unwrap();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|p| (0..=p).map(move |q| (p, q))).collect();
    for (a, &(p, q)) in pairs.iter().enumerate() {
        for &(r, s) in &pairs[..=a] {
            let v = ints.two_body(p, q, r, s);
            if v != 0.0 {
                writeln!(out, "{v:e} {} {} {} {}", p + 1, q + 1, r + 1, s + 1).unwrap();
            }
        }
    }
    for &(p, q) in &pairs {
        let v = ints.one_body(p, q);
        if v != 0.0 {
            writeln!(out, "{v:e} {} {} 0 0", p + 1, q + 1).unwrap();
        }
    }
    writeln!(out, "{:e} 0 0 0 0", ints.core_energy).unwrap();
    out
}
