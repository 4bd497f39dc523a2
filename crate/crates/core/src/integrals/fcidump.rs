//! FCIDUMP text I/O.
//!
//! Header: `&FCI NORB=<n>,NELEC=<N>,MS2=<2S>, ORBSYM=1,…,1, ISYM=1, &END`, then
//! one `<value> <p> <q> <r> <s>` line per integral with 1-based indices:
//! all four nonzero is `(pq|rs)`, `r = s = 0` is `h[p][q]`, all zero is the core
//! energy. Only ISYM=1 files without point-group handling are supported.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::IntegralSet;
use crate::error::{Error, Result};

/// Integrals together with the electron count recorded in the header.
#[derive(Debug, Clone, PartialEq)]
pub struct Fcidump {
    pub integrals: IntegralSet,
    pub n_electrons: usize,
    pub ms2: i64,
}

impl Fcidump {
    /// Half-filled, lowest-spin header for the given integrals.
    pub fn half_filled(integrals: IntegralSet) -> Self {
        let n = integrals.n_spatial();
        Fcidump {
            integrals,
            n_electrons: n,
            ms2: (n % 2) as i64,
        }
    }

    /// Alpha and beta electron counts implied by `NELEC` and `MS2`.
    pub fn electron_counts(&self) -> Result<(usize, usize)> {
        let n = self.n_electrons as i64;
        if (n + self.ms2) % 2 != 0 || self.ms2.abs() > n {
            return Err(Error::Domain(format!(
                "NELEC={} and MS2={} are inconsistent",
                self.n_electrons, self.ms2
            )));
        }
        let n_alpha = ((n + self.ms2) / 2) as usize;
        Ok((n_alpha, self.n_electrons - n_alpha))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse(&text, path)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Canonical text: one representative per symmetry class, two-body entries
    /// first, then one-body, then the core energy. Zero integrals are skipped.
    pub fn to_text(&self) -> String {
        let set = &self.integrals;
        let n = set.n_spatial();
        let mut out = String::new();
        let orbsym = vec!["1"; n].join(",");
        let _ = writeln!(
            out,
            "&FCI NORB={},NELEC={},MS2={}, ORBSYM={}, ISYM=1, &END",
            n, self.n_electrons, self.ms2, orbsym
        );
        for p in 0..n {
            for q in 0..=p {
                let pq = p * (p + 1) / 2 + q;
                for r in 0..n {
                    for s in 0..=r {
                        let rs = r * (r + 1) / 2 + s;
                        if rs > pq {
                            continue;
                        }
                        let x = set.v(p, q, r, s);
                        if x != 0.0 {
                            write_line(&mut out, x, p + 1, q + 1, r + 1, s + 1);
                        }
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..=p {
                let x = set.h()[(p, q)];
                if x != 0.0 {
                    write_line(&mut out, x, p + 1, q + 1, 0, 0);
                }
            }
        }
        write_line(&mut out, set.e_core(), 0, 0, 0, 0);
        out
    }
}

fn write_line(out: &mut String, value: f64, p: usize, q: usize, r: usize, s: usize) {
    // 17 significant digits round-trip every f64 exactly.
    let _ = writeln!(out, "{value:>24.16E} {p:>4} {q:>4} {r:>4} {s:>4}");
}

/// Reads integrals from an FCIDUMP file, replicating each entry to its
/// symmetry partners.
pub fn read_fcidump(path: impl AsRef<Path>) -> Result<IntegralSet> {
    Fcidump::read(path).map(|f| f.integrals)
}

/// Writes integrals as a half-filled FCIDUMP.
pub fn write_fcidump(integrals: &IntegralSet, path: impl AsRef<Path>) -> Result<()> {
    Fcidump::half_filled(integrals.clone()).write(path)
}

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i64,
}

fn parse(text: &str, path: &Path) -> Result<Fcidump> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut header_text = String::new();
    let mut header_end = None;
    let mut first_line = None;
    for (no, line) in lines.by_ref() {
        if first_line.is_none() {
            if line.trim().is_empty() {
                continue;
            }
            if !line.trim_start().to_ascii_uppercase().starts_with("&FCI") {
                return Err(err(no, "expected namelist header starting with &FCI".into()));
            }
            first_line = Some(no);
        }
        let upper = line.to_ascii_uppercase();
        if let Some(pos) = upper.find("&END") {
            header_text.push_str(&upper[..pos]);
            header_end = Some(no);
            break;
        }
        if upper.trim() == "/" {
            header_end = Some(no);
            break;
        }
        header_text.push_str(&upper);
        header_text.push(' ');
    }
    let Some(header_line) = header_end else {
        return Err(err(
            first_line.unwrap_or(1),
            "namelist header is not terminated by &END".into(),
        ));
    };
    let header = parse_header(&header_text).map_err(|m| err(header_line, m))?;
    let n = header.norb;
    let mut set = IntegralSet::zeros(n);

    for (no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(err(no, format!("expected 5 fields, found {}", fields.len())));
        }
        let value: f64 = fields[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| err(no, format!("cannot parse value {:?}", fields[0])))?;
        if !value.is_finite() {
            return Err(err(no, "integral value is not finite".into()));
        }
        let mut idx = [0usize; 4];
        for (slot, field) in idx.iter_mut().zip(&fields[1..]) {
            let i: i64 = field
                .parse()
                .map_err(|_| err(no, format!("cannot parse index {field:?}")))?;
            if i < 0 || i as usize > n {
                return Err(err(no, format!("index {i} outside [1, {n}]")));
            }
            *slot = i as usize;
        }
        match idx {
            [0, 0, 0, 0] => set.set_e_core(value),
            [p, q, 0, 0] if p > 0 && q > 0 => set.set_h_symmetric(p - 1, q - 1, value),
            [p, q, r, s] if p > 0 && q > 0 && r > 0 && s > 0 => {
                set.set_v_symmetric(p - 1, q - 1, r - 1, s - 1, value)
            }
            _ => {
                return Err(err(
                    no,
                    format!("unsupported index pattern {} {} {} {}", idx[0], idx[1], idx[2], idx[3]),
                ))
            }
        }
    }

    Ok(Fcidump {
        integrals: set,
        n_electrons: header.nelec,
        ms2: header.ms2,
    })
}

fn parse_header(text: &str) -> std::result::Result<Header, String> {
    let body = text.trim_start();
    let body = body
        .strip_prefix("&FCI")
        .ok_or_else(|| "expected namelist header starting with &FCI".to_string())?;

    let mut entries: Vec<(String, Vec<String>)> = Vec::new();
    for token in body.split(|c: char| c == ',' || c.is_whitespace()) {
        if token.is_empty() {
            continue;
        }
        if let Some((key, value)) = token.split_once('=') {
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(format!("malformed header token {token:?}"));
            }
            let values = if value.is_empty() {
                vec![]
            } else {
                vec![value.to_string()]
            };
            entries.push((key, values));
        } else {
            match entries.last_mut() {
                Some((_, values)) => values.push(token.to_string()),
                None => return Err(format!("unexpected header token {token:?}")),
            }
        }
    }

    let scalar = |key: &str| -> std::result::Result<Option<i64>, String> {
        match entries.iter().find(|(k, _)| k == key) {
            None => Ok(None),
            Some((_, values)) if values.len() == 1 => values[0]
                .parse::<i64>()
                .map(Some)
                .map_err(|_| format!("{key} has non-integer value {:?}", values[0])),
            Some((_, values)) => Err(format!("{key} expects one value, got {}", values.len())),
        }
    };

    let norb = scalar("NORB")?.ok_or("header lacks NORB")?;
    if norb < 1 {
        return Err(format!("NORB must be positive, got {norb}"));
    }
    let nelec = scalar("NELEC")?.ok_or("header lacks NELEC")?;
    if nelec < 0 {
        return Err(format!("NELEC must be nonnegative, got {nelec}"));
    }
    let ms2 = scalar("MS2")?.unwrap_or(0);
    if let Some(isym) = scalar("ISYM")? {
        if isym != 1 {
            return Err(format!("only ISYM=1 is supported, got {isym}"));
        }
    }
    if let Some((_, orbsym)) = entries.iter().find(|(k, _)| k == "ORBSYM") {
        if !orbsym.is_empty() && orbsym.len() != norb as usize {
            return Err(format!(
                "ORBSYM lists {} orbitals but NORB={norb}",
                orbsym.len()
            ));
        }
    }
    Ok(Header {
        norb: norb as usize,
        nelec: nelec as usize,
        ms2,
    })
}
