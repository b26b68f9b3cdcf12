//! Snapshot, local-time and metadata files.
//!
//! Snapshot rows are `step,time,S|P,index,x_0,...,x_{d-1}` with the time and
//! coordinates written as hexadecimal floats (`0x1.8p+1`), so reading a file
//! back gives the exact bits that were written.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use depletion_core::dynamics::LocalTimes;
use depletion_core::Configuration;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Hexadecimal float text of `x`, in the style of C's `%a`.
pub fn format_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    let frac = |m: u64| {
        let s = format!("{m:013x}");
        let t = s.trim_end_matches('0');
        if t.is_empty() {
            String::new()
        } else {
            format!(".{t}")
        }
    };
    match (exp, mant) {
        (0, 0) => format!("{sign}0x0p+0"),
        (0, m) => format!("{sign}0x0{}p-1022", frac(m)),
        (e, m) => format!("{sign}0x1{}p{:+}", frac(m), e - 1023),
    }
}

fn scale_by_pow2(mut x: f64, mut e: i64) -> f64 {
    // Steps keep every intermediate product exact and in range.
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Parse a hexadecimal float. Values written by [`format_hex`] round-trip
/// exactly.
pub fn parse_hex(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let value = match body {
        "inf" => f64::INFINITY,
        "nan" => f64::NAN,
        _ => {
            let hex = body
                .strip_prefix("0x")
                .or_else(|| body.strip_prefix("0X"))
                .ok_or_else(|| format!("`{s}` is not a hexadecimal float"))?;
            let (digits, exp) = hex
                .split_once(['p', 'P'])
                .ok_or_else(|| format!("`{s}` has no binary exponent"))?;
            let exp: i64 = exp.parse().map_err(|_| format!("bad exponent in `{s}`"))?;
            let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
            if int.is_empty() || int.len() + frac.len() > 15 {
                return Err(format!("bad mantissa in `{s}`"));
            }
            let mut m: u64 = 0;
            for c in int.chars().chain(frac.chars()) {
                let v = c.to_digit(16).ok_or_else(|| format!("bad hex digit in `{s}`"))?;
                m = m * 16 + v as u64;
            }
            scale_by_pow2(m as f64, exp - 4 * frac.len() as i64)
        }
    };
    Ok(if neg { -value } else { value })
}

/// Header comment naming the columns.
pub fn write_header<W: Write>(w: &mut W, d: usize) -> io::Result<()> {
    let coords: Vec<String> = (0..d).map(|k| format!("x{k}")).collect();
    writeln!(w, "# step,time,body,index,{}", coords.join(","))
}

/// All bodies of one snapshot, spheres first.
pub fn write_snapshot<W: Write>(w: &mut W, step: u64, t: f64, cfg: &Configuration) -> io::Result<()> {
    let d = cfg.dim();
    let mut line = String::new();
    let time = format_hex(t);
    for (kind, pts) in [("S", cfg.spheres()), ("P", cfg.particles())] {
        for (i, x) in pts.chunks_exact(d).enumerate() {
            line.clear();
            let _ = write!(line, "{step},{time},{kind},{i}");
            for c in x {
                line.push(',');
                line.push_str(&format_hex(*c));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub t: f64,
    pub cfg: Configuration,
}

/// Read every snapshot of a file written by [`write_snapshot`].
pub fn read_snapshots<R: BufRead>(r: R) -> Result<Vec<Snapshot>, SnapshotError> {
    struct Pending {
        step: u64,
        t: f64,
        spheres: Vec<f64>,
        particles: Vec<f64>,
        counts: (usize, usize),
    }
    let mut out = Vec::new();
    let mut dim: Option<usize> = None;
    let mut cur: Option<Pending> = None;
    let finish = |p: Pending, d: usize, out: &mut Vec<Snapshot>| {
        let cfg = Configuration::new(d, p.spheres, p.particles).expect("stride checked while reading");
        out.push(Snapshot {
            step: p.step,
            t: p.t,
            cfg,
        });
    };
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| SnapshotError::Parse { line: line_no, message };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 5 {
            return Err(bad(format!("expected at least 5 fields, got {}", fields.len())));
        }
        let d = fields.len() - 4;
        if *dim.get_or_insert(d) != d {
            return Err(bad(format!("row has {d} coordinates, earlier rows had {}", dim.unwrap())));
        }
        let step: u64 = fields[0].parse().map_err(|_| bad(format!("bad step `{}`", fields[0])))?;
        let t = parse_hex(fields[1]).map_err(bad)?;
        let index: usize = fields[3].parse().map_err(|_| bad(format!("bad index `{}`", fields[3])))?;
        let coords = fields[4..]
            .iter()
            .map(|f| parse_hex(f))
            .collect::<Result<Vec<f64>, String>>()
            .map_err(bad)?;
        let same = matches!(&cur, Some(p) if p.step == step && p.t.to_bits() == t.to_bits());
        if !same {
            if let Some(p) = cur.take() {
                finish(p, d, &mut out);
            }
            cur = Some(Pending {
                step,
                t,
                spheres: Vec::new(),
                particles: Vec::new(),
                counts: (0, 0),
            });
        }
        let p = cur.as_mut().expect("just set");
        match fields[2] {
            "S" => {
                if p.counts.1 > 0 || index != p.counts.0 {
                    return Err(bad(format!("sphere {index} out of order")));
                }
                p.spheres.extend(coords);
                p.counts.0 += 1;
            }
            "P" => {
                if index != p.counts.1 {
                    return Err(bad(format!("particle {index} out of order")));
                }
                p.particles.extend(coords);
                p.counts.1 += 1;
            }
            other => return Err(bad(format!("body type must be S or P, got `{other}`"))),
        }
    }
    if let (Some(p), Some(d)) = (cur, dim) {
        finish(p, d, &mut out);
    }
    Ok(out)
}

/// Non-zero local times as `step,S,i,j,value` (sphere pairs, `i < j`) and
/// `step,P,i,k,value` rows.
pub fn write_local_times<W: Write>(w: &mut W, step: u64, lt: &LocalTimes) -> io::Result<()> {
    let n = lt.n_spheres();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = lt.sphere(i, j);
            if v != 0.0 {
                writeln!(w, "{step},S,{i},{j},{}", format_hex(v))?;
            }
        }
    }
    for i in 0..n {
        for k in 0..lt.n_particles() {
            let v = lt.particle(i, k);
            if v != 0.0 {
                writeln!(w, "{step},P,{i},{k},{}", format_hex(v))?;
            }
        }
    }
    Ok(())
}

/// Ordered `[section]` / `key = value` document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl Metadata {
    pub fn set(&mut self, section: &str, key: &str, value: impl ToString) {
        let idx = match self.sections.iter().position(|(s, _)| s == section) {
            Some(i) => i,
            None => {
                self.sections.push((section.to_string(), Vec::new()));
                self.sections.len() - 1
            }
        };
        let entries = &mut self.sections[idx].1;
        let value = value.to_string().replace('\n', " ");
        match entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => entries.push((key.to_string(), value)),
        }
    }

    /// Append every entry of `other`, section by section.
    pub fn extend(&mut self, other: Metadata) {
        for (section, entries) in other.sections {
            for (k, v) in entries {
                self.set(&section, &k, v);
            }
        }
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|(s, _)| s == section)
            .and_then(|(_, e)| e.iter().find(|(k, _)| k == key))
            .map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, (name, entries)) in self.sections.iter().enumerate() {
            if i > 0 {
                s.push('\n');
            }
            let _ = writeln!(s, "[{name}]");
            for (k, v) in entries {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }

    /// Parse text written by [`Metadata::to_text`] (or a config file).
    pub fn parse(text: &str) -> Result<Self, SnapshotError> {
        let mut m = Metadata::default();
        let mut section = String::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| SnapshotError::Parse {
                line: idx + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            m.set(&section, k.trim(), v.trim());
        }
        Ok(m)
    }
}
