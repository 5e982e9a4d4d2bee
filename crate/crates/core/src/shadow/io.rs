//! JSON-Lines shadow files.
//!
//! Line 1 is the header. Each snapshot is one line
//! `{"bases":"XZY","bits":"010","sign":1,"glog":[[k,s],...]}`. The last line is
//! `{"end":{"count":N,"sha256":"…"}}`, a digest of all snapshot lines
//! (each including its newline).

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::set::{ShadowHeader, ShadowSet, Snapshot};
use crate::error::{Error, Result};
use crate::pauli::PauliAxis;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Trailer {
    count: u64,
    sha256: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrailerLine {
    end: Trailer,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSnapshot {
    bases: String,
    bits: String,
    sign: i8,
    #[serde(default)]
    glog: Option<Vec<(u8, i8)>>,
}

pub fn parse_header_line(line: &str) -> Result<ShadowHeader> {
    let header: ShadowHeader = serde_json::from_str(line)?;
    header.validate()?;
    Ok(header)
}

pub fn parse_snapshot_line(line: &str, header: &ShadowHeader) -> Result<Snapshot> {
    let raw: RawSnapshot = serde_json::from_str(line)?;
    let bases = raw
        .bases
        .chars()
        .map(|c| {
            PauliAxis::from_char(c)
                .filter(|a| *a != PauliAxis::I)
                .ok_or_else(|| Error::Parse(format!("bad basis character {c:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let bits = raw
        .bits
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Parse(format!("bad bit character {c:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let s = Snapshot {
        bases,
        bits,
        sign: raw.sign,
        gate_log: raw.glog.unwrap_or_default(),
    };
    s.validate(header)?;
    Ok(s)
}

fn format_snapshot(s: &Snapshot, out: &mut String) {
    out.clear();
    out.push_str("{\"bases\":\"");
    out.extend(s.bases.iter().map(|b| b.as_char()));
    out.push_str("\",\"bits\":\"");
    out.extend(s.bits.iter().map(|&b| if b { '1' } else { '0' }));
    let _ = write!(out, "\",\"sign\":{}", s.sign);
    if !s.gate_log.is_empty() {
        out.push_str(",\"glog\":[");
        for (i, (k, sg)) in s.gate_log.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "[{k},{sg}]");
        }
        out.push(']');
    }
    out.push_str("}\n");
}

/// Streaming writer; the header's `n_snapshots` must match what is written.
pub struct ShadowWriter<W: Write> {
    out: W,
    header: ShadowHeader,
    hasher: Sha256,
    count: u64,
    line: String,
}

impl ShadowWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>, header: ShadowHeader) -> Result<Self> {
        Self::new(BufWriter::new(File::create(path)?), header)
    }
}

impl<W: Write> ShadowWriter<W> {
    pub fn new(mut out: W, header: ShadowHeader) -> Result<Self> {
        header.validate()?;
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        Ok(ShadowWriter {
            out,
            header,
            hasher: Sha256::new(),
            count: 0,
            line: String::new(),
        })
    }

    pub fn write(&mut self, s: &Snapshot) -> Result<()> {
        s.validate(&self.header)?;
        format_snapshot(s, &mut self.line);
        self.hasher.update(self.line.as_bytes());
        self.out.write_all(self.line.as_bytes())?;
        self.count += 1;
        Ok(())
    }

    /// Writes the trailer and returns the underlying writer.
    pub fn finish(mut self) -> Result<W> {
        if self.count != self.header.n_snapshots {
            return Err(Error::InvalidParameter(format!(
                "header announces {} snapshots but {} were written",
                self.header.n_snapshots, self.count
            )));
        }
        let trailer = TrailerLine {
            end: Trailer {
                count: self.count,
                sha256: hex::encode(self.hasher.finalize()),
            },
        };
        serde_json::to_writer(&mut self.out, &trailer)?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Streaming reader yielding snapshots one line at a time. The checksum is
/// verified when the trailer is reached; a missing trailer is an error.
pub struct ShadowReader<R: BufRead> {
    input: R,
    header: ShadowHeader,
    hasher: Sha256,
    count: u64,
    line: String,
    done: bool,
}

impl ShadowReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(BufReader::new(File::open(path)?))
    }
}

impl<R: BufRead> ShadowReader<R> {
    pub fn new(mut input: R) -> Result<Self> {
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            return Err(Error::Parse("empty shadow file".into()));
        }
        let header = parse_header_line(line.trim_end())?;
        Ok(ShadowReader {
            input,
            header,
            hasher: Sha256::new(),
            count: 0,
            line,
            done: false,
        })
    }

    pub fn header(&self) -> &ShadowHeader {
        &self.header
    }

    fn next_snapshot(&mut self) -> Result<Option<Snapshot>> {
        self.line.clear();
        if self.input.read_line(&mut self.line)? == 0 {
            return Err(Error::Checksum);
        }
        if self.line.starts_with("{\"end\"") {
            let t: TrailerLine = serde_json::from_str(self.line.trim_end())?;
            let digest = hex::encode(std::mem::take(&mut self.hasher).finalize());
            if t.end.count != self.count
                || self.count != self.header.n_snapshots
                || t.end.sha256 != digest
            {
                return Err(Error::Checksum);
            }
            self.line.clear();
            if self.input.read_line(&mut self.line)? != 0 {
                return Err(Error::Parse("data after shadow trailer".into()));
            }
            return Ok(None);
        }
        if !self.line.ends_with('\n') {
            return Err(Error::Checksum);
        }
        self.hasher.update(self.line.as_bytes());
        let s = parse_snapshot_line(self.line.trim_end(), &self.header)?;
        self.count += 1;
        Ok(Some(s))
    }
}

impl<R: BufRead> Iterator for ShadowReader<R> {
    type Item = Result<Snapshot>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_snapshot() {
            Ok(Some(s)) => Some(Ok(s)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

pub fn write_shadow(set: &ShadowSet, path: impl AsRef<Path>) -> Result<()> {
    let mut w = ShadowWriter::create(path, set.header().clone())?;
    for s in set.iter() {
        w.write(&s)?;
    }
    w.finish()?;
    Ok(())
}

pub fn read_shadow(path: impl AsRef<Path>) -> Result<ShadowSet> {
    read_shadow_from(ShadowReader::open(path)?)
}

pub fn read_shadow_from<R: BufRead>(reader: ShadowReader<R>) -> Result<ShadowSet> {
    let mut set = ShadowSet::new(reader.header().clone());
    for s in reader {
        set.push(&s?)?;
    }
    Ok(set)
}
