//! File formats: sequence JSON, trajectory CSV and shortest round-trip floats.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use comb_nls::dynamics::{System, Trajectory};
use comb_nls::{Sequence, C64};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed sequence JSON in {path}: {msg}")]
    Malformed { path: PathBuf, msg: String },
    #[error("non-finite value in {path} at entry {index}")]
    NonFinite { path: PathBuf, index: usize },
    #[error("support [{lo}, {hi}] of {path} exceeds |k| <= {k_max}")]
    SupportOverflow {
        path: PathBuf,
        lo: i64,
        hi: i64,
        k_max: i64,
    },
    #[error("index range of {path} overflows 64-bit integers")]
    IndexOverflow { path: PathBuf },
    #[error("malformed trajectory CSV {path}: {msg}")]
    Trajectory { path: PathBuf, msg: String },
}

/// On-disk form of a finitely supported sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub offset: i64,
    pub values: Vec<[f64; 2]>,
}

impl SequenceFile {
    pub fn from_sequence(s: &Sequence) -> Self {
        Self {
            offset: s.offset(),
            values: s.values().iter().map(|v| [v.re, v.im]).collect(),
        }
    }
}

fn read_text(path: &Path) -> Result<String, InputError> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|source| InputError::Io {
            path: path.to_owned(),
            source,
        })?;
    Ok(s)
}

/// Token scan for literals JSON cannot carry but users write anyway.
fn mentions_non_finite(text: &str) -> bool {
    ["NaN", "nan", "Infinity", "inf"]
        .iter()
        .any(|t| text.contains(t))
}

/// Parses a sequence file from text; `k_max` bounds the support when given.
pub fn parse_sequence_str(
    text: &str,
    path: &Path,
    k_max: Option<i64>,
) -> Result<Sequence, InputError> {
    let file: SequenceFile = match serde_json::from_str(text) {
        Ok(f) => f,
        Err(e) => {
            if mentions_non_finite(text) {
                return Err(InputError::NonFinite {
                    path: path.to_owned(),
                    index: 0,
                });
            }
            return Err(InputError::Malformed {
                path: path.to_owned(),
                msg: e.to_string(),
            });
        }
    };
    if let Some(index) = file
        .values
        .iter()
        .position(|v| !v[0].is_finite() || !v[1].is_finite())
    {
        return Err(InputError::NonFinite {
            path: path.to_owned(),
            index,
        });
    }
    if file.offset.checked_add(file.values.len() as i64).is_none() {
        return Err(InputError::IndexOverflow {
            path: path.to_owned(),
        });
    }
    let seq = Sequence::new(
        file.offset,
        file.values.iter().map(|v| C64::new(v[0], v[1])).collect(),
    );
    if let (Some(k), Some((lo, hi))) = (k_max, seq.support()) {
        if lo < -k || hi > k {
            return Err(InputError::SupportOverflow {
                path: path.to_owned(),
                lo,
                hi,
                k_max: k,
            });
        }
    }
    Ok(seq)
}

/// Reads a sequence JSON file.
pub fn parse_sequence(path: &Path, k_max: Option<i64>) -> Result<Sequence, InputError> {
    parse_sequence_str(&read_text(path)?, path, k_max)
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        ryu::Buffer::new().format_finite(x).to_owned()
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Output destination: a file or standard output.
pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub fn csv_writer(path: Option<&Path>) -> io::Result<csv::Writer<Box<dyn Write>>> {
    Ok(csv::WriterBuilder::new().from_writer(sink(path)?))
}

/// Writes `t,k,re,im`, times ascending then `k` ascending.
pub fn write_trajectory<W: Write>(
    w: &mut csv::Writer<W>,
    times: &[f64],
    states: &[Sequence],
) -> csv::Result<()> {
    w.write_record(["t", "k", "re", "im"])?;
    for (t, s) in times.iter().zip(states) {
        let ts = fmt_f64(*t);
        for (i, v) in s.values().iter().enumerate() {
            let k = s.offset() + i as i64;
            w.write_record([ts.as_str(), &k.to_string(), &fmt_f64(v.re), &fmt_f64(v.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a `t,k,re,im` trajectory; every time must list the same modes.
pub fn read_trajectory(
    path: &Path,
    system: System,
    reference_mass: Option<f64>,
) -> Result<Trajectory<f64>, InputError> {
    let bad = |msg: String| InputError::Trajectory {
        path: path.to_owned(),
        msg,
    };
    let text = read_text(path)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "k", "re", "im"] {
        return Err(bad(format!(
            "expected header t,k,re,im, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut times: Vec<f64> = Vec::new();
    let mut rows: Vec<Vec<(i64, C64)>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64, InputError> {
            let v: f64 = rec[i]
                .trim()
                .parse()
                .map_err(|_| bad(format!("row {}: bad number {:?}", line + 2, &rec[i])))?;
            if !v.is_finite() {
                return Err(InputError::NonFinite {
                    path: path.to_owned(),
                    index: line,
                });
            }
            Ok(v)
        };
        let t = num(0)?;
        let k: i64 = rec[1]
            .trim()
            .parse()
            .map_err(|_| bad(format!("row {}: bad mode index", line + 2)))?;
        let v = C64::new(num(2)?, num(3)?);
        if times.last() != Some(&t) {
            times.push(t);
            rows.push(Vec::new());
        }
        rows.last_mut().unwrap().push((k, v));
    }
    if rows.is_empty() {
        return Err(bad("no rows".into()));
    }
    let mut states = Vec::with_capacity(rows.len());
    for r in &rows {
        let offset = r[0].0;
        if r.iter()
            .enumerate()
            .any(|(i, (k, _))| *k != offset + i as i64)
            || r.len() != rows[0].len()
            || offset != rows[0][0].0
        {
            return Err(bad(
                "every time must list the same contiguous ascending modes".into(),
            ));
        }
        states.push(Sequence::new(offset, r.iter().map(|x| x.1).collect()));
    }
    let mass = reference_mass.unwrap_or_else(|| states[0].mass());
    Trajectory::new(times, states, system, mass).map_err(|e| bad(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> PathBuf {
        PathBuf::from("mem.json")
    }

    #[test]
    fn sequence_examples() {
        let s = parse_sequence_str(r#"{"offset":0,"values":[[1,0]]}"#, &p(), None).unwrap();
        assert_eq!(s, Sequence::delta(0, C64::new(1.0, 0.0)));
        let s = parse_sequence_str(
            r#"{"offset":-1,"values":[[0,0],[0.5,0],[0,0]]}"#,
            &p(),
            Some(0),
        )
        .unwrap();
        assert_eq!(s.support(), Some((0, 0)));
        assert_eq!(s.get(0), C64::new(0.5, 0.0));
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(
            parse_sequence_str(r#"{"offset":0,"values":[[NaN,0]]}"#, &p(), None),
            Err(InputError::NonFinite { .. })
        ));
        assert!(matches!(
            parse_sequence_str(r#"{"offset":0,"values":[[1,0]"#, &p(), None),
            Err(InputError::Malformed { .. })
        ));
        assert!(matches!(
            parse_sequence_str(r#"{"offset":3,"values":[[1,0]]}"#, &p(), Some(2)),
            Err(InputError::SupportOverflow {
                lo: 3,
                hi: 3,
                k_max: 2,
                ..
            })
        ));
        assert!(matches!(
            parse_sequence_str(
                r#"{"offset":9223372036854775807,"values":[[1,0]]}"#,
                &p(),
                None
            ),
            Err(InputError::IndexOverflow { .. })
        ));
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e16, std::f64::consts::PI] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        let s = Sequence::new(-1, vec![C64::new(0.1, 1.0 / 3.0), C64::new(-7e-12, 2.0)]);
        let text = serde_json::to_string(&SequenceFile::from_sequence(&s)).unwrap();
        assert_eq!(parse_sequence_str(&text, &p(), None).unwrap(), s);
    }
}
