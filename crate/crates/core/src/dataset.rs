//   Copyright 2026 robustlp developers
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.

//! Labeled datasets in CSV (`label, x_0, ..., x_{n-1}` per row) or IDX
//! (MNIST-style image/label file pair) form.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Domain;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub x: Vec<f64>,
    pub label: usize,
}

impl LabeledPoint {
    pub fn new(x: Vec<f64>, label: usize) -> Self {
        LabeledPoint { x, label }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetFormat {
    Csv,
    /// IDX image file; the labels live in a companion IDX file.
    Idx {
        labels: PathBuf,
    },
}

/// Shape and range expectations a dataset is checked against.
#[derive(Debug, Clone, Copy)]
pub struct DatasetSpec {
    pub input_dim: usize,
    pub num_labels: usize,
    pub domain: Option<Domain>,
}

pub fn load_dataset(
    path: impl AsRef<Path>,
    format: &DatasetFormat,
    spec: DatasetSpec,
) -> Result<Vec<LabeledPoint>> {
    match format {
        DatasetFormat::Csv => load_csv(path, spec),
        DatasetFormat::Idx { labels } => load_idx(path, labels, spec),
    }
}

pub fn load_csv(path: impl AsRef<Path>, spec: DatasetSpec) -> Result<Vec<LabeledPoint>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path, spec)
}

pub(crate) fn parse_csv(text: &str, path: &Path, spec: DatasetSpec) -> Result<Vec<LabeledPoint>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Dataset {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fail = |reason: String| Error::Dataset {
            path: path.to_path_buf(),
            line,
            reason,
        };
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != spec.input_dim + 1 {
            return Err(fail(format!(
                "expected a label and {} features, found {} fields",
                spec.input_dim,
                record.len()
            )));
        }
        let label: usize = record[0]
            .parse()
            .map_err(|_| fail(format!("invalid label {:?}", &record[0])))?;
        if label >= spec.num_labels {
            return Err(fail(format!(
                "label {label} out of range for {} labels",
                spec.num_labels
            )));
        }
        let x = record
            .iter()
            .skip(1)
            .map(|f| {
                let v: f64 = f
                    .parse()
                    .map_err(|_| fail(format!("invalid number {f:?}")))?;
                if !v.is_finite() {
                    return Err(fail(format!("non-finite feature {f:?}")));
                }
                if let Some(d) = spec.domain {
                    if !d.contains(v) {
                        return Err(fail(format!(
                            "feature {v} outside input domain [{}, {}]",
                            d.lo, d.hi
                        )));
                    }
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        points.push(LabeledPoint { x, label });
    }
    Ok(points)
}

pub fn save_csv(points: &[LabeledPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for p in points {
        write!(out, "{}", p.label).expect("write to Vec");
        for v in &p.x {
            write!(out, ",{v}").expect("write to Vec");
        }
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn read_u32_be(bytes: &[u8], offset: usize) -> Option<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

/// Reads an IDX image/label pair. Pixel bytes `0..=255` are mapped affinely
/// onto the declared input domain, or kept as raw values when there is none.
pub fn load_idx(
    images: impl AsRef<Path>,
    labels: impl AsRef<Path>,
    spec: DatasetSpec,
) -> Result<Vec<LabeledPoint>> {
    let (ipath, lpath) = (images.as_ref(), labels.as_ref());
    let ibytes = fs::read(ipath).map_err(|e| Error::io(ipath, e))?;
    let lbytes = fs::read(lpath).map_err(|e| Error::io(lpath, e))?;
    let ierr = |reason: String| Error::Idx {
        path: ipath.to_path_buf(),
        reason,
    };
    let lerr = |reason: String| Error::Idx {
        path: lpath.to_path_buf(),
        reason,
    };

    let header = |b: &[u8], i: usize| read_u32_be(b, 4 * i);
    match header(&ibytes, 0) {
        Some(IDX_IMAGES_MAGIC) => {}
        m => return Err(ierr(format!("bad image magic {m:#010x?}"))),
    }
    match header(&lbytes, 0) {
        Some(IDX_LABELS_MAGIC) => {}
        m => return Err(lerr(format!("bad label magic {m:#010x?}"))),
    }
    let (count, rows, cols) = match (header(&ibytes, 1), header(&ibytes, 2), header(&ibytes, 3)) {
        (Some(c), Some(r), Some(w)) => (c as usize, r as usize, w as usize),
        _ => return Err(ierr("truncated header".into())),
    };
    let label_count = header(&lbytes, 1).ok_or_else(|| lerr("truncated header".into()))? as usize;
    if label_count != count {
        return Err(lerr(format!("{label_count} labels for {count} images")));
    }
    let dim = rows * cols;
    if dim != spec.input_dim {
        return Err(ierr(format!(
            "images are {rows}x{cols} = {dim} pixels, model expects {}",
            spec.input_dim
        )));
    }
    let pixels = ibytes
        .get(16..16 + count * dim)
        .ok_or_else(|| ierr("truncated pixel data".into()))?;
    let label_bytes = lbytes
        .get(8..8 + count)
        .ok_or_else(|| lerr("truncated label data".into()))?;

    let scale = |p: u8| match spec.domain {
        Some(d) => d.lo + (d.hi - d.lo) * f64::from(p) / 255.0,
        None => f64::from(p),
    };
    label_bytes
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let label = l as usize;
            if label >= spec.num_labels {
                return Err(Error::LabelOutOfRange {
                    label,
                    num_labels: spec.num_labels,
                });
            }
            let x = pixels[i * dim..(i + 1) * dim]
                .iter()
                .map(|&p| scale(p))
                .collect();
            Ok(LabeledPoint { x, label })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, l: usize) -> DatasetSpec {
        DatasetSpec {
            input_dim: n,
            num_labels: l,
            domain: None,
        }
    }

    #[test]
    fn parses_simple_row() {
        let pts = parse_csv("1, 0.5, -0.5\n", Path::new("t.csv"), spec(2, 3)).unwrap();
        assert_eq!(pts, vec![LabeledPoint::new(vec![0.5, -0.5], 1)]);
    }

    #[test]
    fn label_out_of_range() {
        let err = parse_csv("0,1,2\n7, 1, 2\n", Path::new("t.csv"), spec(2, 3)).unwrap_err();
        match err {
            Error::Dataset { line: 2, .. } => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn row_length_mismatch() {
        assert!(parse_csv("0,1\n", Path::new("t.csv"), spec(2, 3)).is_err());
    }

    #[test]
    fn domain_is_enforced() {
        let s = DatasetSpec {
            domain: Some(Domain::new(0.0, 1.0).unwrap()),
            ..spec(1, 2)
        };
        assert!(parse_csv("0,1.5\n", Path::new("t.csv"), s).is_err());
        assert!(parse_csv("0,0.5\n", Path::new("t.csv"), s).is_ok());
    }
}
