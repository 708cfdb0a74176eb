//! File formats: complex JSON, OFF meshes, direction CSV.
//!
//! The complex JSON schema is
//!
//! ```text
//! {"vertices": [id, ...],
//!  "simplices": [[id, ...], ...],
//!  "embeddings": {"name": [[x, y, ...], ...]},
//!  "phi": {"name": [value, ...]}}
//! ```
//!
//! Embedding rows and phi values are listed in `vertices` order. External
//! vertex ids are remapped to `0..n` in that order; [`LoadedComplex::labels`]
//! keeps the original ids.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};

use crate::complex::{AbstractComplex, Embedding};
use crate::ect::DirectionSample;
use crate::error::{Error, Result};
use crate::filtration::{Direction, VertexFunction};

/// Writes non-finite floats as the strings `"inf"`, `"-inf"` or `"nan"`.
pub fn serialize_extended<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// A complex with its named embeddings and vertex functions.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedComplex {
    pub complex: AbstractComplex,
    /// External id of internal vertex `i`.
    pub labels: Vec<u64>,
    pub embeddings: BTreeMap<String, Embedding>,
    pub phis: BTreeMap<String, VertexFunction>,
}

impl LoadedComplex {
    pub fn embedding(&self, name: &str) -> Result<&Embedding> {
        self.embeddings
            .get(name)
            .ok_or_else(|| Error::EmbeddingNotFound(name.to_string()))
    }

    pub fn phi(&self, name: &str) -> Result<&VertexFunction> {
        self.phis
            .get(name)
            .ok_or_else(|| Error::PhiNotFound(name.to_string()))
    }

    /// Serialises to the complex JSON schema. Every simplex of positive
    /// dimension is listed, so the output is face-closed.
    pub fn to_json(&self) -> Result<String> {
        let label = |v: usize| self.labels[v];
        let raw = ComplexJson {
            vertices: self.labels.clone(),
            simplices: self
                .complex
                .simplices()
                .iter()
                .filter(|s| s.dim() > 0)
                .map(|s| s.iter().map(|&v| label(v)).collect())
                .collect(),
            embeddings: self
                .embeddings
                .iter()
                .map(|(k, e)| (k.clone(), e.iter().map(|(_, p)| p.to_vec()).collect()))
                .collect(),
            phi: self
                .phis
                .iter()
                .map(|(k, p)| (k.clone(), p.iter().map(|(_, x)| x).collect()))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ComplexJson = serde_json::from_str(text)?;
        raw.into_loaded()
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    #[serde(default)]
    vertices: Vec<u64>,
    #[serde(default)]
    simplices: Vec<Vec<u64>>,
    #[serde(default)]
    embeddings: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default)]
    phi: BTreeMap<String, Vec<f64>>,
}

impl ComplexJson {
    fn into_loaded(self) -> Result<LoadedComplex> {
        let mut labels = self.vertices;
        if labels.is_empty() {
            labels = self.simplices.iter().flatten().copied().collect();
            labels.sort_unstable();
            labels.dedup();
        }
        let mut remap = HashMap::with_capacity(labels.len());
        for (i, &id) in labels.iter().enumerate() {
            if remap.insert(id, i).is_some() {
                return Err(Error::parse(
                    "vertices",
                    format!("vertex {id} listed twice"),
                ));
            }
        }
        let mut simplices: Vec<Vec<usize>> =
            Vec::with_capacity(labels.len() + self.simplices.len());
        simplices.extend((0..labels.len()).map(|i| vec![i]));
        for (i, s) in self.simplices.iter().enumerate() {
            let mapped = s
                .iter()
                .map(|id| {
                    remap.get(id).copied().ok_or_else(|| {
                        Error::parse(format!("simplices[{i}]"), format!("unknown vertex {id}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if mapped.is_empty() {
                return Err(Error::parse(format!("simplices[{i}]"), "empty simplex"));
            }
            simplices.push(mapped);
        }
        if labels.is_empty() {
            return Err(Error::EmptyComplex);
        }
        let complex = AbstractComplex::new(simplices.clone()).map_err(|e| match e {
            Error::RepeatedVertex(_) => Error::parse("simplices", e.to_string()),
            other => other,
        })?;
        let mut distinct = simplices;
        for s in &mut distinct {
            s.sort_unstable();
        }
        distinct.sort();
        distinct.dedup();
        if distinct.len() < complex.len() {
            log::warn!(
                "input lists {} of {} simplices; missing faces were added",
                distinct.len(),
                complex.len()
            );
        }

        let n = labels.len();
        let mut embeddings = BTreeMap::new();
        for (name, rows) in self.embeddings {
            if rows.len() != n {
                return Err(Error::parse(
                    format!("embeddings.{name}"),
                    format!("expected {n} rows, found {}", rows.len()),
                ));
            }
            let dim = rows[0].len();
            if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
                return Err(Error::parse(
                    format!("embeddings.{name}[{i}]"),
                    format!("expected {dim} coordinates, found {}", r.len()),
                ));
            }
            let e = Embedding::from_rows(dim, rows)
                .map_err(|e| Error::parse(format!("embeddings.{name}"), e.to_string()))?;
            embeddings.insert(name, e);
        }
        let mut phis = BTreeMap::new();
        for (name, values) in self.phi {
            if values.len() != n {
                return Err(Error::parse(
                    format!("phi.{name}"),
                    format!("expected {n} values, found {}", values.len()),
                ));
            }
            let p = VertexFunction::from_values(values).map_err(|e| {
                let at = match &e {
                    Error::NonPositivePhi { vertex, .. } => format!("phi.{name}[{vertex}]"),
                    _ => format!("phi.{name}"),
                };
                Error::parse(at, e.to_string())
            })?;
            phis.insert(name, p);
        }
        Ok(LoadedComplex {
            complex,
            labels,
            embeddings,
            phis,
        })
    }
}

/// Parses an OFF mesh. Faces must be triangles; the coordinates become an
/// embedding named `"off"`.
pub fn parse_off(text: &str) -> Result<LoadedComplex> {
    let mut tokens = text.lines().enumerate().flat_map(|(i, line)| {
        let content = line.split('#').next().unwrap_or("");
        content.split_whitespace().map(move |t| (i + 1, t))
    });
    match tokens.next() {
        Some((_, "OFF")) => {}
        Some((line, t)) => {
            return Err(Error::parse(
                format!("line {line}"),
                format!("expected OFF header, found {t:?}"),
            ))
        }
        None => return Err(Error::parse("line 1", "empty file")),
    }
    let mut next_num = |what: &str| -> Result<(usize, String)> {
        tokens
            .next()
            .map(|(l, t)| (l, t.to_string()))
            .ok_or_else(|| Error::parse("OFF", format!("unexpected end of file reading {what}")))
    };
    fn int(tok: (usize, String), what: &str) -> Result<usize> {
        tok.1
            .parse()
            .map_err(|_| Error::parse(format!("line {}", tok.0), format!("bad {what} {:?}", tok.1)))
    }
    fn real(tok: (usize, String)) -> Result<f64> {
        tok.1.parse().map_err(|_| {
            Error::parse(
                format!("line {}", tok.0),
                format!("bad coordinate {:?}", tok.1),
            )
        })
    }
    let nv = int(next_num("vertex count")?, "vertex count")?;
    let nf = int(next_num("face count")?, "face count")?;
    let _ne = int(next_num("edge count")?, "edge count")?;
    if nv == 0 {
        return Err(Error::EmptyComplex);
    }
    let mut rows = Vec::with_capacity(nv);
    for _ in 0..nv {
        let x = real(next_num("vertex")?)?;
        let y = real(next_num("vertex")?)?;
        let z = real(next_num("vertex")?)?;
        rows.push(vec![x, y, z]);
    }
    let mut simplices: Vec<Vec<usize>> = (0..nv).map(|i| vec![i]).collect();
    for _ in 0..nf {
        let tok = next_num("face")?;
        let line = tok.0;
        let k = int(tok, "face size")?;
        if k != 3 {
            return Err(Error::parse(
                format!("line {line}"),
                format!("only triangular faces are supported, found {k}-gon"),
            ));
        }
        let mut face = Vec::with_capacity(3);
        for _ in 0..3 {
            let tok = next_num("face index")?;
            let l = tok.0;
            let v = int(tok, "face index")?;
            if v >= nv {
                return Err(Error::parse(
                    format!("line {l}"),
                    format!("vertex index {v} out of range"),
                ));
            }
            face.push(v);
        }
        simplices.push(face);
    }
    let complex = AbstractComplex::new(simplices)?;
    let mut embeddings = BTreeMap::new();
    embeddings.insert("off".to_string(), Embedding::from_rows(3, rows)?);
    Ok(LoadedComplex {
        complex,
        labels: (0..nv as u64).collect(),
        embeddings,
        phis: BTreeMap::new(),
    })
}

/// Loads a complex JSON or OFF file. OFF is detected by extension or by
/// an `OFF` first token.
pub fn load_complex_file(path: impl AsRef<Path>) -> Result<LoadedComplex> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let is_off = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("off"))
        || text.trim_start().starts_with("OFF");
    if is_off {
        parse_off(&text)
    } else {
        LoadedComplex::from_json(&text)
    }
}

pub fn save_complex_file(path: impl AsRef<Path>, loaded: &LoadedComplex) -> Result<()> {
    fs::write(path, loaded.to_json()?)?;
    Ok(())
}

/// One direction per CSV row. Rows are renormalised; rows whose norm is
/// not within `1e-6` of one are rejected.
pub fn parse_directions_csv(text: &str) -> Result<Vec<Direction>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let v = rec
            .iter()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::parse(format!("directions line {line}"), "not a number"))?;
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-6 {
            return Err(Error::parse(
                format!("directions line {line}"),
                format!("not a unit vector (norm {n})"),
            ));
        }
        out.push(Direction::normalized(v)?);
    }
    if out.is_empty() {
        return Err(Error::parse("directions", "no rows"));
    }
    if out.iter().any(|d| d.dim() != out[0].dim()) {
        return Err(Error::parse("directions", "rows have different lengths"));
    }
    Ok(out)
}

/// Per-direction integrands as CSV: one column per coordinate, then
/// `weight,integrand`. Infinite integrands are written as `inf`.
pub fn write_samples_csv<W: std::io::Write>(w: W, samples: &[DirectionSample]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let dim = samples.first().map_or(0, |s| s.direction.len());
    let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    header.extend(["weight".to_string(), "integrand".to_string()]);
    out.write_record(&header)?;
    for s in samples {
        let mut row: Vec<String> = s.direction.iter().map(|x| x.to_string()).collect();
        row.push(s.weight.to_string());
        row.push(if s.integrand.is_finite() {
            s.integrand.to_string()
        } else {
            "inf".to_string()
        });
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_directions_csv(path: impl AsRef<Path>) -> Result<Vec<Direction>> {
    parse_directions_csv(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json() {
        let l = LoadedComplex::from_json(r#"{"vertices": [0]}"#).unwrap();
        assert_eq!(l.complex.len(), 1);
        let l = LoadedComplex::from_json(r#"{"simplices": [[4]]}"#).unwrap();
        assert_eq!(l.labels, vec![4]);
        assert!(matches!(
            LoadedComplex::from_json(r#"{}"#),
            Err(Error::EmptyComplex)
        ));
    }

    #[test]
    fn full_json_with_remap() {
        let text = r#"{
            "vertices": [10, 20, 30, 40],
            "simplices": [[10, 20, 30], [40]],
            "embeddings": {"f": [[0,0],[1,0],[0,1],[5,5]], "g": [[0,0],[1,0.1],[0,1],[5,5]]},
            "phi": {"w": [1, 2, 3, 4]}
        }"#;
        let l = LoadedComplex::from_json(text).unwrap();
        assert_eq!(l.complex.vertices(), &[0, 1, 2, 3]);
        assert!(l.complex.contains(&[0, 1, 2]));
        assert_eq!(l.complex.euler_characteristic(), 2);
        assert_eq!(l.embedding("g").unwrap().point(1), Some(&[1.0, 0.1][..]));
        assert_eq!(l.phi("w").unwrap().get(3), Some(4.0));
        assert!(matches!(l.embedding("h"), Err(Error::EmbeddingNotFound(_))));
        assert_eq!(
            l.embedding("h").unwrap_err().to_string(),
            "embedding not found: h"
        );
        let again = LoadedComplex::from_json(&l.to_json().unwrap()).unwrap();
        assert_eq!(again, l);
    }

    #[test]
    fn json_diagnostics() {
        let e = LoadedComplex::from_json(r#"{"vertices":[0,1],"simplices":[[0,2]]}"#).unwrap_err();
        assert_eq!(e.to_string(), "simplices[0]: unknown vertex 2");
        let e = LoadedComplex::from_json(r#"{"vertices":[0,1],"embeddings":{"f":[[0,0],[1]]}}"#)
            .unwrap_err();
        assert_eq!(
            e.to_string(),
            "embeddings.f[1]: expected 2 coordinates, found 1"
        );
        let e = LoadedComplex::from_json(r#"{"vertices":[0,1],"phi":{"w":[1]}}"#).unwrap_err();
        assert!(e.to_string().starts_with("phi.w"));
        let e = LoadedComplex::from_json(r#"{"vertices":[0,1],"phi":{"w":[1, -1]}}"#).unwrap_err();
        assert!(e.to_string().starts_with("phi.w[1]"), "{e}");
        let e = LoadedComplex::from_json("{\"vertices\": [0,\n 1,,]}").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn cube_off() {
        let text = "OFF\n# cube\n8 12 0\n\
            0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n\
            3 0 1 2\n3 0 2 3\n3 4 5 6\n3 4 6 7\n3 0 1 5\n3 0 5 4\n\
            3 1 2 6\n3 1 6 5\n3 2 3 7\n3 2 7 6\n3 3 0 4\n3 3 4 7\n";
        let l = parse_off(text).unwrap();
        assert_eq!(l.complex.f_vector(), vec![8, 18, 12]);
        assert_eq!(l.complex.euler_characteristic(), 2);
        assert_eq!(l.embedding("off").unwrap().dim(), 3);
    }

    #[test]
    fn off_errors() {
        assert!(parse_off("PLY\n").is_err());
        let quad = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        let e = parse_off(quad).unwrap_err();
        assert!(e.to_string().contains("line 7"), "{e}");
        let bad = "OFF\n3 1 0\n0 0 0\n1 0 0\n1 1 0\n3 0 1 7\n";
        assert!(parse_off(bad).is_err());
        assert!(parse_off("OFF\n3 1 0\n0 0 0\n").is_err());
    }

    #[test]
    fn directions_csv() {
        let d = parse_directions_csv("1,0\n0, 1\n# comment\n-0.6,0.8\n").unwrap();
        assert_eq!(d.len(), 3);
        assert!(parse_directions_csv("1,1\n").is_err());
        assert!(parse_directions_csv("1,0\n0,0,1\n").is_err());
        assert!(parse_directions_csv("").is_err());
    }

    #[test]
    fn samples_csv() {
        let samples = vec![
            DirectionSample {
                direction: vec![1.0, 0.0],
                weight: 0.5,
                integrand: 2.0,
            },
            DirectionSample {
                direction: vec![0.0, 1.0],
                weight: 0.5,
                integrand: f64::INFINITY,
            },
        ];
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &samples).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x0,x1,weight,integrand\n1,0,0.5,2\n0,1,0.5,inf\n"
        );
    }

    #[test]
    fn extended_floats() {
        #[derive(Serialize)]
        struct W(#[serde(serialize_with = "serialize_extended")] f64);
        assert_eq!(serde_json::to_string(&W(f64::INFINITY)).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&W(1.5)).unwrap(), "1.5");
    }
}
