//! JSON code files: row-major `n x d x r` arrays of `[re, im]` pairs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use serde_json::Value;
use stiefel_core::{Complex, Error, FieldTag, Matrix, Result, StiefelCode};

pub const SCHEMA_VERSION: u32 = 1;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_number(x: f64) -> Result<Box<RawValue>> {
    if !x.is_finite() {
        return Err(Error::Malformed(format!("cannot serialize non-finite value {x}")));
    }
    RawValue::from_string(format!("{x:.16e}")).map_err(|e| Error::Malformed(e.to_string()))
}

#[derive(Serialize)]
struct CodeFileOut<'a> {
    schema_version: u32,
    field: FieldTag,
    d: usize,
    r: usize,
    n: usize,
    matrices: Vec<Vec<Vec<[Box<RawValue>; 2]>>>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    metadata: &'a BTreeMap<String, Value>,
}

#[derive(Deserialize)]
struct CodeFileIn {
    schema_version: u32,
    field: String,
    d: usize,
    r: usize,
    n: usize,
    matrices: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    metadata: BTreeMap<String, Value>,
}

/// A code together with free-form metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeFile {
    pub code: StiefelCode<f64>,
    pub metadata: BTreeMap<String, Value>,
}

impl CodeFile {
    pub fn new(code: StiefelCode<f64>) -> Self {
        CodeFile {
            code,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let code = &self.code;
        let matrices = code
            .matrices()
            .map(|m| {
                (0..m.rows())
                    .map(|i| {
                        (0..m.cols())
                            .map(|j| {
                                let z = m.get(i, j);
                                Ok([format_number(z.re)?, format_number(z.im)?])
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let out = CodeFileOut {
            schema_version: SCHEMA_VERSION,
            field: code.field(),
            d: code.d(),
            r: code.r(),
            n: code.n(),
            matrices,
            metadata: &self.metadata,
        };
        let mut text = serde_json::to_string(&out).map_err(|e| Error::Malformed(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    /// Structural parse. Points that are off the manifold are kept so the
    /// certifier can report them.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: CodeFileIn = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(Error::Malformed(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                raw.schema_version
            )));
        }
        let field: FieldTag = raw.field.parse().map_err(|_| Error::Malformed(format!("field {:?}", raw.field)))?;
        if raw.matrices.len() != raw.n {
            return Err(Error::Malformed(format!("n = {} but {} matrices", raw.n, raw.matrices.len())));
        }
        let mats = raw
            .matrices
            .iter()
            .enumerate()
            .map(|(k, rows)| parse_matrix(k, rows, raw.d, raw.r, field))
            .collect::<Result<Vec<_>>>()?;
        let code = StiefelCode::from_matrices_unchecked(field, mats).map_err(|e| Error::Malformed(e.to_string()))?;
        Ok(CodeFile {
            code,
            metadata: raw.metadata,
        })
    }
}

fn parse_matrix(k: usize, rows: &[Vec<[f64; 2]>], d: usize, r: usize, field: FieldTag) -> Result<Matrix<f64>> {
    if rows.len() != d || rows.iter().any(|row| row.len() != r) {
        return Err(Error::Malformed(format!("matrix {k} is not {d}x{r}")));
    }
    let mut data = Vec::with_capacity(d * r);
    for (i, row) in rows.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Malformed(format!("matrix {k} entry ({i},{j}) is not finite")));
            }
            if field == FieldTag::R && im != 0.0 {
                return Err(Error::Malformed(format!(
                    "matrix {k} entry ({i},{j}) has imaginary part {im} in a real code"
                )));
            }
            data.push(Complex::new(re, im));
        }
    }
    Matrix::from_complex(d, r, data)
}

/// Hurwitz-Radon family file: a JSON array of `d x d` matrices of `[re, im]`
/// pairs, identity first.
pub fn parse_generators(text: &str) -> Result<Vec<Matrix<f64>>> {
    let raw: Vec<Vec<Vec<[f64; 2]>>> = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    raw.iter()
        .enumerate()
        .map(|(k, rows)| {
            let d = rows.len();
            parse_matrix(k, rows, d, d, FieldTag::C)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use stiefel_core::orthoplex_codes::soc_complex_orbit;
    use stiefel_core::simplex_codes::ssc_sphere;

    #[test]
    fn numbers_have_seventeen_digits() {
        let x = 0.1f64 + 0.2;
        let s = format_number(x).unwrap();
        let digits: String = s.get().split('e').next().unwrap().chars().filter(char::is_ascii_digit).collect();
        assert_eq!(digits.len(), 17);
        assert_eq!(s.get().parse::<f64>().unwrap(), x);
        assert!(format_number(f64::NAN).is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        for code in [
            soc_complex_orbit::<f64>(2, 2, 13).unwrap(),
            ssc_sphere::<f64>(FieldTag::R, 4, 5).unwrap(),
        ] {
            let file = CodeFile::new(code).with("provenance", "test");
            let back = CodeFile::parse(&file.to_json().unwrap()).unwrap();
            assert_eq!(back, file);
        }
    }

    #[test]
    fn structural_errors_are_malformed() {
        let good = CodeFile::new(ssc_sphere::<f64>(FieldTag::R, 2, 3).unwrap()).to_json().unwrap();
        let cases = [
            good.replacen("\"n\":3", "\"n\":4", 1),
            good.replacen("\"schema_version\":1", "\"schema_version\":2", 1),
            good.replacen("\"field\":\"R\"", "\"field\":\"Q\"", 1),
            good.replacen("0.0000000000000000e0]", "0.5]", 1),
            "not json".to_string(),
        ];
        for text in cases {
            assert!(matches!(CodeFile::parse(&text), Err(Error::Malformed(_))), "{text}");
        }
    }

    #[test]
    fn generator_files() {
        let text = "[[[[1,0],[0,0]],[[0,0],[1,0]]], [[[0,0],[-1,0]],[[1,0],[0,0]]]]";
        let gens = parse_generators(text).unwrap();
        assert_eq!(gens.len(), 2);
        assert_eq!(gens[1].get(0, 1), Complex::new(-1.0, 0.0));
        assert!(parse_generators("[[[[1,0]],[[0,0],[1,0]]]]").is_err());
    }
}
