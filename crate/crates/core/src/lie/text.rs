use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{ConeSample, InvolutionData, LieAlgebraData};
use crate::error::{Error, Result};
use crate::linalg;

/// An algebra with an involution and an optional cone, as loaded from text.
///
/// ```toml
/// name = "sl2"
/// labels = ["H", "E", "F"]
/// brackets = ["H E E 2", "H F F -2", "E F H 1"]   # [H, E] = 2 E, ...
/// involution = ["1 0 0", "0 -1 0", "0 0 -1"]
///
/// [cone]
/// generators = ["0 1 0", "0 0 1"]
/// witness = "0 1 1"
/// samples = ["0 0.5 0.25"]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct LieExample {
    pub name: String,
    pub algebra: LieAlgebraData,
    pub involution: InvolutionData,
    pub cone: Option<ConeSample>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExampleDoc {
    name: String,
    labels: Vec<String>,
    brackets: Vec<String>,
    involution: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cone: Option<ConeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeDoc {
    generators: Vec<String>,
    witness: String,
    #[serde(default)]
    samples: Vec<String>,
}

fn vector(line: &str, dim: usize) -> Result<DVector<f64>> {
    let v = linalg::parse_row(line)?;
    if v.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: v.len(),
        });
    }
    Ok(DVector::from_vec(v))
}

impl LieExample {
    pub fn from_text(text: &str) -> Result<Self> {
        let doc: ExampleDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let d = doc.labels.len();
        if d == 0 {
            return Err(Error::Parse("labels must be nonempty".into()));
        }
        let index = |label: &str| -> Result<usize> {
            doc.labels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| Error::Parse(format!("unknown basis label `{label}`")))
        };
        // Raw entries: each line sets c[i][j][k] only, so antisymmetry is
        // whatever the file says and validation can report it.
        let mut algebra = LieAlgebraData::new(doc.labels.clone(), vec![0.0; d * d * d])?;
        let mut seen = std::collections::HashSet::new();
        for line in &doc.brackets {
            let tok: Vec<&str> = line.split_whitespace().collect();
            let [a, b, c, val] = tok.as_slice() else {
                return Err(Error::Parse(format!("bracket `{line}` must read `A B C value`")));
            };
            let (i, j, k) = (index(a)?, index(b)?, index(c)?);
            let value: f64 = val.parse().map_err(|e| Error::Parse(format!("`{val}`: {e}")))?;
            algebra.set(i, j, k, value);
            if !seen.contains(&(j, i, k)) {
                algebra.set(j, i, k, -value);
            }
            seen.insert((i, j, k));
        }
        let tau = linalg::matrix_from_rows(&doc.involution)?;
        if tau.nrows() != d || tau.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                got: tau.nrows(),
            });
        }
        let cone = match doc.cone {
            None => None,
            Some(c) => Some(ConeSample {
                generators: c.generators.iter().map(|g| vector(g, d)).collect::<Result<_>>()?,
                interior_witness: vector(&c.witness, d)?,
                sampled_points: c.samples.iter().map(|g| vector(g, d)).collect::<Result<_>>()?,
            }),
        };
        Ok(Self {
            name: doc.name,
            algebra,
            involution: InvolutionData::new(tau),
            cone,
        })
    }

    pub fn to_text(&self) -> String {
        let d = self.algebra.dim();
        let labels = self.algebra.labels();
        let mut brackets = Vec::new();
        for i in 0..d {
            for j in (i + 1)..d {
                for k in 0..d {
                    let c = self.algebra.c(i, j, k);
                    if c != 0.0 {
                        brackets.push(format!("{} {} {} {}", labels[i], labels[j], labels[k], linalg::sci17(c)));
                    }
                }
            }
        }
        let row = |v: &DVector<f64>| linalg::row_text(v.iter().copied());
        let doc = ExampleDoc {
            name: self.name.clone(),
            labels: labels.to_vec(),
            brackets,
            involution: linalg::matrix_rows(&self.involution.matrix),
            cone: self.cone.as_ref().map(|c| ConeDoc {
                generators: c.generators.iter().map(row).collect(),
                witness: row(&c.interior_witness),
                samples: c.sampled_points.iter().map(row).collect(),
            }),
        };
        toml::to_string(&doc).expect("example document serializes")
    }
}
