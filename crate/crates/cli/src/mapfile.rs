//! Versioned JSON map definitions.

use std::collections::BTreeMap;
use std::path::Path;

use greenp2_core::{HomogPoly3, ProjMap};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

/// `[i, j, k, re, im]`: the coefficient `re + i im` of `z^i w^j t^k`.
pub type Monomial = (u32, u32, u32, f64, f64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub schema: u32,
    pub degree: usize,
    pub components: [Vec<Monomial>; 3],
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl MapFile {
    /// Nonzero coefficients of `f` in graded lexicographic order.
    pub fn from_map(f: &ProjMap, metadata: BTreeMap<String, serde_json::Value>) -> Self {
        let components = f.components().clone().map(|c| {
            c.terms()
                .map(|((i, j, k), v)| (i as u32, j as u32, k as u32, v.re, v.im))
                .collect()
        });
        MapFile { schema: SCHEMA, degree: f.degree(), components, metadata }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map files serialize")
    }

    /// Checks every monomial and validates the map.
    pub fn to_map(&self) -> Result<ProjMap, CliError> {
        if self.schema != SCHEMA {
            return Err(CliError::parse("schema", format!("unsupported schema {}, expected {SCHEMA}", self.schema)));
        }
        let d = self.degree;
        if d == 0 {
            return Err(CliError::parse("degree", "degree must be positive".into()));
        }
        let comps = self
            .components
            .iter()
            .enumerate()
            .map(|(c, terms)| {
                let mut seen = BTreeMap::new();
                for (n, &(i, j, k, re, im)) in terms.iter().enumerate() {
                    let field = format!("components[{c}][{n}]");
                    if (i + j + k) as usize != d {
                        return Err(CliError::parse(
                            &field,
                            format!("exponents ({i},{j},{k}) sum to {}, expected degree {d}", i + j + k),
                        ));
                    }
                    if !(re.is_finite() && im.is_finite()) {
                        return Err(CliError::parse(&field, "coefficient is not finite".into()));
                    }
                    if seen.insert((i, j, k), n).is_some() {
                        return Err(CliError::parse(&field, format!("monomial ({i},{j},{k}) appears twice")));
                    }
                }
                let terms = terms
                    .iter()
                    .map(|&(i, j, k, re, im)| ((i as usize, j as usize, k as usize), Complex64::new(re, im)));
                HomogPoly3::from_terms(d, terms).map_err(|e| CliError::parse(&format!("components[{c}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let comps: [HomogPoly3; 3] = comps.try_into().expect("three components");
        Ok(ProjMap::validate(comps)?)
    }
}

/// Parses map file text; serde errors keep their line and column.
pub fn parse_map_str(text: &str) -> Result<ProjMap, CliError> {
    let file: MapFile = serde_json::from_str(text).map_err(|e| CliError::Parse {
        field: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    file.to_map()
}

pub fn parse_map(path: &Path) -> Result<ProjMap, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_map_str(&text)
}
