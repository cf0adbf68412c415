//! JSON and CSV forms of discrete functions.
//!
//! Grid values are written ring by ring with ascending angle (pole first,
//! stored once), independent of the internal node ordering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::grid::{GridFunction2D, PolarGrid};
use super::radial::RadialFunction;
use crate::cones::Domain;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldFile {
    Radial {
        schema_version: u32,
        #[serde(rename = "R")]
        radius: f64,
        #[serde(rename = "N")]
        nodes: usize,
        values: Vec<f64>,
    },
    Grid {
        schema_version: u32,
        domain: Domain,
        nr: usize,
        ntheta: usize,
        values: Vec<f64>,
    },
}

impl FieldFile {
    pub fn radial(w: &RadialFunction) -> Self {
        FieldFile::Radial {
            schema_version: SCHEMA_VERSION,
            radius: w.radius(),
            nodes: w.len(),
            values: w.values().to_vec(),
        }
    }

    pub fn grid(u: &GridFunction2D) -> Self {
        let g = u.grid();
        let mut values = vec![u.values()[0]];
        for i in 1..g.nr() {
            for j in 0..g.ntheta() {
                values.push(u.values()[g.index(i, j)]);
            }
        }
        FieldFile::Grid { schema_version: SCHEMA_VERSION, domain: g.domain(), nr: g.nr(), ntheta: g.ntheta(), values }
    }

    /// Parses and validates shape and schema version.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: FieldFile = serde_json::from_str(text)?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn validate(&self) -> Result<()> {
        let (version, expected, got) = match self {
            FieldFile::Radial { schema_version, nodes, values, .. } => (*schema_version, *nodes, values.len()),
            FieldFile::Grid { schema_version, nr, ntheta, values, .. } => {
                (*schema_version, 1 + nr.saturating_sub(1) * ntheta, values.len())
            }
        };
        if version != SCHEMA_VERSION {
            return Err(Error::Format(format!("unsupported schema_version {version}")));
        }
        if expected != got {
            return Err(Error::Format(format!("shape mismatch: header implies {expected} values, found {got}")));
        }
        Ok(())
    }

    pub fn to_radial(&self) -> Result<RadialFunction> {
        match self {
            FieldFile::Radial { radius, values, .. } => RadialFunction::new(*radius, values.clone()),
            FieldFile::Grid { .. } => Err(Error::Format("expected a radial profile, found a grid".into())),
        }
    }

    pub fn to_grid(&self) -> Result<GridFunction2D> {
        match self {
            FieldFile::Grid { domain, nr, ntheta, values, .. } => {
                let g = PolarGrid::new(*domain, *nr, *ntheta)?;
                let mut v = vec![0.0; g.node_count()];
                v[0] = values[0];
                let mut it = values[1..].iter();
                for i in 1..*nr {
                    for j in 0..*ntheta {
                        v[g.index(i, j)] = *it.next().expect("length validated");
                    }
                }
                GridFunction2D::new(&g, v)
            }
            FieldFile::Radial { .. } => Err(Error::Format("expected a grid function, found a radial profile".into())),
        }
    }

    /// `r,w` rows for profiles; long-format `r,theta,value` rows for grids,
    /// where `r` is the physical radius on discs and `a * rho` on ellipses.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        match self {
            FieldFile::Radial { radius, nodes, values, .. } => {
                s.push_str("r,w\n");
                let h = radius / (*nodes - 1) as f64;
                for (i, v) in values.iter().enumerate() {
                    let _ = writeln!(s, "{},{}", i as f64 * h, v);
                }
            }
            FieldFile::Grid { domain, nr, ntheta, values, .. } => {
                s.push_str("r,theta,value\n");
                let a = domain.polar_axes().map(|(a, _)| a).unwrap_or(1.0);
                let _ = writeln!(s, "0,0,{}", values[0]);
                let dt = 2.0 * std::f64::consts::PI / *ntheta as f64;
                let dr = a / (*nr - 1) as f64;
                for i in 1..*nr {
                    for j in 0..*ntheta {
                        let _ = writeln!(s, "{},{},{}", i as f64 * dr, j as f64 * dt, values[1 + (i - 1) * ntheta + j]);
                    }
                }
            }
        }
        s
    }
}

/// Reads a two-column `r,w` CSV into a profile on `[0, last r]`.
pub fn radial_from_csv(text: &str) -> Result<RadialFunction> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header.trim() != "r,w" {
        return Err(Error::Format(format!("expected header r,w, found {header:?}")));
    }
    let mut rs = Vec::new();
    let mut ws = Vec::new();
    for (k, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let mut cols = line.split(',');
        let parse = |c: Option<&str>| -> Result<f64> {
            c.and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| Error::Format(format!("bad row {}: {line:?}", k + 2)))
        };
        rs.push(parse(cols.next())?);
        ws.push(parse(cols.next())?);
    }
    let radius = *rs.last().ok_or_else(|| Error::Format("empty profile".into()))?;
    let h = radius / (rs.len().max(2) - 1) as f64;
    if rs.iter().enumerate().any(|(i, r)| (r - i as f64 * h).abs() > 1e-9 * radius.max(1.0)) {
        return Err(Error::Format("radial nodes are not equispaced from 0".into()));
    }
    RadialFunction::new(radius, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_roundtrip() {
        let w = RadialFunction::from_fn(2.0, 11, |r| r * r - 4.0).unwrap();
        let f = FieldFile::radial(&w);
        let back = FieldFile::from_json(&f.to_json().unwrap()).unwrap().to_radial().unwrap();
        assert_eq!(back, w);
        let csv = radial_from_csv(&f.to_csv()).unwrap();
        for (a, b) in csv.values().iter().zip(w.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_roundtrip_and_shape_check() {
        let g = PolarGrid::new(Domain::disc(1.0).unwrap(), 6, 8).unwrap();
        let u = GridFunction2D::from_fn(&g, |x, y| x - 2.0 * y);
        let f = FieldFile::grid(&u);
        let back = FieldFile::from_json(&f.to_json().unwrap()).unwrap().to_grid().unwrap();
        assert_eq!(back.values(), u.values());
        assert_eq!(f.to_csv().lines().count(), 1 + g.node_count());
        let bad = r#"{"kind":"grid","schema_version":1,"domain":{"kind":"disc","R":1.0},"nr":6,"ntheta":8,"values":[0.0]}"#;
        assert!(matches!(FieldFile::from_json(bad), Err(Error::Format(_))));
    }
}
