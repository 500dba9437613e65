//! JSON file formats. Qubit labels in files are 1-based.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::BitMat;
use crate::processing::{ExtremalPair, ProcessingRelations};
use crate::stabilizer::{graph_state_tableau, Frame, GraphSpec, StabilizerError, Tableau};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
}

fn parse_err(msg: impl Into<String>) -> FormatError {
    FormatError::Parse(msg.into())
}

/// A resource state given either by a graph or by raw tableau rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_rows: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_rows: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<Vec<Frame>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
}

/// Parsed state: the tableau and, for graph input, the graph.
#[derive(Debug, Clone)]
pub struct LoadedState {
    pub tableau: Tableau,
    pub graph: Option<GraphSpec>,
    pub angles: Option<Vec<f64>>,
}

pub fn matrix_from_rows(rows: &[Vec<u8>], nrows: usize, ncols: usize, name: &str) -> Result<BitMat, FormatError> {
    if rows.len() != nrows {
        return Err(parse_err(format!("{name} has {} rows, expected {nrows}", rows.len())));
    }
    let mut m = BitMat::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(parse_err(format!("{name} row {} has length {}, expected {ncols}", i + 1, row.len())));
        }
        for (j, &v) in row.iter().enumerate() {
            match v {
                0 => {}
                1 => m.set(i, j, true),
                _ => return Err(parse_err(format!("{name} entry ({}, {}) is {v}", i + 1, j + 1))),
            }
        }
    }
    Ok(m)
}

fn labels_to_indices(labels: &[usize], n: usize, name: &str) -> Result<Vec<usize>, FormatError> {
    labels
        .iter()
        .map(|&l| {
            if l == 0 || l > n {
                Err(parse_err(format!("{name} label {l} outside 1..={n}")))
            } else {
                Ok(l - 1)
            }
        })
        .collect()
}

pub fn to_labels(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|i| i + 1).collect()
}

impl StateFile {
    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))
    }

    pub fn load(&self) -> Result<LoadedState, FormatError> {
        let n = self.n;
        let frames = match &self.frames {
            Some(f) if f.len() != n => return Err(parse_err(format!("{} frames for {n} qubits", f.len()))),
            Some(f) => f.clone(),
            None => vec![Frame::XY; n],
        };
        if let Some(a) = &self.angles {
            if a.len() != n {
                return Err(parse_err(format!("{} angles for {n} qubits", a.len())));
            }
        }
        let (tableau, graph) = match (&self.edges, &self.phi_rows, &self.s_rows) {
            (Some(edges), None, None) => {
                let mut pairs = Vec::with_capacity(edges.len());
                for [a, b] in edges {
                    let ab = labels_to_indices(&[*a, *b], n, "edge")?;
                    pairs.push((ab[0], ab[1]));
                }
                let g = GraphSpec::new(n, pairs)?;
                (graph_state_tableau(&g, &frames)?, Some(g))
            }
            (None, Some(phi), Some(s)) => {
                let phi = matrix_from_rows(phi, n, n, "phi_rows")?;
                let s = matrix_from_rows(s, n, n, "s_rows")?;
                (Tableau::new(phi, s, frames)?, None)
            }
            _ => return Err(parse_err("state needs either edges or both phi_rows and s_rows")),
        };
        Ok(LoadedState {
            tableau,
            graph,
            angles: self.angles.clone(),
        })
    }

    /// Raw-tableau form of a tableau.
    pub fn from_tableau(t: &Tableau, angles: Option<Vec<f64>>) -> Self {
        StateFile {
            n: t.n(),
            edges: None,
            phi_rows: Some(t.phi().to_u8_rows()),
            s_rows: Some(t.s().to_u8_rows()),
            frames: Some(t.frames().to_vec()),
            angles,
        }
    }
}

/// Processing relations with 1-based pair labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationFile {
    pub n: usize,
    pub i_gauge: Vec<usize>,
    pub o_comp: Vec<usize>,
    #[serde(rename = "T")]
    pub t: Vec<Vec<u8>>,
    #[serde(rename = "H")]
    pub h: Vec<Vec<u8>>,
    #[serde(rename = "Z")]
    pub z: Vec<Vec<u8>>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<u8>>,
}

impl RelationFile {
    pub fn from_relations(rel: &ProcessingRelations) -> Self {
        RelationFile {
            n: rel.n(),
            i_gauge: to_labels(&rel.pair.i_gauge),
            o_comp: to_labels(&rel.pair.o_comp),
            t: rel.t.to_u8_rows(),
            h: rel.h.to_u8_rows(),
            z: rel.z.to_u8_rows(),
            r: rel.r.to_u8_rows(),
        }
    }

    pub fn to_relations(&self) -> Result<ProcessingRelations, FormatError> {
        let n = self.n;
        let pair = ExtremalPair::new(
            labels_to_indices(&self.i_gauge, n, "i_gauge")?,
            labels_to_indices(&self.o_comp, n, "o_comp")?,
        );
        let k = pair.i_gauge.len();
        let m = pair.o_comp.len();
        Ok(ProcessingRelations {
            t: matrix_from_rows(&self.t, n, n, "T")?,
            h: matrix_from_rows(&self.h, n, k, "H")?,
            z: matrix_from_rows(&self.z, m, n, "Z")?,
            r: matrix_from_rows(&self.r, m, k, "R")?,
            pair,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_state_file() {
        let f = StateFile::from_json(r#"{"n":3,"edges":[[1,2],[2,3]],"frames":["XY","XY","XY"]}"#).unwrap();
        let s = f.load().unwrap();
        assert_eq!(s.tableau.phi(), &BitMat::identity(3));
        assert!(s.graph.is_some());
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(StateFile::from_json("{"), Err(FormatError::Parse(_))));
        let f = StateFile::from_json(r#"{"n":2,"edges":[[1,3]]}"#).unwrap();
        assert!(matches!(f.load(), Err(FormatError::Parse(_))));
        let f = StateFile::from_json(r#"{"n":1,"phi_rows":[[1]],"s_rows":[[1]],"frames":["XY"]}"#).unwrap();
        f.load().unwrap();
        let f = StateFile::from_json(r#"{"n":2,"phi_rows":[[1,0],[0,0]],"s_rows":[[0,0],[1,0]]}"#).unwrap();
        assert!(matches!(f.load(), Err(FormatError::Stabilizer(_))));
    }

    #[test]
    fn relation_round_trip() {
        let t = graph_state_tableau(&GraphSpec::path(3), &[Frame::XY; 3]).unwrap();
        let rel = crate::processing::relations_for_pair(&t, &ExtremalPair::new(vec![0], vec![2])).unwrap();
        let file = RelationFile::from_relations(&rel);
        assert_eq!(file.i_gauge, vec![1]);
        assert_eq!(file.to_relations().unwrap(), rel);
    }
}
