//! Plain-text file formats: whitespace-separated edge lists (with optional
//! weights), node vectors as `label value` lines, and two-class group
//! files. Node labels are arbitrary whitespace-free strings, mapped to
//! dense indices in order of first appearance.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::metrics::GroupLabeling;
use crate::scalar::Scalar;

/// Errors from reading or writing the text formats.
#[derive(Debug, Error)]
pub enum IoError {
    /// A data line did not have the expected number of fields.
    #[error("line {line}: expected `{expected}`, got `{content}`")]
    Malformed {
        line: usize,
        expected: &'static str,
        content: String,
    },
    /// A numeric field failed to parse.
    #[error("line {line}: cannot parse `{token}` as a number")]
    BadNumber { line: usize, token: String },
    /// A node label was not present in the graph's label map.
    #[error("line {line}: unknown node label `{label}`")]
    UnknownLabel { line: usize, label: String },
    /// The edge list contained no edges.
    #[error("edge list contains no edges")]
    EmptyInput,
    /// Group files may contain at most two classes.
    #[error("group file has more than two classes: {0:?}")]
    TooManyClasses(Vec<String>),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Bidirectional map between node labels and dense indices, in order of
/// first appearance in the edge list.
#[derive(Debug, Clone, Default)]
pub struct LabelMap {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelMap {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Index of `label`, if it appeared in the edge list.
    pub fn id_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Label of node `id`.
    pub fn name_of(&self, id: usize) -> &str {
        &self.names[id]
    }

    fn insert_or_get(&mut self, label: &str) -> usize {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.names.len();
        self.names.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }
}

/// Options for [`read_edge_list`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ReadOptions {
    /// Ignore weight columns and duplicate edges: every edge gets weight 1
    /// exactly once, instead of duplicates being merged by summing.
    pub unweighted: bool,
}

/// Is this a comment or blank line? Comments start with `#` or `%`.
fn skip_line(s: &str) -> bool {
    s.is_empty() || s.starts_with('#') || s.starts_with('%')
}

/// Reads a whitespace-separated edge list: one `u v` or `u v w` per line,
/// `#`/`%` comment lines and blank lines skipped, CR/LF line endings
/// tolerated. Self-loops register their node label but produce no edge.
pub fn read_edge_list<T: Scalar, R: BufRead>(
    reader: R,
    opts: &ReadOptions,
) -> Result<(Graph<T>, LabelMap), IoError> {
    let mut labels = LabelMap::default();
    let mut edges: Vec<(usize, usize, T)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let s = line.trim();
        if skip_line(s) {
            continue;
        }
        let fields: Vec<&str> = s.split_whitespace().collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(IoError::Malformed {
                line: lineno + 1,
                expected: "u v [w]",
                content: s.to_string(),
            });
        }
        let u = labels.insert_or_get(fields[0]);
        let v = labels.insert_or_get(fields[1]);
        let w = if opts.unweighted || fields.len() == 2 {
            1.0f64
        } else {
            fields[2].parse::<f64>().map_err(|_| IoError::BadNumber {
                line: lineno + 1,
                token: fields[2].to_string(),
            })?
        };
        if u == v {
            continue;
        }
        if opts.unweighted && !seen.insert((u.min(v), u.max(v))) {
            continue;
        }
        edges.push((u, v, T::from_f64_lossy(w)));
    }
    if labels.is_empty() {
        return Err(IoError::EmptyInput);
    }
    let g = Graph::build(labels.len(), &edges)?;
    Ok((g, labels))
}

/// Reads a node vector as `label value` lines against an existing label
/// map. Missing nodes default to zero. Returns the vector and how many
/// nodes were defaulted.
pub fn read_node_vector<T: Scalar, R: BufRead>(
    reader: R,
    labels: &LabelMap,
) -> Result<(Vec<T>, usize), IoError> {
    let mut values = vec![T::zero(); labels.len()];
    let mut seen = vec![false; labels.len()];
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let s = line.trim();
        if skip_line(s) {
            continue;
        }
        let fields: Vec<&str> = s.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(IoError::Malformed {
                line: lineno + 1,
                expected: "node value",
                content: s.to_string(),
            });
        }
        let id = labels.id_of(fields[0]).ok_or_else(|| IoError::UnknownLabel {
            line: lineno + 1,
            label: fields[0].to_string(),
        })?;
        let v = fields[1].parse::<f64>().map_err(|_| IoError::BadNumber {
            line: lineno + 1,
            token: fields[1].to_string(),
        })?;
        values[id] = T::from_f64_lossy(v);
        seen[id] = true;
    }
    let defaulted = seen.iter().filter(|&&s| !s).count();
    Ok((values, defaulted))
}

/// Reads a two-class group file as `label class` lines against an existing
/// label map. Class names are arbitrary strings; at most two distinct
/// classes may appear. Nodes absent from the file stay unlabeled.
pub fn read_groups<R: BufRead>(reader: R, labels: &LabelMap) -> Result<GroupLabeling, IoError> {
    let mut class_of = vec![None; labels.len()];
    let mut names: Vec<String> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let s = line.trim();
        if skip_line(s) {
            continue;
        }
        let fields: Vec<&str> = s.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(IoError::Malformed {
                line: lineno + 1,
                expected: "node class",
                content: s.to_string(),
            });
        }
        let id = labels.id_of(fields[0]).ok_or_else(|| IoError::UnknownLabel {
            line: lineno + 1,
            label: fields[0].to_string(),
        })?;
        let class = match names.iter().position(|n| n == fields[1]) {
            Some(c) => c,
            None => {
                names.push(fields[1].to_string());
                if names.len() > 2 {
                    return Err(IoError::TooManyClasses(names));
                }
                names.len() - 1
            }
        };
        class_of[id] = Some(class);
    }
    Ok(GroupLabeling { class_of, names })
}

/// Writes the canonical edge list: one `u v [w]` line per edge with
/// `u < v`, in lexicographic order, using numeric node indices as labels.
/// Weights equal to one are omitted. Note that isolated nodes cannot be
/// represented in an edge list; reading the output back recovers the graph
/// exactly when every node has at least one edge.
pub fn write_graph<T: Scalar, W: Write>(g: &Graph<T>, mut out: W) -> Result<(), IoError> {
    for (u, v, w) in g.edges() {
        if w == T::one() {
            writeln!(out, "{u} {v}")?;
        } else {
            writeln!(out, "{u} {v} {w}")?;
        }
    }
    Ok(())
}
