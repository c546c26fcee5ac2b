//! Text formats for multiplex edge lists and node labels.
//!
//! Edge list: an optional header `#nodes N #layers K`, then one record per
//! line `layer<TAB>u<TAB>v<TAB>weight` with 0-based node indices. Label
//! files hold `node<TAB>class_name`. In both, `#` starts a comment. Fields may
//! be separated by any whitespace on input; output always uses tabs.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{DuplicateRule, MultilayerGraph, SparseSym};
use crate::labels::LabelMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default)]
pub struct EdgeListOptions {
    /// Node count used when the file has no `#nodes` header.
    pub n_hint: Option<usize>,
    /// How `(u, v)` and `(v, u)` records are unified.
    pub rule: DuplicateRule,
    pub allow_self_loops: bool,
}

#[derive(Debug, Default, Clone, Copy)]
struct Header {
    nodes: Option<usize>,
    layers: Option<usize>,
}

/// Parses `#nodes N #layers K` (either part optional). Other comments yield
/// an empty header.
fn parse_header(comment: &str, line: usize) -> Result<Header> {
    let tokens: Vec<&str> = comment.split_whitespace().collect();
    let mut header = Header::default();
    let mut idx = 0;
    while idx < tokens.len() {
        let key = tokens[idx].trim_start_matches('#');
        let slot = match key {
            "nodes" => &mut header.nodes,
            "layers" => &mut header.layers,
            _ => return Ok(Header::default()),
        };
        let value = tokens.get(idx + 1).ok_or_else(|| Error::Parse {
            line,
            msg: format!("header key `{key}` has no value"),
        })?;
        *slot = Some(value.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("header value `{value}` is not a count"),
        })?);
        idx += 2;
    }
    Ok(header)
}

fn strip_comment(line: &str) -> (&str, Option<&str>) {
    match line.find('#') {
        Some(pos) => (&line[..pos], Some(&line[pos..])),
        None => (line, None),
    }
}

fn parse_index(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("{what} `{tok}` is not a nonnegative integer"),
    })
}

pub fn read_multilayer<T: Scalar, R: Read>(
    reader: R,
    opts: EdgeListOptions,
) -> Result<MultilayerGraph<T>> {
    let mut header = Header::default();
    let mut layer_ids: HashMap<String, usize> = HashMap::new();
    let mut layer_names: Vec<String> = Vec::new();
    // Directed (layer, u, v) records; exact repeats are summed.
    let mut records: BTreeMap<(usize, usize, usize), T> = BTreeMap::new();
    let mut max_index = None::<usize>;

    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let (body, comment) = strip_comment(&line);
        if let Some(comment) = comment {
            if body.trim().is_empty() && records.is_empty() {
                let h = parse_header(comment, lineno)?;
                header.nodes = h.nodes.or(header.nodes);
                header.layers = h.layers.or(header.layers);
            }
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected `layer u v weight`, found {} fields", fields.len()),
            });
        }
        let u = parse_index(fields[1], lineno, "node")?;
        let v = parse_index(fields[2], lineno, "node")?;
        let w: f64 = fields[3].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("weight `{}` is not a number", fields[3]),
        })?;
        if !w.is_finite() || w < 0.0 {
            return Err(Error::domain(format!(
                "line {lineno}: weight {w} must be finite and nonnegative"
            )));
        }
        if u == v && !opts.allow_self_loops {
            return Err(Error::domain(format!(
                "line {lineno}: self-loop at node {u}"
            )));
        }
        let declared = header.nodes.or(opts.n_hint);
        if let Some(n) = declared {
            for idx in [u, v] {
                if idx >= n {
                    return Err(Error::Range { index: idx, n });
                }
            }
        }
        max_index = Some(max_index.unwrap_or(0).max(u).max(v));
        let layer = *layer_ids.entry(fields[0].to_string()).or_insert_with(|| {
            layer_names.push(fields[0].to_string());
            layer_names.len() - 1
        });
        let w = T::lit(w);
        records
            .entry((layer, u, v))
            .and_modify(|cur| *cur = *cur + w)
            .or_insert(w);
    }

    let n = header
        .nodes
        .or(opts.n_hint)
        .unwrap_or_else(|| max_index.map_or(0, |m| m + 1));
    if let Some(k) = header.layers {
        if layer_names.len() > k {
            return Err(Error::Parse {
                line: 1,
                msg: format!(
                    "header declares {k} layers but {} appear",
                    layer_names.len()
                ),
            });
        }
        let mut next = 0usize;
        while layer_names.len() < k {
            while layer_ids.contains_key(&next.to_string()) {
                next += 1;
            }
            layer_ids.insert(next.to_string(), layer_names.len());
            layer_names.push(next.to_string());
        }
    }
    if layer_names.is_empty() {
        return Err(Error::domain("edge list defines no layers"));
    }

    let mut per_layer: Vec<Vec<(usize, usize, T)>> = vec![Vec::new(); layer_names.len()];
    for ((layer, u, v), w) in records {
        per_layer[layer].push((u, v, w));
    }
    let layers = per_layer
        .into_iter()
        .map(|trip| SparseSym::from_triplets(n, trip, opts.rule, opts.allow_self_loops))
        .collect::<Result<Vec<_>>>()?;
    MultilayerGraph::new(layers, layer_names)
}

/// Loads a multiplex edge list from disk.
pub fn load_multilayer<T: Scalar>(
    path: impl AsRef<Path>,
    opts: EdgeListOptions,
) -> Result<MultilayerGraph<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_multilayer(file, opts)
}

pub fn write_multilayer<T: Scalar, W: Write>(
    g: &MultilayerGraph<T>,
    writer: W,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "#nodes {} #layers {}", g.n(), g.k())?;
    for (name, layer) in g.layer_names().iter().zip(g.layers()) {
        for &(i, j, x) in layer.entries() {
            writeln!(w, "{name}\t{i}\t{j}\t{x}")?;
        }
    }
    w.flush()
}

pub fn save_multilayer<T: Scalar>(g: &MultilayerGraph<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_multilayer(g, file).map_err(|e| Error::io(path, e))
}

/// Reads `(node, class_name)` records.
pub fn read_label_records<R: Read>(reader: R) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let (body, _) = strip_comment(&line);
        let fields: Vec<&str> = body.split_whitespace().collect();
        match fields.as_slice() {
            [] => continue,
            [node, class] => out.push((parse_index(node, lineno, "node")?, class.to_string())),
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected `node class`, found {} fields", fields.len()),
                })
            }
        }
    }
    Ok(out)
}

pub fn read_labels<R: Read>(reader: R, n: usize) -> Result<LabelMatrix> {
    LabelMatrix::from_named(n, read_label_records(reader)?)
}

pub fn load_labels(path: impl AsRef<Path>, n: usize) -> Result<LabelMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_labels(file, n)
}

/// Writes `node<TAB>class_name` for the given nodes.
pub fn write_node_classes<W: Write>(
    nodes: impl IntoIterator<Item = (usize, usize)>,
    class_names: &[String],
    writer: W,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(writer);
    for (node, class) in nodes {
        writeln!(w, "{node}\t{}", class_names[class])?;
    }
    w.flush()
}

pub fn write_labels<W: Write>(labels: &LabelMatrix, writer: W) -> std::io::Result<()> {
    let known = labels
        .assignment()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|c| (i, c)));
    write_node_classes(known, labels.classes(), writer)
}
