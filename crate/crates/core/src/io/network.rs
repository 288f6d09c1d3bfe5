//! Schema (JSON) and edge-list (CSV) files.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hin::{
    build_hin, EdgeRecord, EdgeTypeDecl, EdgeTypeId, Hin, VertexId, VertexTypeDecl, VertexTypeId,
    SINK_NAME,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaFile {
    pub vertex_types: Vec<VertexTypeEntry>,
    #[serde(default)]
    pub edge_types: Vec<EdgeTypeEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexTypeEntry {
    pub name: String,
    /// Vertices that exist even without edges; they are interned before any edge endpoint.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertices: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeTypeEntry {
    pub name: String,
    pub src: String,
    pub dst: String,
}

/// Vertex names per vertex type, indexed by vertex index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexNames {
    names: Vec<Vec<String>>,
    lookup: Vec<HashMap<String, u32>>,
}

impl VertexNames {
    fn with_types(n: usize) -> Self {
        VertexNames {
            names: vec![Vec::new(); n],
            lookup: vec![HashMap::new(); n],
        }
    }

    fn intern(&mut self, ty: usize, name: &str) -> Result<u32> {
        if let Some(&i) = self.lookup[ty].get(name) {
            return Ok(i);
        }
        let i = u32::try_from(self.names[ty].len())
            .map_err(|_| Error::OutOfRange("more than 2^32 vertices in one type".into()))?;
        self.names[ty].push(name.to_string());
        self.lookup[ty].insert(name.to_string(), i);
        Ok(i)
    }

    /// The name of `v`; sink vertices are called [`SINK_NAME`].
    pub fn name(&self, v: VertexId) -> &str {
        self.names[v.vertex_type.0 as usize]
            .get(v.index as usize)
            .map_or(SINK_NAME, String::as_str)
    }

    pub fn index(&self, ty: VertexTypeId, name: &str) -> Option<u32> {
        self.lookup.get(ty.0 as usize)?.get(name).copied()
    }

    /// Names of the non-sink vertices of `ty` in index order.
    pub fn names(&self, ty: VertexTypeId) -> &[String] {
        &self.names[ty.0 as usize]
    }
}

/// A network together with the names of its vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedNetwork {
    pub hin: Hin,
    pub names: VertexNames,
}

impl LoadedNetwork {
    /// Resolves `name` within `ty`; the sink is addressed by [`SINK_NAME`].
    pub fn vertex(&self, ty: VertexTypeId, name: &str) -> Result<VertexId> {
        if let Some(i) = self.names.index(ty, name) {
            return Ok(VertexId::new(ty, i));
        }
        match self.hin.sink(ty) {
            Some(s) if name == SINK_NAME => Ok(VertexId::new(ty, s)),
            _ => Err(Error::UnknownName {
                kind: "vertex",
                name: name.to_string(),
            }),
        }
    }

    /// Resolves `name` in whichever vertex type declares it, failing when it is ambiguous.
    pub fn vertex_anywhere(&self, name: &str) -> Result<VertexId> {
        let hits: Vec<VertexId> = (0..self.hin.vertex_types().len() as u32)
            .filter_map(|t| self.names.index(VertexTypeId(t), name).map(|i| VertexId::new(VertexTypeId(t), i)))
            .collect();
        match hits.as_slice() {
            [v] => Ok(*v),
            [] => Err(Error::UnknownName {
                kind: "vertex",
                name: name.to_string(),
            }),
            _ => Err(Error::Domain(format!(
                "vertex name `{name}` exists in several vertex types"
            ))),
        }
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        self.names.name(v)
    }
}

pub fn read_schema(path: &Path) -> Result<SchemaFile> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| {
        if e.is_io() {
            Error::io(path, std::io::Error::other(e.to_string()))
        } else {
            Error::Parse {
                context: path.display().to_string(),
                line: e.line() as u64,
                message: e.to_string(),
            }
        }
    })
}

struct RawEdge {
    edge_type: u32,
    src: String,
    dst: String,
    multiplicity: u64,
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        context: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => parse_error(path, line, format!("{other:?}")),
    }
}

/// Parses one edge file against the edge-type names of the schema.
fn read_edge_file(path: &Path, edge_types: &HashMap<&str, u32>) -> Result<Vec<RawEdge>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(BufReader::new(file));
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let (Some(ci), Some(si), Some(di)) = (column("edge_type"), column("src"), column("dst")) else {
        return Err(parse_error(
            path,
            1,
            "header must contain edge_type, src and dst columns",
        ));
    };
    let mi = column("multiplicity");
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let edge_name = &record[ci];
        let &edge_type = edge_types
            .get(edge_name)
            .ok_or_else(|| parse_error(path, line, format!("unknown edge type `{edge_name}`")))?;
        let (src, dst) = (&record[si], &record[di]);
        if src.is_empty() || dst.is_empty() {
            return Err(parse_error(path, line, "empty vertex name"));
        }
        let multiplicity = match mi.map(|i| &record[i]) {
            None | Some("") => 1,
            Some(text) => match text.parse::<u64>() {
                Ok(m) if m >= 1 => m,
                _ => {
                    return Err(parse_error(
                        path,
                        line,
                        format!("multiplicity `{text}` is not a positive integer"),
                    ))
                }
            },
        };
        rows.push(RawEdge {
            edge_type,
            src: src.to_string(),
            dst: dst.to_string(),
            multiplicity,
        });
    }
    Ok(rows)
}

/// Builds a network from a schema file and any number of edge files.
///
/// Edge files are parsed concurrently. Vertex names are interned per type, explicit schema
/// vertices first, then endpoints in order of first appearance across the files as listed.
pub fn load_network(schema_path: &Path, edge_paths: &[PathBuf], augment_sinks: bool) -> Result<LoadedNetwork> {
    let schema = read_schema(schema_path)?;
    let edge_index: HashMap<&str, u32> = schema
        .edge_types
        .iter()
        .enumerate()
        .map(|(i, e)| (e.name.as_str(), i as u32))
        .collect();
    let files: Vec<Vec<RawEdge>> = edge_paths
        .par_iter()
        .map(|p| read_edge_file(p, &edge_index))
        .collect::<Result<_>>()?;
    let rows = files.into_iter().flatten();
    from_schema_and_rows(&schema, rows, augment_sinks)
}

fn from_schema_and_rows(
    schema: &SchemaFile,
    rows: impl Iterator<Item = RawEdge>,
    augment_sinks: bool,
) -> Result<LoadedNetwork> {
    let type_index: HashMap<&str, u32> = schema
        .vertex_types
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i as u32))
        .collect();
    if type_index.len() != schema.vertex_types.len() {
        return Err(Error::Domain("duplicate vertex type name in schema".into()));
    }
    let resolve = |name: &str| {
        type_index.get(name).copied().map(VertexTypeId).ok_or_else(|| Error::UnknownName {
            kind: "vertex type",
            name: name.to_string(),
        })
    };
    let edge_decls = schema
        .edge_types
        .iter()
        .enumerate()
        .map(|(i, e)| Ok(EdgeTypeDecl::new(i as u32, e.name.clone(), resolve(&e.src)?, resolve(&e.dst)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut names = VertexNames::with_types(schema.vertex_types.len());
    for (t, v) in schema.vertex_types.iter().enumerate() {
        for name in &v.vertices {
            names.intern(t, name)?;
        }
    }
    let mut records = Vec::new();
    for row in rows {
        let decl = &edge_decls[row.edge_type as usize];
        let src = names.intern(decl.src.0 as usize, &row.src)?;
        let dst = names.intern(decl.dst.0 as usize, &row.dst)?;
        records.push(EdgeRecord {
            edge_type: EdgeTypeId(row.edge_type),
            src: VertexId::new(decl.src, src),
            dst: VertexId::new(decl.dst, dst),
            multiplicity: row.multiplicity,
        });
    }
    let vertex_decls = schema
        .vertex_types
        .iter()
        .enumerate()
        .map(|(t, v)| VertexTypeDecl::new(v.name.clone(), names.names[t].len() as u32))
        .collect();
    let hin = build_hin(vertex_decls, edge_decls, &records)?;
    let hin = if augment_sinks { hin.add_sinks() } else { hin };
    Ok(LoadedNetwork { hin, names })
}

/// Writes the network back as a schema listing every vertex and a single edge file. Sink
/// vertices and their edges are left out; reloading with the same augmentation flag yields
/// an identical network.
pub fn write_network(net: &LoadedNetwork, schema_path: &Path, edges_path: &Path) -> Result<()> {
    let hin = &net.hin;
    let schema = SchemaFile {
        vertex_types: hin
            .vertex_types()
            .iter()
            .enumerate()
            .map(|(t, v)| VertexTypeEntry {
                name: v.name.clone(),
                vertices: net.names.names(VertexTypeId(t as u32)).to_vec(),
            })
            .collect(),
        edge_types: hin
            .edge_types()
            .iter()
            .map(|e| EdgeTypeEntry {
                name: e.name.clone(),
                src: hin.vertex_types()[e.src.0 as usize].name.clone(),
                dst: hin.vertex_types()[e.dst.0 as usize].name.clone(),
            })
            .collect(),
    };
    let file = File::create(schema_path).map_err(|e| Error::io(schema_path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, &schema)
        .map_err(|e| Error::io(schema_path, std::io::Error::other(e.to_string())))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| Error::io(schema_path, e))?;

    let file = File::create(edges_path).map_err(|e| Error::io(edges_path, e))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    let io_err = |e: csv::Error| csv_error(edges_path, e);
    writer
        .write_record(["edge_type", "src", "dst", "multiplicity"])
        .map_err(io_err)?;
    for decl in hin.edge_types() {
        for (s, d, m) in hin.table(decl.id).triples() {
            let (sv, dv) = (VertexId::new(decl.src, s), VertexId::new(decl.dst, d));
            if hin.is_sink(sv) || hin.is_sink(dv) {
                continue;
            }
            writer
                .write_record([
                    decl.name.as_str(),
                    net.names.name(sv),
                    net.names.name(dv),
                    &m.to_string(),
                ])
                .map_err(io_err)?;
        }
    }
    writer.flush().map_err(|e| Error::io(edges_path, e))
}
