//! Heterogeneous information networks stored as typed multigraphs.
//!
//! Each edge type keeps its aggregated multiplicities twice, once source-major and once
//! destination-major, so that forward transitions, transposed transitions and backward
//! (pull) passes all run in time proportional to the degrees they touch.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Name given to the sink vertex appended to every vertex type by [`Hin::add_sinks`].
pub const SINK_NAME: &str = "⊥";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexTypeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeTypeId(pub u32);

/// A vertex, identified by its type and its dense index within that type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    pub vertex_type: VertexTypeId,
    pub index: u32,
}

impl VertexId {
    pub fn new(vertex_type: VertexTypeId, index: u32) -> Self {
        VertexId { vertex_type, index }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Transposed,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Transposed,
            Direction::Transposed => Direction::Forward,
        }
    }
}

/// An edge type traversed either along or against its declared orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeStep {
    pub edge_type: EdgeTypeId,
    pub direction: Direction,
}

impl EdgeStep {
    pub fn forward(edge_type: EdgeTypeId) -> Self {
        EdgeStep {
            edge_type,
            direction: Direction::Forward,
        }
    }

    pub fn transposed(edge_type: EdgeTypeId) -> Self {
        EdgeStep {
            edge_type,
            direction: Direction::Transposed,
        }
    }

    pub fn transpose(self) -> Self {
        EdgeStep {
            edge_type: self.edge_type,
            direction: self.direction.flip(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexTypeDecl {
    pub name: String,
    pub cardinality: u32,
}

impl VertexTypeDecl {
    pub fn new(name: impl Into<String>, cardinality: u32) -> Self {
        VertexTypeDecl {
            name: name.into(),
            cardinality,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeTypeDecl {
    pub id: EdgeTypeId,
    pub name: String,
    pub src: VertexTypeId,
    pub dst: VertexTypeId,
}

impl EdgeTypeDecl {
    pub fn new(id: u32, name: impl Into<String>, src: VertexTypeId, dst: VertexTypeId) -> Self {
        EdgeTypeDecl {
            id: EdgeTypeId(id),
            name: name.into(),
            src,
            dst,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeRecord {
    pub edge_type: EdgeTypeId,
    pub src: VertexId,
    pub dst: VertexId,
    pub multiplicity: u64,
}

/// Compressed rows of one orientation of an edge table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    counts: Vec<u64>,
    degrees: Vec<u64>,
    dangling: Vec<u32>,
}

impl Adjacency {
    /// `triples` must be sorted by (row, column) with no duplicates.
    fn from_sorted(rows: u32, triples: &[(u32, u32, u64)]) -> Self {
        let mut offsets = vec![0usize; rows as usize + 1];
        for &(r, _, _) in triples {
            offsets[r as usize + 1] += 1;
        }
        for i in 0..rows as usize {
            offsets[i + 1] += offsets[i];
        }
        let neighbors = triples.iter().map(|t| t.1).collect();
        let counts: Vec<u64> = triples.iter().map(|t| t.2).collect();
        let degrees: Vec<u64> = (0..rows as usize)
            .map(|r| counts[offsets[r]..offsets[r + 1]].iter().sum())
            .collect();
        let dangling = (0..rows).filter(|&r| degrees[r as usize] == 0).collect();
        Adjacency {
            offsets,
            neighbors,
            counts,
            degrees,
            dangling,
        }
    }

    pub fn rows(&self) -> u32 {
        self.degrees.len() as u32
    }

    /// Neighbors of `row` with their multiplicities, in increasing neighbor order.
    pub fn row(&self, row: u32) -> (&[u32], &[u64]) {
        let range = self.offsets[row as usize]..self.offsets[row as usize + 1];
        (&self.neighbors[range.clone()], &self.counts[range])
    }

    pub fn degree(&self, row: u32) -> u64 {
        self.degrees[row as usize]
    }

    /// Rows without any edge.
    pub fn dangling(&self) -> &[u32] {
        &self.dangling
    }
}

/// Aggregated multiplicities of one edge type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeTable {
    forward: Adjacency,
    backward: Adjacency,
    total: u64,
}

impl EdgeTable {
    /// Builds a table from `(src, dst, multiplicity)` triples; duplicates accumulate.
    pub fn from_triples(n_src: u32, n_dst: u32, mut triples: Vec<(u32, u32, u64)>) -> Result<Self> {
        if let Some(t) = triples.iter().find(|t| t.0 >= n_src || t.1 >= n_dst) {
            return Err(Error::OutOfRange(format!(
                "edge ({}, {}) in a {n_src}x{n_dst} table",
                t.0, t.1
            )));
        }
        triples.sort_unstable_by_key(|t| (t.0, t.1));
        let mut merged: Vec<(u32, u32, u64)> = Vec::with_capacity(triples.len());
        for (s, d, m) in triples {
            if m == 0 {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.0 == s && last.1 == d => {
                    last.2 = last.2.checked_add(m).ok_or(Error::Overflow)?;
                }
                _ => merged.push((s, d, m)),
            }
        }
        let total = merged
            .iter()
            .try_fold(0u64, |acc, t| acc.checked_add(t.2))
            .ok_or(Error::Overflow)?;
        let forward = Adjacency::from_sorted(n_src, &merged);
        let mut swapped: Vec<(u32, u32, u64)> = merged.iter().map(|&(s, d, m)| (d, s, m)).collect();
        swapped.sort_unstable_by_key(|t| (t.0, t.1));
        let backward = Adjacency::from_sorted(n_dst, &swapped);
        Ok(EdgeTable {
            forward,
            backward,
            total,
        })
    }

    pub fn adjacency(&self, direction: Direction) -> &Adjacency {
        match direction {
            Direction::Forward => &self.forward,
            Direction::Transposed => &self.backward,
        }
    }

    pub fn source_len(&self) -> u32 {
        self.forward.rows()
    }

    pub fn destination_len(&self) -> u32 {
        self.backward.rows()
    }

    /// Multiplicity of `(src, dst)`, zero when absent.
    pub fn multiplicity(&self, src: u32, dst: u32) -> u64 {
        let (nbrs, counts) = self.forward.row(src);
        nbrs.binary_search(&dst).map_or(0, |i| counts[i])
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// All stored `(src, dst, multiplicity)` triples in source-major order.
    pub fn triples(&self) -> impl Iterator<Item = (u32, u32, u64)> + '_ {
        (0..self.forward.rows()).flat_map(move |s| {
            let (nbrs, counts) = self.forward.row(s);
            nbrs.iter().zip(counts).map(move |(&d, &m)| (s, d, m))
        })
    }
}

/// Immutable heterogeneous information network.
#[derive(Clone, Debug, PartialEq)]
pub struct Hin {
    vertex_types: Vec<VertexTypeDecl>,
    edge_types: Vec<EdgeTypeDecl>,
    tables: Vec<Arc<EdgeTable>>,
    sinks: Option<Vec<u32>>,
}

/// Validates declarations and records and assembles a [`Hin`].
///
/// Records repeating an `(edge type, src, dst)` triple accumulate their multiplicities.
pub fn build_hin(
    vertex_types: Vec<VertexTypeDecl>,
    edge_types: Vec<EdgeTypeDecl>,
    records: &[EdgeRecord],
) -> Result<Hin> {
    check_unique("vertex type", vertex_types.iter().map(|v| v.name.as_str()))?;
    check_unique("edge type", edge_types.iter().map(|e| e.name.as_str()))?;
    for (i, decl) in edge_types.iter().enumerate() {
        if decl.id.0 as usize != i {
            return Err(Error::OutOfRange(format!(
                "edge type `{}` declared with id {} at position {i}",
                decl.name, decl.id.0
            )));
        }
        for end in [decl.src, decl.dst] {
            if end.0 as usize >= vertex_types.len() {
                return Err(Error::OutOfRange(format!(
                    "edge type `{}` references vertex type {}",
                    decl.name, end.0
                )));
            }
        }
    }

    let mut per_type: Vec<Vec<(u32, u32, u64)>> = vec![Vec::new(); edge_types.len()];
    for (i, rec) in records.iter().enumerate() {
        let decl = edge_types.get(rec.edge_type.0 as usize).ok_or_else(|| {
            Error::OutOfRange(format!("edge record {i}: edge type {}", rec.edge_type.0))
        })?;
        for (end, expected, role) in [(rec.src, decl.src, "source"), (rec.dst, decl.dst, "destination")] {
            if end.vertex_type != expected {
                let found = vertex_types
                    .get(end.vertex_type.0 as usize)
                    .map_or_else(|| format!("#{}", end.vertex_type.0), |v| v.name.clone());
                return Err(Error::TypeMismatch {
                    record: i,
                    message: format!(
                        "{role} of `{}` must be of type `{}`, found `{found}`",
                        decl.name, vertex_types[expected.0 as usize].name
                    ),
                });
            }
            let card = vertex_types[expected.0 as usize].cardinality;
            if end.index >= card {
                return Err(Error::OutOfRange(format!(
                    "edge record {i}: {role} index {} but `{}` has {card} vertices",
                    end.index, vertex_types[expected.0 as usize].name
                )));
            }
        }
        if rec.multiplicity == 0 {
            return Err(Error::Domain(format!(
                "edge record {i}: multiplicity must be at least 1"
            )));
        }
        per_type[i_of(rec.edge_type)].push((rec.src.index, rec.dst.index, rec.multiplicity));
    }

    let tables = edge_types
        .iter()
        .zip(per_type)
        .map(|(decl, triples)| {
            EdgeTable::from_triples(
                vertex_types[decl.src.0 as usize].cardinality,
                vertex_types[decl.dst.0 as usize].cardinality,
                triples,
            )
            .map(Arc::new)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Hin {
        vertex_types,
        edge_types,
        tables,
        sinks: None,
    })
}

fn i_of(e: EdgeTypeId) -> usize {
    e.0 as usize
}

fn check_unique<'a>(kind: &str, names: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for name in names {
        if !seen.insert(name) {
            return Err(Error::Domain(format!("duplicate {kind} name `{name}`")));
        }
    }
    Ok(())
}

impl Hin {
    pub fn vertex_types(&self) -> &[VertexTypeDecl] {
        &self.vertex_types
    }

    pub fn edge_types(&self) -> &[EdgeTypeDecl] {
        &self.edge_types
    }

    pub fn vertex_type(&self, id: VertexTypeId) -> Result<&VertexTypeDecl> {
        self.vertex_types
            .get(id.0 as usize)
            .ok_or_else(|| Error::OutOfRange(format!("vertex type {}", id.0)))
    }

    pub fn edge_type(&self, id: EdgeTypeId) -> Result<&EdgeTypeDecl> {
        self.edge_types
            .get(id.0 as usize)
            .ok_or_else(|| Error::OutOfRange(format!("edge type {}", id.0)))
    }

    pub fn vertex_type_by_name(&self, name: &str) -> Option<VertexTypeId> {
        self.vertex_types
            .iter()
            .position(|v| v.name == name)
            .map(|i| VertexTypeId(i as u32))
    }

    pub fn edge_type_by_name(&self, name: &str) -> Option<EdgeTypeId> {
        self.edge_types
            .iter()
            .position(|e| e.name == name)
            .map(|i| EdgeTypeId(i as u32))
    }

    /// Number of vertices of `ty`, sink included when augmented.
    pub fn cardinality(&self, ty: VertexTypeId) -> u32 {
        self.vertex_types[ty.0 as usize].cardinality
    }

    pub fn is_augmented(&self) -> bool {
        self.sinks.is_some()
    }

    /// Index of the sink vertex of `ty`, if sinks were added.
    pub fn sink(&self, ty: VertexTypeId) -> Option<u32> {
        self.sinks.as_ref().map(|s| s[ty.0 as usize])
    }

    pub fn is_sink(&self, v: VertexId) -> bool {
        self.sink(v.vertex_type) == Some(v.index)
    }

    /// Number of vertices of `ty` that are not the sink.
    pub fn real_cardinality(&self, ty: VertexTypeId) -> u32 {
        self.sink(ty).unwrap_or_else(|| self.cardinality(ty))
    }

    pub fn table(&self, e: EdgeTypeId) -> &EdgeTable {
        &self.tables[i_of(e)]
    }

    pub fn step_source(&self, step: EdgeStep) -> VertexTypeId {
        let decl = &self.edge_types[i_of(step.edge_type)];
        match step.direction {
            Direction::Forward => decl.src,
            Direction::Transposed => decl.dst,
        }
    }

    pub fn step_target(&self, step: EdgeStep) -> VertexTypeId {
        self.step_source(step.transpose())
    }

    /// Rows of `step` indexed by its source vertices.
    pub fn adjacency(&self, step: EdgeStep) -> &Adjacency {
        self.tables[i_of(step.edge_type)].adjacency(step.direction)
    }

    /// Returns the transposed view of `e`: its edges inverted, multiplicities kept.
    ///
    /// The view reads the destination-major store, so nothing is materialized.
    pub fn transpose_edge_type(&self, e: EdgeTypeId) -> EdgeStep {
        EdgeStep::transposed(e)
    }

    fn check_vertex(&self, v: VertexId, expected: VertexTypeId, what: &str) -> Result<()> {
        if v.vertex_type != expected {
            return Err(Error::Domain(format!(
                "{what} must be a vertex of `{}`, got a vertex of `{}`",
                self.vertex_types[expected.0 as usize].name,
                self.vertex_type(v.vertex_type).map_or("?", |d| d.name.as_str())
            )));
        }
        if v.index >= self.cardinality(expected) {
            return Err(Error::OutOfRange(format!(
                "vertex {} of `{}`",
                v.index, self.vertex_types[expected.0 as usize].name
            )));
        }
        Ok(())
    }

    /// `eps_E(v, -)` along `step`.
    pub fn out_degree_along(&self, step: EdgeStep, v: VertexId) -> Result<u64> {
        self.edge_type(step.edge_type)?;
        self.check_vertex(v, self.step_source(step), "source")?;
        Ok(self.adjacency(step).degree(v.index))
    }

    pub fn out_degree(&self, e: EdgeTypeId, v: VertexId) -> Result<u64> {
        self.out_degree_along(EdgeStep::forward(e), v)
    }

    pub fn in_degree(&self, e: EdgeTypeId, v: VertexId) -> Result<u64> {
        self.out_degree_along(EdgeStep::transposed(e), v)
    }

    pub fn edge_total(&self, e: EdgeTypeId) -> Result<u64> {
        self.edge_type(e)?;
        Ok(self.table(e).total())
    }

    pub fn multiplicity(&self, step: EdgeStep, src: VertexId, dst: VertexId) -> Result<u64> {
        self.edge_type(step.edge_type)?;
        self.check_vertex(src, self.step_source(step), "source")?;
        self.check_vertex(dst, self.step_target(step), "destination")?;
        let table = self.table(step.edge_type);
        Ok(match step.direction {
            Direction::Forward => table.multiplicity(src.index, dst.index),
            Direction::Transposed => table.multiplicity(dst.index, src.index),
        })
    }

    /// Appends one sink vertex (named [`SINK_NAME`]) to every vertex type.
    ///
    /// Every edge type gains a sink-to-sink edge, and every source vertex without an outgoing
    /// edge of that type gains an edge to the destination type's sink. Returns an unchanged
    /// copy when the network is already augmented.
    pub fn add_sinks(&self) -> Hin {
        if self.is_augmented() {
            return self.clone();
        }
        let sinks: Vec<u32> = self.vertex_types.iter().map(|v| v.cardinality).collect();
        let vertex_types = self
            .vertex_types
            .iter()
            .map(|v| VertexTypeDecl::new(v.name.clone(), v.cardinality + 1))
            .collect::<Vec<_>>();
        let tables = self
            .edge_types
            .iter()
            .zip(&self.tables)
            .map(|(decl, table)| {
                let sink_src = sinks[decl.src.0 as usize];
                let sink_dst = sinks[decl.dst.0 as usize];
                let mut triples: Vec<(u32, u32, u64)> = table.triples().collect();
                triples.push((sink_src, sink_dst, 1));
                triples.extend(
                    table
                        .adjacency(Direction::Forward)
                        .dangling()
                        .iter()
                        .map(|&v| (v, sink_dst, 1)),
                );
                let rebuilt = EdgeTable::from_triples(sink_src + 1, sink_dst + 1, triples)
                    .expect("sink augmentation keeps indices in range and totals bounded");
                Arc::new(rebuilt)
            })
            .collect();
        Hin {
            vertex_types,
            edge_types: self.edge_types.clone(),
            tables,
            sinks: Some(sinks),
        }
    }

    /// Returns a copy of the network with an extra edge type, e.g. a meta-path projection.
    pub fn with_edge_type(
        &self,
        name: impl Into<String>,
        src: VertexTypeId,
        dst: VertexTypeId,
        table: EdgeTable,
    ) -> Result<(Hin, EdgeTypeId)> {
        let name = name.into();
        if self.edge_type_by_name(&name).is_some() {
            return Err(Error::Domain(format!("duplicate edge type name `{name}`")));
        }
        self.vertex_type(src)?;
        self.vertex_type(dst)?;
        if table.source_len() != self.cardinality(src)
            || table.destination_len() != self.cardinality(dst)
        {
            return Err(Error::Dimension {
                left: table.source_len() as usize,
                right: self.cardinality(src) as usize,
            });
        }
        let id = EdgeTypeId(self.edge_types.len() as u32);
        let mut out = self.clone();
        out.edge_types.push(EdgeTypeDecl {
            id,
            name,
            src,
            dst,
        });
        out.tables.push(Arc::new(table));
        Ok((out, id))
    }

    pub fn schema(&self) -> Schema {
        Schema {
            vertex_types: self
                .vertex_types
                .iter()
                .enumerate()
                .map(|(i, v)| SchemaVertexType {
                    id: VertexTypeId(i as u32),
                    name: v.name.clone(),
                    cardinality: self.real_cardinality(VertexTypeId(i as u32)),
                })
                .collect(),
            arcs: self
                .edge_types
                .iter()
                .map(|e| SchemaArc {
                    edge_type: e.id,
                    name: e.name.clone(),
                    src: e.src,
                    dst: e.dst,
                })
                .collect(),
        }
    }

    /// Re-checks the structural invariants: degree conservation per edge type and, for
    /// augmented networks, that no source vertex is left without an outgoing edge.
    pub fn check_invariants(&self) -> Result<()> {
        for (decl, table) in self.edge_types.iter().zip(&self.tables) {
            let fwd = table.adjacency(Direction::Forward);
            let bwd = table.adjacency(Direction::Transposed);
            let out: u64 = (0..fwd.rows()).map(|v| fwd.degree(v)).sum();
            let inc: u64 = (0..bwd.rows()).map(|v| bwd.degree(v)).sum();
            if out != table.total() || inc != table.total() {
                return Err(Error::Domain(format!(
                    "edge type `{}`: degree totals {out}/{inc} differ from {} edges",
                    decl.name,
                    table.total()
                )));
            }
            if self.is_augmented() {
                if let Some(&v) = fwd.dangling().first() {
                    return Err(Error::Walkability {
                        edge_type: decl.name.clone(),
                        vertex_type: self.vertex_types[decl.src.0 as usize].name.clone(),
                        vertex: v,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaVertexType {
    pub id: VertexTypeId,
    pub name: String,
    /// Vertices excluding any sink.
    pub cardinality: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaArc {
    pub edge_type: EdgeTypeId,
    pub name: String,
    pub src: VertexTypeId,
    pub dst: VertexTypeId,
}

/// The directed graph over vertex types induced by the edge-type declarations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    pub vertex_types: Vec<SchemaVertexType>,
    pub arcs: Vec<SchemaArc>,
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertex types:")?;
        for v in &self.vertex_types {
            writeln!(f, "  {} ({})", v.name, v.cardinality)?;
        }
        writeln!(f, "edge types:")?;
        for arc in &self.arcs {
            writeln!(
                f,
                "  {}: {} -> {}",
                arc.name,
                self.vertex_types[arc.src.0 as usize].name,
                self.vertex_types[arc.dst.0 as usize].name
            )?;
        }
        Ok(())
    }
}

/// Incremental construction of a [`Hin`] by name.
#[derive(Default, Debug)]
pub struct HinBuilder {
    vertex_types: Vec<VertexTypeDecl>,
    edge_types: Vec<EdgeTypeDecl>,
    records: Vec<EdgeRecord>,
}

impl HinBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex_type(&mut self, name: &str, cardinality: u32) -> VertexTypeId {
        self.vertex_types.push(VertexTypeDecl::new(name, cardinality));
        VertexTypeId(self.vertex_types.len() as u32 - 1)
    }

    pub fn edge_type(&mut self, name: &str, src: VertexTypeId, dst: VertexTypeId) -> EdgeTypeId {
        let id = self.edge_types.len() as u32;
        self.edge_types.push(EdgeTypeDecl::new(id, name, src, dst));
        EdgeTypeId(id)
    }

    /// Adds `multiplicity` edges of type `e` between the given vertex indices.
    pub fn edge(&mut self, e: EdgeTypeId, src: u32, dst: u32, multiplicity: u64) -> &mut Self {
        let decl = &self.edge_types[i_of(e)];
        self.records.push(EdgeRecord {
            edge_type: e,
            src: VertexId::new(decl.src, src),
            dst: VertexId::new(decl.dst, dst),
            multiplicity,
        });
        self
    }

    pub fn build(self) -> Result<Hin> {
        build_hin(self.vertex_types, self.edge_types, &self.records)
    }
}
