//! Meta paths and exact propagation of random-walk distributions along them.

use std::fmt::Write as _;
use std::ops::Range;

use rayon::prelude::*;

use crate::divmath::{stable_sum, Distribution};
use crate::error::{Error, Result};
use crate::hin::{Direction, EdgeStep, EdgeTable, EdgeTypeId, Hin, VertexId, VertexTypeId};

/// Vertex types with at least this many vertices hold walk distributions sparsely.
pub const DENSE_CARDINALITY_LIMIT: u32 = 100_000;

/// A non-empty chain of edge steps whose vertex types line up.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MetaPath {
    steps: Vec<EdgeStep>,
    types: Vec<VertexTypeId>,
}

/// Checks that consecutive steps chain and resolves the visited vertex types.
pub fn validate_metapath(h: &Hin, steps: Vec<EdgeStep>) -> Result<MetaPath> {
    if steps.is_empty() {
        return Err(Error::Domain("a meta path needs at least one step".into()));
    }
    for s in &steps {
        h.edge_type(s.edge_type)?;
    }
    let mut types = vec![h.step_source(steps[0])];
    for (i, &step) in steps.iter().enumerate() {
        let expected = *types.last().unwrap();
        let found = h.step_source(step);
        if found != expected {
            return Err(Error::Chaining {
                step: i,
                expected: h.vertex_types()[expected.0 as usize].name.clone(),
                found: h.vertex_types()[found.0 as usize].name.clone(),
            });
        }
        types.push(h.step_target(step));
    }
    Ok(MetaPath { steps, types })
}

/// Reverses the steps and flips every direction.
pub fn transpose_metapath(path: &MetaPath) -> MetaPath {
    MetaPath {
        steps: path.steps.iter().rev().map(|s| s.transpose()).collect(),
        types: path.types.iter().rev().copied().collect(),
    }
}

impl MetaPath {
    pub fn steps(&self) -> &[EdgeStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// Always false.
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn source(&self) -> VertexTypeId {
        self.types[0]
    }

    pub fn target(&self) -> VertexTypeId {
        *self.types.last().unwrap()
    }

    /// The `len() + 1` vertex types visited, in order.
    pub fn vertex_types(&self) -> &[VertexTypeId] {
        &self.types
    }

    pub fn transpose(&self) -> MetaPath {
        transpose_metapath(self)
    }

    /// The restriction to `steps[range]`.
    pub fn sub_path(&self, range: Range<usize>) -> Result<MetaPath> {
        if range.start >= range.end || range.end > self.steps.len() {
            return Err(Error::OutOfRange(format!(
                "steps {}..{} of a {}-step meta path",
                range.start,
                range.end,
                self.steps.len()
            )));
        }
        Ok(MetaPath {
            steps: self.steps[range.clone()].to_vec(),
            types: self.types[range.start..=range.end].to_vec(),
        })
    }

    /// Renders the path in the `A -e-> B -f^T-> C` expression syntax.
    pub fn to_expr(&self, h: &Hin) -> String {
        let mut out = h.vertex_types()[self.types[0].0 as usize].name.clone();
        for (step, ty) in self.steps.iter().zip(&self.types[1..]) {
            let edge = &h.edge_types()[step.edge_type.0 as usize].name;
            let suffix = match step.direction {
                Direction::Forward => "",
                Direction::Transposed => "^T",
            };
            let _ = write!(out, " -{edge}{suffix}-> {}", h.vertex_types()[ty.0 as usize].name);
        }
        out
    }
}

/// Probability mass over the vertices of one type.
#[derive(Clone, Debug, PartialEq)]
pub enum Mass {
    Dense(Vec<f64>),
    /// Positive entries only, by increasing vertex index.
    Sparse(Vec<(u32, f64)>),
}

/// A probability distribution over the vertices (sink included) of one vertex type.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexDistribution {
    vertex_type: VertexTypeId,
    cardinality: u32,
    mass: Mass,
}

impl VertexDistribution {
    /// Wraps a distribution whose length equals the cardinality of `ty`.
    pub fn from_distribution(h: &Hin, ty: VertexTypeId, dist: Distribution) -> Result<Self> {
        h.vertex_type(ty)?;
        let cardinality = h.cardinality(ty);
        if dist.len() != cardinality as usize {
            return Err(Error::Dimension {
                left: dist.len(),
                right: cardinality as usize,
            });
        }
        Ok(Self::from_dense(ty, dist.into_weights()))
    }

    /// Uniform over the non-sink vertices of `ty`.
    pub fn uniform(h: &Hin, ty: VertexTypeId) -> Result<Self> {
        h.vertex_type(ty)?;
        let real = h.real_cardinality(ty);
        let indices: Vec<u32> = (0..real).collect();
        Self::uniform_subset(h, ty, &indices)
    }

    /// Uniform over the given vertices of `ty`; repeated indices count once.
    pub fn uniform_subset(h: &Hin, ty: VertexTypeId, indices: &[u32]) -> Result<Self> {
        h.vertex_type(ty)?;
        let cardinality = h.cardinality(ty);
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() {
            return Err(Error::InvalidDistribution("empty start subset".into()));
        }
        if let Some(&bad) = sorted.iter().find(|&&i| i >= cardinality) {
            return Err(Error::OutOfRange(format!(
                "vertex {bad} of `{}`",
                h.vertex_types()[ty.0 as usize].name
            )));
        }
        let w = 1.0 / sorted.len() as f64;
        let entries = sorted.into_iter().map(|i| (i, w)).collect();
        Ok(Self::from_entries(ty, cardinality, entries))
    }

    pub fn point(h: &Hin, v: VertexId) -> Result<Self> {
        Self::uniform_subset(h, v.vertex_type, &[v.index])
    }

    fn from_dense(vertex_type: VertexTypeId, weights: Vec<f64>) -> Self {
        let cardinality = weights.len() as u32;
        if cardinality < DENSE_CARDINALITY_LIMIT {
            VertexDistribution {
                vertex_type,
                cardinality,
                mass: Mass::Dense(weights),
            }
        } else {
            let entries = weights
                .into_iter()
                .enumerate()
                .filter(|(_, w)| *w > 0.0)
                .map(|(i, w)| (i as u32, w))
                .collect();
            VertexDistribution {
                vertex_type,
                cardinality,
                mass: Mass::Sparse(entries),
            }
        }
    }

    /// `entries` sorted by index, positive weights only.
    fn from_entries(vertex_type: VertexTypeId, cardinality: u32, entries: Vec<(u32, f64)>) -> Self {
        if cardinality < DENSE_CARDINALITY_LIMIT {
            let mut dense = vec![0.0; cardinality as usize];
            for (i, w) in entries {
                dense[i as usize] = w;
            }
            VertexDistribution {
                vertex_type,
                cardinality,
                mass: Mass::Dense(dense),
            }
        } else {
            VertexDistribution {
                vertex_type,
                cardinality,
                mass: Mass::Sparse(entries),
            }
        }
    }

    pub fn vertex_type(&self) -> VertexTypeId {
        self.vertex_type
    }

    pub fn cardinality(&self) -> u32 {
        self.cardinality
    }

    pub fn mass(&self) -> &Mass {
        &self.mass
    }

    pub fn get(&self, index: u32) -> f64 {
        match &self.mass {
            Mass::Dense(d) => d.get(index as usize).copied().unwrap_or(0.0),
            Mass::Sparse(s) => s
                .binary_search_by_key(&index, |e| e.0)
                .map_or(0.0, |i| s[i].1),
        }
    }

    /// Positive entries by increasing vertex index.
    pub fn nonzero(&self) -> Box<dyn Iterator<Item = (u32, f64)> + '_> {
        match &self.mass {
            Mass::Dense(d) => Box::new(
                d.iter()
                    .enumerate()
                    .filter(|(_, w)| **w > 0.0)
                    .map(|(i, &w)| (i as u32, w)),
            ),
            Mass::Sparse(s) => Box::new(s.iter().copied()),
        }
    }

    pub fn support_len(&self) -> usize {
        match &self.mass {
            Mass::Dense(d) => d.iter().filter(|w| **w > 0.0).count(),
            Mass::Sparse(s) => s.len(),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match &self.mass {
            Mass::Dense(d) => d.clone(),
            Mass::Sparse(s) => {
                let mut dense = vec![0.0; self.cardinality as usize];
                for &(i, w) in s {
                    dense[i as usize] = w;
                }
                dense
            }
        }
    }

    pub fn total(&self) -> f64 {
        match &self.mass {
            Mass::Dense(d) => stable_sum(d.len(), d.iter().copied()),
            Mass::Sparse(s) => stable_sum(s.len(), s.iter().map(|e| e.1)),
        }
    }

    /// Mass on the sink of this type, zero for networks without sinks.
    pub fn sink_mass(&self, h: &Hin) -> f64 {
        h.sink(self.vertex_type).map_or(0.0, |s| self.get(s))
    }

    /// The positive entries as a distribution. Every true diversity of it equals that of the
    /// full vector, since zero entries never contribute.
    pub fn support_distribution(&self) -> Result<Distribution> {
        Distribution::new(self.nonzero().map(|e| e.1).collect())
    }

    /// The positive entries other than `excluded`, rescaled to sum to one.
    pub fn support_distribution_without(&self, excluded: u32) -> Result<Distribution> {
        Distribution::normalize(
            self.nonzero()
                .filter(|e| e.0 != excluded)
                .map(|e| e.1)
                .collect(),
        )
    }
}

/// Accumulates weighted contributions into either a dense vector or a sorted sparse list.
///
/// The sparse path uses a stable sort so every entry sums its contributions in the same
/// order as the dense path, which keeps both bit-identical.
enum Accumulator<T> {
    Dense(Vec<T>),
    Sparse(Vec<(u32, T)>),
}

impl<T: Copy + Default> Accumulator<T> {
    fn new(cardinality: u32, expected_contributions: usize) -> Self {
        if cardinality < DENSE_CARDINALITY_LIMIT
            || expected_contributions.saturating_mul(8) >= cardinality as usize
        {
            Accumulator::Dense(vec![T::default(); cardinality as usize])
        } else {
            Accumulator::Sparse(Vec::with_capacity(expected_contributions))
        }
    }

    fn add(&mut self, index: u32, value: T, plus: impl Fn(T, T) -> Result<T>) -> Result<()> {
        match self {
            Accumulator::Dense(d) => {
                let slot = &mut d[index as usize];
                *slot = plus(*slot, value)?;
            }
            Accumulator::Sparse(s) => s.push((index, value)),
        }
        Ok(())
    }

    /// Entries by increasing index, keeping only those for which `keep` holds.
    fn finish(
        self,
        plus: impl Fn(T, T) -> Result<T>,
        keep: impl Fn(&T) -> bool,
    ) -> Result<Vec<(u32, T)>> {
        match self {
            Accumulator::Dense(d) => Ok(d
                .into_iter()
                .enumerate()
                .filter(|(_, v)| keep(v))
                .map(|(i, v)| (i as u32, v))
                .collect()),
            Accumulator::Sparse(mut s) => {
                s.sort_by_key(|e| e.0);
                let mut merged: Vec<(u32, T)> = Vec::with_capacity(s.len());
                for (i, v) in s {
                    match merged.last_mut() {
                        Some(last) if last.0 == i => last.1 = plus(last.1, v)?,
                        _ => merged.push((i, plus(T::default(), v)?)),
                    }
                }
                merged.retain(|e| keep(&e.1));
                Ok(merged)
            }
        }
    }
}

fn add_f64(a: f64, b: f64) -> Result<f64> {
    Ok(a + b)
}

fn add_u64(a: u64, b: u64) -> Result<u64> {
    a.checked_add(b).ok_or(Error::Overflow)
}

fn edge_label(h: &Hin, step: EdgeStep) -> String {
    let name = &h.edge_types()[step.edge_type.0 as usize].name;
    match step.direction {
        Direction::Forward => name.clone(),
        Direction::Transposed => format!("{name}^T"),
    }
}

fn walkability(h: &Hin, step: EdgeStep, vertex: u32) -> Error {
    Error::Walkability {
        edge_type: edge_label(h, step),
        vertex_type: h.vertex_types()[h.step_source(step).0 as usize].name.clone(),
        vertex,
    }
}

/// Where a vertex with no stored edge along `step` sends its mass: the destination sink in
/// augmented networks (transposed steps can dangle there), nowhere otherwise.
fn implicit_sink(h: &Hin, step: EdgeStep) -> Option<u32> {
    h.sink(h.step_target(step))
}

/// Pushes `input` through the transition kernel of `step`.
fn push_step(h: &Hin, step: EdgeStep, input: &VertexDistribution) -> Result<VertexDistribution> {
    let adjacency = h.adjacency(step);
    let target = h.step_target(step);
    let cardinality = h.cardinality(target);
    let expected: usize = input
        .nonzero()
        .map(|(v, _)| adjacency.row(v).0.len().max(1))
        .sum();
    let mut acc = Accumulator::<f64>::new(cardinality, expected);
    for (v, m) in input.nonzero() {
        let degree = adjacency.degree(v);
        if degree == 0 {
            let sink = implicit_sink(h, step).ok_or_else(|| walkability(h, step, v))?;
            acc.add(sink, m, add_f64)?;
            continue;
        }
        let scale = m / degree as f64;
        let (nbrs, counts) = adjacency.row(v);
        for (&u, &c) in nbrs.iter().zip(counts) {
            acc.add(u, scale * c as f64, add_f64)?;
        }
    }
    let entries = acc.finish(add_f64, |w| *w > 0.0)?;
    Ok(VertexDistribution::from_entries(target, cardinality, entries))
}

fn check_start(h: &Hin, path: &MetaPath, start: &VertexDistribution) -> Result<()> {
    if start.vertex_type != path.source() {
        return Err(Error::Domain(format!(
            "start distribution is over `{}` but the meta path starts at `{}`",
            h.vertex_type(start.vertex_type)?.name,
            h.vertex_types()[path.source().0 as usize].name
        )));
    }
    if start.cardinality != h.cardinality(path.source()) {
        return Err(Error::Dimension {
            left: start.cardinality as usize,
            right: h.cardinality(path.source()) as usize,
        });
    }
    Ok(())
}

fn check_vertex(h: &Hin, v: VertexId, ty: VertexTypeId, role: &str) -> Result<()> {
    if v.vertex_type != ty {
        return Err(Error::Domain(format!(
            "{role} vertex must be of type `{}`, got type `{}`",
            h.vertex_types()[ty.0 as usize].name,
            h.vertex_type(v.vertex_type)?.name
        )));
    }
    if v.index >= h.cardinality(ty) {
        return Err(Error::OutOfRange(format!(
            "vertex {} of `{}`",
            v.index,
            h.vertex_types()[ty.0 as usize].name
        )));
    }
    Ok(())
}

/// `p_E(. | v)`: one step of the walk along `e` from `v`.
pub fn transition_distribution(h: &Hin, e: EdgeTypeId, v: VertexId) -> Result<VertexDistribution> {
    let step = EdgeStep::forward(e);
    h.edge_type(e)?;
    check_vertex(h, v, h.step_source(step), "source")?;
    push_step(h, step, &VertexDistribution::point(h, v)?)
}

/// The distribution of the walk's last vertex when its first vertex is drawn from `start`.
pub fn propagate(h: &Hin, path: &MetaPath, start: &VertexDistribution) -> Result<VertexDistribution> {
    check_start(h, path, start)?;
    let mut current = push_step(h, path.steps[0], start)?;
    for &step in &path.steps[1..] {
        current = push_step(h, step, &current)?;
    }
    Ok(current)
}

/// Like [`propagate`], also returning the distribution reached after every step.
pub fn propagate_trace(
    h: &Hin,
    path: &MetaPath,
    start: &VertexDistribution,
) -> Result<Vec<VertexDistribution>> {
    check_start(h, path, start)?;
    let mut trace = vec![start.clone()];
    for &step in &path.steps {
        let next = push_step(h, step, trace.last().unwrap())?;
        trace.push(next);
    }
    Ok(trace)
}

/// The distribution of the walk's last vertex given that it starts at `v0`.
pub fn conditional_distribution(h: &Hin, path: &MetaPath, v0: VertexId) -> Result<VertexDistribution> {
    check_vertex(h, v0, path.source(), "starting")?;
    propagate(h, path, &VertexDistribution::point(h, v0)?)
}

/// `Pr(X_k = vk | X_0 = v0)` for every `v0` that reaches `vk`, by increasing `v0`.
///
/// Runs the kernels backwards from `vk`, touching only predecessors.
pub fn arrival_probabilities(h: &Hin, path: &MetaPath, vk: VertexId) -> Result<Vec<(u32, f64)>> {
    check_vertex(h, vk, path.target(), "ending")?;
    let mut column: Vec<(u32, f64)> = vec![(vk.index, 1.0)];
    for &step in path.steps.iter().rev() {
        let forward = h.adjacency(step);
        let backward = h.adjacency(step.transpose());
        let source = h.step_source(step);
        let cardinality = h.cardinality(source);
        let sink = implicit_sink(h, step);
        let expected: usize = column.iter().map(|&(w, _)| backward.row(w).0.len()).sum();
        let mut acc = Accumulator::<f64>::new(cardinality, expected);
        for &(w, value) in &column {
            let (preds, counts) = backward.row(w);
            for (&u, &c) in preds.iter().zip(counts) {
                acc.add(u, value * c as f64 / forward.degree(u) as f64, add_f64)?;
            }
            if Some(w) == sink {
                for &u in forward.dangling() {
                    acc.add(u, value, add_f64)?;
                }
            }
        }
        column = acc.finish(add_f64, |x| *x > 0.0)?;
    }
    Ok(column)
}

/// Number of concrete paths of `path` from `v0` to every reachable vertex, by increasing index.
pub fn project_row(h: &Hin, path: &MetaPath, v0: VertexId) -> Result<Vec<(u32, u64)>> {
    check_vertex(h, v0, path.source(), "starting")?;
    let mut row: Vec<(u32, u64)> = vec![(v0.index, 1)];
    for &step in &path.steps {
        let adjacency = h.adjacency(step);
        let cardinality = h.cardinality(h.step_target(step));
        let sink = implicit_sink(h, step);
        let expected: usize = row.iter().map(|&(v, _)| adjacency.row(v).0.len().max(1)).sum();
        let mut acc = Accumulator::<u64>::new(cardinality, expected);
        for &(v, count) in &row {
            if adjacency.degree(v) == 0 {
                if let Some(s) = sink {
                    acc.add(s, count, add_u64)?;
                }
                continue;
            }
            let (nbrs, mults) = adjacency.row(v);
            for (&u, &m) in nbrs.iter().zip(mults) {
                acc.add(u, count.checked_mul(m).ok_or(Error::Overflow)?, add_u64)?;
            }
        }
        row = acc.finish(add_u64, |c| *c > 0)?;
    }
    Ok(row)
}

/// Materializes the projection of `path`: one edge per concrete path from its source type to
/// its target type. Rows are computed in parallel.
pub fn project(h: &Hin, path: &MetaPath) -> Result<EdgeTable> {
    let source = path.source();
    let rows: Vec<Vec<(u32, u64)>> = (0..h.cardinality(source))
        .into_par_iter()
        .map(|v| project_row(h, path, VertexId::new(source, v)))
        .collect::<Result<_>>()?;
    let triples = rows
        .into_iter()
        .enumerate()
        .flat_map(|(v, row)| row.into_iter().map(move |(u, c)| (v as u32, u, c)))
        .collect();
    EdgeTable::from_triples(h.cardinality(source), h.cardinality(path.target()), triples)
}

/// Adds the projection of `path` to a copy of `h` as a new edge type named `name`.
pub fn project_into(h: &Hin, path: &MetaPath, name: &str) -> Result<(Hin, EdgeTypeId)> {
    let table = project(h, path)?;
    h.with_edge_type(name, path.source(), path.target(), table)
}
