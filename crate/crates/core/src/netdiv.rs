//! Network diversity measures along meta paths.
//!
//! [`NetworkDiversity`] evaluates every measure for several orders at once, so that each walk
//! is propagated a single time. The free functions at the bottom of the module are
//! single-order shorthands with the default sink policy.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::divmath::{relative_true_diversity, true_diversity, AlphaOrder, Distribution};
use crate::error::{Error, Result};
use crate::hin::{Hin, VertexId, VertexTypeId};
use crate::walk::{
    arrival_probabilities, conditional_distribution, project_row, propagate, MetaPath,
    VertexDistribution,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    Collective,
    Individual,
    MeanIndividual,
    RelativeIndividual,
    RelativeCollective,
    BackwardTranspose,
    BackwardPosterior,
    MeanBackwardTranspose,
    MeanBackwardPosterior,
    Projected,
}

/// Which end of the meta path a conditioning vertex belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Source,
    Target,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 10] = [
        MeasureKind::Collective,
        MeasureKind::Individual,
        MeasureKind::MeanIndividual,
        MeasureKind::RelativeIndividual,
        MeasureKind::RelativeCollective,
        MeasureKind::BackwardTranspose,
        MeasureKind::BackwardPosterior,
        MeasureKind::MeanBackwardTranspose,
        MeasureKind::MeanBackwardPosterior,
        MeasureKind::Projected,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::Collective => "collective",
            MeasureKind::Individual => "individual",
            MeasureKind::MeanIndividual => "mean-individual",
            MeasureKind::RelativeIndividual => "relative-individual",
            MeasureKind::RelativeCollective => "relative-collective",
            MeasureKind::BackwardTranspose => "backward-transpose",
            MeasureKind::BackwardPosterior => "backward-posterior",
            MeasureKind::MeanBackwardTranspose => "mean-backward-transpose",
            MeasureKind::MeanBackwardPosterior => "mean-backward-posterior",
            MeasureKind::Projected => "projected",
        }
    }

    /// The endpoint of the conditioning vertex for single-vertex measures, `None` otherwise.
    pub fn conditioning_endpoint(self) -> Option<Endpoint> {
        match self {
            MeasureKind::Individual | MeasureKind::RelativeIndividual | MeasureKind::Projected => {
                Some(Endpoint::Source)
            }
            MeasureKind::BackwardTranspose | MeasureKind::BackwardPosterior => Some(Endpoint::Target),
            _ => None,
        }
    }

    pub fn requires_vertex(self) -> bool {
        self.conditioning_endpoint().is_some()
    }

    /// Whether the measure depends on a start distribution.
    pub fn uses_start(self) -> bool {
        !matches!(
            self,
            MeasureKind::Individual | MeasureKind::BackwardTranspose | MeasureKind::Projected
        )
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        MeasureKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| Error::UnknownName {
                kind: "measure",
                name: s.to_string(),
            })
    }
}

/// Whether the sink vertex counts as a type when measuring a distribution.
///
/// Sink mass is always reported separately. Under `Exclude` the sink entry is dropped and the
/// rest rescaled, unless the sink holds all of the mass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SinkPolicy {
    #[default]
    Exclude,
    Include,
}

/// The distribution of the walk's first vertex.
#[derive(Clone, Debug, PartialEq)]
pub enum Start {
    /// Uniform over the non-sink vertices of the source type.
    Uniform,
    /// Uniform over the listed vertex indices.
    UniformSubset(Vec<u32>),
    Explicit(VertexDistribution),
}

impl Start {
    pub fn resolve(&self, h: &Hin, ty: VertexTypeId) -> Result<VertexDistribution> {
        match self {
            Start::Uniform => VertexDistribution::uniform(h, ty),
            Start::UniformSubset(indices) => VertexDistribution::uniform_subset(h, ty, indices),
            Start::Explicit(d) => {
                if d.vertex_type() != ty {
                    return Err(Error::Domain(format!(
                        "start distribution is over `{}`, expected `{}`",
                        h.vertex_type(d.vertex_type())?.name,
                        h.vertex_type(ty)?.name
                    )));
                }
                Ok(d.clone())
            }
        }
    }
}

/// One computed measure value with everything needed to reproduce it.
#[derive(Clone, Debug, PartialEq)]
pub struct DiversityReport {
    pub kind: MeasureKind,
    pub metapath: MetaPath,
    pub alpha: AlphaOrder,
    pub conditioning: Option<VertexId>,
    pub start: Option<Start>,
    /// Comparison walk of relative collective diversities.
    pub baseline: Option<(MetaPath, Start)>,
    pub value: f64,
    /// Probability the measured distribution places on the sink.
    pub sink_mass: f64,
}

/// Evaluates network diversity measures on one network.
#[derive(Clone, Copy, Debug)]
pub struct NetworkDiversity<'h> {
    hin: &'h Hin,
    sinks: SinkPolicy,
}

/// A distribution ready to be measured, with its sink mass.
struct Measured {
    dist: Distribution,
    sink_mass: f64,
}

impl Measured {
    fn values(&self, alphas: &[AlphaOrder]) -> Vec<f64> {
        alphas.iter().map(|&a| true_diversity(&self.dist, a)).collect()
    }
}

impl<'h> NetworkDiversity<'h> {
    pub fn new(hin: &'h Hin) -> Self {
        NetworkDiversity {
            hin,
            sinks: SinkPolicy::default(),
        }
    }

    pub fn with_sink_policy(mut self, sinks: SinkPolicy) -> Self {
        self.sinks = sinks;
        self
    }

    pub fn hin(&self) -> &'h Hin {
        self.hin
    }

    pub fn sink_policy(&self) -> SinkPolicy {
        self.sinks
    }

    fn measured(&self, d: &VertexDistribution) -> Result<Measured> {
        let sink_mass = d.sink_mass(self.hin);
        let dist = match (self.sinks, self.hin.sink(d.vertex_type())) {
            (SinkPolicy::Exclude, Some(s)) if sink_mass > 0.0 && d.support_len() > 1 => {
                d.support_distribution_without(s)?
            }
            _ => d.support_distribution()?,
        };
        Ok(Measured { dist, sink_mass })
    }

    /// Weights of `d` over its support after applying the sink policy, with their indices.
    fn policy_weights(&self, d: &VertexDistribution) -> Result<(Vec<u32>, Distribution)> {
        let sink = match self.sinks {
            SinkPolicy::Exclude => self.hin.sink(d.vertex_type()),
            SinkPolicy::Include => None,
        };
        // the sink goes only when something else has mass
        let drop = sink.is_some_and(|s| d.get(s) > 0.0) && d.support_len() > 1;
        let keep = |i: u32| !drop || Some(i) != sink;
        let (indices, weights): (Vec<u32>, Vec<f64>) = d.nonzero().filter(|e| keep(e.0)).unzip();
        let dist = if drop {
            Distribution::normalize(weights)?
        } else {
            Distribution::new(weights)?
        };
        Ok((indices, dist))
    }

    #[allow(clippy::too_many_arguments)]
    fn reports(
        &self,
        kind: MeasureKind,
        path: &MetaPath,
        alphas: &[AlphaOrder],
        conditioning: Option<VertexId>,
        start: Option<&Start>,
        values: Vec<f64>,
        sink_mass: f64,
    ) -> Vec<DiversityReport> {
        alphas
            .iter()
            .zip(values)
            .map(|(&alpha, value)| DiversityReport {
                kind,
                metapath: path.clone(),
                alpha,
                conditioning,
                start: start.cloned(),
                baseline: None,
                value,
                sink_mass,
            })
            .collect()
    }

    fn check_alphas(alphas: &[AlphaOrder]) -> Result<()> {
        if alphas.is_empty() {
            return Err(Error::InvalidAlpha("no order requested".into()));
        }
        Ok(())
    }

    /// Diversity of the walk's ending distribution when it starts from `start`.
    pub fn collective(
        &self,
        path: &MetaPath,
        start: &Start,
        alphas: &[AlphaOrder],
    ) -> Result<Vec<DiversityReport>> {
        Self::check_alphas(alphas)?;
        let s = start.resolve(self.hin, path.source())?;
        let m = self.measured(&propagate(self.hin, path, &s)?)?;
        let values = m.values(alphas);
        Ok(self.reports(MeasureKind::Collective, path, alphas, None, Some(start), values, m.sink_mass))
    }

    /// Diversity of the walk's ending distribution given that it starts at `v0`.
    pub fn individual(
        &self,
        path: &MetaPath,
        v0: VertexId,
        alphas: &[AlphaOrder],
    ) -> Result<Vec<DiversityReport>> {
        Self::check_alphas(alphas)?;
        let m = self.measured(&conditional_distribution(self.hin, path, v0)?)?;
        let values = m.values(alphas);
        Ok(self.reports(MeasureKind::Individual, path, alphas, Some(v0), None, values, m.sink_mass))
    }

    /// Start-weighted geometric mean of the individual diversities.
    pub fn mean_individual(
        &self,
        path: &MetaPath,
        start: &Start,
        alphas: &[AlphaOrder],
    ) -> Result<Vec<DiversityReport>> {
        Self::check_alphas(alphas)?;
        let s = start.resolve(self.hin, path.source())?;
        // every v0 with positive start mass, sink included
        let support: Vec<(u32, f64)> = s.nonzero().collect();
        let weights = Distribution::new(support.iter().map(|e| e.1).collect())?;
        let per_vertex: Vec<(Vec<f64>, f64)> = support
            .par_iter()
            .map(|&(v, _)| {
                let d = conditional_distribution(self.hin, path, VertexId::new(path.source(), v))?;
                let m = self.measured(&d)?;
                Ok((m.values(alphas), m.sink_mass))
            })
            .collect::<Result<_>>()?;
        let values = geometric_means(&per_vertex, &weights, alphas.len())?;
        let sink_mass = weighted_mean(per_vertex.iter().map(|e| e.1), &weights);
        Ok(self.reports(MeasureKind::MeanIndividual, path, alphas, None, Some(start), values, sink_mass))
    }

    /// Diversity of the walk from `v0` relative to the walk from `start`.
    pub fn relative_individual(
        &self,
        path: &MetaPath,
        v0: VertexId,
        start: &Start,
        alphas: &[AlphaOrder],
    ) -> Result<Vec<DiversityReport>> {
        Self::check_alphas(alphas)?;
        let s = start.resolve(self.hin, path.source())?;
        let q = propagate(self.hin, path, &s)?;
        let p = conditional_distribution(self.hin, path, v0)?;
        let (values, sink_mass) = self.relative_values(&p, &q, alphas)?;
        Ok(self.reports(
            MeasureKind::RelativeIndividual,
            path,
            alphas,
            Some(v0),
            Some(start),
            values,
            sink_mass,
        ))
    }

    /// Diversity of the walk along `path` from `start` relative to the walk along `baseline`
    /// from `baseline_start`. Both paths must end at the same vertex type.
    pub fn relative_collective(
        &self,
        path: &MetaPath,
        start: &Start,
        baseline: &MetaPath,
        baseline_start: &Start,
        alphas: &[AlphaOrder],
    ) -> Result<Vec<DiversityReport>> {
        Self::check_alphas(alphas)?;
        if path.target() != baseline.target() {
            return Err(Error::Domain(format!(
                "meta paths end at different vertex types `{}` and `{}`",
                self.hin.vertex_type(path.target())?.name,
                self.hin.vertex_type(baseline.target())?.name
            )));
        }
        let p = propagate(self.hin, path, &start.resolve(self.hin, path.source())?)?;
        let q = propagate(
            self.hin,
            baseline,
            &baseline_start.resolve(self.hin, baseline.source())?,
        )?;
        let (values, sink_mass) = self.relative_values(&p, &q, alphas)?;
        let mut reports = self.reports(
            MeasureKind::RelativeCollective,
            path,
            alphas,
            None,
            Some(start),
            values,
            sink_mass,
        );
        for r in &mut reports {
            r.baseline = Some((baseline.clone(), baseline_start.clone()));
        }
        Ok(reports)
    }

    /// Aligns `p` and `q` over the support of `q`, applies the sink policy to both and
    /// evaluates their relative diversities.
    fn relative_values(
        &self,
        p: &VertexDistribution,
        q: &VertexDistribution,
        alphas: &[AlphaOrder],
    ) -> Result<(Vec<f64>, f64)> {
        if let Some((index, _)) = p.nonzero().find(|&(i, _)| q.get(i) == 0.0) {
            return Err(Error::AbsoluteContinuity {
                index: index as usize,
            });
        }
        let sink_mass = p.sink_mass(self.hin);
        let sink = match self.sinks {
            SinkPolicy::Exclude => self.hin.sink(q.vertex_type()),
            SinkPolicy::Include => None,
        };
        let drop_sink = sink.is_some_and(|s| {
            let p_elsewhere = p.nonzero().any(|e| e.0 != s);
            q.get(s) > 0.0 && q.support_len() > 1 && p_elsewhere
        });
        let support: Vec<u32> = q
            .nonzero()
            .map(|e| e.0)
            .filter(|&i| !(drop_sink && Some(i) == sink))
            .collect();
        let build = |d: &VertexDistribution| -> Result<Distribution> {
            let w: Vec<f64> = support.iter().map(|&i| d.get(i)).collect();
            if drop_sink {
                Distribution::normalize(w)
            } else {
                Distribution::new(w)
            }
        };
        let (pd, qd) = (build(p)?, build(q)?);
        let values = alphas
            .iter()
            .map(|&a| relative_true_diversity(&pd, &qd, a))
            .collect::<Result<_>>()?;
        Ok((values, sink_mass))
    }

    /// Diversity of the transposed walk from `vk` back to the source type.
    pub fn backward_transpose(
        &self,
        path: &MetaPath,
        vk: VertexId,
        alphas: &[AlphaOrder],
    ) -> Result<Vec<DiversityReport>> {
        Self::check_alphas(alphas)?;
        let back = conditional_distribution(self.hin, &path.transpose(), vk)?;
        let m = self.measured(&back)?;
        let values = m.values(alphas);
        Ok(self.reports(MeasureKind::BackwardTranspose, path, alphas, Some(vk), None, values, m.sink_mass))
    }

    /// Diversity of the posterior `Pr(X_0 | X_k = vk)` of the forward walk from `start`.
    pub fn backward_posterior(
        &self,
        path: &MetaPath,
        vk: VertexId,
        start: &Start,
        alphas: &[AlphaOrder],
    ) -> Result<Vec<DiversityReport>> {
        Self::check_alphas(alphas)?;
        let prior = start.resolve(self.hin, path.source())?;
        let ending = propagate(self.hin, path, &prior)?;
        let m = self.posterior(path, &prior, &ending, vk)?;
        let values = m.values(alphas);
        Ok(self.reports(
            MeasureKind::BackwardPosterior,
            path,
            alphas,
            Some(vk),
            Some(start),
            values,
            m.sink_mass,
        ))
    }

    fn posterior(
        &self,
        path: &MetaPath,
        prior: &VertexDistribution,
        ending: &VertexDistribution,
        vk: VertexId,
    ) -> Result<Measured> {
        if vk.vertex_type == path.target() && ending.get(vk.index) == 0.0 {
            return Err(Error::ZeroProbability(format!(
                "vertex {} of `{}` is never reached from the start distribution",
                vk.index,
                self.hin.vertex_type(vk.vertex_type)?.name
            )));
        }
        let column = arrival_probabilities(self.hin, path, vk)?;
        let joint: Vec<(u32, f64)> = column
            .into_iter()
            .map(|(v, c)| (v, prior.get(v) * c))
            .filter(|e| e.1 > 0.0)
            .collect();
        self.measured_entries(path.source(), joint)
    }

    /// Normalizes positive `entries` over `ty` and applies the sink policy.
    fn measured_entries(&self, ty: VertexTypeId, entries: Vec<(u32, f64)>) -> Result<Measured> {
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::ZeroProbability("no mass to condition on".into()));
        }
        let sink = self.hin.sink(ty);
        let sink_mass = sink.map_or(0.0, |s| {
            entries.iter().find(|e| e.0 == s).map_or(0.0, |e| e.1) / total
        });
        let weights: Vec<f64> = match (self.sinks, sink) {
            (SinkPolicy::Exclude, Some(s)) if sink_mass > 0.0 && entries.len() > 1 => {
                entries.iter().filter(|e| e.0 != s).map(|e| e.1).collect()
            }
            _ => entries.iter().map(|e| e.1).collect(),
        };
        Ok(Measured {
            dist: Distribution::normalize(weights)?,
            sink_mass,
        })
    }

    /// Weighted geometric mean of backward diversities, weighted by the ending distribution.
    pub fn mean_backward_transpose(
        &self,
        path: &MetaPath,
        start: &Start,
        alphas: &[AlphaOrder],
    ) -> Result<Vec<DiversityReport>> {
        Self::check_alphas(alphas)?;
        let s = start.resolve(self.hin, path.source())?;
        let ending = propagate(self.hin, path, &s)?;
        let (indices, weights) = self.policy_weights(&ending)?;
        let transposed = path.transpose();
        let per_vertex: Vec<(Vec<f64>, f64)> = indices
            .par_iter()
            .map(|&k| {
                let d = conditional_distribution(self.hin, &transposed, VertexId::new(path.target(), k))?;
                let m = self.measured(&d)?;
                Ok((m.values(alphas), m.sink_mass))
            })
            .collect::<Result<_>>()?;
        let values = geometric_means(&per_vertex, &weights, alphas.len())?;
        let sink_mass = weighted_mean(per_vertex.iter().map(|e| e.1), &weights);
        Ok(self.reports(
            MeasureKind::MeanBackwardTranspose,
            path,
            alphas,
            None,
            Some(start),
            values,
            sink_mass,
        ))
    }

    /// Weighted geometric mean of posterior backward diversities.
    ///
    /// The joint distribution of first and last vertex is assembled from one forward
    /// conditional per starting vertex, then read column by column.
    pub fn mean_backward_posterior(
        &self,
        path: &MetaPath,
        start: &Start,
        alphas: &[AlphaOrder],
    ) -> Result<Vec<DiversityReport>> {
        Self::check_alphas(alphas)?;
        let s = start.resolve(self.hin, path.source())?;
        let support: Vec<(u32, f64)> = s.nonzero().collect();
        let rows: Vec<Vec<(u32, u32, f64)>> = support
            .par_iter()
            .map(|&(v, w)| {
                let d = conditional_distribution(self.hin, path, VertexId::new(path.source(), v))?;
                Ok(d.nonzero().map(|(k, p)| (k, v, w * p)).collect())
            })
            .collect::<Result<_>>()?;
        let mut joint: Vec<(u32, u32, f64)> = rows.into_iter().flatten().filter(|e| e.2 > 0.0).collect();
        joint.sort_by_key(|e| (e.0, e.1));

        let mut columns: Vec<(u32, Vec<(u32, f64)>)> = Vec::new();
        for (k, v, p) in joint {
            match columns.last_mut() {
                Some((last, col)) if *last == k => col.push((v, p)),
                _ => columns.push((k, vec![(v, p)])),
            }
        }
        let ending_weights: Vec<(u32, f64)> = columns
            .iter()
            .map(|(k, col)| (*k, col.iter().map(|e| e.1).sum()))
            .collect();
        let target_sink = match self.sinks {
            SinkPolicy::Exclude => self.hin.sink(path.target()),
            SinkPolicy::Include => None,
        };
        let sink_weight: f64 = ending_weights
            .iter()
            .filter(|e| Some(e.0) == target_sink)
            .map(|e| e.1)
            .sum();
        let drop_sink = sink_weight > 0.0 && columns.len() > 1;
        let kept: Vec<usize> = (0..columns.len())
            .filter(|&i| !(drop_sink && Some(columns[i].0) == target_sink))
            .collect();
        let weights = Distribution::normalize(kept.iter().map(|&i| ending_weights[i].1).collect())?;
        let per_vertex: Vec<(Vec<f64>, f64)> = kept
            .par_iter()
            .map(|&i| {
                let m = self.measured_entries(path.source(), columns[i].1.clone())?;
                Ok((m.values(alphas), m.sink_mass))
            })
            .collect::<Result<_>>()?;
        let values = geometric_means(&per_vertex, &weights, alphas.len())?;
        let sink_mass = weighted_mean(per_vertex.iter().map(|e| e.1), &weights);
        Ok(self.reports(
            MeasureKind::MeanBackwardPosterior,
            path,
            alphas,
            None,
            Some(start),
            values,
            sink_mass,
        ))
    }

    /// Diversity of the path-count projection row of `v0`.
    pub fn projected(
        &self,
        path: &MetaPath,
        v0: VertexId,
        alphas: &[AlphaOrder],
    ) -> Result<Vec<DiversityReport>> {
        Self::check_alphas(alphas)?;
        let row = project_row(self.hin, path, v0)?;
        if row.is_empty() {
            return Err(Error::ZeroProbability(format!(
                "vertex {} starts no instance of the meta path",
                v0.index
            )));
        }
        let entries = row.into_iter().map(|(k, c)| (k, c as f64)).collect();
        let m = self.measured_entries(path.target(), entries)?;
        let values = m.values(alphas);
        Ok(self.reports(MeasureKind::Projected, path, alphas, Some(v0), None, values, m.sink_mass))
    }

    /// Evaluates any measure. `vertex` must be given exactly for single-vertex measures.
    pub fn measure(
        &self,
        kind: MeasureKind,
        path: &MetaPath,
        vertex: Option<VertexId>,
        start: &Start,
        alphas: &[AlphaOrder],
    ) -> Result<Vec<DiversityReport>> {
        let v = match (kind.requires_vertex(), vertex) {
            (true, Some(v)) => Some(v),
            (false, None) => None,
            (true, None) => {
                return Err(Error::Domain(format!("measure `{kind}` needs a vertex")));
            }
            (false, Some(_)) => {
                return Err(Error::Domain(format!("measure `{kind}` takes no vertex")));
            }
        };
        match kind {
            MeasureKind::Collective => self.collective(path, start, alphas),
            MeasureKind::Individual => self.individual(path, v.unwrap(), alphas),
            MeasureKind::MeanIndividual => self.mean_individual(path, start, alphas),
            MeasureKind::RelativeIndividual => self.relative_individual(path, v.unwrap(), start, alphas),
            MeasureKind::RelativeCollective => Err(Error::Domain(
                "relative collective diversity needs a baseline walk".into(),
            )),
            MeasureKind::BackwardTranspose => self.backward_transpose(path, v.unwrap(), alphas),
            MeasureKind::BackwardPosterior => self.backward_posterior(path, v.unwrap(), start, alphas),
            MeasureKind::MeanBackwardTranspose => self.mean_backward_transpose(path, start, alphas),
            MeasureKind::MeanBackwardPosterior => self.mean_backward_posterior(path, start, alphas),
            MeasureKind::Projected => self.projected(path, v.unwrap(), alphas),
        }
    }

    /// Evaluates a single-vertex measure for every vertex of its conditioning endpoint, sinks
    /// excluded unless `include_sinks` is set. Reports come back grouped by vertex in
    /// increasing index order, then by order of `alphas`.
    ///
    /// Posterior sweeps skip vertices the start distribution never reaches.
    pub fn sweep(
        &self,
        kind: MeasureKind,
        path: &MetaPath,
        start: &Start,
        alphas: &[AlphaOrder],
        include_sinks: bool,
    ) -> Result<Vec<DiversityReport>> {
        Self::check_alphas(alphas)?;
        let endpoint = kind.conditioning_endpoint().ok_or_else(|| {
            Error::Domain(format!("measure `{kind}` is not a per-vertex measure"))
        })?;
        let ty = match endpoint {
            Endpoint::Source => path.source(),
            Endpoint::Target => path.target(),
        };
        let n = if include_sinks {
            self.hin.cardinality(ty)
        } else {
            self.hin.real_cardinality(ty)
        };
        // shared walks, computed once for the whole sweep
        let (prior, ending) = match kind {
            MeasureKind::BackwardPosterior | MeasureKind::RelativeIndividual => {
                let prior = start.resolve(self.hin, path.source())?;
                let ending = propagate(self.hin, path, &prior)?;
                (Some(prior), Some(ending))
            }
            _ => (None, None),
        };
        let transposed = path.transpose();
        let per_vertex: Vec<Option<Vec<DiversityReport>>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let v = VertexId::new(ty, i);
                match kind {
                    MeasureKind::Individual => self.individual(path, v, alphas).map(Some),
                    MeasureKind::Projected => self.projected(path, v, alphas).map(Some),
                    MeasureKind::BackwardTranspose => {
                        let m = self.measured(&conditional_distribution(self.hin, &transposed, v)?)?;
                        let values = m.values(alphas);
                        Ok(Some(self.reports(kind, path, alphas, Some(v), None, values, m.sink_mass)))
                    }
                    MeasureKind::BackwardPosterior => {
                        let ending = ending.as_ref().unwrap();
                        if ending.get(i) == 0.0 {
                            return Ok(None);
                        }
                        let m = self.posterior(path, prior.as_ref().unwrap(), ending, v)?;
                        let values = m.values(alphas);
                        Ok(Some(self.reports(kind, path, alphas, Some(v), Some(start), values, m.sink_mass)))
                    }
                    MeasureKind::RelativeIndividual => {
                        let p = conditional_distribution(self.hin, path, v)?;
                        let (values, sink_mass) =
                            self.relative_values(&p, ending.as_ref().unwrap(), alphas)?;
                        Ok(Some(self.reports(kind, path, alphas, Some(v), Some(start), values, sink_mass)))
                    }
                    _ => unreachable!("non per-vertex measures are rejected above"),
                }
            })
            .collect::<Result<_>>()?;
        Ok(per_vertex.into_iter().flatten().flatten().collect())
    }
}

/// Per-order weighted geometric means of per-vertex values.
fn geometric_means(
    per_vertex: &[(Vec<f64>, f64)],
    weights: &Distribution,
    orders: usize,
) -> Result<Vec<f64>> {
    (0..orders)
        .map(|j| {
            let column: Vec<f64> = per_vertex.iter().map(|e| e.0[j]).collect();
            crate::divmath::weighted_geometric_mean(&column, weights)
        })
        .collect()
}

fn weighted_mean(values: impl Iterator<Item = f64>, weights: &Distribution) -> f64 {
    values.zip(weights.weights()).map(|(v, w)| v * w).sum()
}

fn single(reports: Result<Vec<DiversityReport>>) -> Result<DiversityReport> {
    reports.map(|mut r| r.remove(0))
}

pub fn collective_diversity(h: &Hin, path: &MetaPath, start: &Start, alpha: AlphaOrder) -> Result<DiversityReport> {
    single(NetworkDiversity::new(h).collective(path, start, &[alpha]))
}

pub fn individual_diversity(h: &Hin, path: &MetaPath, v0: VertexId, alpha: AlphaOrder) -> Result<DiversityReport> {
    single(NetworkDiversity::new(h).individual(path, v0, &[alpha]))
}

pub fn mean_individual_diversity(
    h: &Hin,
    path: &MetaPath,
    start: &Start,
    alpha: AlphaOrder,
) -> Result<DiversityReport> {
    single(NetworkDiversity::new(h).mean_individual(path, start, &[alpha]))
}

pub fn relative_individual_diversity(
    h: &Hin,
    path: &MetaPath,
    v0: VertexId,
    start: &Start,
    alpha: AlphaOrder,
) -> Result<DiversityReport> {
    single(NetworkDiversity::new(h).relative_individual(path, v0, start, &[alpha]))
}

pub fn relative_collective_diversity(
    h: &Hin,
    path: &MetaPath,
    baseline: &MetaPath,
    start: &Start,
    baseline_start: &Start,
    alpha: AlphaOrder,
) -> Result<DiversityReport> {
    single(NetworkDiversity::new(h).relative_collective(path, start, baseline, baseline_start, &[alpha]))
}

pub fn backward_diversity_transpose(
    h: &Hin,
    path: &MetaPath,
    vk: VertexId,
    alpha: AlphaOrder,
) -> Result<DiversityReport> {
    single(NetworkDiversity::new(h).backward_transpose(path, vk, &[alpha]))
}

pub fn backward_diversity_posterior(
    h: &Hin,
    path: &MetaPath,
    vk: VertexId,
    start: &Start,
    alpha: AlphaOrder,
) -> Result<DiversityReport> {
    single(NetworkDiversity::new(h).backward_posterior(path, vk, start, &[alpha]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackwardSemantics {
    Transpose,
    Posterior,
}

pub fn mean_backward_diversity(
    h: &Hin,
    path: &MetaPath,
    start: &Start,
    alpha: AlphaOrder,
    semantics: BackwardSemantics,
) -> Result<DiversityReport> {
    let nd = NetworkDiversity::new(h);
    single(match semantics {
        BackwardSemantics::Transpose => nd.mean_backward_transpose(path, start, &[alpha]),
        BackwardSemantics::Posterior => nd.mean_backward_posterior(path, start, &[alpha]),
    })
}

pub fn projected_diversity(h: &Hin, path: &MetaPath, v0: VertexId, alpha: AlphaOrder) -> Result<DiversityReport> {
    single(NetworkDiversity::new(h).projected(path, v0, &[alpha]))
}
