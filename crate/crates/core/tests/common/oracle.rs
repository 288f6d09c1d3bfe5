//! Exact brute-force evaluation by enumerating every concrete walk in rational arithmetic.
//!
//! Parallel edges are expanded into separate edges and the sink augmentation is rebuilt
//! here from the raw edge lists, so nothing is shared with the library beyond the input.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use hindiv::AlphaOrder;

use super::generate::RawNet;

pub type Q = BigRational;

pub fn q(n: u64, d: u64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap()
}

/// Walk steps as `(edge type, transposed)`.
pub type Steps = [(usize, bool)];

pub struct Oracle {
    /// Cardinalities including the sink, which is always the last vertex.
    pub cards: Vec<u32>,
    types: Vec<(usize, usize)>,
    /// Per edge type and source vertex, one entry per parallel edge.
    forward: Vec<Vec<Vec<u32>>>,
    backward: Vec<Vec<Vec<u32>>>,
}

/// Rows of a walk: for every first vertex, the exact ending distribution and the number of
/// concrete walks reaching each ending vertex.
pub struct PathTable {
    pub probs: Vec<Vec<Q>>,
    pub counts: Vec<Vec<u64>>,
}

impl Oracle {
    pub fn new(raw: &RawNet) -> Oracle {
        let cards: Vec<u32> = raw.cards.iter().map(|c| c + 1).collect();
        let mut forward = Vec::new();
        let mut backward = Vec::new();
        for (e, &(s, d)) in raw.edge_types.iter().enumerate() {
            let mut out: Vec<Vec<u32>> = vec![Vec::new(); cards[s] as usize];
            for &(u, v, m) in &raw.edges[e] {
                for _ in 0..m {
                    out[u as usize].push(v);
                }
            }
            let (sink_s, sink_d) = (raw.cards[s], raw.cards[d]);
            for u in 0..sink_s {
                if out[u as usize].is_empty() {
                    out[u as usize].push(sink_d);
                }
            }
            out[sink_s as usize].push(sink_d);
            let mut inc: Vec<Vec<u32>> = vec![Vec::new(); cards[d] as usize];
            for (u, targets) in out.iter().enumerate() {
                for &v in targets {
                    inc[v as usize].push(u as u32);
                }
            }
            forward.push(out);
            backward.push(inc);
        }
        Oracle {
            cards,
            types: raw.edge_types.clone(),
            forward,
            backward,
        }
    }

    pub fn sink(&self, ty: usize) -> usize {
        self.cards[ty] as usize - 1
    }

    pub fn step_types(&self, (e, transposed): (usize, bool)) -> (usize, usize) {
        let (s, d) = self.types[e];
        if transposed {
            (d, s)
        } else {
            (s, d)
        }
    }

    pub fn source(&self, steps: &Steps) -> usize {
        self.step_types(steps[0]).0
    }

    pub fn target(&self, steps: &Steps) -> usize {
        self.step_types(*steps.last().unwrap()).1
    }

    fn neighbours(&self, (e, transposed): (usize, bool), v: u32) -> &[u32] {
        let lists = if transposed { &self.backward[e] } else { &self.forward[e] };
        &lists[v as usize]
    }

    fn enumerate(&self, steps: &Steps, v: u32, denominator: u128, hits: &mut Vec<(u32, u128)>) {
        let Some((&step, rest)) = steps.split_first() else {
            hits.push((v, denominator));
            return;
        };
        let next = self.neighbours(step, v);
        if next.is_empty() {
            // a transposed step from a vertex nobody points to ends in the sink
            let sink = self.sink(self.step_types(step).1) as u32;
            self.enumerate(rest, sink, denominator, hits);
            return;
        }
        for &w in next {
            self.enumerate(rest, w, denominator * next.len() as u128, hits);
        }
    }

    pub fn table(&self, steps: &Steps) -> PathTable {
        let (src, tgt) = (self.source(steps), self.target(steps));
        let n_tgt = self.cards[tgt] as usize;
        let mut probs = Vec::new();
        let mut counts = Vec::new();
        for v0 in 0..self.cards[src] {
            let mut hits = Vec::new();
            self.enumerate(steps, v0, 1, &mut hits);
            let mut p = vec![Q::zero(); n_tgt];
            let mut c = vec![0u64; n_tgt];
            for (vk, den) in hits {
                p[vk as usize] += Q::new(BigInt::one(), BigInt::from(den));
                c[vk as usize] += 1;
            }
            probs.push(p);
            counts.push(c);
        }
        PathTable { probs, counts }
    }

    /// Sum of rows weighted by `start`.
    pub fn propagate(&self, table: &PathTable, start: &[Q]) -> Vec<Q> {
        let n = table.probs.first().map_or(0, Vec::len);
        let mut out = vec![Q::zero(); n];
        for (w, row) in start.iter().zip(&table.probs) {
            if w.is_zero() {
                continue;
            }
            for (o, p) in out.iter_mut().zip(row) {
                *o += w * p;
            }
        }
        out
    }
}

pub fn uniform_real(n_with_sink: usize) -> Vec<Q> {
    let real = n_with_sink as u64 - 1;
    let mut v: Vec<Q> = (0..real).map(|_| q(1, real)).collect();
    v.push(Q::zero());
    v
}

pub fn normalized_counts(counts: &[u64]) -> Vec<Q> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| q(c, total)).collect()
}

/// A distribution prepared for measurement: positive weights in index order and the mass
/// the unprepared distribution placed on the sink.
pub struct Measured {
    pub indices: Vec<usize>,
    pub weights: Vec<Q>,
    pub sink_mass: Q,
}

/// Drops the sink and rescales when it holds some but not all of the mass.
pub fn exclude_sink(p: &[Q], sink: usize) -> Measured {
    let total: Q = p.iter().sum();
    let sink_mass = &p[sink] / &total;
    let drop = sink_mass.is_positive() && sink_mass < Q::one();
    let indices: Vec<usize> = (0..p.len())
        .filter(|&i| p[i].is_positive() && !(drop && i == sink))
        .collect();
    let kept: Q = indices.iter().map(|&i| &p[i]).sum();
    let weights = indices.iter().map(|&i| &p[i] / &kept).collect();
    Measured {
        indices,
        weights,
        sink_mass,
    }
}

/// Hill number of positive weights summing to one.
pub fn hill(p: &[Q], alpha: AlphaOrder) -> f64 {
    match alpha {
        AlphaOrder::Zero => p.len() as f64,
        AlphaOrder::Two => {
            let s: Q = p.iter().map(|x| x * x).sum();
            to_f64(&s.recip())
        }
        AlphaOrder::Infinity => to_f64(&p.iter().max().unwrap().recip()),
        AlphaOrder::One => {
            let h: f64 = p.iter().map(to_f64).map(|x| -x * x.ln()).sum();
            h.exp()
        }
        AlphaOrder::General(a) => {
            let s: f64 = p.iter().map(to_f64).map(|x| x.powf(a)).sum();
            s.powf(1.0 / (1.0 - a))
        }
    }
}

/// Exponential of the Rényi divergence of `p` from `q`; both positive where `q` is.
pub fn relative(p: &[Q], q: &[Q], alpha: AlphaOrder) -> f64 {
    let pairs = || p.iter().zip(q).filter(|(a, _)| a.is_positive());
    match alpha {
        AlphaOrder::Zero => {
            let s: Q = pairs().map(|(_, b)| b.clone()).sum();
            to_f64(&s.recip())
        }
        AlphaOrder::Two => to_f64(&pairs().map(|(a, b)| a * a / b).sum::<Q>()),
        AlphaOrder::Infinity => to_f64(&pairs().map(|(a, b)| a / b).max().unwrap()),
        AlphaOrder::One => {
            let kl: f64 = pairs().map(|(a, b)| to_f64(a) * to_f64(&(a / b)).ln()).sum();
            kl.exp()
        }
        AlphaOrder::General(x) => {
            let s: f64 = pairs()
                .map(|(a, b)| to_f64(a).powf(x) * to_f64(b).powf(1.0 - x))
                .sum();
            s.powf(1.0 / (x - 1.0))
        }
    }
}

/// Values per order plus sink mass, or `None` where the measure is undefined.
pub type Expected = Option<(Vec<f64>, f64)>;

fn geometric(parts: &[(Vec<f64>, Q)], weights: &[Q], orders: usize) -> (Vec<f64>, f64) {
    let values = (0..orders)
        .map(|j| {
            parts
                .iter()
                .zip(weights)
                .map(|((v, _), w)| to_f64(w) * v[j].ln())
                .sum::<f64>()
                .exp()
        })
        .collect();
    let sink: Q = parts.iter().zip(weights).map(|((_, s), w)| s * w).sum();
    (values, to_f64(&sink))
}

/// Every measure of one meta path on one network, with the sink excluded from measured
/// distributions.
pub struct Eval<'a> {
    pub oracle: &'a Oracle,
    pub steps: Vec<(usize, bool)>,
    pub src: usize,
    pub tgt: usize,
    pub forward: PathTable,
    pub backward: PathTable,
    pub alphas: Vec<AlphaOrder>,
}

impl<'a> Eval<'a> {
    pub fn new(oracle: &'a Oracle, steps: &Steps, alphas: &[AlphaOrder]) -> Self {
        let back: Vec<(usize, bool)> = steps.iter().rev().map(|&(e, t)| (e, !t)).collect();
        Eval {
            oracle,
            steps: steps.to_vec(),
            src: oracle.source(steps),
            tgt: oracle.target(steps),
            forward: oracle.table(steps),
            backward: oracle.table(&back),
            alphas: alphas.to_vec(),
        }
    }

    fn values(&self, m: &Measured) -> Vec<f64> {
        self.alphas.iter().map(|&a| hill(&m.weights, a)).collect()
    }

    pub fn collective(&self, start: &[Q]) -> Expected {
        let m = exclude_sink(&self.oracle.propagate(&self.forward, start), self.oracle.sink(self.tgt));
        Some((self.values(&m), to_f64(&m.sink_mass)))
    }

    pub fn individual(&self, v0: usize) -> Expected {
        let m = exclude_sink(&self.forward.probs[v0], self.oracle.sink(self.tgt));
        Some((self.values(&m), to_f64(&m.sink_mass)))
    }

    fn individual_parts(&self, v0: usize) -> (Vec<f64>, Q) {
        let m = exclude_sink(&self.forward.probs[v0], self.oracle.sink(self.tgt));
        (self.values(&m), m.sink_mass)
    }

    pub fn mean_individual(&self, start: &[Q]) -> Expected {
        let support: Vec<usize> = (0..start.len()).filter(|&i| start[i].is_positive()).collect();
        let parts: Vec<_> = support.iter().map(|&v| self.individual_parts(v)).collect();
        let weights: Vec<Q> = support.iter().map(|&v| start[v].clone()).collect();
        Some(geometric(&parts, &weights, self.alphas.len()))
    }

    fn relative_pair(&self, p: &[Q], q: &[Q]) -> Expected {
        if p.iter().zip(q).any(|(a, b)| a.is_positive() && b.is_zero()) {
            return None;
        }
        let sink = self.oracle.sink(self.tgt);
        let drop = p[sink] < Q::one() && q[sink].is_positive() && q[sink] < Q::one();
        let keep: Vec<usize> = (0..q.len())
            .filter(|&i| q[i].is_positive() && !(drop && i == sink))
            .collect();
        let restrict = |d: &[Q]| -> Vec<Q> {
            let total: Q = keep.iter().map(|&i| &d[i]).sum();
            keep.iter().map(|&i| &d[i] / &total).collect()
        };
        let (pr, qr) = (restrict(p), restrict(q));
        let values = self.alphas.iter().map(|&a| relative(&pr, &qr, a)).collect();
        Some((values, to_f64(&p[sink])))
    }

    pub fn relative_individual(&self, v0: usize, start: &[Q]) -> Expected {
        let q = self.oracle.propagate(&self.forward, start);
        self.relative_pair(&self.forward.probs[v0], &q)
    }

    pub fn relative_collective(&self, start: &[Q], baseline: &Eval, baseline_start: &[Q]) -> Expected {
        let p = self.oracle.propagate(&self.forward, start);
        let q = baseline.oracle.propagate(&baseline.forward, baseline_start);
        self.relative_pair(&p, &q)
    }

    pub fn backward_transpose(&self, vk: usize) -> Expected {
        let (v, s) = self.backward_transpose_parts(vk);
        Some((v, to_f64(&s)))
    }

    fn backward_transpose_parts(&self, vk: usize) -> (Vec<f64>, Q) {
        let m = exclude_sink(&self.backward.probs[vk], self.oracle.sink(self.src));
        (self.values(&m), m.sink_mass)
    }

    fn posterior_parts(&self, vk: usize, start: &[Q]) -> Option<(Vec<f64>, Q)> {
        let joint: Vec<Q> = start
            .iter()
            .zip(&self.forward.probs)
            .map(|(w, row)| w * &row[vk])
            .collect();
        if joint.iter().all(Zero::is_zero) {
            return None;
        }
        let m = exclude_sink(&joint, self.oracle.sink(self.src));
        Some((self.values(&m), m.sink_mass))
    }

    pub fn backward_posterior(&self, vk: usize, start: &[Q]) -> Expected {
        self.posterior_parts(vk, start).map(|(v, s)| (v, to_f64(&s)))
    }

    fn ending_weights(&self, start: &[Q]) -> Measured {
        exclude_sink(&self.oracle.propagate(&self.forward, start), self.oracle.sink(self.tgt))
    }

    pub fn mean_backward_transpose(&self, start: &[Q]) -> Expected {
        let w = self.ending_weights(start);
        let parts: Vec<_> = w.indices.iter().map(|&k| self.backward_transpose_parts(k)).collect();
        Some(geometric(&parts, &w.weights, self.alphas.len()))
    }

    pub fn mean_backward_posterior(&self, start: &[Q]) -> Expected {
        let w = self.ending_weights(start);
        let parts: Vec<_> = w
            .indices
            .iter()
            .map(|&k| self.posterior_parts(k, start).unwrap())
            .collect();
        Some(geometric(&parts, &w.weights, self.alphas.len()))
    }

    pub fn projected(&self, v0: usize) -> Expected {
        let row = &self.forward.counts[v0];
        if row.iter().all(|&c| c == 0) {
            return None;
        }
        let m = exclude_sink(&normalized_counts(row), self.oracle.sink(self.tgt));
        Some((self.values(&m), to_f64(&m.sink_mass)))
    }
}
