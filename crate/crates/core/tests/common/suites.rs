//! Checks shared by the integration tests and the acceptance runner. Each returns a short
//! summary on success and a description of the first failure otherwise.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use hindiv::divmath::{
    gini_simpson, relative_true_diversity, replicate, true_diversity, weighted_geometric_mean,
};
use hindiv::walk::{project, propagate};
use hindiv::{
    AlphaOrder, Distribution, DiversityReport, Hin, MeasureKind, NetworkDiversity,
    SinkPolicy, Start, VertexDistribution, VertexId, VertexTypeId,
};

use super::close;
use super::fixtures;
use super::generate::{metapath, random_counts, random_weights, rng, NetShape, RawNet};
use super::oracle::{normalized_counts, to_f64, uniform_real, Eval, Expected, Oracle, Q};

pub type Outcome = Result<String, String>;

pub const AXIOM_ORDERS: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 16.0, f64::INFINITY];

fn orders(values: &[f64]) -> Vec<AlphaOrder> {
    values.iter().map(|&a| AlphaOrder::new(a).unwrap()).collect()
}

fn one() -> [AlphaOrder; 1] {
    [AlphaOrder::One]
}

fn value(r: hindiv::Result<Vec<DiversityReport>>) -> f64 {
    r.unwrap()[0].value
}

fn within(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, expected {want} ± {tol}"))
    }
}

/// Collective order-1 diversity of the small network from both starts, with the elapsed time.
pub fn small_collective() -> Result<(f64, f64, Duration), String> {
    let begin = Instant::now();
    let (h, path) = fixtures::small();
    let nd = NetworkDiversity::new(&h);
    let uniform = value(nd.collective(&path, &Start::Uniform, &one()));
    let skewed = skewed_start(&h, path.source());
    let weighted = value(nd.collective(&path, &skewed, &one()));
    let elapsed = begin.elapsed();
    within("uniform start", uniform, 2.95, 0.01)?;
    within("start (4/5, 1/5)", weighted, 2.45, 0.01)?;
    Ok((uniform, weighted, elapsed))
}

pub fn skewed_start(h: &Hin, ty: VertexTypeId) -> Start {
    let d = Distribution::new(vec![0.8, 0.2, 0.0]).unwrap();
    Start::Explicit(VertexDistribution::from_distribution(h, ty, d).unwrap())
}

pub fn small_individual() -> Outcome {
    let (h, path) = fixtures::small();
    let nd = NetworkDiversity::new(&h);
    let ty = path.source();
    let a = value(nd.individual(&path, VertexId::new(ty, 0), &one()));
    let b = value(nd.individual(&path, VertexId::new(ty, 1), &one()));
    let mu = value(nd.mean_individual(&path, &Start::Uniform, &one()));
    let mw = value(nd.mean_individual(&path, &skewed_start(&h, ty), &one()));
    within("first source", a, 1.75, 0.01)?;
    within("second source", b, 2.0, 0.01)?;
    within("mean, uniform start", mu, 1.87, 0.01)?;
    within("mean, start (4/5, 1/5)", mw, 1.80, 0.01)?;
    Ok(format!("individual {a:.4}, {b:.4}; mean {mu:.4}, {mw:.4}"))
}

pub fn quadrants() -> Outcome {
    let mut seen = Vec::new();
    for (name, edges, collective, mean) in fixtures::quadrant_layouts() {
        let (h, path) = fixtures::quadrant(&edges);
        let nd = NetworkDiversity::new(&h);
        let c = value(nd.collective(&path, &Start::Uniform, &one()));
        let m = value(nd.mean_individual(&path, &Start::Uniform, &one()));
        if !close(c, collective, 1e-14) || !close(m, mean, 1e-14) {
            return Err(format!("{name}: got ({c}, {m}), expected ({collective}, {mean})"));
        }
        seen.push(format!("({c}, {m})"));
    }
    Ok(seen.join(" "))
}

pub fn tag_walks() -> Outcome {
    let mut out = Vec::new();
    for (name, (h, path), individual, projected) in [
        ("spread tags", fixtures::tag_walk_spread(), 12f64.sqrt(), 4.0),
        ("repeated tag", fixtures::tag_walk_repeated(), 2.0, 1.75),
    ] {
        let nd = NetworkDiversity::new(&h);
        let u = VertexId::new(path.source(), 0);
        let i = value(nd.individual(&path, u, &one()));
        let p = value(nd.projected(&path, u, &one()));
        within(&format!("{name} individual"), i, individual, 0.01)?;
        within(&format!("{name} projected"), p, projected, 0.01)?;
        out.push(format!("({i:.4}, {p:.4})"));
    }
    Ok(out.join(" "))
}

pub fn replication_example() -> Outcome {
    let p = Distribution::new(vec![0.1, 0.2, 0.7]).unwrap();
    let r = replicate(&p, 3).unwrap();
    let (d, dr) = (true_diversity(&p, AlphaOrder::One), true_diversity(&r, AlphaOrder::One));
    let (g, gr) = (gini_simpson(&p), gini_simpson(&r));
    within("D_1", d, 2.23, 0.01)?;
    within("replicated D_1", dr, 6.69, 0.02)?;
    within("Gini-Simpson", g, 0.46, 0.005)?;
    within("replicated Gini-Simpson", gr, 0.82, 0.005)?;
    Ok(format!("D_1 {d:.4} -> {dr:.4}; Gini-Simpson {g:.4} -> {gr:.4}"))
}

/// Symmetry, expansibility, transfer, bounds and replication on `n` random distributions,
/// then normalization on `n / 10` uniform ones.
pub fn axioms(seed: u64, n: usize) -> Outcome {
    let mut rng = rng(seed);
    let alphas = orders(&AXIOM_ORDERS);
    let mut checks = 0usize;
    for case in 0..n {
        let k = rng.gen_range(1..=512);
        let w = random_weights(&mut rng, k);
        let p = Distribution::normalize(w.clone()).unwrap();
        let mut shuffled = p.weights().to_vec();
        shuffled.shuffle(&mut rng);
        let shuffled = Distribution::new(shuffled).unwrap();
        let mut padded = p.weights().to_vec();
        padded.push(0.0);
        let padded = Distribution::new(padded).unwrap();
        let m = rng.gen_range(2..=4);
        let replicated = replicate(&p, m).unwrap();
        let transferred = transfer(&mut rng, &p);
        let support = true_diversity(&p, AlphaOrder::Zero);
        for &a in &alphas {
            let d = true_diversity(&p, a);
            let fail = |what: &str, got: f64| Err(format!("case {case}, k = {k}, alpha = {a}: {what} {got} vs {d}"));
            let s = true_diversity(&shuffled, a);
            if !close(s, d, 1e-12) {
                return fail("symmetry", s);
            }
            let e = true_diversity(&padded, a);
            let exact = !matches!(a, AlphaOrder::General(_));
            if (exact && e != d) || !close(e, d, 1e-12) {
                return fail("expansibility", e);
            }
            if let Some(t) = &transferred {
                let dt = true_diversity(t, a);
                if dt < d - 1e-12 * d {
                    return fail("transfer", dt);
                }
            }
            if !(d >= 1.0 - 1e-12 && d <= support * (1.0 + 1e-12) && support <= k as f64) {
                return fail("bounds", support);
            }
            let r = true_diversity(&replicated, a);
            if !close(r, m as f64 * d, 1e-10) {
                return fail("replication", r);
            }
            checks += 5;
        }
    }
    let mut general = alphas.clone();
    for _ in 0..n / 10 {
        let k = rng.gen_range(1..=10_000);
        general.push(AlphaOrder::new(rng.gen_range(0.0..50.0)).unwrap());
        let u = Distribution::uniform(k).unwrap();
        for &a in &general {
            let d = true_diversity(&u, a);
            if !close(d, k as f64, 1e-12) {
                return Err(format!("normalization: D_{a}(uniform({k})) = {d}"));
            }
            checks += 1;
        }
        general.pop();
    }
    Ok(format!("{n} distributions, {checks} checks"))
}

/// Moves `eps <= (p_i - p_j) / 2` from a larger entry to a smaller one.
fn transfer(rng: &mut impl Rng, p: &Distribution) -> Option<Distribution> {
    let w = p.weights();
    let (i, j) = (rng.gen_range(0..w.len()), rng.gen_range(0..w.len()));
    let (hi, lo) = if w[i] > w[j] { (i, j) } else if w[j] > w[i] { (j, i) } else { return None };
    let eps = rng.gen_range(0.0..=1.0) * (w[hi] - w[lo]) / 2.0;
    let mut t = w.to_vec();
    t[hi] -= eps;
    t[lo] += eps;
    Some(Distribution::new(t).unwrap())
}

/// Weak additivity on `n` products, strong additivity at order 1 on `n` joints.
pub fn additivity(seed: u64, n: usize) -> Outcome {
    let mut rng = rng(seed);
    let alphas = orders(&AXIOM_ORDERS);
    for case in 0..n {
        let (k1, k2) = (rng.gen_range(1..=40), rng.gen_range(1..=40));
        let p = Distribution::normalize(random_weights(&mut rng, k1)).unwrap();
        let q = Distribution::normalize(random_weights(&mut rng, k2)).unwrap();
        let product: Vec<f64> = p
            .weights()
            .iter()
            .flat_map(|a| q.weights().iter().map(move |b| a * b))
            .collect();
        let product = Distribution::new(product).unwrap();
        for &a in &alphas {
            let (dp, dq, d) = (true_diversity(&p, a), true_diversity(&q, a), true_diversity(&product, a));
            if !close(d, dp * dq, 1e-10) {
                return Err(format!("weak additivity, case {case}, alpha = {a}: {d} vs {dp} * {dq}"));
            }
        }
    }
    for case in 0..n {
        let (k1, k2) = (rng.gen_range(1..=30), rng.gen_range(1..=30));
        let joint = Distribution::normalize(random_weights(&mut rng, k1 * k2)).unwrap();
        let rows: Vec<&[f64]> = joint.weights().chunks(k2).collect();
        let marginal: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
        let marginal = Distribution::new(marginal).unwrap();
        let conditionals: Vec<f64> = rows
            .iter()
            .map(|r| match Distribution::normalize(r.to_vec()) {
                Ok(c) => true_diversity(&c, AlphaOrder::One),
                Err(_) => 1.0,
            })
            .collect();
        let chained = true_diversity(&marginal, AlphaOrder::One)
            * weighted_geometric_mean(&conditionals, &marginal).unwrap();
        let d = true_diversity(&joint, AlphaOrder::One);
        if !close(d, chained, 1e-10) {
            return Err(format!("strong additivity, case {case}: {d} vs {chained}"));
        }
    }
    Ok(format!("{n} products, {n} joints"))
}

#[derive(Default, Debug)]
pub struct IdentityTally {
    pub networks: usize,
    pub chain_checks: usize,
    pub bound_checks: usize,
    pub strict: usize,
    pub equal: usize,
}

fn random_start(rng: &mut impl Rng, h: &Hin, ty: VertexTypeId) -> (Start, Vec<u64>) {
    let n = h.cardinality(ty) as usize;
    if rng.gen_bool(0.4) {
        let mut counts = vec![1; n];
        counts[n - 1] = 0;
        return (Start::Uniform, counts);
    }
    let mut counts = random_counts(rng, n - 1);
    counts.push(0);
    let d = Distribution::from_counts(&counts).unwrap();
    (Start::Explicit(VertexDistribution::from_distribution(h, ty, d).unwrap()), counts)
}

/// The chain-rule identity linking collective, posterior backward, start and mean individual
/// diversities, and the bound on collective diversity of a split walk, on `n` random
/// networks with sinks counted as ordinary vertices.
pub fn identities(seed: u64, n: usize) -> Result<IdentityTally, String> {
    let mut rng = rng(seed);
    let shape = NetShape {
        max_types: 5,
        max_vertices: 20,
        max_multiplicity: 3,
        permutation_chance: 0.5,
    };
    let mut tally = IdentityTally::default();
    for case in 0..n {
        let raw = RawNet::random(&mut rng, &shape);
        let h = raw.hin();
        let len = rng.gen_range(1..=4);
        let (_, steps) = raw.random_steps(&mut rng, len);
        let path = metapath(&h, &steps);
        let nd = NetworkDiversity::new(&h).with_sink_policy(SinkPolicy::Include);
        let (start, counts) = random_start(&mut rng, &h, path.source());
        let err = |what: &str, detail: String| format!("case {case} ({}): {what}: {detail}", path.to_expr(&h));

        let collective = value(nd.collective(&path, &start, &one()));
        let backward = value(nd.mean_backward_posterior(&path, &start, &one()));
        let individual = value(nd.mean_individual(&path, &start, &one()));
        let start_d = true_diversity(&Distribution::from_counts(&counts).unwrap(), AlphaOrder::One);
        if !close(collective * backward, start_d * individual, 1e-9) {
            return Err(err(
                "chain rule",
                format!("{collective} * {backward} vs {start_d} * {individual}"),
            ));
        }
        tally.chain_checks += 1;

        if len >= 2 {
            let split = rng.gen_range(1..len);
            let (prefix, tail) = (path.sub_path(0..split).unwrap(), path.sub_path(split..len).unwrap());
            let middle = propagate(&h, &prefix, &start.resolve(&h, path.source()).unwrap()).unwrap();
            let middle_start = Start::Explicit(middle);
            let prefix_d = value(nd.collective(&prefix, &start, &one()));
            let tail_mean = value(nd.mean_individual(&tail, &middle_start, &one()));
            let bound = prefix_d * tail_mean;
            if collective > bound * (1.0 + 1e-9) {
                return Err(err("bound", format!("{collective} > {prefix_d} * {tail_mean}")));
            }
            let gap = value(nd.mean_backward_posterior(&tail, &middle_start, &one()));
            if !close(bound / collective, gap, 1e-9) {
                return Err(err("bound gap", format!("{bound} / {collective} vs {gap}")));
            }
            let posteriors = nd
                .sweep(MeasureKind::BackwardPosterior, &tail, &middle_start, &one(), true)
                .unwrap();
            let all_one = posteriors.iter().all(|r| r.value <= 1.0 + 1e-12);
            if all_one {
                if !close(collective, bound, 1e-9) {
                    return Err(err("equality", format!("{collective} vs {bound}")));
                }
                tally.equal += 1;
            } else if bound > collective * (1.0 + 1e-9) {
                tally.strict += 1;
            }
            tally.bound_checks += 1;
        }
        tally.networks += 1;
    }
    Ok(tally)
}

#[derive(Default, Debug)]
pub struct OracleTally {
    pub networks: usize,
    pub values: usize,
    pub undefined: usize,
    pub projections: usize,
}

/// Orders for which a measure's order-0 value is an exact count.
fn counts_exactly(kind: MeasureKind) -> bool {
    matches!(
        kind,
        MeasureKind::Collective
            | MeasureKind::Individual
            | MeasureKind::BackwardTranspose
            | MeasureKind::BackwardPosterior
            | MeasureKind::Projected
    )
}

fn compare(
    kind: MeasureKind,
    at: &str,
    got: hindiv::Result<Vec<DiversityReport>>,
    want: Expected,
    tally: &mut OracleTally,
) -> Result<(), String> {
    match (got, want) {
        (Err(_), None) => {
            tally.undefined += 1;
            Ok(())
        }
        (Ok(r), None) => Err(format!("{kind} {at}: expected an error, got {}", r[0].value)),
        (Err(e), Some(_)) => Err(format!("{kind} {at}: unexpected error {e}")),
        (Ok(reports), Some((values, sink))) => compare_reports(kind, at, &reports, &values, sink, tally),
    }
}

fn compare_reports(
    kind: MeasureKind,
    at: &str,
    reports: &[DiversityReport],
    values: &[f64],
    sink: f64,
    tally: &mut OracleTally,
) -> Result<(), String> {
    for (r, &want) in reports.iter().zip(values) {
        let ok = match r.alpha {
            AlphaOrder::Zero if counts_exactly(kind) => r.value == want,
            AlphaOrder::One => close(r.value, want, 1e-12),
            _ => close(r.value, want, 1e-13),
        };
        if !ok {
            return Err(format!("{kind} {at}, alpha = {}: got {}, exact {want}", r.alpha, r.value));
        }
        tally.values += 1;
    }
    if (reports[0].sink_mass - sink).abs() > 1e-13 {
        return Err(format!("{kind} {at}: sink mass {} vs {sink}", reports[0].sink_mass));
    }
    Ok(())
}

/// Walks, projections and every measure against exhaustive enumeration on one random
/// network with at most eight vertices per type.
pub fn oracle_network(seed: u64, tally: &mut OracleTally) -> Result<(), String> {
    let mut rng = rng(seed);
    let shape = NetShape {
        max_types: 4,
        max_vertices: 8,
        max_multiplicity: 2,
        permutation_chance: 0.2,
    };
    let raw = RawNet::random(&mut rng, &shape);
    let h = raw.hin();
    let oracle = Oracle::new(&raw);
    let len = rng.gen_range(1..=3);
    let (_, steps) = raw.random_steps(&mut rng, len);
    let path = metapath(&h, &steps);
    let alphas = [AlphaOrder::Zero, AlphaOrder::One, AlphaOrder::Two, AlphaOrder::Infinity];
    let eval = Eval::new(&oracle, &steps, &alphas);
    let at = format!("seed {seed} ({})", path.to_expr(&h));
    let (src, tgt) = (path.source(), path.target());

    let (start, start_q) = {
        let n = h.cardinality(src) as usize;
        if rng.gen_bool(0.5) {
            (Start::Uniform, uniform_real(n))
        } else {
            let (s, counts) = random_start(&mut rng, &h, src);
            let s = match s {
                Start::Uniform => Start::UniformSubset((0..n as u32 - 1).collect()),
                other => other,
            };
            (s, normalized_counts(&counts))
        }
    };

    let resolved = start.resolve(&h, src).unwrap();
    let walked = propagate(&h, &path, &resolved).unwrap().to_dense();
    let exact = oracle.propagate(&eval.forward, &start_q);
    for (i, (a, b)) in walked.iter().zip(&exact).enumerate() {
        if (*a > 0.0) != (b > &Q::from_integer(0.into())) || (a - to_f64(b)).abs() > 1e-15 {
            return Err(format!("propagate {at}: entry {i} is {a}, exact {b}"));
        }
    }
    let mut projected: Vec<(u32, u32, u64)> = project(&h, &path).unwrap().triples().collect();
    projected.sort_unstable();
    let mut expected = Vec::new();
    for (v0, row) in eval.forward.counts.iter().enumerate() {
        for (vk, &c) in row.iter().enumerate() {
            if c > 0 {
                expected.push((v0 as u32, vk as u32, c));
            }
        }
    }
    if projected != expected {
        return Err(format!("project {at}: {projected:?} vs {expected:?}"));
    }
    tally.projections += 1;

    let nd = NetworkDiversity::new(&h);
    compare(MeasureKind::Collective, &at, nd.collective(&path, &start, &alphas), eval.collective(&start_q), tally)?;
    compare(
        MeasureKind::MeanIndividual,
        &at,
        nd.mean_individual(&path, &start, &alphas),
        eval.mean_individual(&start_q),
        tally,
    )?;
    compare(
        MeasureKind::MeanBackwardTranspose,
        &at,
        nd.mean_backward_transpose(&path, &start, &alphas),
        eval.mean_backward_transpose(&start_q),
        tally,
    )?;
    compare(
        MeasureKind::MeanBackwardPosterior,
        &at,
        nd.mean_backward_posterior(&path, &start, &alphas),
        eval.mean_backward_posterior(&start_q),
        tally,
    )?;
    let uniform_q = uniform_real(h.cardinality(src) as usize);
    for (p, q, ps, qs) in [
        (&start, &Start::Uniform, &start_q, &uniform_q),
        (&Start::Uniform, &start, &uniform_q, &start_q),
    ] {
        compare(
            MeasureKind::RelativeCollective,
            &at,
            nd.relative_collective(&path, p, &path, q, &alphas),
            eval.relative_collective(ps, &eval, qs),
            tally,
        )?;
    }

    // per-vertex measures over every vertex, sinks included
    for v in 0..h.cardinality(src) {
        let v0 = VertexId::new(src, v);
        let at = format!("{at} at source {v}");
        compare(MeasureKind::Individual, &at, nd.individual(&path, v0, &alphas), eval.individual(v as usize), tally)?;
        compare(MeasureKind::Projected, &at, nd.projected(&path, v0, &alphas), eval.projected(v as usize), tally)?;
        compare(
            MeasureKind::RelativeIndividual,
            &at,
            nd.relative_individual(&path, v0, &start, &alphas),
            eval.relative_individual(v as usize, &start_q),
            tally,
        )?;
    }
    for v in 0..h.cardinality(tgt) {
        let vk = VertexId::new(tgt, v);
        let at = format!("{at} at target {v}");
        compare(
            MeasureKind::BackwardTranspose,
            &at,
            nd.backward_transpose(&path, vk, &alphas),
            eval.backward_transpose(v as usize),
            tally,
        )?;
        compare(
            MeasureKind::BackwardPosterior,
            &at,
            nd.backward_posterior(&path, vk, &start, &alphas),
            eval.backward_posterior(v as usize, &start_q),
            tally,
        )?;
    }

    // sweeps agree with the oracle too, skipping unreached posterior targets
    for kind in [MeasureKind::Individual, MeasureKind::Projected, MeasureKind::BackwardTranspose, MeasureKind::BackwardPosterior] {
        let reports = nd.sweep(kind, &path, &start, &alphas, true).map_err(|e| format!("{kind} sweep {at}: {e}"))?;
        let mut expected_vertices = 0;
        let n = match kind.conditioning_endpoint().unwrap() {
            hindiv::netdiv::Endpoint::Source => h.cardinality(src),
            hindiv::netdiv::Endpoint::Target => h.cardinality(tgt),
        };
        for v in 0..n as usize {
            let want = match kind {
                MeasureKind::Individual => eval.individual(v),
                MeasureKind::Projected => eval.projected(v),
                MeasureKind::BackwardTranspose => eval.backward_transpose(v),
                _ => eval.backward_posterior(v, &start_q),
            };
            let Some((values, sink)) = want else { continue };
            let chunk = &reports[expected_vertices * alphas.len()..(expected_vertices + 1) * alphas.len()];
            if chunk[0].conditioning.map(|c| c.index as usize) != Some(v) {
                return Err(format!("{kind} sweep {at}: vertex {v} out of order"));
            }
            compare_reports(kind, &format!("sweep {at} vertex {v}"), chunk, &values, sink, tally)?;
            expected_vertices += 1;
        }
        if reports.len() != expected_vertices * alphas.len() {
            return Err(format!("{kind} sweep {at}: {} reports for {expected_vertices} vertices", reports.len()));
        }
    }
    tally.networks += 1;
    Ok(())
}

pub fn oracle(first_seed: u64, n: usize) -> Result<OracleTally, String> {
    let mut tally = OracleTally::default();
    for seed in first_seed..first_seed + n as u64 {
        oracle_network(seed, &mut tally)?;
    }
    Ok(tally)
}

/// Relative order-`alpha` diversity of `p` against uniform times `D_alpha(p)` is `k`.
pub fn relative_uniform_identity(p: &Distribution, alpha: AlphaOrder) -> f64 {
    let u = Distribution::uniform(p.len()).unwrap();
    relative_true_diversity(p, &u, alpha).unwrap() * true_diversity(p, alpha)
}

pub struct ScaleReport {
    pub build: Duration,
    pub user_sweep: Duration,
    pub collective: Duration,
    pub pipeline: Duration,
    pub collective_value: f64,
    pub histogram_bins: usize,
    pub curve_buckets: usize,
}

/// Builds the synthetic tripartite network and runs the per-user sweep, the collective walk
/// and the histogram and volume-curve pipeline, writing its outputs under `dir`.
pub fn scale_pipeline(users: u32, items: u32, tags: u32, edges: usize, dir: &std::path::Path) -> Result<ScaleReport, String> {
    use hindiv::hin::EdgeStep;
    use hindiv::io::histogram::{histogram, volume_curve, write_histogram, write_volume_curve, BinSpec};
    use hindiv::walk::validate_metapath;

    let began = Instant::now();
    let net = super::generate::tripartite(99, users, items, tags, edges);
    let build = began.elapsed();
    let h = &net.hin;
    let attention = validate_metapath(h, vec![EdgeStep::forward(net.consumed), EdgeStep::forward(net.tagged)])
        .map_err(|e| e.to_string())?;
    let nd = NetworkDiversity::new(h);
    let one = one();

    let began = Instant::now();
    let per_user = nd
        .sweep(MeasureKind::Individual, &attention, &Start::Uniform, &one, false)
        .map_err(|e| e.to_string())?;
    let user_sweep = began.elapsed();
    if per_user.len() != users as usize {
        return Err(format!("{} user reports for {users} users", per_user.len()));
    }

    let began = Instant::now();
    let collective_value = value(nd.collective(&attention, &Start::Uniform, &one));
    let collective = began.elapsed();

    let began = Instant::now();
    let audience = attention.transpose();
    let per_tag = nd
        .sweep(MeasureKind::Individual, &audience, &Start::Uniform, &one, false)
        .map_err(|e| e.to_string())?;
    let tag_values: Vec<f64> = per_tag.iter().map(|r| r.value).collect();
    let spec = BinSpec::Log { per_decade: 20 };
    write_histogram(&tag_values, spec, &dir.join("tag_audience.csv")).map_err(|e| e.to_string())?;
    let user_values: Vec<f64> = per_user.iter().map(|r| r.value).collect();
    write_histogram(&user_values, spec, &dir.join("user_attention.csv")).map_err(|e| e.to_string())?;
    let bins = histogram(&tag_values, spec).map_err(|e| e.to_string())?;
    if bins.iter().map(|b| b.count).sum::<u64>() != tags as u64 {
        return Err("tag histogram lost values".into());
    }
    let points: Vec<(f64, f64)> = per_user
        .iter()
        .filter_map(|r| {
            let volume = h.out_degree(net.consumed, r.conditioning.unwrap()).unwrap();
            (volume > 0).then_some((volume as f64, r.value))
        })
        .collect();
    let curve = volume_curve(&points, BinSpec::Log { per_decade: 10 }).map_err(|e| e.to_string())?;
    write_volume_curve(&curve, &dir.join("volume_curve.csv")).map_err(|e| e.to_string())?;
    if curve.iter().map(|b| b.count).sum::<u64>() != points.len() as u64 {
        return Err("volume curve lost points".into());
    }
    let pipeline = began.elapsed();

    Ok(ScaleReport {
        build,
        user_sweep,
        collective,
        pipeline,
        collective_value,
        histogram_bins: bins.len(),
        curve_buckets: curve.len(),
    })
}
