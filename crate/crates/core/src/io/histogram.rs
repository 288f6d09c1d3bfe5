//! Histograms of measure values and diversity-versus-volume curves.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BinSpec {
    /// Logarithmic bins between the enclosing powers of ten of the data.
    Log { per_decade: u32 },
    /// Equal-width bins between the data minimum and maximum.
    Linear { bins: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bin {
    pub low: f64,
    pub high: f64,
    pub count: u64,
}

/// Bin edges and an index function for a particular data range.
struct Binning {
    edges: Vec<f64>,
    spec: BinSpec,
    low: f64,
}

impl Binning {
    fn new(values: &[f64], spec: BinSpec) -> Result<Option<Binning>> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("cannot bin non-finite value {v}")));
        }
        let Some(min) = values.iter().copied().reduce(f64::min) else {
            return Ok(None);
        };
        let max = values.iter().copied().fold(min, f64::max);
        let edges: Vec<f64> = match spec {
            BinSpec::Log { per_decade } => {
                if per_decade == 0 {
                    return Err(Error::Domain("bins per decade must be positive".into()));
                }
                if min <= 0.0 {
                    return Err(Error::Domain(format!("log bins need positive values, got {min}")));
                }
                let lo = min.log10().floor() as i32;
                let hi = (max.log10().ceil() as i32).max(lo + 1);
                let n = (hi - lo) as u32 * per_decade;
                (0..=n)
                    .map(|i| 10f64.powf(lo as f64 + i as f64 / per_decade as f64))
                    .collect()
            }
            BinSpec::Linear { bins } => {
                if bins == 0 {
                    return Err(Error::Domain("bin count must be positive".into()));
                }
                let hi = if max > min { max } else { min + 1.0 };
                let width = (hi - min) / bins as f64;
                (0..=bins)
                    .map(|i| if i == bins { hi } else { min + i as f64 * width })
                    .collect()
            }
        };
        Ok(Some(Binning {
            low: edges[0],
            edges,
            spec,
        }))
    }

    fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    fn index(&self, v: f64) -> usize {
        let raw = match self.spec {
            BinSpec::Log { per_decade } => (per_decade as f64 * (v / self.low).log10()).floor(),
            BinSpec::Linear { .. } => {
                ((v - self.low) / (self.edges[1] - self.edges[0])).floor()
            }
        };
        let mut i = (raw.max(0.0) as usize).min(self.bins() - 1);
        // correct rounding at the edges
        while i > 0 && v < self.edges[i] {
            i -= 1;
        }
        while i + 1 < self.bins() && v >= self.edges[i + 1] {
            i += 1;
        }
        i
    }
}

/// Counts `values` into bins. The last bin is closed on the right. No values, no bins.
pub fn histogram(values: &[f64], spec: BinSpec) -> Result<Vec<Bin>> {
    let Some(binning) = Binning::new(values, spec)? else {
        return Ok(Vec::new());
    };
    let mut counts = vec![0u64; binning.bins()];
    for &v in values {
        counts[binning.index(v)] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| Bin {
            low: binning.edges[i],
            high: binning.edges[i + 1],
            count,
        })
        .collect())
}

pub fn write_histogram_to<W: Write>(out: W, bins: &[Bin]) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "bin_low,bin_high,count")?;
    for b in bins {
        writeln!(out, "{},{},{}", b.low, b.high, b.count)?;
    }
    out.flush()
}

/// Bins `values` and writes `bin_low,bin_high,count` rows to `path`.
pub fn write_histogram(values: &[f64], spec: BinSpec, path: &Path) -> Result<()> {
    let bins = histogram(values, spec)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_histogram_to(file, &bins).map_err(|e| Error::io(path, e))
}

/// Summary of the diversities of the vertices whose volume falls in one bin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeBucket {
    pub low: f64,
    pub high: f64,
    pub count: u64,
    pub mean: f64,
    pub p5: f64,
    pub p30: f64,
    pub p70: f64,
    pub p95: f64,
}

/// Linearly interpolated percentile of sorted data, `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Groups `(volume, diversity)` pairs into volume bins and summarizes each non-empty bin.
pub fn volume_curve(points: &[(f64, f64)], spec: BinSpec) -> Result<Vec<VolumeBucket>> {
    let volumes: Vec<f64> = points.iter().map(|p| p.0).collect();
    let Some(binning) = Binning::new(&volumes, spec)? else {
        return Ok(Vec::new());
    };
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); binning.bins()];
    for &(v, d) in points {
        groups[binning.index(v)].push(d);
    }
    Ok(groups
        .into_iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(i, mut g)| {
            g.sort_by(f64::total_cmp);
            VolumeBucket {
                low: binning.edges[i],
                high: binning.edges[i + 1],
                count: g.len() as u64,
                mean: g.iter().sum::<f64>() / g.len() as f64,
                p5: percentile(&g, 0.05),
                p30: percentile(&g, 0.30),
                p70: percentile(&g, 0.70),
                p95: percentile(&g, 0.95),
            }
        })
        .collect())
}

pub fn write_volume_curve(buckets: &[VolumeBucket], path: &Path) -> Result<()> {
    let write = || -> std::io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "bin_low,bin_high,count,mean,p5,p30,p70,p95")?;
        for b in buckets {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                b.low, b.high, b.count, b.mean, b.p5, b.p30, b.p70, b.p95
            )?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}
