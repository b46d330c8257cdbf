use crate::error::{Error, Result};

/// Fixed-edge histogram that also counts values outside its range.
///
/// Bins are half-open `[e_k, e_{k+1})` except the last, which includes its
/// upper edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    underflow: u64,
    overflow: u64,
}

impl Histogram {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::Config("a histogram needs at least two edges".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("histogram edges must be finite and strictly increasing".into()));
        }
        let bins = edges.len() - 1;
        Ok(Self {
            edges,
            counts: vec![0; bins],
            underflow: 0,
            overflow: 0,
        })
    }

    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Config("a histogram needs at least one bin".into()));
        }
        let w = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|k| lo + w * k as f64).collect();
        edges.push(hi);
        Self::new(edges)
    }

    /// Restores a histogram from stored parts.
    pub fn from_parts(edges: Vec<f64>, counts: Vec<u64>, underflow: u64, overflow: u64) -> Result<Self> {
        let mut h = Self::new(edges)?;
        if counts.len() != h.counts.len() {
            return Err(Error::Shape(format!(
                "{} counts for {} bins",
                counts.len(),
                h.counts.len()
            )));
        }
        h.counts = counts;
        h.underflow = underflow;
        h.overflow = overflow;
        Ok(h)
    }

    pub fn push(&mut self, x: f64) {
        let lo = self.edges[0];
        let hi = *self.edges.last().expect("edges");
        if x.is_nan() || x < lo {
            self.underflow += 1;
        } else if x > hi {
            self.overflow += 1;
        } else {
            let k = self.edges.partition_point(|&e| e <= x);
            let k = k.saturating_sub(1).min(self.counts.len() - 1);
            self.counts[k] += 1;
        }
    }

    pub fn extend(&mut self, xs: impl IntoIterator<Item = f64>) {
        for x in xs {
            self.push(x);
        }
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.edges != other.edges {
            return Err(Error::Shape("cannot merge histograms with different edges".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        Ok(())
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn underflow(&self) -> u64 {
        self.underflow
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.in_range() + self.underflow + self.overflow
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Counts divided by (in-range total x bin width), so the density
    /// integrates to one over the histogram range.
    pub fn density(&self) -> Vec<f64> {
        let n = self.in_range() as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, w)| if n > 0.0 { c as f64 / (n * (w[1] - w[0])) } else { 0.0 })
            .collect()
    }

    pub fn density_integral(&self) -> f64 {
        self.density()
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binning_and_overflow() {
        let mut h = Histogram::uniform(0.0, 1.0, 4).unwrap();
        h.extend([0.0, 0.1, 0.25, 0.5, 0.99, 1.0, 1.5, -0.1, f64::NAN]);
        assert_eq!(h.counts(), &[2, 1, 1, 2]);
        assert_eq!(h.overflow(), 1);
        assert_eq!(h.underflow(), 2);
        assert_eq!(h.total(), 9);
        assert!((h.density_integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merge_requires_equal_edges() {
        let mut a = Histogram::uniform(0.0, 1.0, 2).unwrap();
        let mut b = a.clone();
        a.push(0.1);
        b.push(0.9);
        a.merge(&b).unwrap();
        assert_eq!(a.counts(), &[1, 1]);
        let c = Histogram::uniform(0.0, 2.0, 2).unwrap();
        assert!(a.merge(&c).is_err());
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Histogram::new(vec![0.0]).is_err());
        assert!(Histogram::new(vec![0.0, 0.0, 1.0]).is_err());
        assert!(Histogram::uniform(0.0, 1.0, 0).is_err());
    }
}
