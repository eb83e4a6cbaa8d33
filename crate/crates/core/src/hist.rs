use std::collections::BTreeMap;

use serde::Serialize;

/// Fixed-width histogram; bucket `k` covers `[k * width, (k + 1) * width)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub width: f64,
    pub counts: BTreeMap<i64, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bucket {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Histogram {
    pub fn new(width: f64) -> Self {
        assert!(width > 0.0, "histogram width must be positive");
        Histogram {
            width,
            counts: BTreeMap::new(),
        }
    }

    pub fn from_values(width: f64, values: impl IntoIterator<Item = f64>) -> Self {
        let mut h = Histogram::new(width);
        for v in values {
            h.add(v);
        }
        h
    }

    pub fn add(&mut self, value: f64) {
        // nudge so that exact multiples of a decimal width land in their own bucket
        let k = (value / self.width + 1e-9).floor() as i64;
        *self.counts.entry(k).or_insert(0) += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn buckets(&self) -> Vec<Bucket> {
        self.counts
            .iter()
            .map(|(&k, &count)| Bucket {
                start: k as f64 * self.width,
                end: (k + 1) as f64 * self.width,
                count,
            })
            .collect()
    }
}
