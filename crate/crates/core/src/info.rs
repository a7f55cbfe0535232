//! Shannon-entropy helpers. Everything is in bits and `0 log 0 = 0`.

/// `-p log2 p`, zero at `p = 0`.
#[inline]
pub fn neg_plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy of a (not necessarily normalized) probability vector.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().copied().map(neg_plogp).sum()
}

/// Binary entropy `H2(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    neg_plogp(p) + neg_plogp(1.0 - p)
}

/// Mean and batch-means standard error of a series using `floor(sqrt(n))`
/// equal batches. Returns `(mean, stderr)`; stderr is 0 when fewer than two
/// batches are available.
#[cfg(test)]
pub(crate) fn batch_means(series: &[f64]) -> (f64, f64) {
    let n = series.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let batches = (n as f64).sqrt().floor() as usize;
    if batches < 2 {
        return (mean, 0.0);
    }
    let size = n / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| series[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let bm = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}

/// Streaming batch-means accumulator; avoids storing 10^6-long series.
#[derive(Debug, Clone)]
pub(crate) struct BatchMeans {
    batch_size: usize,
    current: f64,
    filled: usize,
    total: f64,
    count: usize,
    batch_sums: Vec<f64>,
}

impl BatchMeans {
    /// Accumulator sized for `length` samples split into `floor(sqrt(length))` batches.
    pub fn for_length(length: usize) -> Self {
        let batches = ((length as f64).sqrt().floor() as usize).max(1);
        BatchMeans {
            batch_size: (length / batches).max(1),
            current: 0.0,
            filled: 0,
            total: 0.0,
            count: 0,
            batch_sums: Vec::with_capacity(batches + 1),
        }
    }

    #[inline]
    pub fn push(&mut self, value: f64) {
        self.total += value;
        self.count += 1;
        self.current += value;
        self.filled += 1;
        if self.filled == self.batch_size {
            self.batch_sums.push(self.current);
            self.current = 0.0;
            self.filled = 0;
        }
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.total / self.count as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        let b = self.batch_sums.len();
        if b < 2 {
            return 0.0;
        }
        let means: Vec<f64> = self
            .batch_sums
            .iter()
            .map(|s| s / self.batch_size as f64)
            .collect();
        let bm = means.iter().sum::<f64>() / b as f64;
        let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (b - 1) as f64;
        (var / b as f64).sqrt()
    }
}
