//! Compensated (Neumaier) summation.
//!
//! The pair-set sums behind the variance proxies accumulate up to `O(n²)`
//! near-equal terms; plain `f64` accumulation loses low-order bits that the
//! exactness tests (block-wise vs. enumerated sums) care about. A Neumaier
//! accumulator keeps a running compensation term and is deterministic for a
//! fixed order of additions, which is all the reproducibility guarantees need.

/// Neumaier compensated accumulator.
///
/// `value()` returns `sum + compensation`. Additions are associative only in
/// exact arithmetic, so callers that must be reproducible fix the order in
/// which terms (or merged partials) are added.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    /// Fresh accumulator at zero.
    pub fn new() -> Self {
        Self::default()
    }

    /// Add one term.
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Merge a partial accumulator into this one.
    ///
    /// Defined as adding the partial's raw sum and then its compensation, so a
    /// hierarchical reduction (partials merged in a fixed order) is exactly
    /// reproducible regardless of how the partials were produced.
    #[inline]
    pub fn merge(&mut self, other: NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    /// Compensated total.
    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = NeumaierSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}
