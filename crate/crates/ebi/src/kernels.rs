//! Kernels, Gram matrices, and streaming Gram evaluation.
//!
//! A positive-definite kernel `k` maps input points into a reproducing-kernel
//! Hilbert space via `φ(x) = k(x, ·)`. All statistics downstream (variance
//! proxies, covariance-error norms, regression risks) reduce to sums over
//! entries of a Gram matrix, so three entrywise transforms cover every target:
//!
//! * **base** — `G_ts = k(x_t, x_s)`, inner products of the features `φ(x_t)`;
//! * **squared** — `G_ts = k(x_t, x_s)²`, inner products of the rank-one
//!   operators `φ(x_t) ⊗ φ(x_t)` under the Hilbert–Schmidt inner product
//!   (the summands of an empirical covariance operator);
//! * **lag_product** — `G_ts = k(x_t, x_s) · k(x_{t+1}, x_{s+1})`, inner
//!   products of the lagged rank-one operators `φ(x_{t+1}) ⊗ φ(x_t)` (the
//!   summands of an empirical cross-covariance operator). `n` points yield
//!   `n − 1` usable indices.
//!
//! In each case the uniform norm bound on the summands is `c = max_t √G_tt`
//! of the *transformed* Gram; [`c_bound`] computes it straight from points.
//!
//! Large trajectories never materialize the `n × n` matrix: [`LazyGram`]
//! evaluates entries on demand from the stored points (an `n = 20000` dense
//! Gram would need 3.2 GB), while [`GramMatrix`] holds small dense Grams for
//! file interchange and tests. Both implement [`GramSource`], the interface
//! the variance-proxy code consumes.

use std::path::Path;

use crate::error::{Error, Result};

/// A positive-definite kernel on `ℝ^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `k(x, y) = exp(−‖x−y‖² / (2·l²))`; unit diagonal, values in `(0, 1]`.
    Gaussian { length_scale: f64 },
    /// `k(x, y) = ⟨x, y⟩`.
    Linear,
}

impl Kernel {
    /// Gaussian kernel with length scale `l > 0` (finite).
    pub fn gaussian(length_scale: f64) -> Result<Self> {
        if !length_scale.is_finite() || length_scale <= 0.0 {
            return Err(Error::Domain(format!("Gaussian length scale must be > 0, got {length_scale}")));
        }
        Ok(Kernel::Gaussian { length_scale })
    }

    /// Linear (dot-product) kernel.
    pub fn linear() -> Self {
        Kernel::Linear
    }

    /// Evaluates `k(x, y)`.
    ///
    /// Panics in debug builds if the points have different dimensions; points
    /// drawn from one [`Points`] container always match.
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len(), "kernel arguments must share a dimension");
        match *self {
            Kernel::Gaussian { length_scale } => {
                let mut sq = 0.0;
                for (a, b) in x.iter().zip(y) {
                    let d = a - b;
                    sq += d * d;
                }
                (-sq / (2.0 * length_scale * length_scale)).exp()
            }
            Kernel::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        }
    }
}

/// A set of points in `ℝ^d`, stored flat (row-major) for cache-friendly
/// kernel evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    dim: usize,
    data: Vec<f64>,
}

impl Points {
    /// Builds a point set from rows of equal dimension ≥ 1.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = match rows.first() {
            Some(r) if !r.is_empty() => r.len(),
            Some(_) => return Err(Error::Input("points must have dimension ≥ 1".into())),
            None => return Err(Error::Input("point set must be nonempty".into())),
        };
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension(format!(
                    "point {i} has dimension {}, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Points { dim, data })
    }

    /// Builds a point set from a flat row-major buffer.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("points must have dimension ≥ 1".into()));
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::Dimension(format!(
                "flat buffer of length {} is not a nonempty multiple of dim {dim}",
                data.len()
            )));
        }
        Ok(Points { dim, data })
    }

    /// One-dimensional points from a scalar series.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::from_flat(1, xs.to_vec())
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    /// True when the set holds no points (cannot occur for a constructed set).
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Point dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The `t`-th point as a slice.
    #[inline]
    pub fn point(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }
}

/// Which entrywise Gram transform to evaluate (see the module docs).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramKind {
    Base,
    Squared,
    LagProduct,
}

impl GramKind {
    /// Parses `base`, `squared`, or `lag_product`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(GramKind::Base),
            "squared" => Ok(GramKind::Squared),
            "lag_product" => Ok(GramKind::LagProduct),
            other => Err(Error::Kind(format!(
                "unknown gram kind `{other}` (expected base, squared, lag_product)"
            ))),
        }
    }
}

/// Anything that can serve Gram entries: a dense matrix or a lazy evaluator.
pub trait GramSource {
    /// Number of indices (rows/columns).
    fn len(&self) -> usize;

    /// The entry `G_ts`. Both indices must be `< len()`.
    fn entry(&self, t: usize, s: usize) -> f64;

    /// True when the Gram has no indices.
    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest diagonal entry (every Gram diagonal is nonnegative).
    fn max_diag(&self) -> f64 {
        (0..self.len()).map(|t| self.entry(t, t)).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Matrix-free Gram evaluation over a borrowed point set.
#[derive(Debug, Clone)]
pub struct LazyGram<'a> {
    kernel: Kernel,
    kind: GramKind,
    points: &'a Points,
}

impl<'a> LazyGram<'a> {
    /// Wraps a point set; `LagProduct` needs at least 2 points (it serves
    /// `n − 1` indices), the other kinds at least 1.
    pub fn new(kernel: Kernel, kind: GramKind, points: &'a Points) -> Result<Self> {
        let needed = if kind == GramKind::LagProduct { 2 } else { 1 };
        if points.len() < needed {
            return Err(Error::Input(format!(
                "{kind:?} gram needs at least {needed} points, got {}",
                points.len()
            )));
        }
        Ok(LazyGram { kernel, kind, points })
    }

    /// The uniform norm bound `c = max_t √G_tt` on the summand features.
    pub fn c_bound(&self) -> f64 {
        c_bound(self.kernel, self.kind, self.points).expect("validated at construction")
    }
}

impl GramSource for LazyGram<'_> {
    fn len(&self) -> usize {
        match self.kind {
            GramKind::LagProduct => self.points.len() - 1,
            _ => self.points.len(),
        }
    }

    #[inline]
    fn entry(&self, t: usize, s: usize) -> f64 {
        let base = self.kernel.eval(self.points.point(t), self.points.point(s));
        match self.kind {
            GramKind::Base => base,
            GramKind::Squared => base * base,
            GramKind::LagProduct => {
                base * self.kernel.eval(self.points.point(t + 1), self.points.point(s + 1))
            }
        }
    }
}

/// Uniform norm bound on the features behind a Gram of the given kind:
///
/// * base: `max_t √k(x_t, x_t)` — bounds `‖φ(x_t)‖`;
/// * squared: `max_t k(x_t, x_t)` — bounds `‖φ(x_t) ⊗ φ(x_t)‖`;
/// * lag_product: `max_t √(k(x_t,x_t) · k(x_{t+1},x_{t+1}))` — bounds
///   `‖φ(x_{t+1}) ⊗ φ(x_t)‖`.
///
/// All three equal `max_t √G_tt` of the transformed Gram.
pub fn c_bound(kernel: Kernel, kind: GramKind, points: &Points) -> Result<f64> {
    let n = points.len();
    let needed = if kind == GramKind::LagProduct { 2 } else { 1 };
    if n < needed {
        return Err(Error::Input(format!("{kind:?} c-bound needs at least {needed} points, got {n}")));
    }
    let diag = |t: usize| kernel.eval(points.point(t), points.point(t));
    let value = match kind {
        GramKind::Base => (0..n).map(|t| diag(t).sqrt()).fold(f64::NEG_INFINITY, f64::max),
        GramKind::Squared => (0..n).map(diag).fold(f64::NEG_INFINITY, f64::max),
        GramKind::LagProduct => (0..n - 1)
            .map(|t| (diag(t) * diag(t + 1)).sqrt())
            .fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(value)
}

/// A dense symmetric Gram matrix (row-major), for small problems, file
/// interchange, and tests.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    /// Builds from rows; requires a square, finite, symmetric matrix
    /// (symmetry to within `1e−8` relative to the largest magnitude).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Input("gram matrix must be nonempty".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "gram row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        let scale = data.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
        for v in &data {
            if !v.is_finite() {
                return Err(Error::Input("gram entries must be finite".into()));
            }
        }
        for t in 0..n {
            for s in t + 1..n {
                let diff = (data[t * n + s] - data[s * n + t]).abs();
                if diff > 1e-8 * scale {
                    return Err(Error::Input(format!(
                        "gram is not symmetric: |G[{t},{s}] − G[{s},{t}]| = {diff:e}"
                    )));
                }
            }
        }
        Ok(GramMatrix { n, data })
    }

    /// Materializes any source into a dense matrix.
    pub fn from_source(source: &impl GramSource) -> Self {
        let n = source.len();
        let mut data = Vec::with_capacity(n * n);
        for t in 0..n {
            for s in 0..n {
                data.push(source.entry(t, s));
            }
        }
        GramMatrix { n, data }
    }

    /// Reads a square CSV matrix (one row per line; blank lines and `#`
    /// comments ignored).
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|_| {
                        Error::Parse(format!("{}:{}: bad entry `{tok}`", path.display(), lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    /// Writes the matrix as CSV with full `f64` round-trip precision.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        use std::fmt::Write as _;
        let mut out = String::new();
        for t in 0..self.n {
            for s in 0..self.n {
                if s > 0 {
                    out.push(',');
                }
                write!(out, "{:.17e}", self.data[t * self.n + s]).expect("string write");
            }
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

impl GramSource for GramMatrix {
    fn len(&self) -> usize {
        self.n
    }

    #[inline]
    fn entry(&self, t: usize, s: usize) -> f64 {
        self.data[t * self.n + s]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[&[f64]]) -> Points {
        Points::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn gaussian_eval_closed_form() {
        let k = Kernel::gaussian(0.5).unwrap();
        // ‖x−y‖² = 1, 2l² = 0.5 → e^(−2).
        let got = k.eval(&[0.0], &[1.0]);
        assert!((got - (-2.0f64).exp()).abs() < 1e-15);
        // Multivariate: ‖(1,1)−(0,0)‖² = 2 → e^(−4).
        let got = k.eval(&[1.0, 1.0], &[0.0, 0.0]);
        assert!((got - (-4.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn gaussian_unit_diagonal_and_range() {
        let k = Kernel::gaussian(2.0).unwrap();
        for x in [-3.0, 0.0, 7.5] {
            assert_eq!(k.eval(&[x], &[x]), 1.0);
        }
        for (x, y) in [(-1.0, 4.0), (0.0, 0.25)] {
            let v = k.eval(&[x], &[y]);
            assert!(v > 0.0 && v <= 1.0);
        }
    }

    #[test]
    fn gaussian_rejects_bad_length_scale() {
        assert!(Kernel::gaussian(0.0).is_err());
        assert!(Kernel::gaussian(-1.0).is_err());
        assert!(Kernel::gaussian(f64::NAN).is_err());
    }

    #[test]
    fn linear_eval_is_dot_product() {
        let k = Kernel::linear();
        assert_eq!(k.eval(&[1.0, 2.0], &[3.0, -1.0]), 1.0);
        assert_eq!(k.eval(&[2.0], &[4.5]), 9.0);
    }

    #[test]
    fn points_accessors_and_validation() {
        let p = pts(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        assert_eq!(p.len(), 3);
        assert_eq!(p.dim(), 2);
        assert_eq!(p.point(1), &[3.0, 4.0]);
        assert!(Points::from_rows(&[]).is_err());
        assert!(Points::from_rows(&[vec![]]).is_err());
        assert!(Points::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(Points::from_flat(2, vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn squared_gram_is_entrywise_square() {
        let p = pts(&[&[0.0], &[1.0], &[2.5]]);
        let k = Kernel::gaussian(1.0).unwrap();
        let base = LazyGram::new(k, GramKind::Base, &p).unwrap();
        let sq = LazyGram::new(k, GramKind::Squared, &p).unwrap();
        assert_eq!(sq.len(), 3);
        for t in 0..3 {
            for s in 0..3 {
                let b = base.entry(t, s);
                assert_eq!(sq.entry(t, s), b * b);
            }
        }
    }

    #[test]
    fn lag_product_gram_by_hand() {
        // Linear kernel on scalars 1, 2, 3: k_ts = x_t·x_s, so the lag gram is
        // G_ts = x_t·x_s·x_{t+1}·x_{s+1} on indices {0, 1}.
        let p = pts(&[&[1.0], &[2.0], &[3.0]]);
        let g = LazyGram::new(Kernel::linear(), GramKind::LagProduct, &p).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.entry(0, 0), 4.0); // (1·1)·(2·2)
        assert_eq!(g.entry(0, 1), 12.0); // (1·2)·(2·3)
        assert_eq!(g.entry(1, 0), 12.0);
        assert_eq!(g.entry(1, 1), 36.0); // (2·2)·(3·3)
    }

    #[test]
    fn lag_product_needs_two_points() {
        let p = pts(&[&[1.0]]);
        assert!(LazyGram::new(Kernel::linear(), GramKind::LagProduct, &p).is_err());
        assert!(c_bound(Kernel::linear(), GramKind::LagProduct, &p).is_err());
    }

    #[test]
    fn c_bound_by_hand_linear() {
        let p = pts(&[&[1.0], &[2.0], &[-3.0]]);
        let k = Kernel::linear();
        assert_eq!(c_bound(k, GramKind::Base, &p).unwrap(), 3.0);
        assert_eq!(c_bound(k, GramKind::Squared, &p).unwrap(), 9.0);
        // lag pairs: √(1·4) = 2, √(4·9) = 6.
        assert_eq!(c_bound(k, GramKind::LagProduct, &p).unwrap(), 6.0);
    }

    #[test]
    fn c_bound_gaussian_is_one_for_every_kind() {
        let p = pts(&[&[0.3], &[-2.0], &[5.0], &[1.1]]);
        let k = Kernel::gaussian(0.7).unwrap();
        for kind in [GramKind::Base, GramKind::Squared, GramKind::LagProduct] {
            assert_eq!(c_bound(k, kind, &p).unwrap(), 1.0);
        }
    }

    #[test]
    fn c_bound_equals_max_sqrt_diag_of_transformed_gram() {
        let p = pts(&[&[0.4, -1.0], &[2.0, 0.5], &[-0.3, 0.9], &[1.5, 1.5]]);
        for kernel in [Kernel::gaussian(0.8).unwrap(), Kernel::linear()] {
            for kind in [GramKind::Base, GramKind::Squared, GramKind::LagProduct] {
                let g = LazyGram::new(kernel, kind, &p).unwrap();
                let via_diag = g.max_diag().sqrt();
                let direct = c_bound(kernel, kind, &p).unwrap();
                assert!(
                    (direct - via_diag).abs() <= 1e-12 * direct.abs().max(1.0),
                    "{kernel:?} {kind:?}: {direct} vs {via_diag}"
                );
            }
        }
    }

    #[test]
    fn materialized_gram_matches_lazy_entries() {
        let p = pts(&[&[0.0], &[1.0], &[2.0], &[4.0]]);
        let k = Kernel::gaussian(1.3).unwrap();
        let lazy = LazyGram::new(k, GramKind::Squared, &p).unwrap();
        let dense = GramMatrix::from_source(&lazy);
        assert_eq!(dense.len(), lazy.len());
        for t in 0..dense.len() {
            for s in 0..dense.len() {
                assert_eq!(dense.entry(t, s), lazy.entry(t, s));
            }
        }
    }

    #[test]
    fn gram_matrix_validation() {
        assert!(GramMatrix::from_rows(vec![]).is_err());
        assert!(GramMatrix::from_rows(vec![vec![1.0, 2.0]]).is_err(), "not square");
        assert!(
            GramMatrix::from_rows(vec![vec![1.0, 0.5], vec![0.3, 1.0]]).is_err(),
            "not symmetric"
        );
        assert!(GramMatrix::from_rows(vec![vec![f64::NAN]]).is_err());
        assert!(GramMatrix::from_rows(vec![vec![1.0, 0.5], vec![0.5, 1.0]]).is_ok());
    }

    #[test]
    fn gram_csv_roundtrip_is_bitwise() {
        let p = pts(&[&[0.1], &[0.7], &[-1.9]]);
        let g = GramMatrix::from_source(&LazyGram::new(Kernel::gaussian(0.6).unwrap(), GramKind::Base, &p).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gram.csv");
        g.write_csv(&path).unwrap();
        let back = GramMatrix::read_csv(&path).unwrap();
        assert_eq!(back, g, "17-significant-digit CSV must round-trip exactly");
    }

    #[test]
    fn gram_csv_skips_comments_and_blank_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gram.csv");
        std::fs::write(&path, "# a gram\n1.0, 0.5\n\n0.5, 1.0\n").unwrap();
        let g = GramMatrix::read_csv(&path).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.entry(0, 1), 0.5);
    }
}
