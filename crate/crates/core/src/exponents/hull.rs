use crate::error::{Error, Result};

/// Samples `f(0), …, f(n_max)` of a nondecreasing subadditive function with `f(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubadditiveSeries {
    values: Vec<f64>,
    tol: f64,
}

impl SubadditiveSeries {
    /// Validates `f(0) = 0`, monotonicity and `f(n+m) ≤ f(n) + f(m)`, all within `tol`.
    pub fn new(values: Vec<f64>, tol: f64) -> Result<Self> {
        let first = *values
            .first()
            .ok_or_else(|| Error::Series("empty series".into()))?;
        if first.abs() > tol {
            return Err(Error::Series(format!("f(0) = {first}, expected 0")));
        }
        if let Some(n) = (1..values.len()).find(|&n| values[n] < values[n - 1] - tol) {
            return Err(Error::Series(format!("decreases at n = {n}")));
        }
        for n in 1..values.len() {
            for m in 1..=n.min(values.len() - 1 - n) {
                if values[n + m] > values[n] + values[m] + tol {
                    return Err(Error::Series(format!("not subadditive at ({n}, {m})")));
                }
            }
        }
        Ok(Self { values, tol })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }
}

/// Least concave majorant of a sequence, piecewise linear between hull vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcaveHull {
    /// Integer abscissae and values of the hull vertices, increasing in `x`.
    vertices: Vec<(usize, f64)>,
}

impl ConcaveHull {
    /// Upper hull of the points `(n, values[n])`.
    pub fn of_values(values: &[f64]) -> Self {
        let mut vertices: Vec<(usize, f64)> = Vec::with_capacity(values.len());
        for (x, &y) in values.iter().enumerate() {
            while vertices.len() >= 2 {
                let (x1, y1) = vertices[vertices.len() - 2];
                let (x2, y2) = vertices[vertices.len() - 1];
                // drop the middle point when it lies on or below the chord
                let cross = (y2 - y1) * (x - x1) as f64 - (y - y1) * (x2 - x1) as f64;
                if cross <= 0.0 {
                    vertices.pop();
                } else {
                    break;
                }
            }
            vertices.push((x, y));
        }
        Self { vertices }
    }

    pub fn vertices(&self) -> &[(usize, f64)] {
        &self.vertices
    }

    /// Last abscissa covered by the samples.
    pub fn x_max(&self) -> usize {
        self.vertices.last().map_or(0, |v| v.0)
    }

    /// Hull value at real `x ≥ 0`; past the last sample the final segment is extended.
    pub fn eval(&self, x: f64) -> f64 {
        let v = &self.vertices;
        if v.len() == 1 {
            return v[0].1;
        }
        let i = v.partition_point(|&(xi, _)| (xi as f64) <= x).clamp(1, v.len() - 1);
        let (x0, y0) = v[i - 1];
        let (x1, y1) = v[i];
        y0 + (y1 - y0) * (x - x0 as f64) / (x1 - x0) as f64
    }

    /// Hull sampled at `0..=x_max`.
    pub fn values(&self) -> Vec<f64> {
        (0..=self.x_max()).map(|n| self.eval(n as f64)).collect()
    }

    /// `k²/g(k)` at real `k > 0`.
    pub fn square_ratio(&self, k: f64) -> f64 {
        k * k / self.eval(k)
    }

    /// Solves `k²/g(k) = y` for `k ∈ [1, x_max]` by bisection.
    ///
    /// Assumes the ratio is increasing there; `None` when `y` lies outside its range.
    pub fn inverse_square_ratio(&self, y: f64) -> Option<f64> {
        let (mut lo, mut hi) = (1.0, self.x_max() as f64);
        if hi < lo || y < self.square_ratio(lo) || y > self.square_ratio(hi) {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.square_ratio(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

/// Concave hull of a validated subadditive series.
pub fn concave_hull(f: &SubadditiveSeries) -> ConcaveHull {
    ConcaveHull::of_values(f.values())
}

/// Linear interpolation of integer samples at real `x`, clamped to the table.
pub(crate) fn interpolate(values: &[f64], x: f64) -> f64 {
    let last = values.len() - 1;
    if x <= 0.0 {
        return values[0];
    }
    if x >= last as f64 {
        return values[last];
    }
    let i = x.floor() as usize;
    let t = x - i as f64;
    values[i] + t * (values[i + 1] - values[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concave_input_is_fixed() {
        let f: Vec<f64> = (0..50).map(|n| (n as f64).sqrt()).collect();
        let g = concave_hull(&SubadditiveSeries::new(f.clone(), 1e-12).unwrap()).values();
        for (a, b) in f.iter().zip(&g) {
            assert!((a - b).abs() < 1e-12);
        }
        let lin: Vec<f64> = (0..20).map(|n| n as f64).collect();
        assert_eq!(ConcaveHull::of_values(&lin).values(), lin);
    }

    #[test]
    fn hull_of_step_function() {
        // f(n) = ceil(n / 3) is subadditive and not concave
        let f: Vec<f64> = (0..30).map(|n: usize| n.div_ceil(3) as f64).collect();
        let g = concave_hull(&SubadditiveSeries::new(f.clone(), 0.0).unwrap()).values();
        for n in 0..30 {
            assert!(f[n] <= g[n] + 1e-12 && g[n] <= 2.0 * f[n] + 1e-12);
        }
    }

    #[test]
    fn rejects_superadditive() {
        let f: Vec<f64> = (0..10).map(|n| (n * n) as f64).collect();
        assert!(SubadditiveSeries::new(f, 1e-9).is_err());
    }

    #[test]
    fn square_ratio_inverse() {
        let g = ConcaveHull::of_values(&(0..=40).map(|n| 2.0 * n as f64).collect::<Vec<_>>());
        let k = g.inverse_square_ratio(7.5).unwrap();
        assert!((k - 15.0).abs() < 1e-9);
        assert!(g.inverse_square_ratio(1000.0).is_none());
    }
}
