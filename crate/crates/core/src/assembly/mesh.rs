use super::ModelSpec;
use crate::error::{Error, Result};

/// Node positions of the two sub-intervals `[-L, 0]` and `[0, L]`.
///
/// Both node lists are increasing; the left list ends at 0 and the right list
/// starts at 0. Single-field models leave the left list empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMesh {
    left: Vec<f64>,
    right: Vec<f64>,
}

impl SpatialMesh {
    /// Uniform left mesh with `n_left` elements and a right mesh with
    /// `n_right` elements having nodes at `l0` and `l1`.
    pub fn fitted(spec: &ModelSpec, n_left: usize, n_right: usize) -> Result<Self> {
        spec.validate()?;
        let l = spec.length;
        let left = if spec.kind.left_field().is_some() {
            if n_left < 1 {
                return Err(Error::domain("the left mesh needs at least one element"));
            }
            (0..=n_left).map(|i| -l + l * i as f64 / n_left as f64).collect()
        } else {
            Vec::new()
        };
        if n_right < 3 {
            return Err(Error::domain(format!(
                "the damped side needs at least 3 elements to resolve (l0, l1), got {n_right}"
            )));
        }
        let breaks = [0.0, spec.l0, spec.l1, l];
        let counts = split_counts(n_right, &breaks);
        let mut right = vec![0.0];
        for (seg, &count) in counts.iter().enumerate() {
            let (a, b) = (breaks[seg], breaks[seg + 1]);
            for i in 1..=count {
                right.push(if i == count {
                    b
                } else {
                    a + (b - a) * i as f64 / count as f64
                });
            }
        }
        Ok(Self { left, right })
    }

    /// Same element count on both sides.
    pub fn uniform(spec: &ModelSpec, n: usize) -> Result<Self> {
        Self::fitted(spec, n, n)
    }

    /// Arbitrary node lists; assembly rejects them unless they are fitted.
    pub fn from_nodes(left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !left.is_empty() && (left.len() < 2 || !increasing(&left) || *left.last().unwrap() != 0.0) {
            return Err(Error::domain("left nodes must increase and end at 0"));
        }
        if right.len() < 2 || !increasing(&right) || right[0] != 0.0 {
            return Err(Error::domain("right nodes must increase and start at 0"));
        }
        Ok(Self { left, right })
    }

    pub fn left_nodes(&self) -> &[f64] {
        &self.left
    }

    pub fn right_nodes(&self) -> &[f64] {
        &self.right
    }

    pub fn left_elements(&self) -> usize {
        self.left.len().saturating_sub(1)
    }

    pub fn right_elements(&self) -> usize {
        self.right.len() - 1
    }

    /// Largest element length on each side, `(left, right)`; 0 for a missing side.
    pub fn max_spacing(&self) -> (f64, f64) {
        let h = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        (h(&self.left), h(&self.right))
    }

    /// Whether `l0` and `l1` are mesh nodes of the right side.
    pub fn is_fitted(&self, l0: f64, l1: f64) -> bool {
        let tol = 1e-12 * self.right.last().copied().unwrap_or(1.0);
        let has = |x: f64| self.right.iter().any(|&p| (p - x).abs() <= tol);
        has(l0) && has(l1)
    }
}

// Largest-remainder split of `n` elements over the segments, each at least 1.
fn split_counts(n: usize, breaks: &[f64]) -> Vec<usize> {
    let total = breaks[breaks.len() - 1] - breaks[0];
    let segs = breaks.len() - 1;
    let extra = n - segs;
    let shares: Vec<f64> = breaks.windows(2).map(|w| (w[1] - w[0]) / total * n as f64).collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| (s.floor() as usize).max(1)).collect();
    let mut used: usize = counts.iter().sum();
    while used > n {
        let i = (0..segs)
            .filter(|&i| counts[i] > 1)
            .max_by(|&a, &b| (counts[a] as f64 - shares[a]).total_cmp(&(counts[b] as f64 - shares[b])))
            .expect("n >= number of segments");
        counts[i] -= 1;
        used -= 1;
    }
    while used < n {
        let i = (0..segs)
            .max_by(|&a, &b| (shares[a] - counts[a] as f64).total_cmp(&(shares[b] - counts[b] as f64)))
            .unwrap();
        counts[i] += 1;
        used += 1;
    }
    debug_assert!(extra + segs == counts.iter().sum::<usize>());
    counts
}
