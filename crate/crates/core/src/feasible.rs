//! Feasible sets and Euclidean projections onto them.
//!
//! Three set families cover every problem in this crate: L2 balls, axis
//! boxes, and the probability simplex. Projections are exact (no inner
//! iteration) and deterministic.

use crate::error::{Error, Result};
use crate::vector::DenseVector;

/// A closed convex feasible set supporting exact Euclidean projection.
#[derive(Clone, Debug, PartialEq)]
pub enum FeasibleSet {
    /// `{ v : ||v - center|| <= radius }`.
    L2Ball { radius: f64, center: DenseVector },
    /// `{ v : lower <= v <= upper }` coordinatewise.
    Box {
        lower: DenseVector,
        upper: DenseVector,
    },
    /// `{ v : v >= 0, sum(v) = 1 }`.
    Simplex { dimension: usize },
}

impl FeasibleSet {
    /// An L2 ball. `radius` must be positive and finite.
    pub fn l2_ball(radius: f64, center: DenseVector) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(FeasibleSet::L2Ball { radius, center })
    }

    /// An axis-aligned box. Bounds must have equal nonzero dimension and
    /// satisfy `lower <= upper` coordinatewise.
    pub fn box_set(lower: DenseVector, upper: DenseVector) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::DimensionMismatch {
                expected: lower.dim(),
                got: upper.dim(),
            });
        }
        if lower.dim() == 0 {
            return Err(Error::InvalidArgument("box must have dimension >= 1".into()));
        }
        for i in 0..lower.dim() {
            if lower.get(i) > upper.get(i) {
                return Err(Error::InvalidArgument(format!(
                    "box bound lower[{i}] = {} exceeds upper[{i}] = {}",
                    lower.get(i),
                    upper.get(i)
                )));
            }
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// The interval `[-half_width, half_width]` as a 1-dimensional box.
    pub fn interval(half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "interval half-width must be positive and finite, got {half_width}"
            )));
        }
        FeasibleSet::box_set(
            DenseVector::scalar(-half_width)?,
            DenseVector::scalar(half_width)?,
        )
    }

    /// The probability simplex in `dimension` coordinates.
    pub fn simplex(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument(
                "simplex must have dimension >= 1".into(),
            ));
        }
        Ok(FeasibleSet::Simplex { dimension })
    }

    /// Ambient dimension of the set.
    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::L2Ball { center, .. } => center.dim(),
            FeasibleSet::Box { lower, .. } => lower.dim(),
            FeasibleSet::Simplex { dimension } => *dimension,
        }
    }

    /// Euclidean diameter, used for step-size defaults.
    pub fn diameter(&self) -> f64 {
        match self {
            FeasibleSet::L2Ball { radius, .. } => 2.0 * radius,
            FeasibleSet::Box { lower, upper } => upper.sub(lower).expect("same dim").norm2(),
            FeasibleSet::Simplex { dimension } => {
                if *dimension > 1 {
                    std::f64::consts::SQRT_2
                } else {
                    0.0
                }
            }
        }
    }

    /// The nearest point of the set to `v` in Euclidean distance.
    pub fn project(&self, v: &DenseVector) -> Result<DenseVector> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.dim(),
            });
        }
        match self {
            FeasibleSet::L2Ball { radius, center } => {
                let offset = v.sub(center)?;
                let norm = offset.norm2();
                if norm <= *radius {
                    Ok(v.clone())
                } else {
                    center.add(&offset.scale(radius / norm))
                }
            }
            FeasibleSet::Box { lower, upper } => {
                let clamped: Vec<f64> = (0..v.dim())
                    .map(|i| v.get(i).clamp(lower.get(i), upper.get(i)))
                    .collect();
                DenseVector::new(clamped)
            }
            FeasibleSet::Simplex { dimension } => project_simplex(v, *dimension),
        }
    }

    /// True when `v` lies in the set up to tolerance `tol` (applied to the
    /// defining constraints, not to the projection distance).
    pub fn contains(&self, v: &DenseVector, tol: f64) -> bool {
        if v.dim() != self.dim() {
            return false;
        }
        match self {
            FeasibleSet::L2Ball { radius, center } => match v.dist(center) {
                Ok(d) => d <= radius + tol,
                Err(_) => false,
            },
            FeasibleSet::Box { lower, upper } => (0..v.dim())
                .all(|i| v.get(i) >= lower.get(i) - tol && v.get(i) <= upper.get(i) + tol),
            FeasibleSet::Simplex { .. } => {
                v.as_slice().iter().all(|&p| p >= -tol) && (v.sum() - 1.0).abs() <= tol
            }
        }
    }

    /// Euclidean distance from `v` to the set.
    pub fn distance(&self, v: &DenseVector) -> Result<f64> {
        v.dist(&self.project(v)?)
    }
}

/// Exact projection onto the probability simplex by the sort-and-threshold
/// method: with entries sorted in descending order, find the largest prefix
/// whose shifted entries stay positive, then clip.
fn project_simplex(v: &DenseVector, dimension: usize) -> Result<DenseVector> {
    debug_assert_eq!(v.dim(), dimension);
    let mut sorted: Vec<f64> = v.as_slice().to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite entries"));
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        prefix += u;
        let candidate = (prefix - 1.0) / (j as f64 + 1.0);
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    DenseVector::new(
        v.as_slice()
            .iter()
            .map(|&x| (x - theta).max(0.0))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dv(values: &[f64]) -> DenseVector {
        DenseVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn ball_projection_scales_radially() {
        let ball = FeasibleSet::l2_ball(1.0, DenseVector::zeros(2)).unwrap();
        let p = ball.project(&dv(&[3.0, 4.0])).unwrap();
        assert_abs_diff_eq!(p.get(0), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(1), 0.8, epsilon = 1e-15);
        let inside = dv(&[0.3, -0.2]);
        assert_eq!(ball.project(&inside).unwrap(), inside);
    }

    #[test]
    fn ball_projection_off_center() {
        let ball = FeasibleSet::l2_ball(2.0, dv(&[1.0, 1.0])).unwrap();
        let p = ball.project(&dv(&[5.0, 1.0])).unwrap();
        assert_abs_diff_eq!(p.get(0), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(1), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn box_projection_clamps() {
        let cube = FeasibleSet::box_set(dv(&[-5.0]), dv(&[5.0])).unwrap();
        assert_eq!(cube.project(&dv(&[7.0])).unwrap(), dv(&[5.0]));
        assert_eq!(cube.project(&dv(&[-9.0])).unwrap(), dv(&[-5.0]));
        assert_eq!(cube.project(&dv(&[1.25])).unwrap(), dv(&[1.25]));
    }

    #[test]
    fn simplex_projection_symmetric_point() {
        let simplex = FeasibleSet::simplex(2).unwrap();
        let p = simplex.project(&dv(&[0.8, 0.8])).unwrap();
        assert_abs_diff_eq!(p.get(0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(1), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn simplex_projection_clips_negative_mass() {
        let simplex = FeasibleSet::simplex(3).unwrap();
        let p = simplex.project(&dv(&[1.0, -2.0, 0.0])).unwrap();
        assert_abs_diff_eq!(p.get(0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(1), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(2), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.sum(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn simplex_projection_interior_shift() {
        // Projection of (0.5, -0.5): threshold theta solves the 1-active-set
        // case, giving (1, 0).
        let simplex = FeasibleSet::simplex(2).unwrap();
        let p = simplex.project(&dv(&[0.5, -0.5])).unwrap();
        assert_abs_diff_eq!(p.get(0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(1), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn contains_respects_tolerance() {
        let ball = FeasibleSet::l2_ball(1.0, DenseVector::zeros(1)).unwrap();
        assert!(ball.contains(&dv(&[1.0]), 0.0));
        assert!(!ball.contains(&dv(&[1.0 + 1e-6]), 1e-9));
        assert!(ball.contains(&dv(&[1.0 + 1e-6]), 1e-3));
        let simplex = FeasibleSet::simplex(2).unwrap();
        assert!(simplex.contains(&dv(&[0.5, 0.5]), 0.0));
        assert!(!simplex.contains(&dv(&[0.6, 0.6]), 1e-9));
    }

    #[test]
    fn constructors_reject_bad_arguments() {
        assert!(FeasibleSet::l2_ball(0.0, DenseVector::zeros(1)).is_err());
        assert!(FeasibleSet::l2_ball(-1.0, DenseVector::zeros(1)).is_err());
        assert!(FeasibleSet::box_set(dv(&[1.0]), dv(&[0.0])).is_err());
        assert!(FeasibleSet::box_set(dv(&[0.0, 0.0]), dv(&[1.0])).is_err());
        assert!(FeasibleSet::simplex(0).is_err());
    }

    #[test]
    fn diameters() {
        let ball = FeasibleSet::l2_ball(5.0, DenseVector::zeros(3)).unwrap();
        assert_eq!(ball.diameter(), 10.0);
        let cube = FeasibleSet::box_set(dv(&[-5.0]), dv(&[5.0])).unwrap();
        assert_eq!(cube.diameter(), 10.0);
        let simplex = FeasibleSet::simplex(4).unwrap();
        assert_eq!(simplex.diameter(), std::f64::consts::SQRT_2);
    }

    #[test]
    fn distance_is_zero_inside() {
        let cube = FeasibleSet::box_set(dv(&[-1.0, -1.0]), dv(&[1.0, 1.0])).unwrap();
        assert_eq!(cube.distance(&dv(&[0.2, -0.9])).unwrap(), 0.0);
        assert_abs_diff_eq!(cube.distance(&dv(&[2.0, 0.0])).unwrap(), 1.0, epsilon = 1e-15);
    }
}
