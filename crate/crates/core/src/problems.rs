//! The two benchmark saddle-point problems: a 1-d quartic synthetic saddle
//! and distributionally robust optimization (DRO) of a hinge-loss model.
//!
//! Both implement [`SaddleOracle`]: a single query returns the primal
//! subgradient of `F` and the dual subgradient of `-F`, so minimizing over
//! `x` and maximizing over `y` both look like online convex minimization.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::feasible::FeasibleSet;
use crate::vector::{DenseVector, SparseVector};

/// A convex-concave objective queried once per solver round.
///
/// `subgrads` returns `(g_x, g_y_for_h)` where `g_x` is a subgradient of
/// `F(., y)` and `g_y_for_h` is a subgradient of `-F(x, .)`; descending the
/// latter ascends `F` in the dual variable. Implementations are immutable
/// and safe for concurrent queries.
pub trait SaddleOracle {
    fn dim_x(&self) -> usize;
    fn dim_y(&self) -> usize;
    fn value(&self, x: &DenseVector, y: &DenseVector) -> Result<f64>;
    fn subgrads(&self, x: &DenseVector, y: &DenseVector) -> Result<(DenseVector, DenseVector)>;

    fn subgrad_x(&self, x: &DenseVector, y: &DenseVector) -> Result<DenseVector> {
        Ok(self.subgrads(x, y)?.0)
    }

    fn subgrad_neg_y(&self, x: &DenseVector, y: &DenseVector) -> Result<DenseVector> {
        Ok(self.subgrads(x, y)?.1)
    }

    /// Euclidean norm bound on `subgrad_x` over the feasible sets.
    fn bound_x(&self) -> f64;

    /// Norm bound on `subgrad_neg_y` over the feasible sets; Euclidean for
    /// Euclidean duals, infinity norm for simplex duals.
    fn bound_y(&self) -> f64;
}

/// `F(x, y) = (rho/4) x^4 + x y - (rho/4) y^4` on `[-R_x, R_x] x [-R_y, R_y]`.
///
/// Strictly convex in `x`, strictly concave in `y`, saddle point at the
/// origin, and the inner optimizations have closed forms (clipped cube
/// roots), so the duality gap is computable exactly.
#[derive(Clone, Debug)]
pub struct SyntheticProblem {
    rho: f64,
    r_x: f64,
    r_y: f64,
}

impl SyntheticProblem {
    pub fn new(rho: f64, r_x: f64, r_y: f64) -> Result<Self> {
        for (name, v) in [("rho", rho), ("r_x", r_x), ("r_y", r_y)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(SyntheticProblem { rho, r_x, r_y })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn set_x(&self) -> FeasibleSet {
        FeasibleSet::interval(self.r_x).expect("validated at construction")
    }

    pub fn set_y(&self) -> FeasibleSet {
        FeasibleSet::interval(self.r_y).expect("validated at construction")
    }

    /// The saddle point (0, 0).
    pub fn optimum(&self) -> (DenseVector, DenseVector) {
        (DenseVector::zeros(1), DenseVector::zeros(1))
    }

    fn value_scalar(&self, x: f64, y: f64) -> f64 {
        self.rho / 4.0 * x.powi(4) + x * y - self.rho / 4.0 * y.powi(4)
    }

    /// Exact duality gap at `(x, y)`:
    /// `max_{y'} F(x, y') - min_{x'} F(x', y)` with both inner problems
    /// solved in closed form. The maximizer is `cbrt(x/rho)` clipped to the
    /// box, the minimizer `cbrt(-y/rho)` likewise.
    pub fn exact_gap(&self, x: f64, y: f64) -> f64 {
        let y_star = (x / self.rho).cbrt().clamp(-self.r_y, self.r_y);
        let x_star = (-y / self.rho).cbrt().clamp(-self.r_x, self.r_x);
        self.value_scalar(x, y_star) - self.value_scalar(x_star, y)
    }
}

impl SaddleOracle for SyntheticProblem {
    fn dim_x(&self) -> usize {
        1
    }

    fn dim_y(&self) -> usize {
        1
    }

    fn value(&self, x: &DenseVector, y: &DenseVector) -> Result<f64> {
        Ok(self.value_scalar(x.only(), y.only()))
    }

    fn subgrads(&self, x: &DenseVector, y: &DenseVector) -> Result<(DenseVector, DenseVector)> {
        let (x, y) = (x.only(), y.only());
        let gx = self.rho * x.powi(3) + y;
        let gy_for_h = self.rho * y.powi(3) - x;
        Ok((DenseVector::scalar(gx)?, DenseVector::scalar(gy_for_h)?))
    }

    fn bound_x(&self) -> f64 {
        self.rho * self.r_x.powi(3) + self.r_y
    }

    fn bound_y(&self) -> f64 {
        self.r_x + self.rho * self.r_y.powi(3)
    }
}

/// Sign of the `lambda/2 ||p - 1/n||^2` term in the DRO objective.
///
/// `Plus` is the objective as stated; it makes `F` convex rather than
/// concave in `p`, so the worst-case distribution sits at a simplex vertex.
/// `Minus` is the concave variant. Both are supported; runs record which
/// was used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RegularizerSign {
    #[default]
    Plus,
    Minus,
}

impl RegularizerSign {
    pub fn as_f64(self) -> f64 {
        match self {
            RegularizerSign::Plus => 1.0,
            RegularizerSign::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for RegularizerSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+1" | "1" | "plus" => Ok(RegularizerSign::Plus),
            "-1" | "minus" => Ok(RegularizerSign::Minus),
            other => Err(Error::InvalidArgument(format!(
                "unknown regularizer_sign '{other}' (expected +1 or -1)"
            ))),
        }
    }
}

/// Distributionally robust hinge-loss minimization:
/// `F(w, p) = sum_i p_i l_i(w) + sign * (lambda/2) ||p - 1/n||^2
///           + (rho/2) ||w||^2`
/// with `l_i(w) = max(0, 1 - y_i <w, x_i>)`, `w` in an L2 ball of radius
/// `R`, `p` in the probability simplex.
#[derive(Clone, Debug)]
pub struct DroProblem {
    features: Vec<SparseVector>,
    labels: Vec<f64>,
    dim: usize,
    r: f64,
    lambda: f64,
    rho: f64,
    sign: RegularizerSign,
    max_feature_norm: f64,
}

impl DroProblem {
    /// Builds the problem from binary-labeled samples. Labels must be
    /// exactly +1 or -1 (run a label remap first for raw multiclass data).
    pub fn new(
        features: Vec<SparseVector>,
        labels: Vec<f64>,
        dim: usize,
        r: f64,
        lambda: f64,
        rho: f64,
        sign: RegularizerSign,
    ) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                got: labels.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidArgument(format!(
                "DRO labels must be +1 or -1, got {bad}"
            )));
        }
        if let Some(f) = features.iter().find(|f| f.min_dim() > dim) {
            return Err(Error::InvalidArgument(format!(
                "feature index {} exceeds declared dimension {dim}",
                f.min_dim() - 1
            )));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "R must be positive and finite, got {r}"
            )));
        }
        for (name, v) in [("lambda", lambda), ("rho", rho)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be non-negative and finite, got {v}"
                )));
            }
        }
        let max_feature_norm = features.iter().fold(0.0_f64, |m, f| m.max(f.norm2()));
        Ok(DroProblem {
            features,
            labels,
            dim,
            r,
            lambda,
            rho,
            sign,
            max_feature_norm,
        })
    }

    pub fn from_dataset(
        ds: &Dataset,
        r: f64,
        lambda: f64,
        rho: f64,
        sign: RegularizerSign,
    ) -> Result<Self> {
        DroProblem::new(
            ds.features().to_vec(),
            ds.labels().to_vec(),
            ds.dimension(),
            r,
            lambda,
            rho,
            sign,
        )
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn sign(&self) -> RegularizerSign {
        self.sign
    }

    pub fn set_w(&self) -> FeasibleSet {
        FeasibleSet::l2_ball(self.r, DenseVector::zeros(self.dim)).expect("validated")
    }

    pub fn set_p(&self) -> FeasibleSet {
        FeasibleSet::simplex(self.n()).expect("n >= 1")
    }

    /// Per-sample hinge losses at `w`.
    pub fn hinges(&self, w: &DenseVector) -> Result<DenseVector> {
        if w.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: w.dim(),
            });
        }
        let losses: Vec<f64> = self
            .features
            .iter()
            .zip(&self.labels)
            .map(|(x, &y)| (1.0 - y * x.dot_dense(w)).max(0.0))
            .collect();
        DenseVector::new(losses)
    }

    fn check_dims(&self, w: &DenseVector, p: &DenseVector) -> Result<()> {
        if w.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: w.dim(),
            });
        }
        if p.dim() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: p.dim(),
            });
        }
        Ok(())
    }

    /// Squared distance of `p` from the uniform distribution.
    fn uniform_dist_sq(&self, p: &DenseVector) -> f64 {
        let u = 1.0 / self.n() as f64;
        let mut acc = 0.0;
        for i in 0..p.dim() {
            let d = p.get(i) - u;
            acc += d * d;
        }
        acc
    }
}

impl SaddleOracle for DroProblem {
    fn dim_x(&self) -> usize {
        self.dim
    }

    fn dim_y(&self) -> usize {
        self.n()
    }

    fn value(&self, w: &DenseVector, p: &DenseVector) -> Result<f64> {
        self.check_dims(w, p)?;
        let losses = self.hinges(w)?;
        let weighted = losses.dot(p)?;
        let reg_p = self.sign.as_f64() * self.lambda / 2.0 * self.uniform_dist_sq(p);
        let reg_w = self.rho / 2.0 * w.dot(w)?;
        Ok(weighted + reg_p + reg_w)
    }

    fn subgrads(&self, w: &DenseVector, p: &DenseVector) -> Result<(DenseVector, DenseVector)> {
        self.check_dims(w, p)?;
        let u = 1.0 / self.n() as f64;
        let mut gw = vec![0.0; self.dim];
        let mut gp = vec![0.0; self.n()];
        for (i, slot) in gp.iter_mut().enumerate() {
            let x = &self.features[i];
            let y = self.labels[i];
            let margin = 1.0 - y * x.dot_dense(w);
            // Hinge subgradient: -y*x when the margin is strictly positive,
            // zero otherwise (the tie at exactly zero takes the zero branch).
            if margin > 0.0 {
                x.add_into(&mut gw, -y * p.get(i));
            }
            let loss = margin.max(0.0);
            *slot = -(loss + self.sign.as_f64() * self.lambda * (p.get(i) - u));
        }
        for (gi, wi) in gw.iter_mut().zip(w.as_slice()) {
            *gi += self.rho * wi;
        }
        Ok((DenseVector::new(gw)?, DenseVector::new(gp)?))
    }

    fn bound_x(&self) -> f64 {
        self.max_feature_norm + self.rho * self.r
    }

    fn bound_y(&self) -> f64 {
        let mut worst = 0.0_f64;
        for f in &self.features {
            worst = worst.max(1.0 + self.r * f.norm2());
        }
        worst + self.lambda
    }
}

/// Either benchmark problem, for callers that dispatch at runtime (the CLI,
/// gap computation).
#[derive(Clone, Debug)]
pub enum Problem {
    Synthetic(SyntheticProblem),
    Dro(DroProblem),
}

impl Problem {
    pub fn feasible_x(&self) -> FeasibleSet {
        match self {
            Problem::Synthetic(p) => p.set_x(),
            Problem::Dro(p) => p.set_w(),
        }
    }

    pub fn feasible_y(&self) -> FeasibleSet {
        match self {
            Problem::Synthetic(p) => p.set_y(),
            Problem::Dro(p) => p.set_p(),
        }
    }

    /// The known optimum, when the problem declares one.
    pub fn known_optimum(&self) -> Option<(DenseVector, DenseVector)> {
        match self {
            Problem::Synthetic(p) => Some(p.optimum()),
            Problem::Dro(_) => None,
        }
    }
}

impl SaddleOracle for Problem {
    fn dim_x(&self) -> usize {
        match self {
            Problem::Synthetic(p) => p.dim_x(),
            Problem::Dro(p) => p.dim_x(),
        }
    }

    fn dim_y(&self) -> usize {
        match self {
            Problem::Synthetic(p) => p.dim_y(),
            Problem::Dro(p) => p.dim_y(),
        }
    }

    fn value(&self, x: &DenseVector, y: &DenseVector) -> Result<f64> {
        match self {
            Problem::Synthetic(p) => p.value(x, y),
            Problem::Dro(p) => p.value(x, y),
        }
    }

    fn subgrads(&self, x: &DenseVector, y: &DenseVector) -> Result<(DenseVector, DenseVector)> {
        match self {
            Problem::Synthetic(p) => p.subgrads(x, y),
            Problem::Dro(p) => p.subgrads(x, y),
        }
    }

    fn bound_x(&self) -> f64 {
        match self {
            Problem::Synthetic(p) => p.bound_x(),
            Problem::Dro(p) => p.bound_x(),
        }
    }

    fn bound_y(&self) -> f64 {
        match self {
            Problem::Synthetic(p) => p.bound_y(),
            Problem::Dro(p) => p.bound_y(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dv(values: &[f64]) -> DenseVector {
        DenseVector::new(values.to_vec()).unwrap()
    }

    fn synthetic() -> SyntheticProblem {
        SyntheticProblem::new(0.5, 5.0, 5.0).unwrap()
    }

    #[test]
    fn synthetic_saddle_point_values() {
        let p = synthetic();
        let zero = DenseVector::zeros(1);
        assert_eq!(p.value(&zero, &zero).unwrap(), 0.0);
        let (gx, gy) = p.subgrads(&zero, &zero).unwrap();
        assert_eq!(gx.only(), 0.0);
        assert_eq!(gy.only(), 0.0);
    }

    #[test]
    fn synthetic_values_at_one_one() {
        let p = synthetic();
        let one = dv(&[1.0]);
        assert_eq!(p.value(&one, &one).unwrap(), 1.0);
        let (gx, gy) = p.subgrads(&one, &one).unwrap();
        assert_eq!(gx.only(), 1.5);
        assert_eq!(gy.only(), -0.5);
    }

    #[test]
    fn synthetic_gap_closed_form() {
        let p = synthetic();
        assert_eq!(p.exact_gap(0.0, 0.0), 0.0);
        assert_abs_diff_eq!(p.exact_gap(1.0, 1.0), 2.1398814, epsilon = 1e-6);
        // Gap is nonnegative everywhere feasible.
        assert!(p.exact_gap(-3.0, 4.5) >= 0.0);
    }

    #[test]
    fn synthetic_gap_respects_box_clipping() {
        // Small rho pushes the unclipped maximizer cbrt(x/rho) beyond the
        // box; the clipped solution must be used.
        let p = SyntheticProblem::new(0.01, 2.0, 2.0).unwrap();
        let y_star_unclipped = (1.0_f64 / 0.01).cbrt();
        assert!(y_star_unclipped > 2.0);
        let gap = p.exact_gap(1.0, 0.0);
        // max_y at y = 2: F(1,2) - min_x F(x,0); min at x=0 gives 0.
        let expected = p.value(&dv(&[1.0]), &dv(&[2.0])).unwrap();
        assert_abs_diff_eq!(gap, expected, epsilon = 1e-12);
    }

    #[test]
    fn synthetic_bounds() {
        let p = synthetic();
        assert_eq!(p.bound_x(), 67.5);
        assert_eq!(p.bound_y(), 67.5);
    }

    #[test]
    fn synthetic_antisymmetry() {
        // F(x, y) = phi(x) + xy - phi(y) satisfies F(-y, x) = -F(x, y),
        // which forces the saddle value to be 0.
        let p = synthetic();
        for (x, y) in [(1.0, 2.0), (-0.3, 0.7), (4.9, -4.9)] {
            let fwd = p.value(&dv(&[x]), &dv(&[y])).unwrap();
            let rev = p.value(&dv(&[-y]), &dv(&[x])).unwrap();
            assert_abs_diff_eq!(fwd, -rev, epsilon = 1e-12);
        }
    }

    #[test]
    fn synthetic_gradients_match_finite_differences() {
        let p = synthetic();
        let h = 1e-6;
        for (x, y) in [(1.0, 1.0), (-2.0, 0.5), (3.1, -4.0)] {
            let (gx, gy) = p.subgrads(&dv(&[x]), &dv(&[y])).unwrap();
            let dx = (p.value(&dv(&[x + h]), &dv(&[y])).unwrap()
                - p.value(&dv(&[x - h]), &dv(&[y])).unwrap())
                / (2.0 * h);
            let dy = (p.value(&dv(&[x]), &dv(&[y + h])).unwrap()
                - p.value(&dv(&[x]), &dv(&[y - h])).unwrap())
                / (2.0 * h);
            assert_abs_diff_eq!(gx.only(), dx, epsilon = 1e-5 * dx.abs().max(1.0));
            // gy is the subgradient of -F.
            assert_abs_diff_eq!(gy.only(), -dy, epsilon = 1e-5 * dy.abs().max(1.0));
        }
    }

    fn tiny_dro(sign: RegularizerSign) -> DroProblem {
        // Two samples in 2-d: x0 = (1, 0) labeled +1, x1 = (0, 2) labeled -1.
        let features = vec![
            SparseVector::new(vec![(0, 1.0)]).unwrap(),
            SparseVector::new(vec![(1, 2.0)]).unwrap(),
        ];
        DroProblem::new(features, vec![1.0, -1.0], 2, 10.0, 0.5, 0.1, sign).unwrap()
    }

    #[test]
    fn dro_value_at_origin_is_mean_hinge() {
        let p = tiny_dro(RegularizerSign::Plus);
        let w = DenseVector::zeros(2);
        let uniform = dv(&[0.5, 0.5]);
        // All hinges are 1 at w = 0 and the lambda term vanishes at uniform p.
        assert_eq!(p.value(&w, &uniform).unwrap(), 1.0);
    }

    #[test]
    fn dro_subgrads_hand_check() {
        let p = tiny_dro(RegularizerSign::Plus);
        let w = dv(&[0.5, 0.25]);
        let pp = dv(&[0.75, 0.25]);
        // Margins: 1 - 1*0.5 = 0.5 > 0; 1 - (-1)*0.5 = 1.5 > 0. Both active.
        let (gw, gp) = p.subgrads(&w, &pp).unwrap();
        // gw = 0.75*(-1,0) + 0.25*(0,2) + 0.1*w.
        assert_abs_diff_eq!(gw.get(0), -0.75 + 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(gw.get(1), 0.5 + 0.025, epsilon = 1e-15);
        // gp = -(loss + lambda*(p - 1/2)).
        assert_abs_diff_eq!(gp.get(0), -(0.5 + 0.5 * 0.25), epsilon = 1e-15);
        assert_abs_diff_eq!(gp.get(1), -(1.5 + 0.5 * (-0.25)), epsilon = 1e-15);
    }

    #[test]
    fn dro_hinge_tie_takes_zero_branch() {
        // w chosen so sample 0 has margin exactly 0: y*<w,x> = 1.
        let p = tiny_dro(RegularizerSign::Plus);
        let w = dv(&[1.0, 0.0]);
        let uniform = dv(&[0.5, 0.5]);
        let (gw, _) = p.subgrads(&w, &uniform).unwrap();
        // Only sample 1 contributes: 0.5*(0,2) plus rho*w.
        assert_abs_diff_eq!(gw.get(0), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(gw.get(1), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn dro_sign_flips_regularizer() {
        let plus = tiny_dro(RegularizerSign::Plus);
        let minus = tiny_dro(RegularizerSign::Minus);
        let w = DenseVector::zeros(2);
        let skewed = dv(&[0.9, 0.1]);
        let base = 0.9 + 0.1; // weighted hinges, all ones
        let reg = 0.5 / 2.0 * (0.4_f64.powi(2) * 2.0);
        assert_abs_diff_eq!(plus.value(&w, &skewed).unwrap(), base + reg, epsilon = 1e-12);
        assert_abs_diff_eq!(minus.value(&w, &skewed).unwrap(), base - reg, epsilon = 1e-12);
    }

    #[test]
    fn dro_bounds() {
        let p = tiny_dro(RegularizerSign::Plus);
        assert_eq!(p.bound_x(), 2.0 + 0.1 * 10.0);
        assert_eq!(p.bound_y(), 1.0 + 10.0 * 2.0 + 0.5);
    }

    #[test]
    fn dro_single_sample_forces_point_simplex() {
        let features = vec![SparseVector::new(vec![(0, 3.0)]).unwrap()];
        let p = DroProblem::new(features, vec![1.0], 1, 5.0, 0.0, 0.2, RegularizerSign::Plus)
            .unwrap();
        let w = dv(&[0.1]);
        let point = dv(&[1.0]);
        let (gw, _) = p.subgrads(&w, &point).unwrap();
        // Margin 1 - 0.3 > 0, so gw = -3 + rho*w.
        assert_abs_diff_eq!(gw.get(0), -3.0 + 0.02, epsilon = 1e-15);
    }

    #[test]
    fn dro_affine_in_p_when_lambda_zero() {
        let features = vec![
            SparseVector::new(vec![(0, 1.0)]).unwrap(),
            SparseVector::new(vec![(1, 2.0)]).unwrap(),
        ];
        let prob =
            DroProblem::new(features, vec![1.0, -1.0], 2, 10.0, 0.0, 0.1, RegularizerSign::Plus)
                .unwrap();
        let w = dv(&[0.3, -0.2]);
        let p1 = dv(&[0.8, 0.2]);
        let p2 = dv(&[0.1, 0.9]);
        let alpha = 0.37;
        let mix = p1.scale(alpha).add(&p2.scale(1.0 - alpha)).unwrap();
        let lhs = prob.value(&w, &mix).unwrap();
        let rhs = alpha * prob.value(&w, &p1).unwrap() + (1.0 - alpha) * prob.value(&w, &p2).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn dro_rejects_bad_labels() {
        let features = vec![SparseVector::new(vec![(0, 1.0)]).unwrap()];
        assert!(DroProblem::new(
            features,
            vec![2.0],
            1,
            1.0,
            0.0,
            0.0,
            RegularizerSign::Plus
        )
        .is_err());
    }
}
