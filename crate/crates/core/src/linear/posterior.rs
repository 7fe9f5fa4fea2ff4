use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};

/// Which covariance a Gaussian posterior samples with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceApproximation {
    /// The full covariance.
    #[default]
    Exact,
    /// `Diag(Σ)`: keeps the marginal variances.
    Diag,
    /// `Diag(Σ⁻¹)⁻¹`: keeps the conditional variances.
    PrecisionDiag,
}

/// Ridge sufficient statistics with the derived precision, its Cholesky
/// factor and the posterior mean. Prior mean is zero and prior precision is
/// `lambda * I`.
#[derive(Debug, Clone)]
pub struct RidgeStats {
    lambda: f64,
    xx: DMatrix<f64>,
    xy: DVector<f64>,
    yy: f64,
    count: usize,
    precision: DMatrix<f64>,
    chol_lower: DMatrix<f64>,
    mu: DVector<f64>,
}

impl RidgeStats {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::param(format!("ridge prior lambda must be positive, got {lambda}")));
        }
        Ok(RidgeStats {
            lambda,
            xx: DMatrix::zeros(dim, dim),
            xy: DVector::zeros(dim),
            yy: 0.0,
            count: 0,
            precision: DMatrix::identity(dim, dim) * lambda,
            chol_lower: DMatrix::identity(dim, dim) * lambda.sqrt(),
            mu: DVector::zeros(dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.xy.len()
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: len,
            });
        }
        Ok(())
    }

    /// Adds one observation without re-solving.
    fn accumulate(&mut self, x: &[f64], y: f64) {
        let x = DVector::from_column_slice(x);
        self.xx.ger(1.0, &x, &x, 1.0);
        self.xy.axpy(y, &x, 1.0);
        self.yy += y * y;
        self.count += 1;
    }

    fn refresh(&mut self) -> Result<()> {
        let mut precision = self.xx.clone();
        for i in 0..self.dim() {
            precision[(i, i)] += self.lambda;
        }
        let chol = precision.clone().cholesky().ok_or_else(|| {
            Error::NumericalDegeneracy("precision matrix lost positive definiteness".into())
        })?;
        self.mu = chol.solve(&self.xy);
        self.chol_lower = chol.unpack();
        self.precision = precision;
        Ok(())
    }

    pub fn update(&mut self, x: &[f64], y: f64) -> Result<()> {
        self.check_dim(x.len())?;
        self.accumulate(x, y);
        self.refresh()
    }

    /// Fits all rows of `x` (n×d) against `y` in one pass.
    pub fn fit_batch(&mut self, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
        self.check_dim(x.ncols())?;
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                actual: y.len(),
            });
        }
        self.xx += x.transpose() * x;
        self.xy += x.transpose() * y;
        self.yy += y.dot(y);
        self.count += x.nrows();
        self.refresh()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn count(&self) -> usize {
        self.count
    }
    pub fn mean(&self) -> &DVector<f64> {
        &self.mu
    }
    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }
    pub fn suff_xx(&self) -> &DMatrix<f64> {
        &self.xx
    }
    pub fn suff_xy(&self) -> &DVector<f64> {
        &self.xy
    }
    pub fn suff_yy(&self) -> f64 {
        self.yy
    }

    /// `(XᵀX + Λ₀)⁻¹`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let inv_lower = self
            .chol_lower
            .solve_lower_triangular(&DMatrix::identity(self.dim(), self.dim()))
            .expect("cholesky factor has a positive diagonal");
        inv_lower.transpose() * inv_lower
    }

    /// Residual term `YᵀY − μᵀ Σ⁻¹ μ` of the noise-scale update.
    fn residual(&self) -> f64 {
        self.yy - self.mu.dot(&self.xy)
    }
}

/// Precomputed square-root factor for drawing `N(0, Σ̃)`.
#[derive(Debug, Clone)]
pub enum SamplingFactor {
    /// Lower Cholesky factor `L` of the precision; `L⁻ᵀ z` has covariance `Σ`.
    Precision(DMatrix<f64>),
    /// Independent standard deviations.
    Diagonal(DVector<f64>),
}

impl SamplingFactor {
    pub fn new(stats: &RidgeStats, approx: CovarianceApproximation) -> Self {
        match approx {
            CovarianceApproximation::Exact => SamplingFactor::Precision(stats.chol_lower.clone()),
            CovarianceApproximation::Diag => {
                let cov = stats.covariance();
                SamplingFactor::Diagonal(cov.diagonal().map(f64::sqrt))
            }
            CovarianceApproximation::PrecisionDiag => {
                SamplingFactor::Diagonal(stats.precision.diagonal().map(|p| p.recip().sqrt()))
            }
        }
    }

    /// Draws a zero-mean vector with covariance `scale² · Σ̃`.
    pub fn draw<R: Rng + ?Sized>(&self, scale: f64, rng: &mut R) -> DVector<f64> {
        match self {
            SamplingFactor::Precision(lower) => {
                let z = DVector::from_fn(lower.nrows(), |_, _| rng.sample::<f64, _>(StandardNormal));
                let v = lower
                    .tr_solve_lower_triangular(&z)
                    .expect("cholesky factor has a positive diagonal");
                v * scale
            }
            SamplingFactor::Diagonal(sd) => {
                DVector::from_fn(sd.len(), |i, _| scale * sd[i] * rng.sample::<f64, _>(StandardNormal))
            }
        }
    }
}

/// Hyperparameters of the Normal-Inverse-Gamma prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NigPrior {
    pub lambda: f64,
    pub a0: f64,
    pub b0: f64,
}

impl NigPrior {
    pub fn new(lambda: f64, a0: f64, b0: f64) -> Result<Self> {
        for (name, v) in [("lambda", lambda), ("a0", a0), ("b0", b0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(NigPrior { lambda, a0, b0 })
    }

    /// `E[σ²]` under the prior, defined for `a0 > 1`.
    pub fn prior_noise_mean(&self) -> f64 {
        self.b0 / (self.a0 - 1.0)
    }
}

/// Joint posterior over regression weights and noise variance:
/// `σ² ~ IG(a, b)`, `β | σ² ~ N(μ, σ² Σ)`.
#[derive(Debug, Clone)]
pub struct NigPosterior {
    stats: RidgeStats,
    prior: NigPrior,
    a: f64,
    b: f64,
}

impl NigPosterior {
    pub fn new(dim: usize, prior: NigPrior) -> Result<Self> {
        Ok(NigPosterior {
            stats: RidgeStats::new(dim, prior.lambda)?,
            prior,
            a: prior.a0,
            b: prior.b0,
        })
    }

    /// Evaluates the closed form once on all rows of `x` (n×d).
    pub fn batch(x: &DMatrix<f64>, y: &DVector<f64>, prior: NigPrior) -> Result<Self> {
        let mut post = NigPosterior::new(x.ncols(), prior)?;
        post.stats.fit_batch(x, y)?;
        post.refresh_noise()?;
        Ok(post)
    }

    pub fn update(&mut self, x: &[f64], y: f64) -> Result<()> {
        self.stats.update(x, y)?;
        self.refresh_noise()
    }

    fn refresh_noise(&mut self) -> Result<()> {
        self.a = self.prior.a0 + self.stats.count as f64 / 2.0;
        let b = self.prior.b0 + 0.5 * self.stats.residual();
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::NumericalDegeneracy(format!(
                "inverse-gamma scale became {b} after {} observations",
                self.stats.count
            )));
        }
        self.b = b;
        Ok(())
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn prior(&self) -> NigPrior {
        self.prior
    }
    pub fn stats(&self) -> &RidgeStats {
        &self.stats
    }
    pub fn mean(&self) -> &DVector<f64> {
        self.stats.mean()
    }

    /// `σ² = b / Gamma(a, 1)`.
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let gamma = Gamma::new(self.a, 1.0).expect("shape is positive");
        self.b / gamma.sample(rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(
        &self,
        factor: &SamplingFactor,
        rng: &mut R,
    ) -> (DVector<f64>, f64) {
        let sigma2 = self.sample_noise(rng);
        let beta = self.stats.mean() + factor.draw(sigma2.sqrt(), rng);
        (beta, sigma2)
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        approx: CovarianceApproximation,
        rng: &mut R,
    ) -> (DVector<f64>, f64) {
        self.sample_with(&SamplingFactor::new(&self.stats, approx), rng)
    }
}

/// Gaussian posterior over weights with a known noise variance:
/// `β ~ N(μ, σ² Σ)`.
#[derive(Debug, Clone)]
pub struct GaussianLinearPosterior {
    stats: RidgeStats,
    noise_var: f64,
}

impl GaussianLinearPosterior {
    /// `noise_var == 0` gives a point mass at the ridge mean.
    pub fn new(dim: usize, lambda: f64, noise_var: f64) -> Result<Self> {
        if !(noise_var >= 0.0 && noise_var.is_finite()) {
            return Err(Error::param(format!("noise variance must be non-negative, got {noise_var}")));
        }
        Ok(GaussianLinearPosterior {
            stats: RidgeStats::new(dim, lambda)?,
            noise_var,
        })
    }

    pub fn batch(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, noise_var: f64) -> Result<Self> {
        let mut post = GaussianLinearPosterior::new(x.ncols(), lambda, noise_var)?;
        post.stats.fit_batch(x, y)?;
        Ok(post)
    }

    pub fn update(&mut self, x: &[f64], y: f64) -> Result<()> {
        self.stats.update(x, y)
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }
    pub fn stats(&self) -> &RidgeStats {
        &self.stats
    }
    pub fn mean(&self) -> &DVector<f64> {
        self.stats.mean()
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, factor: &SamplingFactor, rng: &mut R) -> DVector<f64> {
        if self.noise_var == 0.0 {
            return self.stats.mean().clone();
        }
        self.stats.mean() + factor.draw(self.noise_var.sqrt(), rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, approx: CovarianceApproximation, rng: &mut R) -> DVector<f64> {
        self.sample_with(&SamplingFactor::new(&self.stats, approx), rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn prior() -> NigPrior {
        NigPrior::new(1.0, 6.0, 6.0).unwrap()
    }

    #[test]
    fn init_covariance_is_inverse_ridge() {
        let post = NigPosterior::new(2, NigPrior::new(0.25, 6.0, 6.0).unwrap()).unwrap();
        let cov = post.stats().covariance();
        assert!((cov - DMatrix::identity(2, 2) * 4.0).norm() < 1e-12);
        assert_eq!(post.mean(), &DVector::zeros(2));
        assert_eq!((post.a(), post.b()), (6.0, 6.0));
    }

    #[test]
    fn prior_noise_mean() {
        assert!((NigPrior::new(1.0, 6.0, 6.0).unwrap().prior_noise_mean() - 1.2).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_hyperparameters() {
        assert!(NigPrior::new(0.0, 1.0, 1.0).is_err());
        assert!(NigPrior::new(1.0, -1.0, 1.0).is_err());
        assert!(NigPrior::new(1.0, 1.0, 0.0).is_err());
        assert!(GaussianLinearPosterior::new(2, 1.0, -0.1).is_err());
    }

    #[test]
    fn shape_parameter_tracks_count() {
        let mut post = NigPosterior::new(3, prior()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let x: Vec<f64> = (0..3).map(|_| rng.random()).collect();
            post.update(&x, rng.random()).unwrap();
        }
        assert_eq!(post.a(), 11.0);
    }

    #[test]
    fn single_basis_update() {
        let mut post = NigPosterior::new(3, prior()).unwrap();
        post.update(&[1.0, 0.0, 0.0], 1.0).unwrap();
        let expected = DVector::from_vec(vec![0.5, 0.0, 0.0]);
        assert!((post.mean() - expected).norm() < 1e-15);
    }

    #[test]
    fn dimension_checked() {
        let mut post = NigPosterior::new(3, prior()).unwrap();
        assert!(matches!(
            post.update(&[1.0, 2.0], 0.0),
            Err(Error::DimensionMismatch { expected: 3, actual: 2 })
        ));
        assert!(NigPosterior::batch(&DMatrix::zeros(4, 3), &DVector::zeros(5), prior()).is_err());
    }

    #[test]
    fn empty_batch_equals_prior() {
        let post = NigPosterior::batch(&DMatrix::zeros(0, 4), &DVector::zeros(0), prior()).unwrap();
        let fresh = NigPosterior::new(4, prior()).unwrap();
        assert_eq!(post.mean(), fresh.mean());
        assert_eq!(post.stats().precision(), fresh.stats().precision());
        assert_eq!((post.a(), post.b()), (fresh.a(), fresh.b()));
    }

    #[test]
    fn diagonal_factors_for_known_covariance() {
        // Σ = [[2,1],[1,2]] <=> precision = (1/3)[[2,-1],[-1,2]]
        let mut stats = RidgeStats::new(2, 1.0).unwrap();
        stats.precision = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]) / 3.0;
        stats.chol_lower = stats.precision.clone().cholesky().unwrap().unpack();
        let SamplingFactor::Diagonal(diag) = SamplingFactor::new(&stats, CovarianceApproximation::Diag) else {
            panic!("diag factor expected");
        };
        let SamplingFactor::Diagonal(prec) =
            SamplingFactor::new(&stats, CovarianceApproximation::PrecisionDiag)
        else {
            panic!("diag factor expected");
        };
        for i in 0..2 {
            assert!((diag[i].powi(2) - 2.0).abs() < 1e-12);
            assert!((prec[i].powi(2) - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_noise_collapses_to_mean() {
        let mut post = GaussianLinearPosterior::new(3, 0.25, 1e-12).unwrap();
        post.update(&[1.0, 2.0, -1.0], 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for approx in [
            CovarianceApproximation::Exact,
            CovarianceApproximation::Diag,
            CovarianceApproximation::PrecisionDiag,
        ] {
            let beta = post.sample(approx, &mut rng);
            assert!((beta - post.mean()).amax() < 1e-5);
        }
    }

    #[test]
    fn point_mass_returns_mean_exactly() {
        let mut post = GaussianLinearPosterior::new(2, 0.25, 0.0).unwrap();
        post.update(&[0.3, -0.4], 1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(&post.sample(CovarianceApproximation::Exact, &mut rng), post.mean());
    }

    #[test]
    fn gaussian_matches_nig_given_pinned_noise() {
        let mut nig = NigPosterior::new(2, prior()).unwrap();
        nig.update(&[0.5, 1.0], 2.0).unwrap();
        let factor = SamplingFactor::new(nig.stats(), CovarianceApproximation::Exact);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (beta, sigma2) = nig.sample_with(&factor, &mut rng);

        let mut gauss = GaussianLinearPosterior::new(2, 1.0, sigma2).unwrap();
        gauss.update(&[0.5, 1.0], 2.0).unwrap();
        // Replay the same stream, skipping the gamma draw.
        let mut replay = ChaCha8Rng::seed_from_u64(11);
        let _ = nig.sample_noise(&mut replay);
        let beta2 = gauss.sample_with(&factor, &mut replay);
        assert!((beta - beta2).amax() < 1e-12);
    }
}
