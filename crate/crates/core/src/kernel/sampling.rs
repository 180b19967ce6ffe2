//! Random variates drawn from an [`RngStream`].

use nalgebra::{Cholesky, DMatrix, DVector};
use rand_distr::{Distribution, Gamma};

use super::matrix::SymMatrix;
use super::rng::RngStream;
use super::special::{normal_cdf, normal_quantile, normal_sf, normal_sf_inv};
use crate::error::{param, Error, Result};

/// Gamma(shape, 1) variate. Shape one is drawn by inversion.
pub fn sample_gamma(shape: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape > 0.0) || !shape.is_finite() {
        return param(format!("gamma shape must be positive, got {shape}"));
    }
    if shape == 1.0 {
        return Ok(rng.exponential());
    }
    let g = Gamma::new(shape, 1.0).map_err(|e| Error::Parameter(e.to_string()))?;
    Ok(g.sample(rng))
}

/// Beta(a, b) variate.
///
/// When either shape is one the CDF inverts in closed form, which covers the
/// Be(1, n0) stick proportions.
pub fn sample_beta(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return param(format!("beta shapes must be positive, got a={a}, b={b}"));
    }
    if a == 1.0 {
        // 1 - (1 - u)^(1/b), with 1 - u again uniform
        return Ok(-(rng.open_uniform().ln() / b).exp_m1());
    }
    if b == 1.0 {
        return Ok((rng.open_uniform().ln() / a).exp());
    }
    let x = sample_gamma(a, rng)?;
    let y = sample_gamma(b, rng)?;
    let s = x + y;
    if s == 0.0 {
        // both gammas underflowed; only reachable with tiny shapes
        return Ok(if a >= b { 1.0 } else { 0.0 });
    }
    Ok(x / s)
}

/// Dirichlet(alpha) variate on the simplex.
pub fn sample_dirichlet(alpha: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
    if alpha.is_empty() {
        return param("dirichlet parameter vector is empty");
    }
    if let Some(bad) = alpha.iter().find(|&&a| !(a > 0.0) || !a.is_finite()) {
        return param(format!("dirichlet parameters must be positive, got {bad}"));
    }
    if alpha.len() == 1 {
        return Ok(vec![1.0]);
    }
    let mut w = alpha
        .iter()
        .map(|&a| sample_gamma(a, rng))
        .collect::<Result<Vec<f64>>>()?;
    normalize_in_place(&mut w)?;
    Ok(w)
}

/// Dirichlet(1, …, 1) of length `n`, via normalized unit exponentials.
pub fn sample_flat_dirichlet(n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    if n == 0 {
        return param("dirichlet dimension must be at least one");
    }
    let mut w: Vec<f64> = (0..n).map(|_| rng.exponential()).collect();
    normalize_in_place(&mut w)?;
    Ok(w)
}

pub(crate) fn normalize_in_place(w: &mut [f64]) -> Result<()> {
    let s: f64 = w.iter().sum();
    if !(s > 0.0) || !s.is_finite() {
        return param(format!("cannot normalize weights with total {s}"));
    }
    for x in w.iter_mut() {
        *x /= s;
    }
    Ok(())
}

/// Multivariate normal with a precomputed Cholesky factor.
#[derive(Debug, Clone)]
pub struct MvNormal {
    mean: DVector<f64>,
    chol_lower: DMatrix<f64>,
}

impl MvNormal {
    /// Fails when the dimensions disagree or `cov` is not positive definite.
    pub fn new(mean: &[f64], cov: &SymMatrix) -> Result<Self> {
        if mean.len() != cov.dim() {
            return param(format!(
                "mean has dimension {} but covariance is {}x{}",
                mean.len(),
                cov.dim(),
                cov.dim()
            ));
        }
        let chol = Cholesky::new(cov.as_matrix().clone()).ok_or_else(|| {
            Error::Parameter("covariance is not positive definite; apply psd_repair first".into())
        })?;
        Ok(MvNormal {
            mean: DVector::from_column_slice(mean),
            chol_lower: chol.l(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    /// Writes one draw into `out`, which must have length `dim()`.
    pub fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        let d = self.dim();
        let z: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        for (i, o) in out.iter_mut().enumerate().take(d) {
            let mut acc = self.mean[i];
            for (k, zk) in z.iter().enumerate().take(i + 1) {
                acc += self.chol_lower[(i, k)] * zk;
            }
            *o = acc;
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        out
    }
}

/// One multivariate normal draw. Prefer [`MvNormal`] in loops.
pub fn sample_mvnormal(mean: &[f64], cov: &SymMatrix, rng: &mut RngStream) -> Result<Vec<f64>> {
    Ok(MvNormal::new(mean, cov)?.sample(rng))
}

/// Standard normal restricted to [a, b], at probability level u of the
/// truncated law.
fn truncated_standard_quantile(a: f64, b: f64, u: f64) -> f64 {
    if a >= 0.0 {
        // upper tail: work with survival probabilities to keep precision
        let qa = normal_sf(a);
        let qb = normal_sf(b);
        let mass = qa - qb;
        if mass > 0.0 && qa > 1e-290 {
            return normal_sf_inv(qa - u * mass);
        }
        // far tail: the normal is exponential with rate a to leading order
        let w = b - a;
        return a - (u * (-a * w).exp_m1()).ln_1p() / a;
    }
    if b <= 0.0 {
        return -truncated_standard_quantile(-b, -a, u);
    }
    let pa = normal_cdf(a);
    let pb = normal_cdf(b);
    normal_quantile(pa + u * (pb - pa))
}

/// N(mu, sigma2) conditioned on [lo, hi], drawn by inversion of one uniform.
pub fn sample_truncated_normal(
    mu: f64,
    sigma2: f64,
    lo: f64,
    hi: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() || !mu.is_finite() {
        return param(format!(
            "truncated normal needs finite mean and positive variance, got mu={mu}, sigma2={sigma2}"
        ));
    }
    if !(lo < hi) {
        return param(format!(
            "truncation interval [{lo}, {hi}] is empty or degenerate"
        ));
    }
    let sd = sigma2.sqrt();
    let a = (lo - mu) / sd;
    let b = (hi - mu) / sd;
    let u = rng.open_uniform();
    let z = truncated_standard_quantile(a, b, u);
    Ok((mu + sd * z).clamp(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rng::substream;

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn beta_uniform_case_mean() {
        let mut rng = substream(1, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_beta(1.0, 1.0, &mut rng).unwrap())
            .collect();
        assert!((mean(&xs) - 0.5).abs() < 0.01);
        assert!(xs.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn beta_stick_mean() {
        let mut rng = substream(1, 1);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_beta(1.0, 20.0, &mut rng).unwrap())
            .collect();
        assert!((mean(&xs) - 1.0 / 21.0).abs() < 0.005);
    }

    #[test]
    fn beta_general_mean() {
        let mut rng = substream(1, 2);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_beta(2.0, 5.0, &mut rng).unwrap())
            .collect();
        assert!((mean(&xs) - 2.0 / 7.0).abs() < 0.005);
    }

    #[test]
    fn beta_rejects_nonpositive_shape() {
        let mut rng = substream(1, 3);
        assert!(sample_beta(0.0, 1.0, &mut rng).is_err());
        assert!(sample_beta(1.0, -1.0, &mut rng).is_err());
    }

    #[test]
    fn dirichlet_degenerate_and_means() {
        let mut rng = substream(2, 0);
        assert_eq!(sample_dirichlet(&[1.0], &mut rng).unwrap(), vec![1.0]);

        let n = 100_000;
        let mut acc = [0.0; 3];
        for _ in 0..n {
            let w = sample_dirichlet(&[1.0, 1.0, 1.0], &mut rng).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            for (a, x) in acc.iter_mut().zip(&w) {
                *a += x;
            }
        }
        for a in acc {
            assert!((a / n as f64 - 1.0 / 3.0).abs() < 0.01);
        }

        let mut first = 0.0;
        for _ in 0..n {
            first += sample_dirichlet(&[2.0, 3.0, 1.0], &mut rng).unwrap()[0];
        }
        assert!((first / n as f64 - 2.0 / 6.0).abs() < 0.01);
    }

    #[test]
    fn dirichlet_rejects_bad_parameters() {
        let mut rng = substream(2, 1);
        assert!(sample_dirichlet(&[], &mut rng).is_err());
        assert!(sample_dirichlet(&[1.0, 0.0], &mut rng).is_err());
        assert!(sample_flat_dirichlet(0, &mut rng).is_err());
    }

    #[test]
    fn flat_dirichlet_sums_to_one() {
        let mut rng = substream(2, 2);
        let w = sample_flat_dirichlet(1000, &mut rng).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert!(w.iter().all(|&x| x >= 0.0));
    }

    fn empirical_cov(draws: &[Vec<f64>]) -> [[f64; 2]; 2] {
        let n = draws.len() as f64;
        let m0 = draws.iter().map(|d| d[0]).sum::<f64>() / n;
        let m1 = draws.iter().map(|d| d[1]).sum::<f64>() / n;
        let mut c = [[0.0; 2]; 2];
        for d in draws {
            let x = [d[0] - m0, d[1] - m1];
            for i in 0..2 {
                for j in 0..2 {
                    c[i][j] += x[i] * x[j] / n;
                }
            }
        }
        c
    }

    #[test]
    fn mvnormal_identity_covariance() {
        let mut rng = substream(3, 0);
        let cov = SymMatrix::identity(2);
        let mvn = MvNormal::new(&[0.0, 0.0], &cov).unwrap();
        let draws: Vec<Vec<f64>> = (0..100_000).map(|_| mvn.sample(&mut rng)).collect();
        let c = empirical_cov(&draws);
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((c[i][j] - target).abs() < 0.02, "{c:?}");
            }
        }
    }

    #[test]
    fn mvnormal_correlated_covariance() {
        let mut rng = substream(3, 1);
        let cov = SymMatrix::from_rows(&[vec![2.0, 0.9], vec![0.9, 2.0]]).unwrap();
        let draws: Vec<Vec<f64>> = (0..100_000)
            .map(|_| sample_mvnormal(&[0.0, 0.0], &cov, &mut rng).unwrap())
            .collect();
        let c = empirical_cov(&draws);
        assert!((c[0][1] - 0.9).abs() < 0.03, "{c:?}");
    }

    #[test]
    fn mvnormal_rejects_indefinite_and_mismatched() {
        let bad = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(MvNormal::new(&[0.0, 0.0], &bad).is_err());
        assert!(MvNormal::new(&[0.0], &SymMatrix::identity(2)).is_err());
    }

    #[test]
    fn truncated_normal_symmetric_mean() {
        let mut rng = substream(4, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_truncated_normal(2.5, 2.0, 0.0, 5.0, &mut rng).unwrap())
            .collect();
        assert!(xs.iter().all(|&x| (0.0..=5.0).contains(&x)));
        let m = mean(&xs);
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!((m - 2.5).abs() < 3.0 * sd / (n as f64).sqrt());
    }

    #[test]
    fn truncated_normal_matches_quadrature_mean() {
        let s2: f64 = 2.0;
        let dens = |x: f64| (-x * x / (2.0 * s2)).exp();
        let z = simpson(dens, 0.0, 5.0, 4000);
        let oracle = simpson(|x| x * dens(x), 0.0, 5.0, 4000) / z;
        let mut rng = substream(4, 1);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_truncated_normal(0.0, s2, 0.0, 5.0, &mut rng).unwrap())
            .collect();
        assert!(
            (mean(&xs) - oracle).abs() < 0.02,
            "{} vs {oracle}",
            mean(&xs)
        );
    }

    #[test]
    fn truncated_normal_far_tails_stay_in_support() {
        let mut rng = substream(4, 2);
        for &(lo, hi) in &[
            (40.0, 41.0),
            (-41.0, -40.0),
            (8.0, 8.5),
            (-1e3, -999.0),
            (-3.0, 50.0),
        ] {
            for _ in 0..1000 {
                let x = sample_truncated_normal(0.0, 1.0, lo, hi, &mut rng).unwrap();
                assert!(
                    x >= lo && x <= hi && x.is_finite(),
                    "{x} not in [{lo},{hi}]"
                );
            }
        }
    }

    #[test]
    fn truncated_normal_rejects_empty_interval() {
        let mut rng = substream(4, 3);
        assert!(sample_truncated_normal(0.0, 1.0, 1.0, 1.0, &mut rng).is_err());
        assert!(sample_truncated_normal(0.0, 1.0, 2.0, 1.0, &mut rng).is_err());
        assert!(sample_truncated_normal(0.0, 0.0, 0.0, 1.0, &mut rng).is_err());
    }
}
