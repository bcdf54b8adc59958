//! One-dimensional Parzen estimators on the unit interval.

use rand::Rng;
use rand_distr::StandardNormal;

use super::TpeError;
use crate::rng::Pcg64;

pub const MIN_BANDWIDTH: f64 = 0.01;
pub const MAX_BANDWIDTH: f64 = 1.0;

/// Equal-weight mixture of Gaussians truncated to `[0, 1]`, plus a uniform
/// prior component carrying `prior_weight` in place of the unit weight each
/// Gaussian gets.
#[derive(Debug, Clone, PartialEq)]
pub struct ParzenEstimator {
    centers: Vec<f64>,
    bandwidths: Vec<f64>,
    prior_weight: f64,
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn check_unit(what: &str, x: f64) -> Result<(), TpeError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(TpeError::Argument(format!("{what} {x} outside [0, 1]")))
    }
}

impl ParzenEstimator {
    /// Builds an estimator with explicit bandwidths. Components are kept
    /// sorted by center.
    pub fn new(
        centers: Vec<f64>,
        bandwidths: Vec<f64>,
        prior_weight: f64,
    ) -> Result<Self, TpeError> {
        if centers.len() != bandwidths.len() {
            return Err(TpeError::Argument(format!(
                "{} centers with {} bandwidths",
                centers.len(),
                bandwidths.len()
            )));
        }
        for &c in &centers {
            check_unit("center", c)?;
        }
        if let Some(b) = bandwidths.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(TpeError::Argument(format!(
                "bandwidth {b} must be positive"
            )));
        }
        if !(prior_weight.is_finite() && prior_weight >= 0.0) {
            return Err(TpeError::Argument(format!(
                "prior weight {prior_weight} must be >= 0"
            )));
        }
        if centers.is_empty() && prior_weight == 0.0 {
            return Err(TpeError::Argument(
                "estimator needs observations or a positive prior weight".into(),
            ));
        }
        let mut components: Vec<(f64, f64)> = centers.into_iter().zip(bandwidths).collect();
        components.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (centers, bandwidths) = components.into_iter().unzip();
        Ok(Self {
            centers,
            bandwidths,
            prior_weight,
        })
    }

    /// One Gaussian per observation. The bandwidth of each center is the
    /// larger gap to its sorted neighbors, with 0 and 1 standing in at the
    /// ends, clamped to `[MIN_BANDWIDTH, MAX_BANDWIDTH]`.
    pub fn fit(observations: &[f64], prior_weight: f64) -> Result<Self, TpeError> {
        for &x in observations {
            check_unit("observation", x)?;
        }
        let mut centers = observations.to_vec();
        centers.sort_by(f64::total_cmp);
        let n = centers.len();
        let bandwidths = (0..n)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { centers[i - 1] };
                let right = if i + 1 == n { 1.0 } else { centers[i + 1] };
                (centers[i] - left)
                    .max(right - centers[i])
                    .clamp(MIN_BANDWIDTH, MAX_BANDWIDTH)
            })
            .collect();
        Self::new(centers, bandwidths, prior_weight)
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn prior_weight(&self) -> f64 {
        self.prior_weight
    }

    fn total_weight(&self) -> f64 {
        self.centers.len() as f64 + self.prior_weight
    }

    /// Mixture density at `x`.
    pub fn pdf(&self, x: f64) -> Result<f64, TpeError> {
        check_unit("x", x)?;
        Ok(self.density(x))
    }

    pub(crate) fn density(&self, x: f64) -> f64 {
        let mut sum = self.prior_weight;
        for (&c, &b) in self.centers.iter().zip(&self.bandwidths) {
            let mass = std_normal_cdf((1.0 - c) / b) - std_normal_cdf(-c / b);
            let z = (x - c) / b;
            let kernel = (-0.5 * z * z).exp() / (b * (2.0 * std::f64::consts::PI).sqrt());
            sum += kernel / mass;
        }
        sum / self.total_weight()
    }

    /// Draws a component by weight, then a point from it. Gaussian
    /// components are sampled by rejection until the draw lands in `[0, 1]`.
    pub fn sample(&self, rng: &mut Pcg64) -> f64 {
        let mut u = rng.gen::<f64>() * self.total_weight();
        let mut chosen = None;
        for i in 0..self.centers.len() {
            if u < 1.0 {
                chosen = Some(i);
                break;
            }
            u -= 1.0;
        }
        match chosen {
            None if self.prior_weight > 0.0 => rng.gen::<f64>(),
            // Rounding pushed u past the last Gaussian with no prior.
            None => self.sample_component(self.centers.len() - 1, rng),
            Some(i) => self.sample_component(i, rng),
        }
    }

    fn sample_component(&self, i: usize, rng: &mut Pcg64) -> f64 {
        let (c, b) = (self.centers[i], self.bandwidths[i]);
        loop {
            let z: f64 = rng.sample(StandardNormal);
            let x = c + b * z;
            if (0.0..=1.0).contains(&x) {
                return x;
            }
        }
    }
}

/// Fits an estimator to `observations`; see [`ParzenEstimator::fit`].
pub fn fit_parzen(observations: &[f64], prior_weight: f64) -> Result<ParzenEstimator, TpeError> {
    ParzenEstimator::fit(observations, prior_weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, Stream};

    /// Trapezoid rule for `f` over `[0, 1]` with `points` evenly spaced nodes.
    fn trapezoid_unit(points: usize, f: impl Fn(f64) -> f64) -> f64 {
        assert!(points >= 2);
        let h = 1.0 / (points - 1) as f64;
        let mut sum = 0.5 * (f(0.0) + f(1.0));
        for i in 1..points - 1 {
            sum += f(i as f64 * h);
        }
        sum * h
    }

    #[test]
    fn prior_only_is_uniform() {
        let e = fit_parzen(&[], 1.0).unwrap();
        for x in [0.0, 0.3, 0.99, 1.0] {
            assert_eq!(e.pdf(x).unwrap(), 1.0);
        }
    }

    #[test]
    fn single_observation_integrates_to_one() {
        let e = fit_parzen(&[0.5], 1.0).unwrap();
        assert_eq!(e.bandwidths(), &[0.5]);
        let total = trapezoid_unit(10_000, |x| e.pdf(x).unwrap());
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }

    #[test]
    fn bimodal_shape() {
        // Fitting [0.1, 0.9] would give both centers bandwidth 0.8, so the
        // shape is checked with explicit narrow kernels.
        let e = ParzenEstimator::new(vec![0.1, 0.9], vec![0.1, 0.1], 1.0).unwrap();
        let mid = e.pdf(0.5).unwrap();
        assert!(e.pdf(0.1).unwrap() > mid);
        assert!(e.pdf(0.9).unwrap() > mid);
    }

    #[test]
    fn symmetric_centers_give_symmetric_density() {
        let e = ParzenEstimator::new(vec![0.7, 0.3], vec![0.2, 0.2], 1.0).unwrap();
        assert_eq!(e.centers(), &[0.3, 0.7]);
        let (a, b) = (e.pdf(0.3).unwrap(), e.pdf(0.7).unwrap());
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn bandwidth_rule() {
        let e = fit_parzen(&[0.9, 0.2, 0.25], 1.0).unwrap();
        assert_eq!(e.centers(), &[0.2, 0.25, 0.9]);
        // 0.2: max(0.2, 0.05); 0.25: max(0.05, 0.65); 0.9: max(0.65, 0.1).
        let want = [0.2, 0.65, 0.65];
        for (b, w) in e.bandwidths().iter().zip(want) {
            assert!((b - w).abs() < 1e-12);
        }
        let dup = fit_parzen(&[0.5, 0.5, 0.5], 1.0).unwrap();
        assert_eq!(dup.bandwidths()[1], MIN_BANDWIDTH);
    }

    #[test]
    fn argument_checks() {
        assert!(fit_parzen(&[1.5], 1.0).is_err());
        assert!(fit_parzen(&[f64::NAN], 1.0).is_err());
        assert!(fit_parzen(&[], 0.0).is_err());
        assert!(ParzenEstimator::new(vec![0.5], vec![0.0], 1.0).is_err());
        assert!(ParzenEstimator::new(vec![0.5], vec![0.1, 0.2], 1.0).is_err());
        let e = fit_parzen(&[0.5], 1.0).unwrap();
        assert!(e.pdf(-0.01).is_err());
        assert!(e.pdf(1.01).is_err());
    }

    #[test]
    fn uniform_sampling_moment() {
        let e = fit_parzen(&[], 1.0).unwrap();
        let mut r = rng::stream(5, Stream::Tpe);
        let n = 100_000;
        let mean = (0..n).map(|_| e.sample(&mut r)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn narrow_component_concentrates() {
        let e = ParzenEstimator::new(vec![0.9], vec![1e-3], 0.0).unwrap();
        let mut r = rng::stream(6, Stream::Tpe);
        for _ in 0..10_000 {
            let x = e.sample(&mut r);
            assert!((0.88..=0.92).contains(&x), "{x}");
        }
    }

    #[test]
    fn samples_are_reproducible_and_in_range() {
        let e = fit_parzen(&[0.0, 0.05, 1.0], 0.5).unwrap();
        let draw = |seed| {
            let mut r = rng::stream(seed, Stream::Tpe);
            (0..1000).map(|_| e.sample(&mut r)).collect::<Vec<_>>()
        };
        let a = draw(7);
        assert_eq!(a, draw(7));
        assert!(a.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn histogram_follows_density() {
        let e = fit_parzen(&[0.15, 0.2, 0.8], 1.0).unwrap();
        let mut r = rng::stream(8, Stream::Tpe);
        let n = 100_000;
        let bins = 10;
        let mut counts = vec![0usize; bins];
        for _ in 0..n {
            let x = e.sample(&mut r);
            counts[((x * bins as f64) as usize).min(bins - 1)] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let lo = i as f64 / bins as f64;
            let h = 1.0 / bins as f64;
            let steps = 200;
            let p: f64 = (0..steps)
                .map(|s| {
                    let a = lo + h * s as f64 / steps as f64;
                    let b = lo + h * (s + 1) as f64 / steps as f64;
                    0.5 * (e.density(a) + e.density(b)) * (b - a)
                })
                .sum();
            let expected = p * n as f64;
            let sigma = (expected * (1.0 - p)).sqrt();
            assert!(
                (c as f64 - expected).abs() < 5.0 * sigma,
                "bin {i}: {c} vs {expected:.1}"
            );
        }
    }
}
