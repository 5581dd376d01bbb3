use num_rational::BigRational;
use num_traits::{Float, One, Signed, Zero};

use crate::error::{contract, Error, Result};
use crate::scalar::Weight;

/// `H(x) = -x log2 x - (1-x) log2 (1-x)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy<F: Float>(x: F) -> Result<F> {
    if x.is_nan() || x < F::zero() || x > F::one() {
        return Err(Error::Domain(format!("binary entropy argument {:?} outside [0, 1]", x.to_f64())));
    }
    let term = |p: F| if p <= F::zero() { F::zero() } else { -p * p.log2() };
    Ok(term(x) + term(F::one() - x))
}

/// `m * H(p)`: log2 of the entropy bound on the volume of a Hamming ball of
/// relative radius `p` in `{0,1}^m`.
pub fn ball_volume_log2<F: Float>(m: usize, p: F) -> Result<F> {
    contract!(m >= 1, "ball volume needs m >= 1");
    let half = F::one() / (F::one() + F::one());
    if p > half {
        return Err(Error::Domain(format!("volume bound invalid for radius {:?} > 1/2", p.to_f64())));
    }
    Ok(F::from(m).unwrap() * binary_entropy(p)?)
}

/// Parameters of the two block-code covering bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundParams {
    /// Number of generator blocks in a concatenation.
    pub m: usize,
    /// Normalized distance between the two generator words.
    pub d: BigRational,
    pub epsilon: BigRational,
    /// Fraction of mass allowed to stay uncovered.
    pub theta: BigRational,
    /// Perturbation radius; only the perturbed bound reads it.
    pub eta: BigRational,
}

impl BoundParams {
    pub fn new(m: usize, d: BigRational, epsilon: BigRational, theta: BigRational) -> Self {
        BoundParams { m, d, epsilon, theta, eta: BigRational::zero() }
    }

    pub fn with_eta(mut self, eta: BigRational) -> Self {
        self.eta = eta;
        self
    }

    fn validate(&self) -> Result<()> {
        contract!(self.m >= 1, "m must be positive");
        contract!(self.d.is_positive() && self.d <= BigRational::one(), "generator distance d must lie in (0, 1]");
        contract!(!self.epsilon.is_negative(), "epsilon must be nonnegative");
        contract!(!self.eta.is_negative(), "eta must be nonnegative");
        contract!(!self.theta.is_negative() && self.theta <= BigRational::one(), "theta must lie in [0, 1]");
        Ok(())
    }

    fn inv_m(&self) -> BigRational {
        BigRational::from_ratio(1, self.m as u64)
    }

    /// `eps/d + 1/m < 1/2`, the hypothesis of the unperturbed bound.
    pub fn block_bound_applicable(&self) -> bool {
        &self.epsilon / &self.d + self.inv_m() < BigRational::from_ratio(1, 2)
    }
}

fn bound_log2(m: usize, coverage: f64, entropy_arg: &BigRational) -> Result<f64> {
    if coverage <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let h = binary_entropy(Weight::to_f64(entropy_arg))?;
    Ok(coverage.log2() + m as f64 * (1.0 - h))
}

/// `log2((1-theta)) + m (1 - H(2 eps/d + 1/m))`.
///
/// Any family of open `eps`-balls covering `1-theta` of the `2^m` block
/// concatenations has at least `2^bound` members.
pub fn block_cover_bound_log2(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    if !p.block_bound_applicable() {
        return Err(Error::BoundInapplicable(format!(
            "eps/d + 1/m = {} is not below 1/2",
            Weight::to_f64(&(&p.epsilon / &p.d + p.inv_m()))
        )));
    }
    let arg = BigRational::from_count(2) * &p.epsilon / &p.d + p.inv_m();
    let coverage = BigRational::one() - &p.theta;
    bound_log2(p.m, Weight::to_f64(&coverage), &arg)
}

/// `log2((1-theta-eta)) + m (1 - H(2 (eps+eta)/d + 1/m))`, the bound that
/// survives an `eta`-perturbation of the covered names.
pub fn perturbed_cover_bound_log2(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    let coverage = BigRational::one() - &p.theta - &p.eta;
    if !coverage.is_positive() {
        return Err(Error::VacuousBound(format!("theta + eta = {} >= 1", Weight::to_f64(&(&p.theta + &p.eta)))));
    }
    let arg = BigRational::from_count(2) * (&p.epsilon + &p.eta) / &p.d + p.inv_m();
    if arg > BigRational::from_ratio(1, 2) {
        return Err(Error::BoundInapplicable(format!("2(eps+eta)/d + 1/m = {} exceeds 1/2", Weight::to_f64(&arg))));
    }
    bound_log2(p.m, Weight::to_f64(&coverage), &arg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: u64, d: u64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.5f64).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0f64).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0f64).unwrap(), 0.0);
        let q = binary_entropy(0.25f64).unwrap();
        assert!((q - 0.811_278_124_459_132_8).abs() < 1e-12);
        assert!(q < 7.0 / 8.0);
        assert!((binary_entropy(0.25f32).unwrap() - 0.811_278_1).abs() < 1e-6);
        assert!(binary_entropy(1.5f64).is_err());
        assert!(binary_entropy(-0.1f64).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn ball_volume_examples() {
        assert_eq!(ball_volume_log2(8, 0.5f64).unwrap(), 8.0);
        assert_eq!(ball_volume_log2(10, 0.0f64).unwrap(), 0.0);
        assert!((ball_volume_log2(8, 0.25f64).unwrap() - 6.490_225).abs() < 1e-5);
        assert!(ball_volume_log2(8, 0.6f64).is_err());
    }

    #[test]
    fn block_bound_examples() {
        let b = block_cover_bound_log2(&BoundParams::new(4, r(1, 1), r(1, 10), r(0, 1))).unwrap();
        let expect = 4.0 * (1.0 - binary_entropy(0.45f64).unwrap());
        assert!((b - expect).abs() < 1e-12);
        assert!((b - 0.028_902).abs() < 1e-6);
        assert_eq!(b.exp2().ceil(), 2.0);

        let vac = block_cover_bound_log2(&BoundParams::new(5, r(1, 1), r(1, 10), r(1, 1))).unwrap();
        assert_eq!(vac, f64::NEG_INFINITY);

        let b = block_cover_bound_log2(&BoundParams::new(8, r(1, 2), r(1, 16), r(0, 1))).unwrap();
        assert!((b - 8.0 * (1.0 - binary_entropy(0.375f64).unwrap())).abs() < 1e-12);
        assert!((b - 0.365).abs() < 1e-3);
    }

    #[test]
    fn block_bound_precondition() {
        let err = block_cover_bound_log2(&BoundParams::new(4, r(1, 4), r(1, 10), r(0, 1))).unwrap_err();
        assert!(matches!(err, Error::BoundInapplicable(_)));
    }

    #[test]
    fn perturbed_bound_examples() {
        let base = BoundParams::new(4, r(1, 1), r(1, 10), r(0, 1));
        assert_eq!(perturbed_cover_bound_log2(&base).unwrap(), block_cover_bound_log2(&base).unwrap());

        let p = BoundParams::new(8, r(1, 1), r(1, 10), r(1, 10)).with_eta(r(1, 20));
        let b = perturbed_cover_bound_log2(&p).unwrap();
        let expect = 8.0 * (1.0 - binary_entropy(0.425f64).unwrap()) + 0.85f64.log2();
        assert!((b - expect).abs() < 1e-12);
        assert!((b + 0.104_131).abs() < 1e-6);

        let vac = BoundParams::new(8, r(1, 1), r(1, 10), r(1, 10)).with_eta(r(9, 10));
        assert!(matches!(perturbed_cover_bound_log2(&vac), Err(Error::VacuousBound(_))));

        let wide = BoundParams::new(8, r(1, 1), r(1, 5), r(0, 1)).with_eta(r(1, 10));
        assert!(matches!(perturbed_cover_bound_log2(&wide), Err(Error::BoundInapplicable(_))));
    }

    proptest! {
        #[test]
        fn entropy_symmetric_and_bounded(x in 0.0f64..=1.0) {
            let h = binary_entropy(x).unwrap();
            prop_assert!((h - binary_entropy(1.0 - x).unwrap()).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&h));
        }

        #[test]
        fn entropy_strictly_concave(a in 0.0f64..1.0, b in 0.0f64..1.0, lam in 0.05f64..0.95) {
            prop_assume!((a - b).abs() > 1e-3);
            let mid = lam * a + (1.0 - lam) * b;
            let lhs = binary_entropy(mid).unwrap();
            let rhs = lam * binary_entropy(a).unwrap() + (1.0 - lam) * binary_entropy(b).unwrap();
            prop_assert!(lhs > rhs);
        }
    }
}
