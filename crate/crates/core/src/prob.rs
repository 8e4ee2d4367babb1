//! Finite-alphabet probability distributions, additive and spherical
//! perturbations, and the exact/locally-approximated divergences between
//! nearby distributions.
//!
//! All information quantities are in nats. A perturbed distribution is
//! `p + eps * j` where the additive perturbation `j` sums to zero; the
//! spherical coordinates `l(x) = j(x)/sqrt(p(x))` turn the KL divergence
//! into `(eps^2/2) * ||l||^2` up to third-order terms.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2_sq};
use crate::scalar::{as_f64, cast, Scalar};

/// Tolerances shared by validity checks across the crate. Everything is
/// configurable through this one struct; the defaults are the values used
/// by the test suite.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericPolicy<T> {
    /// Absolute tolerance for "sums to one" checks (distributions, channel columns).
    pub sum_one: T,
    /// Absolute tolerance for "sums to zero" checks (additive perturbations).
    pub zero_sum: T,
    /// Absolute tolerance for orthogonality / marginal-preservation checks.
    pub orthogonality: T,
    /// Absolute tolerance on feasibility residuals of optimizer iterates.
    pub feasibility: T,
    /// KKT stationarity threshold.
    pub kkt_stationarity: T,
    /// KKT minimum-eigenvalue threshold (the check is `k_min >= -kkt_eigenvalue`).
    pub kkt_eigenvalue: T,
    /// KKT complementary-slackness threshold.
    pub kkt_slackness: T,
    /// KKT threshold on the |c(u)| colinearity coefficients.
    pub kkt_c_value: T,
}

impl<T: Scalar> Default for NumericPolicy<T> {
    fn default() -> Self {
        NumericPolicy {
            sum_one: cast(1e-12),
            zero_sum: cast(1e-12),
            orthogonality: cast(1e-10),
            feasibility: cast(1e-8),
            kkt_stationarity: cast(1e-6),
            kkt_eigenvalue: cast(1e-8),
            kkt_slackness: cast(1e-6),
            kkt_c_value: cast(1e-6),
        }
    }
}

/// A probability mass function over the index alphabet `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<T> {
    probs: Vec<T>,
    labels: Option<Vec<String>>,
}

impl<T: Scalar> Distribution<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        Self::with_policy(probs, &NumericPolicy::default())
    }

    pub fn with_policy(probs: Vec<T>, policy: &NumericPolicy<T>) -> Result<Self> {
        for (index, &p) in probs.iter().enumerate() {
            if p < T::zero() {
                return Err(Error::NegativeEntry {
                    index,
                    value: as_f64(p),
                });
            }
        }
        let sum: T = probs.iter().copied().sum();
        if (sum - T::one()).abs() > policy.sum_one {
            return Err(Error::NotNormalized { sum: as_f64(sum) });
        }
        Ok(Distribution {
            probs,
            labels: None,
        })
    }

    pub fn uniform(n: usize) -> Self {
        let w = T::one() / cast::<T>(n as f64);
        Distribution {
            probs: vec![w; n],
            labels: None,
        }
    }

    /// Point mass on one symbol.
    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut probs = vec![T::zero(); n];
        probs[at] = T::one();
        Distribution {
            probs,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.probs.len() {
            return Err(Error::LengthMismatch {
                expected: self.probs.len(),
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> T {
        self.probs[i]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// True iff every entry is strictly positive.
    pub fn is_relative_interior(&self) -> bool {
        self.probs.iter().all(|&p| p > T::zero())
    }

    /// Componentwise square root, the unit vector of spherical coordinates.
    pub fn sqrt_probs(&self) -> Vec<T> {
        self.probs.iter().map(|&p| p.sqrt()).collect()
    }

    fn require_relint(&self) -> Result<()> {
        match self.probs.iter().position(|&p| p <= T::zero()) {
            Some(index) => Err(Error::ZeroEntry { index }),
            None => Ok(()),
        }
    }
}

/// Additive perturbation direction `j` with zero component sum, so that
/// `p + eps * j` remains a probability vector for small `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditivePerturbation<T> {
    j: Vec<T>,
}

impl<T: Scalar> AdditivePerturbation<T> {
    pub fn new(j: Vec<T>) -> Result<Self> {
        Self::with_policy(j, &NumericPolicy::default())
    }

    pub fn with_policy(j: Vec<T>, policy: &NumericPolicy<T>) -> Result<Self> {
        let sum: T = j.iter().copied().sum();
        if sum.abs() > policy.zero_sum {
            return Err(Error::NotZeroSum { sum: as_f64(sum) });
        }
        Ok(AdditivePerturbation { j })
    }

    pub fn zero(n: usize) -> Self {
        AdditivePerturbation {
            j: vec![T::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.j.len()
    }

    pub fn is_empty(&self) -> bool {
        self.j.is_empty()
    }

    pub fn components(&self) -> &[T] {
        &self.j
    }
}

/// Spherical perturbation `l = diag(sqrt(p))^{-1} j`, orthogonal to `sqrt(p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalPerturbation<T> {
    l: Vec<T>,
}

impl<T: Scalar> SphericalPerturbation<T> {
    /// Validates orthogonality to the square root of the base distribution.
    pub fn new(l: Vec<T>, base: &Distribution<T>) -> Result<Self> {
        Self::with_policy(l, base, &NumericPolicy::default())
    }

    pub fn with_policy(
        l: Vec<T>,
        base: &Distribution<T>,
        policy: &NumericPolicy<T>,
    ) -> Result<Self> {
        if l.len() != base.len() {
            return Err(Error::LengthMismatch {
                expected: base.len(),
                got: l.len(),
            });
        }
        let inner = dot(&l, &base.sqrt_probs());
        if inner.abs() > policy.orthogonality {
            return Err(Error::NotOrthogonal {
                inner: as_f64(inner),
            });
        }
        Ok(SphericalPerturbation { l })
    }

    pub fn zero(n: usize) -> Self {
        SphericalPerturbation {
            l: vec![T::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.l.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l.is_empty()
    }

    pub fn components(&self) -> &[T] {
        &self.l
    }

    pub fn norm_sq(&self) -> T {
        norm2_sq(&self.l)
    }
}

/// Kullback-Leibler divergence D(p||q) in nats, with the conventions
/// 0 log(0/0) = 0 and +infinity when q vanishes where p does not.
pub fn kl_divergence<T: Scalar>(p: &Distribution<T>, q: &Distribution<T>) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let mut acc = T::zero();
    for (&pi, &qi) in p.probs().iter().zip(q.probs()) {
        if pi > T::zero() {
            if qi <= T::zero() {
                return Ok(T::infinity());
            }
            acc = acc + pi * (pi / qi).ln();
        }
    }
    Ok(acc)
}

/// Chi-squared divergence sum (p'(x)-p(x))^2 / p(x); the epsilon-region
/// membership test is `chi_squared <= eps^2`.
pub fn chi_squared<T: Scalar>(p_prime: &Distribution<T>, p: &Distribution<T>) -> Result<T> {
    if p_prime.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            got: p_prime.len(),
        });
    }
    p.require_relint()?;
    let mut acc = T::zero();
    for (&pp, &pb) in p_prime.probs().iter().zip(p.probs()) {
        let d = pp - pb;
        acc = acc + d * d / pb;
    }
    Ok(acc)
}

/// True iff `p_prime` lies in the epsilon-region of `p`.
pub fn in_epsilon_region<T: Scalar>(
    p_prime: &Distribution<T>,
    p: &Distribution<T>,
    epsilon: T,
) -> Result<bool> {
    Ok(chi_squared(p_prime, p)? <= epsilon * epsilon)
}

/// Largest epsilon for which `p + eps * j` stays strictly positive:
/// min over x with j(x) != 0 of p(x)/|j(x)|, +infinity for j = 0.
pub fn max_valid_epsilon<T: Scalar>(
    p: &Distribution<T>,
    j: &AdditivePerturbation<T>,
) -> Result<T> {
    if p.len() != j.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            got: j.len(),
        });
    }
    p.require_relint()?;
    let mut bound = T::infinity();
    for (&pi, &ji) in p.probs().iter().zip(j.components()) {
        if ji != T::zero() {
            bound = bound.min(pi / ji.abs());
        }
    }
    Ok(bound)
}

/// The perturbed distribution `p + eps * j`. `eps` must sit strictly inside
/// `(0, max_valid_epsilon)`; the returned error carries the valid bound.
pub fn perturb<T: Scalar>(
    p: &Distribution<T>,
    j: &AdditivePerturbation<T>,
    epsilon: T,
) -> Result<Distribution<T>> {
    let bound = max_valid_epsilon(p, j)?;
    if !(epsilon > T::zero() && epsilon < bound) {
        return Err(Error::EpsilonOutOfRange {
            epsilon: as_f64(epsilon),
            max: as_f64(bound),
        });
    }
    let probs: Vec<T> = p
        .probs()
        .iter()
        .zip(j.components())
        .map(|(&pi, &ji)| pi + epsilon * ji)
        .collect();
    Distribution::new(probs)
}

/// Change of coordinates to the spherical perturbation l(x) = j(x)/sqrt(p(x)).
pub fn to_spherical<T: Scalar>(
    j: &AdditivePerturbation<T>,
    p: &Distribution<T>,
) -> Result<SphericalPerturbation<T>> {
    if j.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            got: j.len(),
        });
    }
    p.require_relint()?;
    let l: Vec<T> = j
        .components()
        .iter()
        .zip(p.probs())
        .map(|(&ji, &pi)| ji / pi.sqrt())
        .collect();
    // Orthogonality to sqrt(p) is the zero-sum condition in disguise; the
    // rescaling introduces at most rounding-level violation.
    SphericalPerturbation::new(l, p)
}

/// Inverse of [`to_spherical`]: j(x) = l(x) * sqrt(p(x)).
pub fn from_spherical<T: Scalar>(
    l: &SphericalPerturbation<T>,
    p: &Distribution<T>,
) -> Result<AdditivePerturbation<T>> {
    if l.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            got: l.len(),
        });
    }
    p.require_relint()?;
    let j: Vec<T> = l
        .components()
        .iter()
        .zip(p.probs())
        .map(|(&li, &pi)| li * pi.sqrt())
        .collect();
    AdditivePerturbation::new(j)
}

/// Local quadratic approximation of the KL divergence in spherical
/// coordinates: (eps^2/2) ||l||^2.
pub fn kl_local_approx<T: Scalar>(l: &SphericalPerturbation<T>, epsilon: T) -> T {
    epsilon * epsilon / cast::<T>(2.0) * l.norm_sq()
}

/// One additive perturbation per symbol of an auxiliary alphabet U, tied to
/// a common base distribution and scale. The mixture of the per-symbol
/// conditionals reproduces the base marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationFamily<T> {
    base: Distribution<T>,
    p_u: Distribution<T>,
    perturbations: Vec<AdditivePerturbation<T>>,
    epsilon: T,
}

impl<T: Scalar> PerturbationFamily<T> {
    pub fn new(
        base: Distribution<T>,
        p_u: Distribution<T>,
        perturbations: Vec<AdditivePerturbation<T>>,
        epsilon: T,
    ) -> Result<Self> {
        let report = validate_family(&base, &p_u, &perturbations, epsilon);
        if let Some(err) = report.first_failure {
            return Err(Error::InvalidFamily(Box::new(err)));
        }
        Ok(PerturbationFamily {
            base,
            p_u,
            perturbations,
            epsilon,
        })
    }

    pub fn base(&self) -> &Distribution<T> {
        &self.base
    }

    pub fn p_u(&self) -> &Distribution<T> {
        &self.p_u
    }

    pub fn perturbations(&self) -> &[AdditivePerturbation<T>] {
        &self.perturbations
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn u_size(&self) -> usize {
        self.p_u.len()
    }

    /// The conditional distribution of X given U = u.
    pub fn conditional(&self, u: usize) -> Result<Distribution<T>> {
        let j = &self.perturbations[u];
        if j.components().iter().all(|&v| v == T::zero()) {
            return Ok(self.base.clone());
        }
        perturb(&self.base, j, self.epsilon)
    }

    /// Spherical coordinates of the perturbation for symbol u.
    pub fn spherical(&self, u: usize) -> Result<SphericalPerturbation<T>> {
        to_spherical(&self.perturbations[u], &self.base)
    }

    pub fn report(&self) -> FamilyReport<T> {
        validate_family(&self.base, &self.p_u, &self.perturbations, self.epsilon)
    }
}

/// Validity report of a (possibly inconsistent) family of perturbations.
#[derive(Debug, Clone)]
pub struct FamilyReport<T> {
    /// Per-u residual of the zero-sum condition on J_u.
    pub zero_sum_residuals: Vec<T>,
    /// Componentwise residual of the marginal-preservation condition.
    pub marginal_residuals: Vec<T>,
    /// Per-u positivity margin `max_valid_epsilon(J_u) - epsilon`
    /// (+infinity for a zero perturbation).
    pub positivity_margins: Vec<T>,
    /// Whether every residual is within the policy tolerances.
    pub pass: bool,
    /// First violated condition, if any.
    pub first_failure: Option<Error>,
}

/// Checks the three validity conditions on raw family parts: each J_u sums
/// to zero, the P_U-weighted mixture of the J_u vanishes componentwise, and
/// epsilon stays strictly below every perturbation's positivity bound.
pub fn validate_family<T: Scalar>(
    base: &Distribution<T>,
    p_u: &Distribution<T>,
    perturbations: &[AdditivePerturbation<T>],
    epsilon: T,
) -> FamilyReport<T> {
    let policy = NumericPolicy::default();
    let mut first_failure = None;
    let mut note = |err: Error, first: &mut Option<Error>| {
        if first.is_none() {
            *first = Some(err);
        }
    };

    if perturbations.len() != p_u.len() {
        note(
            Error::LengthMismatch {
                expected: p_u.len(),
                got: perturbations.len(),
            },
            &mut first_failure,
        );
    }

    let mut zero_sum_residuals = Vec::with_capacity(perturbations.len());
    for j in perturbations {
        if j.len() != base.len() {
            note(
                Error::LengthMismatch {
                    expected: base.len(),
                    got: j.len(),
                },
                &mut first_failure,
            );
        }
        let s: T = j.components().iter().copied().sum();
        if s.abs() > policy.zero_sum {
            note(Error::NotZeroSum { sum: as_f64(s) }, &mut first_failure);
        }
        zero_sum_residuals.push(s.abs());
    }

    let mut marginal_residuals = vec![T::zero(); base.len()];
    for (u, j) in perturbations.iter().enumerate() {
        if j.len() != base.len() || u >= p_u.len() {
            continue;
        }
        for (x, &jx) in j.components().iter().enumerate() {
            marginal_residuals[x] = marginal_residuals[x] + p_u.get(u) * jx;
        }
    }
    let max_marginal = marginal_residuals
        .iter()
        .fold(T::zero(), |acc, &r| acc.max(r.abs()));
    if max_marginal > policy.orthogonality {
        note(
            Error::MarginalNotPreserved {
                residual: as_f64(max_marginal),
            },
            &mut first_failure,
        );
    }

    let mut positivity_margins = Vec::with_capacity(perturbations.len());
    for j in perturbations {
        let margin = match max_valid_epsilon(base, j) {
            Ok(bound) => bound - epsilon,
            Err(err) => {
                note(err, &mut first_failure);
                T::nan()
            }
        };
        if !(margin > T::zero()) && !j.components().iter().all(|&v| v == T::zero()) {
            note(
                Error::EpsilonOutOfRange {
                    epsilon: as_f64(epsilon),
                    max: as_f64(margin + epsilon),
                },
                &mut first_failure,
            );
        }
        positivity_margins.push(margin);
    }
    if !(epsilon > T::zero()) {
        note(
            Error::EpsilonOutOfRange {
                epsilon: as_f64(epsilon),
                max: f64::INFINITY,
            },
            &mut first_failure,
        );
    }

    FamilyReport {
        zero_sum_residuals,
        marginal_residuals: marginal_residuals
            .into_iter()
            .map(|r| r.abs())
            .collect(),
        positivity_margins,
        pass: first_failure.is_none(),
        first_failure,
    }
}
