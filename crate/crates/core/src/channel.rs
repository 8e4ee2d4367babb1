//! Discrete memoryless channels, divergence transfer matrices and their
//! Gram matrices, plus exact mutual information for a fixed input.

use crate::error::{Error, Result};
use crate::linalg::{dot, jacobi_eigh, norm2, Mat};
use crate::prob::{Distribution, NumericPolicy};
use crate::scalar::{as_f64, cast, Scalar};

/// A channel as a left-stochastic |Y| x |X| matrix of conditional
/// probabilities P(y|x): every column sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel<T> {
    w: Mat<T>,
}

impl<T: Scalar> Channel<T> {
    pub fn new(w: Mat<T>) -> Result<Self> {
        Self::with_policy(w, &NumericPolicy::default())
    }

    pub fn with_policy(w: Mat<T>, policy: &NumericPolicy<T>) -> Result<Self> {
        for j in 0..w.cols() {
            let mut sum = T::zero();
            for i in 0..w.rows() {
                let v = w[(i, j)];
                if v < T::zero() {
                    return Err(Error::NegativeEntry {
                        index: i * w.cols() + j,
                        value: as_f64(v),
                    });
                }
                sum = sum + v;
            }
            if (sum - T::one()).abs() > policy.sum_one {
                return Err(Error::NotColumnStochastic {
                    index: j,
                    sum: as_f64(sum),
                });
            }
        }
        Ok(Channel { w })
    }

    /// Binary symmetric channel with crossover probability p.
    pub fn bsc(p: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::ParameterOutOfRange {
                name: "p",
                value: as_f64(p),
                range: "[0, 1]",
            });
        }
        let q = T::one() - p;
        Ok(Channel {
            w: Mat::from_rows(2, 2, vec![q, p, p, q]),
        })
    }

    /// Noiseless channel on n symbols.
    pub fn identity(n: usize) -> Self {
        Channel {
            w: Mat::identity(n),
        }
    }

    pub fn matrix(&self) -> &Mat<T> {
        &self.w
    }

    pub fn num_inputs(&self) -> usize {
        self.w.cols()
    }

    pub fn num_outputs(&self) -> usize {
        self.w.rows()
    }

    /// Output distribution W * p_x.
    pub fn output_distribution(&self, p_x: &Distribution<T>) -> Result<Distribution<T>> {
        if p_x.len() != self.num_inputs() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "channel expects {} inputs, distribution has {}",
                    self.num_inputs(),
                    p_x.len()
                ),
            });
        }
        let probs = self.w.matvec(p_x.probs());
        Distribution::new(probs)
    }
}

/// Exact mutual information I(X;Y) in nats for the given input:
/// the input-weighted KL divergence of each channel row pair against the
/// output marginal.
pub fn mutual_information<T: Scalar>(ch: &Channel<T>, p_x: &Distribution<T>) -> Result<T> {
    let p_y = ch.output_distribution(p_x)?;
    let mut acc = T::zero();
    for x in 0..ch.num_inputs() {
        let px = p_x.get(x);
        if px <= T::zero() {
            continue;
        }
        for y in 0..ch.num_outputs() {
            let wyx = ch.matrix()[(y, x)];
            if wyx > T::zero() {
                acc = acc + px * wyx * (wyx / p_y.get(y)).ln();
            }
        }
    }
    Ok(acc)
}

/// Divergence transfer matrix B = diag(sqrt(P_Y))^{-1} W diag(sqrt(P_X)),
/// carrying the input and induced output distributions.
///
/// Its largest singular value is 1 with singular vectors
/// (sqrt(P_Y), sqrt(P_X)); this is verified numerically at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dtm<T> {
    b: Mat<T>,
    input_dist: Distribution<T>,
    output_dist: Distribution<T>,
}

impl<T: Scalar> Dtm<T> {
    pub fn new(ch: &Channel<T>, p_x: &Distribution<T>) -> Result<Self> {
        if !p_x.is_relative_interior() {
            let index = p_x
                .probs()
                .iter()
                .position(|&p| p <= T::zero())
                .unwrap_or(0);
            return Err(Error::ZeroEntry { index });
        }
        let p_y = ch.output_distribution(p_x)?;
        if let Some(index) = p_y.probs().iter().position(|&p| p <= T::zero()) {
            return Err(Error::DeadOutputSymbol { index });
        }

        let sqrt_x = p_x.sqrt_probs();
        let sqrt_y = p_y.sqrt_probs();
        let mut b = Mat::zeros(ch.num_outputs(), ch.num_inputs());
        for y in 0..ch.num_outputs() {
            for x in 0..ch.num_inputs() {
                b[(y, x)] = ch.matrix()[(y, x)] * sqrt_x[x] / sqrt_y[y];
            }
        }

        let dtm = Dtm {
            b,
            input_dist: p_x.clone(),
            output_dist: p_y,
        };
        dtm.check_singular_property(&NumericPolicy::default())?;
        Ok(dtm)
    }

    pub fn matrix(&self) -> &Mat<T> {
        &self.b
    }

    pub fn input_dist(&self) -> &Distribution<T> {
        &self.input_dist
    }

    pub fn output_dist(&self) -> &Distribution<T> {
        &self.output_dist
    }

    /// Applies B to a spherical-perturbation vector.
    pub fn push(&self, l: &[T]) -> Vec<T> {
        self.b.matvec(l)
    }

    /// Largest singular value together with the deviation of
    /// (sqrt(P_Y), sqrt(P_X)) from a singular pair at value one.
    pub fn singular_property_residuals(&self) -> (T, T, T) {
        let gram = self.b.transpose().matmul(&self.b);
        let (vals, _) = jacobi_eigh(&gram);
        let sigma_max = vals.last().copied().unwrap_or(T::zero()).max(T::zero()).sqrt();

        let sqrt_x = self.input_dist.sqrt_probs();
        let sqrt_y = self.output_dist.sqrt_probs();
        let forward = self.b.matvec(&sqrt_x);
        let right_residual = norm2(
            &forward
                .iter()
                .zip(&sqrt_y)
                .map(|(&a, &b)| a - b)
                .collect::<Vec<T>>(),
        );
        let back = self.b.transpose().matvec(&sqrt_y);
        let left_residual = norm2(
            &back
                .iter()
                .zip(&sqrt_x)
                .map(|(&a, &b)| a - b)
                .collect::<Vec<T>>(),
        );
        (sigma_max, right_residual, left_residual)
    }

    fn check_singular_property(&self, policy: &NumericPolicy<T>) -> Result<()> {
        let (sigma_max, right, left) = self.singular_property_residuals();
        let worst = (sigma_max - T::one()).abs().max(right).max(left);
        if worst > policy.orthogonality {
            return Err(Error::InvalidGram {
                context: format!(
                    "DTM singular-value property violated: residual {}",
                    as_f64(worst)
                ),
            });
        }
        Ok(())
    }
}

/// Gram matrix B^T B of a divergence transfer matrix. Symmetric, positive
/// semidefinite with spectrum in [0, 1], and sqrt(P_X) as the eigenvector of
/// eigenvalue one. The eigendecomposition (ascending, sign-normalized) is
/// cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix<T> {
    m: Mat<T>,
    input_dist: Distribution<T>,
    eigenvalues: Vec<T>,
    eigenvectors: Mat<T>,
}

impl<T: Scalar> GramMatrix<T> {
    /// B^T B for a DTM.
    pub fn from_dtm(d: &Dtm<T>) -> Self {
        let m = d.matrix().transpose().matmul(d.matrix());
        // symmetrize away rounding noise so cached spectra are clean
        let m = m.add(&m.transpose()).scale(cast(0.5));
        let (eigenvalues, eigenvectors) = jacobi_eigh(&m);
        GramMatrix {
            m,
            input_dist: d.input_dist().clone(),
            eigenvalues,
            eigenvectors,
        }
    }

    /// Validates an externally supplied symmetric matrix as a Gram matrix
    /// for the given input distribution.
    pub fn from_matrix(m: Mat<T>, p_x: &Distribution<T>) -> Result<Self> {
        Self::from_matrix_with_policy(m, p_x, &NumericPolicy::default())
    }

    pub fn from_matrix_with_policy(
        m: Mat<T>,
        p_x: &Distribution<T>,
        policy: &NumericPolicy<T>,
    ) -> Result<Self> {
        if m.rows() != m.cols() || m.rows() != p_x.len() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "gram matrix {}x{} vs distribution of length {}",
                    m.rows(),
                    m.cols(),
                    p_x.len()
                ),
            });
        }
        let asym = m.max_asymmetry();
        if asym > policy.sum_one {
            return Err(Error::NotSymmetric {
                residual: as_f64(asym),
            });
        }
        let (eigenvalues, eigenvectors) = jacobi_eigh(&m);
        let low = *eigenvalues.first().expect("nonempty spectrum");
        let high = *eigenvalues.last().expect("nonempty spectrum");
        if low < -policy.orthogonality || high > T::one() + policy.orthogonality {
            return Err(Error::InvalidGram {
                context: format!(
                    "spectrum [{}, {}] escapes [0, 1]",
                    as_f64(low),
                    as_f64(high)
                ),
            });
        }
        let sqrt_x = p_x.sqrt_probs();
        let image = m.matvec(&sqrt_x);
        let residual = norm2(
            &image
                .iter()
                .zip(&sqrt_x)
                .map(|(&a, &b)| a - b)
                .collect::<Vec<T>>(),
        );
        if residual > policy.orthogonality {
            return Err(Error::InvalidGram {
                context: format!(
                    "sqrt(P_X) is not a unit-eigenvalue eigenvector: residual {}",
                    as_f64(residual)
                ),
            });
        }
        Ok(GramMatrix {
            m,
            input_dist: p_x.clone(),
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn matrix(&self) -> &Mat<T> {
        &self.m
    }

    pub fn input_dist(&self) -> &Distribution<T> {
        &self.input_dist
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    /// Cached eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Cached eigenvectors as columns, matching [`eigenvalues`](Self::eigenvalues).
    pub fn eigenvectors(&self) -> &Mat<T> {
        &self.eigenvectors
    }

    /// l^T M l.
    pub fn quadratic_form(&self, l: &[T]) -> T {
        self.m.quadratic_form(l)
    }
}

/// Forms the Gram matrix of a DTM (the operation the optimizer consumes).
pub fn gram<T: Scalar>(d: &Dtm<T>) -> GramMatrix<T> {
    GramMatrix::from_dtm(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    fn dist(p: &[f64]) -> Distribution<f64> {
        Distribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn bsc_matrices() {
        let id = Channel::bsc(0.0).unwrap();
        assert_eq!(id.matrix(), Channel::identity(2).matrix());

        let mid = Channel::bsc(0.5).unwrap();
        assert!(mid.matrix().row(0).iter().all(|&v| v == 0.5));

        let ch = Channel::bsc(0.1).unwrap();
        assert_eq!(ch.matrix().row(0), &[0.9, 0.1]);
        assert_eq!(ch.matrix().row(1), &[0.1, 0.9]);

        assert!(Channel::<f64>::bsc(1.5).is_err());
    }

    #[test]
    fn output_distribution_examples() {
        let p = dist(&[0.3, 0.7]);
        let id = Channel::identity(2);
        assert_eq!(id.output_distribution(&p).unwrap().probs(), p.probs());

        let uniform = dist(&[0.5, 0.5]);
        let out = Channel::bsc(0.2).unwrap().output_distribution(&uniform).unwrap();
        assert_abs_diff_eq!(out.get(0), 0.5, epsilon = 1e-15);

        let skew = dist(&[0.8, 0.2]);
        let out = Channel::bsc(0.1).unwrap().output_distribution(&skew).unwrap();
        assert_abs_diff_eq!(out.get(0), 0.74, epsilon = 1e-15);
        assert_abs_diff_eq!(out.get(1), 0.26, epsilon = 1e-15);

        assert!(Channel::identity(3).output_distribution(&p).is_err());
    }

    #[test]
    fn dtm_examples() {
        // BSC with uniform input: B equals the transition matrix itself.
        let ch = Channel::bsc(0.1).unwrap();
        let uniform = dist(&[0.5, 0.5]);
        let d = Dtm::new(&ch, &uniform).unwrap();
        for y in 0..2 {
            for x in 0..2 {
                assert_abs_diff_eq!(d.matrix()[(y, x)], ch.matrix()[(y, x)], epsilon = 1e-15);
            }
        }

        // identity channel: B is the identity for any interior input.
        let p = dist(&[0.3, 0.7]);
        let d = Dtm::new(&Channel::identity(2), &p).unwrap();
        for y in 0..2 {
            for x in 0..2 {
                let expect = if y == x { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(d.matrix()[(y, x)], expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn dtm_reconstructs_channel() {
        // Invert the definition on a rectangular channel: W = diag(sqrt(P_Y)) B diag(sqrt(P_X))^{-1}.
        let w = Mat::from_rows(2, 3, vec![0.7, 0.2, 0.5, 0.3, 0.8, 0.5]);
        let ch = Channel::new(w.clone()).unwrap();
        let p = dist(&[0.2, 0.3, 0.5]);
        let d = Dtm::new(&ch, &p).unwrap();
        let sqrt_y = d.output_dist().sqrt_probs();
        let sqrt_x = p.sqrt_probs();
        for y in 0..2 {
            for x in 0..3 {
                let rebuilt = sqrt_y[y] * d.matrix()[(y, x)] / sqrt_x[x];
                assert_abs_diff_eq!(rebuilt, w[(y, x)], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn dtm_rejects_dead_output() {
        let w = Mat::from_rows(3, 2, vec![0.5, 0.3, 0.5, 0.7, 0.0, 0.0]);
        let ch = Channel::new(w).unwrap();
        let p = dist(&[0.4, 0.6]);
        match Dtm::new(&ch, &p) {
            Err(Error::DeadOutputSymbol { index }) => assert_eq!(index, 2),
            other => panic!("expected dead-output error, got {other:?}"),
        }

        let boundary = dist(&[1.0, 0.0]);
        assert!(matches!(
            Dtm::new(&Channel::bsc(0.1).unwrap(), &boundary),
            Err(Error::ZeroEntry { .. })
        ));
    }

    #[test]
    fn gram_examples() {
        // BSC(p) uniform: V = [[(1-p)^2+p^2, 2p(1-p)], [2p(1-p), (1-p)^2+p^2]].
        let d = Dtm::new(&Channel::bsc(0.1).unwrap(), &dist(&[0.5, 0.5])).unwrap();
        let v = gram(&d);
        assert_abs_diff_eq!(v.matrix()[(0, 0)], 0.82, epsilon = 1e-15);
        assert_abs_diff_eq!(v.matrix()[(0, 1)], 0.18, epsilon = 1e-15);
        assert_abs_diff_eq!(v.matrix()[(1, 0)], 0.18, epsilon = 1e-15);
        assert_abs_diff_eq!(v.matrix()[(1, 1)], 0.82, epsilon = 1e-15);
        // spectrum {(1-2p)^2, 1}
        assert_abs_diff_eq!(v.eigenvalues()[0], 0.64, epsilon = 1e-14);
        assert_abs_diff_eq!(v.eigenvalues()[1], 1.0, epsilon = 1e-14);

        let p = dist(&[0.3, 0.7]);
        let vi = gram(&Dtm::new(&Channel::identity(2), &p).unwrap());
        assert_abs_diff_eq!(vi.matrix()[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(vi.matrix()[(0, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn gram_from_matrix_validates() {
        let p = dist(&[0.5, 0.5]);
        let ok = Mat::from_rows(2, 2, vec![0.82, 0.18, 0.18, 0.82]);
        assert!(GramMatrix::from_matrix(ok, &p).is_ok());

        let asym = Mat::from_rows(2, 2, vec![0.82, 0.18, 0.28, 0.82]);
        assert!(matches!(
            GramMatrix::from_matrix(asym, &p),
            Err(Error::NotSymmetric { .. })
        ));

        let too_big = Mat::from_rows(2, 2, vec![1.5, 0.0, 0.0, 0.5]);
        assert!(GramMatrix::from_matrix(too_big, &p).is_err());

        // unit eigenvector must be sqrt(p)
        let skewed = dist(&[0.2, 0.8]);
        let v = Mat::from_rows(2, 2, vec![0.82, 0.18, 0.18, 0.82]);
        assert!(GramMatrix::from_matrix(v, &skewed).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let uniform = dist(&[0.5, 0.5]);
        assert_abs_diff_eq!(
            mutual_information(&Channel::bsc(0.5).unwrap(), &dist(&[0.3, 0.7])).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            mutual_information(&Channel::identity(2), &uniform).unwrap(),
            LN_2,
            epsilon = 1e-15
        );
        // BSC(0.1) uniform: ln 2 - H_b(0.1), cross-checked by direct summation
        let hb01 = -(0.1f64.ln() * 0.1 + 0.9f64.ln() * 0.9);
        assert_abs_diff_eq!(
            mutual_information(&Channel::bsc(0.1).unwrap(), &uniform).unwrap(),
            LN_2 - hb01,
            epsilon = 1e-15
        );
    }

    #[test]
    fn mutual_information_handles_boundary_inputs() {
        // zero-probability inputs contribute nothing; dead outputs under the
        // support are fine because the marginal still covers them
        let p = dist(&[1.0, 0.0]);
        let got = mutual_information(&Channel::identity(2), &p).unwrap();
        assert_abs_diff_eq!(got, 0.0, epsilon = 1e-15);
    }
}
