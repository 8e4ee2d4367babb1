//! Quadratic approximations of I(U;X), I(U;Y), I(U;Z) for a perturbation
//! family, together with the exact KL-decomposition forms used to measure
//! the dropped remainder.
//!
//! The approximations keep only the eps^2 term; the exact operations are the
//! independent baselines that quantify what was discarded.

use crate::channel::{Channel, Dtm, GramMatrix};
use crate::error::{Error, Result};
use crate::linalg::norm2_sq;
use crate::prob::{kl_divergence, Distribution, PerturbationFamily};
use crate::scalar::{cast, Scalar};

/// Encoding rate, legitimate-channel information and leakage, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoTriple<T> {
    pub i_ux: T,
    pub i_uy: T,
    pub i_uz: T,
}

impl<T: Scalar> InfoTriple<T> {
    /// Validates nonnegativity and the data-processing order.
    pub fn new(i_ux: T, i_uy: T, i_uz: T) -> Result<Self> {
        let floor = -cast::<T>(1e-12);
        for (name, v) in [("i_ux", i_ux), ("i_uy", i_uy), ("i_uz", i_uz)] {
            if v < floor {
                return Err(Error::ParameterOutOfRange {
                    name,
                    value: crate::scalar::as_f64(v),
                    range: "[0, inf)",
                });
            }
        }
        let slack = cast::<T>(1e-10);
        if i_uy > i_ux + slack || i_uz > i_ux + slack {
            return Err(Error::ParameterOutOfRange {
                name: "data processing",
                value: crate::scalar::as_f64(i_uy.max(i_uz) - i_ux),
                range: "channel information must not exceed encoding information",
            });
        }
        Ok(InfoTriple { i_ux, i_uy, i_uz })
    }
}

/// Quadratic form applied to a spherical perturbation: either ||B l||^2
/// through a DTM or l^T M l through a cached Gram matrix. The two agree when
/// M = B^T B.
pub trait SphericalQuadForm<T> {
    fn dim(&self) -> usize;
    fn form(&self, l: &[T]) -> T;
}

impl<T: Scalar> SphericalQuadForm<T> for Dtm<T> {
    fn dim(&self) -> usize {
        self.matrix().cols()
    }
    fn form(&self, l: &[T]) -> T {
        norm2_sq(&self.push(l))
    }
}

impl<T: Scalar> SphericalQuadForm<T> for GramMatrix<T> {
    fn dim(&self) -> usize {
        GramMatrix::dim(self)
    }
    fn form(&self, l: &[T]) -> T {
        self.quadratic_form(l)
    }
}

/// Local approximation of the encoding information:
/// (eps^2/2) sum_u P_U(u) ||L_u||^2.
pub fn approx_encoding_info<T: Scalar>(f: &PerturbationFamily<T>) -> Result<T> {
    let mut acc = T::zero();
    for u in 0..f.u_size() {
        let l = f.spherical(u)?;
        acc = acc + f.p_u().get(u) * l.norm_sq();
    }
    Ok(f.epsilon() * f.epsilon() / cast::<T>(2.0) * acc)
}

/// Local approximation of the information carried through a channel:
/// (eps^2/2) sum_u P_U(u) ||B L_u||^2. The same call shape serves the
/// legitimate channel and the eavesdropper by passing the matching DTM or
/// Gram matrix.
pub fn approx_channel_info<T, Q>(q: &Q, f: &PerturbationFamily<T>) -> Result<T>
where
    T: Scalar,
    Q: SphericalQuadForm<T>,
{
    if q.dim() != f.base().len() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "quadratic form dimension {} vs alphabet {}",
                q.dim(),
                f.base().len()
            ),
        });
    }
    let mut acc = T::zero();
    for u in 0..f.u_size() {
        let l = f.spherical(u)?;
        acc = acc + f.p_u().get(u) * q.form(l.components());
    }
    Ok(f.epsilon() * f.epsilon() / cast::<T>(2.0) * acc)
}

/// Exact I(U;X) = sum_u P_U(u) D(P_{X|U=u} || P_X) through the family's
/// perturbed conditionals.
pub fn exact_encoding_info<T: Scalar>(f: &PerturbationFamily<T>) -> Result<T> {
    let mut acc = T::zero();
    for u in 0..f.u_size() {
        let cond = f.conditional(u)?;
        acc = acc + f.p_u().get(u) * kl_divergence(&cond, f.base())?;
    }
    Ok(acc)
}

/// Exact I(U;X) from directly supplied conditionals, for boundary cases the
/// perturbation parameterization cannot reach (deterministic splits).
/// The reference marginal is the P_U-mixture of the conditionals.
pub fn exact_encoding_info_conditionals<T: Scalar>(
    p_u: &Distribution<T>,
    conditionals: &[Distribution<T>],
) -> Result<T> {
    let marginal = mixture(p_u, conditionals)?;
    let mut acc = T::zero();
    for (u, cond) in conditionals.iter().enumerate() {
        let w = p_u.get(u);
        if w > T::zero() {
            acc = acc + w * kl_divergence(cond, &marginal)?;
        }
    }
    Ok(acc)
}

/// Exact I(U;Y) through the channel pushforward of the family conditionals:
/// sum_u P_U(u) D(W P_{X|U=u} || P_Y).
pub fn exact_markov_info<T: Scalar>(
    ch: &Channel<T>,
    f: &PerturbationFamily<T>,
) -> Result<T> {
    let conditionals: Vec<Distribution<T>> = (0..f.u_size())
        .map(|u| f.conditional(u))
        .collect::<Result<_>>()?;
    exact_markov_info_conditionals(ch, f.p_u(), &conditionals)
}

/// Exact I(U;Y) from directly supplied input conditionals.
pub fn exact_markov_info_conditionals<T: Scalar>(
    ch: &Channel<T>,
    p_u: &Distribution<T>,
    conditionals: &[Distribution<T>],
) -> Result<T> {
    let pushed: Vec<Distribution<T>> = conditionals
        .iter()
        .map(|c| ch.output_distribution(c))
        .collect::<Result<_>>()?;
    exact_encoding_info_conditionals(p_u, &pushed)
}

/// Exact information triple for a wiretap pair.
pub fn exact_info_triple<T: Scalar>(
    main: &Channel<T>,
    eaves: &Channel<T>,
    f: &PerturbationFamily<T>,
) -> Result<InfoTriple<T>> {
    InfoTriple::new(
        exact_encoding_info(f)?,
        exact_markov_info(main, f)?,
        exact_markov_info(eaves, f)?,
    )
}

/// Approximate information triple from the two Gram matrices.
pub fn approx_info_triple<T: Scalar>(
    v: &GramMatrix<T>,
    lam: &GramMatrix<T>,
    f: &PerturbationFamily<T>,
) -> Result<InfoTriple<T>> {
    InfoTriple::new(
        approx_encoding_info(f)?,
        approx_channel_info(v, f)?,
        approx_channel_info(lam, f)?,
    )
}

fn mixture<T: Scalar>(
    p_u: &Distribution<T>,
    conditionals: &[Distribution<T>],
) -> Result<Distribution<T>> {
    if conditionals.len() != p_u.len() {
        return Err(Error::LengthMismatch {
            expected: p_u.len(),
            got: conditionals.len(),
        });
    }
    let n = conditionals
        .first()
        .map(|c| c.len())
        .ok_or(Error::LengthMismatch {
            expected: 1,
            got: 0,
        })?;
    let mut probs = vec![T::zero(); n];
    for (u, cond) in conditionals.iter().enumerate() {
        if cond.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: cond.len(),
            });
        }
        for (x, &c) in cond.probs().iter().enumerate() {
            probs[x] = probs[x] + p_u.get(u) * c;
        }
    }
    Distribution::new(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{gram, mutual_information};
    use crate::prob::AdditivePerturbation;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    fn dist(p: &[f64]) -> Distribution<f64> {
        Distribution::new(p.to_vec()).unwrap()
    }

    fn symmetric_family(eps: f64) -> PerturbationFamily<f64> {
        PerturbationFamily::new(
            dist(&[0.5, 0.5]),
            dist(&[0.5, 0.5]),
            vec![
                AdditivePerturbation::new(vec![1.0, -1.0]).unwrap(),
                AdditivePerturbation::new(vec![-1.0, 1.0]).unwrap(),
            ],
            eps,
        )
        .unwrap()
    }

    fn zero_family(eps: f64) -> PerturbationFamily<f64> {
        PerturbationFamily::new(
            dist(&[0.4, 0.6]),
            dist(&[0.5, 0.5]),
            vec![AdditivePerturbation::zero(2), AdditivePerturbation::zero(2)],
            eps,
        )
        .unwrap()
    }

    #[test]
    fn approx_encoding_examples() {
        assert_eq!(approx_encoding_info(&zero_family(0.1)).unwrap(), 0.0);

        // J = [1,-1]/sqrt(2) over a uniform base gives ||L_u||^2 = 2, so at
        // eps = 0.01 the rate approximation is (eps^2/2) * 2 = 1e-4.
        let s = 1.0 / 2.0f64.sqrt();
        let fam = PerturbationFamily::new(
            dist(&[0.5, 0.5]),
            dist(&[0.5, 0.5]),
            vec![
                AdditivePerturbation::new(vec![s, -s]).unwrap(),
                AdditivePerturbation::new(vec![-s, s]).unwrap(),
            ],
            0.01,
        )
        .unwrap();
        assert_abs_diff_eq!(approx_encoding_info(&fam).unwrap(), 1e-4, epsilon = 1e-18);
    }

    #[test]
    fn approx_encoding_matches_exact_oracle_at_small_eps() {
        let fam = symmetric_family(1e-3);
        let exact = exact_encoding_info(&fam).unwrap();
        let approx = approx_encoding_info(&fam).unwrap();
        assert!((exact - approx).abs() <= 1e-8);
    }

    #[test]
    fn approx_channel_info_examples() {
        let fam = symmetric_family(0.01);
        let base = fam.base().clone();

        assert_eq!(
            approx_channel_info(&Dtm::new(&Channel::identity(2), &base).unwrap(), &zero_family(0.1))
                .unwrap(),
            0.0
        );

        // identity channel: equals the encoding information exactly
        let d_id = Dtm::new(&Channel::identity(2), &base).unwrap();
        assert_abs_diff_eq!(
            approx_channel_info(&d_id, &fam).unwrap(),
            approx_encoding_info(&fam).unwrap(),
            epsilon = 1e-18
        );

        // Gram route agrees with the DTM route
        let g = gram(&d_id);
        assert_abs_diff_eq!(
            approx_channel_info(&g, &fam).unwrap(),
            approx_channel_info(&d_id, &fam).unwrap(),
            epsilon = 1e-15
        );

        // BSC(0.5) eavesdropper annihilates mean-zero perturbations
        let d_half = Dtm::new(&Channel::bsc(0.5).unwrap(), &base).unwrap();
        assert_abs_diff_eq!(approx_channel_info(&d_half, &fam).unwrap(), 0.0, epsilon = 1e-20);

        // dimension mismatch
        let p3 = dist(&[0.3, 0.3, 0.4]);
        let d3 = Dtm::new(&Channel::identity(3), &p3).unwrap();
        assert!(approx_channel_info(&d3, &fam).is_err());
    }

    #[test]
    fn exact_encoding_examples() {
        assert_eq!(exact_encoding_info(&zero_family(0.2)).unwrap(), 0.0);

        // deterministic split carries one full bit, through the
        // directly-supplied-conditionals form
        let p_u = dist(&[0.5, 0.5]);
        let conds = vec![dist(&[1.0, 0.0]), dist(&[0.0, 1.0])];
        assert_abs_diff_eq!(
            exact_encoding_info_conditionals(&p_u, &conds).unwrap(),
            LN_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn exact_encoding_error_shrinks_quadratically_in_scale() {
        // the approximation error at eps/10 is at least 100x smaller
        let e1 = {
            let f = symmetric_family(1e-2);
            (exact_encoding_info(&f).unwrap() - approx_encoding_info(&f).unwrap()).abs()
        };
        let e2 = {
            let f = symmetric_family(1e-3);
            (exact_encoding_info(&f).unwrap() - approx_encoding_info(&f).unwrap()).abs()
        };
        assert!(e2 > 0.0);
        assert!(e1 / e2 >= 100.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn exact_markov_examples() {
        let ch = Channel::bsc(0.2).unwrap();
        assert_eq!(exact_markov_info(&ch, &zero_family(0.1)).unwrap(), 0.0);

        let fam = symmetric_family(0.05);
        let id = Channel::identity(2);
        assert_abs_diff_eq!(
            exact_markov_info(&id, &fam).unwrap(),
            exact_encoding_info(&fam).unwrap(),
            epsilon = 1e-15
        );

        // BSC(0.2), eps = 1e-3: exact matches the quadratic approximation
        let fam = symmetric_family(1e-3);
        let d = Dtm::new(&ch, fam.base()).unwrap();
        let exact = exact_markov_info(&ch, &fam).unwrap();
        let approx = approx_channel_info(&d, &fam).unwrap();
        assert!((exact - approx).abs() <= 1e-8);
    }

    #[test]
    fn degenerate_family_reproduces_mutual_information() {
        // U = X through deterministic conditionals: I(U;Y) = I(X;Y)
        let ch = Channel::bsc(0.15).unwrap();
        let p_x = dist(&[0.4, 0.6]);
        let conds = vec![dist(&[1.0, 0.0]), dist(&[0.0, 1.0])];
        let via_family = exact_markov_info_conditionals(&ch, &p_x, &conds).unwrap();
        let direct = mutual_information(&ch, &p_x).unwrap();
        assert_abs_diff_eq!(via_family, direct, epsilon = 1e-14);
    }

    #[test]
    fn info_triple_validation() {
        assert!(InfoTriple::new(1.0, 0.5, 0.2).is_ok());
        assert!(InfoTriple::new(0.5, 1.0, 0.2).is_err());
        assert!(InfoTriple::new(-1.0, -2.0, -2.0).is_err());

        let main = Channel::bsc(0.1).unwrap();
        let eaves = Channel::bsc(0.3).unwrap();
        let fam = symmetric_family(1e-2);
        let exact = exact_info_triple(&main, &eaves, &fam).unwrap();
        assert!(exact.i_uy <= exact.i_ux + 1e-10);
        assert!(exact.i_uz <= exact.i_ux + 1e-10);
        assert!(exact.i_uz <= exact.i_uy + 1e-10); // degraded pair

        let v = gram(&Dtm::new(&main, fam.base()).unwrap());
        let lam = gram(&Dtm::new(&eaves, fam.base()).unwrap());
        let approx = approx_info_triple(&v, &lam, &fam).unwrap();
        assert!((approx.i_ux - exact.i_ux).abs() <= 1e-5);
    }
}
