//! Closed-form distance bounds and existence caps.
//!
//! For `n` points in `St_F(d, r)` the minimum chordal distance is at most
//! `sqrt(2rn/(n-1))`, and at most `sqrt(2r)` once `n > mdr + 1`. Squared
//! values are also available as exact rationals so that equality tests can
//! avoid square-root round-off.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::FieldTag;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    Simplex,
    Orthoplex,
}

/// A bound value together with the largest `n` for which it can be attained
/// (`None` means no cap).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub max_n: Option<usize>,
    pub kind: BoundKind,
}

/// Exact `2rn/(n-1)`.
pub fn simplex_bound_sq(r: usize, n: usize) -> Result<Ratio<u64>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("simplex bound needs n >= 2, got {n}")));
    }
    if r < 1 {
        return Err(Error::InvalidParameter("r must be positive".into()));
    }
    Ok(Ratio::new(2 * r as u64 * n as u64, n as u64 - 1))
}

pub fn simplex_bound<T: Real>(r: usize, n: usize) -> Result<T> {
    Ok(ratio_to::<T>(simplex_bound_sq(r, n)?).sqrt())
}

/// Exact `2r`.
pub fn orthoplex_bound_sq(r: usize) -> Ratio<u64> {
    Ratio::from_integer(2 * r as u64)
}

pub fn orthoplex_bound<T: Real>(r: usize) -> T {
    T::of_usize(2 * r).sqrt()
}

/// Largest `n` for which a simplex code can exist: `mdr + 1`.
pub fn simplex_cap(field: FieldTag, d: usize, r: usize) -> Result<usize> {
    check_dims(d, r)?;
    Ok(field.m() * d * r + 1)
}

/// Largest `n` for which the orthoplex bound can be attained: `2mdr`.
pub fn orthoplex_cap(field: FieldTag, d: usize, r: usize) -> Result<usize> {
    check_dims(d, r)?;
    Ok(2 * field.m() * d * r)
}

pub fn simplex(field: FieldTag, d: usize, r: usize, n: usize) -> Result<BoundResult> {
    Ok(BoundResult {
        value: simplex_bound::<f64>(r, n)?,
        max_n: Some(simplex_cap(field, d, r)?),
        kind: BoundKind::Simplex,
    })
}

pub fn orthoplex(field: FieldTag, d: usize, r: usize) -> Result<BoundResult> {
    Ok(BoundResult {
        value: orthoplex_bound::<f64>(r),
        max_n: Some(orthoplex_cap(field, d, r)?),
        kind: BoundKind::Orthoplex,
    })
}

fn check_dims(d: usize, r: usize) -> Result<()> {
    if r < 1 || d < r {
        return Err(Error::InvalidParameter(format!("need d >= r >= 1, got d={d}, r={r}")));
    }
    Ok(())
}

pub(crate) fn ratio_to<T: Real>(q: Ratio<u64>) -> T {
    T::of(*q.numer() as f64) / T::of(*q.denom() as f64)
}

/// Radon-Hurwitz number `ρ_F(d)`.
///
/// With `d = (2a+1) 2^(4b+c)`, `0 <= c <= 3`: `8b + 2^c` over `R`, `8b + 2c + 2` over `C`.
pub fn radon_hurwitz(field: FieldTag, d: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let v = d.trailing_zeros() as usize;
    let (b, c) = (v / 4, v % 4);
    Ok(match field {
        FieldTag::R => 8 * b + (1 << c),
        FieldTag::C => 8 * b + 2 * c + 2,
    })
}

/// Largest binary code of length `r` with minimum distance at least `r/2`
/// (the Plotkin bound, attained when Hadamard matrices are available).
pub fn plotkin_cap(r: usize) -> Result<usize> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!("plotkin cap needs r >= 2, got {r}")));
    }
    match r % 4 {
        0 => Ok(2 * r),
        2 => Ok(r + 2),
        3 => Ok(r + 1),
        _ => Err(Error::UnsupportedResidue(r)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn simplex_examples() {
        assert!((simplex_bound::<f64>(1, 3).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(simplex_bound_sq(3, 4).unwrap(), Ratio::from_integer(8));
        assert_eq!(simplex_bound_sq(2, 2).unwrap(), Ratio::from_integer(8));
        assert!(matches!(simplex_bound::<f64>(1, 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn cap_examples() {
        assert_eq!(simplex_cap(FieldTag::C, 2, 2).unwrap(), 9);
        assert_eq!(simplex_cap(FieldTag::R, 3, 1).unwrap(), 4);
        assert_eq!(simplex_cap(FieldTag::C, 1, 1).unwrap(), 3);
        assert_eq!(orthoplex_cap(FieldTag::C, 2, 2).unwrap(), 16);
        assert_eq!(orthoplex_cap(FieldTag::R, 3, 1).unwrap(), 6);
        assert_eq!(orthoplex_cap(FieldTag::C, 1, 1).unwrap(), 4);
        assert!(simplex_cap(FieldTag::R, 1, 2).is_err());
    }

    #[test]
    fn orthoplex_examples() {
        assert!((orthoplex_bound::<f64>(1) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(orthoplex_bound::<f64>(2), 2.0);
        assert!((orthoplex_bound::<f64>(4) - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn radon_hurwitz_examples() {
        assert_eq!(radon_hurwitz(FieldTag::R, 8).unwrap(), 8);
        assert_eq!(radon_hurwitz(FieldTag::R, 16).unwrap(), 9);
        assert_eq!(radon_hurwitz(FieldTag::C, 16).unwrap(), 10);
        assert_eq!(radon_hurwitz(FieldTag::R, 12).unwrap(), 4);
        assert_eq!(radon_hurwitz(FieldTag::R, 1).unwrap(), 1);
        assert_eq!(radon_hurwitz(FieldTag::C, 1).unwrap(), 2);
    }

    #[test]
    fn plotkin_examples() {
        assert_eq!(plotkin_cap(4).unwrap(), 8);
        assert_eq!(plotkin_cap(2).unwrap(), 4);
        assert_eq!(plotkin_cap(3).unwrap(), 4);
        assert_eq!(plotkin_cap(5), Err(Error::UnsupportedResidue(5)));
    }

    #[test]
    fn simplex_tends_to_orthoplex() {
        let far = simplex_bound::<f64>(3, 1_000_000).unwrap();
        assert!(far > orthoplex_bound::<f64>(3));
        assert!(far - orthoplex_bound::<f64>(3) < 1e-5);
    }

    proptest! {
        #[test]
        fn simplex_exceeds_orthoplex_and_decreases(r in 1usize..20, n in 2usize..200) {
            let s = simplex_bound_sq(r, n).unwrap();
            prop_assert!(s > orthoplex_bound_sq(r));
            prop_assert!(simplex_bound_sq(r, n + 1).unwrap() < s);
        }

        #[test]
        fn radon_hurwitz_depends_on_two_part(d in 1usize..100_000) {
            let two_part = 1usize << d.trailing_zeros();
            for f in [FieldTag::R, FieldTag::C] {
                prop_assert_eq!(radon_hurwitz(f, d).unwrap(), radon_hurwitz(f, two_part).unwrap());
            }
            prop_assert!(radon_hurwitz(FieldTag::R, d).unwrap() <= radon_hurwitz(FieldTag::C, d).unwrap());
        }

        #[test]
        fn plotkin_cap_at_most_2r(r in 2usize..500) {
            match plotkin_cap(r) {
                Ok(cap) => {
                    prop_assert!(cap <= 2 * r);
                    // r = 2 also meets 2r: all four words of length 2
                    prop_assert_eq!(cap == 2 * r, r % 4 == 0 || r == 2);
                }
                Err(e) => prop_assert_eq!(e, Error::UnsupportedResidue(r)),
            }
        }
    }
}
