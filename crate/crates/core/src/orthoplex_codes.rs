//! Stiefel orthoplex codes (SOCs): more than `mdr + 1` points at minimum
//! distance `sqrt(2r)`, i.e. all pairwise `Re Tr(X_i* X_j) <= 0`.

use num_complex::Complex;
use num_traits::Zero;

use crate::binary_codes::{plotkin_optimal_code, BinaryCode};
use crate::error::{Error, Result};
use crate::numkernel::{FieldTag, Matrix, StiefelCode};
use crate::scalar::Real;

/// Complex `(d, r, n)`-SOC: the first `n` points of the orbit of `[I_r; 0]`
/// under `(a, b, c) · X = i^a T^b X M^{-c}`, enumerated with `a` outermost.
///
/// `T` is the cyclic row shift and `M = diag(e^{2πik/r})`.
pub fn soc_complex_orbit<T: Real>(d: usize, r: usize, n: usize) -> Result<StiefelCode<T>> {
    if r < 1 || d < r {
        return Err(Error::InvalidParameter(format!("need d >= r >= 1, got d={d}, r={r}")));
    }
    if n <= 2 * d * r + 1 || n > 4 * d * r {
        return Err(Error::InfeasibleParameters(format!(
            "complex ({d},{r},n)-SOCs exist exactly for n in ({}, {}], got {n}",
            2 * d * r + 1,
            4 * d * r
        )));
    }
    let mut mats = Vec::with_capacity(n);
    'orbit: for a in 0..4 {
        let phase = Complex::new(T::zero(), T::one()).powu(a as u32);
        for b in 0..d {
            for c in 0..r {
                if mats.len() == n {
                    break 'orbit;
                }
                mats.push(orbit_point(d, r, phase, b, c));
            }
        }
    }
    StiefelCode::constructed(FieldTag::C, mats)
}

fn orbit_point<T: Real>(d: usize, r: usize, phase: Complex<T>, shift: usize, c: usize) -> Matrix<T> {
    let mut x = Matrix::zeros(d, r);
    for k in 0..r {
        // column k of X_0 M^{-c} is e^{-2πikc/r} e_k; T^b moves e_k to e_{k+b mod d}
        let angle = -T::of(2.0) * T::PI() * T::of_usize(k * c % r) / T::of_usize(r);
        x.set((k + shift) % d, k, phase * Complex::from_polar(T::one(), angle));
    }
    x
}

/// Real `(d, 1, n)`-SOC: `e_1, -e_1, e_2, -e_2, ...` truncated to `n` points.
pub fn soc_sphere_real<T: Real>(d: usize, n: usize) -> Result<StiefelCode<T>> {
    if n <= d + 1 || n > 2 * d {
        return Err(Error::InfeasibleParameters(format!(
            "real ({d},1,n)-SOCs exist exactly for n in ({}, {}], got {n}",
            d + 1,
            2 * d
        )));
    }
    let mats = (0..n)
        .map(|i| {
            let sign = if i % 2 == 0 { T::one() } else { -T::one() };
            Matrix::from_fn(d, 1, |row, _| {
                if row == i / 2 {
                    Complex::new(sign, T::zero())
                } else {
                    Complex::zero()
                }
            })
        })
        .collect();
    StiefelCode::constructed(FieldTag::R, mats)
}

/// Exact integer matrices `T^a D_c`, `a` outer and `c` inner, where
/// `D_c(i, i) = (-1)^{c_i}`.
pub fn hadamard_soc_matrices(d: usize, code: &BinaryCode) -> Vec<Matrix<i64>> {
    let r = code.length();
    let mut out = Vec::with_capacity(d * code.len());
    for a in 0..d {
        for word in code.words() {
            let mut x = Matrix::zeros(d, r);
            for (i, &bit) in word.iter().enumerate() {
                let s = if bit == 0 { 1 } else { -1 };
                x.set((i + a) % d, i, Complex::new(s, 0));
            }
            out.push(x);
        }
    }
    out
}

/// Real `(d, r, d·|C|)`-SOC from a binary code `C` of length `r` meeting the
/// Plotkin cap. Requires `d >= r >= 2` and `r ≢ 1 (mod 4)`.
pub fn soc_real_hadamard<T: Real>(d: usize, r: usize) -> Result<StiefelCode<T>> {
    if r < 2 || d < r {
        return Err(Error::InvalidParameter(format!("need d >= r >= 2, got d={d}, r={r}")));
    }
    let code = plotkin_optimal_code(r)?;
    let mats = hadamard_soc_matrices(d, &code).iter().map(|m| m.cast()).collect();
    StiefelCode::constructed(FieldTag::R, mats)
}

/// Number of points produced by [`soc_real_hadamard`]: `2dr`, `d(r+2)` or `d(r+1)`
/// for `r ≡ 0, 2, 3 (mod 4)`.
pub fn real_hadamard_size(d: usize, r: usize) -> Result<usize> {
    Ok(d * crate::bounds::plotkin_cap(r)?)
}
