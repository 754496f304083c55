//! Stiefel simplex codes (SSCs): codes meeting `sqrt(2rn/(n-1))`.
//!
//! A code is an SSC exactly when it is equiangular with common
//! `Re Tr(X_i* X_j) = -r/(n-1)` and `Σ X_i = 0`.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::bounds::{radon_hurwitz, simplex_cap};
use crate::designs::{verify_bibd, verify_resolution, Bibd, Resolution};
use crate::error::{Error, Result};
use crate::numkernel::{FieldTag, Matrix, StiefelCode};
use crate::scalar::Real;
use crate::verifier::{certify_default, Classification};

/// `n` unit vectors in `R^dim` with pairwise inner product `-1/(n-1)`, summing to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexVertices<T> {
    pub dim: usize,
    pub n: usize,
    pub vectors: Vec<Vec<T>>,
}

/// Regular simplex centred at the origin.
///
/// Gram-Schmidt on the columns of `I - J/n` gives an orthonormal basis of its
/// `(n-1)`-dimensional column space; the rows in that basis, rescaled to unit
/// length, are the vertices. They are zero-padded into `R^dim`.
pub fn simplex_vertices<T: Real>(dim: usize, n: usize) -> Result<SimplexVertices<T>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("a simplex needs n >= 2, got {n}")));
    }
    if n > dim + 1 {
        return Err(Error::InfeasibleParameters(format!(
            "a regular simplex with {n} vertices does not fit in R^{dim}"
        )));
    }
    let inv_n = T::one() / T::of_usize(n);
    let centring: Vec<Vec<T>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { T::one() - inv_n } else { -inv_n }).collect())
        .collect();
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(n - 1);
    for col in centring.into_iter().take(n - 1) {
        let mut v = col;
        for _pass in 0..2 {
            for q in &basis {
                let dot: T = q.iter().zip(&v).map(|(a, b)| *a * *b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi = *vi - dot * *qi;
                }
            }
        }
        let norm = v.iter().map(|x| *x * *x).sum::<T>().sqrt();
        basis.push(v.into_iter().map(|x| x / norm).collect());
    }
    let vectors = (0..n)
        .map(|i| {
            let row: Vec<T> = basis.iter().map(|q| q[i]).collect();
            let norm = row.iter().map(|x| *x * *x).sum::<T>().sqrt();
            let mut out: Vec<T> = row.into_iter().map(|x| x / norm).collect();
            out.resize(dim, T::zero());
            out
        })
        .collect();
    Ok(SimplexVertices { dim, n, vectors })
}

/// `(d, 1, n)`-SSC from a simplex in `R^{md}`; for `C`, consecutive coordinate
/// pairs become real and imaginary parts.
pub fn ssc_sphere<T: Real>(field: FieldTag, d: usize, n: usize) -> Result<StiefelCode<T>> {
    if d < 1 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let m = field.m();
    if n > m * d + 1 {
        return Err(Error::InfeasibleParameters(format!(
            "a ({d},1,{n})-SSC over {field} needs n <= {}",
            m * d + 1
        )));
    }
    let simplex = simplex_vertices::<T>(m * d, n)?;
    let mats = simplex
        .vectors
        .iter()
        .map(|u| {
            Matrix::from_fn(d, 1, |i, _| match field {
                FieldTag::R => Complex::new(u[i], T::zero()),
                FieldTag::C => Complex::new(u[2 * i], u[2 * i + 1]),
            })
        })
        .collect();
    StiefelCode::constructed(field, mats)
}

fn require_ssc<T: Real>(code: &StiefelCode<T>) -> Result<()> {
    let report = certify_default(code);
    if report.classification != Classification::SSC {
        return Err(Error::NotAnSSC(format!(
            "input certifies as {:?} ({})",
            report.classification,
            report.summary()
        )));
    }
    Ok(())
}

/// `(d+1, r, n)`-SSC by appending a zero row.
pub fn ssc_pad_row<T: Real>(code: &StiefelCode<T>) -> Result<StiefelCode<T>> {
    require_ssc(code)?;
    let mats = code.matrices().map(|x| x.pad_rows(1)).collect();
    StiefelCode::constructed(code.field(), mats)
}

/// `(kd, kr, n)`-SSC with points `I_k ⊗ X_i`.
pub fn ssc_kronecker<T: Real>(code: &StiefelCode<T>, k: usize) -> Result<StiefelCode<T>> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    require_ssc(code)?;
    let id = Matrix::identity(k);
    let mats = code.matrices().map(|x| id.kron(x)).collect();
    StiefelCode::constructed(code.field(), mats)
}

/// Real `(2d, 2r, n)`-SSC replacing each entry `a + bi` by `[[a, -b], [b, a]]`.
pub fn ssc_realify<T: Real>(code: &StiefelCode<T>) -> Result<StiefelCode<T>> {
    if code.field() != FieldTag::C {
        return Err(Error::WrongField("realification needs a complex code".into()));
    }
    require_ssc(code)?;
    let mats = code.matrices().map(realify_matrix).collect();
    StiefelCode::constructed(FieldTag::R, mats)
}

pub(crate) fn realify_matrix<T: Real>(x: &Matrix<T>) -> Matrix<T> {
    Matrix::from_fn(2 * x.rows(), 2 * x.cols(), |i, j| {
        let z = x.get(i / 2, j / 2);
        let v = match (i % 2, j % 2) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        };
        Complex::new(v, T::zero())
    })
}

/// The same real SSC viewed over `C`.
pub fn ssc_complexify<T: Real>(code: &StiefelCode<T>) -> Result<StiefelCode<T>> {
    if code.field() != FieldTag::R {
        return Err(Error::WrongField("complexification needs a real code".into()));
    }
    require_ssc(code)?;
    Ok(code.clone().retag(FieldTag::C))
}

/// Kronecker words in `I`, `X = [[0,1],[1,0]]`, `Z = [[1,0],[0,-1]]`,
/// `J = [[0,-1],[1,0]]` spanning anticommuting antisymmetric orthogonal
/// matrices of size `2^v`, `v = 1, 2, 3`.
const REAL_CLIFFORD_WORDS: [&[&str]; 4] = [
    &[],
    &["J"],
    &["IJ", "JX", "JZ"],
    &["IIJ", "IJX", "XJZ", "ZJZ", "JIZ", "JXX", "JZX"],
];

fn pauli<T: Real>(c: char) -> Matrix<T> {
    let (o, z) = (T::one(), T::zero());
    let re = |v: [T; 4]| Matrix::from_real(2, 2, v.to_vec()).expect("2x2");
    match c {
        'I' => re([o, z, z, o]),
        'X' => re([z, o, o, z]),
        'Z' => re([o, z, z, -o]),
        'J' => re([z, -o, o, z]),
        // σ_y
        'Y' => Matrix::from_complex(
            2,
            2,
            vec![Complex::zero(), Complex::new(z, -o), Complex::new(z, o), Complex::zero()],
        )
        .expect("2x2"),
        _ => unreachable!("unknown Pauli letter {c}"),
    }
}

fn kron_word<T: Real>(word: &str) -> Matrix<T> {
    word.chars()
        .fold(Matrix::identity(1), |acc, c| acc.kron(&pauli(c)))
}

/// Generators `A_0 = I, A_1, ...` whose real span consists of scalar multiples
/// of orthogonal (real) or unitary (complex) `d x d` matrices, with
/// `Re Tr(A_i* A_j) = d δ_ij`; there are `ρ_F(d)` of them.
///
/// Real families exist here for 2-adic valuation at most 3; larger valuations
/// need generators supplied through [`validate_hr_generators`]. Complex
/// families use Jordan-Wigner strings `σ_z^{⊗j} ⊗ σ_{x,y} ⊗ I`, multiplied by `i`.
pub fn hurwitz_radon_family<T: Real>(field: FieldTag, d: usize) -> Result<Vec<Matrix<T>>> {
    let rho = radon_hurwitz(field, d)?;
    let v = d.trailing_zeros() as usize;
    let odd = Matrix::<T>::identity(d >> v);
    let two_part: Vec<Matrix<T>> = match field {
        FieldTag::R => {
            if v > 3 {
                return Err(Error::UnsupportedDimension(format!(
                    "real Hurwitz-Radon family for d = {d} (2-adic valuation {v} > 3) requires a generator file"
                )));
            }
            REAL_CLIFFORD_WORDS[v].iter().map(|w| kron_word(w)).collect()
        }
        FieldTag::C => {
            let i = Complex::new(T::zero(), T::one());
            let mut gens = Vec::with_capacity(2 * v + 1);
            for j in 0..v {
                for c in ['X', 'Y'] {
                    let word: String = std::iter::repeat_n('Z', j)
                        .chain(std::iter::once(c))
                        .chain(std::iter::repeat_n('I', v - j - 1))
                        .collect();
                    gens.push(kron_word::<T>(&word).scale(i));
                }
            }
            let all_z: String = std::iter::repeat_n('Z', v).collect();
            gens.push(kron_word::<T>(&all_z).scale(i));
            gens
        }
    };
    let mut family = vec![Matrix::identity(d)];
    family.extend(two_part.iter().map(|a| a.kron(&odd)));
    debug_assert_eq!(family.len(), rho);
    Ok(family)
}

/// Checks that a user-supplied family spans scalar multiples of unitaries:
/// every `A_i` is unitary, and `A_i* A_j + A_j* A_i = 0` for `i != j`.
pub fn validate_hr_generators<T: Real>(field: FieldTag, d: usize, gens: &[Matrix<T>], tol: T) -> Result<()> {
    if gens.is_empty() {
        return Err(Error::InvalidParameter("empty generator family".into()));
    }
    for (i, a) in gens.iter().enumerate() {
        if a.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!("generator {i} is not {d}x{d}")));
        }
        if field == FieldTag::R && !a.is_real() {
            return Err(Error::WrongField(format!("generator {i} is not real")));
        }
        if a.gram_deviation() > tol {
            return Err(Error::InvalidParameter(format!("generator {i} is not orthogonal/unitary")));
        }
    }
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let s = gens[i]
                .adjoint_mul(&gens[j])?
                .add(&gens[j].adjoint_mul(&gens[i])?)?;
            if s.max_abs() > tol {
                return Err(Error::InvalidParameter(format!(
                    "generators {i} and {j} violate A_i*A_j + A_j*A_i = 0"
                )));
            }
        }
    }
    Ok(())
}

/// `(d, d, n)`-SSC in the real span of a Hurwitz-Radon family: `X_i = Σ_k (u_i)_k A_k`
/// with `u_i` the vertices of a regular simplex in `R^ρ`.
pub fn ssc_radon_hurwitz<T: Real>(field: FieldTag, d: usize, n: usize) -> Result<StiefelCode<T>> {
    let family = hurwitz_radon_family::<T>(field, d)?;
    ssc_from_hr_family(field, d, n, &family)
}

/// As [`ssc_radon_hurwitz`] with an explicit, validated family.
pub fn ssc_from_hr_family<T: Real>(field: FieldTag, d: usize, n: usize, family: &[Matrix<T>]) -> Result<StiefelCode<T>> {
    validate_hr_generators(field, d, family, T::of(1e-9))?;
    let rho = family.len();
    if n > rho + 1 {
        return Err(Error::InfeasibleParameters(format!(
            "a family of {rho} generators supports at most {} points, asked for {n}",
            rho + 1
        )));
    }
    let simplex = simplex_vertices::<T>(rho, n)?;
    let mats = simplex
        .vectors
        .iter()
        .map(|u| {
            family
                .iter()
                .zip(u)
                .fold(Matrix::zeros(d, d), |acc, (a, c)| acc.add(&a.scale_real(*c)).expect("d x d"))
        })
        .collect();
    StiefelCode::constructed(field, mats)
}

/// Real `(d, d, d+1)`-SSC from the regular representation of `Z_{d+1}`.
///
/// The Householder reflection `Q` sending `e_1` to the normalized all-ones
/// vector splits off the trivial representation; `π(g)` is the lower-right
/// `d x d` block of `Q^T ρ(g) Q`.
pub fn ssc_regular_representation<T: Real>(d: usize) -> Result<StiefelCode<T>> {
    if d < 1 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let n = d + 1;
    let u = T::one() / T::of_usize(n).sqrt();
    // w = e_1 - u·1, Q = I - 2 w w^T / (w^T w)
    let w: Vec<T> = (0..n).map(|i| if i == 0 { T::one() - u } else { -u }).collect();
    let ww: T = w.iter().map(|x| *x * *x).sum();
    let two = T::of(2.0);
    let q = Matrix::from_fn(n, n, |i, j| {
        let id = if i == j { T::one() } else { T::zero() };
        Complex::new(id - two * w[i] * w[j] / ww, T::zero())
    });
    let mats = (0..n)
        .map(|g| {
            // ρ(g) e_k = e_{k+g mod n}
            let rho = Matrix::from_fn(n, n, |i, j| {
                if i == (j + g) % n {
                    Complex::one()
                } else {
                    Complex::zero()
                }
            });
            let conj = q.adjoint_mul(&rho.matmul(&q).expect("n x n")).expect("n x n");
            conj.block(1, 1, d, d)
        })
        .collect();
    StiefelCode::constructed(FieldTag::R, mats)
}

/// `(d, 2, n)`-SSC with points `[x_i, conj(A x_i)]`, `A = [[0, -I], [I, 0]]`,
/// from a `(d, 1, n)`-SSC `{x_i}`.
pub fn ssc_symplectic_lift<T: Real>(field: FieldTag, d: usize, n: usize) -> Result<StiefelCode<T>> {
    if !d.is_multiple_of(2) {
        return Err(Error::InfeasibleParameters(format!("symplectic lifting needs even d, got {d}")));
    }
    let sphere = ssc_sphere::<T>(field, d, n)?;
    let h = d / 2;
    let mats = sphere
        .matrices()
        .map(|x| {
            Matrix::from_fn(d, 2, |i, j| {
                if j == 0 {
                    x.get(i, 0)
                } else if i < h {
                    -x.get(i + h, 0).conj()
                } else {
                    x.get(i - h, 0).conj()
                }
            })
        })
        .collect();
    StiefelCode::constructed(field, mats)
}

/// `(b·d, rep·s, v)`-SSC from a `(d, s, k)`-SSC seed and a resolvable design with `λ = 1`.
///
/// Point `p` becomes a block matrix with block rows indexed by the design's
/// blocks and block columns by the parallel classes; block `(B, C)` holds the
/// seed member assigned to `p` within `B` when `p ∈ B ∈ C`. Within each block
/// seed members are assigned in ascending point order.
pub fn ssc_from_bibd<T: Real>(seed: &StiefelCode<T>, design: &Bibd, res: &Resolution) -> Result<StiefelCode<T>> {
    verify_bibd(design).map_err(|e| Error::InvalidDesign(e.to_string()))?;
    verify_resolution(design, res).map_err(|e| Error::InvalidDesign(e.to_string()))?;
    if design.lambda != 1 {
        return Err(Error::ParameterMismatch(format!("design has λ = {}, need 1", design.lambda)));
    }
    if design.k != seed.n() {
        return Err(Error::ParameterMismatch(format!(
            "block size k = {} differs from seed size n = {}",
            design.k,
            seed.n()
        )));
    }
    require_ssc(seed)?;
    let (d, s) = (seed.d(), seed.r());
    let mut class_of = vec![0; design.b];
    for (c, class) in res.classes.iter().enumerate() {
        for &blk in class {
            class_of[blk] = c;
        }
    }
    let seeds: Vec<&Matrix<T>> = seed.matrices().collect();
    let mats = (1..=design.v)
        .map(|p| {
            let mut y = Matrix::zeros(design.b * d, res.classes.len() * s);
            for (bi, blk) in design.blocks.iter().enumerate() {
                if let Some(pos) = blk.iter().position(|&q| q == p) {
                    y.set_block(bi * d, class_of[bi] * s, seeds[pos]);
                }
            }
            y
        })
        .collect();
    StiefelCode::constructed(seed.field(), mats)
}

/// Largest `n` any simplex code in `St_F(d, r)` can have.
pub fn ssc_cap(field: FieldTag, d: usize, r: usize) -> Result<usize> {
    simplex_cap(field, d, r)
}
