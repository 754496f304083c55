//! Certification of arbitrary codes against the simplex and orthoplex bounds.
//!
//! All equality tests compare squared distances with the exact targets
//! `2rn/(n-1)` and `2r`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{orthoplex_bound_sq, ratio_to, simplex_bound_sq};
use crate::error::{Error, Result};
use crate::numkernel::{is_stiefel, StiefelCode};
use crate::scalar::Real;

/// Default tolerance on squared distances.
pub const DEFAULT_CERTIFY_TOL: f64 = 1e-8;

/// Codes with fewer points are certified serially.
const PARALLEL_MIN_POINTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    /// Equality in the simplex bound.
    SSC,
    /// Equality in the orthoplex bound with `n > mdr + 1`.
    SOC,
    /// Distance `sqrt(2r)` reached while the simplex bound still applies.
    OrthoplexDistanceBelowRegime,
    Suboptimal,
    /// Some point is not on the Stiefel manifold.
    Invalid,
}

impl Classification {
    pub fn is_optimal_certificate(self) -> bool {
        matches!(self, Classification::SSC | Classification::SOC)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeReport<T> {
    pub field: crate::numkernel::FieldTag,
    pub d: usize,
    pub r: usize,
    pub n: usize,
    pub min_distance: T,
    pub min_distance_sq: T,
    pub argmin_pair: (usize, usize),
    pub max_distance_sq: T,
    pub max_real_inner: T,
    pub equiangular: bool,
    pub centered: bool,
    pub sum_norm: T,
    pub simplex_bound: T,
    pub orthoplex_bound: T,
    pub simplex_gap: T,
    pub orthoplex_gap: T,
    pub stiefel_deviation: T,
    pub classification: Classification,
    pub tol: T,
}

/// Pairwise statistics reduced in a schedule-independent way.
#[derive(Clone, Copy, Debug)]
struct PairStats<T> {
    min_sq: T,
    argmin: (usize, usize),
    max_sq: T,
    max_inner: T,
}

impl<T: Real> PairStats<T> {
    fn merge(self, other: Self) -> Self {
        let (min_sq, argmin) = if other.min_sq < self.min_sq
            || (other.min_sq == self.min_sq && other.argmin < self.argmin)
        {
            (other.min_sq, other.argmin)
        } else {
            (self.min_sq, self.argmin)
        };
        PairStats {
            min_sq,
            argmin,
            max_sq: self.max_sq.max(other.max_sq),
            max_inner: self.max_inner.max(other.max_inner),
        }
    }
}

fn row_stats<T: Real>(code: &StiefelCode<T>, i: usize) -> Option<PairStats<T>> {
    let pts = code.points();
    let xi = pts[i].matrix();
    (i + 1..pts.len())
        .map(|j| {
            let xj = pts[j].matrix();
            let sq = xi.sub(xj).expect("shared shape").fro_norm_sq();
            let inner = xi.re_trace_inner(xj).expect("shared shape");
            PairStats {
                min_sq: sq,
                argmin: (i, j),
                max_sq: sq,
                max_inner: inner,
            }
        })
        .reduce(PairStats::merge)
}

fn pair_stats<T: Real>(code: &StiefelCode<T>) -> PairStats<T> {
    let n = code.n();
    let rows = 0..n - 1;
    let stats = if n >= PARALLEL_MIN_POINTS {
        rows.into_par_iter()
            .filter_map(|i| row_stats(code, i))
            .reduce_with(PairStats::merge)
    } else {
        rows.filter_map(|i| row_stats(code, i)).reduce(PairStats::merge)
    };
    stats.expect("n >= 2")
}

/// Minimum pairwise chordal distance and the lexicographically first pair attaining it.
pub fn min_distance<T: Real>(code: &StiefelCode<T>) -> Result<(T, (usize, usize))> {
    if code.n() < 2 {
        return Err(Error::InvalidParameter("minimum distance needs n >= 2".into()));
    }
    let s = pair_stats(code);
    Ok((s.min_sq.sqrt(), s.argmin))
}

/// Full certification report. `tol` applies to squared distances and to the
/// Stiefel membership test.
pub fn certify<T: Real>(code: &StiefelCode<T>, tol: T) -> CodeReport<T> {
    let (field, d, r, n) = (code.field(), code.d(), code.r(), code.n());
    let stats = pair_stats(code);
    let stiefel_deviation = code
        .matrices()
        .map(|m| m.gram_deviation())
        .fold(T::zero(), |a, b| a.max(b));
    let valid = code.matrices().all(|m| is_stiefel(m, field, tol));

    let simplex_sq: T = ratio_to(simplex_bound_sq(r, n).expect("n >= 2"));
    let orthoplex_sq: T = ratio_to(orthoplex_bound_sq(r));
    let min_distance = stats.min_sq.max(T::zero()).sqrt();
    let sum_norm = code.sum().fro_norm();

    let equiangular = stats.max_sq - stats.min_sq <= tol;
    let centered = sum_norm <= tol * T::of_usize(n * r).sqrt();
    let meets_simplex = (stats.min_sq - simplex_sq).abs() <= tol;
    let meets_orthoplex = (stats.min_sq - orthoplex_sq).abs() <= tol;
    let orthoplex_regime = n > field.m() * d * r + 1;

    let classification = if !valid {
        Classification::Invalid
    } else if meets_simplex && equiangular && centered {
        Classification::SSC
    } else if meets_orthoplex && orthoplex_regime {
        Classification::SOC
    } else if meets_orthoplex {
        Classification::OrthoplexDistanceBelowRegime
    } else {
        Classification::Suboptimal
    };

    CodeReport {
        field,
        d,
        r,
        n,
        min_distance,
        min_distance_sq: stats.min_sq,
        argmin_pair: stats.argmin,
        max_distance_sq: stats.max_sq,
        max_real_inner: stats.max_inner,
        equiangular,
        centered,
        sum_norm,
        simplex_bound: simplex_sq.sqrt(),
        orthoplex_bound: orthoplex_sq.sqrt(),
        simplex_gap: simplex_sq.sqrt() - min_distance,
        orthoplex_gap: orthoplex_sq.sqrt() - min_distance,
        stiefel_deviation,
        classification,
        tol,
    }
}

/// [`DEFAULT_CERTIFY_TOL`], widened for single precision.
pub fn default_tol<T: Real>() -> T {
    T::of(DEFAULT_CERTIFY_TOL).max(T::epsilon() * T::of(1e3))
}

/// Certification at [`default_tol`].
pub fn certify_default<T: Real>(code: &StiefelCode<T>) -> CodeReport<T> {
    certify(code, default_tol())
}

impl<T: Real> CodeReport<T> {
    pub fn summary(&self) -> String {
        format!(
            "{:?}: St_{}({},{}) n={} min distance {:.12} (squared {:.12}), simplex bound {:.12}, orthoplex bound {:.12}",
            self.classification,
            self.field,
            self.d,
            self.r,
            self.n,
            self.min_distance,
            self.min_distance_sq,
            self.simplex_bound,
            self.orthoplex_bound
        )
    }
}
