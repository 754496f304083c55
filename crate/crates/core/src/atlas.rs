//! Closed-form optimal codes in small dimensions and a dispatcher over every
//! implemented construction.

use std::collections::HashMap;

use num_complex::Complex;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::{radon_hurwitz, simplex_cap};
use crate::designs::{builtin_design, BUILTIN_DESIGNS};
use crate::error::{Error, Result};
use crate::numkernel::{FieldTag, Matrix, StiefelCode};
use crate::optimizer::{optimize, OptimizerConfig};
use crate::orthoplex_codes::{real_hadamard_size, soc_complex_orbit, soc_real_hadamard, soc_sphere_real};
use crate::scalar::Real;
use crate::simplex_codes::{
    ssc_complexify, ssc_from_bibd, ssc_kronecker, ssc_pad_row, ssc_radon_hurwitz, ssc_realify,
    ssc_regular_representation, ssc_sphere, ssc_symplectic_lift,
};
use crate::verifier::{certify_default, Classification, CodeReport};

/// `k(a, b)`: the effective number of evenly spaced points per circle when
/// `a` rotations and `b` reflections are placed in `O(2)`.
pub fn o2_k(a: usize, b: usize) -> usize {
    if a.min(b) == 0 {
        a.max(b)
    } else {
        a.max(b).max(4)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct O2Solution {
    pub n: usize,
    pub k_n: usize,
    pub split: (usize, usize),
    pub min_distance: f64,
}

/// Chord between points `2π/k` apart on a circle of radius `√2` in `R^{2x2}`.
pub fn o2_distance(k: usize) -> f64 {
    (4.0 - 4.0 * (2.0 * std::f64::consts::PI / k as f64).cos()).sqrt()
}

pub fn o2_solution(n: usize) -> Result<O2Solution> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    let (k_n, split) = (0..=n / 2)
        .map(|b| (o2_k(n - b, b), (n - b, b)))
        .min_by_key(|&(k, (a, _))| (k, a))
        .expect("n >= 2");
    Ok(O2Solution {
        n,
        k_n,
        split,
        min_distance: o2_distance(k_n),
    })
}

fn rotation<T: Real>(theta: T) -> Matrix<T> {
    let (s, c) = theta.sin_cos();
    Matrix::from_real(2, 2, vec![c, -s, s, c]).expect("2 x 2")
}

fn reflection<T: Real>(theta: T) -> Matrix<T> {
    let (s, c) = theta.sin_cos();
    Matrix::from_real(2, 2, vec![c, s, s, -c]).expect("2 x 2")
}

fn angle<T: Real>(j: usize, of: usize) -> T {
    T::of(2.0) * T::PI() * T::of_usize(j) / T::of_usize(of)
}

/// Optimal `n`-point code in `O(2) = St_R(2, 2)`: `a` rotations and `b`
/// reflections, each family evenly spaced starting at angle 0.
pub fn o2_code<T: Real>(n: usize) -> Result<StiefelCode<T>> {
    let (a, b) = o2_solution(n)?.split;
    let mats = (0..a)
        .map(|j| rotation(angle::<T>(j, a)))
        .chain((0..b).map(|j| reflection(angle::<T>(j, b))))
        .collect();
    StiefelCode::constructed(FieldTag::R, mats)
}

/// `n` evenly spaced unit vectors in `R^2`.
pub fn circle_code<T: Real>(n: usize) -> Result<StiefelCode<T>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    let mats = (0..n)
        .map(|j| {
            let (s, c) = angle::<T>(j, n).sin_cos();
            Matrix::from_real(2, 1, vec![c, s]).expect("2 x 1")
        })
        .collect();
    StiefelCode::constructed(FieldTag::R, mats)
}

/// `n`-th roots of unity as points of `St_C(1, 1)`.
pub fn unit_circle_code<T: Real>(n: usize) -> Result<StiefelCode<T>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    let mats = (0..n)
        .map(|j| Matrix::from_complex(1, 1, vec![Complex::from_polar(T::one(), angle(j, n))]).expect("1 x 1"))
        .collect();
    StiefelCode::constructed(FieldTag::C, mats)
}

/// `{X_0, -X_0}` with `X_0 = [I_r; 0]`.
pub fn antipodal_pair<T: Real>(field: FieldTag, d: usize, r: usize) -> Result<StiefelCode<T>> {
    check_shape(d, r)?;
    let x = Matrix::eye(d, r);
    StiefelCode::constructed(field, vec![x.neg(), x])
}

fn check_shape(d: usize, r: usize) -> Result<()> {
    if r < 1 || d < r {
        return Err(Error::InvalidParameter(format!("need d >= r >= 1, got d={d}, r={r}")));
    }
    Ok(())
}

/// What a construction promises about its output.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Claim {
    /// Certifies as SSC.
    Simplex,
    /// Certifies as SOC.
    Orthoplex,
    /// Reaches at least `√(2r)` with too few points to be an SOC.
    OrthoplexDistance,
    /// Reaches a known optimal squared distance.
    ClosedForm { distance_sq: f64 },
    /// Numerical result without a certificate.
    Putative,
}

impl Claim {
    pub fn holds<T: Real>(&self, report: &CodeReport<T>) -> bool {
        let class = report.classification;
        match *self {
            Claim::Simplex => class == Classification::SSC,
            Claim::Orthoplex => class == Classification::SOC,
            Claim::OrthoplexDistance => {
                class != Classification::Invalid
                    && report.min_distance_sq >= report.orthoplex_bound * report.orthoplex_bound - report.tol
            }
            Claim::ClosedForm { distance_sq } => {
                class != Classification::Invalid
                    && (report.min_distance_sq.to_f64_lossy() - distance_sq).abs() <= report.tol.to_f64_lossy()
            }
            Claim::Putative => class != Classification::Invalid,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Claim::Simplex => "SSC",
            Claim::Orthoplex => "SOC",
            Claim::OrthoplexDistance => "orthoplex distance",
            Claim::ClosedForm { .. } => "closed-form optimum",
            Claim::Putative => "putative",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Candidate<T> {
    pub code: StiefelCode<T>,
    pub report: CodeReport<T>,
    /// Stable identifier of the construction chain.
    pub provenance: String,
    pub claim: Claim,
}

impl<T: Real> Candidate<T> {
    fn new(code: StiefelCode<T>, provenance: String, claim: Claim) -> Self {
        let report = certify_default(&code);
        Candidate {
            code,
            report,
            provenance,
            claim,
        }
    }
}

type Key = (FieldTag, usize, usize, usize);
type Route<T> = fn(FieldTag, usize, usize, usize) -> Result<StiefelCode<T>>;

/// Depth-first search for an SSC with the given parameters, trying direct
/// constructions before designs and transforms. Memoized on the parameters.
struct SscSearch<T> {
    memo: HashMap<Key, Option<(StiefelCode<T>, String)>>,
}

impl<T: Real> SscSearch<T> {
    fn find(&mut self, key: Key) -> Option<(StiefelCode<T>, String)> {
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        // mark in progress so cyclic routes terminate
        self.memo.insert(key, None);
        let found = self.search(key);
        self.memo.insert(key, found.clone());
        found
    }

    fn search(&mut self, key: Key) -> Option<(StiefelCode<T>, String)> {
        let (field, d, r, n) = key;
        if r < 1 || d < r || n < 2 || n > simplex_cap(field, d, r).ok()? {
            return None;
        }
        let direct: [(&str, Route<T>); 5] = [
            ("ssc_sphere", |f, d, r, n| {
                if r != 1 {
                    return Err(Error::NotFound);
                }
                ssc_sphere(f, d, n)
            }),
            ("antipodal_pair", |f, d, r, n| {
                if n != 2 {
                    return Err(Error::NotFound);
                }
                antipodal_pair(f, d, r)
            }),
            ("ssc_radon_hurwitz", |f, d, r, n| {
                if r != d || n > radon_hurwitz(f, d)? + 1 {
                    return Err(Error::NotFound);
                }
                ssc_radon_hurwitz(f, d, n)
            }),
            ("ssc_regular_representation", |f, d, r, n| {
                if f != FieldTag::R || r != d || n != d + 1 {
                    return Err(Error::NotFound);
                }
                ssc_regular_representation(d)
            }),
            ("ssc_symplectic_lift", |f, d, r, n| {
                if r != 2 {
                    return Err(Error::NotFound);
                }
                ssc_symplectic_lift(f, d, n)
            }),
        ];
        for (name, build) in direct {
            if let Ok(code) = build(field, d, r, n) {
                return Some((code, name.to_string()));
            }
        }

        for name in BUILTIN_DESIGNS {
            let (design, res) = builtin_design(name).ok()?;
            if design.v != n || d % design.b != 0 || r % design.rep != 0 {
                continue;
            }
            let Some((seed, prov)) = self.find((field, d / design.b, r / design.rep, design.k)) else {
                continue;
            };
            if let Ok(code) = ssc_from_bibd(&seed, &design, &res) {
                return Some((code, format!("ssc_from_bibd({name}, {prov})")));
            }
        }

        if d > r {
            if let Some((code, prov)) = self.find((field, d - 1, r, n)) {
                if let Ok(out) = ssc_pad_row(&code) {
                    return Some((out, format!("ssc_pad_row({prov})")));
                }
            }
        }
        for k in 2..=r {
            if d % k != 0 || r % k != 0 {
                continue;
            }
            if let Some((code, prov)) = self.find((field, d / k, r / k, n)) {
                if let Ok(out) = ssc_kronecker(&code, k) {
                    return Some((out, format!("ssc_kronecker({k}, {prov})")));
                }
            }
        }
        match field {
            FieldTag::R if d % 2 == 0 && r % 2 == 0 => {
                if let Some((code, prov)) = self.find((FieldTag::C, d / 2, r / 2, n)) {
                    if let Ok(out) = ssc_realify(&code) {
                        return Some((out, format!("ssc_realify({prov})")));
                    }
                }
            }
            FieldTag::C => {
                if let Some((code, prov)) = self.find((FieldTag::R, d, r, n)) {
                    if let Ok(out) = ssc_complexify(&code) {
                        return Some((out, format!("ssc_complexify({prov})")));
                    }
                }
            }
            _ => {}
        }
        None
    }
}

/// An SSC with the given parameters from some chain of constructions, with
/// its provenance.
pub fn find_ssc<T: Real>(field: FieldTag, d: usize, r: usize, n: usize) -> Option<(StiefelCode<T>, String)> {
    SscSearch { memo: HashMap::new() }.find((field, d, r, n))
}

fn soc_candidates<T: Real>(field: FieldTag, d: usize, r: usize, n: usize) -> Vec<Candidate<T>> {
    let regime = n > field.m() * d * r + 1;
    let claim = if regime {
        Claim::Orthoplex
    } else {
        Claim::OrthoplexDistance
    };
    // any subset of an orthoplex code keeps distance √(2r)
    let mut full: Vec<(Result<StiefelCode<T>>, &str)> = Vec::new();
    match field {
        FieldTag::C => full.push((soc_complex_orbit(d, r, 4 * d * r), "soc_complex_orbit")),
        FieldTag::R => {
            if r == 1 && d >= 2 {
                full.push((soc_sphere_real(d, 2 * d), "soc_sphere_real"));
            }
            if r >= 2 && real_hadamard_size(d, r).is_ok_and(|size| n <= size) {
                full.push((soc_real_hadamard(d, r), "soc_real_hadamard"));
            }
        }
    }
    full.into_iter()
        .filter_map(|(code, name)| {
            let code = code.ok()?;
            let code = if n == code.n() { code } else { code.prefix(n).ok()? };
            Some(Candidate::new(code, name.to_string(), claim))
        })
        .collect()
}

/// Every applicable exact construction, in dispatch priority order.
pub fn exact_candidates<T: Real>(field: FieldTag, d: usize, r: usize, n: usize) -> Result<Vec<Candidate<T>>> {
    check_shape(d, r)?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    let mut out = Vec::new();
    // chord of angle 2π/k on circles of squared radius 2 (O(2)) or 1
    let closed = |k: usize, radius_sq: f64| Claim::ClosedForm {
        distance_sq: 2.0 * radius_sq * (1.0 - (2.0 * std::f64::consts::PI / k as f64).cos()),
    };
    match (field, d, r) {
        (FieldTag::R, 2, 2) => out.push(Candidate::new(o2_code(n)?, "o2_code".into(), closed(o2_solution(n)?.k_n, 2.0))),
        (FieldTag::R, 2, 1) => out.push(Candidate::new(circle_code(n)?, "circle_code".into(), closed(n, 1.0))),
        _ => {}
    }
    if let Some((code, prov)) = find_ssc(field, d, r, n) {
        out.push(Candidate::new(code, prov, Claim::Simplex));
    }
    out.extend(soc_candidates(field, d, r, n));
    if (field, d, r) == (FieldTag::C, 1, 1) {
        out.push(Candidate::new(unit_circle_code(n)?, "unit_circle_code".into(), closed(n, 1.0)));
    }
    Ok(out)
}

/// The applicable exact construction with the largest certified minimum
/// distance; earlier candidates win ties.
pub fn best_exact<T: Real>(field: FieldTag, d: usize, r: usize, n: usize) -> Result<Candidate<T>> {
    let mut best: Option<Candidate<T>> = None;
    for cand in exact_candidates(field, d, r, n)? {
        if cand.report.classification == Classification::Invalid {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => cand.report.min_distance_sq > b.report.min_distance_sq + cand.report.tol,
        };
        if better {
            best = Some(cand);
        }
    }
    best.ok_or_else(|| {
        Error::InfeasibleParameters(format!("no exact construction for St_{field}({d},{r}) with n = {n}"))
    })
}

/// [`best_exact`], falling back to the optimizer when no exact construction applies.
pub fn best_known<T: Real>(
    field: FieldTag,
    d: usize,
    r: usize,
    n: usize,
    config: &OptimizerConfig,
) -> Result<Candidate<T>>
where
    StandardNormal: Distribution<T>,
{
    match best_exact(field, d, r, n) {
        Err(Error::InfeasibleParameters(_)) => {
            let (code, report) = optimize(field, d, r, n, config)?;
            Ok(Candidate {
                code,
                report,
                provenance: format!("optimize(seed={}, restarts={})", config.seed, config.restarts),
                claim: Claim::Putative,
            })
        }
        other => other,
    }
}

/// `k_n` for `n = 2..=max_n`.
pub fn o2_table(max_n: usize) -> Vec<O2Solution> {
    (2..=max_n).map(|n| o2_solution(n).expect("n >= 2")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Largest minimum distance among evenly spaced configurations of every
    /// split, measured directly on the matrices.
    fn brute_o2(n: usize) -> f64 {
        (0..=n)
            .map(|b| {
                let a = n - b;
                let mut mats: Vec<Matrix<f64>> = (0..a).map(|j| rotation(angle(j, a))).collect();
                mats.extend((0..b).map(|j| reflection(angle(j, b))));
                let mut best = f64::INFINITY;
                for i in 0..n {
                    for j in i + 1..n {
                        best = best.min(mats[i].sub(&mats[j]).unwrap().fro_norm_sq());
                    }
                }
                best
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn k_formula() {
        assert_eq!(o2_k(2, 0), 2);
        assert_eq!(o2_k(3, 2), 4);
        assert_eq!(o2_k(5, 0), 5);
        assert_eq!(o2_k(0, 5), 5);
    }

    #[test]
    fn o2_table_matches() {
        let ks: Vec<usize> = o2_table(12).iter().map(|s| s.k_n).collect();
        assert_eq!(ks, [2, 3, 4, 4, 4, 4, 4, 5, 5, 6, 6]);
        for n in 8..=1000 {
            assert_eq!(o2_solution(n).unwrap().k_n, n.div_ceil(2));
        }
        assert_eq!(o2_solution(5).unwrap().split, (3, 2));
        assert_eq!(o2_solution(2).unwrap().split, (2, 0));
        assert_eq!(o2_solution(4).unwrap().split, (2, 2));
        assert_eq!(o2_solution(20).unwrap().k_n, 10);
    }

    #[test]
    fn o2_formula_agrees_with_geometry() {
        for n in 2..=40 {
            let want = o2_distance(o2_solution(n).unwrap().k_n);
            assert!((brute_o2(n).sqrt() - want).abs() < 1e-9, "n = {n}");
            let rep = certify_default(&o2_code::<f64>(n).unwrap());
            assert!((rep.min_distance - want).abs() < 1e-9);
        }
        assert!((o2_solution(3).unwrap().min_distance - 6f64.sqrt()).abs() < 1e-12);
        assert!((o2_solution(12).unwrap().min_distance - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn circles() {
        for (n, want) in [(2, 2.0), (4, 2f64.sqrt()), (6, 1.0)] {
            let rep = certify_default(&circle_code::<f64>(n).unwrap());
            assert!((rep.min_distance - want).abs() < 1e-12);
        }
        let rep = certify_default(&unit_circle_code::<f64>(5).unwrap());
        assert!((rep.min_distance - 2.0 * (std::f64::consts::PI / 5.0).sin()).abs() < 1e-12);
    }

    #[test]
    fn dispatch_examples() {
        let c = best_exact::<f64>(FieldTag::C, 2, 2, 16).unwrap();
        assert_eq!(c.provenance, "soc_complex_orbit");
        assert_eq!(c.report.classification, Classification::SOC);
        assert!((c.report.min_distance - 2.0).abs() < 1e-12);

        let c = best_exact::<f64>(FieldTag::R, 6, 3, 4).unwrap();
        assert_eq!(c.provenance, "ssc_from_bibd(k4-edges, ssc_sphere)");
        assert!((c.report.min_distance_sq - 8.0).abs() < 1e-9);

        let c = best_exact::<f64>(FieldTag::R, 2, 2, 7).unwrap();
        assert_eq!(c.provenance, "o2_code");
        assert!((c.report.min_distance - 2.0).abs() < 1e-12);

        let c = best_exact::<f64>(FieldTag::C, 1, 1, 4).unwrap();
        assert_eq!(c.provenance, "soc_complex_orbit");

        assert!(matches!(
            best_exact::<f64>(FieldTag::R, 3, 3, 20),
            Err(Error::InfeasibleParameters(_))
        ));
    }

    #[test]
    fn transform_chains_are_found() {
        // real (4,2,5): no direct route; realify a complex (2,1,5) simplex
        let (code, prov) = find_ssc::<f64>(FieldTag::R, 4, 2, 5).unwrap();
        assert_eq!(certify_default(&code).classification, Classification::SSC);
        assert!(!prov.is_empty());
        let (code, prov) = find_ssc::<f64>(FieldTag::R, 6, 2, 7).unwrap();
        assert_eq!(certify_default(&code).classification, Classification::SSC, "{prov}");
        assert!(find_ssc::<f64>(FieldTag::R, 3, 3, 11).is_none());
    }

    #[test]
    fn dispatch_is_complete_on_a_grid() {
        for field in [FieldTag::R, FieldTag::C] {
            for d in 1..=4 {
                for r in 1..=d {
                    for n in 2..=(4 * d * r).min(20) {
                        let Ok(cands) = exact_candidates::<f64>(field, d, r, n) else { continue };
                        if cands.is_empty() {
                            continue;
                        }
                        let best = best_exact::<f64>(field, d, r, n).unwrap();
                        for c in &cands {
                            assert!(c.claim.holds(&c.report), "{field} {d} {r} {n}: {} {:?}", c.provenance, c.claim);
                            assert!(best.report.min_distance_sq >= c.report.min_distance_sq - 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn putative_fallback() {
        let cfg = OptimizerConfig {
            restarts: 2,
            max_iters: 100,
            ..OptimizerConfig::default()
        };
        let c = best_known::<f64>(FieldTag::R, 3, 3, 20, &cfg).unwrap();
        assert_eq!(c.claim, Claim::Putative);
        assert!(c.provenance.starts_with("optimize("));
    }
}
