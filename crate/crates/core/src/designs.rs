//! Balanced incomplete block designs and their resolutions.
//!
//! Points are `1..=v`; every block is a sorted list of points. A resolution
//! partitions the block indices (0-based) into parallel classes, each of
//! which partitions the point set.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `(v, b, rep, k, λ)` design. `rep` is the replication number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bibd {
    pub v: usize,
    pub b: usize,
    pub rep: usize,
    pub k: usize,
    pub lambda: usize,
    pub blocks: Vec<Vec<usize>>,
}

/// Partition of block indices into parallel classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub classes: Vec<Vec<usize>>,
}

/// First violated condition found by [`verify_bibd`] or [`verify_resolution`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DesignDefect {
    PointOutOfRange { block: usize, point: usize },
    RepeatedPoint { block: usize, point: usize },
    BlockCount { expected: usize, found: usize },
    BlockSize { block: usize, expected: usize, found: usize },
    Replication { point: usize, expected: usize, found: usize },
    PairCount { pair: (usize, usize), expected: usize, found: usize },
    ParameterIdentity(String),
    BlockIndexOutOfRange { class: usize, block: usize },
    BlockNotCovered { block: usize },
    BlockInTwoClasses { block: usize },
    ClassRepeatsPoint { class: usize, point: usize },
    ClassMissesPoint { class: usize, point: usize },
}

impl fmt::Display for DesignDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DesignDefect::*;
        match self {
            PointOutOfRange { block, point } => write!(f, "block {block} contains point {point} outside 1..=v"),
            RepeatedPoint { block, point } => write!(f, "block {block} repeats point {point}"),
            BlockCount { expected, found } => write!(f, "block count: expected b = {expected}, found {found}"),
            BlockSize { block, expected, found } => {
                write!(f, "block size: block {block} has {found} points, expected k = {expected}")
            }
            Replication { point, expected, found } => {
                write!(f, "replication: point {point} lies in {found} blocks, expected {expected}")
            }
            PairCount { pair, expected, found } => write!(
                f,
                "pair count: points {} and {} share {found} blocks, expected λ = {expected}",
                pair.0, pair.1
            ),
            ParameterIdentity(s) => write!(f, "parameter identity fails: {s}"),
            BlockIndexOutOfRange { class, block } => write!(f, "class {class} names block {block}, which does not exist"),
            BlockNotCovered { block } => write!(f, "block {block} belongs to no class"),
            BlockInTwoClasses { block } => write!(f, "block {block} belongs to more than one class"),
            ClassRepeatsPoint { class, point } => write!(f, "class {class} covers point {point} twice"),
            ClassMissesPoint { class, point } => write!(f, "class {class} misses point {point}"),
        }
    }
}

impl Bibd {
    /// Builds a design from its blocks, reading `k`, `rep` and `λ` off the
    /// first block, point 1 and the pair `{1, 2}`. Blocks are sorted;
    /// [`verify_bibd`] checks that the readings hold everywhere.
    pub fn from_blocks(v: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if v < 2 || blocks.is_empty() {
            return Err(Error::InvalidDesign("need v >= 2 and at least one block".into()));
        }
        let blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut blk| {
                blk.sort_unstable();
                blk
            })
            .collect();
        let k = blocks[0].len();
        let rep = blocks.iter().filter(|blk| blk.contains(&1)).count();
        let lambda = blocks.iter().filter(|blk| blk.contains(&1) && blk.contains(&2)).count();
        Ok(Bibd {
            v,
            b: blocks.len(),
            rep,
            k,
            lambda,
            blocks,
        })
    }

    fn incidence(&self) -> Vec<Vec<bool>> {
        self.blocks
            .iter()
            .map(|blk| {
                let mut row = vec![false; self.v + 1];
                for &p in blk {
                    if p <= self.v {
                        row[p] = true;
                    }
                }
                row
            })
            .collect()
    }
}

/// Checks every BIBD count; the error names the first violation.
pub fn verify_bibd(design: &Bibd) -> Result<(), DesignDefect> {
    let v = design.v;
    if design.blocks.len() != design.b {
        return Err(DesignDefect::BlockCount {
            expected: design.b,
            found: design.blocks.len(),
        });
    }
    for (i, blk) in design.blocks.iter().enumerate() {
        if let Some(&p) = blk.iter().find(|&&p| p == 0 || p > v) {
            return Err(DesignDefect::PointOutOfRange { block: i, point: p });
        }
        if let Some(w) = blk.windows(2).find(|w| w[0] == w[1]) {
            return Err(DesignDefect::RepeatedPoint { block: i, point: w[0] });
        }
        if blk.len() != design.k {
            return Err(DesignDefect::BlockSize {
                block: i,
                expected: design.k,
                found: blk.len(),
            });
        }
    }
    let inc = design.incidence();
    for p in 1..=v {
        let found = inc.iter().filter(|row| row[p]).count();
        if found != design.rep {
            return Err(DesignDefect::Replication {
                point: p,
                expected: design.rep,
                found,
            });
        }
    }
    for p in 1..=v {
        for q in p + 1..=v {
            let found = inc.iter().filter(|row| row[p] && row[q]).count();
            if found != design.lambda {
                return Err(DesignDefect::PairCount {
                    pair: (p, q),
                    expected: design.lambda,
                    found,
                });
            }
        }
    }
    if design.b * design.k != v * design.rep {
        return Err(DesignDefect::ParameterIdentity(format!(
            "b·k = {} but v·rep = {}",
            design.b * design.k,
            v * design.rep
        )));
    }
    if design.lambda * (v - 1) != design.rep * (design.k - 1) {
        return Err(DesignDefect::ParameterIdentity(format!(
            "λ(v-1) = {} but rep(k-1) = {}",
            design.lambda * (v - 1),
            design.rep * (design.k - 1)
        )));
    }
    Ok(())
}

/// Checks that the classes partition the blocks and each class partitions the points.
pub fn verify_resolution(design: &Bibd, res: &Resolution) -> Result<(), DesignDefect> {
    let mut owner = vec![None; design.b];
    for (c, class) in res.classes.iter().enumerate() {
        let mut covered = vec![false; design.v + 1];
        for &blk in class {
            if blk >= design.b {
                return Err(DesignDefect::BlockIndexOutOfRange { class: c, block: blk });
            }
            if owner[blk].is_some() {
                return Err(DesignDefect::BlockInTwoClasses { block: blk });
            }
            owner[blk] = Some(c);
            for &p in &design.blocks[blk] {
                if p == 0 || p > design.v {
                    return Err(DesignDefect::PointOutOfRange { block: blk, point: p });
                }
                if covered[p] {
                    return Err(DesignDefect::ClassRepeatsPoint { class: c, point: p });
                }
                covered[p] = true;
            }
        }
        if let Some(p) = (1..=design.v).find(|&p| !covered[p]) {
            return Err(DesignDefect::ClassMissesPoint { class: c, point: p });
        }
    }
    if let Some(blk) = owner.iter().position(Option::is_none) {
        return Err(DesignDefect::BlockNotCovered { block: blk });
    }
    Ok(())
}

/// Default node budget for [`find_resolution`].
pub const RESOLUTION_BUDGET: u64 = 10_000_000;

/// Backtracking search for a resolution of a verified design with `λ = 1`.
///
/// Classes are filled one at a time; each new class starts with the lowest
/// unused block, and each further block covers the lowest uncovered point.
pub fn find_resolution(design: &Bibd, budget: u64) -> Result<Resolution> {
    verify_bibd(design).map_err(|e| Error::InvalidDesign(e.to_string()))?;
    if design.lambda != 1 {
        return Err(Error::ParameterMismatch(format!(
            "resolution search expects λ = 1, got {}",
            design.lambda
        )));
    }
    if design.v > 128 {
        return Err(Error::InvalidParameter(format!(
            "resolution search supports v <= 128, got {}",
            design.v
        )));
    }
    if !design.v.is_multiple_of(design.k) {
        return Err(Error::NotFound);
    }
    let masks: Vec<u128> = design
        .blocks
        .iter()
        .map(|blk| blk.iter().fold(0u128, |m, &p| m | 1 << (p - 1)))
        .collect();
    let full: u128 = if design.v == 128 { u128::MAX } else { (1u128 << design.v) - 1 };
    let mut search = ResolutionSearch {
        masks,
        full,
        used: vec![false; design.b],
        classes: Vec::new(),
        nodes: 0,
        budget,
    };
    if search.start_class()? {
        Ok(Resolution {
            classes: search.classes,
        })
    } else {
        Err(Error::NotFound)
    }
}

struct ResolutionSearch {
    masks: Vec<u128>,
    full: u128,
    used: Vec<bool>,
    classes: Vec<Vec<usize>>,
    nodes: u64,
    budget: u64,
}

impl ResolutionSearch {
    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded(self.budget));
        }
        Ok(())
    }

    fn start_class(&mut self) -> Result<bool> {
        let Some(first) = self.used.iter().position(|u| !u) else {
            return Ok(true);
        };
        self.tick()?;
        self.used[first] = true;
        self.classes.push(vec![first]);
        let mask = self.masks[first];
        if self.fill(mask)? {
            return Ok(true);
        }
        self.classes.pop();
        self.used[first] = false;
        Ok(false)
    }

    fn fill(&mut self, covered: u128) -> Result<bool> {
        if covered == self.full {
            return self.start_class();
        }
        self.tick()?;
        let lowest = (!covered & self.full).trailing_zeros();
        let point_bit = 1u128 << lowest;
        for blk in 0..self.masks.len() {
            let m = self.masks[blk];
            if self.used[blk] || m & point_bit == 0 || m & covered != 0 {
                continue;
            }
            self.used[blk] = true;
            self.classes.last_mut().expect("open class").push(blk);
            if self.fill(covered | m)? {
                return Ok(true);
            }
            self.classes.last_mut().expect("open class").pop();
            self.used[blk] = false;
        }
        Ok(false)
    }
}

/// Names accepted by [`builtin_design`].
pub const BUILTIN_DESIGNS: [&str; 3] = ["k4-edges", "ag-2-2", "ag-2-3"];

/// A shipped resolvable design with its resolution.
pub fn builtin_design(name: &str) -> Result<(Bibd, Resolution)> {
    let (design, res) = match name {
        "k4-edges" => {
            // parallel classes {12|34}, {13|24}, {14|23}
            let blocks = vec![vec![1, 2], vec![3, 4], vec![1, 3], vec![2, 4], vec![1, 4], vec![2, 3]];
            let res = Resolution {
                classes: vec![vec![0, 1], vec![2, 3], vec![4, 5]],
            };
            (Bibd::from_blocks(4, blocks)?, res)
        }
        "ag-2-2" => affine_plane(2)?,
        "ag-2-3" => affine_plane(3)?,
        other => return Err(Error::UnknownDesign(other.to_string())),
    };
    verify_bibd(&design).map_err(|e| Error::InvalidDesign(e.to_string()))?;
    verify_resolution(&design, &res).map_err(|e| Error::InvalidDesign(e.to_string()))?;
    Ok((design, res))
}

/// Lines of the affine plane over `GF(p)`, `p` prime, grouped by direction.
/// The point `(x, y)` is labelled `1 + x + p·y`.
fn affine_plane(p: usize) -> Result<(Bibd, Resolution)> {
    let label = |x: usize, y: usize| 1 + x + p * y;
    let mut blocks = Vec::new();
    let mut classes = Vec::new();
    for slope in 0..p {
        let mut class = Vec::new();
        for c in 0..p {
            class.push(blocks.len());
            blocks.push((0..p).map(|x| label(x, (slope * x + c) % p)).collect());
        }
        classes.push(class);
    }
    let mut vertical = Vec::new();
    for c in 0..p {
        vertical.push(blocks.len());
        blocks.push((0..p).map(|y| label(c, y)).collect());
    }
    classes.push(vertical);
    Ok((Bibd::from_blocks(p * p, blocks)?, Resolution { classes }))
}

/// On-disk design: `{ "v": int, "blocks": [[int,...],...], "resolution": [[blockIndex,...],...] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub v: usize,
    pub blocks: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<Vec<Vec<usize>>>,
}

impl DesignFile {
    pub fn from_design(design: &Bibd, res: Option<&Resolution>) -> Self {
        DesignFile {
            v: design.v,
            blocks: design.blocks.clone(),
            resolution: res.map(|r| r.classes.clone()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(format!("design file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("design serializes")
    }

    /// Builds and verifies the design; a missing resolution is searched for.
    pub fn into_design(self) -> Result<(Bibd, Resolution)> {
        let design = Bibd::from_blocks(self.v, self.blocks)?;
        verify_bibd(&design).map_err(|e| Error::InvalidDesign(e.to_string()))?;
        let res = match self.resolution {
            Some(classes) => Resolution { classes },
            None => find_resolution(&design, RESOLUTION_BUDGET)?,
        };
        verify_resolution(&design, &res).map_err(|e| Error::InvalidDesign(e.to_string()))?;
        Ok((design, res))
    }
}

/// Loads `builtin:<name>` or a JSON design file path.
pub fn load_design(source: &str) -> Result<(Bibd, Resolution)> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return builtin_design(name);
    }
    let text = std::fs::read_to_string(source).map_err(|e| Error::Malformed(format!("{source}: {e}")))?;
    DesignFile::parse(&text)?.into_design()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fano() -> Bibd {
        let blocks = vec![
            vec![1, 2, 3],
            vec![1, 4, 5],
            vec![1, 6, 7],
            vec![2, 4, 6],
            vec![2, 5, 7],
            vec![3, 4, 7],
            vec![3, 5, 6],
        ];
        Bibd::from_blocks(7, blocks).unwrap()
    }

    #[test]
    fn k4_design_verifies() {
        let (d, res) = builtin_design("k4-edges").unwrap();
        assert_eq!((d.v, d.b, d.rep, d.k, d.lambda), (4, 6, 3, 2, 1));
        assert_eq!(verify_bibd(&d), Ok(()));
        assert_eq!(verify_resolution(&d, &res), Ok(()));
    }

    #[test]
    fn duplicated_block_fails_pair_count() {
        let (mut d, _) = builtin_design("k4-edges").unwrap();
        d.blocks.push(d.blocks[0].clone());
        d.b += 1;
        assert!(matches!(
            verify_bibd(&d),
            Err(DesignDefect::Replication { .. }) | Err(DesignDefect::PairCount { .. })
        ));
        let mut d2 = Bibd::from_blocks(4, d.blocks.clone()).unwrap();
        d2.rep = 3;
        let err = verify_bibd(&d2).unwrap_err();
        assert!(err.to_string().contains("1 lies in 4"), "{err}");
    }

    #[test]
    fn bad_resolution_is_reported() {
        let (d, _) = builtin_design("k4-edges").unwrap();
        // {12 | 13} repeats point 1
        let res = Resolution {
            classes: vec![vec![0, 2], vec![1, 3], vec![4, 5]],
        };
        assert_eq!(
            verify_resolution(&d, &res),
            Err(DesignDefect::ClassRepeatsPoint { class: 0, point: 1 })
        );
        let short = Resolution {
            classes: vec![vec![0, 1], vec![2, 3]],
        };
        assert_eq!(verify_resolution(&d, &short), Err(DesignDefect::BlockNotCovered { block: 4 }));
    }

    #[test]
    fn affine_planes() {
        let (d2, r2) = builtin_design("ag-2-2").unwrap();
        assert_eq!((d2.v, d2.b, d2.rep, d2.k, d2.lambda), (4, 6, 3, 2, 1));
        assert_eq!(r2.classes.len(), 3);
        let (d3, r3) = builtin_design("ag-2-3").unwrap();
        assert_eq!((d3.v, d3.b, d3.rep, d3.k, d3.lambda), (9, 12, 4, 3, 1));
        assert_eq!(r3.classes.len(), 4);
        assert!(matches!(builtin_design("fano"), Err(Error::UnknownDesign(_))));
    }

    #[test]
    fn resolution_search() {
        for name in BUILTIN_DESIGNS {
            let (d, _) = builtin_design(name).unwrap();
            let res = find_resolution(&d, RESOLUTION_BUDGET).unwrap();
            assert_eq!(res.classes.len(), d.rep);
            assert_eq!(verify_resolution(&d, &res), Ok(()));
        }
        let f = fano();
        assert_eq!(verify_bibd(&f), Ok(()));
        assert_eq!(find_resolution(&f, RESOLUTION_BUDGET), Err(Error::NotFound));
        let (ag3, _) = builtin_design("ag-2-3").unwrap();
        assert_eq!(find_resolution(&ag3, 2), Err(Error::BudgetExceeded(2)));
    }

    #[test]
    fn rep_identity_holds() {
        for name in BUILTIN_DESIGNS {
            let (d, _) = builtin_design(name).unwrap();
            assert_eq!(d.rep * (d.k - 1), (d.v - 1) * d.lambda);
        }
    }

    #[test]
    fn design_file_round_trip() {
        let (d, res) = builtin_design("ag-2-3").unwrap();
        let text = DesignFile::from_design(&d, Some(&res)).to_json();
        let (d2, res2) = DesignFile::parse(&text).unwrap().into_design().unwrap();
        assert_eq!((d, res), (d2, res2));
        let bare = DesignFile::from_design(&fano(), None).to_json();
        assert_eq!(DesignFile::parse(&bare).unwrap().into_design(), Err(Error::NotFound));
        assert!(DesignFile::parse("{\"v\": 3}").is_err());
    }
}
