//! Ext-quivers of polystable decompositions.
//!
//! A decomposition `v = sum n_i v_i` into pairwise distinct stable classes gives a
//! quiver with one vertex per summand, `(v_i^2 + 2)/2` loops at vertex `i` and
//! `<v_i, v_j>` arrows between `i` and `j`. Its double quiver has
//! `dim Ext^1(F_i, F_j)` arrows from `i` to `j`. The quadratic form `d(n) = n^T D n`
//! against `D = -(Cartan matrix)` recovers `v^2` and the quiver variety has
//! dimension `d(n) + 2 = 2 p(n)`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GramLattice, LatticeVector};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summand {
    pub class: LatticeVector,
    pub multiplicity: u32,
}

/// The data `F = ⊕ F_i ⊗ V_i` at lattice level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolystableDecomposition {
    #[serde(skip)]
    lattice: GramLattice,
    summands: Vec<Summand>,
}

impl PolystableDecomposition {
    /// Validates every summand: rank, positive multiplicity, distinctness,
    /// `v_i^2 >= -2` and even, and `<v_i, v_j> >= 0` for `i != j`.
    pub fn new(lattice: GramLattice, summands: Vec<Summand>) -> Result<Self> {
        for (index, s) in summands.iter().enumerate() {
            lattice.check(&s.class)?;
            if s.multiplicity == 0 {
                return Err(Error::MalformedSummand {
                    index,
                    reason: "multiplicity must be positive".into(),
                });
            }
            if s.class.is_zero() {
                return Err(Error::MalformedSummand {
                    index,
                    reason: "zero class".into(),
                });
            }
            let sq = lattice.square(&s.class)?;
            if sq < -2 || sq % 2 != 0 {
                return Err(Error::MalformedSummand {
                    index,
                    reason: format!("square {sq} is odd or below -2"),
                });
            }
            if summands[..index].iter().any(|t| t.class == s.class) {
                return Err(Error::MalformedSummand {
                    index,
                    reason: "class repeats an earlier summand".into(),
                });
            }
        }
        for i in 0..summands.len() {
            for j in i + 1..summands.len() {
                let pairing = lattice.pair(&summands[i].class, &summands[j].class)?;
                if pairing < 0 {
                    return Err(Error::HomNonvanishing { i, j, pairing });
                }
            }
        }
        Ok(PolystableDecomposition { lattice, summands })
    }

    pub fn lattice(&self) -> &GramLattice {
        &self.lattice
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn classes(&self) -> impl Iterator<Item = &LatticeVector> {
        self.summands.iter().map(|s| &s.class)
    }

    pub fn multiplicities(&self) -> DimensionVector {
        DimensionVector(self.summands.iter().map(|s| s.multiplicity).collect())
    }

    /// `v = sum n_i v_i`.
    pub fn total_class(&self) -> LatticeVector {
        self.combination(&self.multiplicities())
    }

    /// `w_alpha = sum alpha_i v_i`.
    pub fn combination(&self, alpha: &DimensionVector) -> LatticeVector {
        let mut total = LatticeVector::zero(self.lattice.rank());
        for (s, &a) in self.summands.iter().zip(alpha.entries()) {
            total = &total + &s.class.scaled(a as i64);
        }
        total
    }

    /// Sub-decomposition on the given summand indices (in the given order).
    pub fn restrict(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            self.lattice.clone(),
            indices.iter().map(|&i| self.summands[i].clone()).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DimensionVector(Vec<u32>);

impl DimensionVector {
    pub fn new(entries: Vec<u32>) -> Self {
        DimensionVector(entries)
    }

    pub fn zero(len: usize) -> Self {
        DimensionVector(vec![0; len])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }

    pub fn dominated_by(&self, other: &DimensionVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &DimensionVector) -> Option<DimensionVector> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(DimensionVector)
    }

    pub fn add(&self, other: &DimensionVector) -> DimensionVector {
        DimensionVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All vectors `0 <= m <= self` in lexicographic order, including zero.
    pub fn box_below(&self) -> impl Iterator<Item = DimensionVector> + '_ {
        let count: u64 = self.0.iter().map(|&n| n as u64 + 1).product();
        (0..count).map(move |mut idx| {
            let mut m = vec![0u32; self.0.len()];
            for (slot, &n) in m.iter_mut().zip(&self.0).rev() {
                let side = n as u64 + 1;
                *slot = (idx % side) as u32;
                idx /= side;
            }
            DimensionVector(m)
        })
    }

    pub fn box_size(&self) -> u64 {
        self.0
            .iter()
            .map(|&n| n as u64 + 1)
            .fold(1u64, |acc, k| acc.saturating_mul(k))
    }
}

impl From<Vec<u32>> for DimensionVector {
    fn from(v: Vec<u32>) -> Self {
        DimensionVector(v)
    }
}

/// Arrow of the quiver `Q`; loops have `source == target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub source: usize,
    pub target: usize,
}

#[derive(Deserialize)]
struct RawQuiver {
    s: usize,
    loops: Vec<u32>,
    #[serde(default)]
    arrows: Vec<(usize, usize, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(try_from = "RawQuiver")]
pub struct ExtQuiver {
    loops: Vec<u32>,
    /// Symmetric, zero diagonal.
    arrows: Vec<Vec<u32>>,
}

impl TryFrom<RawQuiver> for ExtQuiver {
    type Error = Error;
    fn try_from(raw: RawQuiver) -> Result<Self> {
        if raw.loops.len() != raw.s {
            return Err(Error::DimensionMismatch {
                expected: raw.s,
                found: raw.loops.len(),
            });
        }
        ExtQuiver::new(raw.loops, &raw.arrows)
    }
}

impl Serialize for ExtQuiver {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExtQuiver", 4)?;
        st.serialize_field("s", &self.vertex_count())?;
        st.serialize_field("loops", &self.loops)?;
        st.serialize_field("arrows", &self.arrow_triples())?;
        st.serialize_field("cartan_neg", &self.cartan_neg())?;
        st.end()
    }
}

impl ExtQuiver {
    /// `arrows` lists `(i, j, multiplicity)` with `i != j`; repeated pairs accumulate.
    pub fn new(loops: Vec<u32>, arrows: &[(usize, usize, u32)]) -> Result<Self> {
        let s = loops.len();
        let mut table = vec![vec![0u32; s]; s];
        for &(i, j, m) in arrows {
            if i >= s || j >= s {
                return Err(Error::ShapeMismatch(format!(
                    "arrow ({i}, {j}) on a quiver with {s} vertices"
                )));
            }
            if i == j {
                return Err(Error::ShapeMismatch(format!(
                    "arrow ({i}, {i}) is a loop; loops are given per vertex"
                )));
            }
            table[i][j] += m;
            table[j][i] += m;
        }
        Ok(ExtQuiver {
            loops,
            arrows: table,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.loops.len()
    }

    pub fn loops(&self) -> &[u32] {
        &self.loops
    }

    pub fn arrow_count(&self, i: usize, j: usize) -> u32 {
        self.arrows[i][j]
    }

    pub fn arrow_triples(&self) -> Vec<(usize, usize, u32)> {
        let s = self.vertex_count();
        (0..s)
            .flat_map(|i| (i + 1..s).map(move |j| (i, j)))
            .filter(|&(i, j)| self.arrows[i][j] > 0)
            .map(|(i, j)| (i, j, self.arrows[i][j]))
            .collect()
    }

    /// Arrows of `Q` in canonical order: loops vertex by vertex, then `i -> j` for `i < j`.
    pub fn arrows(&self) -> Vec<Arrow> {
        let s = self.vertex_count();
        let mut out = Vec::new();
        for (i, &g) in self.loops.iter().enumerate() {
            out.extend((0..g).map(|_| Arrow { source: i, target: i }));
        }
        for i in 0..s {
            for j in i + 1..s {
                out.extend((0..self.arrows[i][j]).map(|_| Arrow { source: i, target: j }));
            }
        }
        out
    }

    /// `D` with `D_ii = 2 g_i - 2` and `D_ij = a_ij`.
    pub fn cartan_neg(&self) -> Vec<Vec<i64>> {
        let s = self.vertex_count();
        (0..s)
            .map(|i| {
                (0..s)
                    .map(|j| {
                        if i == j {
                            2 * self.loops[i] as i64 - 2
                        } else {
                            self.arrows[i][j] as i64
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn check_len(&self, n: &DimensionVector) -> Result<()> {
        if n.len() != self.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: self.vertex_count(),
                found: n.len(),
            });
        }
        Ok(())
    }

    /// `d(n) = n^T D n`.
    pub fn d_of(&self, n: &DimensionVector) -> Result<i64> {
        self.check_len(n)?;
        let d = self.cartan_neg();
        let e = n.entries();
        let mut total = 0i64;
        for i in 0..e.len() {
            for j in 0..e.len() {
                total += e[i] as i64 * d[i][j] * e[j] as i64;
            }
        }
        Ok(total)
    }

    pub fn expected_dim(&self, n: &DimensionVector) -> Result<i64> {
        Ok(self.d_of(n)? + 2)
    }

    pub fn p_of(&self, n: &DimensionVector) -> Result<i64> {
        Ok(self.expected_dim(n)? / 2)
    }

    pub fn dimension_info(&self, n: &DimensionVector) -> Result<DimensionInfo> {
        let d = self.d_of(n)?;
        Ok(DimensionInfo {
            d,
            expected_dim: d + 2,
            p: (d + 2) / 2,
            degenerate: n.is_zero(),
        })
    }

    /// Whether the vertices with `alpha_i != 0` span a connected subgraph.
    pub fn support_connected(&self, alpha: &DimensionVector) -> bool {
        let support: Vec<usize> = (0..alpha.len()).filter(|&i| alpha.entries()[i] != 0).collect();
        let Some(&start) = support.first() else {
            return false;
        };
        let mut seen = vec![false; self.vertex_count()];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for &j in &support {
                if !seen[j] && self.arrows[i][j] > 0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        support.iter().all(|&i| seen[i])
    }

    /// `0 <= alpha <= n`, connected support and `d(alpha) + 2 >= 0`.
    pub fn is_positive_root(&self, alpha: &DimensionVector, n: &DimensionVector) -> Result<bool> {
        self.check_len(alpha)?;
        self.check_len(n)?;
        if alpha.is_zero() {
            return Err(Error::ZeroDimensionVector);
        }
        Ok(alpha.dominated_by(n) && self.support_connected(alpha) && self.d_of(alpha)? + 2 >= 0)
    }

    /// Membership in Kac's root system of the quiver, positive part.
    ///
    /// Reflects at loop-free vertices while that lowers the height; a positive
    /// root either reaches a simple real root or lands in the fundamental set
    /// (connected support, `(alpha, e_i) <= 0` for all `i`).
    pub fn is_kac_root(&self, alpha: &DimensionVector) -> bool {
        let d = self.cartan_neg();
        let s = self.vertex_count();
        let mut a: Vec<i64> = alpha.entries().iter().map(|&x| x as i64).collect();
        loop {
            if a.iter().any(|&x| x < 0) || a.iter().all(|&x| x == 0) {
                return false;
            }
            let nonzero: Vec<usize> = (0..s).filter(|&i| a[i] != 0).collect();
            if nonzero.len() == 1 && a[nonzero[0]] == 1 && self.loops[nonzero[0]] == 0 {
                return true;
            }
            let as_dim = DimensionVector(a.iter().map(|&x| x as u32).collect());
            if !self.support_connected(&as_dim) {
                return false;
            }
            // (alpha, e_i) for the symmetric form with matrix -D
            let form = |i: usize, a: &[i64]| -> i64 { -(0..s).map(|j| a[j] * d[j][i]).sum::<i64>() };
            match (0..s).find(|&i| self.loops[i] == 0 && form(i, &a) > 0) {
                Some(i) => a[i] -= form(i, &a),
                None => return true,
            }
        }
    }

    /// All positive roots `alpha <= n`, lexicographically sorted.
    pub fn enumerate_positive_roots(
        &self,
        n: &DimensionVector,
        budget: usize,
    ) -> Result<Vec<DimensionVector>> {
        self.check_len(n)?;
        if n.box_size() > budget as u64 {
            return Err(Error::BudgetExceeded {
                what: "root enumeration box",
                budget,
            });
        }
        let mut roots = Vec::new();
        for alpha in n.box_below().filter(|a| !a.is_zero()) {
            if self.is_positive_root(&alpha, n)? {
                roots.push(alpha);
            }
        }
        Ok(roots)
    }

    /// Positive roots together with every box vector on which the working root
    /// filter and Kac's root test disagree.
    pub fn root_report(&self, n: &DimensionVector, budget: usize) -> Result<RootReport> {
        let roots = self.enumerate_positive_roots(n, budget)?;
        let mut disagreements = Vec::new();
        for alpha in n.box_below().filter(|a| !a.is_zero()) {
            let working = roots.binary_search(&alpha).is_ok();
            let kac = self.is_kac_root(&alpha);
            if working != kac {
                disagreements.push(RootDisagreement {
                    alpha,
                    working_filter: working,
                    kac,
                });
            }
        }
        Ok(RootReport {
            roots,
            disagreements,
        })
    }

    /// Existence of a simple representation in `mu^{-1}(0)` of dimension `n`:
    /// `n` must be a positive root with `p(n) > sum p(beta_t)` for every
    /// decomposition `n = beta_1 + ... + beta_k`, `k >= 2`, into positive roots.
    pub fn simple_rep_exists(&self, n: &DimensionVector, budget: usize) -> Result<SimpleRep> {
        self.check_len(n)?;
        if n.is_zero() {
            return Err(Error::ZeroDimensionVector);
        }
        let roots = self.enumerate_positive_roots(n, budget)?;
        if roots.binary_search(n).is_err() {
            return Ok(SimpleRep::No(NoSimpleRep::NotARoot));
        }
        let p: HashMap<DimensionVector, i64> = roots
            .iter()
            .map(|r| Ok((r.clone(), self.p_of(r)?)))
            .collect::<Result<_>>()?;
        let mut memo = HashMap::new();
        let p_n = p[n];
        // best split with at least two parts: first part is a proper root, the rest any decomposition
        let mut best: Option<(i64, Vec<DimensionVector>)> = None;
        for beta in roots.iter().filter(|r| *r != n) {
            let rest = n.checked_sub(beta).expect("roots are bounded by n");
            if let Some((value, mut parts)) = best_decomposition(&rest, &roots, &p, &mut memo) {
                let total = p[beta] + value;
                if best.as_ref().is_none_or(|(b, _)| total > *b) {
                    parts.push(beta.clone());
                    parts.sort_by(|a, b| b.cmp(a));
                    best = Some((total, parts));
                }
            }
        }
        match best {
            Some((total, parts)) if total >= p_n => Ok(SimpleRep::No(NoSimpleRep::Decomposition {
                parts,
                p_sum: total,
                p_n,
            })),
            _ => Ok(SimpleRep::Yes),
        }
    }
}

/// Maximal `sum p(beta_t)` over decompositions of `m` into positive roots (one part allowed).
fn best_decomposition(
    m: &DimensionVector,
    roots: &[DimensionVector],
    p: &HashMap<DimensionVector, i64>,
    memo: &mut HashMap<DimensionVector, Option<(i64, Vec<DimensionVector>)>>,
) -> Option<(i64, Vec<DimensionVector>)> {
    if let Some(hit) = memo.get(m) {
        return hit.clone();
    }
    let mut best: Option<(i64, Vec<DimensionVector>)> = None;
    if let Some(&pm) = p.get(m) {
        best = Some((pm, vec![m.clone()]));
    }
    // parts in non-increasing order: the largest part comes off first
    for beta in roots.iter().rev().filter(|r| r.dominated_by(m) && *r != m) {
        let rest = m.checked_sub(beta).expect("beta <= m");
        if let Some((value, mut parts)) = best_decomposition(&rest, roots, p, memo) {
            let total = p[beta] + value;
            if best.as_ref().is_none_or(|(b, _)| total > *b) {
                parts.push(beta.clone());
                best = Some((total, parts));
            }
        }
    }
    memo.insert(m.clone(), best.clone());
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DimensionInfo {
    pub d: i64,
    pub expected_dim: i64,
    pub p: i64,
    /// Set for `n = 0`, where the values are only formal.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootDisagreement {
    pub alpha: DimensionVector,
    pub working_filter: bool,
    pub kac: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootReport {
    pub roots: Vec<DimensionVector>,
    pub disagreements: Vec<RootDisagreement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoSimpleRep {
    NotARoot,
    Decomposition {
        parts: Vec<DimensionVector>,
        p_sum: i64,
        p_n: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SimpleRep {
    Yes,
    No(NoSimpleRep),
}

impl SimpleRep {
    pub fn exists(&self) -> bool {
        matches!(self, SimpleRep::Yes)
    }
}

pub fn build_ext_quiver(decomp: &PolystableDecomposition) -> ExtQuiver {
    let lattice = decomp.lattice();
    let classes: Vec<&LatticeVector> = decomp.classes().collect();
    let loops = classes
        .iter()
        .map(|v| {
            let sq = lattice.square(v).expect("validated decomposition");
            ((sq + 2) / 2) as u32
        })
        .collect();
    let mut arrows = Vec::new();
    for i in 0..classes.len() {
        for j in i + 1..classes.len() {
            let a = lattice.pair(classes[i], classes[j]).expect("validated decomposition");
            if a > 0 {
                arrows.push((i, j, a as u32));
            }
        }
    }
    ExtQuiver::new(loops, &arrows).expect("indices are in range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MergeCheck {
    /// `(v_i + v_j)^2 + 2`
    pub merged: i64,
    /// `(v_i^2 + 2) + (v_j^2 + 2)`
    pub separate: i64,
    pub pairing: i64,
    pub merges: bool,
}

/// Superadditivity `(v_i + v_j)^2 + 2 > (v_i^2 + 2) + (v_j^2 + 2)`.
pub fn pairwise_merge_check(
    lattice: &GramLattice,
    vi: &LatticeVector,
    vj: &LatticeVector,
) -> Result<MergeCheck> {
    let merged = lattice.square(&(vi + vj))? + 2;
    let separate = lattice.square(vi)? + 2 + lattice.square(vj)? + 2;
    Ok(MergeCheck {
        merged,
        separate,
        pairing: lattice.pair(vi, vj)?,
        merges: merged > separate,
    })
}
