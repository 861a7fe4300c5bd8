//! Representations of the double quiver over the rationals.
//!
//! A representation of `Q̄` with dimension vector `n` is a pair `(x, y)`: for
//! every arrow `e: s -> t` of `Q` a map `x_e: V_s -> V_t` and an opposite map
//! `y_e: V_t -> V_s`. The moment map block at vertex `i` is
//! `Σ_{t(e)=i} x_e y_e - Σ_{s(e)=i} y_e x_e`.
//!
//! θ-semistability quantifies over all subrepresentations, so it is only
//! semi-decided here: [`destabilizer_search`] returns re-verified witnesses or
//! an honest [`DestabilizerOutcome::NoneFound`] describing what was searched.

use std::collections::{HashSet, VecDeque};
use std::ops::ControlFlow;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::character::Character;
use crate::error::{Error, Result};
use crate::ext_quiver::{Arrow, DimensionVector, ExtQuiver};
use crate::matrix::{Matrix, Subspace};
use crate::rational::{dot_int, int, serde_q, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrowKind {
    X,
    Y,
}

/// An arrow of the double quiver: `x_e` runs along `e`, `y_e` against it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DoubleArrow {
    pub kind: ArrowKind,
    pub index: usize,
    pub source: usize,
    pub target: usize,
}

#[derive(Deserialize)]
struct RawRep {
    quiver: ExtQuiver,
    n: DimensionVector,
    x: Vec<Matrix>,
    y: Vec<Matrix>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRep")]
pub struct DoubleQuiverRep {
    quiver: ExtQuiver,
    n: DimensionVector,
    x: Vec<Matrix>,
    y: Vec<Matrix>,
    #[serde(skip)]
    arrows: Vec<Arrow>,
}

impl TryFrom<RawRep> for DoubleQuiverRep {
    type Error = Error;
    fn try_from(raw: RawRep) -> Result<Self> {
        DoubleQuiverRep::new(raw.quiver, raw.n, raw.x, raw.y)
    }
}

/// Empty matrices lose their shape on the wire; give them back the expected one.
fn reshape_empty(m: Matrix, rows: usize, cols: usize) -> Matrix {
    if m.rows() * m.cols() == 0 && rows * cols == 0 {
        Matrix::zeros(rows, cols)
    } else {
        m
    }
}

impl DoubleQuiverRep {
    pub fn new(quiver: ExtQuiver, n: DimensionVector, x: Vec<Matrix>, y: Vec<Matrix>) -> Result<Self> {
        if n.len() != quiver.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: quiver.vertex_count(),
                found: n.len(),
            });
        }
        let arrows = quiver.arrows();
        if x.len() != arrows.len() || y.len() != arrows.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} x-maps and y-maps, found {} and {}",
                arrows.len(),
                x.len(),
                y.len()
            )));
        }
        let dims = n.entries();
        let mut xs = Vec::with_capacity(x.len());
        let mut ys = Vec::with_capacity(y.len());
        for (k, ((a, xm), ym)) in arrows.iter().zip(x).zip(y).enumerate() {
            let (ns, nt) = (dims[a.source] as usize, dims[a.target] as usize);
            let xm = reshape_empty(xm, nt, ns);
            let ym = reshape_empty(ym, ns, nt);
            if xm.shape() != (nt, ns) || ym.shape() != (ns, nt) {
                return Err(Error::ShapeMismatch(format!(
                    "arrow {k} ({} -> {}): x is {:?}, y is {:?}, expected {:?} and {:?}",
                    a.source,
                    a.target,
                    xm.shape(),
                    ym.shape(),
                    (nt, ns),
                    (ns, nt)
                )));
            }
            xs.push(xm);
            ys.push(ym);
        }
        Ok(DoubleQuiverRep {
            quiver,
            n,
            x: xs,
            y: ys,
            arrows,
        })
    }

    pub fn zero(quiver: ExtQuiver, n: DimensionVector) -> Result<Self> {
        let arrows = quiver.arrows();
        let d = n.entries().to_vec();
        if d.len() != quiver.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: quiver.vertex_count(),
                found: d.len(),
            });
        }
        let x = arrows
            .iter()
            .map(|a| Matrix::zeros(d[a.target] as usize, d[a.source] as usize))
            .collect();
        let y = arrows
            .iter()
            .map(|a| Matrix::zeros(d[a.source] as usize, d[a.target] as usize))
            .collect();
        Self::new(quiver, n, x, y)
    }

    /// Integer entries drawn uniformly from `[-max_abs, max_abs]`.
    pub fn random<R: Rng>(quiver: ExtQuiver, n: DimensionVector, rng: &mut R, max_abs: i64) -> Result<Self> {
        let mut rep = Self::zero(quiver, n)?;
        for m in rep.x.iter_mut().chain(rep.y.iter_mut()) {
            *m = Matrix::from_fn(m.rows(), m.cols(), |_, _| int(rng.gen_range(-max_abs..=max_abs)));
        }
        Ok(rep)
    }

    pub fn quiver(&self) -> &ExtQuiver {
        &self.quiver
    }

    pub fn dimension(&self) -> &DimensionVector {
        &self.n
    }

    pub fn x_maps(&self) -> &[Matrix] {
        &self.x
    }

    pub fn y_maps(&self) -> &[Matrix] {
        &self.y
    }

    pub fn x_map_mut(&mut self, k: usize) -> &mut Matrix {
        &mut self.x[k]
    }

    pub fn y_map_mut(&mut self, k: usize) -> &mut Matrix {
        &mut self.y[k]
    }

    fn vertex_dim(&self, i: usize) -> usize {
        self.n.entries()[i] as usize
    }

    /// Every map of the double quiver with its endpoints, `x` maps first.
    pub fn double_arrows(&self) -> impl Iterator<Item = (DoubleArrow, &Matrix)> {
        let xs = self.arrows.iter().zip(&self.x).enumerate().map(|(k, (a, m))| {
            (
                DoubleArrow {
                    kind: ArrowKind::X,
                    index: k,
                    source: a.source,
                    target: a.target,
                },
                m,
            )
        });
        let ys = self.arrows.iter().zip(&self.y).enumerate().map(|(k, (a, m))| {
            (
                DoubleArrow {
                    kind: ArrowKind::Y,
                    index: k,
                    source: a.target,
                    target: a.source,
                },
                m,
            )
        });
        xs.chain(ys)
    }

    /// `g·(x, y) = (g_t x_e g_s^{-1}, g_s y_e g_t^{-1})`.
    pub fn act(&self, g: &BlockEndomorphism) -> Result<Self> {
        self.check_blocks(g)?;
        let inverses = g
            .blocks
            .iter()
            .map(|b| b.inverse().ok_or_else(|| Error::Precondition("group element is singular".into())))
            .collect::<Result<Vec<_>>>()?;
        let mut out = self.clone();
        for (k, a) in self.arrows.iter().enumerate() {
            out.x[k] = &(&g.blocks[a.target] * &self.x[k]) * &inverses[a.source];
            out.y[k] = &(&g.blocks[a.source] * &self.y[k]) * &inverses[a.target];
        }
        Ok(out)
    }

    fn check_blocks(&self, g: &BlockEndomorphism) -> Result<()> {
        let ok = g.blocks.len() == self.quiver.vertex_count()
            && g.blocks.iter().enumerate().all(|(i, b)| b.shape() == (self.vertex_dim(i), self.vertex_dim(i)));
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("block sizes do not match the dimension vector".into()))
        }
    }
}

/// Element of `gl(n) = ⊕ gl(n_i)`, or of `G(n)` when every block is invertible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockEndomorphism {
    pub blocks: Vec<Matrix>,
}

impl BlockEndomorphism {
    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(Matrix::is_zero)
    }

    pub fn total_trace(&self) -> Rational {
        self.blocks.iter().map(Matrix::trace).sum()
    }

    /// `g μ g^{-1}` blockwise.
    pub fn conjugated_by(&self, g: &BlockEndomorphism) -> Option<BlockEndomorphism> {
        let blocks = self
            .blocks
            .iter()
            .zip(&g.blocks)
            .map(|(m, gi)| Some(&(gi * m) * &gi.inverse()?))
            .collect::<Option<Vec<_>>>()?;
        Some(BlockEndomorphism { blocks })
    }
}

pub fn moment_map(rep: &DoubleQuiverRep) -> BlockEndomorphism {
    let mut blocks: Vec<Matrix> = (0..rep.quiver.vertex_count())
        .map(|i| Matrix::zeros(rep.vertex_dim(i), rep.vertex_dim(i)))
        .collect();
    for (k, a) in rep.arrows.iter().enumerate() {
        let xy = &rep.x[k] * &rep.y[k];
        let yx = &rep.y[k] * &rep.x[k];
        blocks[a.target] = &blocks[a.target] + &xy;
        blocks[a.source] = &blocks[a.source] - &yx;
    }
    BlockEndomorphism { blocks }
}

pub fn in_zero_fiber(rep: &DoubleQuiverRep) -> bool {
    moment_map(rep).is_zero()
}

/// `slope_θ(W) = θ·dim W / Σ dim W_i`.
pub fn slope_theta(theta: &[Rational], m: &DimensionVector) -> Result<Rational> {
    if theta.len() != m.len() {
        return Err(Error::DimensionMismatch {
            expected: m.len(),
            found: theta.len(),
        });
    }
    if m.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(dot_int(theta, m.entries()) / int(m.total() as i64))
}

/// The character `χ_θ(g) = Π det(g_i)^{θ_i}`.
pub fn char_of_theta(theta: &[i64]) -> Character {
    Character::from_integers(theta)
}

/// Spanning vectors of `W_i ⊆ V_i`, vertex by vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubrepWitness {
    spans: Vec<WitnessSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
struct WitnessSpan(#[serde(with = "serde_q::matrix")] Vec<Vec<Rational>>);

impl SubrepWitness {
    pub fn new(spans: Vec<Vec<Vec<Rational>>>) -> Self {
        SubrepWitness {
            spans: spans.into_iter().map(WitnessSpan).collect(),
        }
    }

    pub fn full(rep: &DoubleQuiverRep) -> Self {
        Subrep::full(rep).to_witness()
    }

    pub fn zero(rep: &DoubleQuiverRep) -> Self {
        Subrep::zero(rep).to_witness()
    }

    pub fn span(&self, i: usize) -> &[Vec<Rational>] {
        &self.spans[i].0
    }

    pub fn dimension(&self) -> DimensionVector {
        DimensionVector::new(self.spans.iter().map(|s| s.0.len() as u32).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SubrepCheck {
    Valid {
        dimension: DimensionVector,
    },
    Invalid {
        arrow: DoubleArrow,
        #[serde(with = "serde_q::vec")]
        vector: Vec<Rational>,
    },
}

/// Closure of the witness spans under every map of the double quiver.
pub fn verify_subrep(rep: &DoubleQuiverRep, w: &SubrepWitness) -> Result<SubrepCheck> {
    let s = rep.quiver.vertex_count();
    if w.spans.len() != s {
        return Err(Error::MalformedWitness(format!("{} vertex spans for {s} vertices", w.spans.len())));
    }
    let mut spaces = Vec::with_capacity(s);
    for i in 0..s {
        let dim = rep.vertex_dim(i);
        let vectors = w.span(i);
        if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::MalformedWitness(format!(
                "vector of length {} at vertex {i} of dimension {dim}",
                bad.len()
            )));
        }
        let space = Subspace::spanned_by(dim, vectors);
        if space.dim() != vectors.len() {
            return Err(Error::MalformedWitness(format!("spanning vectors at vertex {i} are dependent")));
        }
        spaces.push(space);
    }
    for (arrow, m) in rep.double_arrows() {
        for u in w.span(arrow.source) {
            if !spaces[arrow.target].contains(&m.mul_vec(u)) {
                return Ok(SubrepCheck::Invalid {
                    arrow,
                    vector: u.clone(),
                });
            }
        }
    }
    Ok(SubrepCheck::Valid {
        dimension: w.dimension(),
    })
}

/// Budgets and seeds for the bounded subrepresentation searches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Distinct candidate subrepresentations to examine.
    pub max_candidates: usize,
    /// Matrix-vector products allowed inside one closure computation.
    pub max_closure_steps: usize,
    /// Rounds of random seeds; each round seeds every vertex once.
    pub random_rounds: usize,
    pub prng_seed: u64,
    /// Vertices up to this dimension are seeded with every `{-1,0,1}` vector.
    pub grid_max_dim: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_candidates: 20_000,
            max_closure_steps: 1_000_000,
            random_rounds: 4,
            prng_seed: 0,
            grid_max_dim: 3,
        }
    }
}

/// What a bounded search looked at; not a proof that nothing else exists.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchCertificate {
    pub basis_seeds: usize,
    pub grid_seeds: usize,
    pub random_seeds: usize,
    pub sums: usize,
    pub distinct_subreps: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DestabilizerOutcome {
    Witness {
        witness: SubrepWitness,
        dimension: DimensionVector,
        #[serde(with = "serde_q")]
        slope: Rational,
    },
    NoneFound {
        certificate: SearchCertificate,
    },
}

/// Subrepresentation as canonical per-vertex subspaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Subrep {
    spaces: Vec<Subspace>,
}

impl Subrep {
    fn zero(rep: &DoubleQuiverRep) -> Self {
        Subrep {
            spaces: (0..rep.quiver.vertex_count()).map(|i| Subspace::zero(rep.vertex_dim(i))).collect(),
        }
    }

    fn full(rep: &DoubleQuiverRep) -> Self {
        Subrep {
            spaces: (0..rep.quiver.vertex_count()).map(|i| Subspace::full(rep.vertex_dim(i))).collect(),
        }
    }

    fn dimension(&self) -> DimensionVector {
        DimensionVector::new(self.spaces.iter().map(|s| s.dim() as u32).collect())
    }

    fn sum(&self, other: &Subrep) -> Subrep {
        Subrep {
            spaces: self.spaces.iter().zip(&other.spaces).map(|(a, b)| a.sum(b)).collect(),
        }
    }

    fn to_witness(&self) -> SubrepWitness {
        SubrepWitness::new(self.spaces.iter().map(|s| s.basis().to_vec()).collect())
    }

    /// Smallest subrepresentation containing `self` (assumed closed) and `seed` at `vertex`.
    fn closure_with(&self, rep: &DoubleQuiverRep, vertex: usize, seed: &[Rational], budget: usize) -> Result<Subrep> {
        let mut out = self.clone();
        if !out.spaces[vertex].insert(seed) {
            return Ok(out);
        }
        let mut queue = VecDeque::from([(vertex, seed.to_vec())]);
        let mut steps = 0usize;
        while let Some((i, v)) = queue.pop_front() {
            for (arrow, m) in rep.double_arrows().filter(|(a, _)| a.source == i) {
                steps += 1;
                if steps > budget {
                    return Err(Error::BudgetExceeded {
                        what: "closure computation",
                        budget,
                    });
                }
                let image = m.mul_vec(&v);
                if out.spaces[arrow.target].insert(&image) {
                    queue.push_back((arrow.target, image));
                }
            }
        }
        Ok(out)
    }
}

struct Seed {
    vertex: usize,
    vector: Vec<Rational>,
    origin: SeedOrigin,
}

enum SeedOrigin {
    Basis,
    Grid,
    Random,
}

fn seeds(rep: &DoubleQuiverRep, config: &SearchConfig) -> Vec<Seed> {
    let s = rep.quiver.vertex_count();
    let mut out = Vec::new();
    for i in 0..s {
        let d = rep.vertex_dim(i);
        for k in 0..d {
            let mut e = vec![Rational::zero(); d];
            e[k] = int(1);
            out.push(Seed { vertex: i, vector: e, origin: SeedOrigin::Basis });
        }
    }
    for i in 0..s {
        let d = rep.vertex_dim(i);
        if d == 0 || d > config.grid_max_dim {
            continue;
        }
        for code in 0..3u64.pow(d as u32) {
            let mut c = code;
            let v: Vec<i64> = (0..d)
                .map(|_| {
                    let digit = (c % 3) as i64 - 1;
                    c /= 3;
                    digit
                })
                .collect();
            let nonzero = v.iter().filter(|&&x| x != 0).count();
            // one representative per line, basis vectors already covered
            if nonzero < 2 || v.iter().find(|&&x| x != 0) != Some(&1) {
                continue;
            }
            out.push(Seed {
                vertex: i,
                vector: v.into_iter().map(int).collect(),
                origin: SeedOrigin::Grid,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.prng_seed);
    for _ in 0..config.random_rounds {
        for i in 0..s {
            let d = rep.vertex_dim(i);
            if d < 2 {
                continue;
            }
            let v = (0..d).map(|_| int(rng.gen_range(-5..=5))).collect::<Vec<_>>();
            if v.iter().all(Zero::is_zero) {
                continue;
            }
            out.push(Seed { vertex: i, vector: v, origin: SeedOrigin::Random });
        }
    }
    out
}

enum Explored<T> {
    Found(T),
    Exhausted(SearchCertificate),
}

/// Feeds every distinct subrepresentation strictly containing `base` that the
/// search reaches to `visit`, in a deterministic order: closures of seeds,
/// then sums of pairs of what has been found until nothing new appears.
fn explore<T>(
    rep: &DoubleQuiverRep,
    base: &Subrep,
    config: &SearchConfig,
    mut visit: impl FnMut(&Subrep) -> ControlFlow<T>,
) -> Result<Explored<T>> {
    let mut cert = SearchCertificate::default();
    let mut seen: HashSet<Subrep> = HashSet::from([base.clone()]);
    let mut found: Vec<Subrep> = Vec::new();
    let mut examined = 0usize;
    for seed in seeds(rep, config) {
        if examined >= config.max_candidates {
            cert.truncated = true;
            break;
        }
        match seed.origin {
            SeedOrigin::Basis => cert.basis_seeds += 1,
            SeedOrigin::Grid => cert.grid_seeds += 1,
            SeedOrigin::Random => cert.random_seeds += 1,
        }
        examined += 1;
        let sub = base.closure_with(rep, seed.vertex, &seed.vector, config.max_closure_steps)?;
        if seen.insert(sub.clone()) {
            if let ControlFlow::Break(t) = visit(&sub) {
                return Ok(Explored::Found(t));
            }
            found.push(sub);
        }
    }
    let mut i = 0;
    'outer: while i < found.len() {
        for j in 0..i {
            if examined >= config.max_candidates {
                cert.truncated = true;
                break 'outer;
            }
            examined += 1;
            cert.sums += 1;
            let sub = found[i].sum(&found[j]);
            if seen.insert(sub.clone()) {
                if let ControlFlow::Break(t) = visit(&sub) {
                    return Ok(Explored::Found(t));
                }
                found.push(sub);
            }
        }
        i += 1;
    }
    cert.distinct_subreps = found.len();
    Ok(Explored::Exhausted(cert))
}

fn check_theta(rep: &DoubleQuiverRep, theta: &[Rational]) -> Result<()> {
    if theta.len() != rep.n.len() {
        return Err(Error::DimensionMismatch {
            expected: rep.n.len(),
            found: theta.len(),
        });
    }
    let pairing = dot_int(theta, rep.n.entries());
    if !pairing.is_zero() {
        return Err(Error::NotInCharacterSpace(pairing.to_string()));
    }
    Ok(())
}

/// Bounded search for a subrepresentation of positive θ-slope.
pub fn destabilizer_search(rep: &DoubleQuiverRep, theta: &[Rational], config: &SearchConfig) -> Result<DestabilizerOutcome> {
    check_theta(rep, theta)?;
    let explored = explore(rep, &Subrep::zero(rep), config, |sub| {
        let dim = sub.dimension();
        if !dim.is_zero() && dot_int(theta, dim.entries()).is_positive() {
            ControlFlow::Break(sub.clone())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    match explored {
        Explored::Found(sub) => {
            let witness = sub.to_witness();
            let dimension = match verify_subrep(rep, &witness)? {
                SubrepCheck::Valid { dimension } => dimension,
                SubrepCheck::Invalid { arrow, .. } => {
                    return Err(Error::WitnessRejected(format!("not closed under {arrow:?}")))
                }
            };
            let slope = slope_theta(theta, &dimension)?;
            if !slope.is_positive() {
                return Err(Error::WitnessRejected(format!("slope {slope} is not positive")));
            }
            Ok(DestabilizerOutcome::Witness {
                witness,
                dimension,
                slope,
            })
        }
        Explored::Exhausted(certificate) => Ok(DestabilizerOutcome::NoneFound { certificate }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum JhOutcome {
    /// `steps[k]` is the `k+1`-th term `W_1 ⊂ W_2 ⊂ ... ⊂ V`.
    Filtration {
        steps: Vec<SubrepWitness>,
        graded: Vec<DimensionVector>,
    },
    Incomplete {
        reason: String,
    },
}

/// Greedy Jordan–Hölder search: each step is the smallest slope-zero
/// subrepresentation found strictly above the previous one.
pub fn jh_search(rep: &DoubleQuiverRep, theta: &[Rational], config: &SearchConfig) -> Result<JhOutcome> {
    check_theta(rep, theta)?;
    if config.max_candidates == 0 {
        return Ok(JhOutcome::Incomplete {
            reason: "search budget is zero".into(),
        });
    }
    if let DestabilizerOutcome::Witness { dimension, .. } = destabilizer_search(rep, theta, config)? {
        return Err(Error::Precondition(format!(
            "representation is θ-unstable: subrepresentation of dimension {:?} has positive slope",
            dimension.entries()
        )));
    }
    let full = Subrep::full(rep);
    let mut current = Subrep::zero(rep);
    let mut chain = Vec::new();
    while current != full {
        let mut best: Option<Subrep> = None;
        let explored = explore::<()>(rep, &current, config, |sub| {
            let dim = sub.dimension();
            let better = best.as_ref().is_none_or(|b| dim.total() < b.dimension().total());
            if dot_int(theta, dim.entries()).is_zero() && better {
                best = Some(sub.clone());
            }
            ControlFlow::Continue(())
        })?;
        if let Explored::Exhausted(cert) = explored {
            if cert.truncated {
                return Ok(JhOutcome::Incomplete {
                    reason: format!("search budget exhausted after {} filtration steps", chain.len()),
                });
            }
        }
        let next = best.unwrap_or_else(|| full.clone());
        chain.push(next.clone());
        current = next;
    }
    let mut graded = Vec::with_capacity(chain.len());
    let mut previous = DimensionVector::zero(rep.n.len());
    for sub in &chain {
        let dim = sub.dimension();
        graded.push(dim.checked_sub(&previous).expect("chain is increasing"));
        previous = dim;
    }
    Ok(JhOutcome::Filtration {
        steps: chain.iter().map(Subrep::to_witness).collect(),
        graded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn dv(v: &[u32]) -> DimensionVector {
        DimensionVector::new(v.to_vec())
    }

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn mat(rows: &[&[i64]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        Matrix::from_rows(rows.iter().map(|r| q(r)).collect(), cols).unwrap()
    }

    fn affine_a1() -> ExtQuiver {
        ExtQuiver::new(vec![0, 0], &[(0, 1, 2)]).unwrap()
    }

    fn jordan() -> ExtQuiver {
        ExtQuiver::new(vec![1], &[]).unwrap()
    }

    #[test]
    fn moment_map_of_scalar_loop_vanishes() {
        let rep = DoubleQuiverRep::new(jordan(), dv(&[1]), vec![mat(&[&[3]])], vec![mat(&[&[-7]])]).unwrap();
        assert!(moment_map(&rep).is_zero());
    }

    #[test]
    fn moment_map_of_zero_rep() {
        let rep = DoubleQuiverRep::zero(affine_a1(), dv(&[2, 1])).unwrap();
        assert!(moment_map(&rep).is_zero());
        assert!(in_zero_fiber(&rep));
    }

    #[test]
    fn moment_map_affine_a1_blocks() {
        let (a, b, c, d) = (2, 3, 5, 7);
        let rep = DoubleQuiverRep::new(
            affine_a1(),
            dv(&[1, 1]),
            vec![mat(&[&[a]]), mat(&[&[b]])],
            vec![mat(&[&[c]]), mat(&[&[d]])],
        )
        .unwrap();
        let mu = moment_map(&rep);
        // arrows run 0 -> 1: y x lands at the source, x y at the target
        assert_eq!(mu.blocks[0], mat(&[&[-(c * a) - d * b]]));
        assert_eq!(mu.blocks[1], mat(&[&[a * c + b * d]]));
        assert_eq!(mu.total_trace(), int(0));
    }

    #[test]
    fn zero_fiber_examples() {
        let rep = DoubleQuiverRep::new(jordan(), dv(&[2]), vec![mat(&[&[0, 1], &[0, 0]])], vec![mat(&[&[0, 0], &[1, 0]])]).unwrap();
        assert_eq!(moment_map(&rep).blocks[0], mat(&[&[1, 0], &[0, -1]]));
        assert!(!in_zero_fiber(&rep));
        let mut only_x = DoubleQuiverRep::zero(affine_a1(), dv(&[2, 2])).unwrap();
        *only_x.x_map_mut(0) = mat(&[&[1, 2], &[3, 4]]);
        *only_x.x_map_mut(1) = mat(&[&[0, 1], &[1, 0]]);
        assert!(in_zero_fiber(&only_x));
    }

    #[test]
    fn shape_validation() {
        let err = DoubleQuiverRep::new(jordan(), dv(&[2]), vec![mat(&[&[1]])], vec![mat(&[&[1]])]);
        assert!(matches!(err, Err(Error::ShapeMismatch(_))));
        assert!(DoubleQuiverRep::new(jordan(), dv(&[1]), vec![], vec![]).is_err());
    }

    #[test]
    fn slope_examples() {
        assert_eq!(slope_theta(&q(&[1, -1]), &dv(&[1, 0])), Ok(int(1)));
        assert_eq!(slope_theta(&q(&[2, -1]), &dv(&[1, 2])), Ok(int(0)));
        assert_eq!(slope_theta(&[rat(1, 2), rat(-1, 3)], &dv(&[2, 3])), Ok(int(0)));
        assert_eq!(slope_theta(&q(&[1, -1]), &dv(&[0, 0])), Err(Error::DivisionByZero));
    }

    #[test]
    fn verify_examples() {
        let mut rep = DoubleQuiverRep::zero(affine_a1(), dv(&[1, 1])).unwrap();
        *rep.x_map_mut(0) = mat(&[&[1]]);
        assert_eq!(
            verify_subrep(&rep, &SubrepWitness::full(&rep)).unwrap(),
            SubrepCheck::Valid { dimension: dv(&[1, 1]) }
        );
        assert_eq!(
            verify_subrep(&rep, &SubrepWitness::zero(&rep)).unwrap(),
            SubrepCheck::Valid { dimension: dv(&[0, 0]) }
        );
        let w = SubrepWitness::new(vec![vec![q(&[1])], vec![]]);
        assert_eq!(
            verify_subrep(&rep, &w).unwrap(),
            SubrepCheck::Invalid {
                arrow: DoubleArrow { kind: ArrowKind::X, index: 0, source: 0, target: 1 },
                vector: q(&[1]),
            }
        );
        let dependent = SubrepWitness::new(vec![vec![q(&[1]), q(&[2])], vec![]]);
        assert!(matches!(verify_subrep(&rep, &dependent), Err(Error::MalformedWitness(_))));
    }

    #[test]
    fn destabilizer_on_zero_maps() {
        let rep = DoubleQuiverRep::zero(affine_a1(), dv(&[1, 1])).unwrap();
        match destabilizer_search(&rep, &q(&[1, -1]), &SearchConfig::default()).unwrap() {
            DestabilizerOutcome::Witness { dimension, slope, witness } => {
                assert_eq!(dimension, dv(&[1, 0]));
                assert_eq!(slope, int(1));
                assert_eq!(witness.span(0), &[q(&[1])]);
            }
            other => panic!("{other:?}"),
        }
    }

    /// Affine A1 at n = (1,1) with x = (1, 0), y = (0, 1): no proper nonzero subreps.
    fn simple_a1() -> DoubleQuiverRep {
        DoubleQuiverRep::new(affine_a1(), dv(&[1, 1]), vec![mat(&[&[1]]), mat(&[&[0]])], vec![mat(&[&[0]]), mat(&[&[1]])]).unwrap()
    }

    #[test]
    fn destabilizer_on_simple_rep() {
        let rep = simple_a1();
        for theta in [q(&[1, -1]), q(&[-1, 1]), q(&[0, 0])] {
            assert!(matches!(
                destabilizer_search(&rep, &theta, &SearchConfig::default()).unwrap(),
                DestabilizerOutcome::NoneFound { .. }
            ));
        }
    }

    #[test]
    fn destabilizer_finds_invariant_line() {
        // Jordan quiver plus a second vertex: loop at 0 fixes the line (1, 1),
        // arrows to vertex 1 kill it; the line has dimension (1, 0)
        let quiver = ExtQuiver::new(vec![1, 0], &[(0, 1, 1)]).unwrap();
        let mut rep = DoubleQuiverRep::zero(quiver, dv(&[2, 1])).unwrap();
        *rep.x_map_mut(0) = mat(&[&[2, 1], &[1, 2]]);
        *rep.y_map_mut(0) = mat(&[&[1, 0], &[0, 1]]);
        *rep.x_map_mut(1) = mat(&[&[1, -1]]);
        *rep.y_map_mut(1) = mat(&[&[1], &[-1]]);
        let theta = [int(1), int(-2)];
        match destabilizer_search(&rep, &theta, &SearchConfig::default()).unwrap() {
            DestabilizerOutcome::Witness { dimension, witness, .. } => {
                assert_eq!(dimension, dv(&[1, 0]));
                assert_eq!(witness.span(0), &[q(&[1, 1])]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn destabilizer_rejects_theta_off_wn() {
        let rep = simple_a1();
        assert!(matches!(
            destabilizer_search(&rep, &q(&[1, 0]), &SearchConfig::default()),
            Err(Error::NotInCharacterSpace(_))
        ));
    }

    #[test]
    fn closure_budget_is_an_error() {
        let rep = simple_a1();
        let config = SearchConfig { max_closure_steps: 1, ..SearchConfig::default() };
        assert!(matches!(
            destabilizer_search(&rep, &q(&[1, -1]), &config),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn jh_of_simple_rep_has_one_step() {
        let rep = simple_a1();
        match jh_search(&rep, &q(&[0, 0]), &SearchConfig::default()).unwrap() {
            JhOutcome::Filtration { steps, graded } => {
                assert_eq!(steps.len(), 1);
                assert_eq!(graded, vec![dv(&[1, 1])]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn jh_of_direct_sum_has_two_steps() {
        // S ⊕ S with S the simple (1,1)-dimensional rep above, at theta = 0
        let mut rep = DoubleQuiverRep::zero(affine_a1(), dv(&[2, 2])).unwrap();
        *rep.x_map_mut(0) = mat(&[&[1, 0], &[0, 1]]);
        *rep.y_map_mut(1) = mat(&[&[1, 0], &[0, 1]]);
        match jh_search(&rep, &q(&[0, 0]), &SearchConfig::default()).unwrap() {
            JhOutcome::Filtration { steps, graded } => {
                assert_eq!(graded, vec![dv(&[1, 1]), dv(&[1, 1])]);
                for w in &steps {
                    assert!(matches!(verify_subrep(&rep, w).unwrap(), SubrepCheck::Valid { .. }));
                }
            }
            other => panic!("{other:?}"),
        }
        // two simples of different dimension vectors: vertex simples with zero maps
        let rep = DoubleQuiverRep::zero(affine_a1(), dv(&[1, 1])).unwrap();
        match jh_search(&rep, &q(&[0, 0]), &SearchConfig::default()).unwrap() {
            JhOutcome::Filtration { graded, .. } => assert_eq!(graded, vec![dv(&[1, 0]), dv(&[0, 1])]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn jh_with_zero_budget_is_incomplete() {
        let rep = simple_a1();
        let config = SearchConfig { max_candidates: 0, ..SearchConfig::default() };
        assert!(matches!(jh_search(&rep, &q(&[0, 0]), &config).unwrap(), JhOutcome::Incomplete { .. }));
    }

    #[test]
    fn jh_refuses_unstable_reps() {
        let rep = DoubleQuiverRep::zero(affine_a1(), dv(&[1, 1])).unwrap();
        assert!(matches!(jh_search(&rep, &q(&[1, -1]), &SearchConfig::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn char_of_theta_examples() {
        assert!(char_of_theta(&[0, 0]).is_trivial());
        assert_eq!(char_of_theta(&[1, -1]).exponents, q(&[1, -1]));
    }

    #[test]
    fn equivariance_and_trace_on_random_reps() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let quiver = ExtQuiver::new(vec![1, 0, 2], &[(0, 1, 2), (1, 2, 1)]).unwrap();
        for _ in 0..30 {
            let n = dv(&[rng.gen_range(0..=2), rng.gen_range(0..=2), rng.gen_range(0..=2)]);
            let rep = DoubleQuiverRep::random(quiver.clone(), n.clone(), &mut rng, 3).unwrap();
            let mu = moment_map(&rep);
            assert_eq!(mu.total_trace(), int(0));
            let g = BlockEndomorphism {
                blocks: n
                    .entries()
                    .iter()
                    .map(|&d| loop {
                        let m = Matrix::from_fn(d as usize, d as usize, |_, _| int(rng.gen_range(-2..=2)));
                        if m.inverse().is_some() {
                            break m;
                        }
                    })
                    .collect(),
            };
            let moved = moment_map(&rep.act(&g).unwrap());
            assert_eq!(moved, mu.conjugated_by(&g).unwrap());
        }
    }

    #[test]
    fn witnesses_reverify_and_survive_theta_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let quiver = ExtQuiver::new(vec![0, 1], &[(0, 1, 1)]).unwrap();
        for _ in 0..40 {
            let n = dv(&[rng.gen_range(1..=2), rng.gen_range(1..=2)]);
            let mut rep = DoubleQuiverRep::random(quiver.clone(), n.clone(), &mut rng, 1).unwrap();
            if rng.gen_bool(0.5) {
                *rep.y_map_mut(0) = Matrix::zeros(rep.y_maps()[0].rows(), rep.y_maps()[0].cols());
            }
            let (a, b) = (n.entries()[0] as i64, n.entries()[1] as i64);
            let theta = q(&[b, -a]);
            let first = destabilizer_search(&rep, &theta, &SearchConfig::default()).unwrap();
            if let DestabilizerOutcome::Witness { witness, slope, .. } = &first {
                assert!(matches!(verify_subrep(&rep, witness).unwrap(), SubrepCheck::Valid { .. }));
                assert!(slope.is_positive());
            }
            let scaled = q(&[3 * b, -3 * a]);
            let second = destabilizer_search(&rep, &scaled, &SearchConfig::default()).unwrap();
            assert_eq!(
                matches!(first, DestabilizerOutcome::Witness { .. }),
                matches!(second, DestabilizerOutcome::Witness { .. })
            );
        }
    }

    #[test]
    fn serde_round_trip_keeps_empty_blocks() {
        let quiver = ExtQuiver::new(vec![0, 0], &[(0, 1, 1)]).unwrap();
        let rep = DoubleQuiverRep::zero(quiver, dv(&[0, 2])).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        let back: DoubleQuiverRep = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rep);
    }
}
