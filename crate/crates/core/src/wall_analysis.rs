//! Totally semistable walls on rank-2 hyperbolic lattices and the case
//! analysis of a polystable stratum `v = Σ n_i v_i`.
//!
//! [`analyze_stratum`] runs eight tests in a fixed order (merge, multiplicity,
//! pairing range, isotropic isolation, connectivity, genus, shape, leaf) and
//! records each in the report trace.

use std::fmt;

use num_integer::Integer;
use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext_quiver::{build_ext_quiver, pairwise_merge_check, MergeCheck, PolystableDecomposition};
use crate::gaussian::GaussianRational;
use crate::lattice::{box_vectors, GramLattice, LatticeVector};
use crate::rational::Rational;
use crate::stability::StabilityFunction;

/// A rank-2 lattice of signature `(1,1)` with a class `v`, `v² > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HyperbolicPair {
    lattice: GramLattice,
    v: LatticeVector,
}

impl HyperbolicPair {
    pub fn new(lattice: GramLattice, v: LatticeVector) -> Result<Self> {
        if lattice.rank() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: lattice.rank(),
            });
        }
        let signature = lattice.signature();
        if !signature.is_hyperbolic_plane() {
            return Err(Error::NotHyperbolic(signature.to_string()));
        }
        let sq = lattice.square(&v)?;
        if sq <= 0 {
            return Err(Error::Precondition(format!("v² = {sq} is not positive")));
        }
        Ok(HyperbolicPair { lattice, v })
    }

    /// `H` spanned by `basis` inside `ambient`, with `v` given in ambient
    /// coordinates. The basis must span a primitive sublattice.
    pub fn from_embedding(ambient: &GramLattice, basis: [LatticeVector; 2], v: &LatticeVector) -> Result<Self> {
        for b in basis.iter().chain([v]) {
            ambient.check(b)?;
        }
        let (a, b) = (basis[0].coords(), basis[1].coords());
        let r = ambient.rank();
        let mut g = 0i64;
        let mut pivot = None;
        for k in 0..r {
            for l in k + 1..r {
                let minor = a[k] * b[l] - a[l] * b[k];
                if minor != 0 && pivot.is_none() {
                    pivot = Some((k, l, minor));
                }
                g = g.gcd(&minor);
            }
        }
        let Some((k, l, det)) = pivot else {
            return Err(Error::Precondition("embedding basis is linearly dependent".into()));
        };
        if g != 1 {
            return Err(Error::NotPrimitive(g));
        }
        let vc = v.coords();
        let x = Rational::new((vc[k] * b[l] - vc[l] * b[k]).into(), det.into());
        let y = Rational::new((a[k] * vc[l] - a[l] * vc[k]).into(), det.into());
        if !x.is_integer() || !y.is_integer() {
            return Err(Error::Precondition("v does not lie in the embedded lattice".into()));
        }
        let (x, y) = (
            i64::try_from(x.to_integer()).map_err(|_| Error::Overflow)?,
            i64::try_from(y.to_integer()).map_err(|_| Error::Overflow)?,
        );
        if &basis[0].scaled(x) + &basis[1].scaled(y) != *v {
            return Err(Error::Precondition("v does not lie in the embedded lattice".into()));
        }
        let lattice = ambient.restrict(&basis)?;
        Self::new(lattice, LatticeVector::new(vec![x, y]))
    }

    pub fn lattice(&self) -> &GramLattice {
        &self.lattice
    }

    pub fn v(&self) -> &LatticeVector {
        &self.v
    }

    /// `u² ≥ 0` and `⟨u, v⟩ > 0`: the integral classes generating `P_H`.
    pub fn in_positive_cone(&self, u: &LatticeVector) -> Result<bool> {
        Ok(self.lattice.square(u)? >= 0 && self.lattice.pair(u, &self.v)? > 0)
    }
}

/// Decides which spherical classes count as effective in criterion b).
pub struct Effectivity {
    description: String,
    predicate: Box<dyn Fn(&LatticeVector) -> bool + Send + Sync>,
}

impl Effectivity {
    /// `Re(Z_0(s) / Z_0(v)) > 0`. The ratio does not change when `Z_0` is
    /// normalized at `v`, so any `Z_0` with `Z_0(v) ≠ 0` may be passed.
    pub fn central_charge(z0: &StabilityFunction, hp: &HyperbolicPair) -> Result<Self> {
        z0.check_lattice(hp.lattice())?;
        let zv = z0.evaluate(hp.v())?;
        if zv.is_zero() {
            return Err(Error::DegenerateValue);
        }
        let z0 = z0.clone();
        Ok(Effectivity {
            description: format!("Re(Z0(s)/Z0(v)) > 0 with Z0(v) = {zv}"),
            predicate: Box::new(move |s| {
                z0.evaluate(s)
                    .and_then(|zs| zs.checked_div(&zv))
                    .is_ok_and(|q| q.re.is_positive())
            }),
        })
    }

    pub fn custom(description: impl Into<String>, predicate: impl Fn(&LatticeVector) -> bool + Send + Sync + 'static) -> Self {
        Effectivity {
            description: description.into(),
            predicate: Box::new(predicate),
        }
    }

    pub fn is_effective(&self, s: &LatticeVector) -> bool {
        (self.predicate)(s)
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

impl fmt::Debug for Effectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Effectivity").field("description", &self.description).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TssCriterion {
    /// isotropic `w` with `⟨v, w⟩ = 1`
    A,
    /// effective spherical `s` with `⟨v, s⟩ < 0`
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TssVerdict {
    TotallySemistable {
        class: LatticeVector,
        criterion: TssCriterion,
        pairing: i64,
    },
    /// Nothing in the box `[-bound, bound]²`; not a proof of absence.
    NotDetected { bound: u32, searched: usize },
}

/// Searches the box for a criterion a) witness, then for a criterion b)
/// witness, each in [`box_vectors`] order.
pub fn classify_wall_tss(hp: &HyperbolicPair, effectivity: &Effectivity, bound: u32) -> Result<TssVerdict> {
    if bound == 0 {
        return Err(Error::Precondition("bound must be at least 1".into()));
    }
    let l = hp.lattice();
    let mut searched = 0usize;
    for w in box_vectors(2, bound) {
        searched += 1;
        if l.square(&w)? == 0 && l.pair(hp.v(), &w)? == 1 {
            return Ok(TssVerdict::TotallySemistable {
                class: w,
                criterion: TssCriterion::A,
                pairing: 1,
            });
        }
    }
    for s in box_vectors(2, bound) {
        if l.square(&s)? != -2 {
            continue;
        }
        let pairing = l.pair(hp.v(), &s)?;
        if pairing < 0 && effectivity.is_effective(&s) {
            return Ok(TssVerdict::TotallySemistable {
                class: s,
                criterion: TssCriterion::B,
                pairing,
            });
        }
    }
    Ok(TssVerdict::NotDetected { bound, searched })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumStep {
    Merge,
    Multiplicity,
    PairingRange,
    IsotropicIsolation,
    Connectivity,
    Genus,
    Shape,
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub step: StratumStep,
    /// Summand indices the test ran on.
    pub scope: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Deformation {
    Merge { i: usize, j: usize, check: MergeCheck },
    Multiplicity { i: usize, square: i64, multiplicity: u32 },
    Genus { vertices: Vec<usize>, genus: i64, includes_positive: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InconclusiveReason {
    /// Isotropic `v_j` with `⟨v_i, v_j⟩ = 1`: `σ` lies on a totally semistable `v_i`-wall.
    TotallySemistableSummandWall { i: usize, isotropic: usize },
    SphereMultiplicity { i: usize, multiplicity: u32 },
    NoLeaf { vertices: Vec<usize> },
    LeafPairing { leaf: usize, pairing: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Leaf {
    pub index: usize,
    pub class: LatticeVector,
    pub neighbour: usize,
    /// `⟨v, s_l⟩` with `v` the class of the component.
    pub pairing: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitFactor {
    /// Isolated isotropic summand, contributing `S^{n_j} M(v_j)`.
    Isotropic { index: usize, class: LatticeVector, multiplicity: u32 },
    Component { summands: Vec<usize>, verdict: Box<StratumVerdict> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum StratumVerdict {
    HasStableDeformation {
        witness: Deformation,
    },
    TotallySemistableShape {
        w: LatticeVector,
        spheres: Vec<LatticeVector>,
        leaf: Option<Leaf>,
    },
    /// Only spherical summands forming a tree: the class is spherical and its
    /// moduli space a point.
    Point {
        spheres: Vec<LatticeVector>,
    },
    ProductSplit {
        factors: Vec<SplitFactor>,
    },
    Inconclusive {
        reason: InconclusiveReason,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratumReport {
    pub verdict: StratumVerdict,
    pub trace: Vec<TraceEntry>,
}

struct Analysis<'a> {
    decomp: &'a PolystableDecomposition,
    squares: Vec<i64>,
    pairings: Vec<Vec<i64>>,
    trace: Vec<TraceEntry>,
}

impl Analysis<'_> {
    fn record(&mut self, step: StratumStep, scope: &[usize], detail: impl Into<String>) {
        self.trace.push(TraceEntry {
            step,
            scope: scope.to_vec(),
            detail: detail.into(),
        });
    }

    fn multiplicity(&self, i: usize) -> u32 {
        self.decomp.summands()[i].multiplicity
    }

    fn class(&self, i: usize) -> &LatticeVector {
        &self.decomp.summands()[i].class
    }

    fn edges_within(&self, vertices: &[usize]) -> i64 {
        let mut e = 0;
        for (k, &i) in vertices.iter().enumerate() {
            for &j in &vertices[k + 1..] {
                e += self.pairings[i][j];
            }
        }
        e
    }

    /// Connected components of the graph with an edge wherever the pairing is positive.
    fn components(&self, vertices: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.squares.len()];
        let mut out = Vec::new();
        for &start in vertices {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut k = 0;
            while k < comp.len() {
                let i = comp[k];
                for &j in vertices {
                    if !seen[j] && self.pairings[i][j] > 0 {
                        seen[j] = true;
                        comp.push(j);
                    }
                }
                k += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    fn run(&mut self) -> Result<StratumVerdict> {
        let s = self.squares.len();
        let all: Vec<usize> = (0..s).collect();

        for i in 0..s {
            for j in i + 1..s {
                let both_positive = self.squares[i] >= 2 && self.squares[j] >= 2;
                if both_positive || self.pairings[i][j] >= 2 {
                    let check = pairwise_merge_check(self.decomp.lattice(), self.class(i), self.class(j))?;
                    self.record(
                        StratumStep::Merge,
                        &[i, j],
                        format!(
                            "v{i}² = {}, v{j}² = {}, ⟨v{i},v{j}⟩ = {}: merged {} vs separate {}",
                            self.squares[i], self.squares[j], check.pairing, check.merged, check.separate
                        ),
                    );
                    return Ok(StratumVerdict::HasStableDeformation {
                        witness: Deformation::Merge { i, j, check },
                    });
                }
            }
        }
        self.record(StratumStep::Merge, &all, "no pair merges");

        if let Some(i) = (0..s).find(|&i| self.squares[i] > 0 && self.multiplicity(i) > 1) {
            let multiplicity = self.multiplicity(i);
            self.record(StratumStep::Multiplicity, &[i], format!("v{i}² = {} with n{i} = {multiplicity}", self.squares[i]));
            return Ok(StratumVerdict::HasStableDeformation {
                witness: Deformation::Multiplicity {
                    i,
                    square: self.squares[i],
                    multiplicity,
                },
            });
        }
        self.record(StratumStep::Multiplicity, &all, "positive summands have multiplicity 1");

        for i in 0..s {
            for j in i + 1..s {
                let a = self.pairings[i][j];
                if !(0..=1).contains(&a) {
                    return Err(Error::Precondition(format!("⟨v{i},v{j}⟩ = {a} outside [0, 1] after the merge test")));
                }
            }
        }
        self.record(StratumStep::PairingRange, &all, "all pairings in {0, 1}");

        let isotropic: Vec<usize> = (0..s).filter(|&j| self.squares[j] == 0).collect();
        for &j in &isotropic {
            if let Some(i) = (0..s).find(|&i| i != j && self.pairings[i][j] == 1) {
                self.record(StratumStep::IsotropicIsolation, &[i, j], format!("⟨v{i},v{j}⟩ = 1 with v{j} isotropic"));
                return Ok(StratumVerdict::Inconclusive {
                    reason: InconclusiveReason::TotallySemistableSummandWall { i, isotropic: j },
                });
            }
        }
        self.record(StratumStep::IsotropicIsolation, &isotropic, format!("{} isolated isotropic summands", isotropic.len()));

        let rest: Vec<usize> = (0..s).filter(|&i| self.squares[i] != 0).collect();
        let components = self.components(&rest);
        if isotropic.is_empty() && components.len() == 1 {
            self.record(StratumStep::Connectivity, &all, "connected");
            return self.component(&all);
        }
        self.record(
            StratumStep::Connectivity,
            &all,
            format!("{} components, {} isotropic factors", components.len(), isotropic.len()),
        );
        let mut factors: Vec<SplitFactor> = isotropic
            .iter()
            .map(|&j| SplitFactor::Isotropic {
                index: j,
                class: self.class(j).clone(),
                multiplicity: self.multiplicity(j),
            })
            .collect();
        for comp in components {
            let verdict = self.component(&comp)?;
            if matches!(
                verdict,
                StratumVerdict::HasStableDeformation { .. } | StratumVerdict::Inconclusive { .. }
            ) {
                return Ok(verdict);
            }
            factors.push(SplitFactor::Component {
                summands: comp,
                verdict: Box::new(verdict),
            });
        }
        Ok(StratumVerdict::ProductSplit { factors })
    }

    /// Genus, shape and leaf tests on one connected component without isotropic summands.
    fn component(&mut self, vertices: &[usize]) -> Result<StratumVerdict> {
        let spheres: Vec<usize> = vertices.iter().copied().filter(|&i| self.squares[i] == -2).collect();
        let positive = vertices.iter().copied().find(|&i| self.squares[i] > 0);

        for q in self.components(&spheres) {
            let genus = 1 - q.len() as i64 + self.edges_within(&q);
            if genus >= 1 {
                self.record(StratumStep::Genus, &q, format!("spherical component has genus {genus}"));
                return Ok(StratumVerdict::HasStableDeformation {
                    witness: Deformation::Genus {
                        vertices: q,
                        genus,
                        includes_positive: false,
                    },
                });
            }
            if let Some(w) = positive {
                let mut with_w = q.clone();
                with_w.push(w);
                with_w.sort_unstable();
                let genus = 1 - with_w.len() as i64 + self.edges_within(&with_w);
                if genus >= 1 {
                    self.record(StratumStep::Genus, &with_w, format!("spherical component with v{w} has genus {genus}"));
                    return Ok(StratumVerdict::HasStableDeformation {
                        witness: Deformation::Genus {
                            vertices: with_w,
                            genus,
                            includes_positive: true,
                        },
                    });
                }
            }
        }
        self.record(StratumStep::Genus, vertices, "every spherical component has genus 0");

        if let Some(i) = spheres.iter().copied().find(|&i| self.multiplicity(i) > 1) {
            let multiplicity = self.multiplicity(i);
            self.record(StratumStep::Shape, &[i], format!("spherical v{i} has multiplicity {multiplicity}"));
            return Ok(StratumVerdict::Inconclusive {
                reason: InconclusiveReason::SphereMultiplicity { i, multiplicity },
            });
        }
        let sphere_classes: Vec<LatticeVector> = spheres.iter().map(|&i| self.class(i).clone()).collect();
        let Some(w) = positive else {
            self.record(StratumStep::Shape, vertices, "no positive summand");
            return Ok(StratumVerdict::Point { spheres: sphere_classes });
        };
        self.record(StratumStep::Shape, vertices, format!("v = v{w} + {} spherical classes", spheres.len()));
        if spheres.is_empty() {
            return Ok(StratumVerdict::TotallySemistableShape {
                w: self.class(w).clone(),
                spheres: sphere_classes,
                leaf: None,
            });
        }

        let degree = |i: usize| vertices.iter().filter(|&&j| j != i).map(|&j| self.pairings[i][j]).sum::<i64>();
        let Some(l) = spheres.iter().copied().find(|&i| degree(i) == 1) else {
            self.record(StratumStep::Leaf, vertices, "no spherical leaf");
            return Ok(StratumVerdict::Inconclusive {
                reason: InconclusiveReason::NoLeaf {
                    vertices: vertices.to_vec(),
                },
            });
        };
        let neighbour = vertices
            .iter()
            .copied()
            .find(|&j| j != l && self.pairings[l][j] == 1)
            .expect("leaf has a neighbour");
        let lattice = self.decomp.lattice();
        let total = vertices
            .iter()
            .fold(LatticeVector::zero(lattice.rank()), |acc, &i| &acc + self.class(i));
        let pairing = lattice.pair(&total, self.class(l))?;
        self.record(StratumStep::Leaf, &[l, neighbour], format!("⟨v, v{l}⟩ = {pairing}"));
        if pairing != -1 {
            return Ok(StratumVerdict::Inconclusive {
                reason: InconclusiveReason::LeafPairing { leaf: l, pairing },
            });
        }
        Ok(StratumVerdict::TotallySemistableShape {
            w: self.class(w).clone(),
            spheres: sphere_classes,
            leaf: Some(Leaf {
                index: l,
                class: self.class(l).clone(),
                neighbour,
                pairing,
            }),
        })
    }
}

pub fn analyze_stratum(decomp: &PolystableDecomposition) -> Result<StratumReport> {
    let lattice = decomp.lattice();
    let v = decomp.total_class();
    let sq = lattice.square(&v)?;
    if sq <= 0 {
        return Err(Error::Precondition(format!("v² = {sq} is not positive")));
    }
    let classes: Vec<&LatticeVector> = decomp.classes().collect();
    let squares = classes.iter().map(|c| lattice.square(c)).collect::<Result<Vec<_>>>()?;
    let pairings = classes
        .iter()
        .map(|a| classes.iter().map(|b| lattice.pair(a, b)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut analysis = Analysis {
        decomp,
        squares,
        pairings,
        trace: Vec::new(),
    };
    let verdict = analysis.run()?;
    Ok(StratumReport {
        verdict,
        trace: analysis.trace,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "factor", rename_all = "snake_case")]
pub enum ProductFactor {
    PositiveFactor { class: LatticeVector },
    /// `M(s)` is a reduced point.
    SphericalPoint { class: LatticeVector },
    SymmetricPower { class: LatticeVector, power: u32 },
}

fn push_factors(verdict: &StratumVerdict, out: &mut Vec<ProductFactor>) -> Result<()> {
    match verdict {
        StratumVerdict::TotallySemistableShape { w, spheres, .. } => {
            out.push(ProductFactor::PositiveFactor { class: w.clone() });
            out.extend(spheres.iter().map(|s| ProductFactor::SphericalPoint { class: s.clone() }));
        }
        StratumVerdict::Point { spheres } => {
            out.extend(spheres.iter().map(|s| ProductFactor::SphericalPoint { class: s.clone() }));
        }
        StratumVerdict::ProductSplit { factors } => {
            for f in factors {
                match f {
                    SplitFactor::Isotropic { class, multiplicity, .. } => out.push(ProductFactor::SymmetricPower {
                        class: class.clone(),
                        power: *multiplicity,
                    }),
                    SplitFactor::Component { verdict, .. } => push_factors(verdict, out)?,
                }
            }
        }
        StratumVerdict::HasStableDeformation { .. } | StratumVerdict::Inconclusive { .. } => {
            return Err(Error::Precondition("verdict has no product shape".into()));
        }
    }
    Ok(())
}

/// `(M')_red ≅ M(w) × Π M(s_i)`, flattened across product splits.
pub fn product_shape(report: &StratumReport) -> Result<Vec<ProductFactor>> {
    let mut out = Vec::new();
    push_factors(&report.verdict, &mut out)?;
    Ok(out)
}

/// Whether `μ^{-1}(0)` near the origin contains a simple representation, read
/// as "the stratum admits a stable deformation".
pub fn simple_near_stable_bridge(decomp: &PolystableDecomposition, budget: usize) -> Result<bool> {
    let quiver = build_ext_quiver(decomp);
    Ok(quiver.simple_rep_exists(&decomp.multiplicities(), budget)?.exists())
}

/// `Re(Z(s) / Z(v))`, exposed for reports.
pub fn effectivity_ratio(z0: &StabilityFunction, s: &LatticeVector, v: &LatticeVector) -> Result<Rational> {
    let zv: GaussianRational = z0.evaluate(v)?;
    Ok(z0.evaluate(s)?.checked_div(&zv)?.re)
}

/// `(Σ s_i)²` for the given summands, the lattice side of `2g - 2`.
pub fn sum_square(decomp: &PolystableDecomposition, indices: &[usize]) -> Result<i64> {
    let lattice = decomp.lattice();
    let total = indices
        .iter()
        .fold(LatticeVector::zero(lattice.rank()), |acc, &i| &acc + &decomp.summands()[i].class);
    lattice.square(&total)
}
