//! Stability functions on a lattice and the numerical invariants built from them.
//!
//! `Z` takes Gaussian-rational values, so phases are exact directions compared by
//! cross-multiplication and every weight below is an exact rational.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::character::Character;
use crate::error::{Error, Result};
use crate::ext_quiver::PolystableDecomposition;
use crate::gaussian::GaussianRational;
use crate::lattice::{GramLattice, LatticeVector};
use crate::rational::{int, rat, serde_q, Rational};

/// `Z` as a row vector: the value on each basis vector, extended linearly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StabilityFunction {
    values: Vec<GaussianRational>,
}

impl StabilityFunction {
    pub fn new(values: Vec<GaussianRational>) -> Self {
        StabilityFunction { values }
    }

    pub fn values(&self) -> &[GaussianRational] {
        &self.values
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn check_lattice(&self, lattice: &GramLattice) -> Result<()> {
        if lattice.rank() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: lattice.rank(),
                found: self.rank(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, v: &LatticeVector) -> Result<GaussianRational> {
        if v.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: v.len(),
            });
        }
        let mut re = Rational::zero();
        let mut im = Rational::zero();
        for (z, &c) in self.values.iter().zip(v.coords()) {
            if c != 0 {
                let c = int(c);
                re += &z.re * &c;
                im += &z.im * &c;
            }
        }
        Ok(GaussianRational::new(re, im))
    }

    /// Complex scalar multiple `c·Z`.
    pub fn scale(&self, c: &GaussianRational) -> Self {
        StabilityFunction::new(self.values.iter().map(|z| z * c).collect())
    }

    pub fn add(&self, other: &StabilityFunction) -> Result<Self> {
        if other.rank() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: other.rank(),
            });
        }
        Ok(StabilityFunction::new(
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        ))
    }

    /// `(i / Z(v))·Z`, so that the result sends `v` to `i`.
    pub fn normalize(&self, v: &LatticeVector) -> Result<Self> {
        let zv = self.evaluate(v)?;
        if zv.is_zero() {
            return Err(Error::DegenerateValue);
        }
        let factor = GaussianRational::i().checked_div(&zv)?;
        Ok(self.scale(&factor))
    }

    pub fn is_normalized_at(&self, v: &LatticeVector) -> Result<bool> {
        Ok(self.evaluate(v)? == GaussianRational::i())
    }

    fn require_normalized(&self, v: &LatticeVector) -> Result<()> {
        let zv = self.evaluate(v)?;
        if zv != GaussianRational::i() {
            return Err(Error::NotNormalized(zv.to_string()));
        }
        Ok(())
    }

    pub fn phase(&self, v: &LatticeVector) -> Result<Phase> {
        Phase::of(&self.evaluate(v)?)
    }

    pub fn slope(&self, v: &LatticeVector) -> Result<Slope> {
        Slope::of(&self.evaluate(v)?)
    }
}

/// Phase `φ ∈ (0, 1]` of a nonzero value `Z ∈ ℝ_{>0}·e^{iπφ}`, kept as the
/// direction `(re, im)`.
#[derive(Debug, Clone, Serialize)]
pub struct Phase {
    #[serde(with = "serde_q")]
    re: Rational,
    #[serde(with = "serde_q")]
    im: Rational,
}

impl Phase {
    pub fn of(z: &GaussianRational) -> Result<Phase> {
        if z.is_zero() {
            return Err(Error::DegenerateValue);
        }
        if z.im.is_negative() || (z.im.is_zero() && z.re.is_positive()) {
            return Err(Error::OutsideHeart(z.to_string()));
        }
        Ok(Phase {
            re: z.re.clone(),
            im: z.im.clone(),
        })
    }

    pub fn direction(&self) -> (&Rational, &Rational) {
        (&self.re, &self.im)
    }

    /// Exact value of `φ` for the directions where it is rational with small
    /// denominator (axes and diagonals); `None` otherwise.
    pub fn known_value(&self) -> Option<Rational> {
        if self.im.is_zero() {
            Some(Rational::one())
        } else if self.re.is_zero() {
            Some(rat(1, 2))
        } else if self.re == self.im {
            Some(rat(1, 4))
        } else if self.re == -&self.im {
            Some(rat(3, 4))
        } else {
            None
        }
    }
}

impl Ord for Phase {
    fn cmp(&self, other: &Self) -> Ordering {
        // both directions lie in the half-open upper half-plane, so the sign of
        // the cross product orders the arguments
        let cross = &self.re * &other.im - &self.im * &other.re;
        if cross.is_positive() {
            Ordering::Less
        } else if cross.is_negative() {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    }
}

impl PartialOrd for Phase {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Phase {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Phase {}

/// `ν = Re Z / Im Z`; `Im Z = 0` is the maximal slope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Slope {
    Finite(#[serde(with = "serde_q")] Rational),
    PlusInfinity,
}

impl Slope {
    pub fn of(z: &GaussianRational) -> Result<Slope> {
        if z.is_zero() {
            return Err(Error::DegenerateValue);
        }
        if z.im.is_zero() {
            Ok(Slope::PlusInfinity)
        } else {
            Ok(Slope::Finite(&z.re / &z.im))
        }
    }
}

/// Steps `(w_j, gr_j)` with `w_p > ... > w_0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<FiltrationStep>", into = "Vec<FiltrationStep>")]
pub struct WeightedFiltration {
    steps: Vec<FiltrationStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiltrationStep {
    pub weight: i64,
    pub class: LatticeVector,
}

impl TryFrom<Vec<FiltrationStep>> for WeightedFiltration {
    type Error = Error;
    fn try_from(steps: Vec<FiltrationStep>) -> Result<Self> {
        WeightedFiltration::new(steps.into_iter().map(|s| (s.weight, s.class)).collect())
    }
}

impl From<WeightedFiltration> for Vec<FiltrationStep> {
    fn from(f: WeightedFiltration) -> Self {
        f.steps
    }
}

impl WeightedFiltration {
    pub fn new(steps: Vec<(i64, LatticeVector)>) -> Result<Self> {
        let Some((_, first)) = steps.first() else {
            return Err(Error::MalformedFiltration("no steps".into()));
        };
        let rank = first.len();
        if let Some((_, v)) = steps.iter().find(|(_, v)| v.len() != rank) {
            return Err(Error::DimensionMismatch {
                expected: rank,
                found: v.len(),
            });
        }
        if steps.windows(2).any(|w| w[0].0 <= w[1].0) {
            return Err(Error::MalformedFiltration(
                "weights must be strictly decreasing".into(),
            ));
        }
        Ok(WeightedFiltration {
            steps: steps
                .into_iter()
                .map(|(weight, class)| FiltrationStep { weight, class })
                .collect(),
        })
    }

    pub fn steps(&self) -> &[FiltrationStep] {
        &self.steps
    }

    pub fn rank(&self) -> usize {
        self.steps[0].class.len()
    }

    /// Sum of the graded classes.
    pub fn total_class(&self) -> LatticeVector {
        self.steps
            .iter()
            .fold(LatticeVector::zero(self.rank()), |acc, s| &acc + &s.class)
    }
}

/// `f*ℓ = -Σ_j w_j Re Z(gr_j)`, which equals `Σ_j w_j deg(gr_j)` once `Z(v) = i`.
pub fn filtration_weight(z: &StabilityFunction, filt: &WeightedFiltration) -> Result<Rational> {
    z.require_normalized(&filt.total_class())?;
    let mut total = Rational::zero();
    for step in filt.steps() {
        total -= int(step.weight) * z.evaluate(&step.class)?.re;
    }
    Ok(total)
}

/// Lattice-level class `Σ_j u^{-w_j} [gr_j]` in `K_0(Θ × X)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormalKClass {
    rank: usize,
    /// exponent of `u` -> coefficient; zero coefficients are dropped
    terms: BTreeMap<i64, LatticeVector>,
}

impl FormalKClass {
    pub fn terms(&self) -> &BTreeMap<i64, LatticeVector> {
        &self.terms
    }

    /// The specialization `u = 1`.
    pub fn at_u_equals_one(&self) -> LatticeVector {
        self.terms
            .values()
            .fold(LatticeVector::zero(self.rank), |acc, v| &acc + v)
    }
}

pub fn k_class_of_filtration(filt: &WeightedFiltration) -> FormalKClass {
    let terms = filt
        .steps()
        .iter()
        .filter(|s| !s.class.is_zero())
        .map(|s| (-s.weight, s.class.clone()))
        .collect();
    FormalKClass {
        rank: filt.rank(),
        terms,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ThetaVerdict {
    /// `subobject` has `Re Z < 0`; the witness is `E^1 = F' ⊂ E^0 = E` with weights `1 > 0`.
    Unstable {
        subobject: usize,
        witness: WeightedFiltration,
        #[serde(with = "serde_q")]
        weight: Rational,
    },
    Semistable,
}

impl ThetaVerdict {
    pub fn is_unstable(&self) -> bool {
        matches!(self, ThetaVerdict::Unstable { .. })
    }
}

/// σ-instability of an object of class `total` against the declared subobject
/// classes, with the two-step Θ-destabilizing filtration as witness.
///
/// The subobject of most negative `Re Z` is chosen (earliest on ties); its
/// two-step filtration has the largest weight among two-step filtrations.
pub fn theta_unstable(
    z: &StabilityFunction,
    total: &LatticeVector,
    subobjects: &[LatticeVector],
) -> Result<ThetaVerdict> {
    z.require_normalized(total)?;
    let mut worst: Option<(usize, Rational)> = None;
    for (k, f) in subobjects.iter().enumerate() {
        let re = z.evaluate(f)?.re;
        if re.is_negative() && worst.as_ref().is_none_or(|(_, w)| re < *w) {
            worst = Some((k, re));
        }
    }
    let Some((k, re)) = worst else {
        return Ok(ThetaVerdict::Semistable);
    };
    let sub = subobjects[k].clone();
    let quotient = total - &sub;
    let witness = WeightedFiltration::new(vec![(1, sub), (0, quotient)])?;
    debug_assert_eq!(filtration_weight(z, &witness)?, -&re);
    Ok(ThetaVerdict::Unstable {
        subobject: k,
        witness,
        weight: -re,
    })
}

/// A polynomial with integer coefficients, constant term first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntPolynomial(pub Vec<i64>);

impl IntPolynomial {
    pub fn eval(&self, t: i64) -> Result<i128> {
        let t = t as i128;
        self.0.iter().rev().try_fold(0i128, |acc, &c| {
            acc.checked_mul(t)
                .and_then(|x| x.checked_add(c as i128))
                .ok_or(Error::Overflow)
        })
    }
}

/// `μ(x, λ) = Σ_w w · P_w(ℓ)` for the weight spaces of a one-parameter subgroup.
pub fn classical_git_weight(terms: &[(i64, IntPolynomial)], ell: i64) -> Result<i128> {
    if ell < 0 {
        return Err(Error::Precondition(format!("ℓ = {ell} must be nonnegative")));
    }
    terms.iter().try_fold(0i128, |acc, (w, p)| {
        p.eval(ell)?
            .checked_mul(*w as i128)
            .and_then(|x| x.checked_add(acc))
            .ok_or(Error::Overflow)
    })
}

/// Exponents `(-Re Z(v_1), ..., -Re Z(v_s))` of `χ_σ(g) = Π det(g_j)^{-Re Z(v_j)}`.
pub fn chi_sigma(z: &StabilityFunction, decomp: &PolystableDecomposition) -> Result<Character> {
    z.check_lattice(decomp.lattice())?;
    let exponents = decomp
        .classes()
        .map(|v| Ok(-z.evaluate(v)?.re))
        .collect::<Result<_>>()?;
    Ok(Character::new(exponents))
}
