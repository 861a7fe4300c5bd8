//! Integral lattices with a symmetric pairing.
//!
//! A [`GramLattice`] stands in for the numerical Grothendieck group with its
//! Mukai pairing; a [`LatticeVector`] is an integer class in it. Nothing here
//! touches floating point: the signature is obtained by congruence reduction
//! over the rationals.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(Vec<i64>);

impl LatticeVector {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticeVector(coords)
    }

    pub fn zero(rank: usize) -> Self {
        LatticeVector(vec![0; rank])
    }

    pub fn basis(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        LatticeVector(v)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn scaled(&self, k: i64) -> Self {
        LatticeVector(self.0.iter().map(|c| c * k).collect())
    }
}

impl From<Vec<i64>> for LatticeVector {
    fn from(v: Vec<i64>) -> Self {
        LatticeVector(v)
    }
}

impl Add for &LatticeVector {
    type Output = LatticeVector;
    fn add(self, rhs: &LatticeVector) -> LatticeVector {
        assert_eq!(self.len(), rhs.len(), "adding vectors of different rank");
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticeVector {
    type Output = LatticeVector;
    fn sub(self, rhs: &LatticeVector) -> LatticeVector {
        assert_eq!(self.len(), rhs.len(), "subtracting vectors of different rank");
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        self.scaled(-1)
    }
}

impl Mul<&LatticeVector> for i64 {
    type Output = LatticeVector;
    fn mul(self, rhs: &LatticeVector) -> LatticeVector {
        rhs.scaled(self)
    }
}

/// Coarse type of a class by its square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Spherical,
    Isotropic,
    Positive,
    OtherNegative,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Signature {
    pub fn is_hyperbolic_plane(&self) -> bool {
        self.positive == 1 && self.negative == 1 && self.zero == 0
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.positive, self.negative, self.zero)
    }
}

#[derive(Deserialize)]
struct RawLattice {
    gram: Vec<Vec<i64>>,
    #[serde(default)]
    even: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLattice")]
pub struct GramLattice {
    gram: Vec<Vec<i64>>,
    even: bool,
}

impl TryFrom<RawLattice> for GramLattice {
    type Error = Error;
    fn try_from(raw: RawLattice) -> Result<Self> {
        if raw.even {
            GramLattice::new_even(raw.gram)
        } else {
            GramLattice::new(raw.gram)
        }
    }
}

impl GramLattice {
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self> {
        let rank = gram.len();
        if rank == 0 || gram.iter().any(|row| row.len() != rank) {
            return Err(Error::MalformedGram);
        }
        for i in 0..rank {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(GramLattice { gram, even: false })
    }

    /// Like [`GramLattice::new`], additionally requiring an even diagonal.
    pub fn new_even(gram: Vec<Vec<i64>>) -> Result<Self> {
        let mut lattice = Self::new(gram)?;
        if let Some(i) = (0..lattice.rank()).find(|&i| lattice.gram[i][i] % 2 != 0) {
            return Err(Error::OddDiagonal(i));
        }
        lattice.even = true;
        Ok(lattice)
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn check(&self, v: &LatticeVector) -> Result<()> {
        if v.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: v.len(),
            });
        }
        Ok(())
    }

    pub fn vector(&self, coords: Vec<i64>) -> Result<LatticeVector> {
        let v = LatticeVector(coords);
        self.check(&v)?;
        Ok(v)
    }

    /// `a^T G b`.
    pub fn pair(&self, a: &LatticeVector, b: &LatticeVector) -> Result<i64> {
        self.check(a)?;
        self.check(b)?;
        let mut total = 0i64;
        for (i, &ai) in a.coords().iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let row: i64 = self.gram[i]
                .iter()
                .zip(b.coords())
                .map(|(g, bj)| g * bj)
                .sum();
            total += ai * row;
        }
        Ok(total)
    }

    pub fn square(&self, v: &LatticeVector) -> Result<i64> {
        self.pair(v, v)
    }

    pub fn classify(&self, v: &LatticeVector) -> Result<ClassKind> {
        let sq = self.square(v)?;
        Ok(if v.is_zero() {
            ClassKind::Zero
        } else if sq == -2 {
            ClassKind::Spherical
        } else if sq == 0 {
            ClassKind::Isotropic
        } else if sq > 0 {
            ClassKind::Positive
        } else {
            ClassKind::OtherNegative
        })
    }

    /// Inertia of the form, by symmetric Gaussian elimination over the rationals.
    pub fn signature(&self) -> Signature {
        let diagonal = congruence_diagonal(&self.gram);
        let positive = diagonal.iter().filter(|d| d.is_positive()).count();
        let negative = diagonal.iter().filter(|d| d.is_negative()).count();
        Signature {
            positive,
            negative,
            zero: self.rank() - positive - negative,
        }
    }

    /// First nonzero `v` with `v^2 = 0` in the box `[-bound, bound]^rank`, in [`box_vectors`] order.
    pub fn find_isotropic(&self, bound: u32) -> Option<LatticeVector> {
        box_vectors(self.rank(), bound).find(|v| self.square(v) == Ok(0))
    }

    /// Gram matrix of the sublattice spanned by `basis`.
    pub fn restrict(&self, basis: &[LatticeVector]) -> Result<GramLattice> {
        let mut gram = vec![vec![0; basis.len()]; basis.len()];
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                gram[i][j] = self.pair(a, b)?;
            }
        }
        let mut sub = GramLattice::new(gram)?;
        sub.even = self.even;
        Ok(sub)
    }
}

/// Diagonal of a form congruent to `gram`.
fn congruence_diagonal(gram: &[Vec<i64>]) -> Vec<Rational> {
    let n = gram.len();
    let mut a: Vec<Vec<Rational>> = gram
        .iter()
        .map(|row| row.iter().map(|&x| int(x)).collect())
        .collect();
    let mut diagonal = Vec::with_capacity(n);
    for k in 0..n {
        let pivot = (k..n).find(|&i| !a[i][i].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => {
                // zero diagonal: fold a partner row into a row with a nonzero off-diagonal entry
                let found = (k..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !a[i][j].is_zero());
                let Some((i, j)) = found else {
                    diagonal.extend(std::iter::repeat_n(Rational::zero(), n - k));
                    return diagonal;
                };
                for c in 0..n {
                    let t = a[j][c].clone();
                    a[i][c] += t;
                }
                for r in 0..n {
                    let t = a[r][j].clone();
                    a[r][i] += t;
                }
                i
            }
        };
        a.swap(k, pivot);
        for row in a.iter_mut() {
            row.swap(k, pivot);
        }
        let p = a[k][k].clone();
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &p;
            for c in k..n {
                let t = &f * &a[k][c];
                a[i][c] -= t;
            }
            for r in k..n {
                let t = &f * &a[r][k];
                a[r][i] -= t;
            }
        }
        diagonal.push(p);
    }
    diagonal
}

/// Nonzero integer vectors of the box `[-bound, bound]^rank`, shell by shell in the
/// max-norm, each shell in descending lexicographic order.
pub fn box_vectors(rank: usize, bound: u32) -> impl Iterator<Item = LatticeVector> {
    let bound = bound as i64;
    (1..=bound).flat_map(move |r| {
        let side = (2 * r + 1) as u64;
        let total = side.pow(rank as u32);
        (0..total).filter_map(move |mut idx| {
            let mut coords = vec![0i64; rank];
            for c in coords.iter_mut().rev() {
                *c = r - (idx % side) as i64;
                idx /= side;
            }
            if coords.iter().any(|c| c.abs() == r) {
                Some(LatticeVector(coords))
            } else {
                None
            }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hyperbolic() -> GramLattice {
        GramLattice::new(vec![vec![0, 1], vec![1, 0]]).unwrap()
    }

    fn mukai_style() -> GramLattice {
        GramLattice::new(vec![vec![0, 0, -1], vec![0, 2, 0], vec![-1, 0, 0]]).unwrap()
    }

    #[test]
    fn pairing_examples() {
        let h = hyperbolic();
        let a = h.vector(vec![1, 0]).unwrap();
        let b = h.vector(vec![0, 1]).unwrap();
        assert_eq!(h.pair(&a, &b), Ok(1));
        let c = h.vector(vec![1, 1]).unwrap();
        assert_eq!(h.pair(&c, &c), Ok(2));
        let m = mukai_style();
        let v = m.vector(vec![1, 0, 1]).unwrap();
        assert_eq!(m.pair(&v, &v), Ok(-2));
    }

    #[test]
    fn pairing_rejects_wrong_rank() {
        let h = hyperbolic();
        let bad = LatticeVector::new(vec![1, 0, 0]);
        assert_eq!(
            h.pair(&bad, &bad),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        );
        assert!(h.vector(vec![1]).is_err());
    }

    #[test]
    fn square_examples() {
        let m = mukai_style();
        assert_eq!(m.square(&LatticeVector::new(vec![1, 0, -1])), Ok(2));
        assert_eq!(m.square(&LatticeVector::zero(3)), Ok(0));
        assert_eq!(m.square(&LatticeVector::new(vec![1, 0, 1])), Ok(-2));
    }

    #[test]
    fn classify_examples() {
        let m = mukai_style();
        assert_eq!(m.classify(&LatticeVector::new(vec![1, 0, 1])), Ok(ClassKind::Spherical));
        assert_eq!(m.classify(&LatticeVector::zero(3)), Ok(ClassKind::Zero));
        // (1,1,-2): 2 - 2*(1)(-2) = 6
        assert_eq!(m.classify(&LatticeVector::new(vec![1, 1, -2])), Ok(ClassKind::Positive));
        assert_eq!(m.classify(&LatticeVector::new(vec![1, 0, 0])), Ok(ClassKind::Isotropic));
        // (2,0,1): -2*2 = -4
        assert_eq!(
            m.classify(&LatticeVector::new(vec![2, 0, 1])),
            Ok(ClassKind::OtherNegative)
        );
    }

    #[test]
    fn signature_examples() {
        let sig = |g: Vec<Vec<i64>>| GramLattice::new(g).unwrap().signature();
        assert_eq!(sig(vec![vec![0, 1], vec![1, 0]]), Signature { positive: 1, negative: 1, zero: 0 });
        assert_eq!(sig(vec![vec![2]]), Signature { positive: 1, negative: 0, zero: 0 });
        assert_eq!(sig(vec![vec![-2, 0], vec![0, 2]]), Signature { positive: 1, negative: 1, zero: 0 });
        assert_eq!(sig(vec![vec![0, 0], vec![0, 0]]), Signature { positive: 0, negative: 0, zero: 2 });
        // U + <0>: degenerate direction survives the zero-diagonal fold
        assert_eq!(
            sig(vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 0]]),
            Signature { positive: 1, negative: 1, zero: 1 }
        );
        assert_eq!(mukai_style().signature(), Signature { positive: 2, negative: 1, zero: 0 });
    }

    #[test]
    fn isotropic_examples() {
        let h = hyperbolic();
        let w = h.find_isotropic(1).unwrap();
        assert!(!w.is_zero());
        assert_eq!(h.square(&w), Ok(0));
        assert_eq!(GramLattice::new(vec![vec![2]]).unwrap().find_isotropic(10), None);
        let l = GramLattice::new(vec![vec![-2, 0], vec![0, 2]]).unwrap();
        assert_eq!(l.find_isotropic(2), Some(LatticeVector::new(vec![1, 1])));
    }

    #[test]
    fn even_flag_is_checked() {
        assert_eq!(GramLattice::new_even(vec![vec![1]]), Err(Error::OddDiagonal(0)));
        assert!(GramLattice::new(vec![vec![0, 1], vec![2, 0]]).is_err());
        assert!(GramLattice::new(vec![]).is_err());
    }

    #[test]
    fn box_order_is_shelled() {
        let all: Vec<_> = box_vectors(2, 2).collect();
        assert_eq!(all.len(), 24);
        assert_eq!(all[0], LatticeVector::new(vec![1, 1]));
        assert_eq!(all[7], LatticeVector::new(vec![-1, -1]));
        assert!(all[8..].iter().all(|v| v.coords().iter().any(|c| c.abs() == 2)));
    }

    fn sym_gram(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
        proptest::collection::vec(-4i64..=4, n * n).prop_map(move |flat| {
            let mut g = vec![vec![0; n]; n];
            for i in 0..n {
                for j in 0..=i {
                    g[i][j] = flat[i * n + j];
                    g[j][i] = flat[i * n + j];
                }
            }
            g
        })
    }

    fn vec_of(n: usize) -> impl Strategy<Value = LatticeVector> {
        proptest::collection::vec(-9i64..=9, n).prop_map(LatticeVector::new)
    }

    /// Random unimodular matrix as a product of elementary row operations.
    fn unimodular(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
        proptest::collection::vec((0..n, 0..n, -2i64..=2, any::<bool>()), 0..8).prop_map(move |ops| {
            let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
            for (i, j, k, swap) in ops {
                if swap {
                    u.swap(i, j);
                } else if i != j {
                    for c in 0..n {
                        u[i][c] += k * u[j][c];
                    }
                }
            }
            u
        })
    }

    proptest! {
        #[test]
        fn pairing_is_symmetric_and_bilinear(g in sym_gram(4), a in vec_of(4), b in vec_of(4), c in vec_of(4)) {
            let l = GramLattice::new(g).unwrap();
            prop_assert_eq!(l.pair(&a, &b), l.pair(&b, &a));
            let ab = &a + &b;
            prop_assert_eq!(l.pair(&ab, &c).unwrap(), l.pair(&a, &c).unwrap() + l.pair(&b, &c).unwrap());
        }

        #[test]
        fn even_lattices_have_even_squares(g in sym_gram(3), v in vec_of(3)) {
            let mut g = g;
            for (i, row) in g.iter_mut().enumerate() {
                row[i] *= 2;
            }
            let l = GramLattice::new_even(g).unwrap();
            prop_assert_eq!(l.square(&v).unwrap().rem_euclid(2), 0);
        }

        #[test]
        fn signature_is_a_congruence_invariant(g in sym_gram(4), u in unimodular(4)) {
            let l = GramLattice::new(g).unwrap();
            let sig = l.signature();
            prop_assert_eq!(sig.positive + sig.negative + sig.zero, 4);
            let basis: Vec<LatticeVector> = u.into_iter().map(LatticeVector::new).collect();
            let moved = l.restrict(&basis).unwrap();
            prop_assert_eq!(moved.signature(), sig);
        }

        #[test]
        fn isotropic_search_is_sound_and_exhaustive(g in sym_gram(3), bound in 1u32..=2) {
            let l = GramLattice::new(g).unwrap();
            match l.find_isotropic(bound) {
                Some(w) => {
                    prop_assert!(!w.is_zero());
                    prop_assert_eq!(l.square(&w), Ok(0));
                }
                None => {
                    let b = bound as i64;
                    for x in -b..=b { for y in -b..=b { for z in -b..=b {
                        let v = LatticeVector::new(vec![x, y, z]);
                        prop_assert!(v.is_zero() || l.square(&v) != Ok(0));
                    }}}
                }
            }
        }
    }
}
