use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::rational::{clear_denominators, int, serde_q, Rational};

/// Exponent vector `(e_1, ..., e_s)` of the character `g -> prod det(g_i)^{e_i}` of `prod GL(n_i)`.
///
/// Bridgeland-side characters may carry rational exponents; a positive multiple of
/// one is a genuine character, see [`Character::integral_multiple`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Character {
    #[serde(with = "serde_q::vec")]
    pub exponents: Vec<Rational>,
}

impl Character {
    pub fn new(exponents: Vec<Rational>) -> Self {
        Character { exponents }
    }

    pub fn from_integers(theta: &[i64]) -> Self {
        Character::new(theta.iter().map(|&t| int(t)).collect())
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(num_traits::Zero::is_zero)
    }

    /// Smallest positive `k` with `k·e` integral, together with `k·e`.
    pub fn integral_multiple(&self) -> (BigInt, Vec<BigInt>) {
        clear_denominators(&self.exponents)
    }
}
