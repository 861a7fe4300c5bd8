//! Characters of `G(n)`, the potential walls `W_α(n)` of the character space
//! `W_n = n^⊥ ⊗ Q`, and the map `Ξ` from stability functions on the slice
//! `γ(Z)(v) = 0` to characters.
//!
//! `W_n` is kept in ambient coordinates `Q^s` with the constraint `θ·n = 0`.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext_quiver::{DimensionVector, ExtQuiver, PolystableDecomposition};
use crate::gaussian::GaussianRational;
use crate::rational::{dot_int, serde_q, sign, Rational};
use crate::stability::StabilityFunction;

/// A point `θ ∈ W_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterPoint {
    #[serde(with = "serde_q::vec")]
    theta: Vec<Rational>,
    n: DimensionVector,
}

impl CharacterPoint {
    pub fn new(theta: Vec<Rational>, n: DimensionVector) -> Result<Self> {
        if theta.len() != n.len() {
            return Err(Error::DimensionMismatch {
                expected: n.len(),
                found: theta.len(),
            });
        }
        let pairing = dot_int(&theta, n.entries());
        if !pairing.is_zero() {
            return Err(Error::NotInCharacterSpace(format!("θ·n = {pairing}")));
        }
        Ok(CharacterPoint { theta, n })
    }

    pub fn origin(n: DimensionVector) -> Self {
        CharacterPoint {
            theta: vec![Rational::zero(); n.len()],
            n,
        }
    }

    pub fn theta(&self) -> &[Rational] {
        &self.theta
    }

    pub fn n(&self) -> &DimensionVector {
        &self.n
    }

    pub fn pair(&self, alpha: &DimensionVector) -> Rational {
        dot_int(&self.theta, alpha.entries())
    }
}

/// `γ(Z) = (Im(Z(v_1)/Z_0(v)), ..., Im(Z(v_s)/Z_0(v)))`.
pub fn gamma_map(
    z: &StabilityFunction,
    z0_of_v: &GaussianRational,
    decomp: &PolystableDecomposition,
) -> Result<Vec<Rational>> {
    z.check_lattice(decomp.lattice())?;
    if z0_of_v.is_zero() {
        return Err(Error::DivisionByZero);
    }
    decomp
        .classes()
        .map(|vi| Ok(z.evaluate(vi)?.checked_div(z0_of_v)?.im))
        .collect()
}

/// Membership in the slice `S = {Z : γ(Z)(v) = 0}`.
pub fn on_slice(z: &StabilityFunction, z0_of_v: &GaussianRational, decomp: &PolystableDecomposition) -> Result<bool> {
    let gamma = gamma_map(z, z0_of_v, decomp)?;
    Ok(dot_int(&gamma, decomp.multiplicities().entries()).is_zero())
}

/// `Ξ(Z) = γ(Z)` as a point of `W_n`.
pub fn xi_map(
    z: &StabilityFunction,
    z0_of_v: &GaussianRational,
    decomp: &PolystableDecomposition,
) -> Result<CharacterPoint> {
    let gamma = gamma_map(z, z0_of_v, decomp)?;
    let n = decomp.multiplicities();
    let off = dot_int(&gamma, n.entries());
    if !off.is_zero() {
        return Err(Error::OffSlice(format!("γ(Z)(v) = {off}")));
    }
    Ok(CharacterPoint { theta: gamma, n })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WallRoot {
    pub alpha: DimensionVector,
    /// Some `α_i = n_i`: the wall may bound the box rather than cut it.
    pub saturated: bool,
}

/// The hyperplane `{θ : θ·α = 0}`, keyed by its primitive normal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WallDescriptor {
    pub normal: DimensionVector,
    pub roots: Vec<WallRoot>,
    /// The normal is proportional to `n`, so `θ·α` vanishes on all of `W_n`.
    pub degenerate: bool,
}

fn primitive(alpha: &DimensionVector) -> DimensionVector {
    let g = alpha.entries().iter().fold(0u32, |g, &a| g.gcd(&a));
    if g <= 1 {
        return alpha.clone();
    }
    DimensionVector::new(alpha.entries().iter().map(|a| a / g).collect())
}

/// Walls listed by total degree of the normal, then in descending
/// lexicographic order, so `(1,0)` precedes `(0,1)`.
fn wall_order(a: &DimensionVector, b: &DimensionVector) -> std::cmp::Ordering {
    a.total().cmp(&b.total()).then_with(|| b.cmp(a))
}

/// One potential wall per positive root `α ≤ n`, multiples collapsed.
pub fn enumerate_walls(q: &ExtQuiver, n: &DimensionVector, budget: usize) -> Result<Vec<WallDescriptor>> {
    let roots = q.enumerate_positive_roots(n, budget)?;
    let n_primitive = primitive(n);
    let mut by_normal: BTreeMap<DimensionVector, Vec<WallRoot>> = BTreeMap::new();
    for alpha in roots {
        let saturated = alpha.entries().iter().zip(n.entries()).any(|(a, m)| a == m && *a > 0);
        by_normal.entry(primitive(&alpha)).or_default().push(WallRoot { alpha, saturated });
    }
    let mut walls: Vec<WallDescriptor> = by_normal
        .into_iter()
        .map(|(normal, mut roots)| {
            roots.sort_by(|a, b| wall_order(&a.alpha, &b.alpha));
            WallDescriptor {
                degenerate: normal == n_primitive,
                normal,
                roots,
            }
        })
        .collect();
    walls.sort_by(|a, b| wall_order(&a.normal, &b.normal));
    Ok(walls)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChamberEntry {
    pub normal: DimensionVector,
    pub sign: i8,
}

/// Signs of `θ·α` on the non-degenerate walls, in wall order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChamberSignature {
    pub entries: Vec<ChamberEntry>,
    pub signs: String,
    pub open_chamber: bool,
}

impl ChamberSignature {
    pub fn is_open_chamber(&self) -> bool {
        self.open_chamber
    }
}

pub fn locate_chamber(theta: &CharacterPoint, walls: &[WallDescriptor]) -> ChamberSignature {
    let entries: Vec<ChamberEntry> = walls
        .iter()
        .filter(|w| !w.degenerate)
        .map(|w| ChamberEntry {
            normal: w.normal.clone(),
            sign: sign(&theta.pair(&w.normal)),
        })
        .collect();
    let signs = entries
        .iter()
        .map(|e| match e.sign {
            1 => '+',
            -1 => '-',
            _ => '0',
        })
        .collect();
    let open_chamber = entries.iter().all(|e| e.sign != 0);
    ChamberSignature {
        entries,
        signs,
        open_chamber,
    }
}

/// `γ(Z)(w_α) = 0 ⟺ Ξ(Z)·α = 0` for every sample, with `w_α = Σ α_i v_i`
/// evaluated on the lattice side.
pub fn wall_correspondence_check(
    alpha: &DimensionVector,
    samples: &[StabilityFunction],
    z0_of_v: &GaussianRational,
    decomp: &PolystableDecomposition,
) -> Result<bool> {
    if alpha.len() != decomp.len() {
        return Err(Error::DimensionMismatch {
            expected: decomp.len(),
            found: alpha.len(),
        });
    }
    let w_alpha = decomp.combination(alpha);
    for z in samples {
        let theta = xi_map(z, z0_of_v, decomp)?;
        let lattice_side = z.evaluate(&w_alpha)?.checked_div(z0_of_v)?.im;
        if lattice_side.is_zero() != theta.pair(alpha).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `θ·α` has the same strict sign for every `α` on the segment; used
/// to test that equal signatures mean no wall is crossed.
pub fn segment_crosses_wall(a: &CharacterPoint, b: &CharacterPoint, walls: &[WallDescriptor]) -> bool {
    walls.iter().filter(|w| !w.degenerate).any(|w| {
        let (x, y) = (a.pair(&w.normal), b.pair(&w.normal));
        x.is_zero() || y.is_zero() || x.is_positive() != y.is_positive()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ext_quiver::{build_ext_quiver, Summand};
    use crate::lattice::{GramLattice, LatticeVector};
    use crate::rational::{int, rat};
    use crate::stability::chi_sigma;
    use proptest::prelude::*;

    fn dv(v: &[u32]) -> DimensionVector {
        DimensionVector::new(v.to_vec())
    }

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn gi(re: i64, im: i64) -> GaussianRational {
        GaussianRational::from_ints(re, im)
    }

    fn affine_a1_decomp(n: [u32; 2]) -> PolystableDecomposition {
        let l = GramLattice::new(vec![vec![-2, 2], vec![2, -2]]).unwrap();
        PolystableDecomposition::new(
            l,
            vec![
                Summand { class: LatticeVector::new(vec![1, 0]), multiplicity: n[0] },
                Summand { class: LatticeVector::new(vec![0, 1]), multiplicity: n[1] },
            ],
        )
        .unwrap()
    }

    #[test]
    fn gamma_examples() {
        let d = affine_a1_decomp([1, 1]);
        // Z0 with both summands at the phase of v
        let z0 = StabilityFunction::new(vec![gi(0, 1), gi(0, 1)]);
        let z0v = gi(0, 2);
        assert_eq!(gamma_map(&z0, &z0v, &d).unwrap(), q(&[0, 0]));
        let z = StabilityFunction::new(vec![gi(1, 1), gi(-1, 1)]);
        assert_eq!(gamma_map(&z, &gi(0, 1), &d).unwrap(), q(&[-1, 1]));
        let scaled = z.scale(&GaussianRational::real(int(3)));
        assert_eq!(gamma_map(&scaled, &gi(0, 1), &d).unwrap(), q(&[-3, 3]));
        assert_eq!(gamma_map(&z, &gi(0, 0), &d), Err(Error::DivisionByZero));
    }

    #[test]
    fn slice_and_xi_examples() {
        let d = affine_a1_decomp([1, 1]);
        let z0 = StabilityFunction::new(vec![gi(0, 1), gi(0, 1)]);
        assert!(on_slice(&z0, &gi(0, 2), &d).unwrap());
        assert_eq!(xi_map(&z0, &gi(0, 2), &d).unwrap(), CharacterPoint::origin(dv(&[1, 1])));
        let z = StabilityFunction::new(vec![gi(1, 1), gi(-1, 1)]);
        assert!(on_slice(&z, &gi(0, 1), &d).unwrap());
        assert_eq!(xi_map(&z, &gi(0, 1), &d).unwrap().theta(), &q(&[-1, 1])[..]);
        let off = StabilityFunction::new(vec![gi(-1, 1), gi(0, 1)]);
        assert!(!on_slice(&off, &gi(0, 1), &d).unwrap());
        assert!(matches!(xi_map(&off, &gi(0, 1), &d), Err(Error::OffSlice(_))));
    }

    #[test]
    fn character_point_rejects_off_wn() {
        assert!(CharacterPoint::new(q(&[1, 0]), dv(&[1, 1])).is_err());
        assert!(CharacterPoint::new(q(&[2, -1]), dv(&[1, 2])).is_ok());
    }

    #[test]
    fn affine_a1_walls() {
        let quiver = ExtQuiver::new(vec![0, 0], &[(0, 1, 2)]).unwrap();
        let walls = enumerate_walls(&quiver, &dv(&[1, 1]), 100).unwrap();
        let normals: Vec<_> = walls.iter().map(|w| w.normal.clone()).collect();
        assert_eq!(normals, vec![dv(&[1, 0]), dv(&[0, 1]), dv(&[1, 1])]);
        assert_eq!(walls.iter().map(|w| w.degenerate).collect::<Vec<_>>(), vec![false, false, true]);
        let theta = CharacterPoint::new(q(&[1, -1]), dv(&[1, 1])).unwrap();
        let sig = locate_chamber(&theta, &walls);
        assert_eq!(sig.signs, "+-");
        assert!(sig.is_open_chamber());
        let neg = CharacterPoint::new(q(&[-1, 1]), dv(&[1, 1])).unwrap();
        assert_eq!(locate_chamber(&neg, &walls).signs, "-+");
        let origin = locate_chamber(&CharacterPoint::origin(dv(&[1, 1])), &walls);
        assert_eq!(origin.signs, "00");
        assert!(!origin.is_open_chamber());
    }

    #[test]
    fn single_vertex_wall_is_degenerate() {
        let quiver = ExtQuiver::new(vec![1], &[]).unwrap();
        let walls = enumerate_walls(&quiver, &dv(&[1]), 10).unwrap();
        assert_eq!(walls.len(), 1);
        assert!(walls[0].degenerate);
        assert!(walls[0].roots[0].saturated);
    }

    #[test]
    fn multiples_collapse_and_disconnected_supports_drop() {
        let quiver = ExtQuiver::new(vec![1, 0, 0], &[(0, 1, 1)]).unwrap();
        let walls = enumerate_walls(&quiver, &dv(&[2, 1, 1]), 100).unwrap();
        let jordan = walls.iter().find(|w| w.normal == dv(&[1, 0, 0])).unwrap();
        assert_eq!(jordan.roots.iter().map(|r| r.alpha.clone()).collect::<Vec<_>>(), vec![dv(&[1, 0, 0]), dv(&[2, 0, 0])]);
        assert!(walls.iter().all(|w| w.normal.entries()[2] == 0 || w.normal == dv(&[0, 0, 1])));
    }

    #[test]
    fn correspondence_on_samples() {
        let d = affine_a1_decomp([1, 1]);
        let samples = vec![
            StabilityFunction::new(vec![gi(1, 1), gi(-1, 1)]),
            StabilityFunction::new(vec![gi(0, 1), gi(0, 1)]),
            StabilityFunction::new(vec![GaussianRational::new(rat(1, 2), int(1)), GaussianRational::new(rat(-1, 2), int(3))]),
        ];
        for alpha in [dv(&[1, 0]), dv(&[0, 1]), dv(&[1, 1])] {
            assert!(wall_correspondence_check(&alpha, &samples, &gi(0, 1), &d).unwrap());
        }
    }

    fn slice_z(re: &[i64], im: &[i64], n: &[u32]) -> Option<StabilityFunction> {
        // forces Σ n_i Re Z(v_i) = 0 by adjusting the last coordinate
        let last = *n.last()? as i64;
        let mut re = re.to_vec();
        let head: i64 = re.iter().zip(n).take(re.len() - 1).map(|(a, &m)| a * m as i64).sum();
        if head % last != 0 {
            return None;
        }
        *re.last_mut()? = -head / last;
        Some(StabilityFunction::new(re.iter().zip(im).map(|(&a, &b)| gi(a, b)).collect()))
    }

    fn decomp_strategy() -> impl Strategy<Value = PolystableDecomposition> {
        (2usize..=4)
            .prop_flat_map(|s| (Just(s), prop::collection::vec(0i64..=2, s * (s - 1) / 2), prop::collection::vec(1u32..=3, s)))
            .prop_map(|(s, upper, n)| {
                let mut gram = vec![vec![0i64; s]; s];
                let mut k = 0;
                for i in 0..s {
                    gram[i][i] = -2;
                    for j in i + 1..s {
                        gram[i][j] = upper[k];
                        gram[j][i] = upper[k];
                        k += 1;
                    }
                }
                let l = GramLattice::new(gram).unwrap();
                let summands = (0..s)
                    .map(|i| Summand { class: LatticeVector::basis(s, i), multiplicity: n[i] })
                    .collect();
                PolystableDecomposition::new(l, summands).unwrap()
            })
    }

    proptest! {
        #[test]
        fn xi_lands_in_wn_and_matches_chi_sigma(
            d in decomp_strategy(),
            re in prop::collection::vec(-6i64..=6, 4),
            im in prop::collection::vec(1i64..=6, 4),
        ) {
            let s = d.len();
            let n = d.multiplicities();
            let z = slice_z(&re[..s], &im[..s], n.entries());
            prop_assume!(z.is_some());
            let z = z.unwrap();
            let xi = xi_map(&z, &GaussianRational::i(), &d).unwrap();
            prop_assert!(xi.pair(&n).is_zero());
            prop_assert_eq!(chi_sigma(&z, &d).unwrap().exponents, xi.theta().to_vec());
        }

        #[test]
        fn xi_is_additive(
            d in decomp_strategy(),
            a in prop::collection::vec(-6i64..=6, 4),
            b in prop::collection::vec(-6i64..=6, 4),
            im in prop::collection::vec(1i64..=6, 4),
        ) {
            let s = d.len();
            let n = d.multiplicities();
            let (Some(z1), Some(z2)) = (slice_z(&a[..s], &im[..s], n.entries()), slice_z(&b[..s], &im[..s], n.entries())) else {
                return Ok(());
            };
            let z0v = gi(1, 2);
            prop_assume!(on_slice(&z1, &z0v, &d).unwrap() && on_slice(&z2, &z0v, &d).unwrap());
            let sum = z1.add(&z2).unwrap();
            let lhs = xi_map(&sum, &z0v, &d).unwrap();
            let (x1, x2) = (xi_map(&z1, &z0v, &d).unwrap(), xi_map(&z2, &z0v, &d).unwrap());
            let rhs: Vec<Rational> = x1.theta().iter().zip(x2.theta()).map(|(p, q)| p + q).collect();
            prop_assert_eq!(lhs.theta().to_vec(), rhs);
        }

        #[test]
        fn wall_count_is_relabeling_invariant(d in decomp_strategy(), rot in 0usize..4) {
            let quiver = build_ext_quiver(&d);
            let n = d.multiplicities();
            let walls = enumerate_walls(&quiver, &n, 10_000).unwrap();
            let s = d.len();
            let perm: Vec<usize> = (0..s).map(|i| (i + rot) % s).collect();
            let permuted = d.restrict(&perm).unwrap();
            let pwalls = enumerate_walls(&build_ext_quiver(&permuted), &permuted.multiplicities(), 10_000).unwrap();
            prop_assert_eq!(walls.len(), pwalls.len());
            let mut mapped: Vec<Vec<u32>> = pwalls
                .iter()
                .map(|w| {
                    let mut back = vec![0; s];
                    for (k, &i) in perm.iter().enumerate() {
                        back[i] = w.normal.entries()[k];
                    }
                    back
                })
                .collect();
            let mut original: Vec<Vec<u32>> = walls.iter().map(|w| w.normal.entries().to_vec()).collect();
            mapped.sort();
            original.sort();
            prop_assert_eq!(mapped, original);
        }

        #[test]
        fn equal_signatures_cross_no_wall(
            d in decomp_strategy(),
            a in prop::collection::vec(-5i64..=5, 4),
            b in prop::collection::vec(-5i64..=5, 4),
        ) {
            let s = d.len();
            let n = d.multiplicities();
            let project = |t: &[i64]| {
                let mut theta: Vec<Rational> = t[..s].iter().map(|&x| int(x)).collect();
                let off = dot_int(&theta, n.entries());
                theta[s - 1] -= off / int(n.entries()[s - 1] as i64);
                CharacterPoint::new(theta, n.clone()).unwrap()
            };
            let (ta, tb) = (project(&a), project(&b));
            let walls = enumerate_walls(&build_ext_quiver(&d), &n, 10_000).unwrap();
            let (sa, sb) = (locate_chamber(&ta, &walls), locate_chamber(&tb, &walls));
            if sa == sb && sa.is_open_chamber() {
                prop_assert!(!segment_crosses_wall(&ta, &tb, &walls));
                for k in 1..4 {
                    let t = rat(k, 4);
                    let mid: Vec<Rational> = ta.theta().iter().zip(tb.theta()).map(|(x, y)| x * (int(1) - &t) + y * &t).collect();
                    let mid = CharacterPoint::new(mid, n.clone()).unwrap();
                    prop_assert_eq!(&locate_chamber(&mid, &walls), &sa);
                }
            }
            let neg: Vec<Rational> = ta.theta().iter().map(|x| -x).collect();
            let sn = locate_chamber(&CharacterPoint::new(neg, n.clone()).unwrap(), &walls);
            for (x, y) in sa.entries.iter().zip(&sn.entries) {
                prop_assert_eq!(x.sign, -y.sign);
            }
        }
    }
}
