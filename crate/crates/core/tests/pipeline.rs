use bridgeland_local::ext_quiver::{build_ext_quiver, PolystableDecomposition, Summand};
use bridgeland_local::gaussian::GaussianRational;
use bridgeland_local::lattice::{GramLattice, LatticeVector};
use bridgeland_local::stability::{chi_sigma, StabilityFunction};
use bridgeland_local::wall_analysis::{analyze_stratum, product_shape, simple_near_stable_bridge, ProductFactor, StratumVerdict};
use bridgeland_local::walls::{enumerate_walls, locate_chamber, on_slice, xi_map};

fn lv(c: &[i64]) -> LatticeVector {
    LatticeVector::new(c.to_vec())
}

fn w_plus_s() -> PolystableDecomposition {
    let lattice = GramLattice::new(vec![vec![2, 1], vec![1, -2]]).unwrap();
    let summands = vec![
        Summand { class: lv(&[1, 0]), multiplicity: 1 },
        Summand { class: lv(&[0, 1]), multiplicity: 1 },
    ];
    PolystableDecomposition::new(lattice, summands).unwrap()
}

#[test]
fn from_decomposition_to_chamber_and_stratum() {
    let d = w_plus_s();
    let q = build_ext_quiver(&d);
    let n = d.multiplicities();
    assert_eq!(q.expected_dim(&n).unwrap(), 4);

    let z = StabilityFunction::new(vec![GaussianRational::from_ints(1, 1), GaussianRational::from_ints(-1, 0)]);
    let z0v = GaussianRational::i();
    assert!(on_slice(&z, &z0v, &d).unwrap());
    let xi = xi_map(&z, &z0v, &d).unwrap();
    assert_eq!(chi_sigma(&z, &d).unwrap().exponents, xi.theta());

    let walls = enumerate_walls(&q, &n, 1000).unwrap();
    let chamber = locate_chamber(&xi, &walls);
    assert_eq!(chamber.signs, "-+");
    assert!(chamber.is_open_chamber());

    let report = analyze_stratum(&d).unwrap();
    assert!(matches!(report.verdict, StratumVerdict::TotallySemistableShape { .. }));
    assert_eq!(
        product_shape(&report).unwrap(),
        vec![
            ProductFactor::PositiveFactor { class: lv(&[1, 0]) },
            ProductFactor::SphericalPoint { class: lv(&[0, 1]) },
        ]
    );
    assert!(!simple_near_stable_bridge(&d, 1000).unwrap());
}

#[test]
fn merging_pair_has_a_simple_representation() {
    let lattice = GramLattice::new(vec![vec![-2, 2], vec![2, -2]]).unwrap();
    let d = PolystableDecomposition::new(
        lattice,
        vec![
            Summand { class: lv(&[1, 0]), multiplicity: 1 },
            Summand { class: lv(&[0, 1]), multiplicity: 1 },
        ],
    )
    .unwrap();
    assert!(simple_near_stable_bridge(&d, 1000).unwrap());
    assert!(analyze_stratum(&d).is_err());
}
