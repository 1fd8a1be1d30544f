//! Independent routes for the load-bearing formulas, plus property tests.

use proptest::prelude::*;

use sodatlas::arithmetic::{dam_order, is_rational_profile, is_rich_profile, same_nontrivial_atoms, AtomProfile};
use sodatlas::equivariant::{
    burnside_invariant, h1_cyclic, h1_module, invariant_rank, reflection, BirationalStep, GroupAction, MatrixGroup,
    TransitiveGSet,
};
use sodatlas::ktheory::{euler_pairing, line_bundle_class, serre_class};
use sodatlas::lattice::{enumerate_r_classes, Base};
use sodatlas::mutation::{apply_move, collections_equal, EqualityMode, Move};
use sodatlas::selftest::{beilinson, rich_standard_spaces};
use sodatlas::{DivisorClass, IntMatrix, KClass, SurfaceModel};

/// Intersection form written out from the blow-up description.
fn form(base: Base, n: usize) -> Vec<Vec<i64>> {
    let (head, b): (Vec<Vec<i64>>, usize) = match base {
        Base::ProjectivePlane => (vec![vec![1]], 1),
        Base::Hirzebruch(d) => (vec![vec![-(d as i64), 1], vec![1, 0]], 2),
    };
    let mut m = vec![vec![0; b + n]; b + n];
    for i in 0..b {
        for j in 0..b {
            m[i][j] = head[i][j];
        }
    }
    for i in 0..n {
        m[b + i][b + i] = -1;
    }
    m
}

fn anticanonical(base: Base, n: usize) -> Vec<i64> {
    let mut v = match base {
        Base::ProjectivePlane => vec![3],
        Base::Hirzebruch(d) => vec![2, d as i64 + 2],
    };
    v.extend(std::iter::repeat_n(-1, n));
    v
}

fn dot(m: &[Vec<i64>], a: &[i64], b: &[i64]) -> i64 {
    let mut s = 0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            s += a[i] * m[i][j] * b[j];
        }
    }
    s
}

/// χ(a, b) = ∫ ch(a)^∨ · ch(b) · td, with td = 1 + c1/2 + pt and
/// ch2 recovered from χ by Riemann–Roch; everything doubled to stay in Z.
fn chern_route(base: Base, n: usize, a: &KClass, b: &KClass) -> i64 {
    let m = form(base, n);
    let c1 = anticanonical(base, n);
    // 2 ch2 = 2χ - 2r - c1(X)·c1.
    let ch2x2 = |k: &KClass| 2 * k.chi - 2 * k.rank - dot(&m, &c1, &k.c1.0);
    let deg0 = a.rank * b.rank;
    let deg1: Vec<i64> = a.c1.0.iter().zip(&b.c1.0).map(|(x, y)| a.rank * y - b.rank * x).collect();
    let deg2x2 = a.rank * ch2x2(b) + b.rank * ch2x2(a) - 2 * dot(&m, &a.c1.0, &b.c1.0);
    let total_x2 = 2 * deg0 + dot(&m, &deg1, &c1) + deg2x2;
    assert_eq!(total_x2 % 2, 0);
    total_x2 / 2
}

fn models() -> Vec<(Base, usize)> {
    let mut v: Vec<(Base, usize)> = (0..=8).map(|n| (Base::ProjectivePlane, n)).collect();
    v.extend([(Base::Hirzebruch(0), 0), (Base::Hirzebruch(1), 2), (Base::Hirzebruch(0), 5), (Base::Hirzebruch(2), 1)]);
    v
}

fn model(base: Base, n: usize) -> SurfaceModel {
    SurfaceModel::new(base, if n == 0 { vec![] } else { vec![n] }).unwrap()
}

fn class_strategy(dim: usize) -> impl Strategy<Value = KClass> {
    (-4i64..=4, proptest::collection::vec(-6i64..=6, dim), -20i64..=20).prop_map(|(r, c, x)| KClass::new(r, DivisorClass(c), x))
}

fn model_and_pair() -> impl Strategy<Value = ((Base, usize), KClass, KClass)> {
    proptest::sample::select(models()).prop_flat_map(|(b, n)| {
        let dim = model(b, n).picard_rank();
        (Just((b, n)), class_strategy(dim), class_strategy(dim))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pairing_matches_chern_character_route(((b, n), x, y) in model_and_pair()) {
        let s = model(b, n);
        prop_assert_eq!(euler_pairing(&s, &x, &y), chern_route(b, n, &x, &y));
    }

    #[test]
    fn serre_duality(((b, n), x, y) in model_and_pair()) {
        let s = model(b, n);
        prop_assert_eq!(euler_pairing(&s, &x, &y), euler_pairing(&s, &y, &serre_class(&s, &x)));
    }

    #[test]
    fn line_bundle_pairing(((b, n), x, y) in model_and_pair()) {
        let s = model(b, n);
        let (d, e) = (x.c1, y.c1);
        let lhs = euler_pairing(&s, &line_bundle_class(&s, &d), &line_bundle_class(&s, &e));
        prop_assert_eq!(lhs, chern_route(b, n, &line_bundle_class(&s, &d), &line_bundle_class(&s, &e)));
        prop_assert_eq!(lhs, line_bundle_class(&s, &(&e - &d)).chi);
    }
}

/// Brute-force count over a coordinate box large enough for degree >= 5.
fn brute_count(base: Base, n: usize, r: i64) -> usize {
    let m = form(base, n);
    let mk: Vec<i64> = anticanonical(base, n);
    let dim = mk.len();
    let mut count = 0;
    let mut v = vec![-3i64; dim];
    loop {
        let d2 = dot(&m, &v, &v);
        let dk = -dot(&m, &v, &mk);
        if d2 == r && d2 + dk == -2 {
            count += 1;
        }
        let mut i = 0;
        while i < dim {
            v[i] += 1;
            if v[i] <= 3 {
                break;
            }
            v[i] = -3;
            i += 1;
        }
        if i == dim {
            break;
        }
    }
    count
}

#[test]
fn r_class_counts_match_brute_force() {
    for (b, n) in [(Base::ProjectivePlane, 0), (Base::Hirzebruch(0), 0), (Base::ProjectivePlane, 2), (Base::ProjectivePlane, 3), (Base::ProjectivePlane, 4)] {
        let s = model(b, n);
        for r in [-1, 0, 1] {
            assert_eq!(enumerate_r_classes(&s, r).unwrap().len(), brute_count(b, n, r), "{s} r = {r}");
        }
    }
}

fn collection_and_index() -> impl Strategy<Value = (usize, Vec<u8>, usize)> {
    (0..10usize, proptest::collection::vec(0u8..4, 0..6), 0..100usize)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn left_then_right_restores((which, walk, pick) in collection_and_index()) {
        let mut bases = vec![beilinson(0)];
        bases.extend(rich_standard_spaces().iter().map(|m| sodatlas::catalog::standard_sod(m).unwrap()));
        let mut c = bases[which % bases.len()].clone();
        for w in walk {
            let nb = c.blocks().len();
            let m = match w {
                0 => Move::LeftBlock(2 + pick % (nb - 1)),
                1 => Move::RightBlock(1 + pick % (nb - 1)),
                2 => Move::HelixMinusK,
                _ => Move::HelixPlusK,
            };
            if let Ok(next) = apply_move(&c, &m) {
                c = next;
            }
        }
        let i = 2 + pick % (c.blocks().len() - 1);
        let back = apply_move(&apply_move(&c, &Move::LeftBlock(i)).unwrap(), &Move::RightBlock(i - 1)).unwrap();
        prop_assert!(collections_equal(&back, &c, EqualityMode::Strict));
        let h = apply_move(&apply_move(&c, &Move::HelixPlusK).unwrap(), &Move::HelixMinusK).unwrap();
        prop_assert!(collections_equal(&h, &c, EqualityMode::Strict));
    }
}

fn s5_reflections() -> (SurfaceModel, Vec<IntMatrix>) {
    let s = SurfaceModel::p2_blown_up(4);
    let roots = [[0, 1, -1, 0, 0], [0, 0, 1, -1, 0], [0, 0, 0, 1, -1], [1, -1, -1, -1, 0]];
    let g = roots.iter().map(|r| reflection(&s, &DivisorClass(r.to_vec())).unwrap()).collect();
    (s, g)
}

proptest! {
    #[test]
    fn invariant_rank_is_monotone(mask in 0u8..16, extra in 0usize..4) {
        let (s, all) = s5_reflections();
        let gens: Vec<IntMatrix> = (0..4).filter(|i| mask & (1 << i) != 0).map(|i| all[i].clone()).collect();
        let mut more = gens.clone();
        more.push(all[extra].clone());
        let a = GroupAction::new(s.clone(), gens).unwrap();
        let b = GroupAction::new(s, more).unwrap();
        prop_assert!(invariant_rank(&b) <= invariant_rank(&a));
    }

    #[test]
    fn burnside_is_additive(xs in proptest::collection::vec((any::<bool>(), 1usize..5), 0..8),
                            ys in proptest::collection::vec((any::<bool>(), 1usize..5), 0..8)) {
        let steps = |v: &[(bool, usize)]| -> Vec<BirationalStep> {
            v.iter().map(|&(up, n)| {
                let z = TransitiveGSet::labelled(n, "");
                if up { BirationalStep::BlowUp(z) } else { BirationalStep::BlowDown(z) }
            }).collect()
        };
        let (a, b) = (steps(&xs), steps(&ys));
        let mut ab = a.clone();
        ab.extend(b.iter().cloned());
        prop_assert_eq!(burnside_invariant(&ab), burnside_invariant(&a).add(&burnside_invariant(&b)));
        // Undo every step in reverse order.
        let mut pal = a.clone();
        pal.extend(a.iter().rev().map(|s| match s {
            BirationalStep::BlowUp(z) => BirationalStep::BlowDown(z.clone()),
            BirationalStep::BlowDown(z) => BirationalStep::BlowUp(z.clone()),
        }));
        prop_assert!(burnside_invariant(&pal).is_zero());
    }

    #[test]
    fn cyclic_h1_two_routes(perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(), signs in proptest::collection::vec(any::<bool>(), 4)) {
        let mut g = IntMatrix::zeros(4, 4);
        for (i, &j) in perm.iter().enumerate() {
            g[(j, i)] = if signs[i] { -1 } else { 1 };
        }
        let grp = MatrixGroup::generate(4, vec![g], 100).unwrap();
        prop_assert_eq!(h1_module(&grp).unwrap(), h1_cyclic(&grp).unwrap());
    }

    #[test]
    fn permutation_modules_have_no_h1(perm in Just(vec![0usize, 1, 2, 3, 4]).prop_shuffle(), other in Just(vec![0usize, 1, 2, 3, 4]).prop_shuffle()) {
        let mk = |p: &[usize]| {
            let mut g = IntMatrix::zeros(5, 5);
            for (i, &j) in p.iter().enumerate() {
                g[(j, i)] = 1;
            }
            g
        };
        let grp = MatrixGroup::generate(5, vec![mk(&perm), mk(&other)], 200).unwrap();
        if grp.order() <= 48 {
            prop_assert!(h1_module(&grp).unwrap().is_empty());
        }
    }
}

fn profile_strategy() -> impl Strategy<Value = AtomProfile> {
    proptest::collection::vec((1u32..4, 1u32..4, 0u8..3), 0..5).prop_map(|v| {
        let atoms: Vec<(u32, u32, String)> = v
            .into_iter()
            .map(|(d1, d2, l)| if d2 == 1 { (d1, 1, "0".to_string()) } else { (d1, d2, format!("a{d2}_{l}")) })
            .collect();
        let refs: Vec<(u32, u32, &str)> = atoms.iter().map(|(a, b, c)| (*a, *b, c.as_str())).collect();
        AtomProfile::small("p", &refs).unwrap()
    })
}

proptest! {
    #[test]
    fn dam_is_multiplicative(p in profile_strategy(), q in profile_strategy()) {
        prop_assert_eq!(dam_order(&p.concat(&q)).unwrap(), dam_order(&p).unwrap() * dam_order(&q).unwrap());
        prop_assert!(!is_rational_profile(&p) || is_rich_profile(&p));
    }

    #[test]
    fn same_atoms_is_an_equivalence(p in profile_strategy(), q in profile_strategy(), r in profile_strategy()) {
        prop_assert!(same_nontrivial_atoms(&p, &p));
        prop_assert_eq!(same_nontrivial_atoms(&p, &q), same_nontrivial_atoms(&q, &p));
        if same_nontrivial_atoms(&p, &q) && same_nontrivial_atoms(&q, &r) {
            prop_assert!(same_nontrivial_atoms(&p, &r));
        }
    }
}
