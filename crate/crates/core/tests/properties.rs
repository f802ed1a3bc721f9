use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

use sublab::cones::ConeBasis;
use sublab::exact::{
    binomial, in_a, in_d, s_map_step, step, subtractive_step, unordered_step3, FreePoint,
};
use sublab::matrices::{
    check_column_claims, forward_matrix, forward_product, inverse_matrix, inverse_product,
    MatrixKind, TransitionMatrix,
};
use sublab::orbit::{conjugacy_check, invariant_function, Orbit};
use sublab::return_map::projected_step;
use sublab::sample::{stream_rng, Base, Region, Sampler};
use sublab::{MapParams, OrderedPoint, Shuffle, Q};

fn params() -> impl Strategy<Value = MapParams> {
    (1usize..=4, 1usize..=4).prop_map(|(a, b)| MapParams::new(a, b).unwrap())
}

fn rational() -> impl Strategy<Value = Q> {
    (0i64..1000, 1i64..50).prop_map(|(n, d)| Q::new(n.into(), d.into()))
}

fn point(n: usize) -> impl Strategy<Value = OrderedPoint<Q>> {
    prop::collection::vec(rational(), n).prop_map(|c| OrderedPoint::from_unsorted(c).unwrap())
}

fn params_and_point() -> impl Strategy<Value = (MapParams, OrderedPoint<Q>)> {
    params().prop_flat_map(|p| (Just(p), point(p.dim())))
}

fn shuffle_word(p: MapParams, max_len: usize) -> impl Strategy<Value = Vec<Shuffle>> {
    let all = Shuffle::all(p);
    prop::collection::vec(0..all.len(), 0..=max_len)
        .prop_map(move |idx| idx.into_iter().map(|i| all[i].clone()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn image_is_ordered_and_sum_telescopes((p, x) in params_and_point()) {
        let (y, pi) = subtractive_step(&x, p).unwrap();
        prop_assert!(y.coords().windows(2).all(|w| w[0] <= w[1]));
        let b = Q::from_integer(BigInt::from(p.b()));
        prop_assert_eq!(y.sum(), x.sum() - b * &x.coords()[p.a() - 1]);
        // the matrix of the branch reproduces the step
        let l = forward_matrix(&pi, p).unwrap();
        prop_assert_eq!(l.apply(x.coords()).unwrap(), y.coords().to_vec());
    }

    #[test]
    fn sorted_coordinates_never_increase((p, x) in params_and_point(), steps in 1usize..40) {
        let mut orbit = Orbit::new(&x, p).unwrap();
        for _ in 0..steps {
            let before = orbit.coords().to_vec();
            orbit.advance().unwrap();
            prop_assert!(orbit.coords().iter().zip(&before).all(|(n, o)| n <= o));
        }
    }

    #[test]
    fn a_and_d_are_forward_invariant((p, x) in params_and_point()) {
        let y = step(&x, p).unwrap();
        if in_a(&x, p).unwrap() {
            prop_assert!(in_a(&y, p).unwrap());
        }
        if p.b() >= 2 && in_d(&x, p).unwrap() {
            prop_assert!(in_d(&y, p).unwrap());
            prop_assert!(in_a(&x, p).unwrap());
        }
    }

    #[test]
    fn inverse_branch_is_right_inverse((p, y) in params_and_point(), k in 0usize..20) {
        let all = Shuffle::all(p);
        let pi = &all[k % all.len()];
        let m = inverse_matrix(pi, p).unwrap();
        let x = OrderedPoint::new(m.apply(y.coords()).unwrap()).unwrap();
        prop_assert_eq!(step(&x, p).unwrap(), y);
    }

    #[test]
    fn products_are_unimodular_and_inverse(word in params().prop_flat_map(|p| (Just(p), shuffle_word(p, 12)))) {
        let (p, word) = word;
        let l = forward_product(&word, p).unwrap();
        let m = inverse_product(&word, p).unwrap();
        prop_assert!(m.is_nonnegative());
        prop_assert_eq!(m.det().magnitude().clone(), BigInt::one().magnitude().clone());
        let id = TransitionMatrix::identity(p.dim(), MatrixKind::Forward);
        let lm = l.mul(&TransitionMatrix::from_rows(&to_i64(&m), MatrixKind::Forward).unwrap()).unwrap();
        prop_assert_eq!(lm.rows(), id.rows());
    }

    #[test]
    fn column_claims_hold(word in prop_oneof![Just((1, 2)), Just((2, 2)), Just((2, 3)), Just((3, 2))]
        .prop_flat_map(|(a, b)| { let p = MapParams::new(a, b).unwrap(); (Just(p), shuffle_word(p, 50)) }))
    {
        let (p, word) = word;
        let m = inverse_product(&word, p).unwrap();
        let c = check_column_claims(&m, p).unwrap();
        prop_assert!(c.max_property && c.prefix_bound);
    }

    #[test]
    fn unordered_map_is_conjugate_to_t12(v in prop::collection::hash_set(0i64..10_000, 3)) {
        let v: Vec<i64> = v.into_iter().collect();
        let p = MapParams::new(1, 2).unwrap();
        let free = FreePoint::from_ints(&v).unwrap();
        let image = unordered_step3(&free).unwrap().sorted();
        prop_assert_eq!(image, step(&free.sorted(), p).unwrap());
    }

    #[test]
    fn variant_keeps_a((a, b, i) in (2usize..=4, 1usize..=4).prop_flat_map(|(a, b)| (Just(a), Just(b), 1..a)),
                       seed in any::<u64>()) {
        let p = MapParams::variant(a, b, i).unwrap();
        let s = Sampler::new(48, Base::Simplex).unwrap();
        let mut rng = stream_rng(seed, 0);
        let x = s.draw(&mut rng, p, Region::A).unwrap();
        prop_assert!(in_a(&step(&x, p).unwrap(), p).unwrap());
        if b + i <= a + 1 {
            let x = s.draw(&mut rng, p, Region::ComplementA).unwrap();
            prop_assert!(!in_a(&step(&x, p).unwrap(), p).unwrap());
        }
    }

    #[test]
    fn no_entry_into_a_while_last_is_large((p, seed) in (params(), any::<u64>())) {
        // outside A with x_{a+b} >= 2 x_a: the image stays outside A
        let s = Sampler::new(48, Base::Simplex).unwrap();
        let mut rng = stream_rng(seed, 1);
        let x = s.draw(&mut rng, p, Region::ComplementA).unwrap();
        let c = x.coords();
        if *x.last() >= 2 * c[p.a() - 1] {
            prop_assert!(!in_a(&step(&x, p).unwrap(), p).unwrap());
        }
    }

    #[test]
    fn conjugacy_on_random_points(x in point(2), steps in 1u64..50) {
        prop_assume!(!x.sum().is_zero());
        prop_assert!(conjugacy_check(&x, steps).unwrap().holds);
    }

    #[test]
    fn invariant_function_is_invariant(
        (a, b) in prop_oneof![Just((1, 3)), Just((2, 3)), Just((1, 4))],
        seed in any::<u64>(),
    ) {
        let p = MapParams::new(a, b).unwrap();
        let s = Sampler::new(48, Base::Cube).unwrap();
        let mut rng = stream_rng(seed, 2);
        let x = s.draw(&mut rng, p, Region::D).unwrap();
        let z = sublab::exact::project_to_b(&s.to_rational(&x)).unwrap();
        let f = invariant_function(&z, p).unwrap();
        let z1 = s_map_step(&z, p).unwrap();
        prop_assert_eq!(invariant_function(&z1, p).unwrap(), f);
    }

    #[test]
    fn projected_round_trip((p, x) in params_and_point(), k in 0usize..20) {
        prop_assume!(!x.sum().is_zero());
        let all = Shuffle::all(p);
        let pi = &all[k % all.len()];
        let m = inverse_matrix(pi, p).unwrap();
        let l = forward_matrix(pi, p).unwrap();
        let s = x.sum();
        let xs: Vec<Q> = x.coords().iter().map(|v| v / &s).collect();
        let back = projected_step(&projected_step(&xs, &m).unwrap(), &l).unwrap();
        prop_assert_eq!(back, xs);
    }

    #[test]
    fn cone_determinants(v in prop::array::uniform3(prop::array::uniform3(0i64..20))) {
        if let Ok(c) = ConeBasis::new(v, 0) {
            for kid in c.subdivide() {
                prop_assert_eq!(kid.det().abs(), c.det().abs());
            }
            prop_assert_eq!(c.middle().det().abs(), 2 * c.det().abs());
            let area = c.normalized_area();
            let kids: Q = c.subdivide().iter().map(|k| k.normalized_area()).sum();
            prop_assert_eq!(kids, area.clone());
            let parts: Q = c.corners().iter().map(|k| k.normalized_area()).sum::<Q>() + c.middle().normalized_area();
            prop_assert_eq!(parts, area);
        }
    }
}

fn to_i64(m: &TransitionMatrix) -> Vec<Vec<i64>> {
    m.rows().iter().map(|r| r.iter().map(|v| i64::try_from(v).unwrap()).collect()).collect()
}

#[test]
fn dense_sampling_realizes_every_shuffle() {
    for (a, b) in [(1, 1), (1, 2), (2, 1), (2, 2), (2, 3), (3, 2)] {
        let p = MapParams::new(a, b).unwrap();
        let s = Sampler::new(32, Base::Cube).unwrap();
        let mut rng = stream_rng(17, 0);
        let mut seen = HashSet::new();
        for _ in 0..20_000 {
            let x = s.draw(&mut rng, p, Region::Lambda).unwrap();
            seen.insert(subtractive_step(&x, p).unwrap().1.one_based());
        }
        assert_eq!(seen.len(), binomial(a + b, a), "({a},{b})");
    }
}
