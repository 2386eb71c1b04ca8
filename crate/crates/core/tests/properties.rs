use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

use permgram::boson;
use permgram::dense_ops::{pt_overlap, LegSubset};
use permgram::exact::{factorial, from_int, rational};
use permgram::gram::{self, build_gram};
use permgram::locality;
use permgram::schur_weyl::{self, dim_p, dim_q};
use permgram::setpart::{self, SetPartition};
use permgram::symgroup::{self, Permutation};

fn permutation(max_n: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_n)
        .prop_flat_map(|n| Just((1..=n).collect::<Vec<usize>>()).prop_shuffle())
        .prop_map(|images| Permutation::from_one_line(&images).unwrap())
}

fn permutation_pair(max_n: usize) -> impl Strategy<Value = (Permutation, Permutation, Permutation)> {
    (1..=max_n).prop_flat_map(|n| {
        let p = Just((1..=n).collect::<Vec<usize>>()).prop_shuffle();
        (p.clone(), p.clone(), p).prop_map(|(a, b, c)| {
            (
                Permutation::from_one_line(&a).unwrap(),
                Permutation::from_one_line(&b).unwrap(),
                Permutation::from_one_line(&c).unwrap(),
            )
        })
    })
}

fn restricted_growth(max_n: usize) -> impl Strategy<Value = SetPartition> {
    (1..=max_n).prop_flat_map(restricted_growth_of)
}

fn partition_pair(max_n: usize) -> impl Strategy<Value = (SetPartition, SetPartition)> {
    (1..=max_n).prop_flat_map(|n| (restricted_growth_of(n), restricted_growth_of(n)))
}

/// Random restricted-growth string: each entry is clamped to one past the
/// running maximum.
fn restricted_growth_of(n: usize) -> impl Strategy<Value = SetPartition> {
    proptest::collection::vec(0usize..n, n).prop_map(|raw| {
        let mut rgs = Vec::with_capacity(raw.len());
        let mut top = 0usize;
        for (i, r) in raw.into_iter().enumerate() {
            let v = if i == 0 { 0 } else { r.min(top + 1) };
            top = top.max(v);
            rgs.push(v);
        }
        SetPartition::from_rgs(&rgs).unwrap()
    })
}

fn complex_matrix(n: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
    proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n * n)
        .prop_map(move |v| DMatrix::from_iterator(n, n, v.into_iter().map(|(re, im)| Complex64::new(re, im))))
}

/// `A` refines `B` when every block of `A` sits inside one block of `B`.
fn refines(a: &SetPartition, b: &SetPartition) -> bool {
    let label = b.rgs();
    a.blocks().iter().all(|block| block.iter().all(|&x| label[x - 1] == label[block[0] - 1]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn composition_is_associative_with_inverses((p, q, r) in permutation_pair(9)) {
        let pq_r = symgroup::compose(&symgroup::compose(&p, &q).unwrap(), &r).unwrap();
        let p_qr = symgroup::compose(&p, &symgroup::compose(&q, &r).unwrap()).unwrap();
        prop_assert_eq!(pq_r, p_qr);
        prop_assert!(symgroup::compose(&p, &p.inverse()).unwrap().is_identity());
        for x in 1..=p.n() {
            prop_assert_eq!(symgroup::compose(&p, &q).unwrap().apply(x), p.apply(q.apply(x)));
        }
    }

    #[test]
    fn distance_sign_and_cycle_type_agree(p in permutation(10)) {
        let t = symgroup::cycle_type(&p);
        prop_assert_eq!(t.n(), p.n());
        prop_assert_eq!(symgroup::transposition_distance(&p), p.n() - p.cycle_count());
        let expected = if symgroup::transposition_distance(&p) % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(symgroup::sign(&p), expected);
        prop_assert_eq!(symgroup::cycle_type(&p.inverse()), t);
    }

    #[test]
    fn distance_is_conjugation_invariant((p, q, _) in permutation_pair(8)) {
        let conj = symgroup::compose(&symgroup::compose(&q, &p).unwrap(), &q.inverse()).unwrap();
        prop_assert_eq!(symgroup::cycle_type(&conj), symgroup::cycle_type(&p));
    }

    #[test]
    fn cut_meets_half_the_distance(p in permutation(40)) {
        let cut = locality::deterministic_cut(&p);
        prop_assert!(cut.meets_target());
        prop_assert_eq!(cut.achieved, locality::cut_value(&p, &cut.subset));
    }

    #[test]
    fn pt_overlap_is_inverse_invariant(p in permutation(8), mask in any::<u64>()) {
        let s = LegSubset::from_mask(p.n(), mask);
        prop_assert_eq!(pt_overlap(&p, &s), pt_overlap(&p.inverse(), &s));
        prop_assert!(2 * pt_overlap(&p, &s) <= p.n());
    }

    #[test]
    fn ryser_matches_the_naive_permanent(a in (1usize..=6).prop_flat_map(complex_matrix)) {
        let n = a.nrows();
        let fast = boson::permanent(&a).unwrap();
        let slow = boson::naive_permanent(&a).unwrap();
        prop_assert!((fast - slow).norm() <= 1e-9 * (1.0 + slow.norm()));
        let swapped = {
            let mut b = a.clone();
            b.swap_rows(0, n - 1);
            b
        };
        prop_assert!((boson::permanent(&swapped).unwrap() - fast).norm() <= 1e-9 * (1.0 + fast.norm()));
    }

    #[test]
    fn join_is_a_lattice_operation((a, b) in partition_pair(9)) {
        let ab = setpart::join(&a, &b).unwrap();
        prop_assert_eq!(&ab, &setpart::join(&b, &a).unwrap());
        prop_assert_eq!(&setpart::join(&a, &a).unwrap(), &a);
        prop_assert!(refines(&a, &ab) && refines(&b, &ab));
        prop_assert_eq!(setpart::join(&a, &SetPartition::singletons(a.n())).unwrap(), a.clone());
        prop_assert_eq!(setpart::join(&a, &SetPartition::one_block(a.n())).unwrap(), SetPartition::one_block(a.n()));
    }

    #[test]
    fn rgs_round_trips(p in restricted_growth(10)) {
        prop_assert_eq!(SetPartition::from_rgs(&p.rgs()).unwrap(), p.clone());
        let blocks: Vec<&[usize]> = p.blocks().iter().map(Vec::as_slice).collect();
        prop_assert_eq!(SetPartition::from_blocks(p.n(), &blocks).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gram_is_symmetric_with_unit_diagonal(n in 1usize..=4, d in 1usize..=6) {
        let g = build_gram(n, d).unwrap();
        for i in 0..g.side() {
            prop_assert!(g.entry(i, i).is_one());
            for j in 0..g.side() {
                prop_assert_eq!(g.entry(i, j), g.entry(j, i));
                let rel = symgroup::compose(&g.perms()[i].inverse(), &g.perms()[j]).unwrap();
                let exponent = symgroup::transposition_distance(&rel) as i32;
                prop_assert_eq!(g.entry(i, j), from_int(1) / from_int(BigInt::from(d).pow(exponent as u32)));
            }
        }
        prop_assert_eq!(g.trace(), from_int(factorial(n)));
    }

    #[test]
    fn spectrum_dimensions_are_consistent(n in 1usize..=7, d in 1usize..=7) {
        let spectrum = schur_weyl::exact_spectrum(n, d).unwrap();
        prop_assert_eq!(spectrum.total_multiplicity(), factorial(n));
        prop_assert_eq!(spectrum.trace(), from_int(factorial(n)));
        let lambdas = schur_weyl::partitions(n, n);
        let square_sum: BigInt = lambdas.iter().map(|l| dim_p(l).pow(2)).sum();
        prop_assert_eq!(square_sum, factorial(n));
        let schur_weyl_dim: BigInt = schur_weyl::partitions(n, d)
            .iter()
            .map(|l| dim_p(l) * dim_q(l, d).unwrap())
            .sum();
        prop_assert_eq!(schur_weyl_dim, BigInt::from(d).pow(n as u32));
        if n <= d {
            prop_assert_eq!(spectrum.min_nonzero(), gram::lambda_min_formula(n, d));
        }
        prop_assert_eq!(spectrum.max(), gram::lambda_max_formula(n, d));
    }

    #[test]
    fn exp_interval_brackets_and_is_monotone(num in 0i64..200, den in 1i64..50) {
        let x = rational(num, den);
        let (lo, hi) = locality::exp_interval(&x);
        prop_assert!(lo <= hi);
        let approx = (num as f64 / den as f64).exp();
        prop_assert!(permgram::exact::to_f64(&lo) <= approx * (1.0 + 1e-12));
        prop_assert!(permgram::exact::to_f64(&hi) >= approx * (1.0 - 1e-12));
        prop_assert!(lo >= BigRational::one() + &x);
    }

    #[test]
    fn bell_numbers_agree(n in 0usize..=12) {
        prop_assert_eq!(setpart::bell(n), setpart::bell_by_recurrence(n));
    }
}
