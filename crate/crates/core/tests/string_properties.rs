use std::collections::BTreeMap;

use proptest::prelude::*;
use sft_lab::surface::{inverse, CyclicWord, Letter, SurfaceGroup};
use sft_lab::topology::{bracket, cobracket, sporadic_count, sporadic_count_direct, ClassSum, Registry, TensorSum};

fn genus2() -> SurfaceGroup {
    SurfaceGroup::new(2).unwrap()
}

fn letters(max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(prop::sample::select(vec![1i8, 2, 3, 4, -1, -2, -3, -4]), 1..=max_len)
}

fn class(max_len: usize) -> impl Strategy<Value = CyclicWord> {
    letters(max_len).prop_filter_map("trivial class", |w| genus2().canonicalize(&w).ok())
}

type Triple = (CyclicWord, CyclicWord, CyclicWord);

fn co_jacobi_sum(w: &CyclicWord) -> BTreeMap<Triple, i64> {
    let mut out: BTreeMap<Triple, i64> = BTreeMap::new();
    for ((x, y), c) in cobracket(w).pairs() {
        for ((u, v), e) in cobracket(x).pairs() {
            let (a, b, z) = (u.clone(), v.clone(), y.clone());
            for t in [(a.clone(), b.clone(), z.clone()), (z.clone(), a.clone(), b.clone()), (b, z, a)] {
                *out.entry(t).or_insert(0) += c * e;
            }
        }
    }
    out.retain(|_, v| *v != 0);
    out
}

fn add_scaled(acc: &mut ClassSum, part: &ClassSum, scale: i64) {
    for (w, c) in part {
        *acc.entry(w.clone()).or_insert(0) += scale * c;
    }
    acc.retain(|_, v| *v != 0);
}

fn bracket_linear(left: &ClassSum, right: &CyclicWord) -> ClassSum {
    let mut out = ClassSum::new();
    for (w, c) in left {
        add_scaled(&mut out, &bracket(w, right), *c);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn canonical_form_is_conjugation_invariant(w in letters(8), u in letters(4)) {
        let g = genus2();
        let mut conj = u.clone();
        conj.extend(&w);
        conj.extend(inverse(&u));
        prop_assert_eq!(g.canonicalize(&w), g.canonicalize(&conj));
    }

    #[test]
    fn canonical_form_ignores_inserted_relators(w in letters(8), at in 0usize..8, rot in 0usize..8, flip: bool) {
        let g = genus2();
        let mut rel = g.relator();
        let shift = rot % rel.len();
        rel.rotate_left(shift);
        if flip {
            rel = inverse(&rel);
        }
        let cut = at % (w.len() + 1);
        let mut longer = w[..cut].to_vec();
        longer.extend(rel);
        longer.extend(&w[cut..]);
        prop_assert_eq!(g.canonicalize(&w), g.canonicalize(&longer));
    }

    #[test]
    fn powers_stay_periodic(w in class(6), n in 2usize..4) {
        let g = genus2();
        let root = g.canonicalize(&w.letters()[..w.root_length()]).unwrap();
        let rep: Vec<Letter> = w.letters().iter().copied().cycle().take(n * w.len()).collect();
        let p = g.canonicalize(&rep).unwrap();
        prop_assert_eq!(p.power_exponent(), n * w.power_exponent());
        prop_assert_eq!(g.canonicalize(&p.letters()[..p.root_length()]).unwrap(), root);
    }

    #[test]
    fn cobracket_is_co_antisymmetric(w in class(6)) {
        let d = cobracket(&w);
        prop_assert_eq!(d.swapped(), d.negated());
    }

    #[test]
    fn cobracket_of_reverse_is_swapped_reverses(w in class(6)) {
        // Reversing the loop reverses both resolved loops and their order.
        let mut expected: BTreeMap<_, i64> = BTreeMap::new();
        for ((a, b), c) in cobracket(&w).pairs() {
            expected.insert((b.reversed(), a.reversed()), *c);
        }
        prop_assert_eq!(cobracket(&w.reversed()), TensorSum::from_pairs(expected));
    }

    #[test]
    fn sporadic_count_agrees_across_both_readings(w in class(6)) {
        let mut reg = Registry::default();
        prop_assert_eq!(sporadic_count(&w, &mut reg), sporadic_count_direct(&w));
    }

    #[test]
    fn bracket_is_antisymmetric(a in class(5), b in class(5)) {
        let ab = bracket(&a, &b);
        let mut neg_ba = ClassSum::new();
        add_scaled(&mut neg_ba, &bracket(&b, &a), -1);
        prop_assert_eq!(ab, neg_ba);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn cobracket_satisfies_co_jacobi(w in class(6)) {
        prop_assert!(co_jacobi_sum(&w).is_empty(), "{}", w);
    }

    #[test]
    fn bracket_satisfies_jacobi(a in class(3), b in class(3), c in class(3)) {
        let mut total = ClassSum::new();
        add_scaled(&mut total, &bracket_linear(&bracket(&a, &b), &c), 1);
        add_scaled(&mut total, &bracket_linear(&bracket(&b, &c), &a), 1);
        add_scaled(&mut total, &bracket_linear(&bracket(&c, &a), &b), 1);
        prop_assert!(total.is_empty(), "{:?}", total);
    }
}
