use proptest::prelude::*;

use wormcalc::formula::{demote, promote};
use wormcalc::rc::Sequent;
use wormcalc::{GLPFormula, Ordinal, SPFormula, Worm};

fn ordinal() -> impl Strategy<Value = Ordinal> {
    let leaf = (0u64..12).prop_map(Ordinal::from);
    leaf.prop_recursive(2, 24, 4, |inner| {
        prop::collection::vec((inner, 1u32..4), 1..4).prop_map(|terms| {
            let mut terms = terms;
            terms.sort_by(|a, b| b.0.cmp(&a.0));
            terms.dedup_by(|a, b| a.0 == b.0);
            terms
                .into_iter()
                .fold(Ordinal::zero(), |acc, (e, c)| acc.add(&Ordinal::monomial(e, c)))
        })
    })
}

fn modality() -> impl Strategy<Value = Ordinal> {
    prop_oneof![4 => (0u64..4).prop_map(Ordinal::from), 1 => ordinal()]
}

fn sp_formula() -> impl Strategy<Value = SPFormula> {
    let leaf = prop_oneof![Just(SPFormula::Top), "[pq]".prop_map(|v| SPFormula::var(&v))];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| SPFormula::and(l, r)),
            (modality(), inner).prop_map(|(m, b)| SPFormula::diamond(m, b)),
        ]
    })
}

fn glp_formula() -> impl Strategy<Value = GLPFormula> {
    let leaf = prop_oneof![
        Just(GLPFormula::Top),
        Just(GLPFormula::Bottom),
        "[pq]".prop_map(|v| GLPFormula::var(&v)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(GLPFormula::not),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| GLPFormula::and(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| GLPFormula::or(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| GLPFormula::implies(l, r)),
            (modality(), inner.clone()).prop_map(|(m, b)| GLPFormula::boxed(m, b)),
            (modality(), inner).prop_map(|(m, b)| GLPFormula::diamond(m, b)),
        ]
    })
}

proptest! {
    #[test]
    fn addition_is_associative(a in ordinal(), b in ordinal(), c in ordinal()) {
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
    }

    #[test]
    fn addition_is_monotone_on_the_right(a in ordinal(), b in ordinal(), c in ordinal()) {
        prop_assert!(a <= a.add(&b));
        prop_assert!(b <= a.add(&b));
        if b < c {
            prop_assert!(a.add(&b) < a.add(&c));
        }
    }

    #[test]
    fn left_subtraction_inverts_addition(a in ordinal(), b in ordinal()) {
        prop_assert_eq!(a.left_subtract(&a.add(&b)).unwrap(), b.clone());
        let (lo, hi) = if a <= b { (&a, &b) } else { (&b, &a) };
        let d = lo.left_subtract(hi).unwrap();
        prop_assert_eq!(&lo.add(&d), hi);
        if lo < hi {
            prop_assert!(hi.left_subtract(lo).is_err());
        }
    }

    #[test]
    fn order_is_total_and_consistent(a in ordinal(), b in ordinal()) {
        prop_assert_eq!(a.cmp(&b), b.cmp(&a).reverse());
        prop_assert_eq!(a == b, a.cmp(&b).is_eq());
        prop_assert!(a < a.succ());
    }

    #[test]
    fn successor_and_predecessor(a in ordinal()) {
        prop_assert_eq!(a.succ().pred(), Some(a.clone()));
        prop_assert!(a.succ().is_successor());
        prop_assert_eq!(a.is_limit(), !a.is_zero() && !a.is_successor());
    }

    #[test]
    fn hyperexponential_composes(a in ordinal(), j in 0u64..3, k in 0u64..3) {
        prop_assert_eq!(a.hyper_e(j + k), a.hyper_e(k).hyper_e(j));
    }

    #[test]
    fn hyper_step_is_increasing(a in ordinal(), b in ordinal()) {
        if a < b {
            prop_assert!(a.hyper_step() < b.hyper_step());
        }
        prop_assert!(a <= a.hyper_step());
    }

    #[test]
    fn fundamental_sequences_climb_to_the_limit(a in ordinal(), k in 0u64..6) {
        if a.is_limit() {
            let x = a.fundamental_sequence(k).unwrap();
            let y = a.fundamental_sequence(k + 1).unwrap();
            prop_assert!(x < y);
            prop_assert!(y < a);
        } else {
            prop_assert!(a.fundamental_sequence(k).is_err());
        }
    }

    #[test]
    fn ordinals_round_trip_through_text(a in ordinal()) {
        prop_assert_eq!(Ordinal::parse(&a.to_string()).unwrap(), a.clone());
        let json = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<Ordinal>(&json).unwrap(), a);
    }

    #[test]
    fn worms_round_trip_through_text(mods in prop::collection::vec(modality(), 0..5)) {
        let w = Worm::new(mods);
        prop_assert_eq!(Worm::parse(&w.to_string()).unwrap(), w.clone());
        prop_assert_eq!(Worm::from_sp(&w.to_sp()), Some(w));
    }

    #[test]
    fn formulas_round_trip_through_text(f in sp_formula(), g in glp_formula()) {
        prop_assert_eq!(SPFormula::parse(&f.to_string()).unwrap(), f.clone());
        prop_assert_eq!(GLPFormula::parse(&g.to_string()).unwrap(), g);
        let s = Sequent::new(f.clone(), f);
        prop_assert_eq!(Sequent::parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn demotion_is_undone_by_promotion(fs in prop::collection::vec(glp_formula(), 1..4), pin in any::<bool>()) {
        let (d, r) = demote(&fs, pin);
        prop_assert_eq!(promote(&d, &r).unwrap(), fs);
        for (s, t) in r.pairs() {
            prop_assert!(t.is_finite());
            prop_assert!(!pin || !s.is_zero() || t.is_zero());
        }
    }

    #[test]
    fn shifts_are_inverse(mods in prop::collection::vec(0u64..4, 0..5), alpha in ordinal()) {
        let w = Worm::new(mods.into_iter().map(Ordinal::from).collect());
        prop_assert_eq!(w.shift_up(&alpha).shift_down(&alpha).unwrap(), w);
    }
}
