use coresolve::decirc::{apply_sequence, DecircStream};
use coresolve::term::is_variant;
use coresolve::testgen::{random_circular, GenConfig};
use coresolve::{distance, mgm, mgu, parse_term, rational_unify, truncate, Distance, RationalStore, Term, UnifyOutcome, Var, VarGen};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn var(i: u64) -> Term {
    Term::Var(Var::new(i, Some(["X", "Y", "Z"][i as usize % 3].into())))
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (1u64..=3).prop_map(var),
        prop_oneof![Just("a"), Just("b")].prop_map(Term::constant),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("f", vec![t])),
            (inner.clone(), inner).prop_map(|(x, y)| Term::app("g", vec![x, y])),
        ]
    })
}

fn ground() -> impl Strategy<Value = Term> {
    term().prop_map(|t| {
        t.map_vars(&mut |_| Term::constant("c"))
    })
}

proptest! {
    #[test]
    fn truncation_composes(t in term(), n in 0usize..6, m in 0usize..6) {
        prop_assert_eq!(truncate(n, &truncate(m, &t)), truncate(n.min(m), &t));
    }

    #[test]
    fn truncation_beyond_depth_is_identity(t in term()) {
        prop_assert_eq!(truncate(t.depth(), &t), t);
    }

    #[test]
    fn distance_is_an_ultrametric(a in term(), b in term(), c in term()) {
        prop_assert_eq!(distance(&a, &a), Distance::Zero);
        prop_assert_eq!(distance(&a, &b), distance(&b, &a));
        prop_assert_eq!(distance(&a, &b) == Distance::Zero, a == b);
        prop_assert!(distance(&a, &c) <= distance(&a, &b).max(distance(&b, &c)));
    }

    #[test]
    fn distance_reflects_truncation(a in term(), b in term()) {
        if let Some(k) = distance(&a, &b).exponent() {
            let k = k as usize;
            prop_assert_eq!(truncate(k - 1, &a), truncate(k - 1, &b));
            prop_assert_ne!(truncate(k, &a), truncate(k, &b));
        }
    }

    #[test]
    fn matchers_map_pattern_onto_target(p in term(), t in ground()) {
        if let UnifyOutcome::Matcher(s) = mgm(&p, &t) {
            prop_assert_eq!(s.apply(&p).unwrap(), t);
        }
    }

    #[test]
    fn unifiers_unify_and_are_idempotent(a in term(), b in term()) {
        if let Some(s) = mgu(&a, &b).into_substitution() {
            let (x, y) = (s.apply(&a).unwrap(), s.apply(&b).unwrap());
            prop_assert_eq!(&x, &y);
            prop_assert_eq!(s.apply(&x).unwrap(), x);
        }
    }

    #[test]
    fn rational_unification_extends_finite(a in term(), b in term()) {
        let finite = mgu(&a, &b);
        let rational = rational_unify(&a, &b);
        if let Some(s) = finite.substitution() {
            prop_assert_eq!(Some(s), rational.substitution());
        }
        if let Some(s) = rational.substitution() {
            let store = RationalStore::from_substitution(s);
            prop_assert!(store.rational_eq(&a, &b));
        }
    }

    #[test]
    fn printed_terms_parse_back(t in term()) {
        let g = VarGen::starting_after(100);
        let back = parse_term(&t.to_string(), &g).unwrap();
        prop_assert!(is_variant(&back, &t));
    }

    #[test]
    fn unfolding_is_consistent_across_depths(seed in any::<u64>(), n in 0usize..6, extra in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = VarGen::new();
        let s = random_circular(&mut rng, &GenConfig::default(), &g);
        let v = s.cyclic_vars().into_iter().next().unwrap();
        let t = Term::Var(v);
        let mut st = DecircStream::new(&s, &g);
        let deep = st.unfold(&t, n + extra);
        let shallow = st.unfold(&t, n);
        prop_assert_eq!(truncate(n, &deep), shallow.clone());
        let k = n.max(1);
        let applied = apply_sequence(&st.prefix(k), &t);
        prop_assert_eq!(truncate(n, &applied), shallow);
    }
}
