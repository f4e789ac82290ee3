use std::cmp::Ordering;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use symmaxent::action::GroupAction;
use symmaxent::distribution::Distribution;
use symmaxent::features::{PoolTag, Term};
use symmaxent::group::GroupSpec;
use symmaxent::lattice::LatticeSpace;
use symmaxent::maxent::{entropy, kl};
use symmaxent::order::{MonomialOrder, MultiIndex};
use symmaxent::poly::{parse_poly, PolyExpr};
use symmaxent::span::{vector_mod, ModularSpan, OrthoBasis};

fn action() -> &'static GroupAction {
    static ACTION: OnceLock<GroupAction> = OnceLock::new();
    ACTION.get_or_init(|| GroupAction::new(GroupSpec::microimage(), LatticeSpace::microimages(3, 2).unwrap()).unwrap())
}

fn index(n: usize) -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec(0u32..4, n).prop_map(MultiIndex)
}

fn weights(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, k)
}

fn poly(nvars: usize) -> impl Strategy<Value = PolyExpr> {
    let term = (prop::collection::vec(0u32..3, nvars), -5i64..=5, 1i64..4);
    prop::collection::vec(term, 0..5).prop_map(move |terms| {
        terms.into_iter().fold(PolyExpr::zero(nvars), |acc, (e, n, d)| {
            acc.add(&PolyExpr::monomial(e, BigRational::new(BigInt::from(n), BigInt::from(d))))
        })
    })
}

proptest! {
    #[test]
    fn rank_unrank_roundtrip(a in index(5)) {
        let order = MonomialOrder::graded_lex(5);
        let r = order.rank(&a).unwrap();
        prop_assert_eq!(order.unrank(r), a);
    }

    #[test]
    fn rank_agrees_with_compare(a in index(5), b in index(5)) {
        let order = MonomialOrder::graded_lex(5);
        let by_rank = order.rank(&a).unwrap().cmp(&order.rank(&b).unwrap());
        prop_assert_eq!(order.compare(&a, &b).unwrap(), by_rank);
        if a != b {
            prop_assert_ne!(by_rank, Ordering::Equal);
        }
    }

    #[test]
    fn order_respects_multiplication(a in index(4), b in index(4), c in index(4)) {
        let order = MonomialOrder::with_precedence(vec![2, 0, 3, 1]).unwrap();
        let lhs = order.compare(&a, &b).unwrap();
        prop_assert_eq!(order.compare(&a.add(&c), &b.add(&c)).unwrap(), lhs);
    }

    #[test]
    fn reynolds_is_idempotent_and_invariant(w in weights(81)) {
        let g = action();
        let once = g.reynolds_apply(&w).unwrap();
        let twice = g.reynolds_apply(&once).unwrap();
        for (x, y) in once.iter().zip(&twice) {
            prop_assert!((x - y).abs() < 1e-14);
        }
        prop_assert!(g.is_invariant(&once, 1e-14));
        let p = Distribution::from_weights(&w).unwrap();
        let sym = g.symmetrize_distribution(&p).unwrap();
        prop_assert!((sym.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(g.is_invariant(sym.probs(), 1e-15));
    }

    #[test]
    fn symmetrizing_never_lowers_entropy(w in weights(81)) {
        let p = Distribution::from_weights(&w).unwrap();
        let sym = action().symmetrize_distribution(&p).unwrap();
        prop_assert!(entropy(&sym) >= entropy(&p) - 1e-12);
        let gap = kl(&p, &sym).unwrap();
        prop_assert!((gap - (entropy(&sym) - entropy(&p))).abs() < 1e-10);
    }

    #[test]
    fn kl_is_nonnegative_and_zero_on_the_diagonal(a in weights(20), b in weights(20)) {
        let p = Distribution::from_weights(&a).unwrap();
        let q = Distribution::from_weights(&b).unwrap();
        prop_assert!(kl(&p, &q).unwrap() >= -1e-15);
        prop_assert!(kl(&p, &p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn poly_display_parses_back(p in poly(4)) {
        let text = p.to_string();
        prop_assert_eq!(parse_poly(&text, 4).unwrap(), p);
    }

    #[test]
    fn term_notation_parses_back(a in index(5)) {
        let t = Term::new(PoolTag::Invariant, a);
        prop_assert_eq!(&Term::parse(&t.tuple_notation(), 5, 4).unwrap(), &t);
        prop_assert_eq!(&Term::parse(&t.pretty(), 5, 4).unwrap(), &t);
    }

    #[test]
    fn modular_and_float_spans_agree(
        rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 8), 1..10)
    ) {
        // the float basis always contains the constant direction
        let mut exact = ModularSpan::new(8);
        exact.push(&[1; 8]);
        let mut float = OrthoBasis::new(8, 1e-9);
        for row in &rows {
            let q: Vec<BigRational> = row.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect();
            let f: Vec<f64> = row.iter().map(|&v| v as f64).collect();
            prop_assert_eq!(exact.push(&vector_mod(&q)), float.push(&f));
        }
        prop_assert_eq!(exact.dim(), float.dim());
    }
}
