use proptest::prelude::*;

use super::*;
use crate::library;
use crate::set::SetDesc;

const EXAMPLE1: &str = include_str!("../../problems/example1.mmx");
const CONTROL_COMPACT: &str = include_str!("../../problems/control_compact.mmx");
const CONTROL_INDEPENDENT: &str = include_str!("../../problems/control_independent.mmx");

const REST: &str = "x_domain = interval(-1, 1); phi_A = halfline(0); phi_B = halfline(0);";

fn phi_b_value(src: &str, x: f64, a: f64) -> SetDesc {
    let ast = parse(src).unwrap();
    match eval_expr(&ast.phi_b, &Env::new(x, a, 0.0)).unwrap() {
        Value::Set(s) => s,
        v => panic!("not a set: {v:?}"),
    }
}

#[test]
fn parsed_phi_b_values() {
    assert_eq!(phi_b_value(EXAMPLE1, 1.0, 0.75), SetDesc::halfline(1.5));
    assert_eq!(phi_b_value(EXAMPLE1, -2.0, 5.0), SetDesc::halfline(0.0));
}

#[test]
fn incomplete_file_is_rejected() {
    let e = parse("phi_A = halfline(0);").unwrap_err();
    assert!(e.message.contains("missing declarations"), "{e}");
    assert!(e.message.contains("x_domain") && e.message.contains("phi_B") && e.message.contains("f"));
}

#[test]
fn guards_are_checked_when_evaluated() {
    let src = format!("{REST} f = piecewise {{ x > 0 -> 1/x; }};");
    let p = problem_from_source("t", &src).unwrap();
    assert!(p.payoff(0.5, 0.0, 0.0).is_ok());
    match p.payoff(0.0, 0.0, 0.0) {
        Err(crate::Error::Eval(e)) => {
            assert_eq!(e.kind, EvalErrorKind::NoGuardMatched);
            assert_eq!((e.line, e.column), (1, 75));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn division_by_zero_points_at_the_operator() {
    let src = format!("{REST}\nf = 3/0;");
    let ast = parse(&src).unwrap();
    let e = eval_expr(&ast.f, &Env::default()).unwrap_err();
    assert_eq!(e.kind, EvalErrorKind::DivisionByZero);
    assert_eq!((e.line, e.column), (2, 6));
}

#[test]
fn scope_is_enforced_at_parse_time() {
    let e = parse("x_domain = interval(-1, 1);\nphi_A = halfline(b);\nphi_B = halfline(0);\nf = 0;").unwrap_err();
    assert_eq!((e.line, e.column), (2, 18));
    assert!(e.message.contains("`b`"));
    assert!(parse("x_domain = interval(x, 1); phi_A = halfline(0); phi_B = halfline(0); f = 0;").is_err());
    assert!(parse("x_domain = interval(0, 1); phi_A = halfline(0); phi_B = halfline(b); f = 0;").is_err());
}

#[test]
fn malformed_sources() {
    for (src, at) in [
        ("x_domain = interval(-1 1);", (1, 24)),
        ("x_domain = interval(-1, 1) phi_A", (1, 28)),
        ("y = 1;", (1, 1)),
        ("x_domain = halfline(0); x_domain = halfline(1);", (1, 25)),
        ("f = 1 $ 2;", (1, 7)),
        ("f = halfline(0);", (1, 5)),
        ("x_domain = 1;", (1, 12)),
        ("f = piecewise { x -> 1; };", (1, 17)),
        ("f = 1 < 2;", (1, 7)),
    ] {
        let e = parse(src).unwrap_err();
        assert_eq!((e.line, e.column), at, "{src}: {e}");
    }
}

#[test]
fn precedence_and_associativity() {
    let src = format!("{REST} f = 1 - 2 - 3 * -x / 2;");
    let p = problem_from_source("t", &src).unwrap();
    assert_eq!(p.payoff(0.0, 0.0, 0.0).unwrap().to_f64(), -1.0);
    assert_eq!(p.payoff(1.0, 0.0, 0.0).unwrap().to_f64(), 1.0 - 2.0 - -3.0 / 2.0);
    let src = format!("{REST} f = piecewise {{ x < 0 or x > 0 and x < 1 -> 1; otherwise -> 2; }};");
    let p = problem_from_source("t", &src).unwrap();
    assert_eq!(p.payoff(-0.5, 0.0, 0.0).unwrap().to_f64(), 1.0);
    assert_eq!(p.payoff(0.5, 0.0, 0.0).unwrap().to_f64(), 1.0);
    assert_eq!(p.payoff(0.0, 0.0, 0.0).unwrap().to_f64(), 2.0);
}

#[test]
fn first_matching_guard_wins() {
    let src = format!("{REST} f = piecewise {{ x >= 0 -> 1; x >= -1 -> 2; otherwise -> 3; }};");
    let p = problem_from_source("t", &src).unwrap();
    assert_eq!(p.payoff(0.0, 0.0, 0.0).unwrap().to_f64(), 1.0);
    assert_eq!(p.payoff(-0.5, 0.0, 0.0).unwrap().to_f64(), 2.0);
    assert_eq!(p.payoff(-1.0, 0.0, 0.0).unwrap().to_f64(), 2.0);
}

#[test]
fn unions_and_unicode_operators() {
    let src = "x_domain = union(interval(-2, -1), interval(1, 2));\nphi_A = halfline(0);\nphi_B = halfline(0);\nf = piecewise { x \u{2264} 0 -> \u{2212}1; otherwise -> 1; };";
    let p = problem_from_source("t", src).unwrap();
    assert!(p.x_domain.member(1.5) && !p.x_domain.member(0.0));
    assert_eq!(p.payoff(-1.5, 0.0, 0.0).unwrap().to_f64(), -1.0);
}

#[test]
fn fixtures_round_trip() {
    for src in [EXAMPLE1, CONTROL_COMPACT, CONTROL_INDEPENDENT] {
        let ast = parse(src).unwrap();
        let text = format(&ast);
        assert_eq!(parse(&text).unwrap(), ast);
        assert_eq!(format(&parse(&text).unwrap()), text);
    }
}

#[test]
fn fixtures_match_builtins() {
    for (src, np) in [
        (EXAMPLE1, library::example1()),
        (CONTROL_COMPACT, library::control_compact()),
        (CONTROL_INDEPENDENT, library::control_independent()),
    ] {
        let parsed = problem_from_source(np.id, src).unwrap();
        let b = &np.problem;
        assert_eq!(parsed.x_domain, b.x_domain);
        for i in 0..=20 {
            let x = -2.0 + 0.2 * i as f64;
            assert_eq!(parsed.phi_a_at(x).unwrap(), b.phi_a_at(x).unwrap());
            for j in 0..=20 {
                let a = 0.15 * j as f64;
                if !b.phi_a_at(x).unwrap().member(a) {
                    continue;
                }
                assert_eq!(parsed.phi_b_at(x, a).unwrap(), b.phi_b_at(x, a).unwrap(), "{x} {a}");
                for k in 0..=4 {
                    let bb = 0.7 * k as f64;
                    let (u, v) = (parsed.payoff(x, a, bb).unwrap(), b.payoff(x, a, bb).unwrap());
                    assert_eq!(u.to_f64().to_bits(), v.to_f64().to_bits());
                }
            }
        }
    }
}

fn arb_num() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.0f64..100.0).prop_map(ExprKind::Num),
        Just(ExprKind::Var(Var::X)),
        Just(ExprKind::Var(Var::A)),
        Just(ExprKind::Var(Var::B)),
    ]
    .prop_map(|k| Expr::new(k, Span::default()));
    leaf.prop_recursive(4, 24, 3, |inner| {
        let bool_leaf = (inner.clone(), inner.clone(), 0..4u8).prop_map(|(l, r, op)| {
            let op = [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge][op as usize];
            Expr::new(ExprKind::Compare(op, Box::new(l), Box::new(r)), Span::default())
        });
        let guard = (bool_leaf.clone(), bool_leaf, any::<Option<bool>>()).prop_map(|(l, r, op)| match op {
            None => l,
            Some(and) => Expr::new(
                ExprKind::Logic(if and { BoolOp::And } else { BoolOp::Or }, Box::new(l), Box::new(r)),
                Span::default(),
            ),
        });
        prop_oneof![
            inner.clone().prop_map(|e| Expr::new(ExprKind::Neg(Box::new(e)), Span::default())),
            (inner.clone(), inner.clone(), 0..4u8).prop_map(|(l, r, op)| {
                let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][op as usize];
                Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)), Span::default())
            }),
            (proptest::collection::vec((guard, inner.clone()), 1..3), inner).prop_map(|(arms, last)| {
                let mut branches: Vec<Branch> = arms.into_iter().map(|(g, v)| Branch { guard: Some(g), value: v }).collect();
                branches.push(Branch { guard: None, value: last });
                Expr::new(ExprKind::Piecewise(branches), Span::default())
            }),
        ]
    })
}

proptest! {
    #[test]
    fn format_then_parse_is_identity(f in arb_num(), lo in arb_num()) {
        let strip = |e: &Expr| parse(&format!("x_domain = halfline(0); phi_A = halfline(0); phi_B = halfline(0); f = {};", format_expr(e))).map(|a| a.f);
        prop_assume!(strip(&lo).is_ok());
        let ast = ProblemAst {
            x_domain: parse("x_domain = interval(-3, 3); phi_A = halfline(0); phi_B = halfline(0); f = 0;").unwrap().x_domain,
            phi_a: Expr::new(ExprKind::Halfline(Box::new(Expr::new(ExprKind::Num(0.0), Span::default()))), Span::default()),
            phi_b: Expr::new(ExprKind::Halfline(Box::new(Expr::new(ExprKind::Num(1.0), Span::default()))), Span::default()),
            f,
        };
        let text = format(&ast);
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &ast);
        prop_assert_eq!(format(&back), text);
    }

    #[test]
    fn error_positions_lie_in_the_source(src in "[a-z_=;(){},<>+*/ 0-9.\n#-]{0,60}") {
        if let Err(e) = parse(&src) {
            let lines: Vec<&str> = src.split('\n').collect();
            prop_assert!(e.line >= 1 && e.line <= lines.len(), "{:?}", e);
            prop_assert!(e.column >= 1 && e.column <= lines[e.line - 1].chars().count().max(1), "{:?}", e);
        }
    }
}
