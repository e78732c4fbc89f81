//! Randomized invariants: algebra the implementation must respect no
//! matter which inputs show up.

mod common;

use proptest::prelude::*;

use simpcube::composite::{refine, CellBound, Grid};
use simpcube::cubature::{defect, simpson1d};
use simpcube::expr::{parse, Ast, AstKind, BinOp, Func, Span};
use simpcube::kernels::kernel;
use simpcube::oracle::integrate_1d;
use simpcube::{Rectangle, Tolerances, WithMixed};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// Rectangles inside [lo, hi]^2 with sides at least 0.05.
fn rect_in(lo: f64, hi: f64) -> impl Strategy<Value = Rectangle> {
    let side = move || {
        (lo..hi - 0.05, 0.05..(hi - lo)).prop_map(move |(start, len)| {
            let end = (start + len).min(hi);
            (start, end)
        })
    };
    (side(), side()).prop_map(|((a, b), (c, d))| Rectangle::new(a, b, c, d).unwrap())
}

fn node(kind: AstKind) -> Ast {
    Ast { kind, span: Span { start: 0, end: 0 } }
}

fn ast_strategy() -> impl Strategy<Value = Ast> {
    let leaf = prop_oneof![
        (0u32..160_000).prop_map(|n| AstKind::Number(n as f64 / 16.0)),
        Just(AstKind::X),
        Just(AstKind::Y),
        Just(AstKind::Pi),
        Just(AstKind::E),
    ]
    .prop_map(node);
    leaf.prop_recursive(5, 24, 2, |inner| {
        let op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow),
        ];
        let func = prop_oneof![
            Just(Func::Sin),
            Just(Func::Cos),
            Just(Func::Exp),
            Just(Func::Ln),
            Just(Func::Sqrt),
            Just(Func::Abs),
        ];
        prop_oneof![
            inner.clone().prop_map(|a| node(AstKind::Neg(Box::new(a)))),
            (op, inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| node(AstKind::Binary(op, Box::new(l), Box::new(r)))),
            (func, inner).prop_map(|(f, a)| node(AstKind::Call(f, Box::new(a)))),
        ]
    })
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn kernel_maps_hit_the_endpoints_exactly(rect in rect_in(-3.0, 3.0), t in 0.0..=1.0f64) {
        prop_assert_eq!(rect.map_t_to_x(0.0).unwrap(), rect.b());
        prop_assert_eq!(rect.map_t_to_x(1.0).unwrap(), rect.a());
        prop_assert_eq!(rect.map_s_to_y(0.0).unwrap(), rect.d());
        prop_assert_eq!(rect.map_s_to_y(1.0).unwrap(), rect.c());
        // The map runs downhill from b to a.
        let x = rect.map_t_to_x(t).unwrap();
        prop_assert!(rect.a() <= x && x <= rect.b());
        let earlier = rect.map_t_to_x(t * 0.5).unwrap();
        let pad = 1e-12 * (rect.a().abs() + rect.b().abs() + 1.0);
        prop_assert!(earlier >= x - pad, "map not monotone: {} then {}", earlier, x);
    }

    #[test]
    fn kernel_is_antisymmetric_about_the_jump(t in 0.0..0.5f64) {
        let left = kernel(t).unwrap();
        let right = kernel(1.0 - t).unwrap();
        prop_assert!((left + right).abs() <= 1e-15, "p({}) = {}, p(1-t) = {}", t, left, right);
    }

    #[test]
    fn kernel_stays_within_a_third(t in 0.0..=1.0f64) {
        let v = kernel(t).unwrap();
        prop_assert!(v.abs() <= 1.0 / 3.0 + 1e-15);
    }

    #[test]
    fn printed_expressions_reparse_to_the_same_string(ast in ast_strategy()) {
        let shown = ast.to_string();
        let reparsed = parse(&shown)
            .map_err(|e| TestCaseError::fail(format!("{shown}: {e}")))?;
        prop_assert_eq!(reparsed.to_string(), shown);
    }

    #[test]
    fn grids_tile_their_rectangle(
        rect in rect_in(-2.0, 2.5),
        nx in 1u32..=6,
        ny in 1u32..=6,
    ) {
        let grid = Grid::new(&rect, nx, ny).unwrap();
        prop_assert_eq!(grid.cells().len(), (nx * ny) as usize);
        for j in 0..ny {
            for i in 0..nx {
                let cell = grid.cell(i, j);
                if i + 1 < nx {
                    prop_assert_eq!(cell.b(), grid.cell(i + 1, j).a());
                }
                if j + 1 < ny {
                    prop_assert_eq!(cell.d(), grid.cell(i, j + 1).c());
                }
            }
        }
        prop_assert_eq!(grid.cell(0, 0).a(), rect.a());
        prop_assert_eq!(grid.cell(0, 0).c(), rect.c());
        prop_assert_eq!(grid.cell(nx - 1, ny - 1).b(), rect.b());
        prop_assert_eq!(grid.cell(nx - 1, ny - 1).d(), rect.d());
        let total: f64 = grid.cells().iter().map(|c| c.area()).sum();
        prop_assert!((total - rect.area()).abs() <= 1e-12 * rect.area().max(1.0));
    }
}

proptest! {
    #![proptest_config(cfg(16))]

    #[test]
    fn defect_is_linear(
        alpha in -2.0..2.0f64,
        beta in -2.0..2.0f64,
        rect in rect_in(0.0, 1.25),
    ) {
        let tol = Tolerances::default();
        let combo = |x: f64, y: f64| alpha * (x + y).exp() + beta * x * y;
        let d_combo = defect(&combo, &rect, &tol).unwrap();
        let d_exp = defect(&|x: f64, y: f64| (x + y).exp(), &rect, &tol).unwrap();
        let d_xy = defect(&|x: f64, y: f64| x * y, &rect, &tol).unwrap();
        let want = alpha * d_exp.defect + beta * d_xy.defect;
        let slack = 1e-8 * (1.0 + alpha.abs() + beta.abs());
        prop_assert!(
            (d_combo.defect - want).abs() <= slack,
            "combined {} vs recomposed {}",
            d_combo.defect,
            want
        );
    }

    #[test]
    fn defect_of_a_product_splits_per_axis(
        alpha in 0.3..1.5f64,
        shift in 0.0..3.0f64,
        rect in rect_in(0.0, 2.0),
    ) {
        let tol = Tolerances::default();
        let f = move |x: f64, y: f64| (alpha * x).exp() * ((y + shift).sin() + 2.0);
        let d = defect(&f, &rect, &tol).unwrap();
        let gx = move |x: f64| (alpha * x).exp();
        let hy = move |y: f64| (y + shift).sin() + 2.0;
        let sg = simpson1d(gx, rect.a(), rect.b()).unwrap();
        let ig = integrate_1d(gx, rect.a(), rect.b(), 1e-12).unwrap();
        let sh = simpson1d(hy, rect.c(), rect.d()).unwrap();
        let ih = integrate_1d(hy, rect.c(), rect.d(), 1e-12).unwrap();
        let want =
            (sg - ig.value / rect.width()) * (sh - ih.value / rect.height());
        prop_assert!(
            (d.defect - want).abs() <= 1e-8,
            "defect {} vs per-axis product {}",
            d.defect,
            want
        );
    }

    #[test]
    fn oracle_error_estimates_cover_refinement(
        alpha in 0.5..3.0f64,
        (a, b) in (-1.0..1.0f64, 0.1..2.0f64).prop_map(|(a, w)| (a, a + w)),
    ) {
        let g = move |x: f64| (alpha * x).exp() + (3.0 * x).sin();
        let coarse = integrate_1d(g, a, b, 1e-6).unwrap();
        let fine = integrate_1d(g, a, b, 1e-12).unwrap();
        let pad = 1e-12 * (1.0 + fine.value.abs());
        prop_assert!(
            (coarse.value - fine.value).abs() <= coarse.err + fine.err + pad,
            "values {} and {} differ beyond {} + {}",
            coarse.value,
            fine.value,
            coarse.err,
            fine.err
        );
        prop_assert!(fine.err <= 1e-12 + pad);
    }
}

proptest! {
    #![proptest_config(cfg(32))]

    #[test]
    fn bicubics_have_no_defect(
        vals in prop::array::uniform16(-2.0..2.0f64),
        rect in rect_in(-1.0, 1.5),
    ) {
        let mut coeffs = [[0.0; 4]; 4];
        for (k, v) in vals.iter().enumerate() {
            coeffs[k / 4][k % 4] = *v;
        }
        let p = common::PolyXY { coeffs };
        let tol = Tolerances::default();
        let d = defect(&|x, y| p.eval(x, y), &rect, &tol).unwrap();
        prop_assert!(d.defect.abs() <= 1e-10, "defect {}", d.defect);
    }
}

proptest! {
    #![proptest_config(cfg(8))]

    #[test]
    fn refinement_never_loosens_the_certificate(
        rect in rect_in(0.0, 1.5),
        first in 1usize..8,
        extra in 1usize..8,
    ) {
        let tol = Tolerances::default();
        let f = WithMixed::new(
            |x: f64, y: f64| (x + y).exp(),
            |x: f64, y: f64| (x + y).exp(),
        );
        let bound = CellBound::Theorem4Empirical;
        let small = refine(&f, &rect, &bound, &tol, 1e-18, first).unwrap();
        let large = refine(&f, &rect, &bound, &tol, 1e-18, first + extra).unwrap();
        let hw_small = small.certificate.half_width;
        let hw_large = large.certificate.half_width;
        prop_assert!(
            hw_large <= hw_small * (1.0 + 1e-12) + 1e-15,
            "half-width grew from {} to {}",
            hw_small,
            hw_large
        );
    }
}

#[cfg(feature = "parallel")]
mod parallel_agrees_with_sequential {
    use super::*;

    use simpcube::composite::{certify, certify_seq, tightness_scan, tightness_scan_seq};

    proptest! {
        #![proptest_config(cfg(8))]

        #[test]
        fn certificates_match_bitwise(
            rect in rect_in(0.0, 1.5),
            nx in 1u32..=3,
            ny in 1u32..=3,
        ) {
            let tol = Tolerances::default();
            let f = WithMixed::new(
                |x: f64, y: f64| (x + y).exp(),
                |x: f64, y: f64| (x + y).exp(),
            );
            let bound = CellBound::Theorem4Empirical;
            let par = certify(&f, &rect, nx, ny, &tol, &bound).unwrap();
            let seq = certify_seq(&f, &rect, nx, ny, &tol, &bound).unwrap();
            prop_assert_eq!(par, seq);
        }

        #[test]
        fn tightness_rows_match_bitwise(rect in rect_in(0.0, 1.5)) {
            let tol = Tolerances::default();
            let f = WithMixed::new(
                |x: f64, y: f64| (x + y).exp(),
                |x: f64, y: f64| (x + y).exp(),
            );
            let par = tightness_scan(&f, &rect, &[1, 2], &tol).unwrap();
            let seq = tightness_scan_seq(&f, &rect, &[1, 2], &tol).unwrap();
            prop_assert_eq!(par, seq);
        }
    }
}
