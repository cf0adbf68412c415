//! Property tests for the matrix kernel and the inequality reports.

use mhessian::field::BallSpace;
use mhessian::inequalities::{check_anpo, check_isoperimetric, check_poincare, cofactor, Sampling};
use mhessian::symfunc::{m_trace, m_trace_gradient, maclaurin_margin, traces_with, TraceMethod};
use mhessian::SymMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sym() -> impl Strategy<Value = SymMatrix> {
    (2usize..=6).prop_flat_map(|n| {
        prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |v| SymMatrix::from_fn(n, |i, j| v[i * n + j]))
    })
}

fn positive_diag() -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(0.01f64..5.0, 2..=6).prop_map(|d| SymMatrix::from_diagonal(&d).unwrap())
}

proptest! {
    #[test]
    fn trace_is_homogeneous(s in sym(), c in -2.0f64..2.0) {
        for m in 1..=s.dim() {
            let a = m_trace(&s.scaled(c), m).unwrap();
            let b = c.powi(m as i32) * m_trace(&s, m).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn euler_identity(s in sym()) {
        let n = s.dim();
        for m in 1..=n {
            let g = m_trace_gradient(&s, m).unwrap();
            let contraction: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| g.get(i, j) * s.get(i, j)).sum();
            let t = m_trace(&s, m).unwrap();
            prop_assert!((contraction - m as f64 * t).abs() <= 1e-9 * t.abs().max(1.0));
        }
    }

    #[test]
    fn methods_agree(s in sym()) {
        let a = traces_with(&s, TraceMethod::Eigen);
        let b = traces_with(&s, TraceMethod::FaddeevLeVerrier);
        for m in 0..=s.dim() {
            prop_assert!((a.get(m) - b.get(m)).abs() <= 1e-9 * a.get(m).abs().max(1.0));
        }
    }

    #[test]
    fn cofactor_is_top_gradient(s in sym()) {
        let n = s.dim();
        let g = m_trace_gradient(&s, n).unwrap();
        let c = cofactor(&s);
        for i in 0..n {
            for j in 0..n {
                prop_assert!((g.get(i, j) - c.get(i, j)).abs() <= 1e-9 * g.inf_norm().max(1.0));
            }
        }
    }

    #[test]
    fn maclaurin_on_positive_diagonals(s in positive_diag()) {
        let n = s.dim();
        for m in 2..=n {
            for l in 1..m {
                prop_assert!(maclaurin_margin(&s, l, m).unwrap() >= -1e-12);
            }
        }
    }

    #[test]
    fn maclaurin_equality_at_identity(c in 0.1f64..10.0, n in 2usize..=6) {
        let s = SymMatrix::identity(n).scaled(c);
        for m in 2..=n {
            prop_assert!(maclaurin_margin(&s, 1, m).unwrap().abs() <= 1e-12 * c.max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn anpo_is_two_homogeneous(seed in 0u64..1000, c in 0.1f64..5.0) {
        let space = BallSpace::new(3, 1.0, 65).unwrap();
        let w = space.extremal(2, 0).unwrap();
        let u = space.random_smooth(&mut ChaCha8Rng::seed_from_u64(seed));
        let cu = space.function(|_| 0.0);
        let cu = mhessian::Space::lin_comb(&space, c, &u, 0.0, &cu).unwrap();
        let a = check_anpo(&space, &u, &w, 2, 0).unwrap();
        let b = check_anpo(&space, &cu, &w, 2, 0).unwrap();
        prop_assert!((b.margin - c * c * a.margin).abs() <= 1e-10 * b.rhs.abs().max(1.0));
    }

    #[test]
    fn poincare_and_isoperimetric_agree(seed in 0u64..1000) {
        let space = BallSpace::new(3, 1.0, 65).unwrap();
        for (m, l) in [(2, 0), (2, 1), (3, 1)] {
            let w = space.extremal(m, l).unwrap();
            let u = space.random_admissible(&mut ChaCha8Rng::seed_from_u64(seed), m).unwrap();
            let p = check_poincare(&space, &u, &w, m, l).unwrap();
            let i = check_isoperimetric(&space, &u, &w, m, l).unwrap();
            let from_p = (p.lhs / p.rhs).powi(m as i32 + 1);
            let from_i = i.lhs / i.rhs;
            prop_assert!((from_p - from_i).abs() <= 1e-10 * from_i.abs(), "{from_p} {from_i}");
        }
    }
}
