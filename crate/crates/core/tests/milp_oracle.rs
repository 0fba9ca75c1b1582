//! Cross-checks the built-in solver against an independent LP code
//! (`minilp`) on random problems, with binaries handled by enumeration.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use windcommit::milp::{solve_lp, solve_milp, Comparator, LpStatus, MilpOptions, MilpProblem, MilpStatus, VarKind};

/// Optimum of the LP with integer columns fixed to `fixed`; `None` when infeasible.
fn reference_lp(p: &MilpProblem, fixed: &[(usize, f64)]) -> Option<f64> {
    let mut m = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = p
        .vars
        .iter()
        .enumerate()
        .map(|(j, v)| match fixed.iter().find(|f| f.0 == j) {
            Some(&(_, val)) => m.add_var(v.cost, (val, val)),
            None => m.add_var(v.cost, (v.lower, v.upper)),
        })
        .collect();
    for c in &p.constraints {
        let terms: Vec<_> = c.coeffs.iter().map(|&(j, a)| (vars[j], a)).collect();
        let op = match c.cmp {
            Comparator::Le => ComparisonOp::Le,
            Comparator::Eq => ComparisonOp::Eq,
            Comparator::Ge => ComparisonOp::Ge,
        };
        m.add_constraint(&terms[..], op, c.rhs);
    }
    match m.solve() {
        Ok(s) => Some(s.objective()),
        Err(minilp::Error::Infeasible) => None,
        Err(e) => panic!("reference solver failed: {e}"),
    }
}

fn enumerate(p: &MilpProblem) -> Option<f64> {
    let bins: Vec<usize> = (0..p.num_vars()).filter(|&j| p.vars[j].kind == VarKind::Binary).collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << bins.len()) {
        let fixed: Vec<(usize, f64)> = bins.iter().enumerate().map(|(k, &j)| (j, ((mask >> k) & 1) as f64)).collect();
        if let Some(v) = reference_lp(p, &fixed) {
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    best
}

/// Bounded random problem: every column boxed so the LP is never unbounded.
fn random_problem(seed: u64, binaries: usize, continuous: usize, rows: usize) -> MilpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = MilpProblem::new();
    for _ in 0..binaries {
        p.add_binary("b", rng.random_range(-10.0..10.0));
    }
    for _ in 0..continuous {
        let lo = rng.random_range(-5.0..2.0);
        p.add_continuous("x", lo, lo + rng.random_range(0.5..8.0), rng.random_range(-10.0..10.0));
    }
    let n = p.num_vars();
    for _ in 0..rows {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.5) {
                coeffs.push((j, rng.random_range(-5.0..5.0)));
            }
        }
        let cmp = match rng.random_range(0..5) {
            0 => Comparator::Eq,
            1 | 2 => Comparator::Ge,
            _ => Comparator::Le,
        };
        let rhs = rng.random_range(-6.0..6.0);
        p.add_constraint("r", coeffs, cmp, rhs);
    }
    p
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn random_lps_match_reference() {
    for seed in 0..300 {
        let p = random_problem(seed, 0, 3 + (seed as usize % 12), 2 + (seed as usize % 10));
        let ours = solve_lp(&p).unwrap();
        let reference = reference_lp(&p, &[]);
        match reference {
            None => assert_eq!(ours.status, LpStatus::Infeasible, "seed {seed}"),
            Some(v) => {
                assert_eq!(ours.status, LpStatus::Optimal, "seed {seed}");
                assert!(close(ours.objective, v), "seed {seed}: {} vs {v}", ours.objective);
                assert!(p.residuals(&ours.values).row <= 1e-7, "seed {seed}");
            }
        }
    }
}

#[test]
fn random_milps_match_enumeration() {
    for seed in 0..150 {
        let p = random_problem(1000 + seed, 1 + (seed as usize % 8), 1 + (seed as usize % 10), 2 + (seed as usize % 8));
        let ours = solve_milp(&p, &MilpOptions::default()).unwrap();
        match enumerate(&p) {
            None => assert_eq!(ours.status, MilpStatus::Infeasible, "seed {seed}"),
            Some(v) => {
                assert_eq!(ours.status, MilpStatus::Optimal, "seed {seed}");
                assert!(close(ours.objective, v), "seed {seed}: {} vs {v}", ours.objective);
                assert!(ours.bound <= v + 1e-6 * v.abs().max(1.0), "seed {seed}: bound above optimum");
                let r = p.residuals(&ours.values);
                assert!(r.row <= 1e-6 && r.integrality <= 1e-6 && r.bound <= 1e-9, "seed {seed}: {r:?}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn milp_matches_enumeration_up_to_12_binaries(seed in 0u64..1_000_000, bins in 1usize..=12, conts in 1usize..=30, rows in 1usize..=10) {
        let p = random_problem(seed, bins, conts, rows);
        let ours = solve_milp(&p, &MilpOptions::default()).unwrap();
        match enumerate(&p) {
            None => prop_assert_eq!(ours.status, MilpStatus::Infeasible),
            Some(v) => {
                prop_assert_eq!(ours.status, MilpStatus::Optimal);
                prop_assert!(close(ours.objective, v), "{} vs {}", ours.objective, v);
            }
        }
    }

    #[test]
    fn solve_is_deterministic(seed in 0u64..1_000_000) {
        let p = random_problem(seed, 6, 8, 6);
        let a = solve_milp(&p, &MilpOptions::default()).unwrap();
        let b = solve_milp(&p, &MilpOptions::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}
