//! Properties of the probability-refinement pipeline.

use proptest::prelude::*;
use windcommit::agents::{
    build_agent1_prompt, build_agent2_prompt, compute_error_stats, deterministic_calibration, parse_agent2_reply,
    refine_probabilities, render_agent2_reply, validate_probability_vector, AuditLog, Direction, Provenance,
    RefineContext, RefineOptions, ScriptedBackend, ValidationError, DEFAULT_SUM_TOL, TRIGGER_PHRASE,
};
use windcommit::scenario_tree::{ProbabilityVector, QuantileSet};

fn ctx(actual: &[f64], forecast: &[f64]) -> RefineContext {
    let q = QuantileSet::default();
    RefineContext {
        stats: compute_error_stats(actual, forecast).unwrap(),
        history: actual.iter().copied().zip(forecast.iter().copied()).collect(),
        defaults: ProbabilityVector::default_for(&q),
        quantiles: q,
        step: Some(0),
    }
}

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_filter_map("all zero", |raw| {
        let total: f64 = raw.iter().sum();
        (total > 1e-6).then(|| raw.iter().map(|x| x / total).collect())
    })
}

#[test]
fn prompts_carry_the_contract() {
    let c = ctx(&[10.0, 12.0, 9.0], &[11.0, 11.0, 10.0]);
    let p1 = build_agent1_prompt(&c.stats, &c.quantiles, &c.defaults, &c.history);
    assert!(p1.contains(TRIGGER_PHRASE));
    assert!(p1.contains("[0.05556, 0.24444, 0.4, 0.24444, 0.05556]"));
    assert!(p1.contains("0.01, 0.1, 0.5, 0.9, 0.99"));
    let p2 = build_agent2_prompt("some analysis", 5);
    assert!(p2.contains("some analysis"));
    assert!(p2.contains("prob_new"));
}

#[test]
fn validation_errors_are_specific() {
    assert_eq!(
        validate_probability_vector(&[0.5, 0.5], 3, 1e-3),
        Err(ValidationError::Length { expected: 3, got: 2 })
    );
    assert!(matches!(validate_probability_vector(&[1.1, -0.1], 2, 1e-3), Err(ValidationError::Negative { index: 1, .. })));
    assert!(matches!(validate_probability_vector(&[0.5, 0.6], 2, 1e-3), Err(ValidationError::SumDrift { .. })));
    let p = validate_probability_vector(&[0.3, 0.7005], 2, 1e-3).unwrap();
    assert!((p.sum() - 1.0).abs() < 1e-15);
}

#[test]
fn audit_log_records_each_exchange() {
    let c = ctx(&[10.0, 12.0], &[11.0, 11.0]);
    let mut mock = ScriptedBackend::new(vec!["nothing useful".into()]).unwrap();
    let mut log = AuditLog::new();
    let r = refine_probabilities(&mut mock, &c, &RefineOptions { max_retries: 3, ..RefineOptions::default() }, &mut log);
    assert_eq!(r.provenance, Provenance::Fallback);
    assert_eq!(r.attempts, 4);
    assert_eq!(log.exchanges(), 4);
    // request, response and outcome per attempt, plus the fallback line
    assert_eq!(log.records().len(), 4 * 3 + 1);
    assert!(log.records().iter().filter(|r| r.direction == Direction::Request).all(|r| r.agent == 1));
}

proptest! {
    #[test]
    fn rendered_reply_parses_back(v in simplex(5), prefix in "[a-zA-Z ,.:]{0,60}") {
        let reply = format!("{prefix}{}", render_agent2_reply(&v));
        prop_assert_eq!(parse_agent2_reply(&reply, 5).unwrap(), v);
    }

    #[test]
    fn refine_always_returns_a_distribution(reply in ".{0,300}", answer in any::<bool>(), v in simplex(5)) {
        let reply = if answer { format!("{reply} {}", render_agent2_reply(&v)) } else { reply };
        let c = ctx(&[10.0, 12.0, 9.0, 4.0], &[11.0, 11.0, 10.0, 4.5]);
        let mut mock = ScriptedBackend::new(vec![reply]).unwrap();
        let r = refine_probabilities(&mut mock, &c, &RefineOptions::default(), &mut AuditLog::new());
        let p = r.probabilities.as_slice();
        prop_assert_eq!(p.len(), 5);
        prop_assert!(p.iter().all(|&x| x >= 0.0 && x.is_finite()));
        prop_assert!((r.probabilities.sum() - 1.0).abs() < 1e-9);
        if answer {
            prop_assert_eq!(r.provenance, Provenance::Llm);
            for (a, b) in p.iter().zip(&v) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn validated_vectors_are_distributions(v in prop::collection::vec(-0.1f64..0.6, 5)) {
        if let Ok(p) = validate_probability_vector(&v, 5, DEFAULT_SUM_TOL) {
            prop_assert!(p.as_slice().iter().all(|&x| x >= 0.0));
            prop_assert!((p.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn calibration_respects_floor(
        errors in prop::collection::vec(-5.0f64..5.0, 1..40),
        floor in 0.0f64..0.1,
        shrink in 0.0f64..1.0,
    ) {
        let zeros = vec![0.0; errors.len()];
        let stats = compute_error_stats(&errors, &zeros).unwrap();
        let q = QuantileSet::default();
        let p = deterministic_calibration(&stats, &q, &ProbabilityVector::default_for(&q), floor, shrink);
        let bound = floor / (1.0 + q.len() as f64 * floor);
        prop_assert!(p.as_slice().iter().all(|&x| x >= bound - 1e-15));
        prop_assert!((p.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn calibration_ignores_shift_and_scale(
        errors in prop::collection::vec(-5.0f64..5.0, 2..30),
        shift in -3.0f64..3.0,
        scale in 0.5f64..4.0,
    ) {
        let zeros = vec![0.0; errors.len()];
        let moved: Vec<f64> = errors.iter().map(|e| e * scale + shift).collect();
        let a = compute_error_stats(&errors, &zeros).unwrap();
        let b = compute_error_stats(&moved, &zeros).unwrap();
        prop_assert!((b.mu - (a.mu * scale + shift)).abs() < 1e-9);
        prop_assert!((b.sigma - a.sigma * scale).abs() < 1e-9);
        prop_assume!(a.sigma > 1e-6);
        let q = QuantileSet::default();
        let d = ProbabilityVector::default_for(&q);
        let pa = deterministic_calibration(&a, &q, &d, 0.01, 0.5);
        let pb = deterministic_calibration(&b, &q, &d, 0.01, 0.5);
        for (x, y) in pa.as_slice().iter().zip(pb.as_slice()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}
