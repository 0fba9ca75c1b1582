use std::fmt::Write as _;

use crate::scenario_tree::{sig10, ProbabilityVector, QuantileSet};

use super::extract::TRIGGER_PHRASE;
use super::ErrorStats;

fn num(x: f64) -> String {
    let s = sig10(x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", items.join(", "))
}

fn placeholders(n: usize) -> String {
    (1..=n).map(|i| format!("p{i}")).collect::<Vec<_>>().join(", ")
}

/// The analysis request. `history` holds `(actual, forecast)` wind pairs in GW.
pub fn build_agent1_prompt(
    stats: &ErrorStats,
    quantiles: &QuantileSet,
    default_probs: &ProbabilityVector,
    history: &[(f64, f64)],
) -> String {
    let n = quantiles.len();
    let mut p = String::new();
    p.push_str("## Wind scenario tree: branch probability revision\n\n");
    p.push_str(
        "A wind power scenario tree is built from an AR(1) model of the forecast error \
         (actual minus forecast). Each branch follows one quantile of that error.\n",
    );
    let _ = writeln!(p, "Quantile levels: {}", list(quantiles.levels()));
    let _ = writeln!(p, "Current branch probabilities: {default_probs}");
    p.push_str(
        "\nRevise these probabilities using the forecast error history below. The revised vector \
         prob_new may be asymmetric when actual wind tends to run above or below the forecast.\n\n",
    );
    p.push_str("Your answer must include:\n");
    let _ = writeln!(
        p,
        "- A new probability vector prob_new over the same {n} quantiles that is non-negative and sums to 1."
    );
    p.push_str("- The reasoning behind it, whether statistical calibration or a heuristic adjustment.\n");
    p.push_str(
        "- Why the revised probabilities should give more realistic or robust wind planning than the \
         symmetric default.\n\n",
    );
    p.push_str("Work through the data step by step:\n");
    p.push_str("a) Compute the errors: e(t) = Actual(t) - Forecasted(t)\n");
    p.push_str("b) Derive the mean and standard deviation of the errors:\n");
    p.push_str("   mu = sum(e(t)) / N\n");
    p.push_str("   sigma = sqrt(sum((e(t) - mu)^2) / (N - 1))\n");
    p.push_str("c) Compare the errors with the quantile levels and choose prob_new.\n\n");

    p.push_str("### History (GW)\n");
    if history.is_empty() {
        p.push_str("No realized data is available yet.\n");
    } else {
        p.push_str("t, actual, forecast, error\n");
        for (t, (a, f)) in history.iter().enumerate() {
            let _ = writeln!(p, "{}, {}, {}, {}", t + 1, num(*a), num(*f), num(a - f));
        }
    }
    p.push_str("\n### Error statistics\n");
    let _ = writeln!(p, "N = {}", stats.count);
    let _ = writeln!(p, "mu = {}", num(stats.mu));
    let _ = writeln!(p, "sigma = {}", num(stats.sigma));
    let _ = write!(p, "\nEnd with a single line of the form\n{TRIGGER_PHRASE}: {}\n", placeholders(n));
    p
}

/// The extraction request wrapping the analysis reply.
pub fn build_agent2_prompt(agent1_reply: &str, expected_len: usize) -> String {
    let ph = placeholders(expected_len);
    let mut p = String::new();
    let _ = writeln!(
        p,
        "Extract '{TRIGGER_PHRASE}' from the text below. Locate the value by searching for that exact phrase."
    );
    let _ = writeln!(p, "Reply strictly in this JSON format: {{ 'prob_new': [{ph}] }}");
    p.push_str("Example\n");
    let _ = writeln!(p, "Input: 'The calculation resulted in {TRIGGER_PHRASE}: 0.05, 0.25, 0.4, 0.25, 0.05.'");
    p.push_str("Output: { 'prob_new': [0.05, 0.25, 0.4, 0.25, 0.05] }\n");
    p.push_str("Return only the extracted value in that format.\n\nText:\n");
    p.push_str(agent1_reply);
    p.push('\n');
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(mu: f64, sigma: f64) -> ErrorStats {
        ErrorStats { errors: vec![], mu, sigma, count: 1 }
    }

    #[test]
    fn default_prompt_contents() {
        let q = QuantileSet::default();
        let d = ProbabilityVector::default_for(&q);
        let p = build_agent1_prompt(&stats(0.25, 1.5), &q, &d, &[(5.0, 4.0), (3.0, 4.5)]);
        assert!(p.contains("prob_new"));
        assert!(p.contains("[0.05556, 0.24444, 0.4, 0.24444, 0.05556]"));
        assert!(p.contains("[0.01, 0.1, 0.5, 0.9, 0.99]"));
        assert!(p.contains("e(t) = Actual(t) - Forecasted(t)"));
        assert!(p.contains("sigma = sqrt(sum((e(t) - mu)^2) / (N - 1))"));
        assert!(p.contains("1, 5, 4, 1\n2, 3, 4.5, -1.5\n"));
        assert!(p.contains("sums to 1"));
    }

    #[test]
    fn empty_history() {
        let q = QuantileSet::default();
        let d = ProbabilityVector::default_for(&q);
        let p = build_agent1_prompt(&stats(0.0, 1.0), &q, &d, &[]);
        assert!(p.contains("No realized data is available yet."));
        let s = &p[p.find("### Error statistics").unwrap()..];
        assert!(s.contains("mu = 0\n") && s.contains("sigma = 1\n"));
    }

    #[test]
    fn agent2_prompt_embeds_reply() {
        let p = build_agent2_prompt("some analysis", 5);
        assert!(p.contains("{ 'prob_new': [p1, p2, p3, p4, p5] }"));
        assert!(p.ends_with("some analysis\n"));
    }
}
