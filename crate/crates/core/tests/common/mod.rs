//! Independent reference for small unit-commitment instances: every
//! commitment pattern is enumerated and the dispatch for each is solved as an
//! LP with `minilp`, written from the model description rather than from the
//! crate's MILP builder.

#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use windcommit::scenario_tree::ProbabilityVector;
use windcommit::uc::{Generator, RampMode, UcInstance};

/// Expected-cost optimum over all commitment patterns; `None` if infeasible.
pub fn enumerate_uc(inst: &UcInstance) -> Option<f64> {
    let g_n = inst.generators.len();
    let k = inst.stages();
    let s_n = inst.scenarios();
    let na = inst.nonanticipativity_stages;
    // free bits: shared stages once, the rest per scenario
    let slots: Vec<(Option<usize>, usize, usize)> = (0..g_n)
        .flat_map(|g| {
            let shared = (0..na).map(move |t| (None, g, t));
            let own = (0..s_n).flat_map(move |n| (na..k).map(move |t| (Some(n), g, t)));
            shared.chain(own)
        })
        .collect();
    assert!(slots.len() <= 16, "too many commitment bits for enumeration");
    let mut best: Option<f64> = None;
    for mask in 0u32..(1u32 << slots.len()) {
        let mut y = vec![vec![vec![false; k]; g_n]; s_n];
        for (b, &(n, g, t)) in slots.iter().enumerate() {
            let on = (mask >> b) & 1 == 1;
            match n {
                None => (0..s_n).for_each(|n| y[n][g][t] = on),
                Some(n) => y[n][g][t] = on,
            }
        }
        if let Some(v) = dispatch(inst, &y) {
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    best
}

/// Cheapest dispatch for fixed commitments `y[n][g][t]`, startup costs included.
pub fn dispatch(inst: &UcInstance, y: &[Vec<Vec<bool>>]) -> Option<f64> {
    let g_n = inst.generators.len();
    let k = inst.stages();
    let dt = inst.dt;
    let mut m = Problem::new(OptimizationDirection::Minimize);
    let mut startup_cost = 0.0;
    let mut p: Vec<Vec<Vec<Variable>>> = Vec::new();
    for (n, &pi) in inst.probabilities.as_slice().iter().enumerate() {
        let mut pn = Vec::new();
        for (g, gen) in inst.generators.iter().enumerate() {
            let mut pg = Vec::new();
            for t in 0..k {
                let on = y[n][g][t];
                let was_on = if t == 0 { inst.initial_commitment[g] } else { y[n][g][t - 1] };
                if on && !was_on {
                    startup_cost += pi * gen.startup_cost;
                }
                let (lo, hi) = if on { (gen.p_min, gen.p_max) } else { (0.0, 0.0) };
                pg.push(m.add_var(pi * dt * gen.gen_cost, (lo, hi)));
            }
            pn.push(pg);
        }
        p.push(pn);
    }
    for (n, &pi) in inst.probabilities.as_slice().iter().enumerate() {
        for t in 0..k {
            let w = inst.wind[n][t];
            let wc = m.add_var(0.0, (0.0, w));
            let lc = m.add_var(pi * inst.voll * dt, (0.0, inst.demand[t]));
            // sum P - wc + lc = demand - wind
            let mut terms: Vec<(Variable, f64)> = (0..g_n).map(|g| (p[n][g][t], 1.0)).collect();
            terms.push((wc, -1.0));
            terms.push((lc, 1.0));
            m.add_constraint(&terms[..], ComparisonOp::Eq, inst.demand[t] - w);

            for (g, gen) in inst.generators.iter().enumerate() {
                let (was_on, prev): (bool, Option<Variable>) =
                    if t == 0 { (inst.initial_commitment[g], None) } else { (y[n][g][t - 1], Some(p[n][g][t - 1])) };
                let p0 = if t == 0 { inst.initial_output[g] } else { 0.0 };
                let up = dt * gen.ramp_up;
                let down = dt * gen.ramp_down;
                let (up_lim, down_lim) = match inst.ramp_mode {
                    RampMode::StartupAware => (
                        if was_on { up } else { gen.p_min.max(up) },
                        if y[n][g][t] { down } else { gen.p_min.max(down) },
                    ),
                    RampMode::Literal => {
                        let f = if was_on { 1.0 } else { 0.0 };
                        (up * f, down * f)
                    }
                };
                // P(t) - P(t-1) within [-down_lim, up_lim]
                match prev {
                    Some(pp) => {
                        m.add_constraint(&[(p[n][g][t], 1.0), (pp, -1.0)], ComparisonOp::Le, up_lim);
                        m.add_constraint(&[(p[n][g][t], 1.0), (pp, -1.0)], ComparisonOp::Ge, -down_lim);
                    }
                    None => {
                        m.add_constraint(&[(p[n][g][t], 1.0)], ComparisonOp::Le, p0 + up_lim);
                        m.add_constraint(&[(p[n][g][t], 1.0)], ComparisonOp::Ge, p0 - down_lim);
                    }
                }
                if n > 0 && t < inst.nonanticipativity_stages {
                    m.add_constraint(&[(p[n][g][t], 1.0), (p[0][g][t], -1.0)], ComparisonOp::Eq, 0.0);
                }
            }
        }
    }
    match m.solve() {
        Ok(sol) => Some(sol.objective() + startup_cost),
        Err(minilp::Error::Infeasible) => None,
        Err(e) => panic!("reference LP failed: {e}"),
    }
}

/// Seeded instance with at most `max_g` units, `max_k` stages, `max_s` scenarios.
pub fn random_instance(seed: u64, max_g: usize, max_k: usize, max_s: usize) -> UcInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g_n = rng.random_range(1..=max_g);
    let k = rng.random_range(1..=max_k);
    let s_n = rng.random_range(1..=max_s);
    let generators: Vec<Generator> = (0..g_n)
        .map(|i| {
            let p_max = rng.random_range(2.0..15.0);
            let ramp = rng.random_range(1.0..12.0);
            Generator {
                name: format!("G{}", i + 1),
                startup_cost: rng.random_range(0.0..5e6),
                p_max,
                p_min: rng.random_range(0.0..0.5) * p_max,
                gen_cost: rng.random_range(20e3..150e3),
                ramp_up: ramp,
                ramp_down: ramp * rng.random_range(0.5..1.5),
            }
        })
        .collect();
    let initial_commitment: Vec<bool> = (0..g_n).map(|_| rng.random_bool(0.6)).collect();
    let initial_output = generators
        .iter()
        .zip(&initial_commitment)
        .map(|(g, &on)| if on { g.p_min + rng.random_range(0.0..0.3) * (g.p_max - g.p_min) } else { 0.0 })
        .collect();
    let raw: Vec<f64> = (0..s_n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    UcInstance {
        dt: if rng.random_bool(0.5) { 0.5 } else { 1.0 },
        voll: rng.random_range(100e3..400e3),
        demand: (0..k).map(|_| rng.random_range(0.0..25.0)).collect(),
        wind: (0..s_n).map(|_| (0..k).map(|_| rng.random_range(0.0..10.0)).collect()).collect(),
        probabilities: ProbabilityVector::normalized(raw.iter().map(|x| x / total).collect()).unwrap(),
        initial_commitment,
        initial_output,
        nonanticipativity_stages: rng.random_range(1..=k),
        ramp_mode: if rng.random_bool(0.8) { RampMode::StartupAware } else { RampMode::Literal },
        generators,
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
