mod common;

use gridplan::formulation::{build_scalable_model, decode_solution, ScalableInstance};
use gridplan::solver::{solve, SolveConfig, SolverEngine};

#[test]
fn scalable_pipeline_smoke() {
    let fx = common::fixture_two_arms();
    let inst = ScalableInstance::new(&fx.topology, &fx.scenarios, &fx.catalog, &fx.profiles)
        .unwrap()
        .with_lambda(0.5)
        .with_voll(1.5);
    let model = build_scalable_model(&inst).unwrap();
    println!(
        "model: {} vars, {} constraints",
        model.num_vars(),
        model.num_constrs()
    );
    let res = solve(&model, &SolveConfig::default()).unwrap();
    println!("status {:?} objective {:?}", res.status, res.objective);
    assert!(res.status.has_solution());
    let outcome = decode_solution(&inst, &res).unwrap();
    println!(
        "plan: lines {:?} storage {:?} base ${} expected ${} cvar ${} obj ${}",
        outcome.plan.built_lines,
        outcome.plan.storage_kwh,
        outcome.base_imbalance_cost_usd_per_year,
        outcome.expected_loss_cost_usd_per_year,
        outcome.cvar_loss_cost_usd_per_year,
        outcome.objective_usd,
    );
    let oracle = common::brute_force_optimum(&fx, 0.5, 1.5, 0.95);
    println!("oracle {oracle} vs milp {}", outcome.objective_usd);
    let rel = (outcome.objective_usd - oracle).abs() / oracle.abs().max(1.0);
    assert!(rel <= 1e-6, "relative gap {rel}");

    // cross-engine agreement
    let res2 = solve(
        &model,
        &SolveConfig {
            engine: SolverEngine::BranchBound,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(res2.status.has_solution());
    let a = res.objective.unwrap();
    let b = res2.objective.unwrap();
    assert!(
        (a - b).abs() <= 1e-6 * a.abs().max(1.0),
        "engines disagree: {a} vs {b}"
    );
}
