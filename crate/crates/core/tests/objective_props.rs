use abp_core::{build_benchmark, BenchmarkName, ProblemInstance};
use proptest::prelude::*;

fn sample_point(problem: &ProblemInstance, unit: &[f64]) -> Vec<f64> {
    let set = problem.decision_set();
    let raw: Vec<f64> = set
        .lower()
        .iter()
        .zip(set.upper())
        .zip(unit)
        .map(|((l, u), t)| l + (u - l) * t)
        .collect();
    set.project(&raw)
}

/// Central differences against the analytic Jacobian, at points kept a
/// step away from the box faces so both probes stay on the smooth branch.
fn check_jacobian(name: BenchmarkName, unit: &[f64]) -> Result<(), TestCaseError> {
    let spec = build_benchmark(name);
    let problem = &spec.problem;
    let x = sample_point(problem, unit);
    let jac = problem.jacobian(&x);
    let h = 1e-6;
    for j in 0..problem.n() {
        let mut plus = x.clone();
        let mut minus = x.clone();
        plus[j] += h;
        minus[j] -= h;
        let fp = problem.evaluate(&plus);
        let fm = problem.evaluate(&minus);
        for i in 0..problem.m() {
            let fd = (fp[i] - fm[i]) / (2.0 * h);
            let exact = jac.get(i, j);
            prop_assert!(
                (fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()),
                "{name}: d f{i} / d x{j} at {x:?}: fd {fd} vs {exact}"
            );
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cvx_jacobians_match_finite_differences(unit in prop::collection::vec(0.01..0.99f64, 3)) {
        check_jacobian(BenchmarkName::Cvx1, &unit)?;
        check_jacobian(BenchmarkName::Cvx2, &unit)?;
        check_jacobian(BenchmarkName::Cvx3, &unit)?;
    }

    #[test]
    fn zdt_jacobians_match_finite_differences(unit in prop::collection::vec(0.01..0.99f64, 30)) {
        check_jacobian(BenchmarkName::Zdt1, &unit)?;
        check_jacobian(BenchmarkName::Zdt2, &unit)?;
    }

    #[test]
    fn zdt1_stays_finite_near_the_lower_face(x1 in 0.0..1e-9f64, tail in prop::collection::vec(0.0..1.0f64, 29)) {
        let spec = build_benchmark(BenchmarkName::Zdt1);
        let mut x = vec![x1];
        x.extend(tail);
        prop_assert!(spec.problem.evaluate(&x).iter().all(|v| v.is_finite()));
        prop_assert!(spec.problem.jacobian(&x).is_finite());
    }
}
