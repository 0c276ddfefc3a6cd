mod common;

use scl_core::baselines::{run_method, BaselineConfig, Method, RcThresholdMode};
use scl_core::greedy::{HyperParams, Problem};
use scl_core::synth::{generate_instance, InstanceParams};
use scl_core::ComplexSkeleton;

fn setups() -> impl Iterator<Item = (u64, f64)> {
    (0..8u64).map(|s| (s, [0.0, 0.1, 0.3][s as usize % 3]))
}

#[test]
fn outputs_are_closed_deterministic_and_budgeted() {
    let skel = ComplexSkeleton::new(10).unwrap();
    for (seed, noise) in setups() {
        let inst = InstanceParams { n_nodes: 10, p0: 30, p1: 30, node_noise_std: noise, ..Default::default() };
        let (truth, sig) = generate_instance(&skel, &inst, 900 + seed).unwrap();
        let params = HyperParams {
            e_min: truth.selection.n_active_edges(),
            t_min: truth.selection.n_active_triangles(),
            ..HyperParams::default()
        };
        let problem = Problem::new(&skel, &sig.x0, &sig.x1_obs, &sig.observed_edges).unwrap();
        for method in Method::ALL {
            for mode in [RcThresholdMode::Budget, RcThresholdMode::Absolute] {
                let config = BaselineConfig { method, rc_threshold_mode: mode, ..BaselineConfig::default() };
                let a = run_method(method, &problem, &params, &config).unwrap();
                let b = run_method(method, &problem, &params, &config).unwrap();
                assert_eq!(a.selection, b.selection, "{method} not deterministic");
                assert!(a.selection.is_closed(&skel), "{method} output not closed");
                assert_eq!(a.closure.count, 0);
                let budgeted = method != Method::Rc || mode == RcThresholdMode::Budget;
                if method == Method::Rc && budgeted {
                    assert_eq!(a.selection.n_active_edges(), params.e_min, "RC edge budget");
                    assert!(a.selection.n_active_triangles() <= params.t_min, "RC triangle budget");
                }
                if method == Method::SepScl {
                    assert_eq!(a.selection.n_active_edges(), params.e_min, "SepSCL edge budget");
                    assert!(a.selection.n_active_triangles() <= params.t_min);
                }
            }
        }
    }
}

#[test]
fn sepscl_triangles_fill_budget_when_feasible() {
    let skel = ComplexSkeleton::new(10).unwrap();
    let inst = InstanceParams { n_nodes: 10, p0: 30, p1: 30, ..Default::default() };
    let (truth, sig) = generate_instance(&skel, &inst, 31).unwrap();
    let problem = Problem::new(&skel, &sig.x0, &sig.x1_obs, &sig.observed_edges).unwrap();
    let params = HyperParams { e_min: skel.n_edges(), t_min: truth.selection.n_active_triangles(), ..HyperParams::default() };
    let state = run_method(Method::SepScl, &problem, &params, &BaselineConfig::default()).unwrap();
    // With every edge active every triangle is supported, so the budget is met exactly.
    assert_eq!(state.selection.n_active_triangles(), params.t_min);
}
