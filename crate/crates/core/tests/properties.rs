use proptest::prelude::*;

use droplet_core::damping::{build_warp, DampingSpec, DEFAULT_WARP_RESOLUTION};
use droplet_core::hopf_lax::{admissible_set_contains_tol, solve_ibvp, solve_ivp, GridSpec, SolveOptions};
use droplet_core::profile::Profile;
use droplet_core::scenario::{run_scenario, RunOptions, Scenario};
use droplet_core::verify::entropy_audit;
use droplet_core::viscous::{run_viscous, BoundaryMode, ViscousOptions};

fn steps(breaks: Vec<f64>, values: Vec<f64>) -> Profile {
    Profile::piecewise_constant(breaks, values).unwrap()
}

fn pieces(lo: f64, hi: f64, n: usize) -> impl Strategy<Value = Profile> {
    prop::collection::vec(-1.0f64..1.0, n).prop_map(move |vals| {
        let breaks = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
        steps(breaks, vals)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn warp_round_trip(alpha in -1.5f64..1.5, t in 0.0f64..1.0) {
        let w = build_warp(&DampingSpec::constant(alpha, 1.0), DEFAULT_WARP_RESOLUTION).unwrap();
        prop_assert!((w.t_of_tau(w.tau(t)) - t).abs() < 1e-10);
        prop_assert!((w.amplitude(t) - (alpha * t).exp()).abs() < 1e-10 * (alpha * t).exp());
    }

    #[test]
    fn half_line_solutions_are_entropic_and_admissible(
        u0 in pieces(0.0, 3.0, 3),
        ub in pieces(0.0, 1.0, 3),
        alpha in -0.5f64..0.5,
    ) {
        let v0 = steps(vec![0.0, 1.0, 3.0], vec![1.0, 0.0]);
        let vb = Profile::constant(1.0, 0.0, 1.0).unwrap();
        let warp = build_warp(&DampingSpec::constant(alpha, 1.0), DEFAULT_WARP_RESOLUTION).unwrap();
        let grid = GridSpec::half_line(2.0, 100, vec![0.3, 0.6, 0.9]);
        let sol = solve_ibvp(&u0, &v0, &ub, &vb, &warp, &grid, &SolveOptions::default()).unwrap();
        prop_assert_eq!(entropy_audit(&sol.slices).violations(), 0);
        prop_assert_eq!(sol.warped.diagnostics.admissibility_violations(), 0);
        for s in &sol.slices {
            let trace = s.velocity.values()[0];
            prop_assert!(admissible_set_contains_tol(ub.eval_left(s.time), trace, 1e-6), "{} {}", s.time, trace);
        }
    }

    #[test]
    fn whole_line_mass_is_conserved(u0 in pieces(-3.0, 3.0, 4), m in 0.1f64..2.0) {
        let v0 = steps(vec![-3.0, -1.0, 1.0, 3.0], vec![0.0, m, 0.0]);
        let warp = build_warp(&DampingSpec::none(1.0), DEFAULT_WARP_RESOLUTION).unwrap();
        // speeds are below one, so no mass leaves [-2.5, 2.5] before τ = 1
        let grid = GridSpec { x_min: -2.5, x_max: 2.5, cells: 250, times: vec![0.5, 1.0] };
        let sol = solve_ivp(&u0, &v0, &warp, &grid, &SolveOptions::default()).unwrap();
        for s in &sol.slices {
            let total = s.measure.total_mass();
            prop_assert!((total - 2.0 * m).abs() < 1e-9, "{total} vs {}", 2.0 * m);
        }
    }

    #[test]
    fn viscous_bounds_hold(u0 in -1.0f64..1.0, ub in -1.0f64..1.0, vb in 0.0f64..1.0) {
        let c = |v: f64, hi: f64| Profile::constant(v, 0.0, hi).unwrap();
        let v0 = steps(vec![0.0, 0.5, 2.0], vec![0.5, 0.0]);
        let sol = run_viscous(
            &c(u0, 2.0), &v0, &c(ub, 0.5), &c(vb, 0.5),
            &DampingSpec::constant(0.3, 0.5), 0.1, &[0.25, 0.5],
            BoundaryMode::Mass, &ViscousOptions::default(),
        ).unwrap();
        prop_assert_eq!(sol.bound_violations(), 0);
    }

    #[test]
    fn scenario_text_round_trips(cells in 10usize..500, x_max in 0.5f64..5.0, a in -2.0f64..2.0, slices in 1usize..6) {
        let times: Vec<String> = (1..=slices).map(|k| format!("{:?}", k as f64 / slices as f64)).collect();
        let src = format!(
            "name = \"p\"\nsolver = \"hopf-lax\"\n\
             data.u0 = {{ kind = \"constant\", value = {a:?} }}\n\
             data.v0 = {{ kind = \"constant\", value = 0.0 }}\n\
             data.u_boundary = {{ kind = \"piecewise-linear\", nodes = [0.0, 1.0], values = [{a:?}, 0.5] }}\n\
             data.v_boundary = {{ kind = \"constant\", value = 1.0 }}\n\
             alpha = {{ kind = \"constant\", value = {a:?} }}\n\
             grid.x_max = {x_max:?}\ngrid.cells = {cells}\n\
             time.horizon = 1.0\ntime.slices = [{}]\n",
            times.join(", ")
        );
        let sc = Scenario::parse(&src).unwrap();
        let text = sc.to_canonical();
        let back = Scenario::parse(&text).unwrap();
        prop_assert_eq!(&back, &sc);
        prop_assert_eq!(back.to_canonical(), text);
    }
}

#[test]
fn scenario_runs_are_deterministic() {
    let src = r#"
name = "det"
solver = "hopf-lax"
data.u0 = { kind = "piecewise-constant", breaks = [0.0, 0.7, 3.0], values = [0.6, -0.3] }
data.v0 = { kind = "piecewise-constant", breaks = [0.0, 0.7, 3.0], values = [1.0, 0.0] }
data.u_boundary = { kind = "constant", value = 1.0 }
data.v_boundary = { kind = "constant", value = 1.5 }
alpha = { kind = "constant", value = 0.5 }
grid.x_max = 2.0
grid.cells = 200
time.horizon = 1.0
time.slices = [0.25, 0.5, 0.75, 1.0]
checks.entropy = true
checks.admissibility = true
checks.mass_condition = 1e-6
checks.measure = 1e-2
"#;
    // damping bends the shock paths, so the speed tracked across slices a
    // quarter apart is only second-order accurate
    let sc = Scenario::parse(src).unwrap();
    let a = run_scenario(&sc, &RunOptions::default()).unwrap();
    let b = run_scenario(&sc, &RunOptions::default()).unwrap();
    assert!(a.passed(), "{:?}", a.checks);
    assert_eq!(a.slices, b.slices);
    assert_eq!(a.checks, b.checks);
}
