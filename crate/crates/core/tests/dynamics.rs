use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use lasertherm::assembly::{assemble, MaterialProperties};
use lasertherm::boundary::{experiment_boundaries, BoundaryCondition, BoundarySpec};
use lasertherm::mesh::{build_grid, Face};
use lasertherm::sim::config::MeshSpec;
use lasertherm::sim::{run, SimulationConfig, Simulation, Tissue};
use lasertherm::solver::{SolverMethod, SolverSettings};
use lasertherm::stepper::{dirichlet_reaction, stored_heat, Stepper};
use lasertherm::Execution;

fn small_bench() -> SimulationConfig {
    let mut c = SimulationConfig::bench(
        Tissue::Chicken,
        MeshSpec::centered([8, 8, 6], [2.0, 2.0, 0.5]),
        0.8,
        0.02,
        25.0,
    );
    c.duration = 4.0;
    c.laser.schedule = lasertherm::source::Schedule::new(vec![(0.0, 2.0)]).unwrap();
    c
}

#[test]
fn energy_is_conserved_step_by_step() {
    let sim = Simulation::new(small_bench()).unwrap();
    let sys = sim.system();
    let dt = sim.config().solver.dt;
    let mut stepper = Stepper::new(sys, sim.config().solver).unwrap();
    let u0 = vec![24.0; sim.mesh().node_count()];
    let f0 = sim.load(0.0, &u0).unwrap();
    let mut s = stepper.init_state(0.0, &u0, &f0).unwrap();
    let mut f_prev = f0;
    for n in 0..80 {
        let f = sim.load((n + 1) as f64 * dt, &s.d).unwrap();
        let next = stepper.step(&s, &f).unwrap();
        let stored = stored_heat(sys, &next.d) - stored_heat(sys, &s.d);
        let supplied = 0.5
            * dt
            * (f_prev.iter().sum::<f64>()
                + dirichlet_reaction(sys, &s, &f_prev)
                + f.iter().sum::<f64>()
                + dirichlet_reaction(sys, &next, &f));
        assert!(
            (stored - supplied).abs() <= 1e-9 * stored.abs().max(1e-6),
            "step {n}: stored {stored}, supplied {supplied}"
        );
        s = next;
        f_prev = f;
    }
}

#[test]
fn large_steps_stay_stable() {
    let mesh = build_grid([4, 4, 8], [1.0, 1.0, 0.5], [0.0; 3]).unwrap();
    let mat = MaterialProperties {
        c_v: 4.3,
        kappa: 0.0062,
        mu_a: 31.0,
        h: 0.022,
        t_inf: 24.0,
    };
    let sys = assemble(&mesh, &mat, &[(Face::Bottom, 0.0)]).unwrap();
    let settings = SolverSettings {
        dt: 50.0,
        ..Default::default()
    };
    let mut rng = StdRng::seed_from_u64(11);
    let u0: Vec<f64> = (0..mesh.node_count()).map(|_| rng.random_range(-10.0..10.0)).collect();
    let zero = vec![0.0; mesh.node_count()];
    let mut stepper = Stepper::new(&sys, settings).unwrap();
    let mut s = stepper.init_state(0.0, &u0, &zero).unwrap();
    let energy = |d: &[f64]| sys.m.mul_vec(d).iter().zip(d).map(|(a, b)| a * b).sum::<f64>();
    let mut last = energy(&s.d);
    for _ in 0..200 {
        s = stepper.step(&s, &zero).unwrap();
        let e = energy(&s.d);
        assert!(e <= last * (1.0 + 1e-12), "M-norm grew: {last} -> {e}");
        last = e;
    }
    assert!(s.d.iter().all(|u| u.abs() < 1.0));
}

#[test]
fn relaxes_to_sink_temperature() {
    let mesh = build_grid([3, 3, 6], [0.3, 0.3, 0.3], [0.0; 3]).unwrap();
    let mat = MaterialProperties {
        c_v: 1.0,
        kappa: 0.5,
        mu_a: 1.0,
        h: 1.0,
        t_inf: 24.0,
    };
    let spec = BoundarySpec::uniform(BoundaryCondition::ConstantFlux { q: 0.0 })
        .with(Face::Bottom, BoundaryCondition::HeatSink { temperature: 37.0 });
    let sys = assemble(&mesh, &mat, &spec.dirichlet()).unwrap();
    let settings = SolverSettings { dt: 0.05, ..Default::default() };
    let zero = vec![0.0; mesh.node_count()];
    let mut stepper = Stepper::new(&sys, settings).unwrap();
    let mut s = stepper.init_state(0.0, &vec![20.0; mesh.node_count()], &zero).unwrap();
    for _ in 0..400 {
        s = stepper.step(&s, &zero).unwrap();
    }
    assert!(s.d.iter().all(|u| (u - 37.0).abs() < 1e-3));
}

#[test]
fn execution_policies_give_identical_runs() {
    let mut seq = small_bench();
    seq.solver.execution = Execution::Sequential;
    let mut par = small_bench();
    par.solver.execution = Execution::Parallel;
    let a = run(seq).unwrap();
    let b = run(par).unwrap();
    assert_eq!(a.final_state.d, b.final_state.d);
    assert_eq!(a.probes, b.probes);
}

#[test]
fn conjugate_gradient_matches_direct() {
    let mut direct = small_bench();
    direct.solver.method = SolverMethod::Direct;
    let mut cg = small_bench();
    cg.solver.method = SolverMethod::ConjugateGradient;
    cg.solver.tolerance = 1e-12;
    let a = run(direct).unwrap();
    let b = run(cg).unwrap();
    for (x, y) in a.final_state.d.iter().zip(&b.final_state.d) {
        assert!((x - y).abs() < 1e-8, "{x} vs {y}");
    }
}

#[test]
fn incidence_point_scaling_changes_cooling_only_slightly() {
    let base = small_bench();
    let mut point = small_bench();
    point.boundary.natural_reference =
        lasertherm::boundary::NaturalReference::Point([0.0, 0.0, 0.0]);
    let a = run(base).unwrap();
    let b = run(point).unwrap();
    let (pa, pb) = (a.probes[0].peak().unwrap().1, b.probes[0].peak().unwrap().1);
    // a hotter reference strengthens convection everywhere
    assert!(pb <= pa);
    assert!((pa - pb).abs() < 1.0);
}

#[test]
fn hotter_sink_warms_the_body() {
    let mut cold = small_bench();
    cold.laser.power = 0.0;
    let mut warm = cold.clone();
    warm.boundary = experiment_boundaries(&warm.material, 30.0);
    let a = run(cold).unwrap();
    let b = run(warm).unwrap();
    let mean = |d: &[f64]| d.iter().sum::<f64>() / d.len() as f64;
    assert!((mean(&a.final_state.d) - 24.0).abs() < 1e-9);
    assert!(mean(&b.final_state.d) > 24.0);
}
