use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use crate::assembly::{assemble_unit_mass, assemble_with, SystemMatrices};
use crate::boundary::boundary_load_with;
use crate::error::{Error, Result};
use crate::mesh::{build_grid, BiUnitPoint, Mesh};
use crate::sim::config::SimulationConfig;
use crate::sim::probe::{write_csv, ProbeSeries};
use crate::sim::snapshot::write_snapshot;
use crate::source::nodal_source_with;
use crate::sparse::CsrMatrix;
use crate::stepper::{SimulationState, Stepper};

pub const PROBE_FILE: &str = "probes.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";

#[derive(Debug)]
pub struct RunOutput {
    pub probes: Vec<ProbeSeries>,
    pub final_state: SimulationState,
    pub steps: usize,
    /// Files written, in creation order.
    pub files: Vec<PathBuf>,
}

/// A validated configuration with its mesh and assembled operators.
#[derive(Debug)]
pub struct Simulation {
    config: SimulationConfig,
    mesh: Mesh,
    system: SystemMatrices,
    unit_mass: CsrMatrix,
    probe_sites: Vec<(usize, BiUnitPoint)>,
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let exec = config.solver.execution;
        let mesh = build_grid(config.mesh.dims, config.mesh.extent, config.mesh.origin)?;
        let system = assemble_with(&mesh, &config.material, &config.boundary.dirichlet(), exec)?;
        let unit_mass = assemble_unit_mass(&mesh, exec)?;
        let top = mesh.origin()[2];
        let probe_sites = config
            .probes
            .iter()
            .map(|p| mesh.locate([p[0], p[1], top]))
            .collect::<Result<Vec<_>>>()?;
        log::info!(
            "mesh {:?} elements: {} nodes, {} elements, {} prescribed",
            mesh.dims(),
            mesh.node_count(),
            mesh.element_count(),
            system.prescribed_nodes().len()
        );
        Ok(Simulation {
            config,
            mesh,
            system,
            unit_mass,
            probe_sites,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn system(&self) -> &SystemMatrices {
        &self.system
    }

    /// Heating load `∫ N f(t) dV`.
    pub fn internal_load(&self, t: f64) -> Vec<f64> {
        let c = &self.config;
        let exec = c.solver.execution;
        let f = nodal_source_with(&self.mesh, &c.laser, c.material.mu_a, t, exec);
        if f.iter().all(|&v| v == 0.0) {
            return f;
        }
        self.unit_mass.mul_vec_with(&f, exec)
    }

    /// Total load at time `t` with boundary fluxes evaluated on `d`.
    pub fn load(&self, t: f64, d: &[f64]) -> Result<Vec<f64>> {
        let mut f = self.internal_load(t);
        let fq = boundary_load_with(&self.mesh, &self.config.boundary, d, self.config.solver.execution)?;
        for (a, b) in f.iter_mut().zip(fq) {
            *a += b;
        }
        Ok(f)
    }

    pub fn probe_values(&self, d: &[f64]) -> Vec<f64> {
        self.probe_sites
            .iter()
            .map(|&(e, xi)| self.mesh.interpolate_in(d, e, xi))
            .collect()
    }

    /// Runs to completion, calling `observe` after every accepted state
    /// (including the initial one).
    pub fn run_with(&self, mut observe: impl FnMut(&SimulationState)) -> Result<RunOutput> {
        let c = &self.config;
        let dt = c.solver.dt;
        let steps = c.step_count();
        let started = Instant::now();
        log::info!(
            "running {steps} steps of {dt} s ({} s simulated), {:?}",
            c.duration,
            c.solver.execution
        );

        let mut stepper = Stepper::new(&self.system, c.solver)?;
        let u0 = vec![c.initial_temperature; self.mesh.node_count()];
        let f0 = self.load(0.0, &u0)?;
        let mut state = stepper.init_state(0.0, &u0, &f0)?;

        let mut probes: Vec<ProbeSeries> = (0..self.probe_sites.len())
            .map(|i| ProbeSeries::empty(format!("probe{i}")))
            .collect();
        let mut files = Vec::new();
        let record = |probes: &mut Vec<ProbeSeries>, s: &SimulationState| {
            for (series, u) in probes.iter_mut().zip(self.probe_values(&s.d)) {
                series.push(s.t, u);
            }
        };
        record(&mut probes, &state);
        self.maybe_snapshot(&state, &mut files)?;
        observe(&state);

        let report_every = (steps / 10).max(1);
        for n in 0..steps {
            let t_next = (n + 1) as f64 * dt;
            // boundary fluxes lag one step behind
            let f_next = self.load(t_next, &state.d)?;
            state = stepper.step(&state, &f_next)?;
            if state.step_index % c.output.probe_every == 0 || state.step_index == steps {
                record(&mut probes, &state);
            }
            self.maybe_snapshot(&state, &mut files)?;
            observe(&state);
            if state.step_index % report_every == 0 {
                log::info!(
                    "step {}/{steps} t={:.3} s max T={:.3} °C",
                    state.step_index,
                    state.t,
                    state.d.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                );
            }
        }

        if let Some(dir) = &c.output.dir {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let path = dir.join(PROBE_FILE);
            write_csv(&path, &probes)?;
            files.push(path);
        }
        log::info!("finished in {:.2} s", started.elapsed().as_secs_f64());
        Ok(RunOutput {
            probes,
            final_state: state,
            steps,
            files,
        })
    }

    pub fn run(&self) -> Result<RunOutput> {
        self.run_with(|_| {})
    }

    fn maybe_snapshot(&self, state: &SimulationState, files: &mut Vec<PathBuf>) -> Result<()> {
        let out = &self.config.output;
        let Some(dir) = &out.dir else { return Ok(()) };
        if out.snapshot_every == 0 || state.step_index % out.snapshot_every != 0 {
            return Ok(());
        }
        let path = write_snapshot(
            &dir.join(SNAPSHOT_DIR),
            &format!("step_{:06}", state.step_index),
            &self.mesh,
            &state.d,
            state.t,
            state.step_index,
            out.snapshot_region,
            out.vtk,
        )?;
        files.push(path);
        Ok(())
    }
}

/// Builds and runs a simulation in one call.
pub fn run(config: SimulationConfig) -> Result<RunOutput> {
    Simulation::new(config)?.run()
}
