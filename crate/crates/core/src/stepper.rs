//! Crank-Nicolson time stepping of `M v + K d = F` on the free nodes.
//!
//! The rate form is advanced as
//!
//! ```text
//! (M + Δt/2 K) v_{n+1} = F_{n+1} - K (d_n + Δt/2 v_n)
//! d_{n+1} = d_n + Δt/2 (v_n + v_{n+1})
//! ```
//!
//! with Dirichlet nodes eliminated: their temperatures stay at the
//! prescribed value and their rates at zero.

use crate::assembly::SystemMatrices;
use crate::error::{Error, Result};
use crate::solver::{LinearSolver, SolveStats, SolverSettings};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    /// Time, s.
    pub t: f64,
    /// Nodal temperatures, °C.
    pub d: Vec<f64>,
    /// Nodal temperature rates, °C/s.
    pub v: Vec<f64>,
    pub step_index: usize,
}

/// Holds the factorized step and mass operators for one run.
#[derive(Debug)]
pub struct Stepper<'a> {
    system: &'a SystemMatrices,
    settings: SolverSettings,
    step_solver: LinearSolver,
    t0: f64,
    last_stats: SolveStats,
}

impl<'a> Stepper<'a> {
    pub fn new(system: &'a SystemMatrices, settings: SolverSettings) -> Result<Self> {
        settings.validate()?;
        let free = system.free_nodes();
        let m_ff = system.m.principal_submatrix(free);
        let k_ff = system.k.principal_submatrix(free);
        let a = m_ff.linear_combination(1.0, &k_ff, 0.5 * settings.dt);
        let step_solver = LinearSolver::new(a, &settings)?;
        log::debug!(
            "stepper ready: {} free / {} prescribed nodes, dt={} s, {:?}",
            free.len(),
            system.prescribed_nodes().len(),
            settings.dt,
            step_solver
        );
        Ok(Stepper {
            system,
            settings,
            step_solver,
            t0: 0.0,
            last_stats: SolveStats::default(),
        })
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    pub fn last_stats(&self) -> SolveStats {
        self.last_stats
    }

    fn check_len(&self, what: &str, v: &[f64]) -> Result<()> {
        let n = self.system.node_count();
        if v.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{what} has {} entries, system has {n} nodes",
                v.len()
            )));
        }
        Ok(())
    }

    /// `d_0 = u_0` (Dirichlet nodes overwritten), `v_0` from `M v_0 = F_0 - K d_0`.
    pub fn init_state(&mut self, t0: f64, u0: &[f64], f0: &[f64]) -> Result<SimulationState> {
        self.check_len("initial field", u0)?;
        self.check_len("load vector", f0)?;
        if let Some(i) = u0.iter().position(|u| !u.is_finite()) {
            return Err(Error::InvalidArgument(format!("initial temperature at node {i} is not finite")));
        }
        let sys = self.system;
        let mut d = u0.to_vec();
        for &p in sys.prescribed_nodes() {
            d[p] = sys.prescribed_value(p).unwrap();
        }
        let kd = sys.k.mul_vec_with(&d, self.settings.execution);
        let free = sys.free_nodes();
        let rhs: Vec<f64> = free.iter().map(|&i| f0[i] - kd[i]).collect();
        let mass = LinearSolver::new(sys.m.principal_submatrix(free), &self.settings)?;
        let (v_free, stats) = mass.solve(&rhs)?;
        self.last_stats = stats;
        let mut v = vec![0.0; d.len()];
        for (&i, &vi) in free.iter().zip(&v_free) {
            v[i] = vi;
        }
        self.t0 = t0;
        Ok(SimulationState {
            t: t0,
            d,
            v,
            step_index: 0,
        })
    }

    /// Advances one step; `f_next` is the load at `t + Δt`.
    pub fn step(&mut self, state: &SimulationState, f_next: &[f64]) -> Result<SimulationState> {
        self.check_len("load vector", f_next)?;
        self.check_len("state", &state.d)?;
        let sys = self.system;
        let half = 0.5 * self.settings.dt;
        let predictor: Vec<f64> = state.d.iter().zip(&state.v).map(|(d, v)| d + half * v).collect();
        let kp = sys.k.mul_vec_with(&predictor, self.settings.execution);
        let free = sys.free_nodes();
        let rhs: Vec<f64> = free.iter().map(|&i| f_next[i] - kp[i]).collect();
        let (v_free, stats) = self.step_solver.solve(&rhs)?;
        self.last_stats = stats;

        let mut v = vec![0.0; state.v.len()];
        let mut d = state.d.clone();
        for (&i, &vi) in free.iter().zip(&v_free) {
            v[i] = vi;
            d[i] = state.d[i] + half * (state.v[i] + vi);
        }
        if let Some(i) = d.iter().position(|x| !x.is_finite()) {
            log::error!("non-finite temperature at node {i} after step {}", state.step_index + 1);
            return Err(Error::NonConvergence {
                iterations: stats.iterations,
                residual: f64::NAN,
            });
        }
        let step_index = state.step_index + 1;
        Ok(SimulationState {
            t: self.t0 + step_index as f64 * self.settings.dt,
            d,
            v,
            step_index,
        })
    }
}

/// Convenience wrapper that prepares the operators for a single call.
pub fn init_state(
    system: &SystemMatrices,
    u0: &[f64],
    f0: &[f64],
    settings: &SolverSettings,
) -> Result<SimulationState> {
    Stepper::new(system, *settings)?.init_state(0.0, u0, f0)
}

/// Convenience wrapper; factorizes on every call, so prefer [`Stepper`] in loops.
pub fn step(
    state: &SimulationState,
    system: &SystemMatrices,
    f_next: &[f64],
    settings: &SolverSettings,
) -> Result<SimulationState> {
    let mut s = Stepper::new(system, *settings)?;
    s.t0 = state.t - state.step_index as f64 * settings.dt;
    s.step(state, f_next)
}

/// Net heat (W) supplied to the body through Dirichlet nodes:
/// `Σ_p (M v + K d - F)_p`. Negative when the sinks draw heat out.
pub fn dirichlet_reaction(system: &SystemMatrices, state: &SimulationState, f: &[f64]) -> f64 {
    let mv = system.m.mul_vec(&state.v);
    let kd = system.k.mul_vec(&state.d);
    system
        .prescribed_nodes()
        .iter()
        .map(|&p| mv[p] + kd[p] - f[p])
        .sum()
}

/// Total stored heat relative to zero, `1ᵀ M d`, J.
pub fn stored_heat(system: &SystemMatrices, d: &[f64]) -> f64 {
    system.m.mul_vec(d).iter().sum()
}
