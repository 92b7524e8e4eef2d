//! Time integration of the RG-2 flow in two reduced settings: the exact ODE for
//! constant-curvature metrics `g = c · g_unit`, and the DeTurck-modified system on
//! periodic grids in two and three dimensions.
//!
//! Both use classical RK4. Grid derivatives are fourth-order central differences;
//! the explicit step is limited by [`GridState::stability_bound`].

mod ansatz;
mod grid;
mod io;
mod monitor;
mod rk4;
mod stencil;

pub use ansatz::{ansatz_rate, ansatz_rhs, step_ansatz, AnsatzKind, AnsatzState};
pub use grid::{
    deturck_vector_field, grid_rhs, grid_rhs_matrices, pack, packed_index, packed_len, step_grid, unpack,
    GridDiagnostics, GridState, STABILITY_FACTOR,
};
pub use io::{read_grid_snapshot, read_trace_csv, write_grid_snapshot, write_trace_csv};
pub use monitor::{run_with_monitor, FlowState, FlowTrace, RunOptions, Termination, TraceRecord};
pub use rk4::rk4_step;
pub use stencil::Grid;
