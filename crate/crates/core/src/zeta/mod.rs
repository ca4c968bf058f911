//! Special functions, power-sum asymptotics, finite parts and the
//! zeta-regularized log-determinant.

pub mod finite_part;
pub mod hardy;
pub mod matlog;
pub mod special;

pub use finite_part::{
    dirichlet_continuation, finite_part_dirichlet, fit_tail, fit_tail_orders, DiagonalSequence, FinitePartResult,
    TailModel,
};
pub use hardy::hardy_partial_sum;
pub use matlog::{
    matrix_log, matrix_log_dense, regularized_trace, regularized_trace_at, truncated_qz_trace, w_q, w_q_from_log,
    zeta_trace_function, MatrixLog, ZetaParams,
};
pub use special::{bernoulli, bernoulli_modern, c_function, euler_gamma, gamma, riemann_zeta, zeta_tail};
