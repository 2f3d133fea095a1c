use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("instance parse error: {0}")]
    Parse(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("infeasible assignment: {0}")]
    Infeasible(String),

    #[error("objective undefined: {0}")]
    Undefined(String),

    #[error("instance too large for exhaustive search: {selections} selections exceed the limit of {limit}")]
    TooLarge { selections: u128, limit: u128 },

    #[error("approximation bound requires delta_R >= 2 and delta_T >= 2 (got {delta_r}, {delta_t}); with a degree of 1 local algorithms exist that solve the LP exactly")]
    DegenerateDegree { delta_r: usize, delta_t: usize },

    #[error("linear program: {0}")]
    Lp(#[from] crate::lp::LpError),

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("protocol did not halt within {bound} rounds")]
    Divergence { bound: usize },
}
