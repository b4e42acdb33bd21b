use thiserror::Error;

/// Errors raised by subspace algebra and SCD mapping evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScdError {
    #[error("stacked basis has column rank {rank} < {n}")]
    RankDeficient { rank: usize, n: usize },
    #[error("subspace is not regular (condition estimate {condition:.3e})")]
    NotRegular { condition: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point is not on the graph{}: {relation} violated by {residual:.3e}", block_suffix(*.block))]
    GraphViolation {
        relation: &'static str,
        residual: f64,
        block: Option<usize>,
    },
    #[error(
        "limit subspace enumeration requested outside the non-smooth strata (point is in {0})"
    )]
    WrongStratum(&'static str),
    #[error("inner smooth solve did not converge in {iterations} iterations")]
    NoConvergence { iterations: usize },
}

fn block_suffix(block: Option<usize>) -> String {
    match block {
        Some(b) => format!(" (block {b})"),
        None => String::new(),
    }
}

impl ScdError {
    /// Attaches a block index to a graph violation raised by a component map.
    pub fn in_block(self, index: usize) -> Self {
        match self {
            ScdError::GraphViolation {
                relation, residual, ..
            } => ScdError::GraphViolation {
                relation,
                residual,
                block: Some(index),
            },
            other => other,
        }
    }
}
