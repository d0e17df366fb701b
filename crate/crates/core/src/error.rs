use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coefficient h_{order} is not hermitian (max deviation {deviation:.3e})")]
    NonHermitianCoefficient { order: usize, deviation: f64 },

    #[error("top-order block of momentum order {order} is degenerate (singular value ratio {ratio:.3e})")]
    DegenerateTopOrderBlock { order: usize, ratio: f64 },

    #[error("coefficient h_{order} has a nonzero entry at ({row}, {col}) outside the allowed block structure")]
    BlockStructureViolation { order: usize, row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("momentum grid is degenerate")]
    EmptyRange,

    #[error("current matrix is degenerate (min |eig| {min_abs:.3e}, max |eig| {max_abs:.3e})")]
    DegenerateCurrentMatrix { min_abs: f64, max_abs: f64 },

    #[error("trace vectors or relation matrices do not share a layout")]
    LayoutMismatch,

    #[error("sign structure changed across length scales: {0:?}")]
    SignStructureChanged(Vec<(f64, usize, usize)>),

    #[error("unequal mover counts N+ = {n_plus}, N- = {n_minus}: a boundary cannot be introduced")]
    UnequalMoverCounts { n_plus: usize, n_minus: usize },

    #[error("equal mover counts: use a standard boundary condition instead")]
    EqualMoverCounts,

    #[error("matrix is not unitary (max |U^H U - 1| = {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("wrong dimension: expected {expected}, found {found}")]
    WrongDimension { expected: usize, found: usize },

    #[error("momentum roots cluster at energy {energy}: separation {separation:.3e}; perturb the energy by ~1e-7 of the energy scale")]
    DegenerateRootCluster { energy: f64, separation: f64 },

    #[error("expected {expected} finite momentum roots, found {found}")]
    RootCountMismatch { expected: usize, found: usize },

    #[error("energy {energy} touches the bulk continuum (min |Im p| = {min_imag:.3e})")]
    EnergyInBand { energy: f64, min_imag: f64 },

    #[error("energy window touches a bulk band at {energy}")]
    WindowTouchesBand { energy: f64 },

    #[error("found {decaying} decaying momentum roots, expected {expected}")]
    UnbalancedRoots { decaying: usize, expected: usize },

    #[error("negative coordinate {0}")]
    NegativeCoordinate(f64),

    #[error("angle is 0 mod 2pi: boundary length is infinite")]
    SingularAngle,

    #[error("the well supports a zero-energy state: effective length is infinite")]
    ResonantWidth,

    #[error("subspace check failed (distance {distance:.3e})")]
    SubspaceMismatch { distance: f64 },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Input or file-format problems, as opposed to domain failures.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
