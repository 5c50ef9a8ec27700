use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A strategy point (or allocation) lies outside its strategy space.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid mixed strategy: {0}")]
    InvalidStrategy(String),

    /// A malformed linear or mixed-integer model.
    #[error("model error: {0}")]
    Model(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A best-response oracle broke its contract (e.g. answered with a point
    /// outside the responding player's space).
    #[error("oracle contract violated: {0}")]
    OracleContract(String),

    /// A solver gave up after hitting a work limit.
    #[error("resource limit reached: {what} (incumbent {incumbent:?}, bound {bound})")]
    ResourceLimit {
        what: String,
        incumbent: Option<f64>,
        bound: f64,
    },
}
