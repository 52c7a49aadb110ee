use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("incompatible shapes: {0}")]
    IncompatibleShapes(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("more subsets than views ({subsets} subsets, {views} views)")]
    TooManySubsets { subsets: usize, views: usize },

    #[error("KL gradient undefined: expected counts {value} at entry {index} are not positive")]
    KlGradientUndefined { index: usize, value: f64 },

    #[error("unbounded curvature: the KL background must be positive to bound the Lipschitz constant")]
    UnboundedCurvature,

    #[error("missing Lipschitz bound for term {0}")]
    MissingLipschitz(usize),

    #[error("gradient table not initialized")]
    TableUninitialized,

    #[error("step-size condition violated for subset {subset}: tau*sigma*|A|^2 = {value} > {bound}")]
    StepSizeCondition { subset: usize, value: f64, bound: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid array file: {0}")]
    ArrayFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
