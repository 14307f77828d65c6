use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // graph construction and evaluation
    #[error("missing input `{0}`")]
    MissingInput(String),
    #[error("shape mismatch in {context}: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        context: String,
        expected: Vec<usize>,
        got: Vec<usize>,
    },
    #[error("objective must be scalar, got shape {0:?}")]
    NonScalarObjective(Vec<usize>),
    #[error("cannot differentiate with respect to integer input `{0}`")]
    IntegerDifferentiation(String),
    #[error("no gradient available through opaque node `{0}`")]
    NoGradient(String),

    // model construction
    #[error("variable name `{0}` is already in use")]
    DuplicateName(String),
    #[error("test value for `{0}` lies outside the support of its distribution")]
    TestvalOutsideSupport(String),
    #[error("every entry of observed variable `{0}` is masked")]
    AllMissing(String),
    #[error("value {value} outside the support of transform {transform}")]
    OutsideSupport { transform: String, value: f64 },
    #[error("dtype mismatch for `{name}`: distribution expects {expected}")]
    DtypeMismatch { name: String, expected: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    // sampling and optimization
    #[error("log density is not finite at the input point of `{0}`")]
    NonFiniteLogp(String),
    #[error("gradient is not finite at the current point")]
    NonFiniteGradient,
    #[error("free variable `{0}` is not updated by any step method")]
    UncoveredVariable(String),
    #[error("variable `{0}` is targeted by more than one step method")]
    OverlappingTargets(String),
    #[error("log density is not finite at the optimizer start")]
    NonFiniteStart,
    #[error("chain {chain}, draw {draw}: {source}")]
    Sampling {
        chain: usize,
        draw: usize,
        #[source]
        source: Box<Error>,
    },

    // storage
    #[error("corrupt trace metadata: {0}")]
    CorruptMeta(String),
    #[error("missing chain file {0}")]
    MissingChainFile(String),
    #[error("malformed trace data: {0}")]
    CorruptData(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),

    // statistics
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    // formulas and GLMs
    #[error("formula syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },
    #[error("term `{0}` appears more than once")]
    DuplicateTerm(String),
    #[error("response `{0}` also appears among the terms")]
    ResponseInTerms(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("binomial response column `{0}` must contain only 0 and 1")]
    NonBinaryResponse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
