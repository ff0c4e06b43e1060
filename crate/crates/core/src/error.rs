use thiserror::Error;

/// Errors raised anywhere in the simulator and analysis pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-Clifford operation on tableau backend: {0}")]
    NonCliffordOnTableau(String),

    #[error("requested branch has zero probability: {0}")]
    ZeroProbabilityBranch(String),

    #[error("register of {requested} qubits exceeds the dense backend limit of {limit}")]
    TooLarge { requested: usize, limit: usize },

    #[error("qubit {0} does not exist")]
    NoSuchQubit(usize),

    #[error("qubit {0} is not a spin qubit")]
    NotASpin(usize),

    #[error("Pauli string acts on {len} qubits but the register holds {n}")]
    PauliLength { len: usize, n: usize },

    #[error("graph has an odd cycle through vertex {0}; no two-setting fidelity lower bound can be derived for non-bipartite graphs")]
    OddCycle(u32),

    #[error("measurement setting cannot evaluate generator {0}")]
    SettingMismatch(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid program: {0}")]
    InvalidProgram(String),

    #[error("instruction {index} ({instruction}): {source}")]
    AtInstruction {
        index: usize,
        instruction: String,
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// The innermost error, with instruction context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtInstruction { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
