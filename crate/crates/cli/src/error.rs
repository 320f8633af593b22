use std::fmt;

use graphilosophy::chunking::ChunkError;
use graphilosophy::corpus::CorpusError;
use graphilosophy::embedding::EmbedError;
use graphilosophy::extraction::ExtractError;
use graphilosophy::graph::GraphError;
use graphilosophy::pipeline::PipelineError;
use graphilosophy::query::QueryError;
use graphilosophy::retrieval::RetrievalError;
use graphilosophy_server::ServerError;

/// Machine-readable failure class printed before the message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    BadInput,
    SchemaViolation,
    NotFound,
    Unavailable,
    Io,
}

impl Code {
    fn as_str(self) -> &'static str {
        match self {
            Code::BadInput => "BAD_INPUT",
            Code::SchemaViolation => "SCHEMA_VIOLATION",
            Code::NotFound => "NOT_FOUND",
            Code::Unavailable => "UNAVAILABLE",
            Code::Io => "IO",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: Code,
    pub message: String,
}

impl CliError {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn bad_input(message: impl Into<String>) -> Self {
        Self::new(Code::BadInput, message)
    }
}

/// One line: `CODE: message`, with embedded newlines flattened.
impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "{}: {msg}", self.code.as_str())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(Code::Io, e.to_string())
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io(io) => Self::bad_input(io.to_string()),
            other => Self::bad_input(other.to_string()),
        }
    }
}

impl From<EmbedError> for CliError {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::Config(_) | EmbedError::Io(_) => Self::bad_input(e.to_string()),
            _ => Self::new(Code::Unavailable, e.to_string()),
        }
    }
}

impl From<ChunkError> for CliError {
    fn from(e: ChunkError) -> Self {
        match e {
            ChunkError::Embed(inner) => inner.into(),
            other => Self::bad_input(other.to_string()),
        }
    }
}

impl From<ExtractError> for CliError {
    fn from(e: ExtractError) -> Self {
        Self::bad_input(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::SchemaViolation { .. } | GraphError::WeightMismatch { .. } | GraphError::LayerMismatch { .. } => {
                Self::new(Code::SchemaViolation, e.to_string())
            }
            GraphError::Embed(inner) => inner.into(),
            GraphError::Io(io) => Self::bad_input(io.to_string()),
            other => Self::bad_input(other.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Graph(g) => g.into(),
            PipelineError::Chunk(c) => c.into(),
        }
    }
}

impl From<RetrievalError> for CliError {
    fn from(e: RetrievalError) -> Self {
        match e {
            RetrievalError::Embed(inner) => inner.into(),
            RetrievalError::EmptyIndex | RetrievalError::NoEmbeddings => Self::new(Code::Unavailable, e.to_string()),
            other => Self::bad_input(other.to_string()),
        }
    }
}

impl From<QueryError> for CliError {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::UnknownSeed(_) | QueryError::UnknownConcept(_) => Self::new(Code::NotFound, e.to_string()),
            QueryError::Retrieval(r) => r.into(),
            other => Self::bad_input(other.to_string()),
        }
    }
}

impl From<ServerError> for CliError {
    fn from(e: ServerError) -> Self {
        match e {
            ServerError::Graph(g) => g.into(),
            ServerError::InvalidGraph(_) => Self::new(Code::SchemaViolation, e.to_string()),
            ServerError::Bind { .. } | ServerError::Io(_) => Self::new(Code::Io, e.to_string()),
        }
    }
}
