use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("duplicate paper id `{0}`")]
    DuplicatePaper(String),

    #[error("unknown author `{0}`")]
    UnknownAuthor(String),

    #[error("d_bar undefined for year {0}")]
    DBarUndefined(i32),

    #[error("year {0} has depth-capped distances among its valid pairs; d_bar not computed")]
    DepthCapped(i32),

    #[error("no year context resolves citing year {0}")]
    MissingYearContext(i32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("`{author}` is missing from rank table `{metric}`")]
    MissingFromRanking { author: String, metric: String },

    #[error("malformed table `{table}` at line {line}: {reason}")]
    MalformedTable {
        table: String,
        line: usize,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
