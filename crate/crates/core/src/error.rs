use std::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported maxval {0} (at most 255 is supported)")]
    UnsupportedMaxval(u32),
    #[error("unexpected end of data")]
    UnexpectedEof,
    #[error("image is {width}x{height}, at least {min}x{min} is required")]
    ImageTooSmall { width: usize, height: usize, min: usize },
    #[error("window overruns image border")]
    WindowOverrun,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no edge contrast")]
    NoContrast,
    #[error("side group is empty")]
    EmptySideGroup,
    #[error("too few points: got {got}, need at least {need}")]
    TooFewPoints { got: usize, need: usize },
    #[error("degenerate flat profile")]
    DegenerateProfile,
}

pub type Result<T> = std::result::Result<T, Error>;
