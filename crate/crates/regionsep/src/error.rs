use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("far-field violation: steer distance {steer_m} m must exceed the array aperture {aperture_m} m")]
    FarFieldViolation { steer_m: f64, aperture_m: f64 },

    #[error("invalid angle: {0}")]
    InvalidAngle(f64),

    #[error("steering delay {shift} samples exceeds the sanity bound {bound} for this sample rate")]
    DelayOutOfRange { shift: i64, bound: i64 },

    #[error("shift magnitude {shift} must be smaller than the signal length {len}")]
    ShiftTooLarge { shift: i64, len: usize },

    #[error("invalid audio: {0}")]
    InvalidAudio(String),

    #[error("audio too short: {len} samples, need at least {min} (one analysis frame)")]
    AudioTooShort { len: usize, min: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("channel count mismatch: expected {expected}, got {got}")]
    ChannelMismatch { expected: usize, got: usize },

    #[error("invalid pair list: {0}")]
    InvalidPairs(String),

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("invalid room: {0}")]
    InvalidRoom(String),

    #[error("position {pos:?} outside room {dims:?} (wall margin {margin} m)")]
    OutsideRoom {
        pos: [f64; 3],
        dims: [f64; 3],
        margin: f64,
    },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("source placement infeasible after {attempts} attempts: {constraint}")]
    PlacementInfeasible { attempts: usize, constraint: String },

    #[error("zero-energy reference signal")]
    ZeroEnergyReference,

    #[error("malformed scene directory {dir}: {reason}")]
    MalformedScene { dir: PathBuf, reason: String },

    #[error("wav error: {0}")]
    Wav(String),

    #[error("unsupported sample rate {got} Hz, pipelines require {expected} Hz")]
    BadSampleRate { expected: u32, got: u32 },

    #[error("streaming error: {0}")]
    Streaming(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<hound::Error> for Error {
    fn from(e: hound::Error) -> Self {
        Error::Wav(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
