//! Regional speech separation toolkit.
//!
//! Separating "the talker in *that* zone" needs two cues a microphone array
//! can provide: direction and distance. This crate implements the full
//! signal path around a mask-based separator for regions defined as an
//! azimuth interval plus a distance bound:
//!
//! * [`geometry`] — array layouts, target regions, integer steering delays;
//! * [`dsp`] — 16 kHz STFT/iSTFT framing (40 ms / 20 ms) and 80-band
//!   log-mel features;
//! * [`das`] — the improved delay-and-sum feature bank (aligned channels,
//!   full sum, pairwise averages and differences; `M^2 + 1` channels);
//! * [`drr`] — direct-to-reverberant distance features from aligned pairs;
//! * [`roomsim`] — an image-source room simulator and region-labeled scene
//!   synthesizer with an interference taxonomy;
//! * [`separation`] — mask application and a streaming driver with one hop
//!   (20 ms) of algorithmic delay; oracle and file-loaded mask sources
//!   stand in for a trained estimator;
//! * [`metrics`] — SI-SDR and Decay plus batch scene evaluation;
//! * [`cli`] — the subcommand implementations behind the `regionsep`
//!   binary.
//!
//! Each major capability has a runnable example under `examples/`; start
//! with `steering_delays` and `oracle_separation`:
//!
//! ```bash
//! cargo run --release --example steering_delays
//! cargo run --release --example oracle_separation
//! ```

pub mod cli;
pub mod das;
pub mod drr;
pub mod dsp;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod roomsim;
pub mod separation;

pub use error::{Error, Result};
