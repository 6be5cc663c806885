//! Inference of leadership dynamics from collections of time series.
//!
//! The pipeline aligns every pair of series inside sliding windows with
//! banded dynamic time warping, thresholds the signed following scores into
//! per-window following networks, and reads factions and their initiators
//! off each network. A coordination measure over the resulting clusters
//! selects the window length when it is not given.

pub mod coordination;
pub mod dtw;
pub mod error;
pub mod eval;
pub mod factions;
pub mod network;
pub mod pipeline;
pub mod series;
pub mod sim;

pub use error::{Error, Result};

pub use coordination::{coordination_measure, infer_window, Clustering, WindowSweep};
pub use dtw::{dtw_align, following_score, sim_max, WarpingResult};
pub use eval::{DatasetEval, EvalReport, F1Counts, FlockParams};
pub use factions::{detect_merge_split, FactionEvent, FactionSnapshot, FactionTimeline, TimelineExport};
pub use network::{create_dynamic_network, DynamicNetwork, FollowingNetwork, NetworkOptions, Preprocess, DEFAULT_SIGMA};
pub use pipeline::{infer, infer_auto, Inference};
pub use series::{Dataset, TimeSeries, Window};
pub use sim::{simulate, EventType, GroundTruth, Model, SimConfig};
