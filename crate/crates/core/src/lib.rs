//! Effective resistances by decentralized randomized Kaczmarz, and
//! resistance-weighted randomized gossip.
//!
//! The numerical code is generic over [`Real`] (`f32` or `f64`). The
//! `*64` aliases below fix the precision used by the command-line tool.

pub mod drk;
pub mod eigen;
pub mod error;
pub mod experiment;
pub mod gossip;
pub mod graph;
pub mod kaczmarz;
pub mod laplacian;
pub mod sampling;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{barbell, small_world, Graph, Lobes};
pub use laplacian::{laplacian, LaplacianView};
pub use scalar::Real;

pub type Graph64 = graph::Graph<f64>;
pub type Graph32 = graph::Graph<f32>;
pub type Laplacian64 = laplacian::LaplacianView<f64>;
pub type Laplacian32 = laplacian::LaplacianView<f32>;
pub type RowSystem64 = kaczmarz::RowSystem<f64>;
pub type RowSystem32 = kaczmarz::RowSystem<f32>;
pub type SpectralData64 = spectral::SpectralData<f64>;
pub type SpectralData32 = spectral::SpectralData<f32>;
pub type ResistanceTable64 = spectral::ResistanceTable<f64>;
pub type ResistanceTable32 = spectral::ResistanceTable<f32>;
pub type DrkState64 = drk::DrkState<f64>;
pub type DrkState32 = drk::DrkState<f32>;
pub type GossipConfig64 = gossip::GossipConfig<f64>;
pub type GossipConfig32 = gossip::GossipConfig<f32>;
