//! Label-free log anomaly detection.
//!
//! Raw lines are mined into templates ([`parser`]), templates become vectors
//! ([`encoder`]), windows of lines become weighted event graphs ([`graph`]),
//! a two-layer GCN autoencoder compresses each graph into node embeddings
//! ([`autoencoder`]), and spectral clustering of those embeddings separates a
//! small anomalous group from the bulk ([`clustering`]). [`metrics`] scores
//! the clustering; [`datasets`] and [`pipeline`] tie the stages together.

pub mod autoencoder;
pub mod clustering;
pub mod datasets;
pub mod encoder;
pub mod graph;
pub mod metrics;
pub mod parser;
pub mod pipeline;
