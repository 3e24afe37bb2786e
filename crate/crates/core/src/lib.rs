//! Deterministic simulator for localization in wireless sensor networks.
//!
//! Unknown nodes are placed by a hybrid scheme: sinks collect range logs over
//! multi-hop paths and fuse them into grid posteriors ([`bayes`]). The
//! [`network`] module models sinks, backups, routing, energy and failover;
//! [`mdsmap`] and [`baselines`] provide the comparison schemes, and
//! [`experiments`] runs seeded sweeps and writes CSV.

pub mod bayes;
pub mod geometry;
pub mod grid;
pub mod rng;
pub mod config;
pub mod network;
pub mod mdsmap;
pub mod baselines;
pub mod experiments;
