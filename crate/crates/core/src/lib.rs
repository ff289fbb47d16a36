//! Simulator for keeping RDF knowledge graphs on public, private and hybrid ledgers.

pub mod audit;
pub mod bench;
pub mod gas;
pub mod ledger;
pub mod query;
pub mod rdf;
pub mod strategies;
