pub mod axioms;
pub mod chain;
pub mod checks;
pub mod element;
pub mod error;
pub mod factorization;
pub mod model;
pub mod morphism;
pub mod oracle;
pub mod rational;
pub mod report;
pub mod runner;
pub mod scenario;
