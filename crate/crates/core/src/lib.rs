pub mod intset;
pub mod frontend;
pub mod scop;
pub mod depgraph;
pub mod racecheck;
pub mod harness;
pub mod graph;
