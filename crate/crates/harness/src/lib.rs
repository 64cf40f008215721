pub mod adequacy;
pub mod corpus;
pub mod diff;
pub mod gen;
pub mod queens;
pub mod shrink;
