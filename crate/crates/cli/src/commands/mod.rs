pub mod dirac;
pub mod fp;
pub mod kernel;
pub mod ncg;
pub mod replay;
pub mod square;
