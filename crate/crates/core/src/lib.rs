//! Answer set programming with linear constraint atoms.

pub mod dl;
pub mod ground;
pub mod lcsem;
pub mod lp;
pub mod multishot;
pub mod rational;
pub mod stable;
pub mod syntax;
