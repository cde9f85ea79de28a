pub mod cli;
pub mod ed;
pub mod lp;
pub mod privacy;
pub mod protocol;
