pub mod bit;
pub mod contraction;
pub mod error;
pub mod flower;
pub mod geom;
pub mod grids;
pub mod instance;
pub mod oracle;
pub mod quadtree;
pub mod sssp;

pub use error::{Error, Result};
