pub mod decompose;
pub mod error;
pub mod external;
pub mod io;
pub mod lattice;
pub mod mixedvolume;
pub mod numeric;
pub mod polynomial;
pub mod solver;

pub use error::{Error, Result};
