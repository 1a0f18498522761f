pub mod adeles;
pub mod arith;
pub mod error;
pub mod integrate;
pub mod moyal;
pub mod characters;
pub mod padic;
pub mod quantum;
pub mod strings;
pub mod verify;

pub use error::{Error, Result};
