//! Mesh file formats.

pub mod obj;
pub mod off;

pub use obj::{parse_obj, write_obj, write_obj_string};
pub use off::{parse_off, read_off, write_off, write_off_string};
