#![allow(clippy::needless_range_loop)]

pub mod bicomplex;
pub mod bundle;
pub mod complex;
pub mod gen;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod poset;
pub mod sheaf;
pub mod spectral;
pub mod traversal;
pub mod verify;
