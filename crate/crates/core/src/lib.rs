pub mod boundary;
pub mod bethe;
pub mod diag;
pub mod error;
pub mod hamiltonians;
pub mod linalg;
pub mod par;
pub mod rep_gl;
pub mod spectrum;
pub mod yangian;
