pub mod bundles;
pub mod convolution;
pub mod correspondence;
pub mod dirichlet;
pub mod functions;
pub mod groupoid;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod random;
pub mod suite;
