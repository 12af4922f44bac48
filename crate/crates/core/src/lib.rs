pub mod complex;
pub mod connection;
pub mod simplicial;
pub mod random;
pub mod lattice;
pub mod equilateral;
pub mod schrodinger;
pub mod hyperbolic;
pub mod toda;
pub mod trivalent;
pub mod electric;
pub mod io;
pub mod verify;
pub mod cli;
