pub mod error;
pub mod instances;
pub mod kernel;
pub mod lanczos;
pub mod numeric;
pub mod qgld;
pub mod qgpe;
pub mod statevector;
