pub mod closure;
pub mod io;
pub mod maximality;
pub mod shadowing;
pub mod symbolic;
pub mod torus;
pub mod suite;
