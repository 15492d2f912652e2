//! Executable finite-scale model of groupoid gluing, groupoid convolution
//! algebras and Fredholm criteria, together with a numerical Mellin-symbol
//! module for layer potentials on polygonal domains.

pub mod groupoid;
pub mod gluing;
pub mod algebra;
mod par;
pub mod fredholm;
pub mod random;
pub mod conical;
pub mod mellin;
pub mod io;
