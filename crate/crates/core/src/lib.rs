//! Exact determinant censuses of symmetric tridiagonal matrices over finite
//! chain rings, together with closed-form counting formulas to check them.

pub mod cache;
pub mod census;
pub mod formula;
pub mod ring;
pub mod surd;
pub mod verify;
