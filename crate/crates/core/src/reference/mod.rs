//! Ground-truth waves for exercising the recovery: laminar flows, closed-form
//! manufactured fields and Newton solutions of the height formulation.

pub mod height;
pub mod laminar;
pub mod manufactured;
