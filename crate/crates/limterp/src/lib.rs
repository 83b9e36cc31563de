pub mod applications;
pub mod corpus;
pub mod error;
pub mod gridfn;
pub mod holmstedt;
pub mod kfunctional;
pub mod properties;
pub mod quad;
pub mod reiteration;
pub mod report;
pub mod spaces;
pub mod svfunc;

pub use error::{Error, Result};
