pub mod ball;
pub mod certify;
pub mod error;
pub mod factor;
pub mod hermite_pade;
pub mod measure;
pub mod numtheory;
pub mod poly;

pub use ball::BallReal;
pub use error::{Error, Result};
