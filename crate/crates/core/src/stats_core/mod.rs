//! Special functions, normal tail bounds, and the seeded random streams every
//! simulation draws from.

mod rng;
mod special;

pub use rng::{sample_geometric, sample_std_normal, RngStream};
pub use special::{
    mills_bracket, std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf,
};
