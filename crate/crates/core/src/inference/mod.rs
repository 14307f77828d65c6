//! MAP estimation, curvature utilities and the multi-chain sampling driver.

mod optimize;
mod sample;

pub use optimize::{find_hessian_diag, find_map, scaling_from_point, MapMethod, MapOptions};
pub use sample::{sample, sample_into, sample_run, Progress, SampleConfig, SampleRun};
