//! Curve complex, electric Teichmüller space and Gromov-boundary
//! experiments on the torus.

pub mod electric;
pub mod error;
pub mod experiments;
pub mod farey;
pub mod foliation;
pub mod gromov;
pub mod metric;
pub mod net;
pub mod teich;

pub use electric::{build_electric, lc_length, quasigeodesic_fit, Cone, ElectricSpace, HoroballElectric};
pub use error::{Error, Result};
pub use experiments::{ExperimentReport, Lab, LabConfig, Verdict};
pub use farey::{adjacent, ball, farey_distance, geodesic_path, FareyBall, FareyGraph, FareyParams};
pub use foliation::{cf_convergents, intersection, slope_of, ContinuedFraction, FoliationVec, Slope, SlopeClass};
pub use gromov::{
    convergence_at_infinity, delta_four_point, gromov_product, narrow_polygon_check, product_distance_sandwich,
    quasi_isometry_fit, Convergence, GromovReport, QIReport,
};
pub use metric::{Metric, MetricSample, PathTrace};
pub use net::{HyperbolicNet, NetParams, Patch};
pub use teich::{
    extremal_length, hv_pair, ray, teich_distance, thin_membership, QuadDiffFrame, TeichPoint, ThinRegion,
};
