pub mod so3;
pub mod sphere;

pub use so3::{CayleyChartMap, RigidBody, RigidBodyState, So3Chart};
pub use sphere::{SphereCotangent, SphereExpMap, SphereRetraction, SphericalChartMap};
