//! Metrics, connections and their curvature in dimensions 3 and 4.

mod curvature;
mod forms;
mod frobenius;
mod metric;
mod weyl_tensor;

pub use curvature::{
    christoffel, curvature, einstein_residual, levi_civita, ricci_series, riemann_series,
    scalar_curvature, tensor_norm, trace_free, trace_with, ConnSeries, ConnectionCoefficients,
    ConnectionField, Curvature, FlatConnection,
};
pub use forms::{form_norm, hodge_star, hodge_star_jets, permutation_sign, wedge_basis, Form};
pub use frobenius::{frobenius_residual, SPAN_TOL};
pub use metric::{builtin_metric, default_coords, MetricChart, BUILTIN_METRICS, SYMMETRY_TOL};
pub use weyl_tensor::{star_matrix, weyl_split, weyl_tensor, WeylNorms, PAIRS};
