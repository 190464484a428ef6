//! Worked families: generalized geodesics of a fiber metric and generalized
//! Wong equations on `TM x g`.

mod geodesic;
mod metric;
mod wong;

pub use geodesic::{
    gamma_symbols, geodesic_field, geodesic_hamiltonian_field, gtilde_pushforward, lc_connection, metric_hamiltonian,
    metric_lagrangian, Connection, ConnectionValues, GammaSymbols, GammaValues, Geodesics, MetricHamiltonian, PhaseTensor2,
};
pub use metric::Metric;
pub use wong::{
    curvature, curvature_from_bracket, wong_deformed, wong_el_field, wong_phase_field, wong_product_algebroid, Wong,
    WongSetup,
};
