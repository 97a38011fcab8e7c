//! Exact information-theoretic quantities on small finite objects.
//!
//! Everything is in bits unless a name says otherwise; [`ine_bounds`]
//! works in nats because that is the form in which its inequality is tight.

mod bernoulli;
mod joint;

pub use bernoulli::{
    binary_entropy, ine_bounds, kl_bernoulli, small_prior_constant, table1_bound, Table1Bound,
    Table1Region,
};
pub use joint::{
    external_info_cost, node_at, visit_nodes, FiniteJoint, InfoCost, InputDist, NodeView,
    ENUMERATION_LIMIT,
};
