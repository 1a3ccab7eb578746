//! The airport network used throughout the tests and examples, with its
//! flight property definitions and two queries over it.

use crate::graph::PropertyGraph;
use crate::graph_json::graph_from_json;
use crate::props::PropertyDef;
use crate::query::Query;
use crate::syntax::{parse_defs, parse_query};

pub const FLIGHTS_JSON: &str = include_str!("../fixtures/flights.json");
pub const FLIGHTS_DEFS: &str = include_str!("../fixtures/flights.defs");
/// Train from a Barcelona station, then flights to Los Angeles.
pub const BARCELONA_TO_LA: &str = include_str!("../fixtures/barcelona_to_la.query");
/// Flights from Barcelona to Los Angeles with at most two legs.
pub const TWO_HOPS: &str = include_str!("../fixtures/two_hops.query");

pub fn flights() -> PropertyGraph {
    graph_from_json(FLIGHTS_JSON).expect("fixture graph is valid")
}

pub fn flight_defs() -> PropertyDef {
    parse_defs(FLIGHTS_DEFS).expect("fixture definitions are valid")
}

pub fn barcelona_to_la() -> Query {
    parse_query(BARCELONA_TO_LA).expect("fixture query is valid").query
}

pub fn two_hops() -> Query {
    parse_query(TWO_HOPS).expect("fixture query is valid").query
}
