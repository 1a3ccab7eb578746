//! The query variants: no properties, length bounds, length and cost
//! bounds, and a minimum connection time built into the definition.

use pathprop::syntax::{parse_defs, parse_query};
use pathprop::{PropertyDef, Query};

use crate::generate::city;

const PLAIN_DEFS: &str = "properties length: int, cost, start on p;
case edge: p.length == 1, p.cost == y.price, p.start == y.dep;
case step: p.length == 1 + p'.length, p.cost == y.price + p'.cost, p.start == y.dep,
    p'.length > 0, p'.cost > 0;";

const GAP_DEFS: &str = "properties length: int, cost, start on p;
case edge: p.length == 1, p.cost == y.price, p.start == y.dep;
case step: p.length == 1 + p'.length, p.cost == y.price + p'.cost, p.start == y.dep,
    p'.length > 0, p'.cost > 0, p'.start - y.arr > 120;";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Variant {
    pub name: &'static str,
    /// Definition text; `None` means no path properties.
    pub defs: Option<&'static str>,
    /// Extra filters on the path variable.
    pub filters: &'static str,
}

pub const VARIANTS: [Variant; 8] = [
    Variant { name: "none", defs: None, filters: "" },
    Variant { name: "L<3", defs: Some(PLAIN_DEFS), filters: "p.length < 3" },
    Variant { name: "L<5", defs: Some(PLAIN_DEFS), filters: "p.length < 5" },
    Variant { name: "L<10", defs: Some(PLAIN_DEFS), filters: "p.length < 10" },
    Variant { name: "L<3&C<10000", defs: Some(PLAIN_DEFS), filters: "p.length < 3, p.cost < 10000" },
    Variant { name: "L<5&C<10000", defs: Some(PLAIN_DEFS), filters: "p.length < 5, p.cost < 10000" },
    Variant { name: "L<10&C<10000", defs: Some(PLAIN_DEFS), filters: "p.length < 10, p.cost < 10000" },
    Variant { name: "gap>120", defs: Some(GAP_DEFS), filters: "" },
];

impl Variant {
    pub fn by_name(name: &str) -> Option<Variant> {
        VARIANTS.iter().copied().find(|v| v.name == name)
    }

    pub fn def(&self) -> PropertyDef {
        self.defs
            .map(|t| parse_defs(t).expect("variant definitions parse"))
            .unwrap_or_default()
    }

    pub fn query_text(&self, from: usize, to: usize) -> String {
        let mut text = format!(
            "match (x1:Airport) =[p:Flight+]=> (x2:Airport)\n    where x1.loc == \"{}\", x2.loc == \"{}\"",
            city(from),
            city(to)
        );
        if !self.filters.is_empty() {
            text.push_str(", ");
            text.push_str(self.filters);
        }
        text.push('\n');
        text
    }

    pub fn query(&self, from: usize, to: usize) -> Query {
        parse_query(&self.query_text(from, to))
            .expect("variant queries parse")
            .query
    }
}
