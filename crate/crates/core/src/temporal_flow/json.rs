//! JSON form of a temporal flow.
//!
//! ```json
//! {"assignments": [{"amount": 2, "edge": "vt", "label": 8}],
//!  "journeys": [{"amount": 2, "time_edges": [{"edge": "sv", "label": 1}, ...]}],
//!  "value": 2}
//! ```
//!
//! Keys are sorted. Integral amounts are bare numbers, other rationals are
//! strings `"p/q"`; no floats are ever written.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};
use thiserror::Error;

use super::{Amount, JourneyFlow, TemporalFlow};
use crate::temporal_graph::{Label, TimeEdge};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowJsonError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("expected {0}")]
    Shape(&'static str),
    #[error("invalid amount {0}")]
    Amount(String),
    #[error("time-edge ({0},{1}) assigned twice")]
    Duplicate(String, Label),
}

pub fn amount_to_json(a: &Amount) -> Value {
    if a.is_integer() {
        if let Some(n) = a.numer().to_i64() {
            return Value::from(n);
        }
    }
    Value::String(a.to_string())
}

fn amount_from_json(v: &Value) -> Result<Amount, FlowJsonError> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Amount::from_integer(BigInt::from(i)))
            } else if let Some(u) = n.as_u64() {
                Ok(Amount::from_integer(BigInt::from(u)))
            } else {
                Err(FlowJsonError::Amount(n.to_string()))
            }
        }
        Value::String(s) => s
            .trim()
            .parse::<Amount>()
            .map_err(|_| FlowJsonError::Amount(s.clone())),
        other => Err(FlowJsonError::Amount(other.to_string())),
    }
}

fn time_edge_json(te: &TimeEdge) -> Value {
    json!({ "edge": te.edge, "label": te.label })
}

/// Renders a flow with its value and, optionally, a journey decomposition.
pub fn flow_to_json(value: &Amount, tf: &TemporalFlow, journeys: Option<&[JourneyFlow]>) -> Value {
    let assignments: Vec<Value> = tf
        .assignments()
        .iter()
        .map(|(te, a)| json!({ "amount": amount_to_json(a), "edge": te.edge, "label": te.label }))
        .collect();
    let mut doc = Map::new();
    doc.insert("assignments".into(), Value::Array(assignments));
    if let Some(js) = journeys {
        let list = js
            .iter()
            .map(|j| {
                json!({
                    "amount": amount_to_json(&j.amount),
                    "time_edges": j.journey.time_edges().iter().map(time_edge_json).collect::<Vec<_>>(),
                })
            })
            .collect();
        doc.insert("journeys".into(), Value::Array(list));
    }
    doc.insert("value".into(), amount_to_json(value));
    Value::Object(doc)
}

/// Reads the `assignments` of a flow document. Other fields are ignored.
pub fn flow_from_json(text: &str) -> Result<BTreeMap<TimeEdge, Amount>, FlowJsonError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| FlowJsonError::Json(e.to_string()))?;
    let list = doc
        .get("assignments")
        .and_then(Value::as_array)
        .ok_or(FlowJsonError::Shape(
            "an object with an `assignments` array",
        ))?;
    let mut out = BTreeMap::new();
    for item in list {
        let edge = item
            .get("edge")
            .and_then(Value::as_str)
            .ok_or(FlowJsonError::Shape("string `edge` in every assignment"))?;
        let label = item
            .get("label")
            .and_then(Value::as_u64)
            .and_then(|l| Label::try_from(l).ok())
            .ok_or(FlowJsonError::Shape(
                "non-negative integer `label` in every assignment",
            ))?;
        let amount = amount_from_json(
            item.get("amount")
                .ok_or(FlowJsonError::Shape("`amount` in every assignment"))?,
        )?;
        if out.insert(TimeEdge::new(edge, label), amount).is_some() {
            return Err(FlowJsonError::Duplicate(edge.to_string(), label));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal_flow::buffer_trajectories;
    use crate::temporal_graph::parse_network;

    #[test]
    fn amounts_render_without_floats() {
        assert_eq!(amount_to_json(&Amount::from_integer(7.into())), json!(7));
        let half = Amount::new(1.into(), 2.into());
        assert_eq!(amount_to_json(&half), json!("1/2"));
        assert_eq!(amount_from_json(&json!("1/2")).unwrap(), half);
        assert_eq!(
            amount_from_json(&json!(-3)).unwrap(),
            Amount::from_integer((-3).into())
        );
        assert!(amount_from_json(&json!(1.5)).is_err());
    }

    #[test]
    fn document_layout_and_reading_back() {
        let g = parse_network("source s\nsink t\nedge e s t 5 3\n").unwrap();
        let a: BTreeMap<_, _> = [(TimeEdge::new("e", 3), Amount::from_integer(5.into()))].into();
        let tf = buffer_trajectories(&g, a.clone());
        let doc = flow_to_json(&Amount::from_integer(5.into()), &tf, None);
        assert_eq!(
            doc.to_string(),
            r#"{"assignments":[{"amount":5,"edge":"e","label":3}],"value":5}"#
        );
        assert_eq!(flow_from_json(&doc.to_string()).unwrap(), a);
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(flow_from_json("{"), Err(FlowJsonError::Json(_))));
        assert!(matches!(flow_from_json("{}"), Err(FlowJsonError::Shape(_))));
        assert!(matches!(
            flow_from_json(r#"{"assignments":[{"edge":"e","label":1,"amount":"x"}]}"#),
            Err(FlowJsonError::Amount(_))
        ));
        assert!(matches!(
            flow_from_json(
                r#"{"assignments":[{"edge":"e","label":1,"amount":1},{"edge":"e","label":1,"amount":2}]}"#
            ),
            Err(FlowJsonError::Duplicate(..))
        ));
    }
}
