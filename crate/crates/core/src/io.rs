//! Canonical JSON formats for instances, schedules, and solver results.
//!
//! Instance files look like
//! `{"T":2,"items":[{"id":"i1","value":3,"weight":2}],"capacities":[2,4],"discounts":[1,1]}`
//! with `discounts` optional (defaults to all ones). Schedules map item
//! ids to an insertion period or `null` for "never":
//! `{"insertion_time":{"i1":1,"i2":null}}`.
//!
//! Numbers are read exactly: integers stay integers, and floats are
//! converted to the dyadic rational they denote. On output, integral
//! rationals are written as JSON integers and everything else as the
//! nearest double.

use crate::model::{AlgoResult, Instance, Item, ModelError, Schedule, Witness};
use crate::num::{rat_display, rat_from_f64, rat_to_f64, Rat};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("bad number: {0}")]
    BadNumber(String),
}

#[derive(Serialize, Deserialize)]
struct ItemFile {
    id: String,
    value: Number,
    weight: Number,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    #[serde(rename = "T")]
    horizon: usize,
    items: Vec<ItemFile>,
    capacities: Vec<Number>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discounts: Option<Vec<Number>>,
}

fn number_to_rat(n: &Number) -> Result<Rat, IoError> {
    if let Some(u) = n.as_u64() {
        if let Ok(i) = i64::try_from(u) {
            return Ok(crate::num::rat_int(i));
        }
    }
    if let Some(i) = n.as_i64() {
        return Ok(crate::num::rat_int(i));
    }
    n.as_f64()
        .and_then(rat_from_f64)
        .ok_or_else(|| IoError::BadNumber(n.to_string()))
}

fn rat_to_number(r: &Rat) -> Number {
    if crate::num::rat_is_integer(r) {
        if let Some(i) = r.numer().to_i64() {
            return Number::from(i);
        }
    }
    Number::from_f64(rat_to_f64(r)).unwrap_or_else(|| Number::from(0))
}

/// Parses and validates an instance from its JSON form.
pub fn instance_from_json(text: &str) -> Result<Instance, IoError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let items = file
        .items
        .iter()
        .map(|it| {
            Ok(Item::new(
                it.id.clone(),
                number_to_rat(&it.value)?,
                number_to_rat(&it.weight)?,
            ))
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    let capacities = file
        .capacities
        .iter()
        .map(number_to_rat)
        .collect::<Result<Vec<_>, IoError>>()?;
    let discounts = match &file.discounts {
        Some(d) => Some(
            d.iter()
                .map(number_to_rat)
                .collect::<Result<Vec<_>, IoError>>()?,
        ),
        None => None,
    };
    Ok(Instance::new(items, file.horizon, capacities, discounts)?)
}

/// Renders an instance in the canonical JSON form (pretty-printed,
/// trailing newline, discounts always explicit).
pub fn instance_to_json(inst: &Instance) -> String {
    let file = InstanceFile {
        horizon: inst.horizon(),
        items: inst
            .items()
            .iter()
            .map(|it| ItemFile {
                id: it.id.clone(),
                value: rat_to_number(&it.value),
                weight: rat_to_number(&it.weight),
            })
            .collect(),
        capacities: inst.capacities().iter().map(rat_to_number).collect(),
        discounts: Some(inst.discounts().iter().map(rat_to_number).collect()),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("instance serialization");
    text.push('\n');
    text
}

#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    insertion_time: Map<String, Value>,
}

/// Parses a schedule and binds it to `inst`'s items. Ids missing from
/// the file are treated as never inserted; unknown ids are an error.
pub fn schedule_from_json(inst: &Instance, text: &str) -> Result<Schedule, IoError> {
    let file: ScheduleFile = serde_json::from_str(text)?;
    for id in file.insertion_time.keys() {
        if !inst.items().iter().any(|it| &it.id == id) {
            return Err(ModelError::UnknownItem(id.clone()).into());
        }
    }
    let mut times = vec![None; inst.item_count()];
    for (i, item) in inst.items().iter().enumerate() {
        match file.insertion_time.get(&item.id) {
            None | Some(Value::Null) => {}
            Some(Value::Number(n)) => {
                let period = n
                    .as_u64()
                    .and_then(|u| usize::try_from(u).ok())
                    .filter(|&t| t >= 1 && t <= inst.horizon())
                    .ok_or_else(|| ModelError::InvalidPeriod {
                        item: item.id.clone(),
                        period: n.as_u64().and_then(|u| usize::try_from(u).ok()).unwrap_or(0),
                        horizon: inst.horizon(),
                    })?;
                times[i] = Some(period);
            }
            Some(other) => {
                return Err(IoError::BadNumber(other.to_string()));
            }
        }
    }
    Ok(Schedule::new(times))
}

/// Renders a schedule keyed by item id, listing every item explicitly.
pub fn schedule_to_json(inst: &Instance, schedule: &Schedule) -> String {
    let mut map = Map::new();
    for (i, item) in inst.items().iter().enumerate() {
        let v = match schedule.insertion_time(i) {
            Some(t) => Value::from(t as u64),
            None => Value::Null,
        };
        map.insert(item.id.clone(), v);
    }
    let file = ScheduleFile {
        insertion_time: map,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("schedule serialization");
    text.push('\n');
    text
}

fn witness_to_value(inst: &Instance, witness: &Witness) -> Value {
    let mut map = Map::new();
    match witness {
        Witness::Exhaustive => {
            map.insert("kind".into(), Value::from("exhaustive"));
        }
        Witness::Replicated { period } => {
            map.insert("kind".into(), Value::from("replicated"));
            map.insert("period".into(), Value::from(*period as u64));
        }
        Witness::Disjunct {
            pivot_period,
            entry_period,
            anchor_item,
        } => {
            map.insert("kind".into(), Value::from("disjunct"));
            map.insert("pivot_period".into(), Value::from(*pivot_period as u64));
            map.insert("entry_period".into(), Value::from(*entry_period as u64));
            map.insert(
                "anchor_item".into(),
                Value::from(inst.item(*anchor_item).id.clone()),
            );
        }
        Witness::ProfilePoint {
            anchor_item,
            anchor_period,
            profile,
        } => {
            map.insert("kind".into(), Value::from("profile"));
            map.insert(
                "anchor_item".into(),
                Value::from(inst.item(*anchor_item).id.clone()),
            );
            map.insert("anchor_period".into(), Value::from(*anchor_period as u64));
            map.insert(
                "profile".into(),
                Value::from(
                    profile
                        .iter()
                        .map(|row| Value::from(row.clone()))
                        .collect::<Vec<_>>(),
                ),
            );
        }
        Witness::Empty => {
            map.insert("kind".into(), Value::from("empty"));
        }
    }
    Value::Object(map)
}

/// Renders a solver result: algorithm tag, value (double plus exact
/// string), optional guarantee, the schedule, and the witness.
pub fn result_to_json(inst: &Instance, result: &AlgoResult) -> String {
    let mut map = Map::new();
    map.insert("algorithm".into(), Value::from(result.algorithm.tag()));
    map.insert(
        "value".into(),
        Value::Number(Number::from_f64(rat_to_f64(&result.value)).unwrap_or_else(|| Number::from(0))),
    );
    map.insert("value_exact".into(), Value::from(rat_display(&result.value)));
    map.insert(
        "claimed_factor".into(),
        match &result.claimed_factor {
            Some(f) => Value::from(rat_display(f)),
            None => Value::Null,
        },
    );
    let sched: Value = serde_json::from_str(&schedule_to_json(inst, &result.schedule))
        .expect("schedule round-trip");
    map.insert("schedule".into(), sched);
    map.insert("witness".into(), witness_to_value(inst, &result.witness));
    let mut text =
        serde_json::to_string_pretty(&Value::Object(map)).expect("result serialization");
    text.push('\n');
    text
}
