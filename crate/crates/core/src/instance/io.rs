use serde::{Deserialize, Serialize};

use crate::scalar::{parse, Scalar};

use super::{Instance, InstanceError, Item};

/// On-disk instance document. Rationals are "num/den" or integer strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub version: u32,
    pub s_a: usize,
    pub s_b: usize,
    pub leader_budget: Vec<String>,
    pub follower_budget: Vec<String>,
    pub items: Vec<ItemDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemDoc {
    pub p: String,
    pub cost: Vec<String>,
    pub weight: Vec<String>,
}

fn parse_all<S: Scalar>(values: &[String], what: &str) -> Result<Vec<S>, InstanceError> {
    values
        .iter()
        .map(|v| {
            parse(v).ok_or_else(|| InstanceError::Format(format!("bad rational {v:?} in {what}")))
        })
        .collect()
}

fn show<S: Scalar>(values: &[S]) -> Vec<String> {
    values.iter().map(|v| v.to_string()).collect()
}

impl<S: Scalar> Instance<S> {
    pub fn to_doc(&self) -> InstanceDoc {
        InstanceDoc {
            version: 1,
            s_a: self.s_a(),
            s_b: self.s_b(),
            leader_budget: show(self.leader_budget()),
            follower_budget: show(self.follower_budget()),
            items: self
                .items()
                .iter()
                .map(|it| ItemDoc {
                    p: it.profit.to_string(),
                    cost: show(&it.cost),
                    weight: show(&it.weight),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &InstanceDoc) -> Result<Self, InstanceError> {
        if doc.version != 1 {
            return Err(InstanceError::Format(format!(
                "unsupported version {}",
                doc.version
            )));
        }
        let a = parse_all(&doc.leader_budget, "leader_budget")?;
        let b = parse_all(&doc.follower_budget, "follower_budget")?;
        if a.len() != doc.s_a || b.len() != doc.s_b {
            return Err(InstanceError::DimensionMismatch(
                "budget length differs from s_a/s_b".into(),
            ));
        }
        let items = doc
            .items
            .iter()
            .enumerate()
            .map(|(j, it)| {
                let p = parse(&it.p).ok_or_else(|| {
                    InstanceError::Format(format!("bad profit {:?} on item {j}", it.p))
                })?;
                Ok(Item::new(
                    p,
                    parse_all(&it.cost, "cost")?,
                    parse_all(&it.weight, "weight")?,
                ))
            })
            .collect::<Result<Vec<_>, InstanceError>>()?;
        Instance::new(a, b, items)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let doc: InstanceDoc =
            serde_json::from_str(text).map_err(|e| InstanceError::Format(e.to_string()))?;
        Self::from_doc(&doc)
    }
}
