//! Indexed families of convex bodies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{intersect, ConvexBody, Point};

pub const FAMILY_SCHEMA: &str = "quanthelly.family/1";

#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    pub members: Vec<ConvexBody>,
    pub labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    #[serde(default)]
    schema: Option<String>,
    #[serde(default)]
    dim: Option<usize>,
    members: Vec<ConvexBody>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl Family {
    pub fn new(members: Vec<ConvexBody>) -> Result<Self> {
        if let Some(first) = members.first() {
            let d = first.dim();
            if let Some(b) = members.iter().find(|b| b.dim() != d) {
                return Err(Error::DimensionMismatch { expected: d, got: b.dim() });
            }
        }
        Ok(Family { members, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.members.len() {
            return Err(Error::Invalid("one label per member expected".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// A family of single points (classic mode).
    pub fn from_points(points: &[Point]) -> Result<Self> {
        Family::new(points.iter().map(|p| ConvexBody::point(p.clone())).collect::<Result<_>>()?)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.members.first().map(ConvexBody::dim)
    }

    pub fn get(&self, i: usize) -> &ConvexBody {
        &self.members[i]
    }

    /// The point of each member if every member is a single point.
    pub fn as_points(&self) -> Option<Vec<Point>> {
        self.members
            .iter()
            .map(|b| match b.vertices() {
                Some([p]) => Some(p.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn subfamily(&self, idx: &[usize]) -> Family {
        Family {
            members: idx.iter().map(|&i| self.members[i].clone()).collect(),
            labels: self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i].clone()).collect()),
        }
    }

    /// Intersection of the indexed members.
    pub fn intersection(&self, idx: &[usize]) -> Result<ConvexBody> {
        let bodies: Vec<ConvexBody> = idx.iter().map(|&i| self.members[i].clone()).collect();
        intersect(&bodies)
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let raw: FamilyJson = serde_json::from_value(v.clone())?;
        if let Some(s) = &raw.schema {
            if s != FAMILY_SCHEMA {
                return Err(Error::Invalid(format!("unknown family schema {s:?}")));
            }
        }
        let fam = Family::new(raw.members)?;
        if let (Some(d), Some(got)) = (raw.dim, fam.dim()) {
            if d != got {
                return Err(Error::DimensionMismatch { expected: d, got });
            }
        }
        match raw.labels {
            Some(l) => fam.with_labels(l),
            None => Ok(fam),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(FamilyJson {
            schema: Some(FAMILY_SCHEMA.to_string()),
            dim: self.dim(),
            members: self.members.clone(),
            labels: self.labels.clone(),
        })
        .expect("family serializes")
    }
}
