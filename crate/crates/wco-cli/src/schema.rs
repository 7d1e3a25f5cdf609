//! The on-disk spec document: a JSON description of a weighted system plus
//! optional run options. Scalars travel as strings (`"7/4"`, `"0.5"`) so the
//! rational/float distinction survives serialization; bare JSON numbers are
//! accepted on input for convenience.

use serde::{Deserialize, Serialize};

use wco::scalar::Scalar;
use wco::space::{GeoRule, TailMap, WeightedSystem};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Literal {
    Text(String),
    Number(serde_json::Number),
}

impl Literal {
    pub fn as_text(&self) -> String {
        match self {
            Literal::Text(s) => s.clone(),
            Literal::Number(n) => n.to_string(),
        }
    }

    fn text(value: impl Into<String>) -> Self {
        Literal::Text(value.into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HeadDocument {
    pub masses: Vec<Literal>,
    pub phi: Vec<usize>,
    pub usq: Vec<Literal>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GeoRuleDocument {
    pub a: Literal,
    pub r: Literal,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TailMapDocument {
    Constant { c: usize },
    ShiftDown { d: usize },
    ShiftUp { d: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TailDocument {
    pub mass: GeoRuleDocument,
    pub usq: GeoRuleDocument,
    pub map: TailMapDocument,
}

/// Run options carried inside a spec document; command-line flags override.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct OptionsDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alt_shifts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alt_depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

/// Textual description of a weighted system: `kind` selects the model
/// (`finite` carries `masses`/`phi`/`usq`; `geometric_tail` carries
/// `head`/`tail`), `field` selects the scalar mode.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpecDocument {
    pub kind: String,
    pub field: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<Literal>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub usq: Option<Vec<Literal>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub head: Option<HeadDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionsDocument>,
}

impl SpecDocument {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::input(format!("cannot parse spec document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn finite(
        masses: Vec<&str>,
        phi: Vec<usize>,
        usq: Vec<&str>,
        field: &str,
    ) -> SpecDocument {
        SpecDocument {
            kind: "finite".into(),
            field: field.into(),
            masses: Some(masses.into_iter().map(Literal::text).collect()),
            phi: Some(phi),
            usq: Some(usq.into_iter().map(Literal::text).collect()),
            head: None,
            tail: None,
            options: None,
        }
    }

    /// Builds the validated-system description in scalar mode `K`.
    ///
    /// Diagnostics name the offending field; validation errors from the
    /// space module pass through with the same exit class.
    pub fn to_system<K: Scalar>(&self) -> Result<WeightedSystem<K>, CliError> {
        match self.kind.as_str() {
            "finite" => {
                let masses = self.parse_scalars::<K>(self.masses.as_ref(), "masses")?;
                let phi = self
                    .phi
                    .clone()
                    .ok_or_else(|| CliError::input("finite spec is missing `phi`"))?;
                let usq = self.parse_scalars::<K>(self.usq.as_ref(), "usq")?;
                Ok(WeightedSystem::Finite { masses, phi, usq })
            }
            "geometric_tail" => {
                let head = self
                    .head
                    .as_ref()
                    .ok_or_else(|| CliError::input("geometric_tail spec is missing `head`"))?;
                let tail = self
                    .tail
                    .as_ref()
                    .ok_or_else(|| CliError::input("geometric_tail spec is missing `tail`"))?;
                let head_masses = self.parse_scalars::<K>(Some(&head.masses), "head.masses")?;
                let head_usq = self.parse_scalars::<K>(Some(&head.usq), "head.usq")?;
                let tail_mass = GeoRule {
                    coeff: parse_literal::<K>(&tail.mass.a, "tail.mass.a")?,
                    ratio: parse_literal::<K>(&tail.mass.r, "tail.mass.r")?,
                };
                let tail_usq = GeoRule {
                    coeff: parse_literal::<K>(&tail.usq.a, "tail.usq.a")?,
                    ratio: parse_literal::<K>(&tail.usq.r, "tail.usq.r")?,
                };
                let tail_map = match tail.map {
                    TailMapDocument::Constant { c } => TailMap::Constant(c),
                    TailMapDocument::ShiftDown { d } => TailMap::ShiftDown(d),
                    TailMapDocument::ShiftUp { d } => TailMap::ShiftUp(d),
                };
                Ok(WeightedSystem::GeometricTail {
                    head_masses,
                    head_phi: head.phi.clone(),
                    head_usq,
                    tail_mass,
                    tail_usq,
                    tail_map,
                })
            }
            other => Err(CliError::input(format!(
                "unknown spec kind `{other}` (expected `finite` or `geometric_tail`)"
            ))),
        }
    }

    fn parse_scalars<K: Scalar>(
        &self,
        values: Option<&Vec<Literal>>,
        field: &str,
    ) -> Result<Vec<K>, CliError> {
        let values =
            values.ok_or_else(|| CliError::input(format!("spec is missing `{field}`")))?;
        values
            .iter()
            .enumerate()
            .map(|(i, lit)| parse_literal::<K>(lit, &format!("{field}[{i}]")))
            .collect()
    }
}

fn parse_literal<K: Scalar>(literal: &Literal, field: &str) -> Result<K, CliError> {
    K::parse_literal(&literal.as_text()).map_err(|bad| {
        if K::EXACT {
            CliError::input(format!("{field}: {}", wco::Error::MixedField(bad)))
        } else {
            CliError::input(format!("{field}: literal `{bad}` is not a float value"))
        }
    })
}

impl SpecDocument {
    /// Finite-system document from owned scalar strings.
    pub fn finite_owned(
        masses: Vec<String>,
        phi: Vec<usize>,
        usq: Vec<String>,
        field: &str,
    ) -> SpecDocument {
        SpecDocument {
            kind: "finite".into(),
            field: field.into(),
            masses: Some(masses.into_iter().map(Literal::Text).collect()),
            phi: Some(phi),
            usq: Some(usq.into_iter().map(Literal::Text).collect()),
            head: None,
            tail: None,
            options: None,
        }
    }

    /// Geometric-tail document from owned scalar strings.
    pub fn geometric_tail(
        head_masses: Vec<String>,
        head_phi: Vec<usize>,
        head_usq: Vec<String>,
        mass: (String, String),
        usq: (String, String),
        map: TailMapDocument,
    ) -> SpecDocument {
        SpecDocument {
            kind: "geometric_tail".into(),
            field: "rational".into(),
            masses: None,
            phi: None,
            usq: None,
            head: Some(HeadDocument {
                masses: head_masses.into_iter().map(Literal::Text).collect(),
                phi: head_phi,
                usq: head_usq.into_iter().map(Literal::Text).collect(),
            }),
            tail: Some(TailDocument {
                mass: GeoRuleDocument {
                    a: Literal::Text(mass.0),
                    r: Literal::Text(mass.1),
                },
                usq: GeoRuleDocument {
                    a: Literal::Text(usq.0),
                    r: Literal::Text(usq.1),
                },
                map,
            }),
            options: None,
        }
    }
}
