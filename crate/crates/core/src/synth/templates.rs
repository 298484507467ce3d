use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::recognition::StrokeLabel;

pub const TEMPLATE_VERSION: u32 = 1;
const DEFAULT_TEMPLATES: &str = include_str!("templates.toml");

pub type Range = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokeTemplate {
    pub label: StrokeLabel,
    #[serde(rename = "speed")]
    pub speed_range: Range,
    #[serde(rename = "launch_angle")]
    pub launch_angle_range: Range,
    #[serde(rename = "magnus")]
    pub magnus_range: Range,
    #[serde(rename = "contact_height")]
    pub contact_height_range: Range,
    #[serde(rename = "contact_distance")]
    pub contact_distance_range: Range,
}

/// Serve kinematics; spin comes from the stroke's label template.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServeTemplate {
    #[serde(rename = "speed")]
    pub speed_range: Range,
    #[serde(rename = "launch_angle")]
    pub launch_angle_range: Range,
    #[serde(rename = "contact_height")]
    pub contact_height_range: Range,
    #[serde(rename = "contact_distance")]
    pub contact_distance_range: Range,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateSet {
    pub version: u32,
    pub serve: ServeTemplate,
    #[serde(rename = "template")]
    pub templates: Vec<StrokeTemplate>,
}

fn check_range(what: &str, r: Range) -> Result<(), SynthError> {
    if r.iter().all(|v| v.is_finite()) && r[0] <= r[1] {
        Ok(())
    } else {
        Err(SynthError::InvalidTemplate(format!("{what} range {r:?} is empty")))
    }
}

impl StrokeTemplate {
    pub fn validate(&self) -> Result<(), SynthError> {
        let name = self.label.name();
        check_range(&format!("{name} speed"), self.speed_range)?;
        check_range(&format!("{name} launch_angle"), self.launch_angle_range)?;
        check_range(&format!("{name} magnus"), self.magnus_range)?;
        check_range(&format!("{name} contact_height"), self.contact_height_range)?;
        check_range(&format!("{name} contact_distance"), self.contact_distance_range)?;
        if self.speed_range[0] <= 0.0 {
            return Err(SynthError::InvalidTemplate(format!("{name} speed must be positive")));
        }
        Ok(())
    }
}

impl TemplateSet {
    pub fn parse(text: &str) -> Result<Self, SynthError> {
        let set: TemplateSet = toml::from_str(text).map_err(|e| SynthError::InvalidTemplate(e.to_string()))?;
        if set.version != TEMPLATE_VERSION {
            return Err(SynthError::InvalidTemplate(format!(
                "template version {} is not supported (expected {TEMPLATE_VERSION})",
                set.version
            )));
        }
        let s = set.serve;
        check_range("serve speed", s.speed_range)?;
        check_range("serve launch_angle", s.launch_angle_range)?;
        check_range("serve contact_height", s.contact_height_range)?;
        check_range("serve contact_distance", s.contact_distance_range)?;
        let mut seen = BTreeMap::new();
        for t in &set.templates {
            t.validate()?;
            if seen.insert(t.label, ()).is_some() {
                return Err(SynthError::InvalidTemplate(format!("duplicate template for {}", t.label)));
            }
        }
        Ok(set)
    }

    /// The built-in template set.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_TEMPLATES).expect("built-in templates are valid")
    }

    pub fn get(&self, label: StrokeLabel) -> Option<&StrokeTemplate> {
        self.templates.iter().find(|t| t.label == label)
    }
}

/// Built-in template for one label.
pub fn default_template(label: StrokeLabel) -> StrokeTemplate {
    *TemplateSet::builtin().get(label).expect("every label has a built-in template")
}
