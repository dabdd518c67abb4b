use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::LayoutError;
use crate::spatial::{NodeId, Scene};

/// Tag used when an unknown context is requested.
pub const DEFAULT_CONTEXT: &str = "default";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextRule {
    pub tag: String,
    pub visible: BTreeSet<String>,
}

/// The context rules file: `{"version":1,"rules":[{"tag":..,"visible":[..]}]}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContextRules {
    pub version: u32,
    pub rules: Vec<ContextRule>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextOutcome {
    pub applied: String,
    pub warnings: Vec<String>,
}

impl ContextRules {
    pub fn new(rules: Vec<ContextRule>) -> Result<Self, LayoutError> {
        let r = Self { version: 1, rules };
        r.validate()?;
        Ok(r)
    }

    pub fn from_json(text: &str) -> Result<Self, LayoutError> {
        let r: Self = serde_json::from_str(text).map_err(|e| LayoutError::Format(e.to_string()))?;
        if r.version != 1 {
            return Err(LayoutError::UnsupportedVersion(r.version));
        }
        r.validate()?;
        Ok(r)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("rules always serialize")
    }

    fn validate(&self) -> Result<(), LayoutError> {
        for rule in &self.rules {
            if rule.tag.is_empty() {
                return Err(LayoutError::Format("context tag must not be empty".into()));
            }
            if rule.visible.iter().any(String::is_empty) {
                return Err(LayoutError::Format(format!("empty component name under {:?}", rule.tag)));
            }
        }
        Ok(())
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.rules.iter().any(|r| r.tag == tag)
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Every component name mentioned by any rule.
    pub fn governed(&self) -> BTreeSet<&str> {
        self.rules.iter().flat_map(|r| r.visible.iter().map(String::as_str)).collect()
    }

    fn shown_under(&self, tag: &str) -> BTreeSet<&str> {
        self.rules
            .iter()
            .filter(|r| r.tag == tag)
            .flat_map(|r| r.visible.iter().map(String::as_str))
            .collect()
    }
}

/// Applies contextual visibility for `tag`.
///
/// Components named by any rule (and nodes carrying their own context
/// tags) become visible iff they are listed under the active tag. Every
/// other node keeps its visibility. Poses are never touched.
pub fn set_context(scene: &mut Scene, rules: &ContextRules, tag: &str) -> ContextOutcome {
    let mut warnings = Vec::new();
    let tag_known = rules.has_tag(tag) || scene.iter().any(|n| n.context_tags.contains(tag));
    let applied = if tag_known {
        tag.to_string()
    } else {
        warnings.push(format!("unknown context {tag:?}, using {DEFAULT_CONTEXT:?}"));
        DEFAULT_CONTEXT.to_string()
    };

    let shown = rules.shown_under(&applied);
    let mut updates: Vec<(NodeId, bool)> = Vec::new();
    for name in rules.governed() {
        match scene.lookup(name) {
            Some(id) => updates.push((id, shown.contains(name))),
            None => warnings.push(format!("context rules name unknown component {name:?}")),
        }
    }
    for node in scene.iter() {
        if !node.context_tags.is_empty() {
            let by_rule = node.name().is_some_and(|n| shown.contains(n));
            updates.push((node.id(), by_rule || node.context_tags.contains(&applied)));
        }
    }
    for (id, visible) in updates {
        if let Ok(node) = scene.node_mut(id) {
            node.visible = visible;
        }
    }
    ContextOutcome { applied, warnings }
}
