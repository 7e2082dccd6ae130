//! Labeled-dataset synthesis: view-hierarchy parsing, issue injection, and
//! manifest generation.

mod dataset;
mod hierarchy;
mod inject;

pub use dataset::{
    generate_dataset, DatasetManifest, GenerateOptions, Label, ManifestHeader, ManifestRow,
};
pub use hierarchy::{parse_hierarchy, select_target, ViewHierarchy, ViewNode, Widget};
pub use inject::{inject_issue, MISSING_FILL, MISSING_STROKE, NULL_TEXT_COLOR};

use crate::geom::Rect;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// The five UI display issue categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueCategory {
    ComponentOcclusion,
    TextOverlap,
    MissingImage,
    NullValue,
    BlurredScreen,
}

impl IssueCategory {
    pub const ALL: [IssueCategory; 5] = [
        IssueCategory::ComponentOcclusion,
        IssueCategory::TextOverlap,
        IssueCategory::MissingImage,
        IssueCategory::NullValue,
        IssueCategory::BlurredScreen,
    ];

    pub fn slug(&self) -> &'static str {
        match self {
            IssueCategory::ComponentOcclusion => "component-occlusion",
            IssueCategory::TextOverlap => "text-overlap",
            IssueCategory::MissingImage => "missing-image",
            IssueCategory::NullValue => "null-value",
            IssueCategory::BlurredScreen => "blurred-screen",
        }
    }
}

impl std::fmt::Display for IssueCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.slug())
    }
}

impl std::str::FromStr for IssueCategory {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IssueCategory::ALL
            .into_iter()
            .find(|c| c.slug() == s)
            .ok_or_else(|| crate::error::Error::Argument(format!("unknown issue category {s:?}")))
    }
}

/// One injected issue: where it came from, where it went, and exactly what
/// was done.
#[derive(Debug, Clone, PartialEq)]
pub struct BugRecord {
    pub source_path: PathBuf,
    pub output_path: PathBuf,
    pub category: IssueCategory,
    pub region: Rect,
    pub seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exactly_five_categories_with_stable_slugs() {
        assert_eq!(IssueCategory::ALL.len(), 5);
        for cat in IssueCategory::ALL {
            let parsed: IssueCategory = cat.slug().parse().unwrap();
            assert_eq!(parsed, cat);
        }
        assert!("blurry".parse::<IssueCategory>().is_err());
    }

    #[test]
    fn serde_uses_kebab_case() {
        let json = serde_json::to_string(&IssueCategory::MissingImage).unwrap();
        assert_eq!(json, "\"missing-image\"");
    }
}
