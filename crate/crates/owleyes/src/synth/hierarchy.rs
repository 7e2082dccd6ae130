//! View-hierarchy parsing and injection-target selection.
//!
//! Accepts the full Rico node shape (`class`, `bounds` as `[l,t,r,b]`,
//! `children`, optional `text`, optional `visibility`) as well as the
//! simplified subset, either as a bare node or wrapped in
//! `{"activity": {"root": ...}}` / `{"root": ...}`.

use super::IssueCategory;
use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::rng::SplitMix64;
use serde_json::Value;

/// One node of the parsed layout tree.
#[derive(Debug, Clone)]
pub struct ViewNode {
    pub widget_type: String,
    pub bounds: Rect,
    pub text: Option<String>,
    pub children: Vec<ViewNode>,
    pub visible: bool,
}

/// A leaf widget eligible for issue injection, bounds clamped to the screen.
#[derive(Debug, Clone, PartialEq)]
pub struct Widget {
    pub widget_type: String,
    pub bounds: Rect,
}

/// Parsed screen layout plus precomputed candidate pools (preorder).
#[derive(Debug, Clone)]
pub struct ViewHierarchy {
    pub roots: Vec<ViewNode>,
    pub screen_w: u32,
    pub screen_h: u32,
    /// Nodes dropped for missing/unparseable bounds.
    pub skipped_nodes: usize,
    text_pool: Vec<Widget>,
    image_pool: Vec<Widget>,
    widget_pool: Vec<Widget>,
}

/// Class-name suffixes that mark a leaf node as an interactable widget
/// (layout containers never match).
const WIDGET_SUFFIXES: &[&str] = &[
    "TextView", "ImageView", "Button", "EditText", "CheckBox", "Switch", "ProgressBar", "SeekBar",
    "Spinner",
];

fn is_widget_class(class: &str) -> bool {
    let simple = class.rsplit('.').next().unwrap_or(class);
    WIDGET_SUFFIXES.iter().any(|s| simple.ends_with(s))
}

fn parse_bounds(v: &Value) -> Option<Rect> {
    let arr = v.as_array()?;
    if arr.len() != 4 {
        return None;
    }
    let mut vals = [0i64; 4];
    for (i, item) in arr.iter().enumerate() {
        vals[i] = item.as_i64()?;
    }
    Some(Rect::new(vals[0] as i32, vals[1] as i32, vals[2] as i32, vals[3] as i32))
}

fn parse_node(v: &Value, skipped: &mut usize) -> Vec<ViewNode> {
    let Some(obj) = v.as_object() else {
        *skipped += 1;
        return Vec::new();
    };
    let mut children = Vec::new();
    if let Some(Value::Array(kids)) = obj.get("children") {
        for kid in kids {
            if kid.is_null() {
                continue; // Rico files contain literal nulls in child lists
            }
            children.extend(parse_node(kid, skipped));
        }
    }
    let bounds = obj.get("bounds").and_then(parse_bounds);
    let Some(bounds) = bounds else {
        // Node without usable bounds: skip it but keep its children.
        *skipped += 1;
        return children;
    };
    let widget_type = obj
        .get("class")
        .and_then(Value::as_str)
        .unwrap_or("android.view.View")
        .to_string();
    let text = obj.get("text").and_then(Value::as_str).map(str::to_string);
    let visible = match (obj.get("visibility"), obj.get("visible")) {
        (Some(Value::String(s)), _) => s == "visible",
        (_, Some(Value::Bool(b))) => *b,
        _ => true,
    };
    vec![ViewNode { widget_type, bounds, text, children, visible }]
}

fn collect_pools(node: &ViewNode, w: u32, h: u32, hierarchy: &mut ViewHierarchy) {
    if node.children.is_empty() {
        let clamped = node.bounds.clamp_to(w, h);
        if node.visible
            && !node.bounds.is_empty()
            && !clamped.is_empty()
            && is_widget_class(&node.widget_type)
        {
            let widget = Widget { widget_type: node.widget_type.clone(), bounds: clamped };
            let simple = node.widget_type.rsplit('.').next().unwrap_or(&node.widget_type);
            if simple.ends_with("TextView") {
                hierarchy.text_pool.push(widget.clone());
            }
            if simple.ends_with("ImageView") {
                hierarchy.image_pool.push(widget.clone());
            }
            hierarchy.widget_pool.push(widget);
        }
    }
    for child in &node.children {
        collect_pools(child, w, h, hierarchy);
    }
}

/// Parses hierarchy JSON for a `screen_dims = (w, h)` screenshot.
pub fn parse_hierarchy(json_text: &str, screen_dims: (u32, u32)) -> Result<ViewHierarchy> {
    let value: Value = serde_json::from_str(json_text)
        .map_err(|e| Error::Parse(format!("hierarchy JSON: {e}")))?;
    // Unwrap the Rico "activity.root" envelope when present.
    let node = value
        .get("activity")
        .and_then(|a| a.get("root"))
        .or_else(|| value.get("root"))
        .unwrap_or(&value);

    let (w, h) = screen_dims;
    let mut skipped = 0usize;
    let roots = parse_node(node, &mut skipped);
    let mut hierarchy = ViewHierarchy {
        roots,
        screen_w: w,
        screen_h: h,
        skipped_nodes: skipped,
        text_pool: Vec::new(),
        image_pool: Vec::new(),
        widget_pool: Vec::new(),
    };
    let roots = std::mem::take(&mut hierarchy.roots);
    for root in &roots {
        collect_pools(root, w, h, &mut hierarchy);
    }
    hierarchy.roots = roots;
    Ok(hierarchy)
}

impl ViewHierarchy {
    pub fn text_views(&self) -> &[Widget] {
        &self.text_pool
    }

    pub fn image_views(&self) -> &[Widget] {
        &self.image_pool
    }

    pub fn widgets(&self) -> &[Widget] {
        &self.widget_pool
    }

    pub fn screen_rect(&self) -> Rect {
        Rect::new(0, 0, self.screen_w as i32, self.screen_h as i32)
    }

    /// Candidate pool for a category. `BlurredScreen` needs no widget.
    pub fn pool(&self, cat: IssueCategory) -> Option<&[Widget]> {
        match cat {
            IssueCategory::TextOverlap | IssueCategory::NullValue => Some(&self.text_pool),
            IssueCategory::MissingImage => Some(&self.image_pool),
            IssueCategory::ComponentOcclusion => Some(&self.widget_pool),
            IssueCategory::BlurredScreen => None,
        }
    }
}

/// Uniform seeded choice from the category's candidate pool.
/// `BlurredScreen` returns a full-screen pseudo-widget without drawing.
pub fn select_target(h: &ViewHierarchy, cat: IssueCategory, seed: u64) -> Result<Widget> {
    select_with_rng(h, cat, &mut SplitMix64::new(seed))
}

pub(crate) fn select_with_rng(
    h: &ViewHierarchy,
    cat: IssueCategory,
    rng: &mut SplitMix64,
) -> Result<Widget> {
    match h.pool(cat) {
        None => Ok(Widget { widget_type: "Screen".to_string(), bounds: h.screen_rect() }),
        Some(pool) => {
            if pool.is_empty() {
                return Err(Error::NoCandidate(format!("no eligible widget for {cat}")));
            }
            Ok(pool[rng.below(pool.len())].clone())
        }
    }
}
