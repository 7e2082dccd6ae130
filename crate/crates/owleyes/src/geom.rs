//! Axis-aligned pixel rectangles.
//!
//! All rectangles in this crate use the `[left, top, right, bottom)` pixel
//! convention: `left`/`top` inclusive, `right`/`bottom` exclusive.

use serde::{Deserialize, Serialize};

/// Axis-aligned rectangle, exclusive right/bottom edges. Serializes as the
/// `[left, top, right, bottom]` array used by hierarchy JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[i32; 4]", into = "[i32; 4]")]
pub struct Rect {
    pub left: i32,
    pub top: i32,
    pub right: i32,
    pub bottom: i32,
}

impl From<[i32; 4]> for Rect {
    fn from(v: [i32; 4]) -> Self {
        Rect { left: v[0], top: v[1], right: v[2], bottom: v[3] }
    }
}

impl From<Rect> for [i32; 4] {
    fn from(r: Rect) -> Self {
        [r.left, r.top, r.right, r.bottom]
    }
}

impl Rect {
    pub fn new(left: i32, top: i32, right: i32, bottom: i32) -> Self {
        Rect { left, top, right, bottom }
    }

    pub fn width(&self) -> i32 {
        self.right - self.left
    }

    pub fn height(&self) -> i32 {
        self.bottom - self.top
    }

    /// True when the rectangle encloses no pixels.
    pub fn is_empty(&self) -> bool {
        self.right <= self.left || self.bottom <= self.top
    }

    pub fn area(&self) -> i64 {
        if self.is_empty() {
            0
        } else {
            self.width() as i64 * self.height() as i64
        }
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.left + self.right) as f64 / 2.0,
            (self.top + self.bottom) as f64 / 2.0,
        )
    }

    /// Clamp into a `w`×`h` screen. May produce an empty rectangle.
    pub fn clamp_to(&self, w: u32, h: u32) -> Rect {
        Rect {
            left: self.left.clamp(0, w as i32),
            top: self.top.clamp(0, h as i32),
            right: self.right.clamp(0, w as i32),
            bottom: self.bottom.clamp(0, h as i32),
        }
    }

    /// Smallest rectangle covering both operands.
    pub fn union(&self, other: &Rect) -> Rect {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Rect {
            left: self.left.min(other.left),
            top: self.top.min(other.top),
            right: self.right.max(other.right),
            bottom: self.bottom.max(other.bottom),
        }
    }

    /// Whether the pixel `(x, y)` lies inside.
    pub fn contains(&self, x: i32, y: i32) -> bool {
        x >= self.left && x < self.right && y >= self.top && y < self.bottom
    }

    /// Whether `other` lies entirely inside `self`.
    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.is_empty()
            || (other.left >= self.left
                && other.top >= self.top
                && other.right <= self.right
                && other.bottom <= self.bottom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_covers_both() {
        let a = Rect::new(0, 0, 10, 10);
        let b = Rect::new(5, 5, 20, 12);
        let u = a.union(&b);
        assert_eq!(u, Rect::new(0, 0, 20, 12));
        assert!(u.contains_rect(&a) && u.contains_rect(&b));
    }

    #[test]
    fn clamp_cuts_offscreen_parts() {
        let r = Rect::new(-5, 10, 30, 50).clamp_to(20, 40);
        assert_eq!(r, Rect::new(0, 10, 20, 40));
    }

    #[test]
    fn degenerate_is_empty() {
        assert!(Rect::new(300, 100, 100, 200).is_empty());
        assert!(Rect::new(5, 5, 5, 9).is_empty());
        assert!(!Rect::new(0, 0, 1, 1).is_empty());
    }

    #[test]
    fn containment_respects_exclusive_edges() {
        let r = Rect::new(2, 3, 6, 7);
        assert!(r.contains(2, 3));
        assert!(r.contains(5, 6));
        assert!(!r.contains(6, 6));
        assert!(!r.contains(5, 7));
    }
}
