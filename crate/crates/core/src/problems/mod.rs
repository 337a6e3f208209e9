//! The twenty two-class problems: class-conditional scene samplers, an
//! independent geometric verifier for each, and the identical-shape control
//! and leak-injected variants used by the shortcut auditor.
//!
//! Label `0` is the first class of a problem, label `1` the second.

mod builder;
mod catalog;
mod verify;

use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::geometry::PlacedShape;
use crate::{Error, Result};

pub use verify::{check_layout, identity_classes, verify_scene};

/// Problems from the original 23-problem suite that are supported here.
pub const PROBLEM_IDS: [u8; 20] = [
    1, 2, 4, 5, 6, 7, 8, 9, 10, 12, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23,
];

/// Problems with an identical-shape control variant.
pub const CONTROL_IDS: [u8; 4] = [1, 6, 8, 17];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct ProblemId(u8);

impl ProblemId {
    pub fn new(value: u32) -> Result<Self> {
        Self::try_from(value)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = ProblemId> {
        PROBLEM_IDS.iter().map(|&v| ProblemId(v))
    }
}

impl TryFrom<u32> for ProblemId {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        match u8::try_from(value) {
            Ok(v) if PROBLEM_IDS.contains(&v) => Ok(ProblemId(v)),
            _ => Err(Error::UnknownProblem(value)),
        }
    }
}

impl From<ProblemId> for u32 {
    fn from(id: ProblemId) -> u32 {
        u32::from(id.0)
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ClassLabel(u8);

impl ClassLabel {
    pub const ZERO: ClassLabel = ClassLabel(0);
    pub const ONE: ClassLabel = ClassLabel(1);

    pub fn new(value: u8) -> Result<Self> {
        Self::try_from(value)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }

    pub fn flipped(self) -> Self {
        ClassLabel(1 - self.0)
    }

    pub fn both() -> [ClassLabel; 2] {
        [Self::ZERO, Self::ONE]
    }
}

impl TryFrom<u8> for ClassLabel {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        if value <= 1 {
            Ok(ClassLabel(value))
        } else {
            Err(Error::InvalidArgument(format!("class label must be 0 or 1, got {value}")))
        }
    }
}

impl From<ClassLabel> for u8 {
    fn from(l: ClassLabel) -> u8 {
        l.0
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LeakKind {
    /// Every label-1 shape is scaled by 1.2.
    SizeBias,
    /// Label-1 scenes sit 6 px further towards the top-left corner.
    PositionBias,
}

impl LeakKind {
    pub const ALL: [LeakKind; 2] = [LeakKind::SizeBias, LeakKind::PositionBias];

    pub fn as_str(self) -> &'static str {
        match self {
            LeakKind::SizeBias => "size_bias",
            LeakKind::PositionBias => "position_bias",
        }
    }
}

impl FromStr for LeakKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "size_bias" => Ok(LeakKind::SizeBias),
            "position_bias" => Ok(LeakKind::PositionBias),
            other => Err(Error::InvalidArgument(format!("unknown leak kind `{other}`"))),
        }
    }
}

/// Which distribution a dataset is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum VariantKind {
    #[default]
    Original,
    /// Every shape in a scene comes from one contour; positions per class
    /// are unchanged.
    IdenticalControl,
    Leak(LeakKind),
    /// Both classes are drawn from the label-0 sampler.
    Null,
}

impl VariantKind {
    pub fn name(self) -> String {
        match self {
            VariantKind::Original => "original".into(),
            VariantKind::IdenticalControl => "identical_control".into(),
            VariantKind::Leak(k) => format!("leak_{}", k.as_str()),
            VariantKind::Null => "null".into(),
        }
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for VariantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(VariantKind::Original),
            "identical_control" | "control" => Ok(VariantKind::IdenticalControl),
            "null" => Ok(VariantKind::Null),
            other => match other.strip_prefix("leak_") {
                Some(kind) => Ok(VariantKind::Leak(kind.parse()?)),
                None => Err(Error::InvalidArgument(format!("unknown variant `{other}`"))),
            },
        }
    }
}

impl Serialize for VariantKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for VariantKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Table-level description of what separates the two classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Compare,
    #[serde(rename = "compare+grouping")]
    CompareGrouping,
    #[serde(rename = "compare+relative-position")]
    CompareRelativePosition,
    RelativePosition,
    #[serde(rename = "size+relative-position")]
    SizeRelativePosition,
    Alignment,
    Grouping,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Compare => "compare",
            Category::CompareGrouping => "compare+grouping",
            Category::CompareRelativePosition => "compare+relative-position",
            Category::RelativePosition => "relative-position",
            Category::SizeRelativePosition => "size+relative-position",
            Category::Alignment => "alignment",
            Category::Grouping => "grouping",
        }
    }

    /// True for problems whose cue needs a shape-identity judgement.
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            Category::Compare | Category::CompareGrouping | Category::CompareRelativePosition
        )
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Category::Compare,
            Category::CompareGrouping,
            Category::CompareRelativePosition,
            Category::RelativePosition,
            Category::SizeRelativePosition,
            Category::Alignment,
            Category::Grouping,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown category `{s}`")))
    }
}

pub fn category_of(id: ProblemId) -> Category {
    match id.get() {
        1 | 15 | 16 | 19 | 20 | 21 | 22 => Category::Compare,
        5..=7 => Category::CompareGrouping,
        8 | 17 => Category::CompareRelativePosition,
        2 | 4 | 10 | 23 => Category::RelativePosition,
        9 | 12 => Category::SizeRelativePosition,
        14 => Category::Alignment,
        18 => Category::Grouping,
        _ => unreachable!("ProblemId is validated on construction"),
    }
}

/// Tolerances in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Equality tolerance for distance-equality cues.
    pub eq: f64,
    /// Minimum gap for inequality cues; nothing lands in `(eq, sep)`.
    pub sep: f64,
    /// Collinearity tolerance.
    pub col: f64,
}

impl Tolerances {
    pub const BASE_CANVAS: u32 = 64;

    pub const fn base() -> Self {
        Self {
            eq: 2.0,
            sep: 8.0,
            col: 2.0,
        }
    }

    /// Tolerances scaled proportionally from the 64 px baseline.
    pub fn for_canvas(canvas: u32) -> Self {
        let k = f64::from(canvas) / f64::from(Self::BASE_CANVAS);
        let b = Self::base();
        Self {
            eq: b.eq * k,
            sep: b.sep * k,
            col: b.col * k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub id: ProblemId,
    pub category: Category,
    pub variant: VariantKind,
    /// Baseline tolerances at 64 px; scaled with the canvas at sampling time.
    pub tolerances: Tolerances,
}

impl ProblemSpec {
    pub fn original(id: ProblemId) -> Self {
        Self {
            id,
            category: category_of(id),
            variant: VariantKind::Original,
            tolerances: Tolerances::base(),
        }
    }

    pub fn with_variant(id: ProblemId, variant: VariantKind) -> Result<Self> {
        let base = Self::original(id);
        match variant {
            VariantKind::Original => Ok(base),
            VariantKind::IdenticalControl => control_variant(&base),
            VariantKind::Leak(kind) => Ok(inject_leak(&base, kind)),
            VariantKind::Null => Ok(Self {
                variant: VariantKind::Null,
                ..base
            }),
        }
    }

    pub fn sample(&self, label: ClassLabel, rng: &mut dyn RngCore, canvas: u32) -> Result<SceneSpec> {
        sample_scene(self, label, rng, canvas)
    }
}

/// Problem-specific annotations recorded by the sampler. The verifier never
/// reads them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CueMetadata {
    /// Appearance group per shape; equal values were drawn from one look.
    pub groups: Vec<usize>,
    /// Named measurements taken at sampling time (distances, margins).
    pub quantities: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub problem: ProblemId,
    pub label: ClassLabel,
    pub variant: VariantKind,
    pub canvas: u32,
    pub shapes: Vec<PlacedShape>,
    pub cue: CueMetadata,
}

impl SceneSpec {
    pub fn render(&self) -> Result<crate::geometry::Bitmap> {
        crate::geometry::rasterize(&self.shapes, self.canvas, self.canvas)
    }
}

/// Every supported problem with its category.
pub fn list_problems() -> Vec<(ProblemId, Category)> {
    ProblemId::all().map(|id| (id, category_of(id))).collect()
}

/// Identical-shape variant: positions are sampled as in the original, but
/// every shape is drawn from one contour.
pub fn control_variant(spec: &ProblemSpec) -> Result<ProblemSpec> {
    if !CONTROL_IDS.contains(&spec.id.get()) {
        return Err(Error::NoControlVariant(spec.id.get()));
    }
    Ok(ProblemSpec {
        variant: VariantKind::IdenticalControl,
        ..spec.clone()
    })
}

/// Variant with a deliberate label-correlated bias on top of the original
/// cue.
pub fn inject_leak(spec: &ProblemSpec, kind: LeakKind) -> ProblemSpec {
    ProblemSpec {
        variant: VariantKind::Leak(kind),
        ..spec.clone()
    }
}

/// Minimum canvas side supported by the samplers.
pub const MIN_CANVAS: u32 = 48;

/// Draw one scene of the given class. Deterministic in the rng state.
pub fn sample_scene(
    spec: &ProblemSpec,
    label: ClassLabel,
    rng: &mut dyn RngCore,
    canvas: u32,
) -> Result<SceneSpec> {
    if canvas < MIN_CANVAS {
        return Err(Error::InvalidArgument(format!(
            "canvas must be at least {MIN_CANVAS} px, got {canvas}"
        )));
    }
    catalog::sample(spec, label, rng, canvas)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_problems_without_3_11_13() {
        let all = list_problems();
        assert_eq!(all.len(), 20);
        for excluded in [3, 11, 13] {
            assert!(ProblemId::new(excluded).is_err());
            assert!(all.iter().all(|(id, _)| id.get() != excluded as u8));
        }
    }

    #[test]
    fn categories_follow_the_results_table() {
        let cat = |v| category_of(ProblemId::new(v).unwrap());
        assert_eq!(cat(1), Category::Compare);
        assert_eq!(cat(2), Category::RelativePosition);
        assert_eq!(cat(6), Category::CompareGrouping);
        assert_eq!(cat(9), Category::SizeRelativePosition);
        assert_eq!(cat(14), Category::Alignment);
        assert_eq!(cat(17), Category::CompareRelativePosition);
        assert_eq!(cat(18), Category::Grouping);
        let comparison: Vec<u8> = list_problems()
            .into_iter()
            .filter(|(_, c)| c.is_comparison())
            .map(|(id, _)| id.get())
            .collect();
        assert_eq!(comparison, vec![1, 5, 6, 7, 8, 15, 16, 17, 19, 20, 21, 22]);
    }

    #[test]
    fn control_variant_only_for_supported_problems() {
        for id in ProblemId::all() {
            let res = control_variant(&ProblemSpec::original(id));
            assert_eq!(res.is_ok(), CONTROL_IDS.contains(&id.get()), "problem {id}");
        }
    }

    #[test]
    fn variant_names_round_trip() {
        for v in [
            VariantKind::Original,
            VariantKind::IdenticalControl,
            VariantKind::Leak(LeakKind::SizeBias),
            VariantKind::Leak(LeakKind::PositionBias),
            VariantKind::Null,
        ] {
            assert_eq!(v.name().parse::<VariantKind>().unwrap(), v);
            let json = serde_json::to_string(&v).unwrap();
            assert_eq!(serde_json::from_str::<VariantKind>(&json).unwrap(), v);
        }
    }

    #[test]
    fn labels_are_binary() {
        assert!(ClassLabel::new(2).is_err());
        assert_eq!(ClassLabel::ZERO.flipped(), ClassLabel::ONE);
    }

    #[test]
    fn tolerances_scale_with_canvas() {
        let t = Tolerances::for_canvas(128);
        assert_eq!((t.eq, t.sep, t.col), (4.0, 16.0, 4.0));
    }
}
