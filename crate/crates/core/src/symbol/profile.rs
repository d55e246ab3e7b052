use serde::{Deserialize, Serialize};

/// Which function a zero-set entry describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    F,
    OneMinusF,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::F => Side::OneMinusF,
            Side::OneMinusF => Side::F,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroLocation {
    IsolatedPoint,
    AlgebraicCurve,
    NonAlgebraicCurve,
    PositiveMeasure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VanishingOrder {
    Finite(u32),
    /// Faster than any polynomial, e.g. `exp(-1/|x|)`.
    Flat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroEntry {
    pub side: Side,
    pub location: ZeroLocation,
    pub order: VanishingOrder,
}

/// User-declared description of the zero sets of `f` and `1-f`.
///
/// An empty entry list means "neither `f` nor `1-f` vanishes".
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroProfile {
    pub entries: Vec<ZeroEntry>,
}

impl ZeroProfile {
    pub fn complemented(&self) -> ZeroProfile {
        ZeroProfile {
            entries: self
                .entries
                .iter()
                .map(|e| ZeroEntry {
                    side: e.side.flip(),
                    ..e.clone()
                })
                .collect(),
        }
    }

    pub fn side(&self, side: Side) -> impl Iterator<Item = &ZeroEntry> {
        self.entries.iter().filter(move |e| e.side == side)
    }
}
