//! Length units and conversions.
//!
//! Diagram geometry is computed in centimeters. Source lengths may be given
//! in `cm`, `mm` or `pt` (TeX points, 72.27 to the inch). SVG output is in
//! CSS pixels at a configurable pixels-per-centimeter scale.

/// TeX points per centimeter (72.27 pt per inch, 2.54 cm per inch).
pub const PT_PER_CM: f64 = 72.27 / 2.54;

/// Default output scale: 96 dpi expressed as pixels per centimeter.
pub const DEFAULT_PX_PER_CM: f64 = 96.0 / 2.54;

/// A physical length, stored in centimeters.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Length {
    cm: f64,
}

impl Length {
    pub const ZERO: Length = Length { cm: 0.0 };

    pub fn cm(value: f64) -> Self {
        Length { cm: value }
    }

    pub fn mm(value: f64) -> Self {
        Length { cm: value / 10.0 }
    }

    pub fn pt(value: f64) -> Self {
        Length {
            cm: value / PT_PER_CM,
        }
    }

    pub fn from_unit(value: f64, unit: UnitKind) -> Self {
        match unit {
            UnitKind::Cm => Length::cm(value),
            UnitKind::Mm => Length::mm(value),
            UnitKind::Pt => Length::pt(value),
        }
    }

    pub fn as_cm(self) -> f64 {
        self.cm
    }

    pub fn as_pt(self) -> f64 {
        self.cm * PT_PER_CM
    }

    /// Length scaled by a dimensionless factor.
    pub fn scaled(self, factor: f64) -> Self {
        Length {
            cm: self.cm * factor,
        }
    }

    pub fn is_positive(self) -> bool {
        self.cm > 0.0
    }
}

impl std::ops::Add for Length {
    type Output = Length;
    fn add(self, rhs: Length) -> Length {
        Length {
            cm: self.cm + rhs.cm,
        }
    }
}

/// Unit suffix accepted after a number in the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitKind {
    Cm,
    Mm,
    Pt,
}

impl UnitKind {
    pub fn from_suffix(s: &str) -> Option<UnitKind> {
        match s {
            "cm" => Some(UnitKind::Cm),
            "mm" => Some(UnitKind::Mm),
            "pt" => Some(UnitKind::Pt),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UnitKind::Cm => "cm",
            UnitKind::Mm => "mm",
            UnitKind::Pt => "pt",
        }
    }
}
