use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

macro_rules! labels {
    ($($v:ident),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        #[allow(non_camel_case_types)]
        pub enum ClassLabel { $($v),* }

        impl ClassLabel {
            pub const ALL: &'static [ClassLabel] = &[$(ClassLabel::$v),*];

            pub fn as_str(self) -> &'static str {
                match self { $(ClassLabel::$v => stringify!($v)),* }
            }
        }
    };
}

labels!(
    A,
    A1,
    A11,
    A12,
    A13,
    A131,
    A132,
    A14,
    A141,
    A142,
    A2,
    A21,
    A22,
    A3,
    A31,
    A32,
    B,
    C,
    D,
    D1,
    D11,
    D12,
    E1,
    E11,
    E111,
    E12,
    E13,
    E131,
    E2,
    E21,
    E22,
    E23,
    E3,
    E31,
    E32,
    E321,
    E33,
    F,
    G1,
    G2,
    G3,
    G4,
    ISOCLINIC,
    ISOCLINICLY_GEODESIC,
);

impl ClassLabel {
    /// Summary-table column: one of A B C D E F G, or `None` for the
    /// isoclinicity labels.
    pub fn column(self) -> Option<char> {
        let s = self.as_str();
        match s.as_bytes()[0] {
            b'I' => None,
            b'G' => Some('G'),
            c => Some(c as char),
        }
    }

    pub fn parent(self) -> Option<ClassLabel> {
        use ClassLabel::*;
        Some(match self {
            A1 | A2 | A3 => A,
            A11 | A12 | A13 | A14 => A1,
            A131 | A132 => A13,
            A141 | A142 => A14,
            A21 | A22 => A2,
            A31 | A32 => A3,
            D1 => D,
            D11 | D12 => D1,
            E11 | E12 | E13 => E1,
            E111 => E11,
            E131 => E13,
            E21 | E22 | E23 => E2,
            E31 | E32 | E33 => E3,
            E321 => E32,
            _ => return None,
        })
    }

    /// Direct parent plus the overlapping classes that contain this one.
    pub fn superclasses(self) -> Vec<ClassLabel> {
        use ClassLabel::*;
        let mut v: Vec<ClassLabel> = self.parent().into_iter().collect();
        match self {
            A131 | A141 => v.push(A11),
            A132 | A142 => v.push(A12),
            _ => {}
        }
        v
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown class label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for ClassLabel {
    type Err = UnknownLabel;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

impl Serialize for ClassLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ClassLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for l in ClassLabel::ALL {
            assert_eq!(l.as_str().parse::<ClassLabel>().unwrap(), *l);
        }
        assert!("A4".parse::<ClassLabel>().is_err());
    }

    #[test]
    fn columns() {
        assert_eq!(ClassLabel::A131.column(), Some('A'));
        assert_eq!(ClassLabel::G4.column(), Some('G'));
        assert_eq!(ClassLabel::E321.column(), Some('E'));
        assert_eq!(ClassLabel::ISOCLINIC.column(), None);
    }

    #[test]
    fn overlapping_superclasses() {
        use ClassLabel::*;
        assert_eq!(A132.superclasses(), vec![A13, A12]);
        assert_eq!(A21.superclasses(), vec![A2]);
        assert!(B.superclasses().is_empty());
    }
}
