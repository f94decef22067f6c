//! Beat and segment class labels.

use std::fmt;

use serde::{Deserialize, Serialize};

/// AAMI beat class, including the discarded `Q` group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AamiClass {
    N,
    V,
    S,
    F,
    Q,
}

impl AamiClass {
    pub fn as_char(self) -> char {
        match self {
            AamiClass::N => 'N',
            AamiClass::V => 'V',
            AamiClass::S => 'S',
            AamiClass::F => 'F',
            AamiClass::Q => 'Q',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'N' => Some(AamiClass::N),
            'V' => Some(AamiClass::V),
            'S' => Some(AamiClass::S),
            'F' => Some(AamiClass::F),
            'Q' => Some(AamiClass::Q),
            _ => None,
        }
    }

    pub fn class(self) -> Option<Class> {
        match self {
            AamiClass::N => Some(Class::N),
            AamiClass::V => Some(Class::V),
            AamiClass::S => Some(Class::S),
            AamiClass::F => Some(Class::F),
            AamiClass::Q => None,
        }
    }
}

impl fmt::Display for AamiClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// One of the four classes the classifiers work with. The declaration order
/// (N, V, S, F) is the fixed tie-break order used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Class {
    N,
    V,
    S,
    F,
}

impl Class {
    pub const ALL: [Class; 4] = [Class::N, Class::V, Class::S, Class::F];
    pub const ABNORMAL: [Class; 3] = [Class::V, Class::S, Class::F];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Class> {
        Class::ALL.get(i).copied()
    }

    pub fn as_char(self) -> char {
        AamiClass::from(self).as_char()
    }

    pub fn from_char(c: char) -> Option<Class> {
        AamiClass::from_char(c).and_then(AamiClass::class)
    }

    pub fn is_abnormal(self) -> bool {
        self != Class::N
    }
}

impl From<Class> for AamiClass {
    fn from(c: Class) -> Self {
        match c {
            Class::N => AamiClass::N,
            Class::V => AamiClass::V,
            Class::S => AamiClass::S,
            Class::F => AamiClass::F,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}
