use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::labels::AamiClass;

/// Beat-symbol to AAMI class table. Editable through the pipeline config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AamiMap {
    table: BTreeMap<char, AamiClass>,
}

impl Default for AamiMap {
    fn default() -> Self {
        let mut table = BTreeMap::new();
        for c in ['N', 'L', 'R', 'e', 'j'] {
            table.insert(c, AamiClass::N);
        }
        for c in ['V', 'E'] {
            table.insert(c, AamiClass::V);
        }
        for c in ['A', 'a', 'J', 'S'] {
            table.insert(c, AamiClass::S);
        }
        table.insert('F', AamiClass::F);
        for c in ['/', 'f', 'Q'] {
            table.insert(c, AamiClass::Q);
        }
        AamiMap { table }
    }
}

impl AamiMap {
    pub fn with_overrides(mut self, overrides: impl IntoIterator<Item = (char, AamiClass)>) -> Self {
        self.table.extend(overrides);
        self
    }

    /// Returns `None` for symbols missing from the table.
    pub fn lookup(&self, symbol: char) -> Option<AamiClass> {
        self.table.get(&symbol).copied()
    }

    /// Maps a beat symbol; unknown symbols land in `Q` with a warning.
    pub fn map_symbol(&self, symbol: char) -> AamiClass {
        match self.lookup(symbol) {
            Some(c) => c,
            None => {
                log::warn!("unknown beat symbol {symbol:?}, mapped to Q");
                AamiClass::Q
            }
        }
    }
}

/// Maps a beat symbol with the default AAMI table.
pub fn map_symbol_to_aami(symbol: char) -> AamiClass {
    AamiMap::default().map_symbol(symbol)
}
