use serde::{Deserialize, Serialize};

use super::{Element, MarkedGroup};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub side: Side,
    pub element: Element,
}

/// Alternating syllables `g_k … g_1`; no syllable is trivial and neighbours
/// come from different factors, so the syllable count is the canonical length.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FreeProductWord(Vec<Syllable>);

impl FreeProductWord {
    pub fn identity() -> Self {
        FreeProductWord(Vec::new())
    }

    pub fn syllable(side: Side, element: Element) -> Self {
        if element.is_identity() {
            FreeProductWord::identity()
        } else {
            FreeProductWord(vec![Syllable { side, element }])
        }
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    fn push(&mut self, syl: &Syllable, left: &MarkedGroup, right: &MarkedGroup) -> Result<()> {
        if syl.element.is_identity() {
            return Ok(());
        }
        match self.0.last() {
            Some(last) if last.side == syl.side => {
                let factor = if syl.side == super::Side::Left { left } else { right };
                let merged = factor.multiply(&last.element, &syl.element)?;
                self.0.pop();
                if !merged.is_identity() {
                    self.0.push(Syllable {
                        side: syl.side,
                        element: merged,
                    });
                }
            }
            _ => self.0.push(syl.clone()),
        }
        Ok(())
    }

    pub fn mul(
        &self,
        other: &FreeProductWord,
        left: &MarkedGroup,
        right: &MarkedGroup,
    ) -> Result<FreeProductWord> {
        let mut out = self.clone();
        for syl in &other.0 {
            out.push(syl, left, right)?;
        }
        Ok(out)
    }

    pub fn inverse(&self, left: &MarkedGroup, right: &MarkedGroup) -> FreeProductWord {
        FreeProductWord(
            self.0
                .iter()
                .rev()
                .map(|s| {
                    let factor = if s.side == Side::Left { left } else { right };
                    Syllable {
                        side: s.side,
                        element: factor.invert(&s.element).expect("syllable of its factor"),
                    }
                })
                .collect(),
        )
    }
}
