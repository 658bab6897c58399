//! Worms `⟨γ₁⟩…⟨γₘ⟩⊤`, their heads and shifts, the ordinal assignment `o`,
//! the order functions `o_γ` and the comparison `<_γ`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::formula::{demote, SPFormula};
use crate::ordinal::Ordinal;
use crate::syntax::{Cursor, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WormError {
    #[error("the empty worm has no modalities")]
    EmptyWorm,
    #[error("worm has no modality 0")]
    NoZero,
    #[error("modality {modality} is below the shift {shift}")]
    BelowShift { shift: Ordinal, modality: Ordinal },
    #[error("modality {0} is infinite; its order value has no notation below epsilon_0")]
    TransfiniteModality(Ordinal),
}

/// Outcome of a `<_γ` comparison between two worms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WormOrder {
    Less,
    Equivalent,
    Greater,
}

impl From<Ordering> for WormOrder {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => WormOrder::Less,
            Ordering::Equal => WormOrder::Equivalent,
            Ordering::Greater => WormOrder::Greater,
        }
    }
}

impl fmt::Display for WormOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WormOrder::Less => "<",
            WormOrder::Equivalent => "=",
            WormOrder::Greater => ">",
        })
    }
}

/// Leftmost modality is outermost; the empty worm is `⊤`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Worm {
    modalities: Vec<Ordinal>,
}

impl Worm {
    pub fn new(modalities: Vec<Ordinal>) -> Self {
        Worm { modalities }
    }

    pub fn top() -> Self {
        Worm::default()
    }

    pub fn from_naturals(mods: &[u64]) -> Self {
        Worm::new(mods.iter().map(|&m| Ordinal::from(m)).collect())
    }

    /// `⟨m⟩^k ⊤`.
    pub fn repeat(m: &Ordinal, k: usize) -> Self {
        Worm::new(vec![m.clone(); k])
    }

    pub fn modalities(&self) -> &[Ordinal] {
        &self.modalities
    }

    pub fn len(&self) -> usize {
        self.modalities.len()
    }

    pub fn is_top(&self) -> bool {
        self.modalities.is_empty()
    }

    /// `⟨m⟩self`.
    pub fn prepend(&self, m: Ordinal) -> Worm {
        let mut mods = Vec::with_capacity(self.len() + 1);
        mods.push(m);
        mods.extend(self.modalities.iter().cloned());
        Worm::new(mods)
    }

    /// Concatenation `self · other` (other sits below self).
    pub fn concat(&self, other: &Worm) -> Worm {
        let mut mods = self.modalities.clone();
        mods.extend(other.modalities.iter().cloned());
        Worm::new(mods)
    }

    /// True iff every modality is at least `gamma`.
    pub fn all_at_least(&self, gamma: &Ordinal) -> bool {
        self.modalities.iter().all(|m| m >= gamma)
    }

    /// True iff every modality is strictly below `bound`.
    pub fn all_below(&self, bound: &Ordinal) -> bool {
        self.modalities.iter().all(|m| m < bound)
    }

    pub fn min_modality(&self) -> Result<&Ordinal, WormError> {
        self.modalities.iter().min().ok_or(WormError::EmptyWorm)
    }

    /// `h_γ(A)`: the longest prefix whose modalities are all `≥ γ`.
    pub fn head(&self, gamma: &Ordinal) -> Worm {
        Worm::new(
            self.modalities
                .iter()
                .take_while(|m| *m >= gamma)
                .cloned()
                .collect(),
        )
    }

    /// Splits `A = h·⟨0⟩·b` at the first 0, with `h = h₁(A)`.
    pub fn split_at_first_zero(&self) -> Result<(Worm, Worm), WormError> {
        let i = self
            .modalities
            .iter()
            .position(Ordinal::is_zero)
            .ok_or(if self.is_top() { WormError::EmptyWorm } else { WormError::NoZero })?;
        Ok((
            Worm::new(self.modalities[..i].to_vec()),
            Worm::new(self.modalities[i + 1..].to_vec()),
        ))
    }

    /// `α↑A`: each `ξ` becomes `α + ξ`.
    pub fn shift_up(&self, alpha: &Ordinal) -> Worm {
        Worm::new(self.modalities.iter().map(|m| alpha.add(m)).collect())
    }

    /// `α↓A`: each `ξ` becomes `−α + ξ`.
    pub fn shift_down(&self, alpha: &Ordinal) -> Result<Worm, WormError> {
        self.modalities
            .iter()
            .map(|m| {
                alpha.left_subtract(m).map_err(|_| WormError::BelowShift {
                    shift: alpha.clone(),
                    modality: m.clone(),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Worm::new)
    }

    /// The ordinal `o(A)` of a worm with finite modalities.
    pub fn ordinal_value(&self) -> Result<Ordinal, WormError> {
        if let Some(m) = self.modalities.iter().find(|m| !m.is_finite()) {
            return Err(WormError::TransfiniteModality(m.clone()));
        }
        Ok(self.ordinal_value_finite())
    }

    fn ordinal_value_finite(&self) -> Ordinal {
        let Some(min) = self.modalities.iter().min() else {
            return Ordinal::zero();
        };
        if min.is_zero() {
            let (h, b) = self.split_at_first_zero().expect("minimum is zero");
            let h = h.shift_down(&Ordinal::one()).expect("head modalities are positive");
            b.ordinal_value_finite()
                .add(&Ordinal::omega_power(&h.ordinal_value_finite()))
        } else {
            let mu = min.clone();
            let k = mu.to_u64().expect("finite modality fits in u64");
            let inner = self.shift_down(&mu).expect("mu is the minimum");
            inner.ordinal_value_finite().hyper_e(k)
        }
    }

    /// `o_γ(A) = o(γ↓h_γ(A))`.
    pub fn ordinal_value_gamma(&self, gamma: &Ordinal) -> Result<Ordinal, WormError> {
        self.head(gamma)
            .shift_down(gamma)
            .expect("head modalities are at least gamma")
            .ordinal_value()
    }

    pub fn to_sp(&self) -> SPFormula {
        self.modalities
            .iter()
            .rev()
            .fold(SPFormula::Top, |acc, m| SPFormula::diamond(m.clone(), acc))
    }

    /// Reads an iterated diamond over `⊤` back as a worm.
    pub fn from_sp(f: &SPFormula) -> Option<Worm> {
        let mut mods = Vec::new();
        let mut cur = f;
        loop {
            match cur {
                SPFormula::Top => return Some(Worm::new(mods)),
                SPFormula::Diamond(m, b) => {
                    mods.push(m.clone());
                    cur = b;
                }
                _ => return None,
            }
        }
    }

    pub fn parse(text: &str) -> Result<Worm, SyntaxError> {
        let mut cur = Cursor::new(text);
        let mut mods = Vec::new();
        while cur.eat('<') {
            mods.push(Ordinal::parse_cursor(&mut cur)?);
            cur.expect('>')?;
        }
        if !cur.eat('T') {
            return Err(cur.error("expected '<' or 'T'"));
        }
        cur.finish()?;
        Ok(Worm::new(mods))
    }

    pub fn unicode(&self) -> String {
        let mut out: String = self
            .modalities
            .iter()
            .map(|m| format!("⟨{}⟩", m.unicode()))
            .collect();
        out.push('⊤');
        out
    }
}

/// `A` versus `B` under `<_γ`, where `A <_γ B` means `B ⊢ ⟨γ⟩A`.
///
/// `γ`, `A` and `B` are demoted jointly (0 pinned) before the order values
/// are compared, so transfinite modalities are handled exactly.
pub fn compare_worms(gamma: &Ordinal, a: &Worm, b: &Worm) -> Result<WormOrder, WormError> {
    for w in [a, b] {
        if let Some(m) = w.modalities.iter().find(|m| *m < gamma) {
            return Err(WormError::BelowShift {
                shift: gamma.clone(),
                modality: m.clone(),
            });
        }
    }
    let (mut demoted, _) = demote(&[Worm::new(vec![gamma.clone()]), a.clone(), b.clone()], true);
    let b = demoted.pop().unwrap();
    let a = demoted.pop().unwrap();
    let gamma = demoted.pop().unwrap().modalities[0].clone();
    let oa = a.ordinal_value_gamma(&gamma)?;
    let ob = b.ordinal_value_gamma(&gamma)?;
    Ok(oa.cmp(&ob).into())
}

/// Compares `o_γ` values of arbitrary worms by comparing their `γ`-heads.
pub fn compare_order_values(gamma: &Ordinal, a: &Worm, b: &Worm) -> WormOrder {
    compare_worms(gamma, &a.head(gamma), &b.head(gamma)).expect("heads lie in Worms_gamma")
}

impl fmt::Display for Worm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.modalities {
            write!(f, "<{m}>")?;
        }
        write!(f, "T")
    }
}

impl FromStr for Worm {
    type Err = SyntaxError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Worm::parse(s)
    }
}

impl Serialize for Worm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Worm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Worm::parse(&text).map_err(serde::de::Error::custom)
    }
}
