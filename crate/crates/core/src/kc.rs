//! Knowledge components and misconception tags.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Skills tracked per student. Declaration order is the selection tie order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Kc {
    Loops,
    Conditionals,
    Arrays,
    Arithmetic,
    Tracing,
    Termination,
    Functions,
}

impl Kc {
    pub const ALL: [Kc; 7] =
        [Kc::Loops, Kc::Conditionals, Kc::Arrays, Kc::Arithmetic, Kc::Tracing, Kc::Termination, Kc::Functions];

    pub fn name(self) -> &'static str {
        match self {
            Kc::Loops => "LOOPS",
            Kc::Conditionals => "CONDITIONALS",
            Kc::Arrays => "ARRAYS",
            Kc::Arithmetic => "ARITHMETIC",
            Kc::Tracing => "TRACING",
            Kc::Termination => "TERMINATION",
            Kc::Functions => "FUNCTIONS",
        }
    }

    /// Plain-language topic used in broad hints.
    pub fn topic(self) -> &'static str {
        match self {
            Kc::Loops => "how the loop is set up and how it advances",
            Kc::Conditionals => "when each branch of the condition is chosen",
            Kc::Arrays => "which array positions are valid",
            Kc::Arithmetic => "how each value is computed",
            Kc::Tracing => "how the variables change as the program runs",
            Kc::Termination => "what makes the loop stop",
            Kc::Functions => "what each function receives and returns",
        }
    }
}

impl fmt::Display for Kc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Kc {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kc::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown knowledge component {s}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MisconceptionTag {
    #[default]
    None,
    OffByOne,
    WrongBranch,
    InitValueConfusion,
    IterCountConfusion,
    BoundsConfusion,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_order_follows_declaration() {
        let mut shuffled = vec![Kc::Functions, Kc::Tracing, Kc::Loops, Kc::Arrays];
        shuffled.sort();
        assert_eq!(shuffled, vec![Kc::Loops, Kc::Arrays, Kc::Tracing, Kc::Functions]);
    }

    #[test]
    fn names_round_trip() {
        for k in Kc::ALL {
            assert_eq!(k.name().parse::<Kc>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.name()));
        }
    }
}
