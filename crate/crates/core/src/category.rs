use core::fmt;
use core::str::FromStr;

/// The eight kinds of capturable sign items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SignCategory {
    /// Single digits, e.g. "4".
    NumberBelowTen,
    /// Multi-digit numbers, e.g. "222".
    NumberAboveTen,
    AlphabetLetter,
    WordBySign,
    WordByLetters,
    SentenceByWords,
    SentenceBySigns,
    ArbitrarySentence,
}

impl SignCategory {
    pub const ALL: [SignCategory; 8] = [
        SignCategory::NumberBelowTen,
        SignCategory::NumberAboveTen,
        SignCategory::AlphabetLetter,
        SignCategory::WordBySign,
        SignCategory::WordByLetters,
        SignCategory::SentenceByWords,
        SignCategory::SentenceBySigns,
        SignCategory::ArbitrarySentence,
    ];

    /// 1-based category number.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<SignCategory> {
        Self::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }

    /// Short code used in folder names and APIs: `cat1`..`cat8`.
    pub fn code(self) -> &'static str {
        ["cat1", "cat2", "cat3", "cat4", "cat5", "cat6", "cat7", "cat8"][self as usize]
    }

    pub fn description(self) -> &'static str {
        match self {
            SignCategory::NumberBelowTen => "Number < 10",
            SignCategory::NumberAboveTen => "Number > 10",
            SignCategory::AlphabetLetter => "Alphabet Letter",
            SignCategory::WordBySign => "Word by a Sign",
            SignCategory::WordByLetters => "Word by Letters",
            SignCategory::SentenceByWords => "Sentence by Words",
            SignCategory::SentenceBySigns => "Sentence by Signs",
            SignCategory::ArbitrarySentence => "Arbitrary sentence",
        }
    }
}

impl fmt::Display for SignCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownCategory;

impl fmt::Display for UnknownCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected a category code cat1..cat8")
    }
}

impl core::error::Error for UnknownCategory {}

impl FromStr for SignCategory {
    type Err = UnknownCategory;

    /// Accepts `cat4`, `CAT4` or a bare `4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let digits = if s.len() > 3 && s[..3].eq_ignore_ascii_case("cat") { &s[3..] } else { s };
        digits.parse::<u8>().ok().and_then(SignCategory::from_number).ok_or(UnknownCategory)
    }
}
