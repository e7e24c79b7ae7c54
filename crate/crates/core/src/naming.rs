//! Session folder naming: `<Language>_<catN>_<Item>_<Performer>_<suffix>`.

use alloc::format;
use alloc::string::{String, ToString};

use crate::category::SignCategory;
use crate::error::CoreError;

/// Largest suffix value; suffixes are six zero-padded decimal digits.
pub const MAX_SUFFIX: u32 = 999_999;

/// Reduces a free-form name to `[A-Za-z0-9-]+`.
///
/// Leading and trailing whitespace is dropped, each interior whitespace run
/// becomes one hyphen, and every other character outside the allowed set is
/// removed.
pub fn sanitize_component(raw: &str) -> Result<String, CoreError> {
    let mut out = String::with_capacity(raw.len());
    let mut pending_gap = false;
    for c in raw.trim().chars() {
        if c.is_whitespace() {
            pending_gap = true;
            continue;
        }
        if pending_gap {
            out.push('-');
            pending_gap = false;
        }
        if c.is_ascii_alphanumeric() || c == '-' {
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err(CoreError::InvalidName(raw.to_string()));
    }
    Ok(out)
}

pub fn session_folder_name(
    language: &str,
    category: SignCategory,
    item: &str,
    performer: &str,
    suffix: u32,
) -> Result<String, CoreError> {
    if suffix > MAX_SUFFIX {
        return Err(CoreError::InvalidName(format!("{suffix}")));
    }
    Ok(format!(
        "{}_{}_{}_{}_{:06}",
        sanitize_component(language)?,
        category.code(),
        sanitize_component(item)?,
        sanitize_component(performer)?,
        suffix
    ))
}

/// Parts recovered from a well-formed folder name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolderName<'a> {
    pub language: &'a str,
    pub category: SignCategory,
    pub item: &'a str,
    pub performer: &'a str,
    pub suffix: u32,
}

fn is_component(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-')
}

/// Checks a folder name against the naming grammar.
pub fn parse_folder_name(name: &str) -> Option<FolderName<'_>> {
    let mut parts = name.split('_');
    let language = parts.next()?;
    let cat = parts.next()?;
    let item = parts.next()?;
    let performer = parts.next()?;
    let suffix = parts.next()?;
    if parts.next().is_some() {
        return None;
    }
    if !(is_component(language) && is_component(item) && is_component(performer)) {
        return None;
    }
    let category = match cat.as_bytes() {
        [b'c', b'a', b't', d @ b'1'..=b'8'] => SignCategory::from_number(d - b'0')?,
        _ => return None,
    };
    if suffix.len() != 6 || !suffix.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(FolderName { language, category, item, performer, suffix: suffix.parse().ok()? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folder_name_examples() {
        assert_eq!(
            session_folder_name("English", SignCategory::WordBySign, "My Mom", "Rita", 42).unwrap(),
            "English_cat4_My-Mom_Rita_000042"
        );
        assert_eq!(
            session_folder_name("English", SignCategory::AlphabetLetter, "A", "P1", 0).unwrap(),
            "English_cat3_A_P1_000000"
        );
        assert!(matches!(
            session_folder_name("  ", SignCategory::NumberBelowTen, "4", "P1", 1),
            Err(CoreError::InvalidName(_))
        ));
    }

    #[test]
    fn sanitization_rules() {
        assert_eq!(sanitize_component("Entropy of Mike's image").unwrap(), "Entropy-of-Mikes-image");
        assert_eq!(sanitize_component(" I \t love  you ").unwrap(), "I-love-you");
        assert_eq!(sanitize_component("a_b").unwrap(), "ab");
        assert!(sanitize_component("___").is_err());
        assert!(sanitize_component("").is_err());
    }

    #[test]
    fn suffix_limit() {
        assert!(session_folder_name("E", SignCategory::WordBySign, "I", "P", 1_000_000).is_err());
        assert_eq!(
            session_folder_name("E", SignCategory::WordBySign, "I", "P", 999_999).unwrap(),
            "E_cat4_I_P_999999"
        );
    }

    #[test]
    fn parse_accepts_generated_names_only() {
        let parsed = parse_folder_name("English_cat4_My-Mom_Rita_000042").unwrap();
        assert_eq!(parsed.category, SignCategory::WordBySign);
        assert_eq!(parsed.item, "My-Mom");
        assert_eq!(parsed.suffix, 42);
        for bad in [
            "English_cat9_A_B_000001",
            "English_cat4_A_B_00001",
            "English_cat4_A_B_000001_x",
            "English_cat4__B_000001",
            "Eng lish_cat4_A_B_000001",
        ] {
            assert!(parse_folder_name(bad).is_none(), "{bad}");
        }
    }
}
