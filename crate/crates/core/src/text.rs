//! Token normalization shared by explanation matching and guardrails.

/// Case-folded word tokens. A token is a run of letters, digits and `_`;
/// a `-` directly before a digit at the start of a token is kept as a sign;
/// anything after an apostrophe inside a word is dropped ("loop's" -> "loop").
pub fn tokens(text: &str) -> Vec<String> {
    split(text, true)
}

/// Word tokens with their case kept, for matching identifiers.
pub fn raw_tokens(text: &str) -> Vec<String> {
    split(text, false)
}

fn split(text: &str, fold: bool) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let word = |c: char| c.is_alphanumeric() || c == '_';
        let signed =
            c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) && (i == 0 || !word(chars[i - 1]));
        if word(c) || signed {
            let mut tok = String::new();
            if signed {
                tok.push('-');
                i += 1;
            }
            while i < chars.len() && word(chars[i]) {
                if fold {
                    tok.extend(chars[i].to_lowercase());
                } else {
                    tok.push(chars[i]);
                }
                i += 1;
            }
            if i < chars.len() && (chars[i] == '\'' || chars[i] == '\u{2019}') {
                while i < chars.len() && (word(chars[i]) || chars[i] == '\'' || chars[i] == '\u{2019}') {
                    i += 1;
                }
            }
            out.push(tok);
        } else {
            i += 1;
        }
    }
    out
}

/// True when `phrase` occurs in `haystack` as a contiguous token run.
pub fn contains_phrase(haystack: &[String], phrase: &[String]) -> bool {
    !phrase.is_empty() && haystack.windows(phrase.len()).any(|w| w == phrase)
}

/// Space-joined lowercase tokens, for phrase matching on raw text.
pub fn normalized(text: &str) -> String {
    tokens(text).join(" ")
}

pub fn has_digit(text: &str) -> bool {
    text.chars().any(|c| c.is_ascii_digit())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_and_folds() {
        assert_eq!(tokens("The loop's last ITERATION, i=2!"), vec!["the", "loop", "last", "iteration", "i", "2"]);
    }

    #[test]
    fn negative_numbers_keep_sign() {
        assert_eq!(tokens("value -1 then x-1"), vec!["value", "-1", "then", "x", "1"]);
    }

    #[test]
    fn phrases_are_contiguous() {
        let hay = tokens("the final loop iteration");
        assert!(contains_phrase(&hay, &tokens("loop iteration")));
        assert!(!contains_phrase(&hay, &tokens("final iteration")));
    }
}
