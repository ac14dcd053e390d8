/// CJK ideographs (unified blocks, extensions and compatibility ranges).
pub fn is_han(c: char) -> bool {
    matches!(c,
        '\u{3400}'..='\u{4DBF}'
        | '\u{4E00}'..='\u{9FFF}'
        | '\u{F900}'..='\u{FAFF}'
        | '\u{20000}'..='\u{2A6DF}'
        | '\u{2A700}'..='\u{2EBEF}'
        | '\u{2F800}'..='\u{2FA1F}'
        | '\u{30000}'..='\u{3134F}')
}

/// Split text into lowercase tokens.
///
/// Non-Han text yields maximal alphanumeric runs. A run of Han characters
/// yields its overlapping character bigrams, or the character itself when
/// the run has length one. Everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    let mut han: Vec<char> = Vec::new();

    for c in text.chars() {
        if is_han(c) {
            flush_word(&mut word, &mut tokens);
            han.push(c);
        } else if c.is_alphanumeric() {
            flush_han(&mut han, &mut tokens);
            word.extend(c.to_lowercase());
        } else {
            flush_word(&mut word, &mut tokens);
            flush_han(&mut han, &mut tokens);
        }
    }
    flush_word(&mut word, &mut tokens);
    flush_han(&mut han, &mut tokens);
    tokens
}

fn flush_word(word: &mut String, tokens: &mut Vec<String>) {
    if !word.is_empty() {
        tokens.push(std::mem::take(word));
    }
}

fn flush_han(run: &mut Vec<char>, tokens: &mut Vec<String>) {
    match run.len() {
        0 => {}
        1 => tokens.push(run[0].to_string()),
        _ => tokens.extend(run.windows(2).map(|w| w.iter().collect::<String>())),
    }
    run.clear();
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic() {
        assert_eq!(tokenize("Hello WORLD"), ["hello", "world"]);
        assert_eq!(tokenize("中国队"), ["中国", "国队"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("李娜 won!"), ["李娜", "won"]);
        assert_eq!(tokenize("a中b"), ["a", "中", "b"]);
        assert_eq!(tokenize("#MH370_is_missing#"), ["mh370", "is", "missing"]);
        assert_eq!(tokenize("中，国"), ["中", "国"]);
    }

    proptest! {
        #[test]
        fn idempotent_on_own_output(text in "[a-zA-Z0-9éÉ .,!#_-]{0,60}") {
            let once = tokenize(&text);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }
    }
}
