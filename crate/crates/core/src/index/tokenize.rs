/// Splits `text` into lowercase terms.
///
/// Separators are all non-alphanumeric characters. Inside a run, a term
/// also ends between a lowercase and an uppercase letter (`hasAuthor`) and
/// before the last capital of an uppercase run followed by a lowercase
/// letter (`HTTPServer`). Terms shorter than two characters are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut terms = Vec::new();
    split_into(text, &mut terms, 0);
    terms
}

fn split_into(text: &str, terms: &mut Vec<String>, depth: u8) {
    for run in text.split(|c: char| !c.is_alphanumeric()) {
        let chars: Vec<char> = run.chars().collect();
        let mut start = 0;
        for i in 1..=chars.len() {
            let boundary = i == chars.len() || {
                let (prev, cur) = (chars[i - 1], chars[i]);
                let camel = prev.is_lowercase() && cur.is_uppercase();
                let acronym_end = prev.is_uppercase()
                    && cur.is_uppercase()
                    && chars.get(i + 1).is_some_and(|c| c.is_lowercase());
                camel || acronym_end
            };
            if !boundary {
                continue;
            }
            let piece: String = chars[start..i].iter().collect();
            start = i;
            let lower = piece.to_lowercase();
            // Lowercasing can leave uncased capitals or add combining marks,
            // so a changed piece goes through the splitter again.
            if lower != piece && depth < 4 {
                split_into(&lower, terms, depth + 1);
            } else if lower.chars().count() >= 2 {
                terms.push(lower);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn camel_and_acronyms() {
        assert_eq!(tokenize("hasAuthor"), ["has", "author"]);
        assert_eq!(tokenize("HTTPServer"), ["http", "server"]);
        assert_eq!(tokenize("foo_bar-2"), ["foo", "bar"]);
        assert_eq!(tokenize("MargheritaPizza"), ["margherita", "pizza"]);
        assert_eq!(tokenize("ISBN"), ["isbn"]);
        assert_eq!(tokenize("http://example.org/pizza#hasPrice"), ["http", "example", "org", "pizza", "has", "price"]);
    }

    #[test]
    fn separators_only() {
        assert!(tokenize("  !! ").is_empty());
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn digits_stay_in_their_run() {
        assert_eq!(tokenize("owl2 v10"), ["owl2", "v10"]);
    }

    proptest! {
        #[test]
        fn idempotent_over_joined_output(s in "\\PC{0,40}") {
            let once = tokenize(&s);
            prop_assert_eq!(tokenize(&once.join(" ")), once);
        }

        #[test]
        fn terms_are_lowercase_alphanumeric(s in "\\PC{0,40}") {
            for t in tokenize(&s) {
                prop_assert!(t.chars().count() >= 2);
                prop_assert!(t.chars().all(char::is_alphanumeric));
            }
        }
    }
}
