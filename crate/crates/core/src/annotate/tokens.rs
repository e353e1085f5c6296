//! Offset-preserving word tokenizer for newswire sentences.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Number,
    Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub lower: String,
    /// byte offsets into the tokenized text
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
}

impl Token {
    pub fn is_capitalized(&self) -> bool {
        self.kind == TokenKind::Word && self.text.chars().next().is_some_and(char::is_uppercase)
    }

    pub fn is(&self, word: &str) -> bool {
        self.lower == word
    }
}

/// Magnitude abbreviations split off a leading numeral ("5bn" -> "5", "bn").
const GLUED_MAGNITUDES: &[&str] = &["bn", "bln", "mln", "mn", "m", "k", "b", "tn"];

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let at = |i: usize| chars.get(i).map(|&(_, c)| c);
    let offset = |i: usize| chars.get(i).map_or(text.len(), |&(p, _)| p);
    let mut tokens = Vec::new();
    let mut push = |start: usize, end: usize, kind: TokenKind| {
        let s = &text[start..end];
        tokens.push(Token {
            text: s.to_string(),
            lower: s.to_lowercase(),
            start,
            end,
            kind,
        });
    };

    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            i += 1;
            loop {
                match at(i) {
                    Some(d) if d.is_ascii_digit() => i += 1,
                    Some('.') if at(i + 1).is_some_and(|d| d.is_ascii_digit()) => i += 1,
                    Some(',')
                        if (1..=3).all(|k| at(i + k).is_some_and(|d| d.is_ascii_digit()))
                            && !at(i + 4).is_some_and(|d| d.is_ascii_digit()) =>
                    {
                        i += 4
                    }
                    _ => break,
                }
            }
            let num_end = i;
            let mut j = i;
            while at(j).is_some_and(char::is_alphanumeric) {
                j += 1;
            }
            if j > num_end {
                let suffix: String = text[offset(num_end)..offset(j)].to_lowercase();
                if GLUED_MAGNITUDES.contains(&suffix.as_str()) {
                    push(offset(start), offset(num_end), TokenKind::Number);
                    push(offset(num_end), offset(j), TokenKind::Word);
                } else {
                    push(offset(start), offset(j), TokenKind::Word);
                }
                i = j;
            } else {
                push(offset(start), offset(num_end), TokenKind::Number);
            }
            continue;
        }
        if c.is_alphabetic() {
            i += 1;
            let mut dotted = false;
            let mut segment = start;
            loop {
                match at(i) {
                    Some(d) if d.is_alphanumeric() => i += 1,
                    Some(a) if is_apostrophe(a) => {
                        // possessive 's is its own token
                        let possessive = at(i + 1).is_some_and(|n| n == 's' || n == 'S')
                            && !at(i + 2).is_some_and(char::is_alphanumeric);
                        if !possessive && at(i + 1).is_some_and(char::is_alphabetic) {
                            i += 1;
                        } else {
                            break;
                        }
                    }
                    Some('-') | Some('&') if at(i + 1).is_some_and(char::is_alphanumeric) => i += 1,
                    Some('.') if i - segment <= 2 && at(i + 1).is_some_and(char::is_alphabetic) => {
                        dotted = true;
                        i += 1;
                        segment = i;
                    }
                    _ => break,
                }
            }
            if dotted && i - segment <= 2 && at(i) == Some('.') {
                i += 1;
            }
            push(offset(start), offset(i), TokenKind::Word);
            continue;
        }
        if is_apostrophe(c)
            && at(i + 1).is_some_and(|n| n == 's' || n == 'S')
            && !at(i + 2).is_some_and(char::is_alphanumeric)
        {
            i += 2;
            push(offset(start), offset(i), TokenKind::Word);
            continue;
        }
        i += 1;
        push(offset(start), offset(i), TokenKind::Symbol);
    }
    tokens
}

/// Index of the token containing byte offset `pos`, or the first token after it.
pub fn token_at(tokens: &[Token], pos: usize) -> usize {
    tokens.partition_point(|t| t.end <= pos)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(s: &str) -> Vec<String> {
        tokenize(s).into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn money_and_words() {
        assert_eq!(
            texts("Google bought YouTube for $1.65 billion."),
            vec!["Google", "bought", "YouTube", "for", "$", "1.65", "billion", "."]
        );
        assert_eq!(
            texts("€1,000,000 and US$5bn"),
            vec!["€", "1,000,000", "and", "US", "$", "5", "bn"]
        );
    }

    #[test]
    fn possessives_and_abbreviations() {
        assert_eq!(texts("Oracle's bid"), vec!["Oracle", "'s", "bid"]);
        assert_eq!(texts("the U.S. dollar"), vec!["the", "U.S.", "dollar"]);
        assert_eq!(texts("at 5 p.m. today"), vec!["at", "5", "p.m.", "today"]);
        assert_eq!(texts("AT&T and forty-five"), vec!["AT&T", "and", "forty-five"]);
        assert_eq!(texts("don't"), vec!["don't"]);
    }

    #[test]
    fn dates_and_commas() {
        assert_eq!(texts("6/7/2015"), vec!["6", "/", "7", "/", "2015"]);
        assert_eq!(texts("1,5 and 12,000"), vec!["1", ",", "5", "and", "12,000"]);
        assert_eq!(texts("Oct. 5, 2006"), vec!["Oct", ".", "5", ",", "2006"]);
    }

    #[test]
    fn offsets_round_trip() {
        let s = "Ünïcode €5 — Skype's 3Com deal.";
        for t in tokenize(s) {
            assert_eq!(&s[t.start..t.end], t.text);
        }
        assert_eq!(token_at(&tokenize("a bc d"), 2), 1);
    }
}
