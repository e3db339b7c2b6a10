//! Lexicon files: `word<TAB>phonemes` per line, one symbol per phoneme.
//! Blank lines and lines starting with `#` are skipped.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct LexiconError {
    pub line: usize,
    pub message: String,
}

pub type Lexicon = Vec<(String, String)>;

pub fn parse_lexicon(text: &str) -> Result<Lexicon, LexiconError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut fields = raw.split('\t');
        let (Some(word), Some(phonemes), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(LexiconError {
                line,
                message: "expected `word<TAB>phonemes`".into(),
            });
        };
        if word.is_empty() {
            return Err(LexiconError {
                line,
                message: "empty word".into(),
            });
        }
        out.push((word.to_string(), phonemes.to_string()));
    }
    Ok(out)
}

pub fn format_lexicon(entries: &[(String, String)]) -> String {
    entries.iter().map(|(w, p)| format!("{w}\t{p}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_formats() {
        let lex = parse_lexicon("# comment\naalbessen\talbEs@\n\nt\tt\n").unwrap();
        assert_eq!(
            lex,
            vec![("aalbessen".into(), "albEs@".into()), ("t".into(), "t".into())]
        );
        assert_eq!(format_lexicon(&lex), "aalbessen\talbEs@\nt\tt\n");
    }

    #[test]
    fn reports_line_numbers() {
        assert_eq!(parse_lexicon("a\tb\nc").unwrap_err().line, 2);
        assert_eq!(parse_lexicon("a\tb\tc").unwrap_err().line, 1);
    }
}
