//! Aligned corpus files: `word<TAB>graphemes<TAB>system<TAB>gold`, each
//! sequence written as `|`-separated cells. An empty cell is `_`; a literal
//! `|`, `_` or `\` inside a cell is escaped with `\`.

use super::{AlignError, AlignedEntry};

fn escape_cell(cell: &str) -> String {
    if cell.is_empty() {
        return "_".into();
    }
    let mut out = String::with_capacity(cell.len());
    for c in cell.chars() {
        if matches!(c, '|' | '_' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

fn join(cells: &[String]) -> String {
    cells.iter().map(|c| escape_cell(c)).collect::<Vec<_>>().join("|")
}

fn split(field: &str, line: usize) -> Result<Vec<String>, AlignError> {
    let err = |message: &str| AlignError::Parse {
        line,
        message: message.to_string(),
    };
    let mut cells = Vec::new();
    let mut cur = String::new();
    // distinguishes an escaped `_` from the empty-cell marker
    let mut escaped_any = false;
    let mut chars = field.chars();
    let finish = |cur: &mut String, escaped: bool, cells: &mut Vec<String>| -> Result<(), AlignError> {
        let cell = std::mem::take(cur);
        if !escaped && cell == "_" {
            cells.push(String::new());
        } else if cell.is_empty() {
            return Err(err("empty cell must be written `_`"));
        } else {
            cells.push(cell);
        }
        Ok(())
    };
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                let next = chars.next().ok_or_else(|| err("dangling `\\`"))?;
                cur.push(next);
                escaped_any = true;
            }
            '|' => {
                finish(&mut cur, escaped_any, &mut cells)?;
                escaped_any = false;
            }
            _ => cur.push(c),
        }
    }
    finish(&mut cur, escaped_any, &mut cells)?;
    Ok(cells)
}

pub fn format_aligned(entries: &[AlignedEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            e.word,
            join(&e.graphemes),
            join(&e.system),
            join(&e.gold)
        ));
    }
    out
}

/// Parses an aligned corpus; blank lines and lines starting with `#` are
/// skipped.
pub fn parse_aligned(text: &str) -> Result<Vec<AlignedEntry>, AlignError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 4 {
            return Err(AlignError::Parse {
                line,
                message: format!("expected 4 tab-separated fields, found {}", fields.len()),
            });
        }
        let entry = AlignedEntry {
            word: fields[0].to_string(),
            graphemes: split(fields[1], line)?,
            system: split(fields[2], line)?,
            gold: split(fields[3], line)?,
        };
        if entry.graphemes.len() != entry.system.len() || entry.graphemes.len() != entry.gold.len() {
            return Err(AlignError::Parse {
                line,
                message: "grapheme, system and gold cell counts differ".into(),
            });
        }
        out.push(entry);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn round_trip_with_escapes() {
        let e = AlignedEntry {
            word: "aalbessen".into(),
            graphemes: v(&["aa", "l", "b", "e", "ss", "e", "n"]),
            system: v(&["a", "l", "b", "@", "s", "@", ""]),
            gold: v(&["a", "l", "b", "E", "s", "_", "|\\"]),
        };
        let text = format_aligned(std::slice::from_ref(&e));
        assert_eq!(
            text,
            "aalbessen\taa|l|b|e|ss|e|n\ta|l|b|@|s|@|_\ta|l|b|E|s|\\_|\\|\\\\\n"
        );
        assert_eq!(parse_aligned(&text).unwrap(), vec![e]);
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(matches!(parse_aligned("a\tb"), Err(AlignError::Parse { line: 1, .. })));
        assert!(matches!(
            parse_aligned("# c\nab\ta|b\tx\ty|z"),
            Err(AlignError::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_aligned("a\ta\t\t_"), Err(AlignError::Parse { .. })));
    }
}
