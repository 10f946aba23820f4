use std::fmt;
use std::ops::Index;

use super::RAW_ARITY;

pub const SEPARATOR: char = '#';

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("expected {expected} columns, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("malformed escape in column {column} at byte {offset}")]
    MalformedEscape { column: usize, offset: usize },
}

/// One decoded dataset row. Values are stored back to back in one buffer.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParsedLine {
    buf: Box<str>,
    ends: Box<[u32]>,
}

impl ParsedLine {
    pub fn from_values<S: AsRef<str>>(values: impl IntoIterator<Item = S>) -> Self {
        let mut buf = String::new();
        let mut ends = Vec::new();
        for v in values {
            buf.push_str(v.as_ref());
            ends.push(buf.len() as u32);
        }
        ParsedLine {
            buf: buf.into_boxed_str(),
            ends: ends.into_boxed_slice(),
        }
    }

    pub fn len(&self) -> usize {
        self.ends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ends.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&str> {
        let end = *self.ends.get(i)? as usize;
        let start = if i == 0 { 0 } else { self.ends[i - 1] as usize };
        Some(&self.buf[start..end])
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        (0..self.len()).map(|i| &self[i])
    }

    pub fn to_vec(&self) -> Vec<String> {
        self.iter().map(str::to_string).collect()
    }
}

impl Index<usize> for ParsedLine {
    type Output = str;

    fn index(&self, i: usize) -> &str {
        match self.get(i) {
            Some(v) => v,
            None => panic!("column {i} out of range for a row of {} values", self.len()),
        }
    }
}

impl fmt::Debug for ParsedLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

fn escape_into(out: &mut String, value: &str) {
    for c in value.chars() {
        match c {
            '%' => out.push_str("%25"),
            '#' => out.push_str("%23"),
            '\n' => out.push_str("%0A"),
            '\r' => out.push_str("%0D"),
            c => out.push(c),
        }
    }
}

/// Escapes and joins any number of values, with a trailing newline.
pub fn encode_fields<S: AsRef<str>>(values: &[S]) -> String {
    let mut out = String::with_capacity(values.iter().map(|v| v.as_ref().len() + 1).sum());
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(SEPARATOR);
        }
        escape_into(&mut out, v.as_ref());
    }
    out.push('\n');
    out
}

/// Encodes one raw dataset row; exactly 13 values are required.
pub fn encode_row<S: AsRef<str>>(values: &[S]) -> Result<String, CodecError> {
    if values.len() != RAW_ARITY {
        return Err(CodecError::Arity {
            expected: RAW_ARITY,
            found: values.len(),
        });
    }
    Ok(encode_fields(values))
}

pub fn decode_row(line: &str) -> Result<ParsedLine, CodecError> {
    decode_fields(line, RAW_ARITY)
}

/// Splits `line` (without its newline) on '#' and unescapes every value.
/// Only `%25`, `%23`, `%0A` and `%0D` are valid escapes; any other '%' is
/// an error.
pub fn decode_fields(line: &str, arity: usize) -> Result<ParsedLine, CodecError> {
    let found = line.split(SEPARATOR).count();
    if found != arity {
        return Err(CodecError::Arity { expected: arity, found });
    }
    let mut buf = String::with_capacity(line.len());
    let mut ends = Vec::with_capacity(arity);
    let mut offset = 0;
    for (column, value) in line.split(SEPARATOR).enumerate() {
        if value.contains('%') {
            unescape_into(&mut buf, value).map_err(|at| CodecError::MalformedEscape {
                column,
                offset: offset + at,
            })?;
        } else {
            buf.push_str(value);
        }
        ends.push(buf.len() as u32);
        offset += value.len() + 1;
    }
    Ok(ParsedLine {
        buf: buf.into_boxed_str(),
        ends: ends.into_boxed_slice(),
    })
}

fn unescape_into(out: &mut String, value: &str) -> Result<(), usize> {
    let bytes = value.as_bytes();
    let mut last = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'%' {
            i += 1;
            continue;
        }
        let c = match bytes.get(i + 1..i + 3) {
            Some(b"25") => '%',
            Some(b"23") => '#',
            Some(b"0A") => '\n',
            Some(b"0D") => '\r',
            _ => return Err(i),
        };
        out.push_str(&value[last..i]);
        out.push(c);
        i += 3;
        last = i;
    }
    out.push_str(&value[last..]);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn letters() -> Vec<String> {
        (b'a'..=b'm').map(|c| (c as char).to_string()).collect()
    }

    #[test]
    fn plain_row_encodes_verbatim() {
        assert_eq!(encode_row(&letters()).unwrap(), "a#b#c#d#e#f#g#h#i#j#k#l#m\n");
        let row = decode_row("a#b#c#d#e#f#g#h#i#j#k#l#m").unwrap();
        assert_eq!(row.to_vec(), letters());
    }

    #[test]
    fn special_characters_are_escaped() {
        let mut v = letters();
        v[0] = "A#B".into();
        v[1] = "50%\r\n".into();
        let line = encode_row(&v).unwrap();
        assert!(line.starts_with("A%23B#50%25%0D%0A#c"));
        let decoded = decode_row(line.trim_end_matches('\n')).unwrap();
        assert_eq!(&decoded[0], "A#B");
        assert_eq!(decoded.to_vec(), v);
    }

    #[test]
    fn arity_is_enforced() {
        assert_eq!(
            encode_row(&["x"; 12]).unwrap_err(),
            CodecError::Arity {
                expected: 13,
                found: 12
            }
        );
        assert_eq!(
            decode_row("a#b#c#d#e#f#g#h#i#j#k#l").unwrap_err(),
            CodecError::Arity {
                expected: 13,
                found: 12
            }
        );
    }

    #[test]
    fn bad_escapes_are_rejected() {
        for bad in ["%", "%2", "%41", "a%zz", "100%", "%0a"] {
            let line = format!("{bad}#b#c#d#e#f#g#h#i#j#k#l#m");
            assert!(
                matches!(decode_row(&line), Err(CodecError::MalformedEscape { column: 0, .. })),
                "{bad}"
            );
        }
        let err = decode_row("a#b%x#c#d#e#f#g#h#i#j#k#l#m").unwrap_err();
        assert_eq!(err, CodecError::MalformedEscape { column: 1, offset: 3 });
    }

    #[test]
    fn legacy_unescaped_text_decodes_unchanged() {
        let row =
            decode_row("p#c1#c0#Ann Lee#a@x.org#1700000000#src/A.java#false#STATEMENT_INSERT#STATEMENT#x = 1;#A.m()#")
                .unwrap();
        assert_eq!(&row[3], "Ann Lee");
        assert_eq!(&row[12], "");
    }

    #[test]
    fn ten_thousand_random_rows_round_trip() {
        let alphabet = ['#', '%', '\n', '\r', 'a', 'Z', '0', ' ', 'é', '2', '3', 'A', 'D'];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let row: Vec<String> = (0..13)
                .map(|_| {
                    let n = rng.gen_range(0..12);
                    (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
                })
                .collect();
            let line = encode_row(&row).unwrap();
            assert_eq!(line.matches('\n').count(), 1);
            assert!(line.ends_with('\n'));
            let back = decode_row(&line[..line.len() - 1]).unwrap();
            assert_eq!(back.to_vec(), row);
        }
    }

    proptest! {
        #[test]
        fn any_values_round_trip(values in proptest::collection::vec(".*", 13)) {
            let line = encode_row(&values).unwrap();
            let back = decode_row(line.strip_suffix('\n').unwrap()).unwrap();
            prop_assert_eq!(back.to_vec(), values);
        }

        #[test]
        fn compact_row_matches_values(values in proptest::collection::vec("[a-z%#]{0,6}", 0..20)) {
            let row = ParsedLine::from_values(&values);
            prop_assert_eq!(row.len(), values.len());
            prop_assert_eq!(row.to_vec(), values);
        }
    }
}
