use std::ops::Range;

/// One-to-one case folding, so folded text keeps the original char offsets.
/// Characters whose lowercase form expands to several chars are left as is.
pub fn fold_char(c: char) -> char {
    if c == 'ς' {
        return 'σ';
    }
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

pub fn fold_str(s: &str) -> String {
    s.chars().map(fold_char).collect()
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Non-overlapping occurrences of `pat` in `hay` lying inside `window`.
/// A pattern edge that is a word character must sit on a word boundary.
pub(super) fn keyword_spans(hay: &[char], pat: &[char], window: Range<usize>) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let n = pat.len();
    if n == 0 || window.len() < n {
        return out;
    }
    let check_left = is_word(pat[0]);
    let check_right = is_word(pat[n - 1]);
    let mut i = window.start;
    while i + n <= window.end {
        let hit = &hay[i..i + n] == pat
            && !(check_left && i > 0 && is_word(hay[i - 1]))
            && !(check_right && i + n < hay.len() && is_word(hay[i + n]));
        if hit {
            out.push(i..i + n);
            i += n;
        } else {
            i += 1;
        }
    }
    out
}
