//! Character classes and text joining shared by normalization, tokenization
//! and chunk assembly.

/// CJK ideographs plus CJK punctuation and full-width forms.
///
/// These are the characters that are written without inter-word spacing.
pub fn is_cjk(c: char) -> bool {
    is_han(c)
        || matches!(c as u32,
            0x3000..=0x303F   // CJK symbols and punctuation
            | 0xFF00..=0xFFEF // half/full-width forms
        )
}

/// CJK unified ideographs (basic block, extensions, compatibility).
pub fn is_han(c: char) -> bool {
    matches!(c as u32,
        0x4E00..=0x9FFF
        | 0x3400..=0x4DBF
        | 0x20000..=0x2A6DF
        | 0x2A700..=0x2EBEF
        | 0x30000..=0x3134F
        | 0xF900..=0xFAFF
        | 0x2F800..=0x2FA1F
    )
}

/// Sentence-final punctuation, Chinese and Latin.
pub fn is_terminal(c: char) -> bool {
    matches!(c, '。' | '？' | '！' | '.' | '?' | '!')
}

/// Append `piece` to `out`, inserting a single space unless both sides of
/// the seam are CJK.
pub fn push_joined(out: &mut String, piece: &str) {
    if piece.is_empty() {
        return;
    }
    if let (Some(prev), Some(next)) = (out.chars().last(), piece.chars().next()) {
        if !(is_cjk(prev) && is_cjk(next)) {
            out.push(' ');
        }
    }
    out.push_str(piece);
}

/// Join pieces with [`push_joined`] seams.
pub fn join<'a, I: IntoIterator<Item = &'a str>>(pieces: I) -> String {
    let mut out = String::new();
    for p in pieces {
        push_joined(&mut out, p);
    }
    out
}
