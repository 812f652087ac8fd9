//! Instruction-trace parsing.

/// An ordered list of executed mnemonics plus a count of lines the parser
/// could not read. Parsing never fails: garbage lines are skipped and tallied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionTrace {
    pub mnemonics: Vec<String>,
    pub skipped_lines: usize,
}

impl InstructionTrace {
    pub fn len(&self) -> usize {
        self.mnemonics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mnemonics.is_empty()
    }
}

fn valid_mnemonic(token: &str) -> bool {
    let mut chars = token.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '.' || c == '_')
}

/// Parse one trace: the first whitespace-delimited token of each line is the
/// mnemonic (lowercased); operands after it are ignored. Blank lines and
/// `#` comments are dropped silently, anything whose first token does not
/// look like a mnemonic is skipped and counted.
pub fn parse_trace(text: &str) -> InstructionTrace {
    let mut mnemonics = Vec::new();
    let mut skipped_lines = 0;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let token = line.split_whitespace().next().unwrap_or("").to_ascii_lowercase();
        if valid_mnemonic(&token) {
            mnemonics.push(token);
        } else {
            skipped_lines += 1;
        }
    }
    InstructionTrace { mnemonics, skipped_lines }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_token_wins_and_case_folds() {
        let trace = parse_trace("MOV eax, 1\n  push rbp\nXOR eax, eax\n");
        assert_eq!(trace.mnemonics, vec!["mov", "push", "xor"]);
        assert_eq!(trace.skipped_lines, 0);
    }

    #[test]
    fn comments_and_blanks_are_silent() {
        let trace = parse_trace("# header\n\nmov eax, 1\n\n# trailer\n");
        assert_eq!(trace.mnemonics, vec!["mov"]);
        assert_eq!(trace.skipped_lines, 0);
    }

    #[test]
    fn garbage_lines_are_skipped_and_counted() {
        let trace = parse_trace("0x401000: mov eax, 1\nmov ebx, 2\n???\n");
        assert_eq!(trace.mnemonics, vec!["mov"]);
        assert_eq!(trace.skipped_lines, 2);
    }

    #[test]
    fn empty_input_is_an_empty_trace() {
        let trace = parse_trace("");
        assert!(trace.is_empty());
        assert_eq!(trace.skipped_lines, 0);
    }
}
