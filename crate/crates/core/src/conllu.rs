//! Reader for dependency parses in CoNLL-U format.
//!
//! Only the columns the answer-type rules need are kept: FORM, the
//! part-of-speech tag (XPOS when present since it carries Penn Treebank
//! tags, UPOS otherwise), HEAD and DEPREL. Multiword-token ranges (`3-4`)
//! and empty nodes (`5.1`) are skipped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseToken {
    /// 1-based position in the sentence.
    pub index: usize,
    pub surface: String,
    pub pos: String,
    /// Index of the governing token, 0 for the root.
    pub head: usize,
    pub deprel: String,
}

impl ParseToken {
    pub fn is_noun(&self) -> bool {
        self.pos.starts_with("NN")
    }

    pub fn is_adjective(&self) -> bool {
        self.pos.starts_with("JJ")
    }

    pub fn is_subject(&self) -> bool {
        matches!(self.deprel.as_str(), "nsubj" | "nsubjpass")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedQuestion {
    /// Value of the `# sent_id` comment, if the block had one.
    pub sent_id: Option<String>,
    pub source_text: String,
    pub tokens: Vec<ParseToken>,
}

impl ParsedQuestion {
    /// Builds a question from tokens, checking that indices run 1..=n and
    /// every head points at the root or an existing token.
    pub fn new(source_text: impl Into<String>, tokens: Vec<ParseToken>) -> Result<Self> {
        let q = ParsedQuestion {
            sent_id: None,
            source_text: source_text.into(),
            tokens,
        };
        q.check().map_err(Error::contract)?;
        Ok(q)
    }

    /// Token at a 1-based index.
    pub fn token(&self, index: usize) -> Option<&ParseToken> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    fn check(&self) -> std::result::Result<(), String> {
        let n = self.tokens.len();
        for (i, t) in self.tokens.iter().enumerate() {
            if t.index != i + 1 {
                return Err(format!(
                    "token {:?} has index {}, expected {}",
                    t.surface,
                    t.index,
                    i + 1
                ));
            }
            if t.head > n {
                return Err(format!(
                    "token {} has head {} outside 0..={n}",
                    t.index, t.head
                ));
            }
            if t.surface.is_empty() || t.pos.is_empty() {
                return Err(format!("token {} has an empty form or tag", t.index));
            }
        }
        if n > 0 && self.source_text.is_empty() {
            return Err("empty source text".into());
        }
        Ok(())
    }
}

/// Parses every sentence block of a CoNLL-U document.
pub fn parse_conllu(document: &str) -> Result<Vec<ParsedQuestion>> {
    let mut out = Vec::new();
    let mut block = Block::default();

    for (i, raw) in document.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if let Some(q) = block.finish()? {
                out.push(q);
            }
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            block.comment(comment);
            continue;
        }
        block.token_line(line, line_no)?;
    }
    if let Some(q) = block.finish()? {
        out.push(q);
    }
    Ok(out)
}

#[derive(Default)]
struct Block {
    sent_id: Option<String>,
    text: Option<String>,
    tokens: Vec<ParseToken>,
    first_line: usize,
}

impl Block {
    fn comment(&mut self, comment: &str) {
        if let Some((key, value)) = comment.split_once('=') {
            match key.trim() {
                "sent_id" => self.sent_id = Some(value.trim().to_string()),
                "text" => self.text = Some(value.trim().to_string()),
                _ => {}
            }
        }
    }

    fn token_line(&mut self, line: &str, line_no: usize) -> Result<()> {
        let err = |message: String| Error::Conllu {
            line: line_no,
            message,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(err(format!("expected 10 tab-separated columns, found {}", cols.len())));
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            return Ok(());
        }
        let index: usize = id
            .parse()
            .map_err(|_| err(format!("token index {id:?} is not a number")))?;
        let head: usize = cols[6]
            .parse()
            .map_err(|_| err(format!("head {:?} is not a number", cols[6])))?;
        let pos = if cols[4] != "_" { cols[4] } else { cols[3] };
        if self.tokens.is_empty() {
            self.first_line = line_no;
        }
        self.tokens.push(ParseToken {
            index,
            surface: cols[1].to_string(),
            pos: pos.to_string(),
            head,
            deprel: cols[7].to_string(),
        });
        Ok(())
    }

    fn finish(&mut self) -> Result<Option<ParsedQuestion>> {
        let block = std::mem::take(self);
        if block.tokens.is_empty() {
            return Ok(None);
        }
        let source_text = block.text.unwrap_or_else(|| {
            block
                .tokens
                .iter()
                .map(|t| t.surface.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        });
        let q = ParsedQuestion {
            sent_id: block.sent_id,
            source_text,
            tokens: block.tokens,
        };
        q.check().map_err(|message| Error::Conllu {
            line: block.first_line,
            message,
        })?;
        Ok(Some(q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "# sent_id = q1\n\
# text = Who discovered penicillin?\n\
1\tWho\twho\tPRON\tWP\t_\t2\tnsubj\t_\t_\n\
2\tdiscovered\tdiscover\tVERB\tVBD\t_\t0\troot\t_\t_\n\
3\tpenicillin\tpenicillin\tNOUN\tNN\t_\t2\tdobj\t_\t_\n\
4\t?\t?\tPUNCT\t.\t_\t2\tpunct\t_\t_\n\
\n\
1\tName\tname\tVERB\tVB\t_\t0\troot\t_\t_\n\
2\tthe\tthe\tDET\tDT\t_\t3\tdet\t_\t_\n\
3\tgene\tgene\tNOUN\tNN\t_\t1\tdobj\t_\t_\n\
4\t.\t.\tPUNCT\t.\t_\t1\tpunct\t_\t_\n";

    #[test]
    fn two_blocks() {
        let qs = parse_conllu(TWO).unwrap();
        assert_eq!(qs.len(), 2);
        assert_eq!(qs[0].sent_id.as_deref(), Some("q1"));
        assert_eq!(qs[0].source_text, "Who discovered penicillin?");
        assert_eq!(qs[1].source_text, "Name the gene .");
        assert_eq!(qs[1].tokens[2].pos, "NN");
    }

    #[test]
    fn empty_document() {
        assert!(parse_conllu("").unwrap().is_empty());
        assert!(parse_conllu("\n\n# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn nine_columns_names_the_line() {
        let doc = "1\tWho\twho\tPRON\tWP\t_\t2\tnsubj\t_\t_\n2\tdied\tdie\tVERB\tVBD\t_\t0\troot\t_\n";
        match parse_conllu(doc) {
            Err(Error::Conllu { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("found 9"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_head() {
        let doc = "1\tWho\twho\tPRON\tWP\t_\tx\tnsubj\t_\t_\n";
        assert!(matches!(parse_conllu(doc), Err(Error::Conllu { line: 1, .. })));
    }

    #[test]
    fn upos_used_when_xpos_missing() {
        let doc = "1\tWhy\twhy\tWRB\t_\t_\t0\troot\t_\t_\n";
        let qs = parse_conllu(doc).unwrap();
        assert_eq!(qs[0].tokens[0].pos, "WRB");
    }

    #[test]
    fn multiword_ranges_skipped() {
        let doc = "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n\
1\tdo\tdo\tAUX\tVBP\t_\t0\troot\t_\t_\n\
2\tn't\tnot\tPART\tRB\t_\t1\tneg\t_\t_\n";
        let qs = parse_conllu(doc).unwrap();
        assert_eq!(qs[0].tokens.len(), 2);
    }

    #[test]
    fn gap_in_indices_rejected() {
        let doc = "1\tWho\twho\tPRON\tWP\t_\t0\troot\t_\t_\n3\tdied\tdie\tVERB\tVBD\t_\t1\tdep\t_\t_\n";
        assert!(parse_conllu(doc).is_err());
    }

    #[test]
    fn head_out_of_range_rejected() {
        let doc = "1\tWho\twho\tPRON\tWP\t_\t7\troot\t_\t_\n";
        assert!(parse_conllu(doc).is_err());
    }
}
