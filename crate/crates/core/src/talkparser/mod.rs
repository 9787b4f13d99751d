//! Talk-page wikitext to comment events.
//!
//! Comments are recovered from indentation (`:`, `*`, `#` prefixes, all
//! counted alike) and from signatures. Section headings close the current
//! thread context. A comment at indentation 0 following deeper ones starts a
//! new thread.

mod signature;

pub use signature::{
    extract_signature, extract_signature_with, PatternError, PatternRegistry, SignatureMatch,
};

use std::fmt;

use crate::ingest::CommentEvent;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTalkPage {
    pub article: String,
    pub text: String,
}

impl RawTalkPage {
    pub fn new(article: impl Into<String>, text: impl Into<String>) -> Self {
        RawTalkPage {
            article: article.into(),
            text: text.into(),
        }
    }
}

/// A candidate comment: consecutive lines at one indentation depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommentBlock {
    pub depth: u32,
    pub body: String,
    /// Number of headings seen before this block.
    pub section: u32,
    /// 1-based line of the block's first line.
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TalkDiagnostic {
    /// Indentation jumped past the expected parent level.
    OrphanDepth {
        line: usize,
        indent: u32,
        attached_to: Option<String>,
    },
    /// Unsigned text with no later signed comment in its section.
    DroppedUnsigned { line: usize },
}

impl fmt::Display for TalkDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TalkDiagnostic::OrphanDepth {
                line,
                indent,
                attached_to: Some(p),
            } => write!(f, "line {line}: indentation {indent} has no parent one level up; attached to {p}"),
            TalkDiagnostic::OrphanDepth { line, indent, attached_to: None } => {
                write!(f, "line {line}: indentation {indent} has no shallower comment; treated as thread start")
            }
            TalkDiagnostic::DroppedUnsigned { line } => {
                write!(f, "line {line}: unsigned text dropped")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParsedPage {
    pub events: Vec<CommentEvent>,
    pub diagnostics: Vec<TalkDiagnostic>,
    /// Unsigned blocks folded into the next signed comment.
    pub merged_unsigned: usize,
}

fn heading(line: &str) -> bool {
    let t = line.trim();
    t.len() >= 3 && t.starts_with('=') && t.ends_with('=')
}

fn indentation(line: &str) -> (u32, &str) {
    let run = line
        .bytes()
        .take_while(|b| matches!(b, b':' | b'*' | b'#'))
        .count();
    (run as u32, line[run..].trim())
}

/// Talk-page parser with a configurable set of date patterns.
#[derive(Clone, Debug, Default)]
pub struct TalkParser {
    patterns: PatternRegistry,
}

impl TalkParser {
    pub fn new(patterns: PatternRegistry) -> Self {
        TalkParser { patterns }
    }

    pub fn patterns(&self) -> &PatternRegistry {
        &self.patterns
    }

    pub fn signature(&self, body: &str) -> Option<SignatureMatch> {
        extract_signature_with(body, &self.patterns)
    }

    /// Splits wikitext into indentation blocks in page order.
    ///
    /// A block ends when the indentation depth changes, at a heading, or
    /// after a line carrying a signature, so that consecutive signed
    /// comments at the same depth stay separate. Blank lines are skipped.
    pub fn split_comments(&self, page: &RawTalkPage) -> Vec<CommentBlock> {
        let mut blocks: Vec<CommentBlock> = Vec::new();
        let mut open = false;
        let mut section = 0u32;
        for (idx, line) in page.text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            if heading(line) {
                section += 1;
                open = false;
                continue;
            }
            let (depth, content) = indentation(line);
            match blocks.last_mut() {
                Some(b) if open && b.depth == depth => {
                    b.body.push('\n');
                    b.body.push_str(content);
                }
                _ => blocks.push(CommentBlock {
                    depth,
                    body: content.to_string(),
                    section,
                    line: idx + 1,
                }),
            }
            open = self.signature(content).is_none();
        }
        blocks
    }

    /// Parses a page into comment events with parent links.
    pub fn parse(&self, page: &RawTalkPage) -> ParsedPage {
        let mut out = ParsedPage::default();
        // (indent, tree depth, id) of the open ancestors in the current section
        let mut stack: Vec<(u32, u32, String)> = Vec::new();
        let mut pending: Vec<CommentBlock> = Vec::new();
        let mut section = 0u32;

        for block in self.split_comments(page) {
            if block.section != section {
                for p in pending.drain(..) {
                    out.diagnostics.push(TalkDiagnostic::DroppedUnsigned { line: p.line });
                }
                stack.clear();
                section = block.section;
            }
            let Some(sig) = self.signature(&block.body) else {
                pending.push(block);
                continue;
            };
            let line = pending.first().map_or(block.line, |p| p.line);
            out.merged_unsigned += pending.len();
            pending.clear();

            let indent = block.depth;
            while stack.last().is_some_and(|(i, _, _)| *i >= indent) {
                stack.pop();
            }
            let (parent, depth) = match stack.last() {
                Some((i, d, id)) => {
                    if *i + 1 != indent {
                        out.diagnostics.push(TalkDiagnostic::OrphanDepth {
                            line,
                            indent,
                            attached_to: Some(id.clone()),
                        });
                    }
                    (Some(id.clone()), d + 1)
                }
                None => {
                    if indent > 0 {
                        out.diagnostics.push(TalkDiagnostic::OrphanDepth {
                            line,
                            indent,
                            attached_to: None,
                        });
                    }
                    (None, 0)
                }
            };
            let ord = out.events.len() as u64;
            let id = format!("c{ord}");
            stack.push((indent, depth, id.clone()));
            out.events.push(CommentEvent {
                article: page.article.clone(),
                id,
                parent,
                depth,
                timestamp: sig.timestamp,
                author: sig.author,
                doc_order: ord,
            });
        }
        for p in pending {
            out.diagnostics.push(TalkDiagnostic::DroppedUnsigned { line: p.line });
        }
        out
    }
}

/// [`TalkParser::split_comments`] with the standard patterns, as `(depth, body)`.
pub fn split_comments(page: &RawTalkPage) -> Vec<(u32, String)> {
    TalkParser::default()
        .split_comments(page)
        .into_iter()
        .map(|b| (b.depth, b.body))
        .collect()
}

/// Comment events of a page using the standard patterns.
pub fn to_events(page: &RawTalkPage) -> Vec<CommentEvent> {
    TalkParser::default().parse(page).events
}
