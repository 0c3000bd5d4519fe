//! Text format for modules.
//!
//! ```text
//! # alpha and beta, linked through b
//! ebm alpha { hyp a; pole b c; }
//! ebm beta { hyp b; pole d; pole e f; }
//! module ab = alpha . beta;
//! #@ expect ab o holds
//! ```
//!
//! A `module` line composes its EBMs left to right, linking every shared
//! label. `#` starts a comment; `#@ expect NAME MODE holds|fails` records the
//! expected verdict of a check (`MODE` is `c`, `o`, `acyclic` or
//! `connectable`).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{is_identifier, Ebm, Label, ModelError, Module};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}: label `{label}` occurs twice in one EBM")]
    DuplicateLabel { line: usize, label: Label },
    #[error("{line}: label `{label}` would occur twice on the same side of `{module}`")]
    LabelClash {
        line: usize,
        module: String,
        label: Label,
    },
    #[error("{line}: unknown name `{name}`")]
    UnknownName { line: usize, name: String },
    #[error("{line}: `{name}` is a module; composition chains take EBMs")]
    NotElementary { line: usize, name: String },
    #[error("{line}: `{name}` is already defined")]
    DuplicateName { line: usize, name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckMode {
    C,
    O,
    Acyclic,
    Connectable,
}

impl FromStr for CheckMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "c" => Ok(CheckMode::C),
            "o" => Ok(CheckMode::O),
            "acyclic" => Ok(CheckMode::Acyclic),
            "connectable" => Ok(CheckMode::Connectable),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

impl fmt::Display for CheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckMode::C => "c",
            CheckMode::O => "o",
            CheckMode::Acyclic => "acyclic",
            CheckMode::Connectable => "connectable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub name: String,
    pub mode: CheckMode,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Ebm {
        name: String,
        ebm: Ebm,
    },
    Module {
        name: String,
        chain: Vec<String>,
        module: Module,
    },
    Expect(Expectation),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceFile {
    pub items: Vec<Item>,
}

impl SourceFile {
    pub fn ebm(&self, name: &str) -> Option<&Ebm> {
        self.items.iter().find_map(|i| match i {
            Item::Ebm { name: n, ebm } if n == name => Some(ebm),
            _ => None,
        })
    }

    /// The module declared as `name`, or the EBM of that name as a module.
    pub fn module(&self, name: &str) -> Option<Module> {
        self.items.iter().find_map(|i| match i {
            Item::Module {
                name: n, module, ..
            } if n == name => Some(module.clone()),
            Item::Ebm { name: n, ebm } if n == name => Some(Module::from(ebm)),
            _ => None,
        })
    }

    /// The last declared module, or failing that the last EBM.
    pub fn default_module(&self) -> Option<(String, Module)> {
        let last_module = self.items.iter().rev().find_map(|i| match i {
            Item::Module { name, module, .. } => Some((name.clone(), module.clone())),
            _ => None,
        });
        last_module.or_else(|| {
            self.items.iter().rev().find_map(|i| match i {
                Item::Ebm { name, ebm } => Some((name.clone(), Module::from(ebm))),
                _ => None,
            })
        })
    }

    pub fn ebms(&self) -> impl Iterator<Item = (&str, &Ebm)> {
        self.items.iter().filter_map(|i| match i {
            Item::Ebm { name, ebm } => Some((name.as_str(), ebm)),
            _ => None,
        })
    }

    pub fn expectations(&self) -> impl Iterator<Item = &Expectation> {
        self.items.iter().filter_map(|i| match i {
            Item::Expect(e) => Some(e),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    Semi,
    Eq,
    Dot,
    Annotation(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, DslError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let chars: Vec<char> = raw.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let simple = match c {
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                ';' => Some(Tok::Semi),
                '=' => Some(Tok::Eq),
                '.' => Some(Tok::Dot),
                _ => None,
            };
            if let Some(tok) = simple {
                out.push(Token { tok, line, col });
                i += 1;
            } else if c.is_whitespace() {
                i += 1;
            } else if c == '#' {
                if chars.get(i + 1) == Some(&'@') {
                    let body: String = chars[i + 2..].iter().collect();
                    out.push(Token {
                        tok: Tok::Annotation(body.trim().to_owned()),
                        line,
                        col,
                    });
                }
                break;
            } else if c.is_ascii_alphabetic() {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line,
                    col,
                });
            } else {
                return Err(DslError::Syntax {
                    line,
                    col,
                    message: format!("unexpected character {c:?}"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |t| (t.line, t.col))
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, DslError> {
        let (line, col) = self.here();
        Err(DslError::Syntax {
            line,
            col,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), DslError> {
        match self.peek() {
            Some(t) if t.tok == want => {
                self.pos += 1;
                Ok(())
            }
            _ => self.error(format!("expected {what}")),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, DslError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s), ..
            }) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error(format!("expected {what}")),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), DslError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s), ..
            }) if s == word => {
                self.pos += 1;
                Ok(())
            }
            _ => self.error(format!("expected `{word}`")),
        }
    }

    /// Identifiers up to the next `;`, which is consumed.
    fn labels(&mut self) -> Result<Vec<Label>, DslError> {
        let mut out = Vec::new();
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Semi) => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(Tok::Ident(s)) => {
                    out.push(Label::new(s).expect("lexer only yields identifiers"));
                    self.pos += 1;
                }
                _ => return self.error("expected a label or `;`"),
            }
        }
    }

    fn at_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s == word)
    }
}

pub fn parse(text: &str) -> Result<SourceFile, DslError> {
    let tokens = lex(text)?;
    // Just past the last character.
    let end = (
        text.lines().count().max(1),
        text.lines().last().map_or(0, |l| l.chars().count()) + 1,
    );
    let mut p = Parser {
        tokens,
        pos: 0,
        end,
    };
    let mut file = SourceFile::default();
    let mut kinds: BTreeMap<String, bool> = BTreeMap::new();
    while let Some(token) = p.peek().cloned() {
        let line = token.line;
        match &token.tok {
            Tok::Annotation(body) => {
                p.pos += 1;
                file.items
                    .push(Item::Expect(parse_expectation(body, line, token.col)?));
            }
            Tok::Ident(word) if word == "ebm" => {
                p.pos += 1;
                let name = p.ident("an EBM name")?;
                p.expect(Tok::LBrace, "`{`")?;
                p.keyword("hyp")?;
                let hypotheses = p.labels()?;
                let mut poles = Vec::new();
                while p.at_ident("pole") {
                    p.pos += 1;
                    poles.push(p.labels()?);
                }
                if poles.is_empty() {
                    return p.error("expected `pole`");
                }
                p.expect(Tok::RBrace, "`}`")?;
                let ebm = Ebm::new(hypotheses, poles).map_err(|e| match e {
                    ModelError::DuplicateLabel(label) => DslError::DuplicateLabel { line, label },
                    other => unreachable!("EBM construction only reports duplicates here: {other}"),
                })?;
                if kinds.insert(name.clone(), true).is_some() {
                    return Err(DslError::DuplicateName { line, name });
                }
                file.items.push(Item::Ebm { name, ebm });
            }
            Tok::Ident(word) if word == "module" => {
                p.pos += 1;
                let name = p.ident("a module name")?;
                p.expect(Tok::Eq, "`=`")?;
                let mut chain = vec![p.ident("an EBM name")?];
                while matches!(p.peek().map(|t| &t.tok), Some(Tok::Dot)) {
                    p.pos += 1;
                    chain.push(p.ident("an EBM name")?);
                }
                p.expect(Tok::Semi, "`;`")?;
                let mut ebms = Vec::new();
                for part in &chain {
                    match kinds.get(part) {
                        Some(true) => ebms.push(file.ebm(part).expect("known EBM")),
                        Some(false) => {
                            return Err(DslError::NotElementary {
                                line,
                                name: part.clone(),
                            })
                        }
                        None => {
                            return Err(DslError::UnknownName {
                                line,
                                name: part.clone(),
                            })
                        }
                    }
                }
                let mut module = Module::from(ebms[0]);
                for e in &ebms[1..] {
                    module = module.compose(e).map_err(|err| match err {
                        ModelError::LabelClash(label) => DslError::LabelClash {
                            line,
                            module: name.clone(),
                            label,
                        },
                        other => unreachable!("composing EBMs only reports clashes: {other}"),
                    })?;
                }
                if kinds.insert(name.clone(), false).is_some() {
                    return Err(DslError::DuplicateName { line, name });
                }
                file.items.push(Item::Module {
                    name,
                    chain,
                    module,
                });
            }
            _ => return p.error("expected `ebm` or `module`"),
        }
    }
    Ok(file)
}

fn parse_expectation(body: &str, line: usize, col: usize) -> Result<Expectation, DslError> {
    let bad = |message: String| DslError::Syntax { line, col, message };
    let words: Vec<&str> = body.split_whitespace().collect();
    match words.as_slice() {
        ["expect", name, mode, verdict] => {
            if !is_identifier(name) {
                return Err(bad(format!("invalid name `{name}`")));
            }
            let mode = mode.parse().map_err(bad)?;
            let holds = match *verdict {
                "holds" => true,
                "fails" => false,
                other => return Err(bad(format!("expected `holds` or `fails`, got `{other}`"))),
            };
            Ok(Expectation {
                name: (*name).to_owned(),
                mode,
                holds,
            })
        }
        _ => Err(bad("expected `#@ expect NAME MODE holds|fails`".to_owned())),
    }
}

fn labels_line(out: &mut String, labels: &[Label]) {
    for l in labels {
        out.push(' ');
        out.push_str(l.as_str());
    }
    out.push(';');
}

pub fn render_ebm(name: &str, ebm: &Ebm) -> String {
    let mut out = format!("ebm {name} {{ hyp");
    labels_line(&mut out, ebm.hypotheses());
    for pole in ebm.poles() {
        out.push_str(" pole");
        labels_line(&mut out, &pole.conclusions);
    }
    out.push_str(" }");
    out
}

pub fn render(file: &SourceFile) -> String {
    let mut out = String::new();
    for item in &file.items {
        match item {
            Item::Ebm { name, ebm } => out.push_str(&render_ebm(name, ebm)),
            Item::Module { name, chain, .. } => {
                out.push_str(&format!("module {name} = {};", chain.join(" . ")));
            }
            Item::Expect(e) => {
                let verdict = if e.holds { "holds" } else { "fails" };
                out.push_str(&format!("#@ expect {} {} {verdict}", e.name, e.mode));
            }
        }
        out.push('\n');
    }
    out
}

/// Source declaring each cell as `e0`, `e1`, … and the module `name` as their
/// composition in cell order.
pub fn render_module(name: &str, m: &Module) -> String {
    let mut file = SourceFile::default();
    let mut chain = Vec::new();
    for (i, cell) in m.cells().iter().enumerate() {
        let ebm_name = format!("e{i}");
        let ebm = Ebm::new(
            cell.hypotheses.clone(),
            cell.poles.iter().map(|p| p.conclusions.clone()).collect(),
        )
        .expect("cells of a module have distinct labels");
        file.items.push(Item::Ebm {
            name: ebm_name.clone(),
            ebm,
        });
        chain.push(ebm_name);
    }
    file.items.push(Item::Module {
        name: name.to_owned(),
        chain,
        module: m.clone(),
    });
    render(&file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_an_ebm() {
        let f = parse("ebm alpha { hyp a; pole b c; }").unwrap();
        assert_eq!(f.ebm("alpha"), Some(&"[a -o (b c)]".parse().unwrap()));
        let f = parse("ebm t { hyp; pole; }").unwrap();
        assert_eq!(f.ebm("t"), Some(&Ebm::terminal()));
    }

    #[test]
    fn elaborates_chains() {
        let f = parse(
            "ebm alpha { hyp a; pole b c; }\n\
             ebm beta { hyp b; pole d; pole e f; }\n\
             module M = alpha . beta;\n",
        )
        .unwrap();
        let m = f.module("M").unwrap();
        assert_eq!(m.links().len(), 1);
        assert_eq!(f.default_module().unwrap().0, "M");
    }

    #[test]
    fn render_round_trips() {
        let text = "ebm alpha { hyp a; pole b c; }\n\
                    ebm t { hyp; pole; }\n\
                    module M = alpha . t;\n\
                    #@ expect M o holds\n";
        let f = parse(text).unwrap();
        assert_eq!(render(&f), text);
        assert_eq!(parse(&render(&f)).unwrap(), f);
    }

    #[test]
    fn comments_and_annotations() {
        let f = parse(
            "# just a comment\nebm x { hyp; pole a; } # trailing\n#@ expect x acyclic fails\n",
        )
        .unwrap();
        let e: Vec<_> = f.expectations().collect();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].mode, CheckMode::Acyclic);
        assert!(!e[0].holds);
    }

    #[test]
    fn reports_errors() {
        assert!(matches!(
            parse("ebm x { hyp a; pole b }"),
            Err(DslError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse("ebm x { hyp a a; pole; }"),
            Err(DslError::DuplicateLabel { .. })
        ));
        assert!(matches!(
            parse("ebm x { hyp a; pole; }\nmodule m = x . y;"),
            Err(DslError::UnknownName { line: 2, .. })
        ));
        assert!(matches!(
            parse("ebm x { hyp a; pole; }\nebm y { hyp a; pole; }\nmodule m = x . y;"),
            Err(DslError::LabelClash { .. })
        ));
        assert!(matches!(
            parse("ebm x { hyp a; pole; }\nmodule m = x;\nmodule n = m;"),
            Err(DslError::NotElementary { .. })
        ));
        assert!(matches!(
            parse("ebm x { hyp; }"),
            Err(DslError::Syntax { .. })
        ));
        assert!(matches!(
            parse("ebm x { hyp; pole; }\nebm x { hyp; pole; }"),
            Err(DslError::DuplicateName { .. })
        ));
        assert!(matches!(
            parse("ebm x { hyp; pole @; }"),
            Err(DslError::Syntax {
                line: 1,
                col: 19,
                ..
            })
        ));
    }

    #[test]
    fn render_module_parses_back() {
        let f = parse(
            "ebm a { hyp a; pole b c; }\nebm b { hyp b; pole d; pole e f; }\nmodule m = a . b;",
        )
        .unwrap();
        let m = f.module("m").unwrap();
        let back = parse(&render_module("m", &m)).unwrap();
        assert_eq!(back.module("m").unwrap(), m);
    }
}
