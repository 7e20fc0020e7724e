use std::collections::BTreeSet;

use super::{is_valid_name, Axiom, ConceptExpr, Ontology, Signature, FRESH_PREFIX, RESERVED};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Open,
    Close,
    Comma,
    Eq,
    Neq,
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                toks.push(Tok::Open);
            }
            ')' => {
                chars.next();
                toks.push(Tok::Close);
            }
            ',' => {
                chars.next();
                toks.push(Tok::Comma);
            }
            '=' => {
                chars.next();
                toks.push(Tok::Eq);
            }
            '!' => {
                chars.next();
                match chars.next() {
                    Some((_, '=')) => toks.push(Tok::Neq),
                    _ => return Err(syntax(lineno, "expected `!=`")),
                }
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        end = j + d.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Ident(line[i..end].to_string()));
            }
            other => return Err(syntax(lineno, format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, msg: msg.into() }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Concept,
    Role,
    Individual,
}

struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
    line: usize,
    sig: &'a Signature,
}

impl<'a> Cursor<'a> {
    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        match self.next() {
            Some(t) if *t == want => Ok(()),
            _ => Err(syntax(self.line, format!("expected {what}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<&'a str> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            _ => Err(syntax(self.line, format!("expected {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.next() {
            Some(Tok::Ident(s)) if s == kw => Ok(()),
            _ => Err(syntax(self.line, format!("expected `{kw}`"))),
        }
    }

    fn name(&mut self, kind: Kind) -> Result<String> {
        let what = match kind {
            Kind::Concept => "concept name",
            Kind::Role => "role name",
            Kind::Individual => "individual name",
        };
        let s = self.ident(what)?;
        let set = match kind {
            Kind::Concept => &self.sig.concepts,
            Kind::Role => &self.sig.roles,
            Kind::Individual => &self.sig.individuals,
        };
        if set.contains(s) {
            Ok(s.to_string())
        } else {
            Err(Error::Undeclared { line: self.line, name: s.to_string() })
        }
    }

    fn concept(&mut self) -> Result<ConceptExpr> {
        let head = self.ident("concept expression")?;
        match head {
            "Top" => Ok(ConceptExpr::Top),
            "Bottom" => Ok(ConceptExpr::Bottom),
            "And" => {
                self.expect(Tok::Open, "`(` after And")?;
                let mut parts = vec![self.concept()?];
                while self.peek() != Some(&Tok::Close) {
                    parts.push(self.concept()?);
                }
                self.expect(Tok::Close, "`)`")?;
                if parts.len() < 2 {
                    return Err(syntax(self.line, "And needs at least two operands"));
                }
                Ok(ConceptExpr::and(parts))
            }
            "Some" => {
                self.expect(Tok::Open, "`(` after Some")?;
                let r = self.name(Kind::Role)?;
                let filler = self.concept()?;
                self.expect(Tok::Close, "`)`")?;
                Ok(ConceptExpr::some(r, filler))
            }
            "One" => {
                self.expect(Tok::Open, "`(` after One")?;
                let a = self.name(Kind::Individual)?;
                self.expect(Tok::Close, "`)`")?;
                Ok(ConceptExpr::Nominal(a))
            }
            name => {
                if self.sig.concepts.contains(name) {
                    Ok(ConceptExpr::Atomic(name.to_string()))
                } else {
                    Err(Error::Undeclared { line: self.line, name: name.to_string() })
                }
            }
        }
    }

    fn done(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            Err(syntax(self.line, "trailing tokens"))
        } else {
            Ok(())
        }
    }
}

/// Parses a `.onto` document. Declarations may appear anywhere in the file;
/// axioms are resolved against the full set of declarations.
pub fn parse_ontology(text: &str) -> Result<Ontology> {
    parse_ontology_with(text, &Signature::default())
}

/// Like [`parse_ontology`], with names from `base` already declared. A document
/// may repeat a declaration from `base` under the same kind.
pub fn parse_ontology_with(text: &str, base: &Signature) -> Result<Ontology> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokenize(line, i + 1)?;
        if !toks.is_empty() {
            lines.push((i + 1, toks));
        }
    }

    let mut sig = base.clone();
    let mut seen = BTreeSet::new();
    for (lineno, toks) in &lines {
        let kind = match &toks[0] {
            Tok::Ident(k) if k == "Concept" => Kind::Concept,
            Tok::Ident(k) if k == "Role" => Kind::Role,
            Tok::Ident(k) if k == "Individual" => Kind::Individual,
            _ => continue,
        };
        let name = match toks.get(1) {
            Some(Tok::Ident(n)) if toks.len() == 2 => n.clone(),
            _ => return Err(syntax(*lineno, "declaration takes exactly one name")),
        };
        if !is_valid_name(&name) || RESERVED.contains(&name.as_str()) || name.starts_with(FRESH_PREFIX) {
            return Err(syntax(*lineno, format!("`{name}` is not a usable name")));
        }
        let in_base = match kind {
            Kind::Concept => base.concepts.contains(&name),
            Kind::Role => base.roles.contains(&name),
            Kind::Individual => base.individuals.contains(&name),
        };
        if in_base && seen.insert(name.clone()) {
            continue;
        }
        if (base.contains(&name) && !in_base) || !seen.insert(name.clone()) {
            return Err(Error::DuplicateDeclaration { line: *lineno, name });
        }
        match kind {
            Kind::Concept => sig.concepts.insert(name),
            Kind::Role => sig.roles.insert(name),
            Kind::Individual => sig.individuals.insert(name),
        };
    }

    let mut onto = Ontology { signature: sig.clone(), ..Default::default() };
    for (lineno, toks) in &lines {
        let mut cur = Cursor { toks, pos: 0, line: *lineno, sig: &sig };
        let head = cur.ident("keyword")?;
        let ax = match head {
            "Concept" | "Role" | "Individual" => continue,
            "GCI" => {
                let sub = cur.concept()?;
                cur.keyword("SubClassOf")?;
                let sup = cur.concept()?;
                Axiom::Gci { sub, sup }
            }
            "RI" => {
                let sub = cur.name(Kind::Role)?;
                cur.keyword("SubRoleOf")?;
                let sup = cur.name(Kind::Role)?;
                Axiom::Ri { sub, sup }
            }
            "CA" => {
                let concept = cur.concept()?;
                cur.expect(Tok::Open, "`(` before individual")?;
                let individual = cur.name(Kind::Individual)?;
                cur.expect(Tok::Close, "`)`")?;
                Axiom::ConceptAssertion { concept, individual }
            }
            "RA" => {
                let role = cur.name(Kind::Role)?;
                cur.expect(Tok::Open, "`(`")?;
                let from = cur.name(Kind::Individual)?;
                cur.expect(Tok::Comma, "`,`")?;
                let to = cur.name(Kind::Individual)?;
                cur.expect(Tok::Close, "`)`")?;
                Axiom::RoleAssertion { role, from, to }
            }
            "EQ" => {
                let a = cur.name(Kind::Individual)?;
                cur.expect(Tok::Eq, "`=`")?;
                let b = cur.name(Kind::Individual)?;
                Axiom::Equality(a, b)
            }
            "NEQ" => {
                let a = cur.name(Kind::Individual)?;
                cur.expect(Tok::Neq, "`!=`")?;
                let b = cur.name(Kind::Individual)?;
                Axiom::Inequality(a, b)
            }
            other => return Err(syntax(*lineno, format!("unknown keyword `{other}`"))),
        };
        cur.done()?;
        onto.push(ax);
    }
    Ok(onto)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_signature_resolves_names() {
        let shared = parse_ontology("Concept Road\nIndividual r3\n").unwrap();
        let o = parse_ontology_with("CA Road(r3)\n", &shared.signature).unwrap();
        assert_eq!(o.abox.len(), 1);
        assert!(parse_ontology_with("Concept Road\nCA Road(r3)\n", &shared.signature).is_ok());
        assert!(matches!(
            parse_ontology_with("Role Road\n", &shared.signature),
            Err(Error::DuplicateDeclaration { .. })
        ));
    }

    #[test]
    fn minimal_document() {
        let o = parse_ontology("Concept Road\nConcept Way\nGCI Road SubClassOf Way").unwrap();
        assert_eq!(o.tbox.len(), 1);
        assert!(o.abox.is_empty());
    }

    #[test]
    fn ways_in_a_continent() {
        let text = "Concept Road\nConcept Way\nConcept Continent\nRole locatedIn\n\
                    GCI Road SubClassOf And(Way Some(locatedIn Continent))\n";
        let o = parse_ontology(text).unwrap();
        match &o.tbox[0] {
            Axiom::Gci { sub, sup: ConceptExpr::And(parts) } => {
                assert_eq!(sub, &ConceptExpr::atomic("Road"));
                assert_eq!(parts.len(), 2);
            }
            other => panic!("unexpected axiom {other:?}"),
        }
        let sig = super::super::signature_of(&o);
        for c in ["Road", "Way", "Continent"] {
            assert!(sig.concepts.contains(c));
        }
        assert!(sig.roles.contains("locatedIn"));
    }

    #[test]
    fn undeclared_name_is_rejected() {
        let err = parse_ontology("Concept Road\nGCI Road SubClassOf Bogus").unwrap_err();
        assert!(matches!(err, Error::Undeclared { line: 2, ref name } if name == "Bogus"));
    }

    #[test]
    fn duplicate_declaration_is_rejected() {
        let err = parse_ontology("Concept A\nRole A\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateDeclaration { line: 2, .. }));
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = parse_ontology("Concept A\n\n# note\nGCI A SubClassOf\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 4, .. }));
    }

    #[test]
    fn role_chain_is_rejected() {
        let err = parse_ontology("Role r\nRole s\nRole t\nRI r s SubRoleOf t\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { .. }));
    }

    #[test]
    fn all_abox_forms() {
        let text = "Concept A\nRole r\nIndividual a\nIndividual b\n\
                    CA And(A Some(r One(b)))(a)\nRA r(a,b)\nEQ a = b\nNEQ a != b # trailing comment\n";
        let o = parse_ontology(text).unwrap();
        assert_eq!(o.abox.len(), 4);
        assert!(o.tbox.is_empty());
    }

    #[test]
    fn reserved_and_fresh_names_cannot_be_declared() {
        assert!(parse_ontology("Concept And\n").is_err());
        assert!(parse_ontology("Concept _gen3\n").is_err());
    }
}
