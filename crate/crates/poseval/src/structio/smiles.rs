//! SMILES subset parser.
//!
//! Supported: organic-subset atoms (B C N O P S F Cl Br I), aromatic
//! lowercase (b c n o p s), bracket atoms with explicit H count and
//! charge, branches, ring closures (digit or %nn), and bond symbols
//! `-`, `=`, `#`, `:`. Stereochemistry and isotopes are rejected, not
//! ignored.

use super::{BondOrder, GraphNode, MoleculeGraph};
use crate::elements::Element;
use crate::error::{Error, Result};
use std::collections::HashMap;

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
    graph: MoleculeGraph,
    /// Last atom on the current branch stack; pending bond symbol.
    prev: Option<usize>,
    stack: Vec<Option<usize>>,
    pending_bond: Option<BondOrder>,
    /// Open ring closures: number -> (atom, bond at opening).
    rings: HashMap<u32, (usize, Option<BondOrder>)>,
    /// Bracket atoms carry their own H count; organic-subset atoms get
    /// implicit hydrogens filled in afterwards.
    explicit_h: Vec<bool>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
            src,
            graph: MoleculeGraph::default(),
            prev: None,
            stack: Vec::new(),
            pending_bond: None,
            rings: HashMap::new(),
            explicit_h: Vec::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: 1,
            message: format!("{} in SMILES {:?}", msg.into(), self.src),
        }
    }

    fn add_atom(&mut self, element: Element, aromatic: bool, charge: i32, h: Option<u8>) {
        let idx = self.graph.nodes.len();
        self.graph.nodes.push(GraphNode {
            element,
            formal_charge: charge,
            aromatic,
            implicit_h: h.unwrap_or(0),
        });
        self.explicit_h.push(h.is_some());
        if let Some(p) = self.prev {
            let order = self.pending_bond.take().unwrap_or({
                if aromatic && self.graph.nodes[p].aromatic {
                    BondOrder::Aromatic
                } else {
                    BondOrder::Single
                }
            });
            self.graph.add_edge(p, idx, order);
        }
        self.pending_bond = None;
        self.prev = Some(idx);
    }

    fn parse_organic_atom(&mut self) -> Result<bool> {
        let c = match self.peek() {
            Some(c) => c,
            None => return Ok(false),
        };
        let (element, aromatic) = match c {
            'C' => {
                if self.chars.get(self.pos + 1) == Some(&'l') {
                    self.pos += 2;
                    self.add_atom(Element::Cl, false, 0, None);
                    return Ok(true);
                }
                (Element::C, false)
            }
            'B' => {
                if self.chars.get(self.pos + 1) == Some(&'r') {
                    self.pos += 2;
                    self.add_atom(Element::Br, false, 0, None);
                    return Ok(true);
                }
                (Element::B, false)
            }
            'N' => (Element::N, false),
            'O' => (Element::O, false),
            'P' => (Element::P, false),
            'S' => (Element::S, false),
            'F' => (Element::F, false),
            'I' => (Element::I, false),
            'b' => (Element::B, true),
            'c' => (Element::C, true),
            'n' => (Element::N, true),
            'o' => (Element::O, true),
            'p' => (Element::P, true),
            's' => (Element::S, true),
            _ => return Ok(false),
        };
        self.pos += 1;
        self.add_atom(element, aromatic, 0, None);
        Ok(true)
    }

    fn parse_bracket_atom(&mut self) -> Result<()> {
        // '[' already consumed.
        let start = self.pos;
        let mut inner = String::new();
        loop {
            match self.bump() {
                Some(']') => break,
                Some(c) => inner.push(c),
                None => return Err(self.err("unterminated bracket atom")),
            }
        }
        let mut it = inner.chars().peekable();
        if it.peek().map_or(false, |c| c.is_ascii_digit()) {
            return Err(Error::UnsupportedToken(format!(
                "isotope specification in [{inner}]"
            )));
        }
        let first = it.next().ok_or_else(|| self.err("empty bracket atom"))?;
        let mut sym = first.to_string();
        if let Some(&c) = it.peek() {
            if c.is_ascii_lowercase() && first.is_ascii_uppercase() {
                // Two-letter symbols only where valid; "Cl", "Br", "Zn" etc.
                let two = format!("{first}{c}");
                if Element::from_symbol(&two).is_ok() {
                    sym = two;
                    it.next();
                }
            }
        }
        let aromatic = first.is_ascii_lowercase();
        let element = Element::from_symbol(&sym)
            .map_err(|_| self.err(format!("unknown element {sym:?} at position {start}")))?;
        let mut h: u8 = 0;
        let mut charge: i32 = 0;
        while let Some(c) = it.next() {
            match c {
                '@' => {
                    return Err(Error::UnsupportedToken(format!(
                        "stereochemistry in [{inner}]"
                    )))
                }
                'H' => {
                    h = 1;
                    if let Some(&d) = it.peek() {
                        if d.is_ascii_digit() {
                            h = d.to_digit(10).unwrap() as u8;
                            it.next();
                        }
                    }
                }
                '+' | '-' => {
                    let sign = if c == '+' { 1 } else { -1 };
                    let mut mag = 1;
                    if let Some(&d) = it.peek() {
                        if d.is_ascii_digit() {
                            mag = d.to_digit(10).unwrap() as i32;
                            it.next();
                        } else if d == c {
                            mag = 2;
                            it.next();
                        }
                    }
                    charge = sign * mag;
                }
                other => return Err(self.err(format!("unexpected {other:?} in bracket atom"))),
            }
        }
        self.add_atom(element, aromatic, charge, Some(h));
        Ok(())
    }

    fn ring_closure(&mut self, num: u32) -> Result<()> {
        let cur = self
            .prev
            .ok_or_else(|| self.err("ring closure before any atom"))?;
        let bond = self.pending_bond.take();
        match self.rings.remove(&num) {
            Some((other, open_bond)) => {
                if other == cur {
                    return Err(self.err("ring bond to self"));
                }
                let order = bond.or(open_bond).unwrap_or({
                    if self.graph.nodes[cur].aromatic && self.graph.nodes[other].aromatic {
                        BondOrder::Aromatic
                    } else {
                        BondOrder::Single
                    }
                });
                self.graph.add_edge(cur, other, order);
            }
            None => {
                self.rings.insert(num, (cur, bond));
            }
        }
        Ok(())
    }

    fn run(mut self) -> Result<MoleculeGraph> {
        while let Some(c) = self.peek() {
            match c {
                '(' => {
                    self.bump();
                    self.stack.push(self.prev);
                }
                ')' => {
                    self.bump();
                    self.prev = self
                        .stack
                        .pop()
                        .ok_or_else(|| self.err("unbalanced ')'"))?;
                }
                '-' => {
                    self.bump();
                    self.pending_bond = Some(BondOrder::Single);
                }
                '=' => {
                    self.bump();
                    self.pending_bond = Some(BondOrder::Double);
                }
                '#' => {
                    self.bump();
                    self.pending_bond = Some(BondOrder::Triple);
                }
                ':' => {
                    self.bump();
                    self.pending_bond = Some(BondOrder::Aromatic);
                }
                '/' | '\\' => {
                    return Err(Error::UnsupportedToken(format!(
                        "directional bond {c:?}"
                    )))
                }
                '[' => {
                    self.bump();
                    self.parse_bracket_atom()?;
                }
                '%' => {
                    self.bump();
                    let a = self
                        .bump()
                        .and_then(|c| c.to_digit(10))
                        .ok_or_else(|| self.err("bad %nn ring number"))?;
                    let b = self
                        .bump()
                        .and_then(|c| c.to_digit(10))
                        .ok_or_else(|| self.err("bad %nn ring number"))?;
                    self.ring_closure(a * 10 + b)?;
                }
                d if d.is_ascii_digit() => {
                    self.bump();
                    self.ring_closure(d.to_digit(10).unwrap())?;
                }
                '.' => {
                    return Err(Error::UnsupportedToken(
                        "disconnected components ('.')".into(),
                    ))
                }
                _ => {
                    if !self.parse_organic_atom()? {
                        return Err(Error::UnsupportedToken(format!(
                            "unexpected character {c:?}"
                        )));
                    }
                }
            }
        }
        if !self.stack.is_empty() {
            return Err(self.err("unbalanced '('"));
        }
        if !self.rings.is_empty() {
            let mut nums: Vec<u32> = self.rings.keys().copied().collect();
            nums.sort();
            return Err(self.err(format!("unclosed ring bond(s) {nums:?}")));
        }
        if self.graph.nodes.is_empty() {
            return Err(self.err("no atoms"));
        }
        fill_implicit_hydrogens(&mut self.graph, &self.explicit_h);
        Ok(self.graph)
    }
}

fn fill_implicit_hydrogens(g: &mut MoleculeGraph, explicit: &[bool]) {
    let mut order_sum = vec![0.0f64; g.nodes.len()];
    for e in &g.edges {
        let o = match e.order {
            BondOrder::Single => 1.0,
            BondOrder::Double => 2.0,
            BondOrder::Triple => 3.0,
            BondOrder::Aromatic => 1.5,
        };
        order_sum[e.i] += o;
        order_sum[e.j] += o;
    }
    for (i, n) in g.nodes.iter_mut().enumerate() {
        if explicit[i] {
            continue;
        }
        if let Some(v) = n.element.default_valence() {
            let effective = (v as i32 + n.formal_charge).max(0) as f64;
            let h = effective - order_sum[i].ceil();
            n.implicit_h = if h > 0.0 { h as u8 } else { 0 };
        }
    }
}

/// Parse a SMILES string (supported subset) into a coordinate-free graph.
pub fn parse_smiles(s: &str) -> Result<MoleculeGraph> {
    Parser::new(s).run()
}
