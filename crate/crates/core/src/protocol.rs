//! Function-call action strings: parsing, canonical formatting, validation and
//! the error record agents see in the next observation.
//!
//! Grammar: `identifier '(' (key '=' literal (',' key '=' literal)*)? ')'` where a
//! literal is an integer or a double-quoted string. Keys may come in any order.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, EntityKey, Kind, ResearchSpeed, Subclass, Subtype};
use crate::world::placement::placement_legal_ignoring;
use crate::world::{ParkState, Pos};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Place {
        x: i64,
        y: i64,
        kind: Kind,
        subtype: Subtype,
        subclass: Subclass,
        price: Option<i64>,
        order_quantity: Option<i64>,
    },
    Move {
        x: i64,
        y: i64,
        new_x: i64,
        new_y: i64,
    },
    Remove {
        x: i64,
        y: i64,
    },
    Modify {
        x: i64,
        y: i64,
        price: Option<i64>,
        order_quantity: Option<i64>,
    },
    SetResearch {
        topic: Subtype,
        speed: ResearchSpeed,
    },
    Wait,
    SurveyGuests {
        n: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SandboxAction {
    UndoDay,
    MaxMoney,
    MaxResearch,
    Reset,
    SwitchLayout { name: String },
}

/// Anything that can arrive on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    Game(Action),
    Sandbox(SandboxAction),
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Place { .. } => "place",
            Action::Move { .. } => "move",
            Action::Remove { .. } => "remove",
            Action::Modify { .. } => "modify",
            Action::SetResearch { .. } => "set_research",
            Action::Wait => "wait",
            Action::SurveyGuests { .. } => "survey_guests",
        }
    }
}

impl SandboxAction {
    pub fn name(&self) -> &'static str {
        match self {
            SandboxAction::UndoDay => "undo_day",
            SandboxAction::MaxMoney => "max_money",
            SandboxAction::MaxResearch => "max_research",
            SandboxAction::Reset => "reset",
            SandboxAction::SwitchLayout { .. } => "switch_layout",
        }
    }
}

pub const GAME_ACTIONS: [&str; 7] = ["place", "move", "remove", "modify", "set_research", "wait", "survey_guests"];
pub const SANDBOX_ACTIONS: [&str; 5] = ["undo_day", "max_money", "max_research", "reset", "switch_layout"];

// ---------------------------------------------------------------------------
// Lexing and parsing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    Eq,
    Comma,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "`{s}`"),
            Token::Int(i) => write!(f, "`{i}`"),
            Token::Str(s) => write!(f, "\"{s}\""),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
            Token::Eq => f.write_str("`=`"),
            Token::Comma => f.write_str("`,`"),
        }
    }
}

/// A syntax error with the zero-based index of the offending token.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} (token {token})")]
pub struct ParseError {
    pub message: String,
    pub token: usize,
}

fn perr(token: usize, message: impl Into<String>) -> ParseError {
    ParseError { message: message.into(), token }
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let at = tokens.len();
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' | ')' | '=' | ',' => {
                chars.next();
                tokens.push(match c {
                    '(' => Token::LParen,
                    ')' => Token::RParen,
                    '=' => Token::Eq,
                    _ => Token::Comma,
                });
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err(perr(at, "unterminated string literal")),
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some(e @ ('"' | '\\')) => s.push(e),
                            Some('n') => s.push('\n'),
                            Some(other) => return Err(perr(at, format!("unknown escape `\\{other}`"))),
                            None => return Err(perr(at, "unterminated string literal")),
                        },
                        Some(ch) => s.push(ch),
                    }
                }
                tokens.push(Token::Str(s));
            }
            '-' | '0'..='9' => {
                let mut s = String::new();
                s.push(c);
                chars.next();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let value = s.parse::<i64>().map_err(|_| perr(at, format!("invalid integer `{s}`")))?;
                tokens.push(Token::Int(value));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token::Ident(s));
            }
            other => return Err(perr(at, format!("unexpected character `{other}`"))),
        }
    }
    Ok(tokens)
}

#[derive(Debug, Clone)]
enum Literal {
    Int(i64),
    Str(String),
}

struct Arg {
    key: String,
    value: Literal,
    key_token: usize,
    value_token: usize,
}

struct Call {
    name: String,
    args: Vec<Arg>,
    close_token: usize,
}

fn parse_call(tokens: &[Token]) -> Result<Call, ParseError> {
    let name = match tokens.first() {
        Some(Token::Ident(n)) => n.clone(),
        Some(t) => return Err(perr(0, format!("expected an action name, found {t}"))),
        None => return Err(perr(0, "empty action")),
    };
    match tokens.get(1) {
        Some(Token::LParen) => {}
        Some(t) => return Err(perr(1, format!("expected `(`, found {t}"))),
        None => return Err(perr(1, "expected `(` after the action name")),
    }
    let mut i = 2;
    let mut args = Vec::new();
    if let Some(Token::RParen) = tokens.get(i) {
        return finish(name, args, i, tokens);
    }
    loop {
        let key = match tokens.get(i) {
            Some(Token::Ident(k)) => k.clone(),
            Some(t) => return Err(perr(i, format!("expected an argument name, found {t}"))),
            None => return Err(perr(i, "unexpected end of input, expected an argument name")),
        };
        let key_token = i;
        match tokens.get(i + 1) {
            Some(Token::Eq) => {}
            Some(t) => return Err(perr(i + 1, format!("expected `=` after `{key}`, found {t}"))),
            None => return Err(perr(i + 1, format!("expected `=` after `{key}`"))),
        }
        let value = match tokens.get(i + 2) {
            Some(Token::Int(v)) => Literal::Int(*v),
            Some(Token::Str(s)) => Literal::Str(s.clone()),
            // point at the `=` that is missing its value
            _ => return Err(perr(i + 1, format!("missing value for `{key}`"))),
        };
        args.push(Arg { key, value, key_token, value_token: i + 2 });
        i += 3;
        match tokens.get(i) {
            Some(Token::Comma) => i += 1,
            Some(Token::RParen) => return finish(name, args, i, tokens),
            Some(t) => return Err(perr(i, format!("expected `,` or `)`, found {t}"))),
            None => return Err(perr(i, "unexpected end of input, expected `)`")),
        }
    }
}

fn finish(name: String, args: Vec<Arg>, close: usize, tokens: &[Token]) -> Result<Call, ParseError> {
    if close + 1 < tokens.len() {
        return Err(perr(close + 1, format!("unexpected {} after `)`", tokens[close + 1])));
    }
    Ok(Call { name, args, close_token: close })
}

struct Args {
    args: Vec<Arg>,
    close_token: usize,
    action: &'static str,
}

impl Args {
    fn new(call: Call, action: &'static str, allowed: &[&str]) -> Result<Args, ParseError> {
        for (n, a) in call.args.iter().enumerate() {
            if !allowed.contains(&a.key.as_str()) {
                return Err(perr(a.key_token, format!("unknown argument `{}` for {action}", a.key)));
            }
            if call.args[..n].iter().any(|b| b.key == a.key) {
                return Err(perr(a.key_token, format!("duplicate argument `{}`", a.key)));
            }
        }
        Ok(Args { args: call.args, close_token: call.close_token, action })
    }

    fn find(&self, key: &str) -> Option<&Arg> {
        self.args.iter().find(|a| a.key == key)
    }

    fn int(&self, key: &str) -> Result<i64, ParseError> {
        self.opt_int(key)?.ok_or_else(|| perr(self.close_token, format!("{} requires `{key}`", self.action)))
    }

    fn opt_int(&self, key: &str) -> Result<Option<i64>, ParseError> {
        match self.find(key) {
            None => Ok(None),
            Some(Arg { value: Literal::Int(v), .. }) => Ok(Some(*v)),
            Some(a) => Err(perr(a.value_token, format!("`{key}` must be an integer"))),
        }
    }

    fn string(&self, key: &str) -> Result<(String, usize), ParseError> {
        match self.find(key) {
            None => Err(perr(self.close_token, format!("{} requires `{key}`", self.action))),
            Some(Arg { value: Literal::Str(s), value_token, .. }) => Ok((s.clone(), *value_token)),
            Some(a) => Err(perr(a.value_token, format!("`{key}` must be a quoted string"))),
        }
    }

    fn named<T: std::str::FromStr>(&self, key: &str) -> Result<T, ParseError> {
        let (s, at) = self.string(key)?;
        s.parse().map_err(|_| perr(at, format!("unknown {key} \"{s}\"")))
    }
}

/// Parses one wire command. Performs no state-dependent checks.
pub fn parse(text: &str) -> Result<Command, ParseError> {
    let tokens = lex(text.trim())?;
    let call = parse_call(&tokens)?;
    let name = call.name.clone();
    let cmd = match name.as_str() {
        "place" => {
            let a = Args::new(call, "place", &["x", "y", "type", "subtype", "subclass", "price", "order_quantity"])?;
            Command::Game(Action::Place {
                x: a.int("x")?,
                y: a.int("y")?,
                kind: a.named("type")?,
                subtype: a.named("subtype")?,
                subclass: a.named("subclass")?,
                price: a.opt_int("price")?,
                order_quantity: a.opt_int("order_quantity")?,
            })
        }
        "move" => {
            let a = Args::new(call, "move", &["x", "y", "new_x", "new_y"])?;
            Command::Game(Action::Move { x: a.int("x")?, y: a.int("y")?, new_x: a.int("new_x")?, new_y: a.int("new_y")? })
        }
        "remove" => {
            let a = Args::new(call, "remove", &["x", "y"])?;
            Command::Game(Action::Remove { x: a.int("x")?, y: a.int("y")? })
        }
        "modify" => {
            let a = Args::new(call, "modify", &["x", "y", "price", "order_quantity"])?;
            Command::Game(Action::Modify {
                x: a.int("x")?,
                y: a.int("y")?,
                price: a.opt_int("price")?,
                order_quantity: a.opt_int("order_quantity")?,
            })
        }
        "set_research" => {
            let a = Args::new(call, "set_research", &["topic", "speed"])?;
            Command::Game(Action::SetResearch { topic: a.named("topic")?, speed: a.named("speed")? })
        }
        "wait" => {
            Args::new(call, "wait", &[])?;
            Command::Game(Action::Wait)
        }
        "survey_guests" => {
            let a = Args::new(call, "survey_guests", &["n"])?;
            Command::Game(Action::SurveyGuests { n: a.int("n")? })
        }
        "undo_day" | "max_money" | "max_research" | "reset" => {
            let static_name = SANDBOX_ACTIONS.iter().find(|n| **n == name).copied().unwrap_or("sandbox");
            Args::new(call, static_name, &[])?;
            Command::Sandbox(match name.as_str() {
                "undo_day" => SandboxAction::UndoDay,
                "max_money" => SandboxAction::MaxMoney,
                "max_research" => SandboxAction::MaxResearch,
                _ => SandboxAction::Reset,
            })
        }
        "switch_layout" => {
            let a = Args::new(call, "switch_layout", &["name"])?;
            Command::Sandbox(SandboxAction::SwitchLayout { name: a.string("name")?.0 })
        }
        other => return Err(perr(0, format!("unknown action `{other}`"))),
    };
    Ok(cmd)
}

/// Parses a standard game action, rejecting sandbox commands.
pub fn parse_action(text: &str) -> Result<Action, ParseError> {
    match parse(text)? {
        Command::Game(a) => Ok(a),
        Command::Sandbox(s) => Err(perr(0, format!("`{}` is a sandbox action", s.name()))),
    }
}

// ---------------------------------------------------------------------------
// Canonical formatting

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Canonical text: keys in the documented order, optional keys only when present.
pub fn format(action: &Action) -> String {
    let mut args: Vec<String> = Vec::new();
    match action {
        Action::Place { x, y, kind, subtype, subclass, price, order_quantity } => {
            args.push(format!("x={x}"));
            args.push(format!("y={y}"));
            args.push(format!("type={}", quote(kind.as_str())));
            args.push(format!("subtype={}", quote(subtype.as_str())));
            args.push(format!("subclass={}", quote(subclass.as_str())));
            if let Some(p) = price {
                args.push(format!("price={p}"));
            }
            if let Some(q) = order_quantity {
                args.push(format!("order_quantity={q}"));
            }
        }
        Action::Move { x, y, new_x, new_y } => {
            args.extend([format!("x={x}"), format!("y={y}"), format!("new_x={new_x}"), format!("new_y={new_y}")]);
        }
        Action::Remove { x, y } => args.extend([format!("x={x}"), format!("y={y}")]),
        Action::Modify { x, y, price, order_quantity } => {
            args.extend([format!("x={x}"), format!("y={y}")]);
            if let Some(p) = price {
                args.push(format!("price={p}"));
            }
            if let Some(q) = order_quantity {
                args.push(format!("order_quantity={q}"));
            }
        }
        Action::SetResearch { topic, speed } => {
            args.push(format!("topic={}", quote(topic.as_str())));
            args.push(format!("speed={}", quote(speed.as_str())));
        }
        Action::Wait => {}
        Action::SurveyGuests { n } => args.push(format!("n={n}")),
    }
    format!("{}({})", action.name(), args.join(", "))
}

pub fn format_command(cmd: &Command) -> String {
    match cmd {
        Command::Game(a) => format(a),
        Command::Sandbox(SandboxAction::SwitchLayout { name }) => format!("switch_layout(name={})", quote(name)),
        Command::Sandbox(s) => format!("{}()", s.name()),
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(self))
    }
}

// ---------------------------------------------------------------------------
// Errors on the wire

pub const INVALID_ACTION: &str = "invalid_action";

/// An in-band game error. Its record form is what agents see in the NOTE line.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Error)]
#[error("{message}")]
pub struct ActionError {
    pub message: String,
    #[serde(rename = "type")]
    pub kind: String,
}

impl ActionError {
    pub fn new(message: impl Into<String>) -> ActionError {
        ActionError { message: message.into(), kind: INVALID_ACTION.to_string() }
    }

    /// Python-dict rendering: `{'message': '...', 'type': 'invalid_action'}`.
    pub fn record(&self) -> String {
        format!("{{'message': {}, 'type': {}}}", py_repr(&self.message), py_repr(&self.kind))
    }
}

impl From<ParseError> for ActionError {
    fn from(e: ParseError) -> Self {
        ActionError::new(format!("Could not parse action: {}", e))
    }
}

/// Python `repr` of a string.
pub fn py_repr(s: &str) -> String {
    let q = if s.contains('\'') && !s.contains('"') { '"' } else { '\'' };
    let mut out = String::with_capacity(s.len() + 2);
    out.push(q);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c == q => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
    out.push(q);
    out
}

/// The line appended to an observation after a failed action.
pub fn note_line(action_text: &str, error: &ActionError) -> String {
    format!("NOTE: While attempting the action `{}` the error `{}` occurred.", action_text, error.record())
}

/// Frozen error-message catalogue. Agents may pattern-match on these.
pub mod messages {
    use super::*;

    pub fn out_of_bounds(x: i64, y: i64) -> String {
        format!("Coordinates ({x}, {y}) are outside of the park (0-19)")
    }
    pub fn negative_order_quantity(q: i64) -> String {
        format!("Inventory order_quantity cannot be negative: {q}")
    }
    pub fn negative_price(p: i64) -> String {
        format!("Price cannot be negative: {p}")
    }
    pub fn price_above_max(p: i64, max: i64, key: EntityKey) -> String {
        format!("Price {p} exceeds the maximum price {max} for a {} {}", key.subclass, key.subtype)
    }
    pub fn kind_mismatch(kind: Kind, subtype: Subtype) -> String {
        format!("Subtype {subtype} is not a {kind}")
    }
    pub fn price_not_applicable(subtype: Subtype) -> String {
        format!("price is not applicable to {subtype}")
    }
    pub fn order_quantity_not_applicable(subtype: Subtype) -> String {
        format!("order_quantity is only valid for shops, not {subtype}")
    }
    pub fn survey_size(n: i64) -> String {
        format!("Number of guests to survey must be at least 1: {n}")
    }
    pub fn locked(key: EntityKey) -> String {
        format!("Cannot build a {} {}: subclass not unlocked", key.subclass, key.subtype)
    }
    pub fn fully_researched(topic: Subtype) -> String {
        format!("Research topic {topic} is already fully researched")
    }
    pub fn illegal_tile(x: i64, y: i64, reason: &str) -> String {
        format!("Cannot place at ({x}, {y}): {reason}")
    }
    pub fn insufficient_funds(what: &str, cost: i64, money: i64) -> String {
        format!("Cannot afford {what}: insufficient funds ({cost} needed, {money} available)")
    }
    pub fn nothing_at(x: i64, y: i64) -> String {
        format!("There is no attraction or staff at ({x}, {y})")
    }
    pub fn no_attraction_at(x: i64, y: i64) -> String {
        format!("There is no ride or shop at ({x}, {y}) to modify")
    }
    pub fn nothing_to_modify() -> String {
        "modify requires price or order_quantity".to_string()
    }
    pub fn sandbox_only(name: &str) -> String {
        format!("Sandbox action `{name}` is not available outside sandbox mode")
    }
    pub fn game_over(day: u32, horizon: u32) -> String {
        format!("The game is over: day {day} of {horizon}")
    }
}

// ---------------------------------------------------------------------------
// Validation

fn pos_of(x: i64, y: i64) -> Option<Pos> {
    let p = Pos::new(i32::try_from(x).ok()?, i32::try_from(y).ok()?);
    p.in_bounds().then_some(p)
}

enum Target<'a> {
    Attraction(&'a crate::world::PlacedEntity),
    Staff,
}

fn target_at(state: &ParkState, p: Pos) -> Option<Target<'_>> {
    state.entity_at(p).map(Target::Attraction).or_else(|| state.staff_at(p).map(|_| Target::Staff))
}

/// Checks an action against the current state. First failure wins; the state is never touched.
///
/// Order: value ranges, availability, placement legality, funds, target existence, survey cost.
pub fn validate(state: &ParkState, catalog: &Catalog, action: &Action) -> Result<(), ActionError> {
    use messages as m;
    let fail = |msg: String| Err(ActionError::new(msg));
    if state.finished() {
        return fail(m::game_over(state.day, state.horizon));
    }

    // value ranges
    match *action {
        Action::Place { x, y, kind, subtype, subclass, price, order_quantity } => {
            if pos_of(x, y).is_none() {
                return fail(m::out_of_bounds(x, y));
            }
            if subtype.kind() != kind {
                return fail(m::kind_mismatch(kind, subtype));
            }
            if let Some(q) = order_quantity {
                if q < 0 {
                    return fail(m::negative_order_quantity(q));
                }
                if kind != Kind::Shop {
                    return fail(m::order_quantity_not_applicable(subtype));
                }
            }
            if let Some(p) = price {
                if kind == Kind::Staff {
                    return fail(m::price_not_applicable(subtype));
                }
                if p < 0 {
                    return fail(m::negative_price(p));
                }
                let key = EntityKey { kind, subtype, subclass };
                let max = catalog.spec(subtype, subclass).max_price;
                if p > max {
                    return fail(m::price_above_max(p, max, key));
                }
            }
        }
        Action::Move { x, y, new_x, new_y } => {
            if pos_of(x, y).is_none() {
                return fail(m::out_of_bounds(x, y));
            }
            if pos_of(new_x, new_y).is_none() {
                return fail(m::out_of_bounds(new_x, new_y));
            }
        }
        Action::Remove { x, y } => {
            if pos_of(x, y).is_none() {
                return fail(m::out_of_bounds(x, y));
            }
        }
        Action::Modify { x, y, price, order_quantity } => {
            let Some(p) = pos_of(x, y) else {
                return fail(m::out_of_bounds(x, y));
            };
            if price.is_none() && order_quantity.is_none() {
                return fail(m::nothing_to_modify());
            }
            if let Some(q) = order_quantity {
                if q < 0 {
                    return fail(m::negative_order_quantity(q));
                }
            }
            if let Some(pr) = price {
                if pr < 0 {
                    return fail(m::negative_price(pr));
                }
            }
            if let Some(e) = state.entity_at(p) {
                if let Some(pr) = price {
                    let max = catalog.spec(e.key.subtype, e.key.subclass).max_price;
                    if pr > max {
                        return fail(m::price_above_max(pr, max, e.key));
                    }
                }
                if order_quantity.is_some() && !e.is_shop() {
                    return fail(m::order_quantity_not_applicable(e.key.subtype));
                }
            }
        }
        Action::SurveyGuests { n } => {
            if n < 1 {
                return fail(m::survey_size(n));
            }
        }
        Action::SetResearch { .. } | Action::Wait => {}
    }

    // availability
    match *action {
        Action::Place { kind, subtype, subclass, .. } => {
            let key = EntityKey { kind, subtype, subclass };
            if !state.research.is_unlocked(key) {
                return fail(m::locked(key));
            }
        }
        Action::SetResearch { topic, speed } if speed != ResearchSpeed::None && state.research.fully_researched(topic) => {
            return fail(m::fully_researched(topic));
        }
        _ => {}
    }

    // placement legality
    match *action {
        Action::Place { x, y, kind, .. } => {
            let p = pos_of(x, y).expect("checked");
            if let Err(v) = placement_legal_ignoring(state, p, kind, None) {
                return fail(m::illegal_tile(x, y, &v.to_string()));
            }
        }
        Action::Move { x, y, new_x, new_y } => {
            let from = pos_of(x, y).expect("checked");
            let to = pos_of(new_x, new_y).expect("checked");
            let legality = match target_at(state, from) {
                Some(Target::Attraction(e)) => placement_legal_ignoring(state, to, e.key.kind, Some(e.id)),
                Some(Target::Staff) => placement_legal_ignoring(state, to, Kind::Staff, None),
                None => Ok(()),
            };
            if let Err(v) = legality {
                return fail(m::illegal_tile(new_x, new_y, &v.to_string()));
            }
        }
        _ => {}
    }

    // funds
    if let Action::Place { subtype, subclass, .. } = *action {
        let cost = catalog.spec(subtype, subclass).build_cost;
        if cost > state.money {
            return fail(m::insufficient_funds(&format!("a {subclass} {subtype}"), cost, state.money));
        }
    }

    // target existence
    match *action {
        Action::Move { x, y, .. } | Action::Remove { x, y } => {
            if target_at(state, pos_of(x, y).expect("checked")).is_none() {
                return fail(m::nothing_at(x, y));
            }
        }
        Action::Modify { x, y, .. } if state.entity_at(pos_of(x, y).expect("checked")).is_none() => {
            return fail(m::no_attraction_at(x, y));
        }
        _ => {}
    }

    // survey affordability
    if let Action::SurveyGuests { n } = *action {
        let cost = n.saturating_mul(catalog.params.survey_cost_per_guest);
        if cost > state.money {
            return fail(m::insufficient_funds(&format!("a survey of {n} guests"), cost, state.money));
        }
    }
    Ok(())
}
