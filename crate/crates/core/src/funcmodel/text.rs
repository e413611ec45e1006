//! Canonical declarative text form of descriptors, e.g.
//! `sum(const(1), sinusoid(0, -1, 2, 0))` or `pw_periodic(2, [(0, 0.5), (1, 2)])`.
//! Numeric arguments accept arithmetic with `pi`, `e`, `ln`, `exp`, `sqrt`,
//! `sin`, `cos`.

use super::function::{Extension, TimeFunction};
use super::FuncError;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, FuncError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text
                .parse()
                .map_err(|_| FuncError::Parse(format!("bad number '{text}' at {start}")))?;
            out.push((start, Tok::Num(v)));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "()[],+-*/".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(FuncError::Parse(format!("unexpected character '{c}' at {i}")));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Value {
    Num(f64),
    Func(TimeFunction),
    List(Vec<Value>),
    Tuple(Vec<Value>),
    Word(String),
}

impl Value {
    fn describe(&self) -> &'static str {
        match self {
            Value::Num(_) => "number",
            Value::Func(_) => "function",
            Value::List(_) => "list",
            Value::Tuple(_) => "tuple",
            Value::Word(_) => "word",
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

fn err<T>(msg: impl Into<String>) -> Result<T, FuncError> {
    Err(FuncError::Parse(msg.into()))
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(usize::MAX)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), FuncError> {
        if self.eat(c) {
            Ok(())
        } else {
            err(format!("expected '{c}' at {}", self.offset()))
        }
    }

    fn expr(&mut self) -> Result<Value, FuncError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym('+')) => '+',
                Some(Tok::Sym('-')) => '-',
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Value::Num(arith(op, &lhs, &rhs)?);
        }
    }

    fn term(&mut self) -> Result<Value, FuncError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym('*')) => '*',
                Some(Tok::Sym('/')) => '/',
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Value::Num(arith(op, &lhs, &rhs)?);
        }
    }

    fn unary(&mut self) -> Result<Value, FuncError> {
        if self.eat('-') {
            let v = self.unary()?;
            return match v {
                Value::Num(x) => Ok(Value::Num(-x)),
                other => err(format!("cannot negate a {}", other.describe())),
            };
        }
        if self.eat('+') {
            return self.unary();
        }
        self.primary()
    }

    fn args(&mut self) -> Result<Vec<Value>, FuncError> {
        let mut out = Vec::new();
        if self.eat(')') {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if self.eat(')') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn primary(&mut self) -> Result<Value, FuncError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Value::Num(v))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let mut items = vec![self.expr()?];
                while self.eat(',') {
                    items.push(self.expr()?);
                }
                self.expect(')')?;
                if items.len() == 1 {
                    Ok(items.pop().unwrap())
                } else {
                    Ok(Value::Tuple(items))
                }
            }
            Some(Tok::Sym('[')) => {
                self.pos += 1;
                let mut items = Vec::new();
                if !self.eat(']') {
                    loop {
                        items.push(self.expr()?);
                        if self.eat(']') {
                            break;
                        }
                        self.expect(',')?;
                    }
                }
                Ok(Value::List(items))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let args = self.args()?;
                    call(&name, args).map_err(|e| match e {
                        FuncError::Parse(m) => FuncError::Parse(format!("{m} (in '{name}' at {at})")),
                        other => other,
                    })
                } else {
                    match name.as_str() {
                        "pi" => Ok(Value::Num(std::f64::consts::PI)),
                        "e" => Ok(Value::Num(std::f64::consts::E)),
                        _ => Ok(Value::Word(name)),
                    }
                }
            }
            Some(Tok::Sym(c)) => err(format!("unexpected '{c}' at {at}")),
            None => err("unexpected end of input"),
        }
    }
}

fn arith(op: char, a: &Value, b: &Value) -> Result<f64, FuncError> {
    match (a, b) {
        (Value::Num(x), Value::Num(y)) => Ok(match op {
            '+' => x + y,
            '-' => x - y,
            '*' => x * y,
            _ => x / y,
        }),
        _ => err(format!(
            "arithmetic '{op}' needs numbers, found {} and {}",
            a.describe(),
            b.describe()
        )),
    }
}

fn num(v: &Value) -> Result<f64, FuncError> {
    match v {
        Value::Num(x) => Ok(*x),
        other => err(format!("expected number, found {}", other.describe())),
    }
}

fn func(v: Value) -> Result<TimeFunction, FuncError> {
    match v {
        Value::Func(f) => Ok(f),
        Value::Num(x) => Ok(TimeFunction::constant(x)),
        other => err(format!("expected function, found {}", other.describe())),
    }
}

fn arity(name: &str, args: &[Value], n: usize) -> Result<(), FuncError> {
    if args.len() == n {
        Ok(())
    } else {
        err(format!("{name} takes {n} arguments, got {}", args.len()))
    }
}

fn funcs(args: Vec<Value>) -> Result<Vec<TimeFunction>, FuncError> {
    if args.is_empty() {
        return err("expected at least one argument");
    }
    args.into_iter().map(func).collect()
}

fn call(name: &str, mut args: Vec<Value>) -> Result<Value, FuncError> {
    let all_num = args.iter().all(|a| matches!(a, Value::Num(_)));
    let f = match name {
        "ln" | "sqrt" | "sin" | "cos" if all_num => {
            arity(name, &args, 1)?;
            let x = num(&args[0])?;
            return Ok(Value::Num(match name {
                "ln" => x.ln(),
                "sqrt" => x.sqrt(),
                "sin" => x.sin(),
                _ => x.cos(),
            }));
        }
        "exp" if args.len() == 1 => return Ok(Value::Num(num(&args[0])?.exp())),
        "abs" if all_num && args.len() == 1 => return Ok(Value::Num(num(&args[0])?.abs())),
        "const" => {
            arity(name, &args, 1)?;
            TimeFunction::constant(num(&args[0])?)
        }
        "sinusoid" => {
            arity(name, &args, 4)?;
            TimeFunction::sinusoid(num(&args[0])?, num(&args[1])?, num(&args[2])?, num(&args[3])?)
        }
        "pw_periodic" => {
            arity(name, &args, 2)?;
            let period = num(&args[0])?;
            let pieces = match &args[1] {
                Value::List(items) => items
                    .iter()
                    .map(|it| match it {
                        Value::Tuple(p) if p.len() == 2 => Ok((num(&p[0])?, num(&p[1])?)),
                        _ => err("pw_periodic pieces must be (time, value) pairs"),
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                _ => return err("pw_periodic expects a list of pieces"),
            };
            TimeFunction::piecewise_periodic(period, &pieces)?
        }
        "sum" => TimeFunction::sum(funcs(args)?),
        "product" => TimeFunction::product(funcs(args)?),
        "max" => TimeFunction::max_of(funcs(args)?),
        "min" => TimeFunction::min_of(funcs(args)?),
        "scaled" => {
            arity(name, &args, 2)?;
            let inner = func(args.pop().unwrap())?;
            TimeFunction::scaled(num(&args[0])?, inner)
        }
        "table" => {
            if args.len() != 4 && args.len() != 5 {
                return err("table takes (start, step, [samples], extension[, variation])");
            }
            let variation = if args.len() == 5 {
                Some(num(&args[4])?)
            } else {
                None
            };
            let samples = match &args[2] {
                Value::List(items) => items.iter().map(num).collect::<Result<Vec<_>, _>>()?,
                _ => return err("table samples must be a list"),
            };
            let ext = match &args[3] {
                Value::Word(w) if w == "error" => Extension::Error,
                Value::Word(w) if w == "hold" => Extension::Hold,
                Value::Word(w) if w == "periodic" => Extension::Periodic,
                _ => return err("table extension must be error, hold or periodic"),
            };
            TimeFunction::tabulated(num(&args[0])?, num(&args[1])?, samples, ext, variation)?
        }
        "sawtooth" => {
            arity(name, &args, 2)?;
            TimeFunction::sawtooth(num(&args[0])?, num(&args[1])?)
        }
        "quotient" => {
            arity(name, &args, 2)?;
            let d = func(args.pop().unwrap())?;
            let n = func(args.pop().unwrap())?;
            TimeFunction::quotient(n, d)
        }
        "abs" => {
            arity(name, &args, 1)?;
            TimeFunction::abs(func(args.pop().unwrap())?)
        }
        "pos" => {
            arity(name, &args, 1)?;
            TimeFunction::positive_part(func(args.pop().unwrap())?)
        }
        "exp" => {
            arity(name, &args, 2)?;
            let inner = func(args.pop().unwrap())?;
            TimeFunction::exp(num(&args[0])?, inner)
        }
        "window_integral" => {
            arity(name, &args, 2)?;
            let lag = func(args.pop().unwrap())?;
            let f = func(args.pop().unwrap())?;
            TimeFunction::window_integral(f, lag)
        }
        "antiderivative" => {
            arity(name, &args, 2)?;
            let origin = num(&args[1])?;
            TimeFunction::antiderivative(func(args.swap_remove(0))?, origin)
        }
        _ => return err(format!("unknown function '{name}'")),
    };
    f.validate()?;
    Ok(Value::Func(f))
}

impl TimeFunction {
    /// Parse the canonical text form. A bare numeric expression denotes a
    /// constant function.
    pub fn parse(src: &str) -> Result<TimeFunction, FuncError> {
        let toks = tokenize(src)?;
        let mut p = Parser { toks, pos: 0 };
        let v = p.expr()?;
        if p.pos != p.toks.len() {
            return err(format!("trailing input at {}", p.offset()));
        }
        func(v)
    }
}

impl std::str::FromStr for TimeFunction {
    type Err = FuncError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TimeFunction::parse(s)
    }
}

fn join(f: &mut fmt::Formatter<'_>, items: &[TimeFunction]) -> fmt::Result {
    for (i, it) in items.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{it}")?;
    }
    Ok(())
}

impl fmt::Display for TimeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeFunction::Constant { value } => write!(f, "const({value})"),
            TimeFunction::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => write!(f, "sinusoid({offset}, {amplitude}, {omega}, {phase})"),
            TimeFunction::PiecewisePeriodic {
                period,
                breakpoints,
                values,
            } => {
                write!(f, "pw_periodic({period}, [")?;
                for (i, (b, v)) in breakpoints.iter().zip(values).enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "({b}, {v})")?;
                }
                write!(f, "])")
            }
            TimeFunction::Sum { terms } => {
                write!(f, "sum(")?;
                join(f, terms)?;
                write!(f, ")")
            }
            TimeFunction::Product { factors } => {
                write!(f, "product(")?;
                join(f, factors)?;
                write!(f, ")")
            }
            TimeFunction::Max { terms } => {
                write!(f, "max(")?;
                join(f, terms)?;
                write!(f, ")")
            }
            TimeFunction::Min { terms } => {
                write!(f, "min(")?;
                join(f, terms)?;
                write!(f, ")")
            }
            TimeFunction::Scaled { factor, inner } => write!(f, "scaled({factor}, {inner})"),
            TimeFunction::Tabulated { table } => {
                write!(f, "table({}, {}, [", table.start, table.step)?;
                for (i, v) in table.samples.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                let ext = match table.extension {
                    Extension::Error => "error",
                    Extension::Hold => "hold",
                    Extension::Periodic => "periodic",
                };
                write!(f, "], {ext}")?;
                if let Some(v) = table.variation {
                    write!(f, ", {v}")?;
                }
                write!(f, ")")
            }
            TimeFunction::Sawtooth { period, phase } => write!(f, "sawtooth({period}, {phase})"),
            TimeFunction::Quotient {
                numerator,
                denominator,
            } => write!(f, "quotient({numerator}, {denominator})"),
            TimeFunction::Abs { inner } => write!(f, "abs({inner})"),
            TimeFunction::PositivePart { inner } => write!(f, "pos({inner})"),
            TimeFunction::Exp { rate, inner } => write!(f, "exp({rate}, {inner})"),
            TimeFunction::WindowIntegral { integrand, lag } => {
                write!(f, "window_integral({integrand}, {lag})")
            }
            TimeFunction::Antiderivative { integrand, origin } => {
                write!(f, "antiderivative({integrand}, {origin})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_numeric_expressions() {
        let f = TimeFunction::parse("1 + ln(3/2 - 1/(2*e))").unwrap();
        let expected = 1.0 + (1.5 - 0.5 / std::f64::consts::E).ln();
        assert_eq!(f, TimeFunction::constant(expected));
    }

    #[test]
    fn round_trips_nested_descriptor() {
        let src = "sum(const(1), scaled(-2, sinusoid(0.5, 1, 2, -0.25)), pw_periodic(2, [(0, 0.5), (1, 2)]), table(0, 0.5, [1, 2, 3], hold, 0.01))";
        let f = TimeFunction::parse(src).unwrap();
        let g = TimeFunction::parse(&f.to_string()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn rejects_invalid_input() {
        assert!(TimeFunction::parse("sinusoid(1, 2)").is_err());
        assert!(TimeFunction::parse("pw_periodic(1, [(0.5, 1)])").is_err());
        assert!(TimeFunction::parse("foo(1)").is_err());
        assert!(TimeFunction::parse("const(1) extra").is_err());
        assert!(TimeFunction::parse("table(0, 1, [1, 2], sideways)").is_err());
    }

    #[test]
    fn bare_number_is_constant() {
        assert_eq!(TimeFunction::parse("-0.1").unwrap(), TimeFunction::constant(-0.1));
    }
}
