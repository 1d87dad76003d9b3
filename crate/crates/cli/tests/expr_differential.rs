//! Differential test: the recursive-descent evaluator against a
//! self-contained shunting-yard evaluator with its own tokenizer. Both parse
//! the same random source strings and must agree bit-for-bit on values and
//! on whether evaluation fails.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use picardo_cli::expr::compile;

// ---------------------------------------------------------------------------
// Independent shunting-yard evaluator (test oracle)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Var(String),
    Func(String),
    Op(char),
    Neg,
    LParen,
    RParen,
}

fn oracle_tokenize(src: &str) -> Result<Vec<Tok>, String> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c == ' ' || c == '\t' {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                i += 1;
            }
            if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                let mut j = i + 1;
                if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push(Tok::Num(src[start..i].parse().map_err(|e| format!("{e}"))?));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len()
                && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
            {
                i += 1;
            }
            let name = src[start..i].to_string();
            // lookahead: identifier followed by '(' is a function
            let mut j = i;
            while j < bytes.len() && (bytes[j] as char) == ' ' {
                j += 1;
            }
            if j < bytes.len() && bytes[j] as char == '(' {
                out.push(Tok::Func(name));
            } else {
                out.push(Tok::Var(name));
            }
            continue;
        }
        match c {
            '(' => out.push(Tok::LParen),
            ')' => out.push(Tok::RParen),
            '+' | '*' | '/' | '^' => out.push(Tok::Op(c)),
            '-' => {
                // unary when at the start, after '(' or after an operator
                let unary = matches!(
                    out.last(),
                    None | Some(Tok::Op(_)) | Some(Tok::Neg) | Some(Tok::LParen)
                );
                if unary {
                    out.push(Tok::Neg);
                } else {
                    out.push(Tok::Op('-'));
                }
            }
            other => return Err(format!("bad char {other}")),
        }
        i += 1;
    }
    Ok(out)
}

fn prec(tok: &Tok) -> u8 {
    match tok {
        Tok::Neg => 4,
        Tok::Op('^') => 3,
        Tok::Op('*') | Tok::Op('/') => 2,
        Tok::Op('+') | Tok::Op('-') => 1,
        _ => 0,
    }
}

fn right_assoc(tok: &Tok) -> bool {
    matches!(tok, Tok::Neg | Tok::Op('^'))
}

fn to_rpn(tokens: Vec<Tok>) -> Result<Vec<Tok>, String> {
    let mut output = Vec::new();
    let mut stack: Vec<Tok> = Vec::new();
    for tok in tokens {
        match tok {
            Tok::Num(_) | Tok::Var(_) => output.push(tok),
            Tok::Func(_) => stack.push(tok),
            Tok::Op(_) | Tok::Neg => {
                while let Some(top) = stack.last() {
                    let pop = match top {
                        Tok::Op(_) | Tok::Neg => {
                            prec(top) > prec(&tok)
                                || (prec(top) == prec(&tok) && !right_assoc(&tok))
                        }
                        _ => false,
                    };
                    if pop {
                        output.push(stack.pop().expect("non-empty"));
                    } else {
                        break;
                    }
                }
                stack.push(tok);
            }
            Tok::LParen => stack.push(tok),
            Tok::RParen => {
                loop {
                    match stack.pop() {
                        Some(Tok::LParen) => break,
                        Some(op) => output.push(op),
                        None => return Err("unbalanced parens".into()),
                    }
                }
                if matches!(stack.last(), Some(Tok::Func(_))) {
                    output.push(stack.pop().expect("non-empty"));
                }
            }
        }
    }
    while let Some(op) = stack.pop() {
        if matches!(op, Tok::LParen) {
            return Err("unbalanced parens".into());
        }
        output.push(op);
    }
    Ok(output)
}

fn eval_rpn(rpn: &[Tok], bind: &dyn Fn(&str) -> Option<f64>) -> Result<f64, String> {
    let mut stack: Vec<f64> = Vec::new();
    let pop = |stack: &mut Vec<f64>| stack.pop().ok_or_else(|| "stack underflow".to_string());
    for tok in rpn {
        let value = match tok {
            Tok::Num(v) => *v,
            Tok::Var(name) => bind(name).ok_or_else(|| format!("unbound {name}"))?,
            Tok::Neg => -pop(&mut stack)?,
            Tok::Op(op) => {
                let b = pop(&mut stack)?;
                let a = pop(&mut stack)?;
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    '/' => {
                        if b == 0.0 {
                            return Err("division by zero".into());
                        }
                        a / b
                    }
                    '^' => a.powf(b),
                    _ => unreachable!(),
                }
            }
            Tok::Func(name) => {
                let x = pop(&mut stack)?;
                match name.as_str() {
                    "sin" => x.sin(),
                    "cos" => x.cos(),
                    "exp" => x.exp(),
                    "abs" => x.abs(),
                    "sqrt" => {
                        if x < 0.0 {
                            return Err("sqrt of negative".into());
                        }
                        x.sqrt()
                    }
                    "asin" => {
                        if !(-1.0..=1.0).contains(&x) {
                            return Err("asin domain".into());
                        }
                        x.asin()
                    }
                    other => return Err(format!("unknown function {other}")),
                }
            }
            Tok::LParen | Tok::RParen => return Err("paren in rpn".into()),
        };
        if !value.is_finite() {
            return Err("non-finite".into());
        }
        stack.push(value);
    }
    if stack.len() == 1 {
        Ok(stack[0])
    } else {
        Err("leftover stack".into())
    }
}

fn oracle_eval(src: &str, bind: &dyn Fn(&str) -> Option<f64>) -> Result<f64, String> {
    let rpn = to_rpn(oracle_tokenize(src)?)?;
    eval_rpn(&rpn, bind)
}

// ---------------------------------------------------------------------------
// Random expression source generator
// ---------------------------------------------------------------------------

const VARS: [&str; 3] = ["t1", "s1", "u"];
const FUNCS: [&str; 6] = ["sin", "cos", "exp", "sqrt", "abs", "asin"];

fn gen_source(rng: &mut ChaCha8Rng, depth: usize) -> String {
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => format!("{:.3}", rng.gen_range(0.0..4.0)),
            1 => rng.gen_range(1..20).to_string(),
            _ => VARS[rng.gen_range(0..VARS.len())].to_string(),
        };
    }
    match rng.gen_range(0..10) {
        0..=4 => {
            let op = ['+', '-', '*', '/', '^'][rng.gen_range(0..5)];
            format!(
                "{} {op} {}",
                gen_source(rng, depth - 1),
                gen_source(rng, depth - 1)
            )
        }
        5 => format!("-{}", gen_source(rng, depth - 1)),
        6 | 7 => format!("({})", gen_source(rng, depth - 1)),
        _ => {
            let f = FUNCS[rng.gen_range(0..FUNCS.len())];
            format!("{f}({})", gen_source(rng, depth - 1))
        }
    }
}

#[test]
fn evaluators_agree_on_random_expressions() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_817);
    let slots = [0.37, 0.81, 1.4];
    let bind = |name: &str| -> Option<f64> {
        VARS.iter().position(|v| *v == name).map(|i| slots[i])
    };
    let mut evaluated_ok = 0usize;
    for case in 0..1000 {
        let depth = rng.gen_range(1..5);
        let source = gen_source(&mut rng, depth);
        let main = compile(&source, &VARS).and_then(|c| c.eval(&slots));
        let oracle = oracle_eval(&source, &bind);
        match (main, oracle) {
            (Ok(a), Ok(b)) => {
                assert_eq!(
                    a.to_bits(),
                    b.to_bits(),
                    "case {case}: '{source}' -> {a} vs {b}"
                );
                evaluated_ok += 1;
            }
            (Err(_), Err(_)) => {}
            (a, b) => panic!("case {case}: '{source}' disagreed: {a:?} vs {b:?}"),
        }
    }
    // the generator should produce plenty of evaluable expressions
    assert!(evaluated_ok > 400, "only {evaluated_ok} evaluable cases");
}

#[test]
fn evaluators_agree_on_handpicked_precedence_cases() {
    let bind = |_: &str| -> Option<f64> { None };
    for source in [
        "-2^2",
        "2^-2",
        "-2^-2",
        "2^3^2",
        "1 - 2 - 3",
        "12/4/3",
        "2*3^2",
        "-(2+3)*4",
        "2^0.5",
        "abs(-3)^2",
    ] {
        let main = compile(source, &[]).and_then(|c| c.eval(&[]));
        let oracle = oracle_eval(source, &bind);
        match (main, oracle) {
            (Ok(a), Ok(b)) => assert_eq!(a.to_bits(), b.to_bits(), "'{source}': {a} vs {b}"),
            (a, b) => panic!("'{source}' disagreed: {a:?} vs {b:?}"),
        }
    }
}
