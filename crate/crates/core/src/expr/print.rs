use std::fmt;

use super::{BinOp, Expr, NodeKind};

/// Writes `e` so that parsing the output reproduces the same tree.
pub(super) fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Num(v) => write!(f, "{v}"),
        Expr::Pi => f.write_str("pi"),
        Expr::Var(name) => f.write_str(name),
        Expr::Call(func, arg) => {
            write!(f, "{}(", func.name())?;
            write_expr(arg, f)?;
            f.write_str(")")
        }
        Expr::Neg(a) => {
            f.write_str("-")?;
            // a bare `-2` would read back as a negative literal
            let wrap = matches!(**a, Expr::Num(v) if !v.is_sign_negative()) || a.node_kind() < NodeKind::Neg;
            write_operand(a, wrap, f)
        }
        Expr::Bin(op, a, b) => {
            let (level, sym) = match op {
                BinOp::Add => (NodeKind::Sum, " + "),
                BinOp::Sub => (NodeKind::Sum, " - "),
                BinOp::Mul => (NodeKind::Product, "*"),
                BinOp::Div => (NodeKind::Product, "/"),
                BinOp::Pow => (NodeKind::Power, "^"),
            };
            let (wrap_left, wrap_right) = if *op == BinOp::Pow {
                (a.node_kind() <= NodeKind::Power, b.node_kind() < NodeKind::Neg)
            } else {
                (a.node_kind() < level, b.node_kind() <= level)
            };
            write_operand(a, wrap_left, f)?;
            f.write_str(sym)?;
            write_operand(b, wrap_right, f)
        }
    }
}

fn write_operand(e: &Expr, wrap: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if wrap {
        f.write_str("(")?;
        write_expr(e, f)?;
        f.write_str(")")
    } else {
        write_expr(e, f)
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, BinOp, Expr, Func};

    fn roundtrip(e: &Expr) {
        let printed = e.to_string();
        let back = parse(&printed).unwrap_or_else(|err| panic!("{printed:?}: {err}"));
        assert_eq!(&back, e, "printed as {printed:?}");
    }

    #[test]
    fn parsed_text_reprints_to_same_tree() {
        for src in [
            "x1*x1 + sin(x2)",
            "a - (b - c)",
            "a - b - c",
            "a/(b*c)",
            "(a/b)*c",
            "-x^2",
            "(-x)^2",
            "2^3^2",
            "(2^3)^2",
            "x^-2",
            "-(2)",
            "--x",
            "-2*x",
            "x*-y",
            "x + -3.5",
            "exp(-ln(x))/sqrt(pi)",
            "-(a + b)*c",
            "tan(x)^(1/2)",
            "1e-300*x",
        ] {
            let e = parse(src).unwrap();
            roundtrip(&e);
        }
    }

    #[test]
    fn hand_built_trees_roundtrip() {
        let x = || Box::new(Expr::var("x"));
        let cases = [
            Expr::Neg(Box::new(Expr::Num(2.0))),
            Expr::Neg(Box::new(Expr::Num(-2.0))),
            Expr::Bin(BinOp::Pow, Box::new(Expr::Num(-2.0)), x()),
            Expr::Bin(BinOp::Pow, x(), Box::new(Expr::Num(-2.0))),
            Expr::Bin(BinOp::Add, x(), Box::new(Expr::Bin(BinOp::Add, x(), x()))),
            Expr::Bin(BinOp::Mul, Box::new(Expr::Num(-1.5)), Box::new(Expr::Call(Func::Cos, x()))),
            Expr::Neg(Box::new(Expr::Bin(BinOp::Pow, x(), x()))),
            Expr::Bin(BinOp::Pow, x(), Box::new(Expr::Neg(Box::new(Expr::Bin(BinOp::Pow, x(), x()))))),
        ];
        for e in &cases {
            roundtrip(e);
        }
    }
}
