use super::{BinOp, Expr, Func};

pub(super) fn differentiate(e: &Expr, var: &str) -> Expr {
    if !e.depends_on(var) {
        return Expr::zero();
    }
    match e {
        Expr::Num(_) | Expr::Pi => Expr::zero(),
        Expr::Var(name) => {
            if &**name == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Neg(a) => Expr::neg(differentiate(a, var)),
        Expr::Bin(op, a, b) => {
            let (a, b) = (a.as_ref(), b.as_ref());
            let da = differentiate(a, var);
            let db = differentiate(b, var);
            match op {
                BinOp::Add => Expr::add(da, db),
                BinOp::Sub => Expr::sub(da, db),
                BinOp::Mul => Expr::add(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db)),
                BinOp::Div => {
                    // (a'b - ab') / b^2
                    let num = Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db));
                    Expr::div(num, Expr::pow(b.clone(), Expr::num(2.0)))
                }
                BinOp::Pow => pow_rule(a, b, da, db, var),
            }
        }
        Expr::Call(f, a) => {
            let da = differentiate(a, var);
            let outer = match f {
                Func::Sin => Expr::call(Func::Cos, (**a).clone()),
                Func::Cos => Expr::neg(Expr::call(Func::Sin, (**a).clone())),
                // sec^2 = 1 + tan^2
                Func::Tan => Expr::add(Expr::one(), Expr::pow(Expr::call(Func::Tan, (**a).clone()), Expr::num(2.0))),
                Func::Exp => e.clone(),
                Func::Ln => Expr::div(Expr::one(), (**a).clone()),
                Func::Sqrt => Expr::div(Expr::num(0.5), e.clone()),
            };
            Expr::mul(outer, da)
        }
    }
}

fn pow_rule(a: &Expr, b: &Expr, da: Expr, db: Expr, var: &str) -> Expr {
    if !b.depends_on(var) {
        // b * a^(b-1) * a'
        let exponent = Expr::sub(b.clone(), Expr::one());
        return Expr::mul(Expr::mul(b.clone(), Expr::pow(a.clone(), exponent)), da);
    }
    let power = Expr::pow(a.clone(), b.clone());
    if !a.depends_on(var) {
        // a^b * ln(a) * b'
        return Expr::mul(Expr::mul(power, Expr::call(Func::Ln, a.clone())), db);
    }
    // a^b * (b' ln a + b a'/a)
    let inner = Expr::add(
        Expr::mul(db, Expr::call(Func::Ln, a.clone())),
        Expr::div(Expr::mul(b.clone(), da), a.clone()),
    );
    Expr::mul(power, inner)
}
