//! Parse a right-hand side, differentiate it and evaluate both.

use hysteresis::expr::{parse, Env, Var};

fn main() {
    let rhs = parse("u*x1*(1 - x1/25) - x1^2/(1 + x1^2)").expect("valid expression");
    let dfdx = rhs.differentiate(Var::X1).simplify();
    println!("f(x1, u)     = {}", rhs.to_text());
    println!("df/dx1       = {}", dfdx.to_text());

    let env = Env { x1: 2.0, u: 0.4, ..Env::default() };
    println!("f(2, 0.4)    = {:.6}", rhs.eval(&env).unwrap());
    println!("df/dx1(2, 0.4) = {:.6}", dfdx.eval(&env).unwrap());

    match parse("x1 + * u") {
        Ok(_) => unreachable!(),
        Err(e) => println!("rejected: {e}"),
    }
}
