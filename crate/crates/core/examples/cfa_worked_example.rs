//! 0-CFA on a two-lambda program, labeled children-first so the numbers
//! match a hand numbering: constraints, least solution and the terms that
//! can run inside a stochastic branch.

use ppl_align::ast::LabelScheme;
use ppl_align::cfa::analyze_with;
use ppl_align::models;
use ppl_align::surface::parse_core;

fn main() {
    let src = models::EQ1;
    print!("{src}");
    let t = parse_core(src).unwrap();
    let a = analyze_with(&t, &LabelScheme::PostOrder).unwrap();

    println!("\n{}\n", a.annotated());
    println!("{} constraints:", a.constraints.len());
    print!("{}", a.dump_constraints());
    println!("\nleast solution:");
    for (var, values) in a.solution.iter() {
        let vs: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        println!("  {var} = {{{}}}", vs.join(", "));
    }
    let dynamic: Vec<String> = a.dynamic.iter().map(|l| l.to_string()).collect();
    println!("\ndynamic labels: {{{}}}", dynamic.join(", "));
}
