//! Zone operations on two overlapping boxes: difference, union and delay.

use clockmin::dbm::{Bound, Dbm};

fn main() {
    let names = ["x".to_string(), "y".to_string()];
    // 0 <= x <= 3, 0 <= y <= 2
    let a = Dbm::from_constraints(2, &[(1, 0, Bound::le(3)), (2, 0, Bound::le(2))]).unwrap();
    // 1 < x <= 5, y <= 2
    let b = Dbm::from_constraints(2, &[(1, 0, Bound::le(5)), (0, 1, Bound::lt(-1)), (2, 0, Bound::le(2))]).unwrap();
    println!("a = {}", a.render(&names));
    println!("b = {}", b.render(&names));

    let (inter, rest) = a.split_difference(&b);
    println!("a & b = {}", inter.map_or("empty".into(), |z| z.render(&names)));
    for p in &rest {
        println!("piece of a - b: {}", p.render(&names));
    }
    match a.convex_union(&b) {
        Some(u) => println!("a | b is convex: {}", u.render(&names)),
        None => println!("a | b is not convex"),
    }
    println!("future of a: {}", a.future().render(&names));
    println!("a after resetting y: {}", a.reset([clockmin::ta::ClockId(2)]).render(&names));
}
