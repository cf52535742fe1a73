//! cos θ and cos²θ in the |l, 0⟩ basis, and how fast they reach their large-l limits.

use kickrotor::angular::{
    exact_cos2_element, exact_cos_element, ASYMPTOTIC_COS2_DIAG, ASYMPTOTIC_COS2_HOP, ASYMPTOTIC_COS_HOP,
};

fn main() {
    println!("{:>5} {:>12} {:>12} {:>12}", "l", "cos l+1", "cos² diag", "cos² l+2");
    for l in [0usize, 1, 2, 5, 10, 25, 50, 100, 400] {
        println!(
            "{l:>5} {:>12.8} {:>12.8} {:>12.8}",
            exact_cos_element(l + 1, l),
            exact_cos2_element(l, l),
            exact_cos2_element(l + 2, l)
        );
    }
    println!("limit {ASYMPTOTIC_COS_HOP:>12.8} {ASYMPTOTIC_COS2_DIAG:>12.8} {ASYMPTOTIC_COS2_HOP:>12.8}");
}
