//! Angular-momentum coupling coefficients.
//!
//! Spins are passed as twice their value (`two_j`) so half-integers stay exact.

/// `ln(n!)` for small `n` by direct summation; exact enough for the
/// oracle's spin sizes (total spin ≤ 6).
fn ln_factorial(n: i64) -> f64 {
    debug_assert!(n >= 0);
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Clebsch–Gordan coefficient `⟨j1 m1; j2 m2 | J M⟩` (Condon–Shortley phase),
/// evaluated with Racah's closed formula.
///
/// The alternating sum loses precision for large spins; intended for
/// `j ≲ 20`.
pub fn clebsch_gordan(two_j1: i64, two_m1: i64, two_j2: i64, two_m2: i64, two_j: i64, two_m: i64) -> f64 {
    if two_m1 + two_m2 != two_m {
        return 0.0;
    }
    if two_m1.abs() > two_j1 || two_m2.abs() > two_j2 || two_m.abs() > two_j {
        return 0.0;
    }
    if two_j < (two_j1 - two_j2).abs() || two_j > two_j1 + two_j2 {
        return 0.0;
    }
    if (two_j1 + two_m1) % 2 != 0 || (two_j2 + two_m2) % 2 != 0 || (two_j + two_m) % 2 != 0 {
        return 0.0;
    }
    if (two_j1 + two_j2 + two_j) % 2 != 0 {
        return 0.0;
    }
    let h = |x: i64| x / 2;
    let a = h(two_j1 + two_j2 - two_j);
    let b = h(two_j1 - two_j2 + two_j);
    let c = h(-two_j1 + two_j2 + two_j);
    let d = h(two_j1 + two_j2 + two_j) + 1;

    let ln_pref = (two_j as f64 + 1.0).ln() + ln_factorial(a) + ln_factorial(b) + ln_factorial(c) - ln_factorial(d)
        + ln_factorial(h(two_j + two_m))
        + ln_factorial(h(two_j - two_m))
        + ln_factorial(h(two_j1 - two_m1))
        + ln_factorial(h(two_j1 + two_m1))
        + ln_factorial(h(two_j2 - two_m2))
        + ln_factorial(h(two_j2 + two_m2));

    let k_min = 0.max(h(two_j2 - two_j - two_m1)).max(h(two_j1 - two_j + two_m2));
    let k_max = a.min(h(two_j1 - two_m1)).min(h(two_j2 + two_m2));
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let ln_den = ln_factorial(k)
            + ln_factorial(a - k)
            + ln_factorial(h(two_j1 - two_m1) - k)
            + ln_factorial(h(two_j2 + two_m2) - k)
            + ln_factorial(h(two_j - two_j2 + two_m1) + k)
            + ln_factorial(h(two_j - two_j1 - two_m2) + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (0.5 * ln_pref - ln_den).exp();
    }
    sum
}

/// `⟨S+1, 0 | S_A^z − S_B^z | S, 0⟩` for two equal spins `s` coupled to total
/// spin `S` and `S+1`.
///
/// Wigner–Eckart reduction of the sublattice spin between coupled states;
/// positive under the Condon–Shortley convention. Valid for arbitrary `s`.
pub fn staggered_element(two_s: i64, total: i64) -> f64 {
    let width = (two_s + 1) as f64;
    let next = (total + 1) as f64;
    let s = total as f64;
    let radicand = (width * width - next * next) / ((2.0 * s + 1.0) * (2.0 * s + 3.0));
    next * radicand.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singlet_of_two_halves() {
        let up_down = clebsch_gordan(1, 1, 1, -1, 0, 0);
        let down_up = clebsch_gordan(1, -1, 1, 1, 0, 0);
        assert!((up_down - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((down_up + 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn known_values() {
        // ⟨1 1; 1 -1 | 1 0⟩ = 1/√2, ⟨1 0; 1 0 | 2 0⟩ = √(2/3), ⟨1 0; 1 0 | 1 0⟩ = 0
        assert!((clebsch_gordan(2, 2, 2, -2, 2, 0) - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((clebsch_gordan(2, 0, 2, 0, 4, 0) - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!(clebsch_gordan(2, 0, 2, 0, 2, 0).abs() < 1e-14);
        // ⟨3/2 1/2; 1/2 1/2 | 2 1⟩ = √3/2
        assert!((clebsch_gordan(3, 1, 1, 1, 4, 2) - 3f64.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn columns_are_orthonormal() {
        let two_s = 5;
        for j in 0..=5 {
            for k in 0..=5 {
                let dot: f64 = (-two_s..=two_s)
                    .step_by(2)
                    .map(|m| {
                        clebsch_gordan(two_s, m, two_s, -m, 2 * j, 0) * clebsch_gordan(two_s, m, two_s, -m, 2 * k, 0)
                    })
                    .sum();
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12, "j={j} k={k} dot={dot}");
            }
        }
    }

    #[test]
    fn closed_form_matches_coupling_sum() {
        for two_s in 1..=12 {
            for total in 0..two_s {
                let sum: f64 = (-two_s..=two_s)
                    .step_by(2)
                    .map(|m| {
                        m as f64
                            * clebsch_gordan(two_s, m, two_s, -m, 2 * (total + 1), 0)
                            * clebsch_gordan(two_s, m, two_s, -m, 2 * total, 0)
                    })
                    .sum();
                // (S_A^z − S_B^z) acts as 2m = m (two_m units) on |m, −m⟩.
                let closed = staggered_element(two_s, total);
                assert!((sum - closed).abs() < 1e-11, "2s={two_s} S={total}: {sum} vs {closed}");
            }
        }
    }

    #[test]
    fn singlet_triplet_element_is_one() {
        assert!((staggered_element(1, 0) - 1.0).abs() < 1e-15);
    }
}
