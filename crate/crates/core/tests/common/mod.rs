/// Closest double to `num / den`, decided with integer arithmetic: the
/// candidate must be at least as close as both neighbours.
pub fn is_correctly_rounded(x: f64, num: u64, den: u64) -> bool {
    // Candidates lie in [0.25, 1], so each is m * 2^-54 with integer m.
    let dist = |v: f64| -> u128 {
        let m = (v * 2f64.powi(54)) as u128;
        assert_eq!(m as f64, v * 2f64.powi(54));
        let lhs = m * den as u128;
        let rhs = (num as u128) << 54;
        lhs.abs_diff(rhs)
    };
    let here = dist(x);
    let up = f64::from_bits(x.to_bits() + 1);
    let down = f64::from_bits(x.to_bits() - 1);
    here <= dist(down) && (up > 1.0 || here <= dist(up))
}
