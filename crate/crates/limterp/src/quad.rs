//! Composite 8-point Gauss–Legendre rule.

const NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Nodes and weights of the 8-point rule mapped to `[a, b]`.
pub fn gl8(a: f64, b: f64) -> [(f64, f64); 8] {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 8];
    for k in 0..4 {
        out[2 * k] = (c - r * NODES[k], r * WEIGHTS[k]);
        out[2 * k + 1] = (c + r * NODES[k], r * WEIGHTS[k]);
    }
    out
}

/// Splits `[a, b]` into panels no wider than `max_width`, honouring the
/// given breakpoints. Returns the panel edges in increasing order.
pub fn panels(a: f64, b: f64, breaks: &[f64], max_width: f64) -> Vec<f64> {
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|x| *x > a && *x < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = vec![cuts[0]];
    for w in cuts.windows(2) {
        let k = ((w[1] - w[0]) / max_width).ceil().max(1.0) as usize;
        for j in 1..k {
            edges.push(w[0] + (w[1] - w[0]) * j as f64 / k as f64);
        }
        edges.push(w[1]);
    }
    edges
}
