//! 256-bit reference for one zero's second-difference term.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

const P: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

fn bf(x: f64) -> BigFloat {
    BigFloat::from_f64(x, P)
}

fn to_f64(x: &BigFloat, cc: &mut Consts) -> f64 {
    x.format(Radix::Dec, RM, cc).unwrap().parse().unwrap()
}

/// x^{s} for real x > 0 and s = σ + iγ, as (re, im).
fn cpow(x: &BigFloat, sigma: &BigFloat, gamma: &BigFloat, cc: &mut Consts) -> (BigFloat, BigFloat) {
    let lx = x.ln(P, RM, cc);
    let mag = sigma.mul(&lx, P, RM).exp(P, RM, cc);
    let ang = gamma.mul(&lx, P, RM);
    (
        mag.mul(&ang.cos(P, RM, cc), P, RM),
        mag.mul(&ang.sin(P, RM, cc), P, RM),
    )
}

/// 2 Re[((N+H)^{ρ+2} − 2N^{ρ+2} + (N−H)^{ρ+2}) / (ρ(ρ+1)(ρ+2))], ρ = 1/2 + iγ.
pub fn oracle(gamma: f64, n: u64, h: u64) -> f64 {
    let mut cc = Consts::new().unwrap();
    let g = bf(gamma);
    let sigma = bf(2.5);
    let mut re = BigFloat::from_f64(0.0, P);
    let mut im = BigFloat::from_f64(0.0, P);
    for (x, w) in [(n + h, 1.0), (n, -2.0), (n - h, 1.0)] {
        if x == 0 {
            continue;
        }
        let (a, b) = cpow(&bf(x as f64), &sigma, &g, &mut cc);
        re = re.add(&a.mul(&bf(w), P, RM), P, RM);
        im = im.add(&b.mul(&bf(w), P, RM), P, RM);
    }
    // d = ρ(ρ+1)(ρ+2)
    let mut dr = bf(0.5);
    let mut di = g.clone();
    for shift in [1.5, 2.5] {
        let (cr, ci) = (bf(shift), g.clone());
        let nr = dr.mul(&cr, P, RM).sub(&di.mul(&ci, P, RM), P, RM);
        let ni = dr.mul(&ci, P, RM).add(&di.mul(&cr, P, RM), P, RM);
        dr = nr;
        di = ni;
    }
    let num = re.mul(&dr, P, RM).add(&im.mul(&di, P, RM), P, RM);
    let den = dr.mul(&dr, P, RM).add(&di.mul(&di, P, RM), P, RM);
    to_f64(&bf(2.0).mul(&num.div(&den, P, RM), P, RM), &mut cc)
}
