#![allow(clippy::excessive_precision)]

use crate::error::{LabError, Result};
use crate::scalar::{lit, Real};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_4;
const SQRT_32: f64 = 5.656_854_249_492_380_195_206_754_896_838;
/// Below this |x| the central rational term of Φ is used.
const CENTRAL_CUTOFF: f64 = 0.674_489_75;

// W. J. Cody's rational Chebyshev coefficients for Φ (as used in R's pnorm).
const A: [f64; 5] = [
    2.235_252_035_460_683_928_7,
    161.028_231_068_555_878_81,
    1_067.689_485_460_370_958_2,
    18_154.981_253_343_561_249,
    0.065_682_337_918_207_449_113,
];
const B: [f64; 4] = [
    47.202_581_904_688_241_87,
    976.098_551_737_776_693_22,
    10_260.932_208_618_978_205,
    45_507.789_335_026_729_956,
];
const C: [f64; 9] = [
    0.398_941_512_088_134_667_64,
    8.883_149_794_388_375_941_2,
    93.506_656_132_177_855_979,
    597.270_276_394_800_262_26,
    2_494.537_585_290_372_671_1,
    6_848.190_450_536_282_332_6,
    11_602.651_437_647_350_124,
    9_842.714_838_383_978_021_8,
    1.076_557_677_372_019_231_7e-8,
];
const D: [f64; 8] = [
    22.266_688_044_328_115_691,
    235.387_901_782_624_998_61,
    1_519.377_599_407_554_805,
    6_485.558_298_266_760_755,
    18_615.571_640_885_098_091,
    34_900.952_721_145_977_266,
    38_912.003_286_093_271_411,
    19_685.429_676_859_990_727,
];
const P: [f64; 6] = [
    0.215_898_534_057_956_99,
    0.127_401_161_160_247_363_9,
    0.022_235_277_870_649_807,
    0.001_421_619_193_227_893_466,
    2.911_287_495_116_879_2e-5,
    0.023_073_441_764_940_173_03,
];
const Q: [f64; 5] = [
    1.284_260_096_144_911_21,
    0.468_238_212_480_865_118,
    0.065_988_137_868_928_551_5,
    0.003_782_396_332_027_582_44,
    7.297_515_550_839_662_05e-5,
];

/// Standard normal density φ(x).
pub fn std_normal_pdf<F: Real>(x: F) -> F {
    lit::<F>(INV_SQRT_2PI) * (-(x * x) / lit(2.0)).exp()
}

/// Standard normal distribution function Φ(x).
pub fn std_normal_cdf<F: Real>(x: F) -> F {
    cdf_pair(x).0
}

/// Upper tail 1 − Φ(x), evaluated without cancellation for large x.
pub fn std_normal_sf<F: Real>(x: F) -> F {
    cdf_pair(x).1
}

/// Returns (Φ(x), 1 − Φ(x)), each with full relative accuracy in its own tail.
fn cdf_pair<F: Real>(x: F) -> (F, F) {
    if x.is_nan() {
        return (x, x);
    }
    if x.is_infinite() {
        return if x > F::zero() {
            (F::one(), F::zero())
        } else {
            (F::zero(), F::one())
        };
    }
    let half = lit::<F>(0.5);
    let y = x.abs();

    if y <= lit(CENTRAL_CUTOFF) {
        let (mut num, mut den) = (F::zero(), F::zero());
        if y > F::epsilon() {
            let xsq = x * x;
            num = lit::<F>(A[4]) * xsq;
            den = xsq;
            for i in 0..3 {
                num = (num + lit(A[i])) * xsq;
                den = (den + lit(B[i])) * xsq;
            }
        }
        let temp = x * (num + lit(A[3])) / (den + lit(B[3]));
        return (half + temp, half - temp);
    }

    let tail = if y <= lit(SQRT_32) {
        let mut num = lit::<F>(C[8]) * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + lit(C[i])) * y;
            den = (den + lit(D[i])) * y;
        }
        let ratio = (num + lit(C[7])) / (den + lit(D[7]));
        split_gaussian_factor(y) * ratio
    } else {
        let xsq = (x * x).recip();
        let mut num = lit::<F>(P[5]) * xsq;
        let mut den = xsq;
        for i in 0..4 {
            num = (num + lit(P[i])) * xsq;
            den = (den + lit(Q[i])) * xsq;
        }
        let mut ratio = xsq * (num + lit(P[4])) / (den + lit(Q[4]));
        ratio = (lit::<F>(INV_SQRT_2PI) - ratio) / y;
        split_gaussian_factor(y) * ratio
    };

    if x > F::zero() {
        (F::one() - tail, tail)
    } else {
        (tail, F::one() - tail)
    }
}

/// exp(−y²/2) computed as a product of two exponentials so the leading part
/// is exact in the scalar type.
fn split_gaussian_factor<F: Real>(y: F) -> F {
    let sixteen = lit::<F>(16.0);
    let coarse = (y * sixteen).trunc() / sixteen;
    let fine = (y - coarse) * (y + coarse);
    (-coarse * coarse / lit(2.0)).exp() * (-fine / lit(2.0)).exp()
}

// Acklam's rational approximation to the lower half of Φ⁻¹.
const QA: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_690e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const QB: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const QC: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const QD: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const Q_LOW: f64 = 0.024_25;

/// Standard normal quantile Φ⁻¹(p) for p ∈ (0, 1).
///
/// A rational initial estimate is polished with two Halley steps against
/// [`std_normal_cdf`], so the round trip `Φ(Φ⁻¹(p))` is accurate to a few ulps.
pub fn std_normal_quantile<F: Real>(p: F) -> Result<F> {
    if !(p > F::zero() && p < F::one()) {
        return Err(LabError::domain(
            "std_normal_quantile",
            format!("p = {p} is not in (0, 1)"),
        ));
    }
    let half = lit::<F>(0.5);
    if p == half {
        return Ok(F::zero());
    }
    if p > half {
        // 1 − p is exact here.
        return Ok(-lower_quantile(F::one() - p));
    }
    Ok(lower_quantile(p))
}

fn lower_quantile<F: Real>(p: F) -> F {
    let poly = |coef: &[f64], v: F| coef.iter().fold(F::zero(), |acc, &c| acc * v + lit(c));

    let mut x = if p < lit(Q_LOW) {
        let q = (lit::<F>(-2.0) * p.ln()).sqrt();
        poly(&QC, q) / (poly(&QD, q) * q + F::one())
    } else {
        let q = p - lit(0.5);
        let r = q * q;
        poly(&QA, r) * q / (poly(&QB, r) * r + F::one())
    };

    for _ in 0..2 {
        let err = std_normal_cdf(x) - p;
        let u = err / std_normal_pdf(x);
        if !u.is_finite() {
            break;
        }
        x = x - u / (F::one() + x * u / lit(2.0));
    }
    x
}

/// Mills-ratio bracket `(x φ(x) / (1 + x²), φ(x) / x)` around the upper tail Φ(−x).
pub fn mills_bracket<F: Real>(x: F) -> Result<(F, F)> {
    if x.is_nan() || x <= F::zero() || !x.is_finite() {
        return Err(LabError::domain(
            "mills_bracket",
            format!("x = {x} must be finite and positive"),
        ));
    }
    let density = std_normal_pdf(x);
    Ok((x * density / (F::one() + x * x), density / x))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Φ by the everywhere-convergent series Φ(x) = ½ + φ(x) Σ x^{2n+1} / (2n+1)!!.
    fn series_cdf(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term.abs() > 1e-30 * sum.abs().max(1e-300) {
            n += 1.0;
            term *= x * x / (2.0 * n + 1.0);
            sum += term;
        }
        0.5 + INV_SQRT_2PI * (-x * x / 2.0).exp() * sum
    }

    // 40-digit references.
    const REFERENCE: [(f64, f64); 12] = [
        (-8.0, 6.220_960_574_271_784e-16),
        (-6.0, 9.865_876_450_376_981e-10),
        (-5.0, 2.866_515_718_791_939e-7),
        (-3.0, 0.001_349_898_031_630_094_5),
        (-1.0, 0.158_655_253_931_457_05),
        (-0.67, 0.251_428_895_095_310_1),
        (-1e-3, 0.499_601_057_786_088_94),
        (0.3, 0.617_911_422_188_952_6),
        (0.6744, 0.749_971_478_627_059_4),
        (2.5, 0.993_790_334_674_223_9),
        (4.2, 0.999_986_654_250_984_1),
        (5.7, 0.999_999_994_009_628_6),
    ];

    #[test]
    fn pdf_values() {
        assert!((std_normal_pdf(0.0_f64) - 0.398_942_280_401_432_7).abs() < 1e-16);
        assert!((std_normal_pdf(1.0_f64) - 0.241_970_724_519_143_37).abs() < 1e-16);
        for x in [0.1, 0.7, 2.3, 5.0_f64] {
            assert_eq!(std_normal_pdf(x), std_normal_pdf(-x));
        }
    }

    #[test]
    fn cdf_matches_reference_values() {
        for (x, expected) in REFERENCE {
            let got = std_normal_cdf(x);
            let rel = ((got - expected) / expected).abs();
            assert!(rel < 1e-14, "Φ({x}) = {got}, expected {expected}");
        }
        assert_eq!(std_normal_cdf(0.0_f64), 0.5);
        assert!((std_normal_cdf(1.959_963_984_540_054_f64) - 0.975).abs() < 1e-12);
    }

    #[test]
    fn cdf_matches_series_and_is_symmetric() {
        let mut x = -8.0_f64;
        while x <= 8.0 {
            let got = std_normal_cdf(x);
            assert!((got - series_cdf(x)).abs() < 1e-14, "x = {x}");
            assert!((std_normal_cdf(-x) - (1.0 - got)).abs() < 1e-14);
            x += 0.013;
        }
    }

    #[test]
    fn far_left_tail_is_tiny_but_positive() {
        let v = std_normal_cdf(-8.0_f64);
        assert!(v > 0.0 && v < 1e-14);
        let (lo, hi) = mills_bracket(8.0_f64).unwrap();
        assert!(lo <= v && v <= hi);
    }

    #[test]
    fn sf_keeps_relative_accuracy() {
        let v = std_normal_sf(8.0_f64);
        assert!(((v - 6.220_960_574_271_784e-16) / v).abs() < 1e-13);
        assert!(std_normal_sf(40.0_f64) >= 0.0);
        assert_eq!(std_normal_cdf(f64::INFINITY), 1.0);
        assert_eq!(std_normal_cdf(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(std_normal_quantile(0.5_f64).unwrap(), 0.0);
        let q = std_normal_quantile(0.975_f64).unwrap();
        assert!((q - 1.959_963_984_540_054).abs() < 1e-12);
        for p in [0.001, 0.02, 0.2, 0.4_f64] {
            let a = std_normal_quantile(p).unwrap();
            let b = std_normal_quantile(1.0 - p).unwrap();
            assert!((a + b).abs() < 1e-9 * a.abs().max(1.0), "p = {p}");
        }
    }

    #[test]
    fn quantile_by_bisection_agrees() {
        for p in [1e-9, 0.0123, 0.3, 0.77, 0.975, 0.999_99_f64] {
            let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if std_normal_cdf(mid) < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let q = std_normal_quantile(p).unwrap();
            assert!((q - 0.5 * (lo + hi)).abs() < 1e-8, "p = {p}");
            assert!((std_normal_cdf(q) - p).abs() < 1e-10);
        }
    }

    #[test]
    fn quantile_rejects_out_of_domain() {
        for p in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(std_normal_quantile(p).is_err());
        }
    }

    #[test]
    fn mills_bracket_contains_tail() {
        for x in [0.05, 1.0, 3.0, 7.5_f64] {
            let (lo, hi) = mills_bracket(x).unwrap();
            let tail = std_normal_cdf(-x);
            assert!(lo <= tail && tail <= hi, "x = {x}");
        }
        let (lo, hi) = mills_bracket(1.0_f64).unwrap();
        assert!(lo < 0.15866 && 0.15865 < hi);
        for x in [1.0, 1.5, 4.0_f64] {
            assert!(std_normal_cdf(-x) >= std_normal_pdf(x) / (2.0 * x));
        }
        assert!(mills_bracket(0.0_f64).is_err());
        assert!(mills_bracket(-1.0_f64).is_err());
    }

    #[test]
    fn single_precision_instantiation() {
        assert!((std_normal_cdf(1.0_f32) - 0.841_344_75).abs() < 1e-6);
        assert!((std_normal_quantile(0.975_f32).unwrap() - 1.959_964).abs() < 1e-4);
    }
}
