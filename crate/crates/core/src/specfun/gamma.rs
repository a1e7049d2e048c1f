use crate::{Error, Result};

/// Taylor coefficients of `1/Γ(1+x)` about `x = 0`.
pub(crate) const RECIP_GAMMA_1P: [f64; 29] = [
    1.0,
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783_2e-14,
    -5.348_122_539_423_017_982_4e-15,
    1.226_778_628_238_260_790_2e-15,
    -1.181_259_301_697_458_769_5e-16,
    1.186_692_254_751_600_332_6e-18,
    1.412_380_655_318_031_781_6e-18,
    -2.298_745_684_435_370_206_6e-19,
];

/// `1/Γ(1+x)` for `|x| ≤ 1/2`.
pub(crate) fn recip_gamma_1p(x: f64) -> f64 {
    RECIP_GAMMA_1P.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// `1/Γ(1+x) - 1` for `|x| ≤ 1/2`, without cancellation near zero.
fn recip_gamma_1p_m1(x: f64) -> f64 {
    x * RECIP_GAMMA_1P[1..]
        .iter()
        .rev()
        .fold(0.0, |acc, &c| acc * x + c)
}

// B_{2k} / (2k (2k-1)) for k = 1..=8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_78;

fn ln_gamma_stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = STIRLING.iter().rev().fold(0.0, |acc, &c| acc * inv2 + c) * inv;
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x) = Γ(1+x)/x
        return -(recip_gamma_1p_m1(x).ln_1p()) - x.ln();
    }
    if x <= 1.5 {
        return -(recip_gamma_1p_m1(x - 1.0).ln_1p());
    }
    if x <= 2.5 {
        // Γ(x) = (x-1) Γ(x-1)
        return (x - 2.0).ln_1p() - recip_gamma_1p_m1(x - 2.0).ln_1p();
    }
    if x < 12.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y > 2.5 {
            y -= 1.0;
            prod *= y;
        }
        return prod.ln() + ln_gamma_pos(y);
    }
    ln_gamma_stirling(x)
}
