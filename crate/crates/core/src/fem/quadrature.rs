//! Quadrature rules on the reference triangle (barycentric points, weights
//! summing to one) and on the unit interval.

/// Barycentric point and weight normalized to unit area.
pub type TriPoint = ([f64; 3], f64);

fn orbit3(a: f64, b: f64, w: f64) -> [TriPoint; 3] {
    [([a, b, b], w), ([b, a, b], w), ([b, b, a], w)]
}

fn orbit6(a: f64, b: f64, c: f64, w: f64) -> [TriPoint; 6] {
    [([a, b, c], w), ([a, c, b], w), ([b, a, c], w), ([b, c, a], w), ([c, a, b], w), ([c, b, a], w)]
}

/// Seven-point rule exact for polynomials of degree 5.
pub fn triangle_degree5() -> Vec<TriPoint> {
    let mut q = vec![([1.0 / 3.0; 3], 0.225)];
    q.extend(orbit3(0.059_715_871_789_769_8, 0.470_142_064_105_115_1, 0.132_394_152_788_506_2));
    q.extend(orbit3(0.797_426_985_353_087_3, 0.101_286_507_323_456_3, 0.125_939_180_544_827_1));
    q
}

/// Twelve-point rule exact for polynomials of degree 6.
pub fn triangle_degree6() -> Vec<TriPoint> {
    let mut q = Vec::with_capacity(12);
    q.extend(orbit3(0.501_426_509_658_179, 0.249_286_745_170_910, 0.116_786_275_726_379));
    q.extend(orbit3(0.873_821_971_016_996, 0.063_089_014_491_502, 0.050_844_906_370_207));
    q.extend(orbit6(0.053_145_049_844_817, 0.310_352_451_033_784, 0.636_502_499_121_399, 0.082_851_075_618_374));
    q
}

/// Three-point Gauss rule on `[0, 1]` as `(s, weight)`.
pub fn interval_gauss3() -> [(f64, f64); 3] {
    let d = 0.5 * (0.6f64).sqrt();
    [(0.5 - d, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + d, 5.0 / 18.0)]
}
